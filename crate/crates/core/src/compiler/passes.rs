//! Sequence passes: frame absorption, cancellation, Bloch-Siegert frame
//! corrections and delay unwinding for shaped pulses.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::sequence::{CompiledSequence, SequenceElement};
use crate::error::Result;
use crate::pulse::{self, Placement, PulseEvent};
use crate::spin::SpinSystem;

/// Move every frame shift to the end of the sequence, rewriting the phases
/// of the pulses it passes: a Z(theta) before a pulse at phase phi equals the
/// pulse at phi - theta followed by Z(theta).
pub fn absorb_z(seq: &CompiledSequence, diagonal_input: bool) -> CompiledSequence {
    let n = seq.n;
    let mut z = vec![0.0f64; n];
    let mut out = Vec::with_capacity(seq.elements.len());
    let mut seen_pulse = false;
    for el in &seq.elements {
        match el {
            SequenceElement::FrameShift { spin, angle } => {
                if diagonal_input && !seen_pulse {
                    // Z rotations ahead of the first pulse do not act on a diagonal state
                    continue;
                }
                z[*spin] += angle;
            }
            SequenceElement::Pulse(p) => {
                seen_pulse = true;
                let mut p = p.clone();
                for t in p.targets.iter_mut() {
                    t.phase_deg = (t.phase_deg - z[t.spin]).rem_euclid(360.0);
                }
                out.push(SequenceElement::Pulse(p));
            }
            SequenceElement::Delay(d) => out.push(SequenceElement::Delay(*d)),
        }
    }
    for (spin, &angle) in z.iter().enumerate() {
        if angle != 0.0 {
            out.push(SequenceElement::FrameShift { spin, angle });
        }
    }
    seq.with_elements(out)
}

fn same_pulse_kind(a: &PulseEvent, b: &PulseEvent) -> bool {
    a.duration == b.duration && a.shape == b.shape
}

fn phase_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// One leftmost-first rewrite; returns true when something changed.
fn simplify_once(els: &mut Vec<SequenceElement>, global_phase: &mut f64) -> bool {
    for i in 0..els.len() {
        match els[i].clone() {
            SequenceElement::FrameShift { spin, angle } => {
                let r = angle.rem_euclid(720.0);
                if r.abs() < 1e-12 || (720.0 - r).abs() < 1e-12 {
                    els.remove(i);
                    return true;
                }
                if (r - 360.0).abs() < 1e-12 {
                    *global_phase += PI;
                    els.remove(i);
                    return true;
                }
                // merge with the next frame shift on the same spin; frames commute with delays
                for j in i + 1..els.len() {
                    match &els[j] {
                        SequenceElement::FrameShift { spin: s2, angle: a2 } if *s2 == spin => {
                            let total = angle + a2;
                            els[i] = SequenceElement::FrameShift { spin, angle: total };
                            els.remove(j);
                            return true;
                        }
                        SequenceElement::Delay(_) => continue,
                        e if e.touches(spin) => break,
                        _ => continue,
                    }
                }
            }
            SequenceElement::Pulse(p) if p.targets.len() == 1 => {
                let s = p.targets[0].spin;
                for j in i + 1..els.len() {
                    match &els[j] {
                        SequenceElement::Delay(_) => break,
                        SequenceElement::Pulse(q) if q.targets.len() == 1 && q.targets[0].spin == s => {
                            let (a, b) = (&p.targets[0], &q.targets[0]);
                            if same_pulse_kind(&p, q)
                                && (a.angle_deg - b.angle_deg).abs() < 1e-9
                                && (phase_diff(a.phase_deg, b.phase_deg) - 180.0).abs() < 1e-9
                            {
                                els.remove(j);
                                els.remove(i);
                                return true;
                            }
                            break;
                        }
                        e if e.touches(s) => break,
                        _ => continue,
                    }
                }
            }
            _ => {}
        }
    }
    false
}

/// Cancel adjacent inverse pulses and merge frame shifts, to a fixpoint.
pub fn simplify(seq: &CompiledSequence) -> CompiledSequence {
    let mut els = seq.elements.clone();
    let mut gp = seq.global_phase;
    let bound = els.len() + 1;
    for _ in 0..bound * 2 {
        if !simplify_once(&mut els, &mut gp) {
            break;
        }
    }
    let mut out = seq.with_elements(els);
    out.global_phase = gp;
    out
}

/// Insert R_z(-theta) on each spectator after every pulse, theta being the
/// integrated Bloch-Siegert rotation of that spectator.
pub fn insert_bs_corrections(seq: &CompiledSequence, system: &SpinSystem) -> Result<CompiledSequence> {
    let mut out = Vec::with_capacity(seq.elements.len());
    for el in &seq.elements {
        out.push(el.clone());
        if let SequenceElement::Pulse(p) = el {
            let theta = pulse::accumulate_bs_phase(system, p)?;
            for (spin, th) in theta.iter().enumerate() {
                if *th != 0.0 {
                    out.push(SequenceElement::FrameShift { spin, angle: -th });
                }
            }
        }
    }
    Ok(seq.with_elements(out))
}

/// Cache of unwinding fractions keyed by shape, angle and width.
#[derive(Debug, Default, Clone)]
pub struct UnwindCache {
    map: HashMap<(String, i64, i64), f64>,
}

impl UnwindCache {
    /// Fraction of pw to remove from each side of the pulse.
    pub fn tau(&mut self, p: &PulseEvent) -> Result<f64> {
        let angle = p.targets.iter().map(|t| t.angle_deg).fold(0.0, f64::max);
        if angle >= 135.0 {
            return Ok(0.5);
        }
        let key = (p.shape.name.clone(), (angle * 1e3).round() as i64, (p.duration * 1e9).round() as i64);
        if let Some(t) = self.map.get(&key) {
            return Ok(*t);
        }
        // two-spin surrogate: the target and one weakly coupled neighbour
        let sys = SpinSystem::new(2).with_j(0, 1, 10.0);
        let ev = PulseEvent::selective(&sys, 0, &p.shape, angle, 0.0, p.duration);
        let t = pulse::unwind_tau(&sys, &ev, Placement::Symmetric)?;
        self.map.insert(key, t);
        Ok(t)
    }
}

/// Shorten each delay by the unwinding time of its neighbouring pulses.
pub fn apply_unwinding(seq: &CompiledSequence, cache: &mut UnwindCache) -> Result<CompiledSequence> {
    let els = &seq.elements;
    let mut out = els.clone();
    let mut warnings = Vec::new();
    for i in 0..els.len() {
        let SequenceElement::Delay(d) = els[i] else { continue };
        let mut cut = 0.0;
        // nearest pulse on each side, skipping frame shifts
        let before = els[..i].iter().rev().find(|e| !matches!(e, SequenceElement::FrameShift { .. }));
        let after = els[i + 1..].iter().find(|e| !matches!(e, SequenceElement::FrameShift { .. }));
        for side in [before, after].into_iter().flatten() {
            if let SequenceElement::Pulse(p) = side {
                cut += cache.tau(p)? * p.duration;
            }
        }
        let nd = d - cut;
        if nd < 0.0 {
            warnings.push(format!(
                "delay {} of {:.3} us too short to unwind {:.3} us; clamped to 0",
                i,
                d * 1e6,
                cut * 1e6
            ));
        }
        out[i] = SequenceElement::Delay(nd.max(0.0));
    }
    let mut s = seq.with_elements(out);
    s.warnings.extend(warnings);
    Ok(s)
}
