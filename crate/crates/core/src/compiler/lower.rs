//! Gate lowering: gates to rotation / Z / ZZ primitives, and primitives to
//! pulses, frame shifts and refocused delays.

use std::collections::VecDeque;
use std::f64::consts::PI;

use super::gate::{self, Gate};
use super::refocus::synthesize_refocus;
use super::sequence::{CompiledSequence, PulseLibrary, SequenceElement};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pulse::{Axis, PulseEvent, RfModel};
use crate::spin::SpinSystem;

/// Lowest-level logical operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// Rotation about the xy-plane axis at `phase` (degrees).
    Rot {
        spin: usize,
        phase: f64,
        angle: f64,
    },
    Rz {
        spin: usize,
        angle: f64,
    },
    /// exp(-i angle/2 Z_a Z_b), angle in degrees.
    Zz {
        a: usize,
        b: usize,
        angle: f64,
    },
    Wait(f64),
}

impl Primitive {
    fn map(&self, f: &impl Fn(usize) -> usize) -> Primitive {
        match *self {
            Primitive::Rot { spin, phase, angle } => Primitive::Rot { spin: f(spin), phase, angle },
            Primitive::Rz { spin, angle } => Primitive::Rz { spin: f(spin), angle },
            Primitive::Zz { a, b, angle } => Primitive::Zz { a: f(a), b: f(b), angle },
            Primitive::Wait(t) => Primitive::Wait(t),
        }
    }

    /// Logical unitary; `Wait` is the identity.
    pub fn unitary(&self, n: usize) -> CMat {
        match *self {
            Primitive::Rot { spin, phase, angle } => crate::pulse::ideal_rotation(Axis::Phase(phase), angle, spin, n),
            Primitive::Rz { spin, angle } => crate::pulse::ideal_rotation(Axis::Z, angle, spin, n),
            Primitive::Zz { a, b, angle } => zz_unitary(a, b, angle, n),
            Primitive::Wait(_) => linalg::identity(1 << n),
        }
    }
}

pub fn zz_unitary(a: usize, b: usize, angle: f64, n: usize) -> CMat {
    let h = angle.to_radians() / 2.0;
    gate::diagonal_matrix(n, |x| if linalg::spin_bit(x, a, n) == linalg::spin_bit(x, b, n) { -h } else { h })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    pub library: PulseLibrary,
    /// Lower top-level gates exactly; otherwise use the cheaper variants
    /// that are correct up to diagonal phases.
    pub phase_exact: bool,
    /// Emit refocusing flips on several spins as one simultaneous pulse.
    pub allow_simultaneous: bool,
    /// Spins known to be along z; their mutual couplings are not refocused.
    pub known_z: Vec<usize>,
    pub absorb_z: bool,
    /// Drop frame shifts that precede the first pulse.
    pub diagonal_input: bool,
    pub simplify: bool,
    pub bs_corrections: bool,
    /// Shorten delays next to pulses to unwind coupling during shaped pulses.
    pub unwind: bool,
    pub rf_model: RfModel,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            library: PulseLibrary::hard(),
            phase_exact: true,
            allow_simultaneous: true,
            known_z: Vec::new(),
            absorb_z: true,
            diagonal_input: false,
            simplify: true,
            bs_corrections: false,
            unwind: false,
            rf_model: RfModel::Selective,
        }
    }
}

impl CompileOptions {
    /// Raw lowering with no passes.
    pub fn raw() -> Self {
        CompileOptions { absorb_z: false, simplify: false, ..Default::default() }
    }

    /// Shaped selective pulses with delay unwinding.
    pub fn shaped() -> Self {
        CompileOptions { library: PulseLibrary::selective(), unwind: true, ..Default::default() }
    }
}

fn rot(spin: usize, phase: f64, angle: f64) -> Primitive {
    Primitive::Rot { spin, phase, angle }
}

fn rz(spin: usize, angle: f64) -> Primitive {
    Primitive::Rz { spin, angle }
}

/// Primitives in time order, without global-phase bookkeeping.
fn raw_lower(g: &Gate, exact: bool) -> Result<Vec<Primitive>> {
    Ok(match g {
        Gate::Rx { spin, angle } => vec![rot(*spin, 0.0, *angle)],
        Gate::Ry { spin, angle } => vec![rot(*spin, 90.0, *angle)],
        Gate::Rz { spin, angle } => vec![rz(*spin, *angle)],
        Gate::Rphi { spin, phase, angle } => vec![rot(*spin, *phase, *angle)],
        Gate::Hadamard(s) => {
            // X then Y-bar is H up to a trailing Z(90)
            let mut v = vec![rot(*s, 0.0, 90.0), rot(*s, 270.0, 90.0)];
            if exact {
                v.push(rz(*s, 90.0));
            }
            v
        }
        Gate::Not(s) => vec![rot(*s, 0.0, 180.0)],
        Gate::Cnot { control, target } => {
            let mut v = vec![
                rot(*target, 90.0, 90.0),
                Primitive::Zz { a: *control, b: *target, angle: 90.0 },
                rot(*target, 0.0, 90.0),
            ];
            if exact {
                v.push(rz(*target, -90.0));
                v.push(rz(*control, 90.0));
            }
            v
        }
        Gate::ControlledZ { control, target, angle } => {
            vec![rz(*target, angle / 2.0), Primitive::Zz { a: *control, b: *target, angle: -angle / 2.0 }]
        }
        Gate::CPhase { control, target, angle } => vec![
            rz(*control, angle / 2.0),
            rz(*target, angle / 2.0),
            Primitive::Zz { a: *control, b: *target, angle: -angle / 2.0 },
        ],
        Gate::Toffoli { c1, c2, target } => {
            let mut v = raw_lower(&Gate::Hadamard(*target), true)?;
            v.extend(raw_lower(&gate::phase_flip(&[*c1, *c2, *target], &[7]), true)?);
            v.extend(raw_lower(&Gate::Hadamard(*target), true)?);
            v
        }
        Gate::Fredkin { control, t1, t2 } => {
            let outer = Gate::Cnot { control: *t2, target: *t1 };
            let mut v = raw_lower(&outer, true)?;
            v.extend(raw_lower(&Gate::Toffoli { c1: *control, c2: *t1, target: *t2 }, true)?);
            v.extend(raw_lower(&outer, true)?);
            v
        }
        Gate::Swap(a, b) => {
            let mut v = Vec::new();
            for (c, t) in [(*a, *b), (*b, *a), (*a, *b)] {
                v.extend(raw_lower(&Gate::Cnot { control: c, target: t }, true)?);
            }
            v
        }
        Gate::Delay(t) => vec![Primitive::Wait(*t)],
        Gate::Diagonal { spins, phases } => lower_diagonal(spins, phases)?,
        Gate::Permutation { controls, spins, table } => lower_permutation(controls, spins, table)?,
        Gate::Composite { gates, .. } => {
            let mut v = Vec::new();
            for g in gates {
                v.extend(raw_lower(g, exact)?);
            }
            v
        }
    })
}

/// Walsh expansion phi(x) = sum_T c_T (-1)^{|x & T|}; each term is exp(i c_T Z_T).
fn lower_diagonal(spins: &[usize], phases: &[f64]) -> Result<Vec<Primitive>> {
    let k = spins.len();
    let size = 1usize << k;
    let mut out = Vec::new();
    for t in 1..size {
        let coef: f64 = (0..size)
            .map(|x| {
                let s = if (x & t).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                s * phases[x]
            })
            .sum::<f64>()
            / size as f64;
        if coef.abs() < 1e-14 {
            continue;
        }
        let members: Vec<usize> = (0..k).filter(|p| (t >> (k - 1 - p)) & 1 == 1).map(|p| spins[p]).collect();
        out.extend(z_string(&members, coef)?);
    }
    Ok(out)
}

/// exp(i c Z_{members}) with CNOT conjugation for weight three and up.
fn z_string(members: &[usize], c: f64) -> Result<Vec<Primitive>> {
    let deg = (-2.0 * c).to_degrees();
    match members.len() {
        1 => Ok(vec![rz(members[0], deg)]),
        2 => Ok(vec![Primitive::Zz { a: members[0], b: members[1], angle: deg }]),
        m => {
            let (last, prev) = (members[m - 1], members[m - 2]);
            let cx = raw_lower(&Gate::Cnot { control: last, target: prev }, true)?;
            let mut v = cx.clone();
            v.extend(z_string(&members[..m - 1], c)?);
            v.extend(cx);
            Ok(v)
        }
    }
}

/// Multi-controlled NOT.
fn mcx(controls: &[usize], target: usize) -> Result<Vec<Primitive>> {
    match controls.len() {
        0 => raw_lower(&Gate::Not(target), true),
        1 => raw_lower(&Gate::Cnot { control: controls[0], target }, true),
        k => {
            let mut all = controls.to_vec();
            all.push(target);
            let mut v = raw_lower(&Gate::Hadamard(target), true)?;
            v.extend(lower_diagonal(&all, &{
                let mut ph = vec![0.0; 1 << (k + 1)];
                ph[(1 << (k + 1)) - 1] = PI;
                ph
            })?);
            v.extend(raw_lower(&Gate::Hadamard(target), true)?);
            Ok(v)
        }
    }
}

/// Affine permutations y = A x + b over GF(2) by Gaussian elimination;
/// anything else by transformation-based synthesis.
fn lower_permutation(controls: &[usize], spins: &[usize], table: &[usize]) -> Result<Vec<Primitive>> {
    let k = spins.len();
    let b = table[0];
    // column p of A is the image of the unit vector for local bit p
    let unit = |p: usize| 1usize << (k - 1 - p);
    let cols: Vec<usize> = (0..k).map(|p| table[unit(p)] ^ b).collect();
    let apply = |x: usize| -> usize { (0..k).filter(|&p| x & unit(p) != 0).fold(0, |acc, p| acc ^ cols[p]) };
    if (0..1usize << k).any(|x| apply(x) ^ b != table[x]) {
        return synthesize_permutation(controls, spins, table);
    }
    // rows of A as bitmasks over columns
    let mut rows: Vec<usize> =
        (0..k).map(|i| (0..k).filter(|&p| cols[p] & unit(i) != 0).fold(0, |acc, p| acc | unit(p))).collect();
    // record elementary ops E such that E_m .. E_1 A = I; each op is (target_row, source_row)
    let mut ops: Vec<(usize, usize)> = Vec::new();
    for col in 0..k {
        if rows[col] & unit(col) == 0 {
            let pivot = (col + 1..k)
                .find(|&r| rows[r] & unit(col) != 0)
                .ok_or_else(|| Error::Infeasible("singular linear part".into()))?;
            rows[col] ^= rows[pivot];
            ops.push((col, pivot));
        }
        for r in 0..k {
            if r != col && rows[r] & unit(col) != 0 {
                rows[r] ^= rows[col];
                ops.push((r, col));
            }
        }
    }
    // A = E_1 E_2 .. E_m, so E_m acts first
    let mut out = Vec::new();
    for &(t, s) in ops.iter().rev() {
        let mut c = controls.to_vec();
        c.push(spins[s]);
        out.extend(mcx(&c, spins[t])?);
    }
    for p in 0..k {
        if b & unit(p) != 0 {
            out.extend(mcx(controls, spins[p])?);
        }
    }
    Ok(out)
}

/// Walks x = 0, 1, .. and appends NOT gates (controlled on the 1 bits of the
/// current image) on the output side until f(x) = x, never touching smaller
/// inputs. The gates are self-inverse, so the circuit is the list reversed.
fn synthesize_permutation(controls: &[usize], spins: &[usize], table: &[usize]) -> Result<Vec<Primitive>> {
    let k = spins.len();
    let unit = |p: usize| 1usize << (k - 1 - p);
    let mut f = table.to_vec();
    let mut gates: Vec<(usize, usize)> = Vec::new(); // (control mask, target bit)
    let mut push = |f: &mut Vec<usize>, ctrl: usize, t: usize| {
        for v in f.iter_mut() {
            if *v & ctrl == ctrl {
                *v ^= t;
            }
        }
        gates.push((ctrl, t));
    };
    for x in 0..f.len() {
        let y = f[x];
        for p in 0..k {
            if x & unit(p) != 0 && y & unit(p) == 0 {
                let cur = f[x];
                push(&mut f, cur, unit(p));
            }
        }
        for p in 0..k {
            if x & unit(p) == 0 && f[x] & unit(p) != 0 {
                push(&mut f, x, unit(p));
            }
        }
    }
    let mut out = Vec::new();
    for &(ctrl, t) in gates.iter().rev() {
        let mut c = controls.to_vec();
        c.extend((0..k).filter(|&p| ctrl & unit(p) != 0).map(|p| spins[p]));
        let tp = (0..k).find(|&p| unit(p) == t).expect("single target bit");
        out.extend(mcx(&c, spins[tp])?);
    }
    Ok(out)
}

/// Primitives for one gate and the phase making them equal to the gate.
pub fn lower_gate(g: &Gate, n: usize, exact: bool) -> Result<(Vec<Primitive>, f64)> {
    g.validate(n)?;
    let prims = raw_lower(g, exact)?;
    let support = g.spins();
    if support.is_empty() {
        return Ok((prims, 0.0));
    }
    let k = support.len();
    let local = |s: usize| support.iter().position(|&x| x == s).expect("primitive on gate support");
    let mut up = linalg::identity(1 << k);
    for p in &prims {
        up = p.map(&local).unitary(k) * up;
    }
    let ug = local_gate(g, &support)?.unitary(k)?;
    let ov = linalg::trace_product(&up.adjoint(), &ug);
    let phase = ov.arg();
    if exact {
        let d = linalg::max_abs(&(&up * linalg::cis(phase) - &ug));
        if d > 1e-8 {
            return Err(Error::Invariant(format!("lowering of {} is off by {d:e}", g.name())));
        }
    }
    Ok((prims, phase))
}

/// The gate with spins renumbered onto its own support.
fn local_gate(g: &Gate, support: &[usize]) -> Result<Gate> {
    let f = |s: usize| support.iter().position(|&x| x == s).unwrap();
    let fv = |v: &[usize]| v.iter().map(|&s| f(s)).collect::<Vec<_>>();
    Ok(match g {
        Gate::Rx { spin, angle } => Gate::Rx { spin: f(*spin), angle: *angle },
        Gate::Ry { spin, angle } => Gate::Ry { spin: f(*spin), angle: *angle },
        Gate::Rz { spin, angle } => Gate::Rz { spin: f(*spin), angle: *angle },
        Gate::Rphi { spin, phase, angle } => Gate::Rphi { spin: f(*spin), phase: *phase, angle: *angle },
        Gate::Hadamard(s) => Gate::Hadamard(f(*s)),
        Gate::Not(s) => Gate::Not(f(*s)),
        Gate::Cnot { control, target } => Gate::Cnot { control: f(*control), target: f(*target) },
        Gate::ControlledZ { control, target, angle } => {
            Gate::ControlledZ { control: f(*control), target: f(*target), angle: *angle }
        }
        Gate::CPhase { control, target, angle } => {
            Gate::CPhase { control: f(*control), target: f(*target), angle: *angle }
        }
        Gate::Toffoli { c1, c2, target } => Gate::Toffoli { c1: f(*c1), c2: f(*c2), target: f(*target) },
        Gate::Fredkin { control, t1, t2 } => Gate::Fredkin { control: f(*control), t1: f(*t1), t2: f(*t2) },
        Gate::Swap(a, b) => Gate::Swap(f(*a), f(*b)),
        Gate::Delay(t) => Gate::Delay(*t),
        Gate::Diagonal { spins, phases } => Gate::Diagonal { spins: fv(spins), phases: phases.clone() },
        Gate::Permutation { controls, spins, table } => {
            Gate::Permutation { controls: fv(controls), spins: fv(spins), table: table.clone() }
        }
        Gate::Composite { tag, gates } => Gate::Composite {
            tag: tag.clone(),
            gates: gates.iter().map(|x| local_gate(x, support)).collect::<Result<_>>()?,
        },
    })
}

/// Emits pulses, frames and refocused delays into a sequence.
pub struct Emitter<'a> {
    pub system: &'a SpinSystem,
    pub opts: &'a CompileOptions,
    pub seq: CompiledSequence,
    flip_parity: Vec<bool>,
}

impl<'a> Emitter<'a> {
    pub fn new(system: &'a SpinSystem, opts: &'a CompileOptions) -> Self {
        Emitter { system, opts, seq: CompiledSequence::new(system.n), flip_parity: vec![false; system.n] }
    }

    pub fn gate(&mut self, g: &Gate, exact: bool) -> Result<()> {
        let (prims, phase) = lower_gate(g, self.system.n, exact)?;
        self.seq.global_phase += phase;
        for p in &prims {
            self.primitive(p)?;
        }
        Ok(())
    }

    pub fn primitive(&mut self, p: &Primitive) -> Result<()> {
        match *p {
            Primitive::Rot { spin, phase, angle } => self.rotation(spin, phase, angle),
            Primitive::Rz { spin, angle } => {
                if angle != 0.0 {
                    self.seq.push(SequenceElement::FrameShift { spin, angle });
                }
                Ok(())
            }
            Primitive::Zz { a, b, angle } => self.zz(a, b, angle),
            Primitive::Wait(t) => {
                if t > 0.0 {
                    self.seq.push(SequenceElement::Delay(t));
                }
                Ok(())
            }
        }
    }

    fn rotation(&mut self, spin: usize, phase: f64, angle: f64) -> Result<()> {
        // R(a + 360k) = (-1)^k R(a); R_phi(-a) = R_{phi+180}(a)
        let mut a = angle.rem_euclid(360.0);
        if a > 180.0 {
            a -= 360.0;
        }
        let wraps = ((angle - a) / 360.0).round() as i64;
        if wraps.rem_euclid(2) == 1 {
            self.seq.global_phase += PI;
        }
        let (ph, a) = if a < 0.0 { (phase + 180.0, -a) } else { (phase, a) };
        if a == 0.0 {
            return Ok(());
        }
        let (shape, pw) = self.opts.library.pick(a);
        let ev = PulseEvent::selective(self.system, spin, shape, a, ph.rem_euclid(360.0), pw);
        self.seq.push(SequenceElement::Pulse(ev));
        Ok(())
    }

    fn flip_phase(&mut self, spin: usize) -> f64 {
        let p = if self.flip_parity[spin] { 180.0 } else { 0.0 };
        self.flip_parity[spin] = !self.flip_parity[spin];
        p
    }

    fn emit_flips(&mut self, spins: &[usize]) {
        if spins.is_empty() {
            return;
        }
        let (shape, pw) = {
            let (s, p) = self.opts.library.pick(180.0);
            (s.clone(), p)
        };
        if self.opts.allow_simultaneous {
            let list: Vec<(usize, f64, f64)> = spins.iter().map(|&s| (s, 180.0, self.flip_phase(s))).collect();
            let ev = PulseEvent::simultaneous(self.system, &list, &shape, pw);
            self.seq.push(SequenceElement::Pulse(ev));
        } else {
            for &s in spins {
                let ph = self.flip_phase(s);
                let ev = PulseEvent::selective(self.system, s, &shape, 180.0, ph, pw);
                self.seq.push(SequenceElement::Pulse(ev));
            }
        }
    }

    /// Refocused coupled evolution realizing exp(-i angle/2 ZaZb).
    fn zz(&mut self, a: usize, b: usize, angle: f64) -> Result<()> {
        if angle == 0.0 {
            return Ok(());
        }
        let j = self.system.effective_j(a, b);
        if j == 0.0 {
            return self.routed_zz(a, b, angle);
        }
        let t = angle.to_radians() / (PI * j);
        let sign: i8 = if t < 0.0 { -1 } else { 1 };
        let scheme = synthesize_refocus(self.system, Some((a, b, sign)), t.abs(), &self.opts.known_z)?;
        let m = scheme.m();
        let mut pending = 0.0;
        for k in 0..=m {
            let flips: Vec<usize> = (0..self.system.n).filter(|&s| scheme.pulse_grid[k][s]).collect();
            if !flips.is_empty() {
                if pending > 0.0 {
                    self.seq.push(SequenceElement::Delay(pending));
                    pending = 0.0;
                }
                self.emit_flips(&flips);
            }
            if k < m {
                pending += scheme.segments[k];
            }
        }
        if pending > 0.0 {
            self.seq.push(SequenceElement::Delay(pending));
        }
        Ok(())
    }

    /// Swap b next to a along the coupling graph, interact, swap back.
    fn routed_zz(&mut self, a: usize, b: usize, angle: f64) -> Result<()> {
        let path = coupling_path(self.system, a, b).ok_or(Error::NoCoupling(a, b))?;
        let k = path.len() - 1;
        let swaps: Vec<(usize, usize)> = (1..k).rev().map(|i| (path[i], path[i + 1])).collect();
        for &(x, y) in &swaps {
            self.gate(&Gate::Swap(x, y), true)?;
        }
        self.zz(a, path[1], angle)?;
        for &(x, y) in swaps.iter().rev() {
            self.gate(&Gate::Swap(x, y), true)?;
        }
        Ok(())
    }
}

/// Shortest path from a to b over nonzero couplings.
pub fn coupling_path(system: &SpinSystem, a: usize, b: usize) -> Option<Vec<usize>> {
    let n = system.n;
    let mut prev = vec![usize::MAX; n];
    let mut q = VecDeque::from([a]);
    prev[a] = a;
    while let Some(v) = q.pop_front() {
        if v == b {
            let mut path = vec![b];
            let mut cur = b;
            while cur != a {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for w in 0..n {
            if prev[w] == usize::MAX && system.effective_j(v, w) != 0.0 {
                prev[w] = v;
                q.push_back(w);
            }
        }
    }
    None
}

/// Unitary of a primitive list on n spins.
pub fn primitives_unitary(prims: &[Primitive], n: usize) -> CMat {
    prims.iter().fold(linalg::identity(1 << n), |u, p| p.unitary(n) * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::gate::circuit_unitary;

    #[test]
    fn non_affine_permutations_synthesize() {
        let tables: [&[usize]; 3] = [&[1, 2, 0, 3], &[0, 1, 2, 3, 4, 5, 7, 6], &[3, 0, 6, 1, 7, 5, 2, 4]];
        for t in tables {
            let k = t.len().trailing_zeros() as usize;
            let spins: Vec<usize> = (1..=k).collect();
            let g = Gate::Permutation { controls: vec![0], spins, table: t.to_vec() };
            let n = k + 1;
            let (prims, phase) = lower_gate(&g, n, true).unwrap();
            let u = primitives_unitary(&prims, n) * linalg::cis(phase);
            let want = circuit_unitary(std::slice::from_ref(&g), n).unwrap();
            assert!(linalg::spectral_norm(&(u - want)) < 1e-9, "{t:?}");
        }
    }
}
