//! Compiled pulse programs.
//!
//! Elements live in the software frame: each spin's reference frame advances
//! at its own offset, so the time counter removes chemical-shift precession
//! from every timed element. A `Delay` therefore only evolves the couplings,
//! and an ideal `Pulse` is the bare rotation.

use std::fmt::Write as _;

use crate::pulse::{PulseEvent, PulseShape};
use crate::spin::SpinSystem;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceElement {
    Pulse(PulseEvent),
    Delay(f64),
    /// Software rotation R_z(angle) of one spin's frame.
    FrameShift {
        spin: usize,
        angle: f64,
    },
}

impl SequenceElement {
    pub fn duration(&self) -> f64 {
        match self {
            SequenceElement::Pulse(p) => p.duration,
            SequenceElement::Delay(t) => *t,
            SequenceElement::FrameShift { .. } => 0.0,
        }
    }

    pub fn touches(&self, spin: usize) -> bool {
        match self {
            SequenceElement::Pulse(p) => p.targets.iter().any(|t| t.spin == spin),
            SequenceElement::Delay(_) => true,
            SequenceElement::FrameShift { spin: s, .. } => *s == spin,
        }
    }
}

/// Shapes and widths used when pulses are emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseLibrary {
    pub shape90: PulseShape,
    pub shape180: PulseShape,
    pub pw90: f64,
    pub pw180: f64,
}

impl PulseLibrary {
    /// Short rectangular pulses.
    pub fn hard() -> Self {
        PulseLibrary {
            shape90: PulseShape::rectangular(90.0),
            shape180: PulseShape::rectangular(180.0),
            pw90: 10e-6,
            pw180: 20e-6,
        }
    }

    /// Frequency-selective shaped pulses.
    pub fn selective() -> Self {
        PulseLibrary {
            shape90: PulseShape::gaussian90(),
            shape180: PulseShape::hermite180(),
            pw90: 1.0e-3,
            pw180: 2.0e-3,
        }
    }

    /// Hard pulses when every spin has its own channel; otherwise selective
    /// shapes with a 90 width of two periods of the tightest same-channel
    /// separation, kept within [50 us, 1 ms].
    pub fn for_system(system: &SpinSystem) -> Self {
        let n = system.n;
        let sep = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| system.same_channel(i, j))
            .map(|(i, j)| (system.offsets_hz[i] - system.offsets_hz[j]).abs())
            .fold(f64::INFINITY, f64::min);
        if sep.is_infinite() {
            return Self::hard();
        }
        let pw90 = (2.0 / sep).clamp(50e-6, 1e-3);
        PulseLibrary { pw90, pw180: 2.0 * pw90, ..Self::selective() }
    }

    /// Shape and width for a rotation by `angle` degrees.
    pub fn pick(&self, angle: f64) -> (&PulseShape, f64) {
        if angle.abs() >= 135.0 {
            (&self.shape180, self.pw180)
        } else {
            (&self.shape90, self.pw90)
        }
    }
}

impl Default for PulseLibrary {
    fn default() -> Self {
        Self::hard()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledSequence {
    pub n: usize,
    pub elements: Vec<SequenceElement>,
    /// Sum of FrameShift angles per spin, mod 360.
    pub frame_phase: Vec<f64>,
    /// Sum of element durations.
    pub time_cursor: f64,
    /// Radians; makes phase-exact compilation exact rather than up to phase.
    pub global_phase: f64,
    pub warnings: Vec<String>,
}

impl CompiledSequence {
    pub fn new(n: usize) -> Self {
        CompiledSequence {
            n,
            elements: Vec::new(),
            frame_phase: vec![0.0; n],
            time_cursor: 0.0,
            global_phase: 0.0,
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, el: SequenceElement) {
        self.time_cursor += el.duration();
        if let SequenceElement::FrameShift { spin, angle } = el {
            self.frame_phase[spin] = (self.frame_phase[spin] + angle).rem_euclid(360.0);
        }
        self.elements.push(el);
    }

    pub fn extend(&mut self, other: CompiledSequence) {
        for el in other.elements {
            self.push(el);
        }
        self.global_phase += other.global_phase;
        self.warnings.extend(other.warnings);
    }

    /// Rebuild the frame and time bookkeeping from the element list.
    pub fn recompute(&mut self) {
        let els = std::mem::take(&mut self.elements);
        self.frame_phase = vec![0.0; self.n];
        self.time_cursor = 0.0;
        for el in els {
            self.push(el);
        }
    }

    pub fn with_elements(&self, elements: Vec<SequenceElement>) -> Self {
        let mut s = CompiledSequence::new(self.n);
        s.global_phase = self.global_phase;
        s.warnings = self.warnings.clone();
        for el in elements {
            s.push(el);
        }
        s
    }

    pub fn pulse_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, SequenceElement::Pulse(_))).count()
    }

    /// Printable program with start times and the running software frame,
    /// which includes the time counter advance at each spin's offset.
    pub fn listing(&self, system: &SpinSystem) -> String {
        let mut out = String::new();
        let mut t = 0.0;
        let mut frames = vec![0.0f64; self.n];
        let _ = writeln!(out, "# idx  start_ms  element");
        for (i, el) in self.elements.iter().enumerate() {
            let desc = match el {
                SequenceElement::Pulse(p) => {
                    let tg: Vec<String> = p
                        .targets
                        .iter()
                        .map(|t| format!("{}:{:.1}@{:.1}", t.spin + 1, t.angle_deg, t.phase_deg))
                        .collect();
                    format!("PULSE {} {:.1}us [{}]", p.shape.name, p.duration * 1e6, tg.join(" "))
                }
                SequenceElement::Delay(d) => format!("DELAY {:.3}ms", d * 1e3),
                SequenceElement::FrameShift { spin, angle } => {
                    frames[*spin] += angle;
                    format!("FRAME {} {:+.3}", spin + 1, angle)
                }
            };
            let _ = writeln!(out, "{:5}  {:9.4}  {}", i, t * 1e3, desc);
            t += el.duration();
        }
        let fr: Vec<String> = (0..self.n)
            .map(|s| format!("{:.3}", (frames[s] + 360.0 * system.offsets_hz[s] * t).rem_euclid(360.0)))
            .collect();
        let _ = writeln!(out, "# total {:.4} ms; frames [{}]", t * 1e3, fr.join(", "));
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        out
    }
}
