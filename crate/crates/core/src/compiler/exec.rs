//! Execution of compiled sequences.

use std::str::FromStr;

use super::sequence::{CompiledSequence, SequenceElement};
use crate::decoherence::{self, RelaxationParams};
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat};
use crate::pulse::{self, Axis, RfModel};
use crate::spin::{self, DensityMatrix, SpinSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Instantaneous rotations and J-only delays.
    #[default]
    Ideal,
    /// Pulses simulated slice by slice under the full Hamiltonian.
    Pulse,
    /// Ideal pulses, with relaxation over every pulse width and delay.
    PulseDecoherence,
}

impl FromStr for ExecMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" => Ok(ExecMode::Ideal),
            "pulse" => Ok(ExecMode::Pulse),
            "pulse+decoherence" | "decoherence" | "pulse-decoherence" => Ok(ExecMode::PulseDecoherence),
            _ => Err(Error::InvalidArgument(format!("unknown execution mode '{s}'"))),
        }
    }
}

/// Unitary of a single element in the software frame.
pub fn element_unitary(el: &SequenceElement, system: &SpinSystem, mode: ExecMode, rf: RfModel) -> Result<CMat> {
    let n = system.n;
    Ok(match el {
        SequenceElement::Pulse(p) => match mode {
            ExecMode::Pulse => {
                let u = pulse::shaped_propagator(system, p, true, rf)?;
                let offsets: Vec<f64> = system.offsets_hz.iter().map(|f| 2.0 * std::f64::consts::PI * f).collect();
                spin::diagonal_propagator(&system.diagonal_with(&offsets, false), -p.duration) * u
            }
            _ => p.ideal_unitary(n),
        },
        SequenceElement::Delay(t) => spin::diagonal_propagator(&system.coupling_diagonal(), *t),
        SequenceElement::FrameShift { spin, angle } => pulse::ideal_rotation(Axis::Z, *angle, *spin, n),
    })
}

/// Full unitary of the sequence, including its global phase.
pub fn sequence_unitary(seq: &CompiledSequence, system: &SpinSystem, mode: ExecMode, rf: RfModel) -> Result<CMat> {
    if mode == ExecMode::PulseDecoherence {
        return Err(Error::InvalidArgument("decoherence has no unitary".into()));
    }
    check_size(seq, system)?;
    let mut u = linalg::identity(system.dim());
    for el in &seq.elements {
        u = element_unitary(el, system, mode, rf)? * u;
    }
    Ok(u * cis(seq.global_phase))
}

fn check_size(seq: &CompiledSequence, system: &SpinSystem) -> Result<()> {
    if seq.n != system.n {
        return Err(Error::Dimension { expected: system.n, got: seq.n });
    }
    Ok(())
}

/// rho_ab -> rho_ab exp(-i (E_a - E_b) t) for diagonal H.
fn diagonal_evolve(rho: &DensityMatrix, h: &[f64], t: f64) -> DensityMatrix {
    let mut m = rho.mat.clone();
    let d = h.len();
    for a in 0..d {
        for b in 0..d {
            m[(a, b)] *= cis(-(h[a] - h[b]) * t);
        }
    }
    DensityMatrix { n: rho.n, mat: m }
}

/// Runs a sequence on a density matrix.
pub struct Executor<'a> {
    pub system: &'a SpinSystem,
    pub mode: ExecMode,
    pub rf_model: RfModel,
    /// Required for `PulseDecoherence`.
    pub relaxation: Option<RelaxationParams>,
}

impl<'a> Executor<'a> {
    pub fn new(system: &'a SpinSystem, mode: ExecMode) -> Self {
        Executor { system, mode, rf_model: RfModel::Selective, relaxation: None }
    }

    pub fn with_relaxation(mut self, params: RelaxationParams) -> Self {
        self.relaxation = Some(params);
        self
    }

    fn params(&self) -> Result<&RelaxationParams> {
        self.relaxation
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("decoherence mode needs relaxation parameters".into()))
    }

    pub fn run(&self, seq: &CompiledSequence, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_size(seq, self.system)?;
        if rho.n != self.system.n {
            return Err(Error::Dimension { expected: self.system.n, got: rho.n });
        }
        let hj = self.system.coupling_diagonal();
        let mut r = rho.clone();
        for el in &seq.elements {
            r = self.step(el, &r, &hj)?;
        }
        Ok(r)
    }

    fn step(&self, el: &SequenceElement, rho: &DensityMatrix, hj: &[f64]) -> Result<DensityMatrix> {
        Ok(match el {
            SequenceElement::Pulse(p) => match self.mode {
                ExecMode::Pulse => rho.apply(&element_unitary(el, self.system, self.mode, self.rf_model)?)?,
                ExecMode::Ideal | ExecMode::PulseDecoherence => {
                    let mut r = if self.mode == ExecMode::PulseDecoherence {
                        decoherence::decohere_interval(rho, self.params()?, p.duration)?
                    } else {
                        rho.clone()
                    };
                    for t in &p.targets {
                        let u = pulse::rotation_2x2(Axis::Phase(t.phase_deg), t.angle_deg);
                        r = r.apply_local(&u, &[t.spin]);
                    }
                    r
                }
            },
            SequenceElement::Delay(t) => {
                let r = diagonal_evolve(rho, hj, *t);
                if self.mode == ExecMode::PulseDecoherence {
                    decoherence::decohere_interval(&r, self.params()?, *t)?
                } else {
                    r
                }
            }
            SequenceElement::FrameShift { spin, angle } => {
                rho.apply_local(&pulse::rotation_2x2(Axis::Z, *angle), &[*spin])
            }
        })
    }
}
