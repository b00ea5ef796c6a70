//! Compare a compiled sequence with its target unitary.

use std::str::FromStr;

use super::exec::{sequence_unitary, ExecMode};
use super::sequence::CompiledSequence;
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat};
use crate::pulse::RfModel;
use crate::spin::SpinSystem;

/// Which differences from the target are tolerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exact,
    GlobalPhase,
    /// U = D T for some diagonal unitary D.
    DiagonalPhase,
}

impl FromStr for VerifyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(VerifyMode::Exact),
            "global_phase" => Ok(VerifyMode::GlobalPhase),
            "diagonal_phase" => Ok(VerifyMode::DiagonalPhase),
            _ => Err(Error::InvalidArgument(format!("unknown verify mode '{s}'"))),
        }
    }
}

/// Distance of U from T under the given equivalence (spectral norm).
pub fn unitary_distance(u: &CMat, target: &CMat, mode: VerifyMode) -> f64 {
    match mode {
        VerifyMode::Exact => linalg::spectral_norm(&(u - target)),
        VerifyMode::GlobalPhase => linalg::distance_global_phase(u, target),
        VerifyMode::DiagonalPhase => {
            let m = u * target.adjoint();
            let d: Vec<_> = (0..m.nrows()).map(|i| cis(m[(i, i)].arg())).collect();
            linalg::spectral_norm(&(u - linalg::diag(&d) * target))
        }
    }
}

/// Distance of the ideal execution of `seq` from `target`.
pub fn verify(seq: &CompiledSequence, target: &CMat, system: &SpinSystem, mode: VerifyMode) -> Result<f64> {
    let u = sequence_unitary(seq, system, ExecMode::Ideal, RfModel::Selective)?;
    if u.nrows() != target.nrows() {
        return Err(Error::Dimension { expected: u.nrows(), got: target.nrows() });
    }
    Ok(unitary_distance(&u, target, mode))
}
