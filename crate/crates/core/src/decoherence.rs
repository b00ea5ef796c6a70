//! Kraus-form relaxation channels and the per-interval decoherence model.
//!
//! Every channel acts on one spin and is applied by local conjugation, so a
//! 7-spin interval costs a handful of 128x128 passes rather than full
//! Kronecker products.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::spin::{self, DensityMatrix, SpinSystem};

/// Per-spin relaxation constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationParams {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// Equilibrium ground-state probability.
    pub p: Vec<f64>,
    /// Inhomogeneous contribution, 1/T2* = 1/T2 + 1/T2_sys.
    pub t2_sys: Vec<Option<f64>>,
}

impl RelaxationParams {
    /// Constants from the molecule; p = 0.5 + eps * ratio / 2 per spin.
    /// Spins without T1 or T2 get infinite times.
    pub fn from_system(system: &SpinSystem, eps: f64) -> Self {
        let n = system.n;
        RelaxationParams {
            t1: (0..n).map(|i| system.t1[i].unwrap_or(f64::INFINITY)).collect(),
            t2: (0..n).map(|i| system.t2[i].unwrap_or(f64::INFINITY)).collect(),
            p: (0..n).map(|i| 0.5 + eps * system.polarization_ratio[i] / 2.0).collect(),
            t2_sys: vec![None; n],
        }
    }

    /// Multiply all T1 by `r1` and all T2 by `r2`.
    pub fn scaled(&self, r1: f64, r2: f64) -> Self {
        let mut s = self.clone();
        s.t1.iter_mut().for_each(|t| *t *= r1);
        s.t2.iter_mut().for_each(|t| *t *= r2);
        s
    }

    pub fn n(&self) -> usize {
        self.t1.len()
    }

    pub fn t2_star(&self, spin: usize) -> f64 {
        match self.t2_sys[spin] {
            Some(ts) => 1.0 / (1.0 / self.t2[spin] + 1.0 / ts),
            None => self.t2[spin],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.t2.len() != n || self.p.len() != n || self.t2_sys.len() != n {
            return Err(Error::InvalidArgument("relaxation lists differ in length".into()));
        }
        for i in 0..n {
            if self.t1[i] <= 0.0 || self.t2[i] <= 0.0 {
                return Err(Error::InvalidArgument(format!("non-positive T1/T2 on spin {}", i + 1)));
            }
            if !(0.0..=1.0).contains(&self.p[i]) {
                return Err(Error::InvalidArgument(format!("p outside [0, 1] on spin {}", i + 1)));
            }
        }
        Ok(())
    }
}

/// The four generalized-amplitude-damping operators.
pub fn gad_kraus(gamma: f64, p: f64) -> [CMat; 4] {
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let (g, h) = (gamma.sqrt(), (1.0 - gamma).sqrt());
    [
        linalg::real_matrix(&[&[sp, 0.0], &[0.0, sp * h]]),
        linalg::real_matrix(&[&[0.0, sp * g], &[0.0, 0.0]]),
        linalg::real_matrix(&[&[sq * h, 0.0], &[0.0, sq]]),
        linalg::real_matrix(&[&[0.0, 0.0], &[sq * g, 0.0]]),
    ]
}

/// Phase-flip pair with probability weights gamma = (1 + e^-lambda) / 2.
pub fn pd_kraus(lambda: f64) -> [CMat; 2] {
    let g = (1.0 + (-lambda).exp()) / 2.0;
    [
        linalg::identity(2) * c(g.sqrt(), 0.0),
        linalg::real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]]) * c((1.0 - g).sqrt(), 0.0),
    ]
}

/// Sum_k E_k^dagger E_k, which must be the identity.
pub fn completeness(ops: &[CMat]) -> CMat {
    ops.iter().fold(CMat::zeros(2, 2), |acc, e| acc + e.adjoint() * e)
}

/// Sum_k E_k rho E_k^dagger with each E_k acting on `spin`.
pub fn apply_kraus(rho: &DensityMatrix, ops: &[CMat], spin: usize) -> DensityMatrix {
    let n = rho.n;
    let mut out = CMat::zeros(rho.dim(), rho.dim());
    for e in ops {
        out += linalg::conj_local(&rho.mat, e, &[spin], n);
    }
    DensityMatrix { n, mat: out }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidArgument(format!("negative duration {t}")));
    }
    Ok(())
}

pub fn gad_channel(rho: &DensityMatrix, spin: usize, t: f64, t1: f64, p: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    if spin >= rho.n {
        return Err(Error::SpinRange { index: spin, n: rho.n });
    }
    let gamma = 1.0 - (-t / t1).exp();
    Ok(apply_kraus(rho, &gad_kraus(gamma, p), spin))
}

pub fn pd_channel(rho: &DensityMatrix, spin: usize, t: f64, t2: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    if spin >= rho.n {
        return Err(Error::SpinRange { index: spin, n: rho.n });
    }
    Ok(apply_kraus(rho, &pd_kraus(t / t2), spin))
}

/// GAD on every spin in index order, then PD on every spin.
pub fn decohere_interval(rho: &DensityMatrix, params: &RelaxationParams, t: f64) -> Result<DensityMatrix> {
    decohere_interval_ordered(rho, params, t, &(0..rho.n).collect::<Vec<_>>())
}

/// As `decohere_interval` with the GAD spin order given explicitly.
pub fn decohere_interval_ordered(
    rho: &DensityMatrix,
    params: &RelaxationParams,
    t: f64,
    order: &[usize],
) -> Result<DensityMatrix> {
    check_time(t)?;
    if params.n() != rho.n {
        return Err(Error::Dimension { expected: rho.n, got: params.n() });
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let mut r = rho.clone();
    for &s in order {
        r = gad_channel(&r, s, t, params.t1[s], params.p[s])?;
    }
    for s in 0..rho.n {
        r = pd_channel(&r, s, t, params.t2[s])?;
    }
    Ok(r)
}

/// Free evolution followed by relaxation over the same interval.
pub fn evolve_with_decoherence(
    rho: &DensityMatrix,
    system: &SpinSystem,
    params: &RelaxationParams,
    t: f64,
) -> Result<DensityMatrix> {
    let u = spin::free_evolution(system, t);
    let r = rho.apply(&u)?;
    decohere_interval(&r, params, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxationKind {
    InversionRecovery,
    Cpmg,
}

impl std::str::FromStr for RelaxationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inversion_recovery" => Ok(Self::InversionRecovery),
            "cpmg" => Ok(Self::Cpmg),
            other => Err(Error::InvalidArgument(format!("unknown relaxation experiment {other}"))),
        }
    }
}

/// Single-spin peak height versus time, normalized to the equilibrium signal.
///
/// Inversion recovery: X^2, wait t, X read. CPMG: X read, then echo cycles
/// of `tau/4 X^2 tau/2 X^2 tau/4` filling t (tau = `cycle`), signal = |xy|.
pub fn relaxation_experiment(
    kind: RelaxationKind,
    t1: f64,
    t2: f64,
    p: f64,
    times: &[f64],
    cycle: f64,
) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times".into()));
    }
    let params = RelaxationParams { t1: vec![t1], t2: vec![t2], p: vec![p], t2_sys: vec![None] };
    let eq = DensityMatrix::from_diagonal(1, &[p, 1.0 - p])?;
    let s0 = 2.0 * p - 1.0;
    let x180 = crate::pulse::rotation_2x2(crate::pulse::Axis::X, 180.0);
    let x90 = crate::pulse::rotation_2x2(crate::pulse::Axis::X, 90.0);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        check_time(t)?;
        let v = match kind {
            RelaxationKind::InversionRecovery => {
                let r = eq.apply(&x180)?;
                let r = decohere_interval(&r, &params, t)?;
                let r = r.apply(&x90)?;
                line_height(&r) / s0
            }
            RelaxationKind::Cpmg => {
                let mut r = eq.apply(&x90)?;
                let cycles = (t / cycle).round() as usize;
                for _ in 0..cycles {
                    r = decohere_interval(&r, &params, cycle / 4.0)?;
                    r = r.apply(&x180)?;
                    r = decohere_interval(&r, &params, cycle / 2.0)?;
                    r = r.apply(&x180)?;
                    r = decohere_interval(&r, &params, cycle / 4.0)?;
                }
                let m = r.mat[(0, 1)];
                2.0 * m.norm() / s0
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Absorptive line height, V = -2i rho01.
fn line_height(rho: &DensityMatrix) -> f64 {
    (linalg::c(0.0, -2.0) * rho.mat[(0, 1)]).re
}

/// Seven-spin relaxation constants used by the factoring simulation.
pub mod seven_spin {
    pub const T1: [f64; 7] = [5.0, 10.0, 13.7, 2.8, 3.0, 31.6, 45.4];
    pub const T2: [f64; 7] = [1.3, 1.7, 1.8, 1.6, 1.5, 2.0, 2.0];
    /// Fluorine equilibrium ground-state probability.
    pub const P_FLUORINE: f64 = 0.5 + 5e-4;
    /// Scale applied to the fluorine polarization for carbon.
    pub const CARBON_FACTOR: f64 = 1.25 / 4.7;

    /// Carbon p from the fluorine p: 0.5 + (p - 0.5) * factor.
    pub fn carbon_p(p_fluorine: f64, factor: f64) -> f64 {
        0.5 + (p_fluorine - 0.5) * factor
    }

    /// Spins 6 and 7 are carbon.
    pub fn params(ratio_t1: f64, ratio_t2: f64, carbon_factor: f64) -> super::RelaxationParams {
        let pc = carbon_p(P_FLUORINE, carbon_factor);
        super::RelaxationParams {
            t1: T1.iter().map(|t| t * ratio_t1).collect(),
            t2: T2.iter().map(|t| t * ratio_t2).collect(),
            p: (0..7).map(|i| if i < 5 { P_FLUORINE } else { pc }).collect(),
            t2_sys: vec![None; 7],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kraus_complete() {
        for &(g, p) in &[(0.0, 0.5), (0.3, 0.9), (1.0, 0.1)] {
            let s = completeness(&gad_kraus(g, p));
            assert!(linalg::max_abs(&(s - linalg::identity(2))) < 1e-12);
        }
        let s = completeness(&pd_kraus(0.7));
        assert!(linalg::max_abs(&(s - linalg::identity(2))) < 1e-12);
    }

    #[test]
    fn gad_long_time_fixed_point() {
        let rho = DensityMatrix::basis(1, 1);
        let out = gad_channel(&rho, 0, 1e4, 1.0, 0.8).unwrap();
        assert!((out.mat[(0, 0)].re - 0.8).abs() < 1e-12);
        assert!((out.mat[(1, 1)].re - 0.2).abs() < 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        let rho = DensityMatrix::maximally_mixed(1);
        assert!(gad_channel(&rho, 0, -1.0, 1.0, 0.5).is_err());
        assert!(pd_channel(&rho, 0, -1.0, 1.0).is_err());
    }

    #[test]
    fn carbon_p_formula() {
        let pc = seven_spin::carbon_p(seven_spin::P_FLUORINE, seven_spin::CARBON_FACTOR);
        assert!((pc - (0.5 + 5e-4 * 1.25 / 4.7)).abs() < 1e-15);
    }
}
