//! Spin systems, Hamiltonians, propagators and density matrices.
//!
//! Units: offsets and couplings are stored in Hz and converted to angular
//! frequency (hbar = 1) when Hamiltonians are built.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, CVec, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    #[default]
    Isotropic,
    /// Uses J + 2D for every pair.
    LiquidCrystal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    pub name: String,
    pub n: usize,
    pub offsets_hz: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub j_hz: Vec<Vec<f64>>,
    /// Residual dipolar couplings, only used in liquid-crystal mode.
    pub d_hz: Vec<Vec<f64>>,
    pub t1: Vec<Option<f64>>,
    pub t2: Vec<Option<f64>>,
    pub polarization_ratio: Vec<f64>,
    /// Spins sharing a nucleus label share an RF channel.
    pub nucleus: Vec<String>,
    pub mode: CouplingMode,
}

impl SpinSystem {
    pub fn new(n: usize) -> Self {
        SpinSystem {
            name: String::new(),
            n,
            offsets_hz: vec![0.0; n],
            j_hz: vec![vec![0.0; n]; n],
            d_hz: vec![vec![0.0; n]; n],
            t1: vec![None; n],
            t2: vec![None; n],
            polarization_ratio: vec![1.0; n],
            nucleus: vec!["1H".to_string(); n],
            mode: CouplingMode::Isotropic,
        }
    }

    pub fn with_offsets(mut self, offsets_hz: &[f64]) -> Self {
        self.offsets_hz = offsets_hz.to_vec();
        self
    }

    /// Set J between spins i and j (0-based), symmetrically.
    pub fn with_j(mut self, i: usize, j: usize, hz: f64) -> Self {
        self.set_j(i, j, hz);
        self
    }

    pub fn set_j(&mut self, i: usize, j: usize, hz: f64) {
        self.j_hz[i][j] = hz;
        self.j_hz[j][i] = hz;
    }

    pub fn set_d(&mut self, i: usize, j: usize, hz: f64) {
        self.d_hz[i][j] = hz;
        self.d_hz[j][i] = hz;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let bad = |m: String| Err(Error::InvalidSystem(m));
        if n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.offsets_hz.len() != n
            || self.j_hz.len() != n
            || self.d_hz.len() != n
            || self.t1.len() != n
            || self.t2.len() != n
            || self.polarization_ratio.len() != n
            || self.nucleus.len() != n
        {
            return bad("per-spin list length differs from n".into());
        }
        for i in 0..n {
            if self.j_hz[i].len() != n || self.d_hz[i].len() != n {
                return bad("coupling matrix is not n x n".into());
            }
            if self.j_hz[i][i] != 0.0 || self.d_hz[i][i] != 0.0 {
                return bad(format!("nonzero self coupling on spin {}", i + 1));
            }
            for j in 0..n {
                if self.j_hz[i][j] != self.j_hz[j][i] || self.d_hz[i][j] != self.d_hz[j][i] {
                    return bad(format!("coupling between {} and {} not symmetric", i + 1, j + 1));
                }
            }
            if self.polarization_ratio[i] <= 0.0 {
                return bad(format!("polarization ratio of spin {} must be positive", i + 1));
            }
            if let Some(t2) = self.t2[i] {
                if t2 <= 0.0 {
                    return bad(format!("T2 of spin {} must be positive", i + 1));
                }
                if let Some(t1) = self.t1[i] {
                    if t1 < t2 {
                        return bad(format!("T1 < T2 on spin {}", i + 1));
                    }
                }
            }
            if let Some(t1) = self.t1[i] {
                if t1 <= 0.0 {
                    return bad(format!("T1 of spin {} must be positive", i + 1));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Coupling used in the Hamiltonian, J or J + 2D.
    pub fn effective_j(&self, i: usize, j: usize) -> f64 {
        match self.mode {
            CouplingMode::Isotropic => self.j_hz[i][j],
            CouplingMode::LiquidCrystal => self.j_hz[i][j] + 2.0 * self.d_hz[i][j],
        }
    }

    pub fn same_channel(&self, i: usize, j: usize) -> bool {
        self.nucleus[i] == self.nucleus[j]
    }

    /// Diagonal of H in rad/s.
    pub fn hamiltonian_diagonal(&self) -> Vec<f64> {
        let offsets: Vec<f64> = self.offsets_hz.iter().map(|f| 2.0 * PI * f).collect();
        self.diagonal_with(&offsets, true)
    }

    /// Diagonal of the coupling part only.
    pub fn coupling_diagonal(&self) -> Vec<f64> {
        self.diagonal_with(&vec![0.0; self.n], true)
    }

    /// Diagonal of -sum w_i Iz_i + sum 2 pi J'_ij Iz_i Iz_j for the given angular offsets.
    pub fn diagonal_with(&self, offsets_rad: &[f64], couplings: bool) -> Vec<f64> {
        let n = self.n;
        (0..self.dim())
            .map(|b| {
                let m: Vec<f64> = (0..n).map(|s| if linalg::spin_bit(b, s, n) == 0 { 0.5 } else { -0.5 }).collect();
                let mut e = 0.0;
                for i in 0..n {
                    e -= offsets_rad[i] * m[i];
                    if couplings {
                        for j in i + 1..n {
                            e += 2.0 * PI * self.effective_j(i, j) * m[i] * m[j];
                        }
                    }
                }
                e
            })
            .collect()
    }
}

/// H = -sum_i w_i Iz_i + sum_{i<j} 2 pi J'_ij Iz_i Iz_j, rad/s, diagonal.
pub fn build_hamiltonian(system: &SpinSystem) -> CMat {
    linalg::diag_real(&system.hamiltonian_diagonal())
}

/// exp(-i H t); t may be negative.
pub fn free_evolution(system: &SpinSystem, t: f64) -> CMat {
    diagonal_propagator(&system.hamiltonian_diagonal(), t)
}

pub fn diagonal_propagator(h_diag: &[f64], t: f64) -> CMat {
    let d: Vec<C64> = h_diag.iter().map(|&e| cis(-e * t)).collect();
    linalg::diag(&d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Pauli> {
        match ch.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> CMat {
        let m = match self {
            Pauli::I => SIGMA_I,
            Pauli::X => SIGMA_X,
            Pauli::Y => SIGMA_Y,
            Pauli::Z => SIGMA_Z,
        };
        CMat::from_fn(2, 2, |i, j| m[i][j])
    }
}

pub const SIGMA_I: [[C64; 2]; 2] = [[ONE, ZERO], [ZERO, ONE]];
pub const SIGMA_X: [[C64; 2]; 2] = [[ZERO, ONE], [ONE, ZERO]];
pub const SIGMA_Y: [[C64; 2]; 2] = [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]];
pub const SIGMA_Z: [[C64; 2]; 2] = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// Spin operator I_axis = sigma/2 on `spin` of `n`.
pub fn spin_operator(p: Pauli, spin: usize, n: usize) -> CMat {
    let half = p.matrix() * c(0.5, 0.0);
    embed(&half, &[spin], n).expect("valid spin index")
}

/// Operator acting as `op` on `targets` (first target is the local MSB) and
/// as identity elsewhere. Targets need not be adjacent or ordered.
pub fn embed(op: &CMat, targets: &[usize], n: usize) -> Result<CMat> {
    let k = targets.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(Error::Dimension { expected: 1 << k, got: op.nrows() });
    }
    for (p, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::SpinRange { index: t, n });
        }
        if targets[..p].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }
    let d = 1usize << n;
    let target_mask: usize = targets.iter().map(|&t| linalg::spin_mask(t, n)).sum();
    let local = |idx: usize| -> usize { targets.iter().fold(0, |acc, &t| (acc << 1) | linalg::spin_bit(idx, t, n)) };
    let mut out = CMat::zeros(d, d);
    for r in 0..d {
        let lr = local(r);
        for cidx in 0..d {
            if r & !target_mask == cidx & !target_mask {
                out[(r, cidx)] = op[(lr, local(cidx))];
            }
        }
    }
    Ok(out)
}

/// A state of n spins. The only mutable simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n: usize,
    pub mat: CMat,
}

impl DensityMatrix {
    pub fn new(n: usize, mat: CMat) -> Result<Self> {
        let d = 1usize << n;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Dimension { expected: d, got: mat.nrows() });
        }
        Ok(DensityMatrix { n, mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn pure(n: usize, psi: &CVec) -> Result<Self> {
        let d = 1usize << n;
        if psi.len() != d {
            return Err(Error::Dimension { expected: d, got: psi.len() });
        }
        let norm = psi.norm();
        let v = psi / c(norm, 0.0);
        Ok(DensityMatrix { n, mat: &v * v.adjoint() })
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let d = 1usize << n;
        let mut mat = CMat::zeros(d, d);
        mat[(index, index)] = ONE;
        DensityMatrix { n, mat }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        DensityMatrix { n, mat: linalg::identity(d) * c(1.0 / d as f64, 0.0) }
    }

    pub fn from_diagonal(n: usize, diag: &[f64]) -> Result<Self> {
        Self::new(n, linalg::diag_real(diag))
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.mat)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.mat, &self.mat).re
    }

    /// rho - Tr(rho) I / 2^n.
    pub fn deviation(&self) -> CMat {
        let d = self.dim();
        let t = self.trace() / c(d as f64, 0.0);
        &self.mat - linalg::identity(d) * t
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn expectation(&self, op: &CMat) -> C64 {
        linalg::trace_product(&self.mat, op)
    }

    pub fn apply(&self, u: &CMat) -> Result<Self> {
        apply(self, u)
    }

    /// Conjugate by an operator on a subset of spins.
    pub fn apply_local(&self, u: &CMat, targets: &[usize]) -> Self {
        DensityMatrix { n: self.n, mat: linalg::conj_local(&self.mat, u, targets, self.n) }
    }

    /// Hermitian, unit trace (if `normalized`) and positive semidefinite.
    pub fn check(&self, tol: f64, normalized: bool) -> Result<()> {
        if !linalg::is_hermitian(&self.mat, tol) {
            return Err(Error::Invariant("density matrix not Hermitian".into()));
        }
        if normalized && (self.trace() - ONE).norm() > tol {
            return Err(Error::Invariant(format!("trace {} differs from 1", self.trace())));
        }
        if normalized {
            let ev = linalg::hermitian_eigenvalues(&self.mat);
            if ev[0] < -1e-10 {
                return Err(Error::Invariant(format!("negative eigenvalue {}", ev[0])));
            }
        }
        Ok(())
    }
}

/// U rho U^dagger.
pub fn apply(rho: &DensityMatrix, u: &CMat) -> Result<DensityMatrix> {
    if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
        return Err(Error::Dimension { expected: rho.dim(), got: u.nrows() });
    }
    Ok(DensityMatrix { n: rho.n, mat: u * &rho.mat * u.adjoint() })
}

/// Weighted tensor product of Paulis, e.g. "ZIIII".
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOperatorTerm {
    pub letters: String,
    pub weight: f64,
}

impl ProductOperatorTerm {
    pub fn new(letters: &str, weight: f64) -> Result<Self> {
        if letters.is_empty() || letters.chars().any(|ch| Pauli::from_char(ch).is_none()) {
            return Err(Error::InvalidArgument(format!("bad product operator '{letters}'")));
        }
        Ok(ProductOperatorTerm { letters: letters.to_ascii_uppercase(), weight })
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn matrix(&self) -> CMat {
        let ops: Vec<CMat> = self.letters.chars().map(|ch| Pauli::from_char(ch).unwrap().matrix()).collect();
        linalg::kron_all(&ops) * c(self.weight, 0.0)
    }
}
