//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// e^{i phi}
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let r = rows.len();
    let cols = rows.first().map_or(0, |x| x.len());
    CMat::from_fn(r, cols, |i, j| rows[i][j])
}

pub fn real_matrix(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let cols = rows.first().map_or(0, |x| x.len());
    CMat::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn diag_real(entries: &[f64]) -> CMat {
    let v: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
    diag(&v)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ops: &[CMat]) -> CMat {
    let mut out = identity(1);
    for op in ops {
        out = kron(&out, op);
    }
    out
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && max_abs(&(u * u.adjoint() - identity(u.nrows()))) <= tol
}

pub fn is_hermitian(h: &CMat, tol: f64) -> bool {
    h.is_square() && max_abs(&(h - h.adjoint())) <= tol
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Tr(A B) without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// exp(-i H t) for Hermitian H via eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let d = h.nrows();
    if d == 1 {
        return CMat::from_element(1, 1, cis(-h[(0, 0)].re * t));
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = CVec::from_iterator(d, eig.eigenvalues.iter().map(|&l| cis(-l * t)));
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    vd * v.adjoint()
}

/// Sorted real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Bit mask of `spin` in an `n`-spin register (spin 0 is the MSB).
#[inline]
pub fn spin_mask(spin: usize, n: usize) -> usize {
    1 << (n - 1 - spin)
}

#[inline]
pub fn spin_bit(index: usize, spin: usize, n: usize) -> usize {
    (index >> (n - 1 - spin)) & 1
}

/// Full-register indices for each local basis state of `targets`, given a
/// base index with all target bits cleared.
fn local_offsets(targets: &[usize], n: usize) -> Vec<usize> {
    let k = targets.len();
    (0..1usize << k)
        .map(|a| {
            let mut off = 0;
            for (p, &t) in targets.iter().enumerate() {
                if (a >> (k - 1 - p)) & 1 == 1 {
                    off |= spin_mask(t, n);
                }
            }
            off
        })
        .collect()
}

fn bases(targets: &[usize], n: usize) -> Vec<usize> {
    let mask: usize = targets.iter().map(|&t| spin_mask(t, n)).sum();
    (0..1usize << n).filter(|i| i & mask == 0).collect()
}

/// Embed(u) * m, computed without forming the embedded operator.
pub fn left_local(m: &CMat, u: &CMat, targets: &[usize], n: usize) -> CMat {
    let offs = local_offsets(targets, n);
    let k = offs.len();
    let mut out = m.clone();
    let mut v = vec![ZERO; k];
    for base in bases(targets, n) {
        for col in 0..m.ncols() {
            for a in 0..k {
                v[a] = m[(base | offs[a], col)];
            }
            for a in 0..k {
                let mut s = ZERO;
                for b in 0..k {
                    s += u[(a, b)] * v[b];
                }
                out[(base | offs[a], col)] = s;
            }
        }
    }
    out
}

/// m * Embed(u)^dagger.
pub fn right_local_adjoint(m: &CMat, u: &CMat, targets: &[usize], n: usize) -> CMat {
    let offs = local_offsets(targets, n);
    let k = offs.len();
    let mut out = m.clone();
    let mut v = vec![ZERO; k];
    for base in bases(targets, n) {
        for row in 0..m.nrows() {
            for a in 0..k {
                v[a] = m[(row, base | offs[a])];
            }
            for a in 0..k {
                let mut s = ZERO;
                for b in 0..k {
                    s += v[b] * u[(a, b)].conj();
                }
                out[(row, base | offs[a])] = s;
            }
        }
    }
    out
}

/// Embed(u) m Embed(u)^dagger.
pub fn conj_local(m: &CMat, u: &CMat, targets: &[usize], n: usize) -> CMat {
    right_local_adjoint(&left_local(m, u, targets, n), u, targets, n)
}

/// Minimal ||a - e^{i phi} b||_2 over a global phase.
pub fn distance_global_phase(a: &CMat, b: &CMat) -> f64 {
    let ov = trace_product(&b.adjoint(), a);
    let ph = if ov.norm() > 1e-14 { ov / ov.norm() } else { ONE };
    spectral_norm(&(a - b * ph))
}
