//! FID synthesis, spectra, multiplet labels, observables and tomography.
//!
//! Phase convention: a spin along -y gives a positive absorptive line, so
//! `R_x(90)` applied to |0> yields a positive line. The line amplitude of spin
//! `s` with spectators in configuration `k` is `V = -2i rho[0k, 1k]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, C64, ZERO};
use crate::pulse::{rotation_2x2, Axis};
use crate::spin::{DensityMatrix, SpinSystem};

/// The read pulse that turns +z into a positive absorptive line.
pub const READOUT_AXIS: Axis = Axis::X;
pub const READOUT_ANGLE: f64 = 90.0;
pub const DEFAULT_POINTS: usize = 1 << 14;

pub fn readout_pulse() -> CMat {
    rotation_2x2(READOUT_AXIS, READOUT_ANGLE)
}

/// Frequency of one multiplet line, labelled by the state of the other spins.
#[derive(Debug, Clone, PartialEq)]
pub struct LineLabel {
    pub freq_hz: f64,
    /// Indices of the other spins, ascending.
    pub spectators: Vec<usize>,
    /// '0'/'1' per spectator, in `spectators` order.
    pub spectator_state: String,
}

impl LineLabel {
    /// Register index with the observed spin in |0> and spectators as labelled.
    pub fn ground_index(&self, n: usize) -> usize {
        let mut idx = 0;
        for (p, &s) in self.spectators.iter().enumerate() {
            if self.spectator_state.as_bytes()[p] == b'1' {
                idx |= linalg::spin_mask(s, n);
            }
        }
        idx
    }
}

/// Line frequency of `spin` given the register index of the spectators.
pub fn line_frequency(system: &SpinSystem, spin: usize, index: usize) -> f64 {
    let n = system.n;
    let mut f = system.offsets_hz[spin];
    for j in 0..n {
        if j == spin {
            continue;
        }
        let m = if linalg::spin_bit(index, j, n) == 0 { 0.5 } else { -0.5 };
        f -= system.effective_j(spin, j) * m;
    }
    f
}

/// All 2^(n-1) lines of `spin` in spectator-index order.
pub fn assign_multiplet(system: &SpinSystem, spin: usize) -> Vec<LineLabel> {
    let n = system.n;
    let spectators: Vec<usize> = (0..n).filter(|&j| j != spin).collect();
    let m = spectators.len();
    (0..1usize << m)
        .map(|k| {
            let state: String = (0..m).map(|p| if (k >> (m - 1 - p)) & 1 == 1 { '1' } else { '0' }).collect();
            let label = LineLabel { freq_hz: 0.0, spectators: spectators.clone(), spectator_state: state };
            let idx = label.ground_index(n);
            LineLabel { freq_hz: line_frequency(system, spin, idx), ..label }
        })
        .collect()
}

/// Pairs of lines closer than `resolution_hz`.
pub fn merged_lines(labels: &[LineLabel], resolution_hz: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            if (labels[i].freq_hz - labels[j].freq_hz).abs() < resolution_hz {
                out.push((i, j));
            }
        }
    }
    out
}

/// Complex amplitude of every line of `spin` from the SQC entries of rho.
pub fn line_amplitudes(rho: &DensityMatrix, spin: usize) -> Vec<C64> {
    let n = rho.n;
    let bit = linalg::spin_mask(spin, n);
    let m = n - 1;
    (0..1usize << m)
        .map(|k| {
            let idx = spread(k, spin, n);
            c(0.0, -2.0) * rho.mat[(idx, idx | bit)]
        })
        .collect()
}

/// Insert a zero bit for `spin` into a spectator index.
fn spread(k: usize, spin: usize, n: usize) -> usize {
    let low_bits = n - 1 - spin;
    let low = k & ((1 << low_bits) - 1);
    let high = k >> low_bits;
    (high << (low_bits + 1)) | low
}

/// V(t) = -2i sum_k rho[0k,1k](t), sampled at k*dt, with exp(-t/T2*) decay.
pub fn fid(
    system: &SpinSystem,
    rho: &DensityMatrix,
    spin: usize,
    points: usize,
    dt: f64,
    t2_star: Option<f64>,
) -> Result<Vec<C64>> {
    let n = system.n;
    if rho.n != n {
        return Err(Error::Dimension { expected: n, got: rho.n });
    }
    if spin >= n {
        return Err(Error::SpinRange { index: spin, n });
    }
    let nyquist = 1.0 / (2.0 * dt);
    let amps = line_amplitudes(rho, spin);
    let freqs: Vec<f64> = (0..amps.len()).map(|k| line_frequency(system, spin, spread(k, spin, n))).collect();
    if let Some(&f) = freqs.iter().find(|f| f.abs() >= nyquist) {
        return Err(Error::Aliasing { freq_hz: f, nyquist_hz: nyquist });
    }
    Ok((0..points)
        .map(|i| {
            let t = i as f64 * dt;
            let env = t2_star.map_or(1.0, |t2| (-t / t2).exp());
            amps.iter().zip(&freqs).map(|(a, f)| a * cis(2.0 * PI * f * t)).sum::<C64>() * env
        })
        .collect())
}

/// Dwell time giving four times the Nyquist rate of the widest line.
pub fn default_dwell(system: &SpinSystem, spin: usize) -> f64 {
    let fmax = (0..1usize << (system.n - 1))
        .map(|k| line_frequency(system, spin, spread(k, spin, system.n)).abs())
        .fold(1.0, f64::max);
    1.0 / (8.0 * fmax)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freq_axis: Vec<f64>,
    pub values: Vec<C64>,
    pub spin: usize,
}

/// S(f) = sum_t V(t) e^{-i 2 pi f t} dt on a centered axis.
pub fn spectrum(series: &[C64], dt: f64, spin: usize) -> Result<Spectrum> {
    let n = series.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty FID".into()));
    }
    let mut buf = series.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let df = 1.0 / (n as f64 * dt);
    let mut freq_axis = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let f = i as i64 - half as i64;
        freq_axis.push(f as f64 * df);
        values.push(buf[f.rem_euclid(n as i64) as usize] * dt);
    }
    Ok(Spectrum { freq_axis, values, spin })
}

impl Spectrum {
    pub fn df(&self) -> f64 {
        if self.freq_axis.len() < 2 {
            return 0.0;
        }
        self.freq_axis[1] - self.freq_axis[0]
    }

    /// Sum |S|^2 df.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.df()
    }

    pub fn peak_index(&self) -> usize {
        self.values.iter().enumerate().max_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap()).map(|(i, _)| i).unwrap_or(0)
    }

    /// Half width at half height of the absorptive line around `index`,
    /// by linear interpolation.
    pub fn half_width(&self, index: usize) -> f64 {
        let h = self.values[index].re / 2.0;
        let cross = |step: i64| -> f64 {
            let mut i = index as i64;
            while i + step >= 0 && ((i + step) as usize) < self.values.len() {
                let j = (i + step) as usize;
                if self.values[j].re <= h {
                    let (y0, y1) = (self.values[i as usize].re, self.values[j].re);
                    let frac = (y0 - h) / (y0 - y1);
                    let (f0, f1) = (self.freq_axis[i as usize], self.freq_axis[j]);
                    return f0 + frac * (f1 - f0);
                }
                i += step;
            }
            self.freq_axis[i as usize]
        };
        (cross(1) - cross(-1)) / 2.0
    }

    /// Riemann sum of S over [lo, hi).
    pub fn integrate(&self, lo: f64, hi: f64) -> C64 {
        let df = self.df();
        self.freq_axis.iter().zip(&self.values).filter(|(f, _)| **f >= lo && **f < hi).map(|(_, v)| *v).sum::<C64>()
            * df
    }

    /// Integrals over windows split halfway between neighbouring lines.
    /// Lines closer than one bin share their window and both get its value.
    pub fn line_integrals(&self, labels: &[LineLabel]) -> Vec<C64> {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| labels[a].freq_hz.partial_cmp(&labels[b].freq_hz).unwrap());
        let lo_edge = self.freq_axis[0] - 1.0;
        let hi_edge = self.freq_axis[self.freq_axis.len() - 1] + 1.0;
        let mut out = vec![ZERO; labels.len()];
        for (p, &i) in order.iter().enumerate() {
            let lo = if p == 0 { lo_edge } else { 0.5 * (labels[order[p - 1]].freq_hz + labels[i].freq_hz) };
            let hi =
                if p + 1 == order.len() { hi_edge } else { 0.5 * (labels[i].freq_hz + labels[order[p + 1]].freq_hz) };
            out[i] = self.integrate(lo, hi);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("freq_hz,real,imag\n");
        for (f, v) in self.freq_axis.iter().zip(&self.values) {
            s.push_str(&format!("{:.6},{:.10e},{:.10e}\n", f, v.re, v.im));
        }
        s
    }
}

/// Linewidth at half height from T2* as stated by the usual NMR formula 1/(2 pi T).
/// A Lorentzian with this decay has this half width at half maximum.
pub fn linewidth(t2_star: f64) -> f64 {
    1.0 / (2.0 * PI * t2_star)
}

/// O_i = 2 Tr(rho Iz_i) for each listed spin.
pub fn observables(rho: &DensityMatrix, spins: &[usize]) -> Vec<f64> {
    let n = rho.n;
    spins
        .iter()
        .map(|&s| {
            (0..rho.dim())
                .map(|b| {
                    let z = if linalg::spin_bit(b, s, n) == 0 { 1.0 } else { -1.0 };
                    z * rho.mat[(b, b)].re
                })
                .sum()
        })
        .collect()
}

pub fn all_observables(rho: &DensityMatrix) -> Vec<f64> {
    observables(rho, &(0..rho.n).collect::<Vec<_>>())
}

/// Read pulse per spin before acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadPulse {
    None,
    X90,
    Y90,
}

pub type ReadoutSetting = Vec<ReadPulse>;

/// {I, X, Y}^n, 3^n settings.
pub fn standard_readout_set(n: usize) -> Vec<ReadoutSetting> {
    let mut out: Vec<ReadoutSetting> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                [ReadPulse::None, ReadPulse::X90, ReadPulse::Y90].into_iter().map(move |p| {
                    let mut t = s.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn setting_unitary(setting: &[ReadPulse]) -> CMat {
    let ops: Vec<CMat> = setting
        .iter()
        .map(|p| match p {
            ReadPulse::None => linalg::identity(2),
            ReadPulse::X90 => rotation_2x2(Axis::X, 90.0),
            ReadPulse::Y90 => rotation_2x2(Axis::Y, 90.0),
        })
        .collect();
    linalg::kron_all(&ops)
}

/// Line amplitudes of every spin after the setting's read pulses.
pub fn simulate_readout(rho: &DensityMatrix, setting: &[ReadPulse]) -> Result<Vec<Vec<C64>>> {
    if setting.len() != rho.n {
        return Err(Error::Dimension { expected: rho.n, got: setting.len() });
    }
    let r = rho.apply(&setting_unitary(setting))?;
    Ok((0..rho.n).map(|s| line_amplitudes(&r, s)).collect())
}

/// Entries of rho that are single-quantum coherences.
pub fn sqc_mask(n: usize) -> Vec<Vec<bool>> {
    let d = 1usize << n;
    (0..d).map(|a| (0..d).map(|b| (a ^ b).count_ones() == 1).collect()).collect()
}

/// Least-squares reconstruction from per-setting line amplitudes.
/// The trace is fixed to 1 since line amplitudes carry no trace information.
pub fn tomography(n: usize, experiments: &[(ReadoutSetting, Vec<Vec<C64>>)]) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let unknowns = 2 * d * d;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    // rho = sum_{ab} x_ab |a><b|; V = -2i Tr(U rho U^dag E) = -2i sum_ab rho_ab (U^dag E U)_ba
    for (setting, data) in experiments {
        if setting.len() != n || data.len() != n {
            return Err(Error::Dimension { expected: n, got: setting.len() });
        }
        let u = setting_unitary(setting);
        for s in 0..n {
            let bit = linalg::spin_mask(s, n);
            for (k, v) in data[s].iter().enumerate() {
                let idx = spread(k, s, n);
                // E = |1k><0k| picks rho'[0k,1k]
                let mut e = CMat::zeros(d, d);
                e[(idx | bit, idx)] = c(1.0, 0.0);
                let m = u.adjoint() * e * &u * c(0.0, -2.0);
                let mut re_row = vec![0.0; unknowns];
                let mut im_row = vec![0.0; unknowns];
                for a in 0..d {
                    for b in 0..d {
                        let coef = m[(b, a)];
                        let p = 2 * (a * d + b);
                        // coef * (xr + i xi)
                        re_row[p] = coef.re;
                        re_row[p + 1] = -coef.im;
                        im_row[p] = coef.im;
                        im_row[p + 1] = coef.re;
                    }
                }
                rows.push(re_row);
                rhs.push(v.re);
                rows.push(im_row);
                rhs.push(v.im);
            }
        }
    }
    // trace and Hermiticity constraints
    let mut tr_re = vec![0.0; unknowns];
    for a in 0..d {
        tr_re[2 * (a * d + a)] = 1.0;
    }
    rows.push(tr_re);
    rhs.push(1.0);
    for a in 0..d {
        for b in 0..d {
            let mut re = vec![0.0; unknowns];
            let mut im = vec![0.0; unknowns];
            re[2 * (a * d + b)] += 1.0;
            re[2 * (b * d + a)] -= 1.0;
            im[2 * (a * d + b) + 1] += 1.0;
            im[2 * (b * d + a) + 1] += 1.0;
            rows.push(re);
            rhs.push(0.0);
            rows.push(im);
            rhs.push(0.0);
        }
    }
    let a = DMatrix::from_fn(rows.len(), unknowns, |i, j| rows[i][j]);
    let bvec = DVector::from_vec(rhs);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < unknowns {
        return Err(Error::RankDeficient { rank, needed: unknowns });
    }
    let x = svd.solve(&bvec, 1e-12 * smax).map_err(|e| Error::Invariant(e.to_string()))?;
    let mut mat = CMat::from_fn(d, d, |a, b| c(x[2 * (a * d + b)], x[2 * (a * d + b) + 1]));
    mat = (&mat + mat.adjoint()) * c(0.5, 0.0);
    let tr = linalg::trace(&mat);
    mat /= tr;
    DensityMatrix::new(n, mat)
}

/// ||a - b||_2 / ||b||_2.
pub fn relative_error(a: &CMat, b: &CMat) -> f64 {
    linalg::spectral_norm(&(a - b)) / linalg::spectral_norm(b)
}

/// |<psi|rho|psi>|-style fidelity Tr(rho sigma) for a pure reference sigma.
pub fn overlap_fidelity(rho: &DensityMatrix, pure_ref: &DensityMatrix) -> f64 {
    linalg::trace_product(&rho.mat, &pure_ref.mat).re
}
