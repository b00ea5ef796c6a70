//! RF pulse physics: ideal rotations, shaped-pulse propagators, excitation
//! profiles, Bloch-Siegert shifts, phase ramps, simultaneous-pulse tracking
//! and coupled-evolution unwinding.
//!
//! Frames: every propagator returned here acts in the channel frame used by
//! `spin::build_hamiltonian`, with the pulse starting at t = 0. A carrier at
//! offset `c` Hz with phase `phi` presents the field
//! `w1 [cos(phi - 2 pi c t) Ix + sin(phi - 2 pi c t) Iy]`, which is resonant
//! with a spin at offset `c` under `H = -2 pi c Iz`. An on-resonance pulse with
//! phase `phi` and area `theta` therefore implements `R_phi(theta)` as
//! defined by `rotation_2x2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, C64, ZERO};
use crate::spin::{self, SpinSystem};

/// Largest per-slice phase advance allowed by `phase_ramp`.
pub const MAX_RAMP_STEP_DEG: f64 = 10.0;
/// Sub-slicing target for off-resonant carriers in propagators.
pub const PROPAGATOR_STEP_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    X,
    Y,
    Z,
    /// Axis in the xy plane at this phase (degrees from x toward y).
    Phase(f64),
    /// Arbitrary axis, normalized on use.
    Vector([f64; 3]),
}

impl Axis {
    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
            Axis::Phase(p) => {
                let r = p.to_radians();
                [r.cos(), r.sin(), 0.0]
            }
            Axis::Vector(v) => {
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            }
        }
    }
}

/// exp(-i theta n.sigma / 2).
pub fn rotation_2x2(axis: Axis, angle_deg: f64) -> CMat {
    let [nx, ny, nz] = axis.unit();
    let h = angle_deg.to_radians() / 2.0;
    let (co, si) = (h.cos(), h.sin());
    linalg::from_rows(&[&[c(co, -si * nz), c(-si * ny, -si * nx)], &[c(si * ny, -si * nx), c(co, si * nz)]])
}

/// Single-spin rotation embedded in an n-spin register.
pub fn ideal_rotation(axis: Axis, angle_deg: f64, spin: usize, n: usize) -> CMat {
    spin::embed(&rotation_2x2(axis, angle_deg), &[spin], n).expect("spin index in range")
}

pub fn hadamard_2x2() -> CMat {
    let s = 1.0 / 2f64.sqrt();
    linalg::real_matrix(&[&[s, s], &[s, -s]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    /// In [0, 1].
    pub amplitude: f64,
    pub phase_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Rectangular,
    Gaussian,
    Hermite,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    pub name: String,
    pub kind: ShapeKind,
    pub slices: Vec<Slice>,
    pub nominal_angle: f64,
}

pub const DEFAULT_SHAPED_SLICES: usize = 64;
/// Gaussian envelope is cut at +-2.5 sigma.
pub const GAUSSIAN_TRUNCATION: f64 = 2.5;
/// Hermite envelopes span +-3 sigma.
pub const HERMITE_TRUNCATION: f64 = 3.0;
pub const HERMITE90_A: f64 = 0.667;
pub const HERMITE180_A: f64 = 0.9;

fn midpoints(n: usize, half_width: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| -half_width + (k as f64 + 0.5) * 2.0 * half_width / n as f64)
}

fn from_signed(values: Vec<f64>) -> Vec<Slice> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values
        .into_iter()
        .map(|v| Slice { amplitude: v.abs() / peak, phase_deg: if v < 0.0 { 180.0 } else { 0.0 } })
        .collect()
}

impl PulseShape {
    pub fn rectangular(angle: f64) -> Self {
        PulseShape {
            name: "rectangular".into(),
            kind: ShapeKind::Rectangular,
            slices: vec![Slice { amplitude: 1.0, phase_deg: 0.0 }],
            nominal_angle: angle,
        }
    }

    pub fn gaussian(angle: f64, n_slices: usize) -> Self {
        let vals = midpoints(n_slices, GAUSSIAN_TRUNCATION).map(|x| (-x * x).exp()).collect();
        PulseShape {
            name: format!("gaussian{}", angle),
            kind: ShapeKind::Gaussian,
            slices: from_signed(vals),
            nominal_angle: angle,
        }
    }

    /// (1 - a x^2) exp(-x^2); negative lobes carry a 180 degree phase.
    pub fn hermite(angle: f64, a: f64, n_slices: usize) -> Self {
        let vals = midpoints(n_slices, HERMITE_TRUNCATION).map(|x| (1.0 - a * x * x) * (-x * x).exp()).collect();
        PulseShape {
            name: format!("hermite{}", angle),
            kind: ShapeKind::Hermite,
            slices: from_signed(vals),
            nominal_angle: angle,
        }
    }

    pub fn gaussian90() -> Self {
        Self::gaussian(90.0, DEFAULT_SHAPED_SLICES)
    }
    pub fn gaussian180() -> Self {
        Self::gaussian(180.0, DEFAULT_SHAPED_SLICES)
    }
    pub fn hermite90() -> Self {
        Self::hermite(90.0, HERMITE90_A, DEFAULT_SHAPED_SLICES)
    }
    pub fn hermite180() -> Self {
        Self::hermite(180.0, HERMITE180_A, DEFAULT_SHAPED_SLICES)
    }

    /// Built-in shape by name. "av90" maps to hermite90.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "rectangular" | "rect" => Some(Self::rectangular(90.0)),
            "gaussian90" => Some(Self::gaussian90()),
            "gaussian180" => Some(Self::gaussian180()),
            "hermite90" | "av90" => Some(Self::hermite90()),
            "hermite180" => Some(Self::hermite180()),
            _ => None,
        }
    }

    /// Same envelope calibrated for a different nominal angle.
    pub fn with_angle(&self, angle: f64) -> Self {
        let mut s = self.clone();
        s.nominal_angle = angle;
        s
    }

    /// Parse a slice table: optional `name`/`angle` header lines, then
    /// `amplitude phase_deg` per line. `#` starts a comment.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut name = "custom".to_string();
        let mut angle = 90.0;
        let mut slices = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap();
            let perr = |msg: &str| Error::Parse { line: ln + 1, msg: msg.to_string() };
            match first {
                "name" => name = parts.next().ok_or_else(|| perr("missing name"))?.to_string(),
                "angle" => angle = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr("bad angle"))?,
                _ => {
                    let amp: f64 = first.parse().map_err(|_| perr("bad amplitude"))?;
                    let ph: f64 = parts.next().unwrap_or("0").parse().map_err(|_| perr("bad phase"))?;
                    if !(0.0..=1.0).contains(&amp) {
                        return Err(perr("amplitude outside [0, 1]"));
                    }
                    slices.push(Slice { amplitude: amp, phase_deg: ph });
                }
            }
        }
        if slices.is_empty() {
            return Err(Error::InvalidArgument("pulse shape has no slices".into()));
        }
        Ok(PulseShape { name, kind: ShapeKind::Custom, slices, nominal_angle: angle })
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("name {}\nangle {}\n", self.name, self.nominal_angle);
        for sl in &self.slices {
            s.push_str(&format!("{:.10} {:.6}\n", sl.amplitude, sl.phase_deg));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Mean of the in-phase amplitude, the fraction of a rectangular pulse's area.
    pub fn area_fraction(&self) -> f64 {
        self.slices.iter().map(|s| s.amplitude * s.phase_deg.to_radians().cos()).sum::<f64>() / self.slices.len() as f64
    }

    /// Peak nutation frequency (Hz) so that the integral of w1 over `pw` equals `angle_deg`.
    pub fn peak_omega1_hz(&self, angle_deg: f64, pw: f64) -> f64 {
        angle_deg / 360.0 / (pw * self.area_fraction())
    }

    pub fn validate(&self) -> Result<()> {
        if self.slices.is_empty() {
            return Err(Error::InvalidArgument("pulse shape has no slices".into()));
        }
        if self.slices.iter().any(|s| !(0.0..=1.0).contains(&s.amplitude)) {
            return Err(Error::InvalidArgument("slice amplitude outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// Shift the effective carrier by `delta_hz` by advancing slice phases.
///
/// Under `H = -w Iz` a carrier at `+delta` advances its phase by
/// `-360 delta t`; the per-slice step is bounded by `MAX_RAMP_STEP_DEG`.
pub fn phase_ramp(shape: &PulseShape, delta_hz: f64, slice_dt: f64) -> Result<PulseShape> {
    let step = 360.0 * delta_hz * slice_dt;
    if step.abs() > MAX_RAMP_STEP_DEG {
        return Err(Error::CoarsePhaseRamp { step: step.abs(), limit: MAX_RAMP_STEP_DEG });
    }
    let mut out = shape.clone();
    for (k, s) in out.slices.iter_mut().enumerate() {
        s.phase_deg -= step * (k as f64 + 0.5);
    }
    Ok(out)
}

/// Per-slice vector sum of shapes with equal slice counts. Returns the
/// normalized shape and the factor by which peak amplitudes grew.
pub fn combine(shapes: &[PulseShape]) -> Result<(PulseShape, f64)> {
    let first = shapes.first().ok_or_else(|| Error::InvalidArgument("no shapes".into()))?;
    let n = first.len();
    if shapes.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidArgument("shapes differ in slice count".into()));
    }
    let sums: Vec<C64> = (0..n)
        .map(|k| {
            shapes.iter().map(|s| C64::from_polar(s.slices[k].amplitude, s.slices[k].phase_deg.to_radians())).sum()
        })
        .collect();
    let peak = sums.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let slices = sums.iter().map(|z| Slice { amplitude: z.norm() / peak, phase_deg: z.arg().to_degrees() }).collect();
    Ok((
        PulseShape { name: "combined".into(), kind: ShapeKind::Custom, slices, nominal_angle: first.nominal_angle },
        peak,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTarget {
    pub spin: usize,
    pub carrier_offset_hz: f64,
    pub phase_deg: f64,
    pub peak_omega1_hz: f64,
    /// Nominal rotation used by ideal execution.
    pub angle_deg: f64,
    /// Extra per-slice phase (frequency tracking); empty means none.
    pub slice_phase_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseEvent {
    pub targets: Vec<PulseTarget>,
    pub shape: PulseShape,
    pub duration: f64,
}

impl PulseEvent {
    /// A calibrated pulse on one spin with the carrier on its resonance.
    pub fn selective(
        system: &SpinSystem,
        spin: usize,
        shape: &PulseShape,
        angle_deg: f64,
        phase_deg: f64,
        pw: f64,
    ) -> Self {
        PulseEvent {
            targets: vec![PulseTarget {
                spin,
                carrier_offset_hz: system.offsets_hz[spin],
                phase_deg,
                peak_omega1_hz: shape.peak_omega1_hz(angle_deg, pw),
                angle_deg,
                slice_phase_deg: Vec::new(),
            }],
            shape: shape.with_angle(angle_deg),
            duration: pw,
        }
    }

    /// Simultaneous pulses on several spins sharing one shape and duration.
    pub fn simultaneous(system: &SpinSystem, spins: &[(usize, f64, f64)], shape: &PulseShape, pw: f64) -> Self {
        let targets = spins
            .iter()
            .map(|&(spin, angle, phase)| PulseTarget {
                spin,
                carrier_offset_hz: system.offsets_hz[spin],
                phase_deg: phase,
                peak_omega1_hz: shape.peak_omega1_hz(angle, pw),
                angle_deg: angle,
                slice_phase_deg: Vec::new(),
            })
            .collect();
        PulseEvent { targets, shape: shape.clone(), duration: pw }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InvalidArgument("pulse has no targets".into()));
        }
        if self.duration <= 0.0 {
            return Err(Error::InvalidArgument("pulse duration must be positive".into()));
        }
        for t in &self.targets {
            if t.spin >= n {
                return Err(Error::SpinRange { index: t.spin, n });
            }
            if !t.slice_phase_deg.is_empty() && t.slice_phase_deg.len() != self.shape.len() {
                return Err(Error::InvalidArgument("slice phase table length mismatch".into()));
            }
        }
        self.shape.validate()
    }

    pub fn slice_dt(&self) -> f64 {
        self.duration / self.shape.len() as f64
    }

    /// Ideal (instantaneous) unitary of all targets.
    pub fn ideal_unitary(&self, n: usize) -> CMat {
        let mut u = linalg::identity(1 << n);
        for t in &self.targets {
            u = ideal_rotation(Axis::Phase(t.phase_deg), t.angle_deg, t.spin, n) * u;
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RfModel {
    /// Each carrier drives only its own target spin.
    #[default]
    Selective,
    /// Each carrier drives every spin on the target's nucleus channel.
    Channel,
}

/// exp(-i H t) for a 2x2 Hermitian H.
fn expm_hermitian_2x2(h: &CMat, t: f64) -> CMat {
    let h0 = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
    let hz = (h[(0, 0)].re - h[(1, 1)].re) / 2.0;
    let hx = h[(0, 1)].re;
    let hy = -h[(0, 1)].im;
    let w = (hx * hx + hy * hy + hz * hz).sqrt();
    let ph = cis(-h0 * t);
    if w < 1e-300 {
        return linalg::identity(2) * ph;
    }
    let (co, si) = ((w * t).cos(), (w * t).sin() / w);
    linalg::from_rows(&[
        &[c(co, -si * hz) * ph, c(-si * hy, -si * hx) * ph],
        &[c(si * hy, -si * hx) * ph, c(co, si * hz) * ph],
    ])
}

struct Drive {
    spin: usize,
    target: usize,
}

/// Product of slice propagators (last slice leftmost).
pub fn shaped_propagator(
    system: &SpinSystem,
    event: &PulseEvent,
    include_coupling: bool,
    model: RfModel,
) -> Result<CMat> {
    let n = system.n;
    event.validate(n)?;
    // which (spin, carrier) pairs carry RF
    let mut drives = Vec::new();
    for (k, t) in event.targets.iter().enumerate() {
        match model {
            RfModel::Selective => drives.push(Drive { spin: t.spin, target: k }),
            RfModel::Channel => {
                for s in 0..n {
                    if system.same_channel(s, t.spin) {
                        drives.push(Drive { spin: s, target: k });
                    }
                }
            }
        }
    }
    let mut driven: Vec<usize> = drives.iter().map(|d| d.spin).collect();
    driven.sort_unstable();
    driven.dedup();

    // reference frequency of each spin's frame
    let mut reference = system.offsets_hz.clone();
    for t in &event.targets {
        reference[t.spin] = t.carrier_offset_hz;
    }
    let residual: Vec<f64> = (0..n).map(|s| 2.0 * PI * (system.offsets_hz[s] - reference[s])).collect();
    let diag = system.diagonal_with(&residual, include_coupling);

    let nslices = event.shape.len();
    let dt = event.slice_dt();
    let max_rel = drives
        .iter()
        .map(|d| (event.targets[d.target].carrier_offset_hz - reference[d.spin]).abs())
        .fold(0.0, f64::max);
    let sub = ((360.0 * max_rel * dt / PROPAGATOR_STEP_DEG).ceil() as usize).max(1);
    let h = dt / sub as f64;

    let k = driven.len();
    let local_dim = 1usize << k;
    let local_of = |s: usize| driven.iter().position(|&d| d == s).unwrap();
    let driven_mask: usize = driven.iter().map(|&s| linalg::spin_mask(s, n)).sum();
    let offsets: Vec<usize> = (0..local_dim)
        .map(|a| {
            let mut off = 0;
            for (p, &s) in driven.iter().enumerate() {
                if (a >> (k - 1 - p)) & 1 == 1 {
                    off |= linalg::spin_mask(s, n);
                }
            }
            off
        })
        .collect();
    let block_bases: Vec<usize> = (0..1usize << n).filter(|i| i & driven_mask == 0).collect();
    let mut blocks: Vec<CMat> = vec![linalg::identity(local_dim); block_bases.len()];

    for slice in 0..nslices {
        let sl = event.shape.slices[slice];
        for j in 0..sub {
            let tm = slice as f64 * dt + (j as f64 + 0.5) * h;
            // transverse field per driven spin
            let mut field = vec![ZERO; k];
            for d in &drives {
                let t = &event.targets[d.target];
                let w1 = 2.0 * PI * t.peak_omega1_hz * sl.amplitude;
                if w1 == 0.0 {
                    continue;
                }
                let extra = t.slice_phase_deg.get(slice).copied().unwrap_or(0.0);
                let phase = (t.phase_deg + sl.phase_deg + extra).to_radians()
                    - 2.0 * PI * (t.carrier_offset_hz - reference[d.spin]) * tm;
                field[local_of(d.spin)] += C64::from_polar(w1, phase);
            }
            for (bi, &base) in block_bases.iter().enumerate() {
                let mut hb = CMat::zeros(local_dim, local_dim);
                for a in 0..local_dim {
                    hb[(a, a)] = c(diag[base | offsets[a]], 0.0);
                }
                for (p, f) in field.iter().enumerate() {
                    if *f == ZERO {
                        continue;
                    }
                    let bitp = 1usize << (k - 1 - p);
                    // w1 (cos Ix + sin Iy): <0|.|1> = (bx - i by)/2
                    let upper = f.conj() * 0.5;
                    for a in 0..local_dim {
                        if a & bitp == 0 {
                            hb[(a, a | bitp)] += upper;
                            hb[(a | bitp, a)] += upper.conj();
                        }
                    }
                }
                let step = if local_dim == 2 { expm_hermitian_2x2(&hb, h) } else { linalg::expm_hermitian(&hb, h) };
                blocks[bi] = step * &blocks[bi];
            }
        }
    }

    let d = 1usize << n;
    let mut u = CMat::zeros(d, d);
    for (bi, &base) in block_bases.iter().enumerate() {
        for a in 0..local_dim {
            for b in 0..local_dim {
                u[(base | offsets[a], base | offsets[b])] = blocks[bi][(a, b)];
            }
        }
    }
    // back to the channel frame: free precession at each reference frequency
    let frame: Vec<f64> = (0..n).map(|s| 2.0 * PI * reference[s]).collect();
    let phi = spin::diagonal_propagator(&system.diagonal_with(&frame, false), event.duration);
    Ok(phi * u)
}

/// Bloch vector after the event for a lone spin at each offset. All of the
/// event's carriers act on the spin. Returns (z, |xy|) per grid point.
pub fn excitation_profile(event: &PulseEvent, freq_grid: &[f64], initial: [f64; 3]) -> Result<Vec<(f64, f64)>> {
    if freq_grid.is_empty() {
        return Err(Error::InvalidArgument("empty frequency grid".into()));
    }
    Ok(freq_grid
        .iter()
        .map(|&f| {
            let v = bloch_after(event, f, initial);
            (v[2], (v[0] * v[0] + v[1] * v[1]).sqrt())
        })
        .collect())
}

/// Final Bloch vector of a lone spin at `offset_hz`.
pub fn bloch_after(event: &PulseEvent, offset_hz: f64, initial: [f64; 3]) -> [f64; 3] {
    let mut sys = SpinSystem::new(1).with_offsets(&[offset_hz]);
    sys.nucleus = vec!["x".into()];
    // the lone spin is driven by every carrier; rotate its frame at the nearest one
    let nearest = event
        .targets
        .iter()
        .min_by(|a, b| {
            (a.carrier_offset_hz - offset_hz).abs().partial_cmp(&(b.carrier_offset_hz - offset_hz).abs()).unwrap()
        })
        .unwrap();
    let mut ev = event.clone();
    for t in ev.targets.iter_mut() {
        t.spin = 0;
    }
    // put the nearest carrier first so it defines the reference frame
    let pos = event.targets.iter().position(|t| std::ptr::eq(t, nearest)).unwrap();
    ev.targets.swap(0, pos);
    let u = single_spin_propagator(&sys, &ev);
    let rho = bloch_to_rho(initial);
    let out = &u * rho * u.adjoint();
    rho_to_bloch(&out)
}

fn single_spin_propagator(sys: &SpinSystem, ev: &PulseEvent) -> CMat {
    // reference frame of the first carrier; all carriers drive spin 0
    let f = sys.offsets_hz[0];
    let r = ev.targets[0].carrier_offset_hz;
    let dz = 2.0 * PI * (f - r);
    let nslices = ev.shape.len();
    let dt = ev.slice_dt();
    let max_rel = ev.targets.iter().map(|t| (t.carrier_offset_hz - r).abs()).fold(0.0, f64::max);
    let sub = ((360.0 * max_rel * dt / PROPAGATOR_STEP_DEG).ceil() as usize).max(1);
    let h = dt / sub as f64;
    let mut u = linalg::identity(2);
    for slice in 0..nslices {
        let sl = ev.shape.slices[slice];
        for j in 0..sub {
            let tm = slice as f64 * dt + (j as f64 + 0.5) * h;
            let mut field = ZERO;
            for t in &ev.targets {
                let w1 = 2.0 * PI * t.peak_omega1_hz * sl.amplitude;
                let extra = t.slice_phase_deg.get(slice).copied().unwrap_or(0.0);
                let phase =
                    (t.phase_deg + sl.phase_deg + extra).to_radians() - 2.0 * PI * (t.carrier_offset_hz - r) * tm;
                field += C64::from_polar(w1, phase);
            }
            let upper = field.conj() * 0.5;
            let hb = linalg::from_rows(&[&[c(-dz / 2.0, 0.0), upper], &[upper.conj(), c(dz / 2.0, 0.0)]]);
            u = expm_hermitian_2x2(&hb, h) * u;
        }
    }
    u
}

pub fn bloch_to_rho(v: [f64; 3]) -> CMat {
    linalg::from_rows(&[
        &[c(0.5 * (1.0 + v[2]), 0.0), c(0.5 * v[0], -0.5 * v[1])],
        &[c(0.5 * v[0], 0.5 * v[1]), c(0.5 * (1.0 - v[2]), 0.0)],
    ])
}

pub fn rho_to_bloch(rho: &CMat) -> [f64; 3] {
    let r01 = rho[(0, 1)];
    [2.0 * r01.re, -2.0 * r01.im, (rho[(0, 0)] - rho[(1, 1)]).re]
}

/// Generalized Bloch-Siegert shift (Hz) of a spin seeing a field of
/// `omega1_hz` at `separation_hz = f_rf - f_spin`; it points away from the carrier.
pub fn bloch_siegert_shift(omega1_hz: f64, separation_hz: f64) -> Result<f64> {
    if separation_hz == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(-omega1_hz * omega1_hz / (2.0 * separation_hz))
}

/// Z rotation (degrees) suffered by every spectator spin during `event`, from
/// integrating the Bloch-Siegert shift over the envelope. Targets and spins
/// on other channels get 0. Correct with `R_z(-theta)`.
pub fn accumulate_bs_phase(system: &SpinSystem, event: &PulseEvent) -> Result<Vec<f64>> {
    let n = system.n;
    event.validate(n)?;
    let dt = event.slice_dt();
    let mut out = vec![0.0; n];
    for s in 0..n {
        if event.targets.iter().any(|t| t.spin == s) {
            continue;
        }
        for t in &event.targets {
            if !system.same_channel(s, t.spin) {
                continue;
            }
            let sep = t.carrier_offset_hz - system.offsets_hz[s];
            let mut shift_int = 0.0;
            for sl in &event.shape.slices {
                shift_int += bloch_siegert_shift(t.peak_omega1_hz * sl.amplitude, sep)? * dt;
            }
            // a frequency shift d under H = -w Iz produces R_z(-360 d t)
            out[s] -= 360.0 * shift_int;
        }
    }
    Ok(out)
}

/// Merge concurrent pulses into one event whose carriers follow the
/// instantaneous Bloch-Siegert-shifted resonance of each target.
pub fn simultaneous_with_tracking(system: &SpinSystem, events: &[PulseEvent]) -> Result<PulseEvent> {
    let first = events.first().ok_or_else(|| Error::InvalidArgument("no events".into()))?;
    let nslices = first.shape.len();
    for e in events {
        e.validate(system.n)?;
        if e.shape.len() != nslices || (e.duration - first.duration).abs() > 1e-15 {
            return Err(Error::InvalidArgument("simultaneous pulses need equal duration and slicing".into()));
        }
    }
    let targets: Vec<(PulseTarget, &PulseShape)> =
        events.iter().flat_map(|e| e.targets.iter().map(move |t| (t.clone(), &e.shape))).collect();
    for (i, (a, _)) in targets.iter().enumerate() {
        for (b, _) in targets.iter().skip(i + 1) {
            if a.carrier_offset_hz == b.carrier_offset_hz {
                return Err(Error::ZeroSeparation);
            }
        }
    }
    let dt = first.slice_dt();
    let mut merged = Vec::new();
    for (i, (t, shape)) in targets.iter().enumerate() {
        let mut phases = Vec::with_capacity(nslices);
        let mut acc = 0.0;
        for k in 0..nslices {
            let mut shift = 0.0;
            for (j, (o, oshape)) in targets.iter().enumerate() {
                if i == j || !system.same_channel(o.spin, t.spin) {
                    continue;
                }
                let w1 = o.peak_omega1_hz * oshape.slices[k].amplitude;
                shift += bloch_siegert_shift(w1, o.carrier_offset_hz - t.carrier_offset_hz)?;
            }
            // carrier moved by `shift`: phase advances by -360 shift t (midpoint)
            let base = t.slice_phase_deg.get(k).copied().unwrap_or(0.0);
            phases.push(base - 360.0 * (acc + 0.5 * shift * dt));
            acc += shift * dt;
        }
        let mut nt = t.clone();
        // fold this event's own shape phases into the table so one shape serves all
        for (k, p) in phases.iter_mut().enumerate() {
            *p += shape.slices[k].phase_deg - first.shape.slices[k].phase_deg;
        }
        // amplitude differences between shapes are folded into peak scaling
        nt.slice_phase_deg = phases;
        merged.push(nt);
    }
    if events
        .iter()
        .any(|e| e.shape.slices.iter().zip(&first.shape.slices).any(|(a, b)| (a.amplitude - b.amplitude).abs() > 1e-12))
    {
        return Err(Error::InvalidArgument("simultaneous pulses must share an envelope".into()));
    }
    Ok(PulseEvent { targets: merged, shape: first.shape.clone(), duration: first.duration })
}

/// Concurrent pulses merged without tracking.
pub fn simultaneous_untracked(events: &[PulseEvent]) -> Result<PulseEvent> {
    let first = events.first().ok_or_else(|| Error::InvalidArgument("no events".into()))?;
    let targets = events.iter().flat_map(|e| e.targets.iter().cloned()).collect();
    Ok(PulseEvent { targets, shape: first.shape.clone(), duration: first.duration })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Symmetric,
    Before,
    After,
}

/// Fraction of pw of negative coupled evolution that best unwinds the
/// coupling accumulated during `event`, by 2-norm distance to the ideal.
pub fn unwind_tau(system: &SpinSystem, event: &PulseEvent, placement: Placement) -> Result<f64> {
    let n = system.n;
    event.validate(n)?;
    let coupled = (0..n).any(|i| (i + 1..n).any(|j| system.effective_j(i, j) != 0.0));
    if !coupled {
        return Ok(0.0);
    }
    // per-spin rotating frames: offsets vanish, carriers on resonance
    let mut sys0 = system.clone();
    sys0.offsets_hz = vec![0.0; n];
    let mut ev = event.clone();
    for t in ev.targets.iter_mut() {
        t.carrier_offset_hz = 0.0;
    }
    let u_real = shaped_propagator(&sys0, &ev, true, RfModel::Selective)?;
    let u_ideal = ev.ideal_unitary(n);
    let hj = sys0.coupling_diagonal();
    let pw = event.duration;
    let dist = |tau: f64| -> f64 {
        let p = spin::diagonal_propagator(&hj, -pw * tau);
        let m = match placement {
            Placement::Symmetric => &p * &u_real * &p,
            Placement::Before => &u_real * spin::diagonal_propagator(&hj, -2.0 * pw * tau),
            Placement::After => spin::diagonal_propagator(&hj, -2.0 * pw * tau) * &u_real,
        };
        linalg::distance_global_phase(&m, &u_ideal)
    };
    // coarse scan, then golden-section refinement around the best point
    let (lo_lim, hi_lim) = (0.0, 1.5);
    let steps = 150;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=steps {
        let tau = lo_lim + (hi_lim - lo_lim) * i as f64 / steps as f64;
        let d = dist(tau);
        if d < best.1 - 1e-15 {
            best = (tau, d);
        }
    }
    let span = (hi_lim - lo_lim) / steps as f64;
    let (mut a, mut b) = ((best.0 - span).max(lo_lim), (best.0 + span).min(hi_lim));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    while b - a > 1e-3 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = dist(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = dist(x2);
        }
    }
    let tau = 0.5 * (a + b);
    Ok(if dist(tau) <= best.1 { tau } else { best.0 })
}

/// Unitary of a 2x2 block check helper used by tests.
pub fn is_rotation_close(u: &CMat, axis: Axis, angle: f64, tol: f64) -> bool {
    linalg::distance_global_phase(u, &rotation_2x2(axis, angle)) < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rx180_flips() {
        let u = rotation_2x2(Axis::X, 180.0);
        assert!((u[(1, 0)] - c(0.0, -1.0)).norm() < 1e-12);
        assert!(u[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn hadamard_as_rotation() {
        let u = rotation_2x2(Axis::Vector([1.0, 0.0, 1.0]), 180.0);
        assert!(linalg::distance_global_phase(&u, &hadamard_2x2()) < 1e-12);
    }

    #[test]
    fn zero_angle_identity() {
        let u = ideal_rotation(Axis::Y, 0.0, 1, 3);
        assert!(linalg::max_abs(&(u - linalg::identity(8))) < 1e-15);
    }

    #[test]
    fn rectangular_on_resonance_is_ideal() {
        let sys = SpinSystem::new(1).with_offsets(&[250.0]);
        let ev = PulseEvent::selective(&sys, 0, &PulseShape::rectangular(90.0), 90.0, 0.0, 1e-4);
        let mut sys0 = sys.clone();
        sys0.offsets_hz = vec![0.0];
        let mut ev0 = ev.clone();
        ev0.targets[0].carrier_offset_hz = 0.0;
        let u = shaped_propagator(&sys0, &ev0, false, RfModel::Selective).unwrap();
        assert!(linalg::max_abs(&(u - rotation_2x2(Axis::X, 90.0))) < 1e-8);
    }

    #[test]
    fn zero_amplitude_is_free_evolution() {
        let sys = SpinSystem::new(2).with_offsets(&[100.0, -40.0]).with_j(0, 1, 12.0);
        let mut ev = PulseEvent::selective(&sys, 0, &PulseShape::hermite180(), 180.0, 0.0, 2e-3);
        ev.targets[0].peak_omega1_hz = 0.0;
        let u = shaped_propagator(&sys, &ev, true, RfModel::Channel).unwrap();
        let f = spin::free_evolution(&sys, 2e-3);
        assert!(linalg::max_abs(&(u - f)) < 1e-10);
    }

    #[test]
    fn phase_ramp_limits() {
        let s = PulseShape::gaussian90();
        assert_eq!(phase_ramp(&s, 0.0, 1e-5).unwrap(), s);
        assert!(matches!(phase_ramp(&s, 1e4, 1e-4), Err(Error::CoarsePhaseRamp { .. })));
    }

    #[test]
    fn bs_shift_values() {
        assert_eq!(bloch_siegert_shift(0.0, 100.0).unwrap(), 0.0);
        let s = bloch_siegert_shift(1000.0, 10_000.0).unwrap();
        assert!((s + 50.0).abs() < 1e-12);
        assert!(bloch_siegert_shift(1000.0, -10_000.0).unwrap() > 0.0);
        assert!(bloch_siegert_shift(1.0, 0.0).is_err());
    }

    #[test]
    fn table_round_trip() {
        let s = PulseShape::hermite180();
        let back = PulseShape::from_table(&s.to_table()).unwrap();
        assert_eq!(back.len(), s.len());
        assert!((back.area_fraction() - s.area_fraction()).abs() < 1e-8);
    }
}
