//! Initial states: thermal equilibrium, effective pure states by temporal
//! averaging and logical labeling, gradient crushing and
//! Schulman-Vazirani boosting.
//!
//! Z-product terms are bitmasks over spins (bit s is spin s). Term algebra
//! uses the Heisenberg picture of a CNOT(c -> t): Z_t -> Z_c Z_t.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::compiler::gate::{circuit_permutation, circuit_unitary, Gate};
use crate::compiler::text::{format_circuit, parse_circuit};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::spin::{DensityMatrix, SpinSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalMode {
    /// Traceless sum_i ratio_i Z_i.
    Deviation,
    /// (I + epsilon sum_i ratio_i Z_i) / 2^n.
    Boltzmann { epsilon: f64 },
}

fn z_sum_diag(ratios: &[f64]) -> Vec<f64> {
    let n = ratios.len();
    (0..1usize << n)
        .map(|x| (0..n).map(|s| if linalg::spin_bit(x, s, n) == 0 { ratios[s] } else { -ratios[s] }).sum())
        .collect()
}

pub fn thermal_state(system: &SpinSystem, mode: ThermalMode) -> DensityMatrix {
    let n = system.n;
    let dz = z_sum_diag(&system.polarization_ratio);
    let diag: Vec<f64> = match mode {
        ThermalMode::Deviation => dz,
        ThermalMode::Boltzmann { epsilon } => {
            let d = (1usize << n) as f64;
            dz.iter().map(|z| (1.0 + epsilon * z) / d).collect()
        }
    };
    DensityMatrix { n, mat: linalg::diag_real(&diag) }
}

/// Exact product state with ground-state probability p[s] on spin s.
pub fn thermal_product(p: &[f64]) -> DensityMatrix {
    let ops: Vec<CMat> = p.iter().map(|&q| linalg::diag_real(&[q, 1.0 - q])).collect();
    DensityMatrix { n: p.len(), mat: linalg::kron_all(&ops) }
}

/// Largest spread of the non-ground diagonal entries, relative to the
/// largest magnitude. Zero for an effective pure signature.
pub fn effective_pure_residual(diag: &[f64], ground: usize) -> f64 {
    let rest: Vec<f64> = diag.iter().enumerate().filter(|(i, _)| *i != ground).map(|(_, v)| *v).collect();
    if rest.is_empty() {
        return 0.0;
    }
    let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let lo = rest.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepExperiment {
    pub circuit: Vec<Gate>,
    pub weight: f64,
}

/// Experiments whose weighted sum of outputs acts as one experiment on an
/// effective pure input.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepPlan {
    pub n: usize,
    pub experiments: Vec<PrepExperiment>,
    /// Summed deviation diagonal for equal polarizations, up to scale.
    pub expected_signature: Vec<f64>,
}

impl PrepPlan {
    pub fn len(&self) -> usize {
        self.experiments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiments.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.experiments.iter().map(|e| e.weight).sum()
    }

    /// Sum of weight * U rho U^dagger over the experiments, with ideal
    /// circuit unitaries. Divided by the total weight when `normalize`.
    pub fn summed_state(&self, rho: &DensityMatrix, normalize: bool) -> Result<DensityMatrix> {
        if rho.n != self.n {
            return Err(Error::Dimension { expected: self.n, got: rho.n });
        }
        let d = rho.dim();
        let mut acc = CMat::zeros(d, d);
        for e in &self.experiments {
            if let Some(f) = circuit_permutation(&e.circuit, self.n)? {
                for a in 0..d {
                    for b in 0..d {
                        acc[(f[a], f[b])] += rho.mat[(a, b)] * e.weight;
                    }
                }
            } else {
                let u = circuit_unitary(&e.circuit, self.n)?;
                acc += (&u * &rho.mat * u.adjoint()) * c(e.weight, 0.0);
            }
        }
        if normalize {
            acc /= c(self.total_weight(), 0.0);
        }
        Ok(DensityMatrix { n: self.n, mat: acc })
    }

    /// Plain-text form: an `EXPERIMENT <weight>` header before each circuit.
    pub fn to_text(&self) -> Result<String> {
        let mut out = format!("SPINS {}\n", self.n);
        for (i, e) in self.experiments.iter().enumerate() {
            let _ = writeln!(out, "EXPERIMENT {}  # {}", e.weight, i + 1);
            out.push_str(&format_circuit(&e.circuit)?);
        }
        Ok(out)
    }

    /// Inverse of `to_text`. The expected signature is recomputed from the
    /// homonuclear thermal state.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut experiments: Vec<PrepExperiment> = Vec::new();
        let mut body = String::new();
        let flush = |body: &mut String, experiments: &mut Vec<PrepExperiment>| -> Result<()> {
            if let Some(last) = experiments.last_mut() {
                last.circuit = parse_circuit(body)?;
            }
            body.clear();
            Ok(())
        };
        for (i, line) in text.lines().enumerate() {
            let t = line.split('#').next().unwrap_or("").trim();
            let mut parts = t.split_whitespace();
            match parts.next().map(|s| s.to_ascii_uppercase()) {
                Some(k) if k == "SPINS" => {
                    let v = parts.next().and_then(|s| s.parse().ok());
                    n = Some(v.ok_or(Error::Parse { line: i + 1, msg: "bad SPINS line".into() })?);
                }
                Some(k) if k == "EXPERIMENT" => {
                    flush(&mut body, &mut experiments)?;
                    let w: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or(Error::Parse { line: i + 1, msg: "bad experiment weight".into() })?;
                    experiments.push(PrepExperiment { circuit: Vec::new(), weight: w });
                }
                Some(_) => {
                    if experiments.is_empty() {
                        return Err(Error::Parse { line: i + 1, msg: "gate before first EXPERIMENT".into() });
                    }
                    body.push_str(line);
                    body.push('\n');
                }
                None => body.push('\n'),
            }
        }
        flush(&mut body, &mut experiments)?;
        let n = n.ok_or(Error::Parse { line: 1, msg: "missing SPINS line".into() })?;
        let mut plan = PrepPlan { n, experiments, expected_signature: Vec::new() };
        plan.expected_signature = plan.summed_state(&homonuclear_deviation(n), false)?.diagonal_real();
        Ok(plan)
    }
}

fn homonuclear_deviation(n: usize) -> DensityMatrix {
    DensityMatrix { n, mat: linalg::diag_real(&z_sum_diag(&vec![1.0; n])) }
}

fn finish(n: usize, experiments: Vec<PrepExperiment>) -> Result<PrepPlan> {
    let mut plan = PrepPlan { n, experiments, expected_signature: Vec::new() };
    plan.expected_signature = plan.summed_state(&homonuclear_deviation(n), false)?.diagonal_real();
    Ok(plan)
}

// GF(2) helpers; a matrix is a list of row bitmasks.

fn gf2_rank(rows: &[usize]) -> usize {
    let mut basis: Vec<usize> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
        }
    }
    basis.len()
}

fn gf2_inverse(rows: &[usize]) -> Option<Vec<usize>> {
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut inv: Vec<usize> = (0..n).map(|i| 1 << i).collect();
    for col in 0..n {
        let p = (col..n).find(|&r| a[r] >> col & 1 == 1)?;
        a.swap(col, p);
        inv.swap(col, p);
        for r in 0..n {
            if r != col && a[r] >> col & 1 == 1 {
                a[r] ^= a[col];
                inv[r] ^= inv[col];
            }
        }
    }
    Some(inv)
}

fn gf2_mul(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().map(|&row| (0..b.len()).filter(|&k| row >> k & 1 == 1).fold(0, |acc, k| acc ^ b[k])).collect()
}

/// CNOTs in time order realizing x -> A x, where row t of A lists the input
/// bits XORed into output bit t.
pub fn linear_cnot_circuit(a: &[usize]) -> Result<Vec<Gate>> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut ops: Vec<(usize, usize)> = Vec::new();
    for col in 0..n {
        if m[col] >> col & 1 == 0 {
            let p = (col + 1..n)
                .find(|&r| m[r] >> col & 1 == 1)
                .ok_or_else(|| Error::Infeasible("singular linear map".into()))?;
            m[col] ^= m[p];
            ops.push((p, col));
        }
        for r in 0..n {
            if r != col && m[r] >> col & 1 == 1 {
                m[r] ^= m[col];
                ops.push((col, r));
            }
        }
    }
    Ok(ops.iter().rev().map(|&(c, t)| Gate::Cnot { control: c, target: t }).collect())
}

/// Circuit mapping Z_i to sign_i * T_i for the given terms: NOTs first, then
/// the CNOT network with forward map B^{-1}, B having rows T_i.
pub fn term_circuit(terms: &[(usize, i8)]) -> Result<Vec<Gate>> {
    let rows: Vec<usize> = terms.iter().map(|t| t.0).collect();
    let inv = gf2_inverse(&rows).ok_or_else(|| Error::Infeasible("terms are not independent".into()))?;
    let mut g: Vec<Gate> = terms.iter().enumerate().filter(|(_, t)| t.1 < 0).map(|(i, _)| Gate::Not(i)).collect();
    g.extend(linear_cnot_circuit(&inv)?);
    Ok(g)
}

/// Heisenberg image of Z_s (with sign) under a CNOT/NOT circuit.
pub fn transform_term(circuit: &[Gate], mask: usize) -> Result<(usize, i8)> {
    let mut m = mask;
    let mut sign = 1i8;
    for g in circuit {
        match *g {
            Gate::Cnot { control, target } => {
                if m >> target & 1 == 1 {
                    m ^= 1 << control;
                }
            }
            Gate::Not(s) => {
                if m >> s & 1 == 1 {
                    sign = -sign;
                }
            }
            _ => return Err(Error::InvalidArgument(format!("{} is not a CNOT or NOT", g.name()))),
        }
    }
    Ok((m, sign))
}

/// Render a mask like "ZIIZI", spin 0 first.
pub fn term_name(mask: usize, n: usize) -> String {
    (0..n).map(|s| if mask >> s & 1 == 1 { 'Z' } else { 'I' }).collect()
}

/// A linear map whose powers cycle all nonzero basis states.
fn maximal_cycle(n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![1];
    }
    // companion matrix of a primitive polynomial, found by search
    for taps in 1usize..1 << n {
        if taps & 1 == 0 {
            continue;
        }
        // x_0' = parity(taps & x), x_k' = x_{k-1}
        let mut rows = vec![taps];
        rows.extend((1..n).map(|k| 1usize << (k - 1)));
        let apply = |x: usize| -> usize {
            rows.iter().enumerate().fold(0, |acc, (t, &r)| acc | (((r & x).count_ones() as usize & 1) << t))
        };
        let mut x = 1usize;
        let mut len = 0;
        loop {
            x = apply(x);
            len += 1;
            if x == 1 || len > 1 << n {
                break;
            }
        }
        if len == (1 << n) - 1 {
            return rows;
        }
    }
    unreachable!("primitive polynomials exist for every degree")
}

/// 2^n - 1 experiments, the k-th applying the k-th power of one cyclic
/// permutation of the nonzero basis states.
pub fn temporal_cyclic(n: usize) -> Result<PrepPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one spin".into()));
    }
    let cyc = maximal_cycle(n);
    let mut power: Vec<usize> = (0..n).map(|i| 1 << i).collect();
    let mut experiments = Vec::new();
    for _ in 0..(1usize << n) - 1 {
        // gate spin s is mask bit s; the cycle is expressed on those bits
        experiments.push(PrepExperiment { circuit: linear_cnot_circuit(&power)?, weight: 1.0 });
        power = gf2_mul(&cyc, &power);
    }
    finish(n, experiments)
}

fn greedy_cover(n: usize, order: &[usize]) -> Vec<Vec<usize>> {
    let all = (1usize << n) - 1;
    let mut left: Vec<usize> = order.to_vec();
    let mut out = Vec::new();
    while !left.is_empty() {
        let mut basis: Vec<usize> = Vec::new();
        for &m in &left {
            if basis.len() < n && gf2_rank(&[basis.as_slice(), &[m]].concat()) == basis.len() + 1 {
                basis.push(m);
            }
        }
        left.retain(|m| !basis.contains(m));
        for m in 1..=all {
            if basis.len() < n && !basis.contains(&m) && gf2_rank(&[basis.as_slice(), &[m]].concat()) == basis.len() + 1
            {
                basis.push(m);
            }
        }
        out.push(basis);
    }
    out
}

/// Experiments built from CNOT networks so that the summed Z terms are all
/// 2^n - 1 products with equal weight. Odd n uses weights of one; even n
/// cannot (every term would need an odd count among l*n slots) and uses
/// weights of one half with every term counted twice.
pub fn temporal_product_operator(n: usize, homonuclear: bool) -> Result<PrepPlan> {
    if !homonuclear {
        return Err(Error::InvalidArgument(
            "heteronuclear plans need polarization ratios; use product_operator_signature".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("product-operator averaging needs n >= 2".into()));
    }
    let all = (1usize << n) - 1;
    let target = if n % 2 == 1 { 1 } else { 2 };
    let forward: Vec<usize> = (1..=all).collect();
    let mut bases = greedy_cover(n, &forward);
    if target == 2 {
        let backward: Vec<usize> = (1..=all).rev().collect();
        bases.extend(greedy_cover(n, &backward));
    }
    let wrong = |bases: &[Vec<usize>]| -> Vec<usize> {
        let mut cnt = vec![0usize; all + 1];
        for b in bases {
            for &m in b {
                cnt[m] += 1;
            }
        }
        (1..=all).filter(|&m| cnt[m] % 2 != target % 2).collect()
    };
    let mut odd = wrong(&bases);
    if odd.len() % 2 == 1 {
        // one extra basis changes the parity of n (odd) terms
        let mut b: Vec<usize> = Vec::new();
        for m in odd.iter().cloned().chain(1..=all) {
            if b.len() < n && !b.contains(&m) && gf2_rank(&[b.as_slice(), &[m]].concat()) == b.len() + 1 {
                b.push(m);
            }
        }
        bases.push(b);
        odd = wrong(&bases);
    }
    // two bases sharing n - 1 terms fix the parity of one pair
    for pair in odd.chunks(2) {
        let (o1, o2) = (pair[0], pair[1]);
        let mut r: Vec<usize> = Vec::new();
        for m in 1..=all {
            if r.len() == n - 1 || m == o1 || m == o2 {
                continue;
            }
            let k = r.len();
            let with = [r.as_slice(), &[m]].concat();
            if gf2_rank(&with) == k + 1
                && gf2_rank(&[with.as_slice(), &[o1]].concat()) == k + 2
                && gf2_rank(&[with.as_slice(), &[o2]].concat()) == k + 2
            {
                r.push(m);
            }
        }
        if r.len() != n - 1 {
            return Err(Error::Infeasible(format!("no shared basis for terms {o1} and {o2}")));
        }
        bases.push([r.as_slice(), &[o1]].concat());
        bases.push([r.as_slice(), &[o2]].concat());
    }
    // signs: the first `target` occurrences of a term are positive, the rest alternate
    let mut seen = vec![0usize; all + 1];
    let mut experiments = Vec::new();
    for b in &bases {
        let terms: Vec<(usize, i8)> = b
            .iter()
            .map(|&m| {
                let k = seen[m];
                seen[m] += 1;
                let s = if k < target || (k - target) % 2 == 1 { 1 } else { -1 };
                (m, s)
            })
            .collect();
        experiments.push(PrepExperiment { circuit: term_circuit(&terms)?, weight: 1.0 / target as f64 });
    }
    finish(n, experiments)
}

/// Summed deviation diagonal of a plan for the given polarization ratios,
/// and its residual from the effective pure signature.
pub fn product_operator_signature(plan: &PrepPlan, ratios: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rho = DensityMatrix { n: plan.n, mat: linalg::diag_real(&z_sum_diag(ratios)) };
    let d = plan.summed_state(&rho, false)?.diagonal_real();
    let r = effective_pure_residual(&d, 0);
    Ok((d, r))
}

/// Parse "C24 C12 N3" (control first, time order left to right, 1-based).
pub fn parse_cnot_word(word: &str) -> Result<Vec<Gate>> {
    word.split_whitespace()
        .map(|tok| {
            let bad = || Error::InvalidArgument(format!("bad token '{tok}'"));
            let digit = |ch: char| ch.to_digit(10).filter(|&d| d > 0).map(|d| d as usize - 1).ok_or_else(bad);
            let chars: Vec<char> = tok.chars().collect();
            match chars.as_slice() {
                ['C', a, b] => Ok(Gate::Cnot { control: digit(*a)?, target: digit(*b)? }),
                ['N', a] => Ok(Gate::Not(digit(*a)?)),
                _ => Err(bad()),
            }
        })
        .collect()
}

/// Nine preparation sequences used for five homonuclear spins.
pub const FIVE_SPIN_WORDS: [&str; 9] = [
    "C51 C45 C24 N3",
    "C21 C52 C45 C34",
    "C14 C31 C53 N2",
    "C12 C15 C13 C41",
    "C32 C13 C25 N4",
    "C31 C43 C23 N5",
    "C53 C25 C12 N4",
    "C54 C51 N2",
    "C35 C23 N1",
];

/// First-stage sequences on five fluorines of the seven-spin molecule.
pub const SEVEN_SPIN_WORDS: [&str; 9] = [
    "C24 C12 C31 C51",
    "C35 C43 C14 N2",
    "C43 C14 C21 C31 N5",
    "C42 C14 C51 C21 N1 N5",
    "C35 C43 C24 C35",
    "C13 C15 C21 C12",
    "C42 C34 C53 C31",
    "C42 C34 C53 C42 C34 N1",
    "C35 C34 C51 N4 N2 N3",
];

pub fn five_spin_plan() -> Result<PrepPlan> {
    let experiments = FIVE_SPIN_WORDS
        .iter()
        .map(|w| Ok(PrepExperiment { circuit: parse_cnot_word(w)?, weight: 1.0 }))
        .collect::<Result<Vec<_>>>()?;
    finish(5, experiments)
}

/// Which carbon spins get a 180 pulse at the start of each of the 36
/// seven-spin experiments (set-major, 9 rows per set).
#[derive(Debug, Clone, PartialEq)]
pub struct CarbonMask {
    pub flip: Vec<[bool; 2]>,
}

impl Default for CarbonMask {
    /// Leaves a net four copies of each carbon-only term.
    fn default() -> Self {
        let flip = (0..4).flat_map(|set| (0..9).map(move |row| [row < 4, row < if set < 2 { 4 } else { 3 }])).collect();
        CarbonMask { flip }
    }
}

/// Two-stage plan for five fluorines (spins 0-4) and two carbons (5, 6):
/// the nine fluorine sequences repeated in four sets that dress every
/// fluorine term with I, Z6, Z7 or Z6 Z7.
pub fn seven_spin_plan(mask: &CarbonMask) -> Result<PrepPlan> {
    if mask.flip.len() != 36 {
        return Err(Error::InvalidArgument("carbon mask needs 36 entries".into()));
    }
    let (c6, c7) = (5, 6);
    let mut experiments = Vec::new();
    for set in 0..4 {
        let mut dress = Vec::new();
        if set == 1 || set == 3 {
            // keeps the carbon-only term counts even in every class
            dress.push(Gate::Cnot { control: c6, target: c7 });
        }
        for f in 0..5 {
            if set == 1 || set == 3 {
                dress.push(Gate::Cnot { control: c6, target: f });
            }
            if set == 2 || set == 3 {
                dress.push(Gate::Cnot { control: c7, target: f });
            }
        }
        for (row, word) in SEVEN_SPIN_WORDS.iter().enumerate() {
            let [f6, f7] = mask.flip[set * 9 + row];
            let mut circuit = Vec::new();
            if f6 {
                circuit.push(Gate::Not(c6));
            }
            if f7 {
                circuit.push(Gate::Not(c7));
            }
            circuit.extend(dress.iter().cloned());
            circuit.extend(parse_cnot_word(word)?);
            experiments.push(PrepExperiment { circuit, weight: 1.0 });
        }
    }
    let mut plan = PrepPlan { n: 7, experiments, expected_signature: Vec::new() };
    plan.expected_signature = product_operator_signature(&plan, &[1.0, 1.0, 1.0, 1.0, 1.0, 0.25, 0.25])?.0;
    Ok(plan)
}

/// The spin-1 |0> block of a three-spin register.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSubspace {
    pub label_spin: usize,
    pub label_state: usize,
    pub spins: Vec<usize>,
}

/// CNOTs from spins 2 and 3 onto spin 1 (they commute and can be merged).
pub fn logical_label_3() -> (Vec<Gate>, LabeledSubspace) {
    (
        vec![Gate::Cnot { control: 1, target: 0 }, Gate::Cnot { control: 2, target: 0 }],
        LabeledSubspace { label_spin: 0, label_state: 0, spins: vec![1, 2] },
    )
}

/// Qubits extractable by labeling n homonuclear spins: log2(1 + C(n, n/2)).
pub fn loglab_qubits(n: usize) -> f64 {
    let k = n / 2;
    let binom = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    (1.0 + binom).log2()
}

/// Frame offsets (Hz) for the computation spins that remove the label's
/// couplings inside the label-|0> subspace: -J_label,j / 2.
pub fn uncoupling_frame(system: &SpinSystem, label: usize, computation: &[usize]) -> Result<Vec<f64>> {
    system.validate()?;
    for &s in computation.iter().chain([&label]) {
        if s >= system.n {
            return Err(Error::SpinRange { index: s, n: system.n });
        }
    }
    if computation.iter().all(|&j| system.effective_j(label, j) == 0.0) {
        return Err(Error::InvalidArgument(format!("label spin {} is coupled to none", label + 1)));
    }
    Ok(computation.iter().map(|&j| -system.effective_j(label, j) / 2.0).collect())
}

/// Diagonal of the coupling Hamiltonian seen in frames shifted by `frame`
/// Hz on the computation spins (rad/s).
pub fn frame_hamiltonian(system: &SpinSystem, computation: &[usize], frame: &[f64]) -> Vec<f64> {
    let mut residual = vec![0.0; system.n];
    for (&s, &df) in computation.iter().zip(frame) {
        // a frame at nu + df leaves a residual offset of -df
        residual[s] = -2.0 * std::f64::consts::PI * df;
    }
    system.diagonal_with(&residual, true)
}

/// Zero all coherences, or all but zero-quantum ones when `preserve_zero_quantum`.
pub fn gradient_crush(rho: &DensityMatrix, preserve_zero_quantum: bool) -> DensityMatrix {
    let d = rho.dim();
    let mut m = rho.mat.clone();
    for a in 0..d {
        for b in 0..d {
            if a != b && !(preserve_zero_quantum && a.count_ones() == b.count_ones()) {
                m[(a, b)] = c(0.0, 0.0);
            }
        }
    }
    DensityMatrix { n: rho.n, mat: m }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boost {
    pub circuit: Vec<Gate>,
    /// Deviation diagonal from the homonuclear thermal state (sum of Z).
    pub predicted: Vec<f64>,
}

/// One round of Schulman-Vazirani boosting on three equally polarized
/// spins: CNOT 2->3, NOT 3, then swap 1 and 2 when 3 is |1>.
pub fn schulman_vazirani_boost() -> Boost {
    let circuit = vec![Gate::Cnot { control: 1, target: 2 }, Gate::Not(2), Gate::Fredkin { control: 2, t1: 0, t2: 1 }];
    Boost { circuit, predicted: vec![1.0, 3.0, 1.0, 1.0, -1.0, -1.0, -1.0, -3.0] }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrMethod {
    LogicalLabeling,
    Cyclic,
    ProductOperator,
}

impl FromStr for SnrMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loglab" => Ok(SnrMethod::LogicalLabeling),
            "cyclic" => Ok(SnrMethod::Cyclic),
            "prodop" => Ok(SnrMethod::ProductOperator),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

/// Relative S/N and experiment count.
pub fn snr_scaling(method: SnrMethod, n: usize) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one spin".into()));
    }
    let base = n as f64 / (1u64 << n) as f64;
    let all = (1usize << n) - 1;
    let l = match method {
        SnrMethod::LogicalLabeling => 1,
        SnrMethod::Cyclic => all,
        SnrMethod::ProductOperator => all.div_ceil(n),
    };
    Ok((base * (l as f64).sqrt(), l))
}
