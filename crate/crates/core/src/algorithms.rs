//! Circuit generators and analytic expectations: Deutsch-Jozsa, Grover,
//! the QFT, order finding, factoring fifteen and the two-qubit phase error
//! detection code.
//!
//! Registers follow the crate convention (spin 0 is the most significant bit
//! of a basis index).

use std::f64::consts::PI;
use std::str::FromStr;

use crate::compiler::gate::{circuit_unitary, circuit_unitary_in, phase_flip, Gate};
use crate::decoherence::{apply_kraus, pd_kraus};
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, CVec, C64};
use crate::spin::{DensityMatrix, SpinSystem};

/// State vector of `gates` applied to basis state `init`.
pub fn run_pure(gates: &[Gate], n: usize, init: usize) -> Result<CVec> {
    let u = circuit_unitary(gates, n)?;
    Ok(u.column(init).into_owned())
}

/// Probabilities of each value of a register. With `lsb_first` the first
/// listed spin carries weight 1, otherwise it is the most significant bit.
pub fn register_distribution(psi: &CVec, n: usize, spins: &[usize], lsb_first: bool) -> Vec<f64> {
    let k = spins.len();
    let mut p = vec![0.0; 1 << k];
    for (x, a) in psi.iter().enumerate() {
        p[register_value(x, n, spins, lsb_first)] += a.norm_sqr();
    }
    p
}

fn register_value(x: usize, n: usize, spins: &[usize], lsb_first: bool) -> usize {
    let k = spins.len();
    spins.iter().enumerate().fold(0, |acc, (i, &s)| {
        let w = if lsb_first { i } else { k - 1 - i };
        acc | (linalg::spin_bit(x, s, n) << w)
    })
}

/// Same as `register_distribution` for a density matrix.
pub fn register_distribution_rho(rho: &DensityMatrix, spins: &[usize], lsb_first: bool) -> Vec<f64> {
    let mut p = vec![0.0; 1 << spins.len()];
    for x in 0..rho.dim() {
        p[register_value(x, rho.n, spins, lsb_first)] += rho.mat[(x, x)].re;
    }
    p
}

// ---------------------------------------------------------------- Deutsch-Jozsa

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DjFunction {
    /// f(x) = 0
    F1,
    /// f(x) = 1
    F2,
    /// f(x) = x
    F3,
    /// f(x) = not x
    F4,
}

impl DjFunction {
    pub const ALL: [DjFunction; 4] = [DjFunction::F1, DjFunction::F2, DjFunction::F3, DjFunction::F4];

    pub fn eval(self, x: usize) -> usize {
        match self {
            DjFunction::F1 => 0,
            DjFunction::F2 => 1,
            DjFunction::F3 => x & 1,
            DjFunction::F4 => 1 - (x & 1),
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, DjFunction::F1 | DjFunction::F2)
    }
}

impl FromStr for DjFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(DjFunction::F1),
            "f2" => Ok(DjFunction::F2),
            "f3" => Ok(DjFunction::F3),
            "f4" => Ok(DjFunction::F4),
            _ => Err(Error::InvalidArgument(format!("unknown function '{s}'"))),
        }
    }
}

/// |x>|y> -> |x>|y xor f(x)> with spin 0 the input and spin 1 the work qubit.
pub fn dj_oracle(f: DjFunction) -> Gate {
    let table: Vec<usize> = (0..4).map(|v| v ^ f.eval(v >> 1)).collect();
    Gate::Permutation { controls: vec![], spins: vec![0, 1], table }
}

/// The oracle as pulses and free evolution for a coupling `j_hz` > 0; equal
/// to `dj_oracle` up to a global phase.
pub fn dj_oracle_pulses(f: DjFunction, j_hz: f64) -> Result<Vec<Gate>> {
    if j_hz <= 0.0 {
        return Err(Error::InvalidArgument("oracle sequences assume J > 0".into()));
    }
    let tau = 1.0 / (2.0 * j_hz);
    let x = |s, a| Gate::Rx { spin: s, angle: a };
    let y = |s, a| Gate::Ry { spin: s, angle: a };
    Ok(match f {
        DjFunction::F1 => vec![Gate::Delay(tau / 2.0), x(1, 180.0), Gate::Delay(tau / 2.0), x(1, 180.0)],
        DjFunction::F2 => vec![Gate::Delay(tau / 2.0), x(1, 180.0), Gate::Delay(tau / 2.0)],
        DjFunction::F3 | DjFunction::F4 => {
            let last = if f == DjFunction::F3 { 90.0 } else { -90.0 };
            vec![y(1, 90.0), Gate::Delay(tau), y(1, -90.0), x(1, last), y(0, -90.0), x(0, -90.0), y(0, 90.0)]
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DjCircuit {
    pub gates: Vec<Gate>,
    pub constant: bool,
    /// Spin-1 observable for a |00> input: +1 constant, -1 balanced.
    pub expected_o1: f64,
    /// Basis state reached from |00>.
    pub expected_state: usize,
}

/// Y on the input, Y-bar on the work qubit, oracle, and the inverse rotations.
pub fn deutsch_jozsa_circuit(f: DjFunction) -> DjCircuit {
    let gates = vec![
        Gate::Ry { spin: 0, angle: 90.0 },
        Gate::Ry { spin: 1, angle: -90.0 },
        Gate::Composite { tag: "oracle".into(), gates: vec![dj_oracle(f)] },
        Gate::Ry { spin: 0, angle: -90.0 },
        Gate::Ry { spin: 1, angle: 90.0 },
    ];
    let constant = f.is_constant();
    DjCircuit {
        gates,
        constant,
        expected_o1: if constant { 1.0 } else { -1.0 },
        expected_state: if constant { 0 } else { 2 },
    }
}

/// The same circuit with the oracle given as pulses and delays.
pub fn deutsch_jozsa_pulsed(f: DjFunction, system: &SpinSystem) -> Result<CMat> {
    let mut gates = deutsch_jozsa_circuit(f).gates;
    gates[2] = Gate::Composite { tag: "oracle".into(), gates: dj_oracle_pulses(f, system.effective_j(0, 1))? };
    circuit_unitary_in(&gates, system)
}

// ---------------------------------------------------------------- Grover

/// Hadamards, then k iterations of the oracle phase flip on x0 followed by
/// inversion about the average.
pub fn grover_circuit(n: usize, x0: usize, k: usize) -> Result<Vec<Gate>> {
    grover_on(&(0..n).collect::<Vec<_>>(), x0, k)
}

/// `grover_circuit` on the listed spins (first listed is the most
/// significant bit of x0).
pub fn grover_on(spins: &[usize], x0: usize, k: usize) -> Result<Vec<Gate>> {
    let n = spins.len();
    if n == 0 || x0 >= 1 << n {
        return Err(Error::InvalidArgument(format!("marked item {x0} out of range for {n} qubits")));
    }
    let h = || spins.iter().map(|&s| Gate::Hadamard(s)).collect::<Vec<_>>();
    let mut g = h();
    for _ in 0..k {
        g.push(Gate::Composite { tag: "oracle".into(), gates: vec![phase_flip(spins, &[x0])] });
        let mut diffusion = h();
        diffusion.push(phase_flip(spins, &[0]));
        diffusion.extend(h());
        g.push(Gate::Composite { tag: "diffusion".into(), gates: diffusion });
    }
    Ok(g)
}

/// sin^2((2k+1) theta) with sin(theta) = 1/sqrt(N).
pub fn grover_amplitude(n: usize, k: usize) -> f64 {
    let theta = (1.0 / ((1u64 << n) as f64).sqrt()).asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Success probability by direct amplitude iteration: flip the marked
/// amplitude, then reflect every amplitude about the mean.
pub fn grover_statevector(n: usize, x0: usize, k: usize) -> f64 {
    let d = 1usize << n;
    let mut a = vec![1.0 / (d as f64).sqrt(); d];
    for _ in 0..k {
        a[x0] = -a[x0];
        let mean = a.iter().sum::<f64>() / d as f64;
        a.iter_mut().for_each(|v| *v = 2.0 * mean - *v);
    }
    a[x0] * a[x0]
}

/// ceil(pi sqrt(N) / 4). Only an estimate of the first maximum; see
/// `grover_first_max`.
pub fn grover_iterations_estimate(n: usize) -> usize {
    (PI * ((1u64 << n) as f64).sqrt() / 4.0).ceil() as usize
}

/// Smallest k > 0 at which the exact success probability peaks.
pub fn grover_first_max(n: usize) -> usize {
    let mut k = 1;
    while grover_amplitude(n, k + 1) > grover_amplitude(n, k) {
        k += 1;
    }
    k
}

// ---------------------------------------------------------------- QFT

/// QFT on the listed spins (first listed is the most significant input
/// bit): Hadamards and controlled phase rotations. With `reversed_output`
/// the output bits come out in reverse order; otherwise swaps restore it.
pub fn qft_on(spins: &[usize], reversed_output: bool) -> Vec<Gate> {
    let k = spins.len();
    let mut g = Vec::new();
    for j in 0..k {
        g.push(Gate::Hadamard(spins[j]));
        for m in j + 1..k {
            let angle = -180.0 / (1u64 << (m - j)) as f64;
            g.push(Gate::CPhase { control: spins[m], target: spins[j], angle });
        }
    }
    if !reversed_output {
        for j in 0..k / 2 {
            g.push(Gate::Swap(spins[j], spins[k - 1 - j]));
        }
    }
    g
}

pub fn qft_circuit(n: usize, reversed_output: bool) -> Vec<Gate> {
    qft_on(&(0..n).collect::<Vec<_>>(), reversed_output)
}

/// F[k, j] = exp(-2 pi i j k / N) / sqrt(N).
pub fn dft_matrix(n: usize) -> CMat {
    let d = 1usize << n;
    let s = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, d, |k, j| cis(-2.0 * PI * ((j * k) % d) as f64 / d as f64) * s)
}

/// Index with its n bits reversed.
pub fn bit_reverse(x: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, b| acc | (((x >> b) & 1) << (n - 1 - b)))
}

// ---------------------------------------------------------------- order finding

/// Permutation of {0..M-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &v in &map {
            if v >= map.len() || seen[v] {
                return Err(Error::InvalidArgument(format!("{map:?} is not a bijection")));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    /// y -> y + 1 mod r on the first r elements, identity elsewhere.
    pub fn cycle(m: usize, r: usize) -> Result<Self> {
        if r == 0 || r > m {
            return Err(Error::InvalidArgument(format!("cycle length {r} outside 1..={m}")));
        }
        Permutation::new((0..m).map(|y| if y < r { (y + 1) % r } else { y }).collect())
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, y: usize) -> usize {
        self.map[y]
    }

    pub fn table(&self) -> &[usize] {
        &self.map
    }

    pub fn power(&self, k: usize) -> Permutation {
        let map = (0..self.size()).map(|y| (0..k).fold(y, |v, _| self.map[v])).collect();
        Permutation { map }
    }

    /// Least k > 0 with pi^k(y) = y.
    pub fn order(&self, y: usize) -> usize {
        let mut v = self.map[y];
        let mut k = 1;
        while v != y {
            v = self.map[v];
            k += 1;
        }
        k
    }
}

/// Register layout: spins 0-2 hold x (spin 2 least significant), spins 3-4
/// hold y (spin 3 most significant).
pub const ORDER_X: [usize; 3] = [0, 1, 2];
pub const ORDER_Y: [usize; 2] = [3, 4];

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFinding {
    pub gates: Vec<Gate>,
    pub r: usize,
    /// Predicted O_1..O_5 (O_4, O_5 only meaningful for the generic oracle).
    pub expected: [f64; 5],
}

/// |x>|y> -> |x>|pi^x(y)> as three controlled powers of pi.
pub fn order_oracle(pi: &Permutation) -> Result<Vec<Gate>> {
    if pi.size() != 4 {
        return Err(Error::InvalidArgument("order finding is set up for M = 4".into()));
    }
    Ok((0..3)
        .map(|b| Gate::Permutation {
            controls: vec![ORDER_X[2 - b]],
            spins: ORDER_Y.to_vec(),
            table: pi.power(1 << b).table().to_vec(),
        })
        .collect())
}

/// Hand-built oracle sequences for one permutation of each order. The r = 3
/// one is meant for y = 2 only; as written its CNOT skeleton flips only y0,
/// so it never reaches a third value of y and does not give the r = 3
/// observables. Use `order_oracle` for a working r = 3 oracle.
pub fn order_oracle_sequence(r: usize) -> Result<Vec<Gate>> {
    let text = match r {
        1 => "cz54 cnot35 cz54' cnot35 cz34",
        2 => "cnot35",
        3 => "cnot32 cnot25 cnot32 cnot21 cz14 cnot51 cz14' cnot51 cz54 cnot21 cz15 cnot41 cz15' cnot41 cz45",
        4 => "cnot24 cz34 cz54 cnot35 cz54",
        _ => return Err(Error::InvalidArgument(format!("no oracle sequence for r = {r}"))),
    };
    parse_oracle_tokens(text)
}

/// Tokens "cnotIJ" and "czIJ" (control I, target J, 1-based); a trailing
/// quote inverts a cz.
pub fn parse_oracle_tokens(text: &str) -> Result<Vec<Gate>> {
    text.split_whitespace()
        .map(|tok| {
            let bad = || Error::InvalidArgument(format!("bad oracle token '{tok}'"));
            let (body, dagger) = match tok.strip_suffix('\'') {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let (kind, digits) = if let Some(d) = body.strip_prefix("cnot") {
                ("cnot", d)
            } else if let Some(d) = body.strip_prefix("cz") {
                ("cz", d)
            } else {
                return Err(bad());
            };
            let ds: Vec<usize> =
                digits.chars().map(|ch| ch.to_digit(10).map(|v| v as usize)).collect::<Option<_>>().ok_or_else(bad)?;
            if ds.len() != 2 || ds.contains(&0) {
                return Err(bad());
            }
            let (control, target) = (ds[0] - 1, ds[1] - 1);
            Ok(match (kind, dagger) {
                ("cnot", false) => Gate::Cnot { control, target },
                ("cz", d) => Gate::ControlledZ { control, target, angle: if d { -90.0 } else { 90.0 } },
                _ => return Err(bad()),
            })
        })
        .collect()
}

/// Ideal measurement distribution of the first register (N = 8) for order r,
/// from the sum over cosets of x mod r.
pub fn order_distribution(r: usize) -> Vec<f64> {
    let nn = 8usize;
    (0..nn)
        .map(|k| {
            (0..r)
                .map(|off| {
                    let s: C64 =
                        (0..nn).filter(|j| j % r == off).map(|j| cis(2.0 * PI * (j * k) as f64 / nn as f64)).sum();
                    s.norm_sqr()
                })
                .sum::<f64>()
                / (nn * nn) as f64
        })
        .collect()
}

/// O_i for the bits of a register distribution; bit `b` of the value is
/// read on output spin b when the output is bit-reversed.
pub fn bit_observables(dist: &[f64], bits: usize) -> Vec<f64> {
    (0..bits).map(|b| dist.iter().enumerate().map(|(k, p)| if (k >> b) & 1 == 0 { *p } else { -*p }).sum()).collect()
}

/// Full order-finding circuit. The QFT output is bit-reversed, so spin 2
/// carries the most significant bit of the measured value.
pub fn order_finding_circuit(pi: &Permutation, y: usize) -> Result<OrderFinding> {
    if y >= pi.size() {
        return Err(Error::InvalidArgument(format!("y = {y} out of range")));
    }
    let r = pi.order(y);
    let mut gates: Vec<Gate> = Vec::new();
    for (b, &s) in ORDER_Y.iter().enumerate() {
        if (y >> (1 - b)) & 1 == 1 {
            gates.push(Gate::Not(s));
        }
    }
    gates.extend(ORDER_X.iter().map(|&s| Gate::Hadamard(s)));
    gates.push(Gate::Composite { tag: "oracle".into(), gates: order_oracle(pi)? });
    gates.extend(qft_on(&ORDER_X, true));
    let o = bit_observables(&order_distribution(r), 3);
    let mut expected = [o[0], o[1], o[2], 0.0, 0.0];
    // second register: average of (-1)^bit over the orbit of y
    let orbit: Vec<usize> = (0..8).map(|x| pi.power(x).apply(y)).collect();
    for (b, e) in expected[3..].iter_mut().enumerate() {
        *e = orbit.iter().map(|v| if (v >> (1 - b)) & 1 == 0 { 1.0 } else { -1.0 }).sum::<f64>() / 8.0;
    }
    Ok(OrderFinding { gates, r, expected })
}

/// The circuit using one of the hand-built oracle sequences, for y = 0
/// (y = 2 when r = 3).
pub fn order_finding_sequence_circuit(r: usize) -> Result<OrderFinding> {
    let y = if r == 3 { 2 } else { 0 };
    let mut gates: Vec<Gate> = Vec::new();
    if y == 2 {
        gates.push(Gate::Not(ORDER_Y[0]));
    }
    gates.extend(ORDER_X.iter().map(|&s| Gate::Hadamard(s)));
    gates.push(Gate::Composite { tag: "oracle".into(), gates: order_oracle_sequence(r)? });
    gates.extend(qft_on(&ORDER_X, true));
    let o = bit_observables(&order_distribution(r), 3);
    Ok(OrderFinding { gates, r, expected: [o[0], o[1], o[2], f64::NAN, f64::NAN] })
}

/// Probabilities of guessing r' in 1..=4 after reading m (rows m = 0..7).
/// Maximizes the worst-case success over r; every entry is k/109.
pub fn order_guess_table() -> [[f64; 4]; 8] {
    let q = |v: f64| v / 109.0;
    let r3 = [0.0, 0.0, 1.0, 0.0];
    let r4 = [0.0, 0.0, 0.0, 1.0];
    [[q(60.0), q(33.0), q(16.0), 0.0], r3, r4, r3, [0.0, q(87.0), 0.0, q(22.0)], r3, r4, r3]
}

/// Success probability of a guessing table for each r in 1..=4.
pub fn order_guess_success(table: &[[f64; 4]; 8]) -> [f64; 4] {
    let mut s = [0.0; 4];
    for (ri, v) in s.iter_mut().enumerate() {
        let d = order_distribution(ri + 1);
        *v = (0..8).map(|m| d[m] * table[m][ri]).sum();
    }
    s
}

// ---------------------------------------------------------------- factoring 15

/// Spins of x (x2, x1, x0) and y (y3, y2, y1, y0) on the seven-spin molecule.
pub const SHOR_X: [usize; 3] = [0, 1, 2];
pub const SHOR_Y: [usize; 4] = [6, 4, 5, 3];

const X0: usize = SHOR_X[2];
const X1: usize = SHOR_X[1];
const fn y(bit: usize) -> usize {
    SHOR_Y[3 - bit]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShorVariant {
    /// a^2 = 1 mod 15: only the multiplication by a.
    Easy,
    /// a^2 = 4 mod 15: a second, x1-controlled multiplication by 4.
    Difficult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Simplification {
    Keep,
    /// Control known to be |0>.
    Drop,
    /// Control known to be |1>.
    ReplaceWithNot,
    /// Commutes to the end of the exponentiation, where it no longer matters.
    MoveToEnd,
    /// Moved after a later gate it commutes with.
    MoveAfter(char),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShorCircuit {
    pub a: u64,
    pub variant: ShorVariant,
    /// Unsimplified circuit, including y = 1 preparation and the QFT.
    pub reference: Vec<Gate>,
    /// Circuit after the annotated simplifications (only a = 7 is
    /// simplified; otherwise a copy of the reference).
    pub simplified: Vec<Gate>,
    /// Lettered exponentiation gates and what was done to them.
    pub annotations: Vec<(char, Simplification)>,
    pub period: usize,
    /// Register-1 values with nonzero probability: multiples of 8 / r.
    pub support: Vec<usize>,
    pub factors: Vec<u64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// a^x mod 15 for x = 0..7.
pub fn modexp_table(a: u64) -> [u64; 8] {
    let mut t = [1u64; 8];
    for x in 1..8 {
        t[x] = t[x - 1] * a % 15;
    }
    t
}

pub fn classical_period(a: u64) -> usize {
    let t = modexp_table(a);
    (1..8).find(|&x| t[x] == 1).unwrap_or(8)
}

/// Nontrivial factors among gcd(a^(r/2) +- 1, 15).
pub fn factors_from_period(a: u64, r: usize) -> Vec<u64> {
    if r % 2 == 1 {
        return Vec::new();
    }
    let h = (0..r / 2).fold(1u64, |acc, _| acc * a % 15);
    let mut f: Vec<u64> =
        [(h + 14) % 15, (h + 1) % 15].iter().map(|&v| gcd(v, 15)).filter(|&g| g != 1 && g != 15).collect();
    f.sort_unstable();
    f.dedup();
    f
}

/// Period from bitwise observables of the first register (O for spins 1-3).
/// A bit counts as random when its observable is under half the largest.
pub fn deduce_period(o: &[f64]) -> Option<usize> {
    let max = o.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    // spin 2 holds weight 4, spin 0 weight 1
    let smallest = (0..3).filter(|&b| o[b] < 0.5 * max).map(|b| 1usize << b).min();
    Some(match smallest {
        None => 1,
        Some(v) => 8 / v,
    })
}

pub fn shor15_circuit(a: u64) -> Result<ShorCircuit> {
    if !(2..15).contains(&a) || gcd(a, 15) != 1 {
        return Err(Error::InvalidArgument(format!("a = {a} is not coprime with 15")));
    }
    let variant = if a * a % 15 == 1 { ShorVariant::Easy } else { ShorVariant::Difficult };
    let mut head = vec![Gate::Not(y(0))];
    head.extend(SHOR_X.iter().map(|&s| Gate::Hadamard(s)));
    // y = 1 -> a is a XOR with 1 ^ a
    let mask = 1 ^ a as usize;
    let adds: Vec<Gate> =
        (0..4).rev().filter(|b| (mask >> b) & 1 == 1).map(|b| Gate::Cnot { control: X0, target: y(b) }).collect();
    let tail = qft_on(&SHOR_X, true);
    let (reference, simplified, annotations) = match variant {
        ShorVariant::Easy => {
            let mut r = head.clone();
            r.extend(adds.iter().cloned());
            r.extend(tail.iter().cloned());
            (r.clone(), r, Vec::new())
        }
        ShorVariant::Difficult => {
            let (ga, gb) = (adds[0].clone(), adds[1].clone());
            // x1-controlled multiplication by 4: swap y3 with y1 and y2 with y0
            let gc = Gate::Cnot { control: y(3), target: y(1) };
            let gd = Gate::Toffoli { c1: X1, c2: y(1), target: y(3) };
            let ge = gc.clone();
            let gf = Gate::Cnot { control: y(0), target: y(2) };
            let gg = Gate::Toffoli { c1: X1, c2: y(2), target: y(0) };
            let gh = gf.clone();
            let mut r = head.clone();
            r.extend([ga.clone(), gb.clone(), gc, gd.clone(), ge, gf, gg.clone(), gh]);
            r.extend(tail.iter().cloned());
            if a != 7 {
                // the simplifications below rely on y = 0111 after the first multiplication
                return Ok(ShorCircuit {
                    a,
                    variant,
                    simplified: r.clone(),
                    reference: r,
                    annotations: Vec::new(),
                    period: classical_period(a),
                    support: (0..8).filter(|k| k % 2 == 0).collect(),
                    factors: factors_from_period(a, classical_period(a)),
                });
            }
            let mut s = head.clone();
            s.extend([gb, gd, ga, Gate::Not(y(2)), gg]);
            s.extend(tail.iter().cloned());
            let ann = vec![
                ('A', Simplification::MoveAfter('D')),
                ('B', Simplification::Keep),
                ('C', Simplification::Drop),
                ('D', Simplification::Keep),
                ('E', Simplification::MoveToEnd),
                ('F', Simplification::ReplaceWithNot),
                ('G', Simplification::Keep),
                ('H', Simplification::MoveToEnd),
            ];
            (r, s, ann)
        }
    };
    let period = classical_period(a);
    let support = (0..8).filter(|k| k % (8 / period) == 0).collect();
    Ok(ShorCircuit {
        a,
        variant,
        reference,
        simplified,
        annotations,
        period,
        support,
        factors: factors_from_period(a, period),
    })
}

// ---------------------------------------------------------------- two-bit code

/// Spin 0 holds the data, spin 1 the ancilla.
pub fn two_bit_encode() -> Vec<Gate> {
    vec![Gate::Hadamard(1), Gate::Cnot { control: 1, target: 0 }]
}

pub fn two_bit_decode() -> Vec<Gate> {
    vec![Gate::Cnot { control: 1, target: 0 }, Gate::Hadamard(1)]
}

/// Phase-flip probability after storage time t under dephasing time t2.
pub fn phase_error_probability(t: f64, t2: f64) -> f64 {
    (1.0 - (-t / t2).exp()) / 2.0
}

/// Effective dephasing time reproducing the published storage-time list.
pub const TWO_BIT_T2: f64 = 0.4;
pub const TWO_BIT_STEP: f64 = 0.0615;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBitOutcome {
    /// Accepted data-qubit state, not renormalized.
    pub accepted: DensityMatrix,
    pub accept_probability: f64,
    /// Probability of a double error, which passes undetected.
    pub undetected_probability: f64,
    /// 1 - <psi| rho_acc |psi> / Tr(rho_acc).
    pub conditional_infidelity: f64,
}

fn phase_flip_channel(rho: &DensityMatrix, spin: usize, p: f64) -> DensityMatrix {
    // (1 - p) rho + p Z rho Z
    let lambda = -(1.0 - 2.0 * p).max(1e-300).ln();
    apply_kraus(rho, &pd_kraus(lambda), spin)
}

/// Store R_y(theta)|0> for a phase-flip probability p per qubit, with or
/// without the code; the ancilla is projected on |0>.
pub fn two_bit_code(theta_deg: f64, p: f64, coded: bool) -> Result<TwoBitOutcome> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1/2]")));
    }
    let prep = vec![Gate::Ry { spin: 0, angle: theta_deg }];
    let psi = run_pure(&prep, 2, 0)?;
    let mut rho = DensityMatrix::pure(2, &psi)?;
    if coded {
        rho = rho.apply(&circuit_unitary(&two_bit_encode(), 2)?)?;
        rho = phase_flip_channel(&rho, 0, p);
        rho = phase_flip_channel(&rho, 1, p);
        rho = rho.apply(&circuit_unitary(&two_bit_decode(), 2)?)?;
    } else {
        rho = phase_flip_channel(&rho, 0, p);
    }
    // ancilla |0> block: rows and columns with spin 1 clear
    let acc = CMat::from_fn(2, 2, |i, j| rho.mat[(i << 1, j << 1)]);
    let accept = acc.trace().re;
    let a = (theta_deg.to_radians() / 2.0).cos();
    let b = (theta_deg.to_radians() / 2.0).sin();
    let fid = (a * a * acc[(0, 0)] + a * b * (acc[(0, 1)] + acc[(1, 0)]) + b * b * acc[(1, 1)]).re / accept;
    Ok(TwoBitOutcome {
        accepted: DensityMatrix { n: 1, mat: acc },
        accept_probability: accept,
        undetected_probability: if coded { p * p } else { 0.0 },
        conditional_infidelity: 1.0 - fid,
    })
}

/// Accepted Bloch vector (x, z), not renormalized.
pub fn accepted_bloch(theta_deg: f64, p: f64, coded: bool) -> Result<(f64, f64)> {
    let o = two_bit_code(theta_deg, p, coded)?;
    let m = &o.accepted.mat;
    Ok((2.0 * m[(0, 1)].re, (m[(0, 0)] - m[(1, 1)]).re))
}

/// sqrt(I(0) / I(90)), I being the squared length of the accepted Bloch vector.
pub fn bloch_ellipticity(p: f64, coded: bool) -> Result<f64> {
    let (x0, z0) = accepted_bloch(0.0, p, coded)?;
    let (x9, z9) = accepted_bloch(90.0, p, coded)?;
    Ok(((x0 * x0 + z0 * z0) / (x9 * x9 + z9 * z9)).sqrt())
}

/// Probability that the code flags an error: exactly one qubit flipped.
pub fn two_bit_reject_probability(p: f64) -> f64 {
    2.0 * p * (1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_orders() {
        assert!(Permutation::new(vec![0, 0, 1, 2]).is_err());
        let p = Permutation::new(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(p.order(0), 3);
        assert_eq!(p.order(3), 1);
        assert_eq!(p.power(3), Permutation::new(vec![0, 1, 2, 3]).unwrap());
    }

    #[test]
    fn modexp_and_factors() {
        assert_eq!(modexp_table(7)[3], 13);
        assert_eq!(classical_period(11), 2);
        assert_eq!(classical_period(7), 4);
        assert_eq!(factors_from_period(11, 2), vec![3, 5]);
        assert!(factors_from_period(14, 2).is_empty());
        assert!(shor15_circuit(5).is_err());
    }

    #[test]
    fn deduce_from_observables() {
        assert_eq!(deduce_period(&[1.0, 1.0, 0.0]), Some(2));
        assert_eq!(deduce_period(&[1.0, 0.0, 0.0]), Some(4));
        assert_eq!(deduce_period(&[0.3, 0.31, 0.02]), Some(2));
    }

    #[test]
    fn grover_estimate_differs_from_exact_peak() {
        assert_eq!(grover_first_max(3), 2);
        assert_eq!(grover_iterations_estimate(3), 3);
        assert_eq!(grover_first_max(2), 1);
    }

    fn chloroform() -> SpinSystem {
        SpinSystem::new(2).with_j(0, 1, 215.0)
    }

    #[test]
    fn dj_pulsed_oracles_match_truth_tables() {
        let sys = chloroform();
        for f in DjFunction::ALL {
            let pulsed = circuit_unitary_in(&dj_oracle_pulses(f, 215.0).unwrap(), &sys).unwrap();
            let ideal = circuit_unitary(&[dj_oracle(f)], 2).unwrap();
            assert!(linalg::distance_global_phase(&pulsed, &ideal) < 1e-9, "{f:?}");
            let full = deutsch_jozsa_pulsed(f, &sys).unwrap();
            let dj = deutsch_jozsa_circuit(f);
            let amp = full[(dj.expected_state, 0)].norm();
            assert!((amp - 1.0).abs() < 1e-9, "{f:?}");
        }
        assert!(dj_oracle_pulses(DjFunction::F1, -10.0).is_err());
    }

    #[test]
    fn grover_routes_agree() {
        for n in 2..=4 {
            for k in 0..4 {
                let x0 = (1 << n) - 2;
                let psi = run_pure(&grover_circuit(n, x0, k).unwrap(), n, 0).unwrap();
                let sim = psi[x0].norm_sqr();
                assert!((sim - grover_amplitude(n, k)).abs() < 1e-10);
                assert!((grover_statevector(n, x0, k) - grover_amplitude(n, k)).abs() < 1e-10);
            }
        }
        assert!((grover_amplitude(3, 2) - 0.9453125).abs() < 1e-9);
    }

    #[test]
    fn qft_is_dft() {
        for n in 1..=4 {
            let u = circuit_unitary(&qft_circuit(n, false), n).unwrap();
            assert!(linalg::spectral_norm(&(u - dft_matrix(n))) < 1e-10, "n = {n}");
            let ur = circuit_unitary(&qft_circuit(n, true), n).unwrap();
            let d = dft_matrix(n);
            for i in 0..1 << n {
                for j in 0..1 << n {
                    assert!((ur[(bit_reverse(i, n), j)] - d[(i, j)]).norm() < 1e-10);
                }
            }
        }
        // (|1> + |5>)/sqrt2 -> (|0> - i|2> - |4> + i|6>)/2
        let u = circuit_unitary(&qft_circuit(3, false), 3).unwrap();
        let mut v = CVec::zeros(8);
        v[1] = C64::new(0.5f64.sqrt(), 0.0);
        v[5] = v[1];
        let out = u * v;
        let want = [(0, 0.5, 0.0), (2, 0.0, -0.5), (4, -0.5, 0.0), (6, 0.0, 0.5)];
        for (k, re, im) in want {
            assert!((out[k] - C64::new(re, im)).norm() < 1e-12);
        }
    }

    #[test]
    fn order_distribution_values() {
        let d3 = order_distribution(3);
        assert!((d3[0] - 11.0 / 32.0).abs() < 1e-12);
        assert!((d3.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let d2 = order_distribution(2);
        for (k, v) in d2.iter().enumerate() {
            assert!((v - if k % 4 == 0 { 0.5 } else { 0.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn order_finding_observables() {
        let table = [[1.0, 1.0, 1.0], [1.0, 1.0, 0.0], [0.0, 0.25, 0.3125], [1.0, 0.0, 0.0]];
        for r in 1..=4 {
            let y = if r == 3 { 2 } else { 0 };
            let pi = Permutation::cycle(4, r).unwrap();
            let of = order_finding_circuit(&pi, y).unwrap();
            assert_eq!(of.r, pi.order(y));
            let mut routes = vec![of.clone()];
            if r != 3 {
                routes.push(order_finding_sequence_circuit(r).unwrap());
            }
            for routes in routes {
                let psi = run_pure(&routes.gates, 5, 0).unwrap();
                let dist = register_distribution(&psi, 5, &ORDER_X, true);
                let o = bit_observables(&dist, 3);
                for b in 0..3 {
                    assert!((o[b] - table[r - 1][b]).abs() < 1e-9, "r = {r} bit {b}: {o:?}");
                }
            }
        }
    }

    #[test]
    fn r3_sequence_reaches_two_y_values() {
        let g = order_oracle_sequence(3).unwrap();
        let mut ys = std::collections::BTreeSet::new();
        for x in 0..8 {
            let psi = run_pure(&g, 5, (x << 2) | 2).unwrap();
            let d = register_distribution(&psi, 5, &ORDER_Y, false);
            ys.extend((0..4).filter(|&v| d[v] > 0.5));
        }
        assert_eq!(ys.len(), 2);
    }

    #[test]
    fn guessing_table_optimum() {
        let s = order_guess_success(&order_guess_table());
        for v in s {
            assert!((v - 60.0 / 109.0).abs() < 1e-12, "{s:?}");
        }
        for row in order_guess_table() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shor_support_and_simplification() {
        for a in [2, 4, 7, 8, 11, 13, 14] {
            let sc = shor15_circuit(a).unwrap();
            let psi_ref = run_pure(&sc.reference, 7, 0).unwrap();
            let psi_s = run_pure(&sc.simplified, 7, 0).unwrap();
            let d_ref = register_distribution(&psi_ref, 7, &SHOR_X, true);
            let d_s = register_distribution(&psi_s, 7, &SHOR_X, true);
            for k in 0..8 {
                assert!((d_ref[k] - d_s[k]).abs() < 1e-12);
                let want = if sc.support.contains(&k) { 1.0 / sc.support.len() as f64 } else { 0.0 };
                assert!((d_ref[k] - want).abs() < 1e-12, "a = {a} k = {k}");
            }
            let o = bit_observables(&d_ref, 3);
            assert_eq!(deduce_period(&o), Some(sc.period));
            if a != 14 {
                assert_eq!(sc.factors, vec![3, 5]);
            }
        }
        assert_eq!(shor15_circuit(7).unwrap().variant, ShorVariant::Difficult);
        assert_eq!(shor15_circuit(11).unwrap().annotations.len(), 0);
    }

    #[test]
    fn two_bit_code_scaling() {
        for p in [0.0, 0.05, 0.2] {
            let o = two_bit_code(90.0, p, true).unwrap();
            let q = (1.0 - p) * (1.0 - p) + p * p;
            assert!((o.accept_probability - q).abs() < 1e-12);
            assert!((o.accept_probability + two_bit_reject_probability(p) - 1.0).abs() < 1e-12);
            assert!((o.conditional_infidelity - p * p / q).abs() < 1e-12);
            let u = two_bit_code(90.0, p, false).unwrap();
            assert!((u.conditional_infidelity - p).abs() < 1e-12);
            let s = (1.0 - 2.0 * p) / q;
            assert!((bloch_ellipticity(p, true).unwrap() - 1.0 / s).abs() < 1e-12);
            assert!((bloch_ellipticity(p, false).unwrap() - 1.0 / (1.0 - 2.0 * p)).abs() < 1e-12);
        }
        let ps: Vec<f64> = (0..6).map(|k| phase_error_probability(k as f64 * TWO_BIT_STEP, TWO_BIT_T2)).collect();
        let want = [0.0, 0.071, 0.133, 0.185, 0.230, 0.269];
        for (a, b) in ps.iter().zip(want) {
            assert!((a - b).abs() < 2e-3, "{ps:?}");
        }
    }

    #[test]
    fn oracle_tokens() {
        let g = parse_oracle_tokens("cnot35 cz54'").unwrap();
        assert_eq!(g[0], Gate::Cnot { control: 2, target: 4 });
        assert_eq!(g[1], Gate::ControlledZ { control: 4, target: 3, angle: -90.0 });
        assert!(parse_oracle_tokens("cx12").is_err());
    }
}
