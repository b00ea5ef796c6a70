//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use nmrqc::algorithms::{self, DjFunction, Permutation};
use nmrqc::compiler::{circuit_unitary, compile_circuit, CompileOptions, ExecMode, Executor, Gate};
use nmrqc::decoherence::seven_spin;
use nmrqc::linalg::{self, c, CMat, CVec, C64};
use nmrqc::prep::{self, ThermalMode};
use nmrqc::pulse::{self, PulseEvent, PulseShape};
use nmrqc::{molecule, readout, DensityMatrix, SpinSystem};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let el = t.elapsed();
    ensure(el < limit, format!("{what} took {el:.1?}, limit {limit:?}"))
}

/// Deviation output of an ideally executed circuit.
fn run_ideal(sys: &SpinSystem, gates: &[Gate], rho: &DensityMatrix) -> Result<DensityMatrix, String> {
    let seq = compile_circuit(gates, sys, &CompileOptions::default()).map_err(e)?;
    Executor::new(sys, ExecMode::Ideal).run(&seq, rho).map_err(e)
}

fn ry(deg: f64) -> CMat {
    let (s, co) = (deg.to_radians() / 2.0).sin_cos();
    linalg::real_matrix(&[&[co, -s], &[s, co]])
}

fn crit1() -> Outcome {
    let t = Instant::now();
    let sys = molecule::bundled("chloroform").map_err(e)?;
    let rho = prep::thermal_state(&sys, ThermalMode::Deviation);
    let mut worst = 0.0f64;
    for f in DjFunction::ALL {
        let dj = algorithms::deutsch_jozsa_circuit(f);
        let out = run_ideal(&sys, &dj.gates, &rho)?;
        // independent theory: rotations as 2x2 products, oracle from the truth table
        let oracle = CMat::from_fn(4, 4, |r, col| {
            let (x, y) = (col >> 1, col & 1);
            if r == (x << 1) | (y ^ f.eval(x)) {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let u = linalg::kron(&ry(-90.0), &ry(90.0)) * oracle * linalg::kron(&ry(90.0), &ry(-90.0));
        let theory = &u * &rho.mat * u.adjoint();
        let err = readout::relative_error(&out.mat, &theory);
        worst = worst.max(err);
        ensure(err < 1e-8, format!("{f:?}: relative error {err:e}"))?;
        let lines = readout::line_amplitudes(&out.apply_local(&readout::readout_pulse(), &[0]), 0);
        // the line with the work qubit in |0> carries the answer
        let want = readout::line_amplitudes(
            &DensityMatrix { n: 2, mat: theory }.apply_local(&readout::readout_pulse(), &[0]),
            0,
        );
        let signs_match = lines.iter().zip(&want).all(|(a, b)| a.re.signum() == b.re.signum());
        ensure(signs_match && (lines[0].re > 0.0) == f.is_constant(), format!("{f:?}: doublet {lines:?}"))?;
    }
    within(t, Duration::from_secs(1), "Deutsch-Jozsa")?;
    Ok(format!("4/4 oracles classified, max relative error {worst:.1e}"))
}

/// Brute-force Grover on a plain amplitude vector.
fn grover_brute(n: usize, x0: usize, k: usize) -> f64 {
    let d = 1 << n;
    let mut a = vec![1.0 / (d as f64).sqrt(); d];
    for _ in 0..k {
        a[x0] = -a[x0];
        let mean = a.iter().sum::<f64>() / d as f64;
        a.iter_mut().for_each(|v| *v = 2.0 * mean - *v);
    }
    a[x0] * a[x0]
}

fn crit2() -> Outcome {
    let t = Instant::now();
    let x0 = 0b101;
    let psi = algorithms::run_pure(&algorithms::grover_circuit(3, x0, 2).map_err(e)?, 3, 0).map_err(e)?;
    let p2 = psi[x0].norm_sqr();
    let brute = grover_brute(3, x0, 2);
    ensure((p2 - brute).abs() < 1e-10, format!("P(k=2) {p2} vs brute force {brute}"))?;
    ensure((brute - 0.9453125).abs() < 1e-12, format!("brute force {brute}"))?;
    let theta = (1.0 / 8f64.sqrt()).asin();
    for k in 1..=37 {
        let psi = algorithms::run_pure(&algorithms::grover_circuit(3, x0, k).map_err(e)?, 3, 0).map_err(e)?;
        let want = ((2 * k + 1) as f64 * theta).sin().powi(2);
        ensure((psi[x0].norm_sqr() - want).abs() < 1e-10, format!("k = {k}: {} vs {want}", psi[x0].norm_sqr()))?;
    }
    let peaks: Vec<usize> = (1..=8)
        .filter(|&k| {
            let psi = algorithms::run_pure(&algorithms::grover_circuit(2, 3, k).unwrap(), 2, 0).unwrap();
            (psi[3].norm_sqr() - 1.0).abs() < 1e-10
        })
        .collect();
    ensure(peaks == [1, 4, 7], format!("N = 4 certain after {peaks:?}"))?;
    within(t, Duration::from_secs(5), "Grover")?;
    Ok(format!("P(k=2) = {p2:.10}, k = 1..37 pointwise, N = 4 peaks at {peaks:?}"))
}

fn crit3() -> Outcome {
    let s = 1.0 / 2f64.sqrt();
    let mut psi = CVec::zeros(8);
    psi[1] = c(s, 0.0);
    psi[5] = c(s, 0.0);
    let u = circuit_unitary(&algorithms::qft_circuit(3, false), 3).map_err(e)?;
    let out = u * psi;
    let want = [
        c(0.5, 0.0),
        C64::new(0.0, 0.0),
        c(0.0, -0.5),
        c(0.0, 0.0),
        c(-0.5, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.5),
        c(0.0, 0.0),
    ];
    let dev = (0..8).map(|i| (out[i] - want[i]).norm()).fold(0.0, f64::max);
    ensure(dev < 1e-10, format!("worked example deviation {dev:e}"))?;
    let mut worst = 0.0f64;
    for n in 1..=4 {
        let d = 1usize << n;
        let dft = CMat::from_fn(d, d, |j, k| {
            linalg::cis(-2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64) / (d as f64).sqrt()
        });
        let u = circuit_unitary(&algorithms::qft_circuit(n, false), n).map_err(e)?;
        worst = worst.max(linalg::max_abs(&(u - dft)));
    }
    ensure(worst < 1e-10, format!("circuit vs DFT {worst:e}"))?;
    Ok(format!("worked example to {dev:.1e}, n <= 4 DFT to {worst:.1e}"))
}

fn crit4() -> Outcome {
    let t = Instant::now();
    let sys = molecule::bundled("pentafluoro").map_err(e)?;
    let thermal = prep::thermal_state(&sys, ThermalMode::Deviation);
    let plan = prep::five_spin_plan().map_err(e)?;
    let rho = plan.summed_state(&thermal, true).map_err(e)?;
    let lines = readout::line_amplitudes(&rho.apply_local(&readout::readout_pulse(), &[0]), 0);
    let max = lines.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let above: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].norm() > 1e-8 * max).collect();
    ensure(above == [0], format!("{} experiments leave lines {above:?} of spin 1", plan.len()))?;
    let table = [[1.0, 1.0, 1.0], [1.0, 1.0, 0.0], [0.0, 0.25, 0.3125], [1.0, 0.0, 0.0]];
    let o_in = readout::observables(&rho, &[0])[0];
    for r in 1..=4 {
        let of = algorithms::order_finding_circuit(&Permutation::cycle(4, r).map_err(e)?, 0).map_err(e)?;
        let out = run_ideal(&sys, &of.gates, &rho)?;
        let o: Vec<f64> = readout::observables(&out, &algorithms::ORDER_X).iter().map(|v| v / o_in).collect();
        for b in 0..3 {
            ensure((o[b] - table[r - 1][b]).abs() < 1e-6, format!("r = {r}: O = {o:?}"))?;
        }
    }
    within(t, Duration::from_secs(60), "order finding")?;
    Ok(format!("r = 1..4 observables to 1e-6, {}-experiment prep leaves only the 0000 line", plan.len()))
}

fn shor_run(a: u64, mode: ExecMode) -> Result<(usize, Vec<u64>, Vec<f64>), String> {
    let sys = molecule::bundled("seven_spin").map_err(e)?;
    let sc = algorithms::shor15_circuit(a).map_err(e)?;
    let thermal = prep::thermal_state(&sys, ThermalMode::Deviation);
    let rho =
        prep::seven_spin_plan(&prep::CarbonMask::default()).map_err(e)?.summed_state(&thermal, true).map_err(e)?;
    let seq = compile_circuit(&sc.simplified, &sys, &CompileOptions::default()).map_err(e)?;
    let out = match mode {
        ExecMode::PulseDecoherence => {
            // full state at the fluorine polarization of the relaxation constants
            let eps = 2.0 * (seven_spin::P_FLUORINE - 0.5);
            let d = rho.dim() as f64;
            let id = linalg::identity(rho.dim());
            let full = DensityMatrix { n: 7, mat: &id / c(d, 0.0) + &rho.mat * c(eps / d, 0.0) };
            let ex = Executor::new(&sys, mode).with_relaxation(seven_spin::params(1.0, 1.0, seven_spin::CARBON_FACTOR));
            let r = ex.run(&seq, &full).map_err(e)?;
            DensityMatrix { n: 7, mat: (r.mat - id / c(d, 0.0)) * c(d / eps, 0.0) }
        }
        _ => Executor::new(&sys, mode).run(&seq, &rho).map_err(e)?,
    };
    let o_in = readout::observables(&rho, &[0])[0];
    let o: Vec<f64> = readout::observables(&out, &algorithms::SHOR_X).iter().map(|v| v / o_in).collect();
    let r = algorithms::deduce_period(&o).ok_or(format!("a = {a}: no period from {o:?}"))?;
    Ok((r, algorithms::factors_from_period(a, r), o))
}

fn crit5() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    for (a, want) in [(11, 2), (7, 4)] {
        for mode in [ExecMode::Ideal, ExecMode::PulseDecoherence] {
            let (r, f, o) = shor_run(a, mode)?;
            ensure(r == want && f == [3, 5], format!("a = {a} {mode:?}: r = {r}, factors {f:?}, O = {o:?}"))?;
            if mode == ExecMode::PulseDecoherence {
                notes.push(format!("a={a} O=({:.2},{:.2},{:.2})", o[0], o[1], o[2]));
            }
        }
    }
    within(t, Duration::from_secs(600), "Shor")?;
    Ok(format!("a=11 r=2, a=7 r=4, factors {{3,5}} ideal and with decoherence [{}]", notes.join(", ")))
}

fn crit6() -> Outcome {
    let sys = molecule::bundled("bromotrifluoroethylene").map_err(e)?;
    ensure(sys.polarization_ratio.windows(2).all(|w| w[0] == w[1]), "unequal polarizations")?;
    let rho = prep::thermal_state(&sys, ThermalMode::Deviation);
    let boost = prep::schulman_vazirani_boost();
    let out = run_ideal(&sys, &boost.circuit, &rho)?;
    let gain = readout::observables(&out, &[0])[0] / readout::observables(&rho, &[0])[0];
    ensure((gain - 1.5).abs() < 1e-12, format!("gain {gain}"))?;
    let want = [1.0, 3.0, 1.0, 1.0, -1.0, -1.0, -1.0, -3.0];
    let d = out.diagonal_real();
    let scale = d.iter().zip(&want).map(|(a, b)| a * b).sum::<f64>() / want.iter().map(|b| b * b).sum::<f64>();
    let res = d.iter().zip(&want).map(|(a, b)| (a - scale * b).abs()).fold(0.0, f64::max);
    ensure(res < 1e-12 && scale > 0.0, format!("diagonal {d:?}"))?;
    let off = linalg::max_abs(&(out.mat.clone() - linalg::diag_real(&d)));
    ensure(off < 1e-12, format!("off-diagonal {off:e}"))?;
    Ok(format!("gain {gain}, diagonal = {scale} x (1,3,1,1,-1,-1,-1,-3)"))
}

fn crit7() -> Outcome {
    for &p in &[0.0, 0.01, 0.1, 0.25, 0.4] {
        let o = algorithms::two_bit_code(60.0, p, true).map_err(e)?;
        ensure(
            (o.undetected_probability - p * p).abs() < 1e-12,
            format!("p = {p}: undetected {}", o.undetected_probability),
        )?;
    }
    let h = 1e-4;
    let mut slope = 0.0f64;
    for theta in [30.0, 90.0, 135.0] {
        let f0 = algorithms::two_bit_code(theta, 0.0, true).map_err(e)?.conditional_infidelity;
        let f1 = algorithms::two_bit_code(theta, h, true).map_err(e)?.conditional_infidelity;
        let s = (f1 - f0) / h;
        slope = slope.max(s.abs());
        ensure(s.abs() < 1e-3, format!("theta = {theta}: slope {s}"))?;
        let raw = algorithms::two_bit_code(theta, h, false).map_err(e)?.conditional_infidelity / h;
        ensure(raw > 0.1, format!("uncoded slope {raw} should be first order"))?;
    }
    let published = [0.0, 0.071, 0.132, 0.185, 0.230, 0.269];
    let mut prev = 1.0;
    let mut worst_excess = 0.0f64;
    for (k, want) in published.iter().enumerate() {
        let p = algorithms::phase_error_probability(k as f64 * algorithms::TWO_BIT_STEP, algorithms::TWO_BIT_T2);
        ensure((p - want).abs() < 2e-3, format!("storage step {k}: p = {p}, expected {want}"))?;
        let coded = algorithms::bloch_ellipticity(p, true).map_err(e)?;
        let uncoded = algorithms::bloch_ellipticity(p, false).map_err(e)?;
        // sphere to first order: the excess is O(p^2) while the uncoded one is O(p)
        ensure(coded - 1.0 <= 5.0 * p * p + 1e-12, format!("p = {p}: coded ellipticity {coded}"))?;
        ensure(uncoded - 1.0 >= 2.0 * p - 1e-12 && uncoded >= prev, format!("p = {p}: uncoded ellipticity {uncoded}"))?;
        ensure(coded <= uncoded, format!("p = {p}: coded {coded} above uncoded {uncoded}"))?;
        worst_excess = worst_excess.max(coded - 1.0);
        prev = uncoded;
    }
    Ok(format!(
        "undetected = p^2, slope at 0 <= {slope:.1e}, coded ellipticity 1 + O(p^2) (max excess {worst_excess:.2}) vs uncoded 1/(1-2p)"
    ))
}

fn crit8() -> Outcome {
    let mut sys = SpinSystem::new(2).with_offsets(&[0.0, 3273.0]);
    sys.nucleus = vec!["1H".into(), "1H".into()];
    let shape = PulseShape::hermite180();
    let a = PulseEvent::selective(&sys, 0, &shape, 180.0, 0.0, 2650e-6);
    let b = PulseEvent::selective(&sys, 1, &shape, 180.0, 0.0, 2650e-6);
    let plain = pulse::simultaneous_untracked(&[a.clone(), b.clone()]).map_err(e)?;
    let tracked = pulse::simultaneous_with_tracking(&sys, &[a, b]).map_err(e)?;
    // inversion band: +-100 Hz around each carrier
    let grid: Vec<f64> = [0.0, 3273.0].iter().flat_map(|&f0| (-20..=20).map(move |i| f0 + 5.0 * i as f64)).collect();
    let worst = |ev: &PulseEvent| -> Result<f64, String> {
        Ok(pulse::excitation_profile(ev, &grid, [0.0, 0.0, 1.0]).map_err(e)?.iter().map(|p| p.1).fold(0.0, f64::max))
    };
    let (u, t) = (worst(&plain)?, worst(&tracked)?);
    ensure(u > 0.3, format!("uncorrected residual {u:.3}"))?;
    ensure(t < 0.1, format!("corrected residual {t:.3}"))?;
    Ok(format!("residual |xy| in band: uncorrected {u:.3}, tracked {t:.3}"))
}

fn crit9() -> Outcome {
    let t = Instant::now();
    // a runner counts cases across calls, so each property gets its own
    let runner = || TestRunner::new(Config { cases: 48, failure_persistence: None, ..Config::default() });
    let run = |name: &str, r: Result<(), String>| r.map_err(|m| format!("{name}: {m}"));
    run("trace", runner().run(&common::state_and_relaxation(3), common::check_trace_preservation).map_err(e))?;
    run("kraus", runner().run(&(0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), common::check_kraus_completeness).map_err(e))?;
    run("gad/pd", runner().run(&common::state_and_relaxation(3), common::check_gad_pd_commute).map_err(e))?;
    run(
        "spin order",
        runner()
            .run(&(common::state_and_relaxation(3), any::<u64>()), |(x, s)| common::check_order_invariance(x, s))
            .map_err(e),
    )?;
    run(
        "refocusing",
        runner()
            .run(&(common::system_strategy(7), (0..7usize, 0..7usize, any::<bool>())), |(s, p)| {
                common::check_refocus_balance(s, p)
            })
            .map_err(e),
    )?;
    run("passes", runner().run(&common::circuit_strategy(3), common::check_pass_pipeline).map_err(e))?;
    run("permutations", runner().run(&common::permutation_strategy(), common::check_permutation).map_err(e))?;
    within(t, Duration::from_secs(30), "property suite")?;
    Ok(format!("7 properties x 48 cases in {:.1?}", t.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("deutsch-jozsa", crit1),
        ("grover", crit2),
        ("qft", crit3),
        ("order finding", crit4),
        ("shor-15", crit5),
        ("schulman-vazirani", crit6),
        ("two-bit code", crit7),
        ("bloch-siegert tracking", crit8),
        ("property suite", crit9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match f() {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg} ({:.1?})", i + 1, t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg}", i + 1);
            }
        }
    }
    println!(
        "criterion 10 EXCLUDED hardware error magnitudes: RF inhomogeneity and measured amplitudes are not modelled; \
         criterion 9 stands in"
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
