//! Prep, compile, simulate and read out one configured experiment.

use nmrqc::algorithms::{self, DjFunction, Permutation};
use nmrqc::compiler::{
    compile_circuit, parse_circuit, CompileOptions, CompiledSequence, ExecMode, Executor, Gate, PulseLibrary,
};
use nmrqc::decoherence::RelaxationParams;
use nmrqc::prep::{self, ThermalMode};
use nmrqc::readout::{self, Spectrum};
use nmrqc::{linalg, DensityMatrix, SpinSystem};

use crate::config::{invalid, read_file, CliResult, Experiment, ExperimentConfig};

/// Polarization scale of the full density matrix in decoherence runs.
pub const EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Named scalar results in a fixed order.
    pub metrics: Vec<(String, f64)>,
    /// (spin, O) with O = 2 Tr(rho Iz), normalized where the input is known.
    pub observables: Vec<(usize, f64)>,
    pub spectra: Vec<Spectrum>,
    pub verdict: String,
    /// Named acceptance checks.
    pub checks: Vec<(String, bool)>,
    /// Compiled sequence listing (pulse modes only).
    pub listing: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Metric names produced by an experiment, in output order.
pub fn metric_names(cfg: &ExperimentConfig) -> Vec<String> {
    let v: Vec<&str> = match cfg.experiment {
        Experiment::Dj => vec!["o1", "line_0", "line_1", "constant"],
        Experiment::Grover3 => vec!["p_x0", "p_analytic", "o1", "o2", "o3"],
        Experiment::Loglab => vec!["p_x0", "p_analytic"],
        Experiment::Cooling => vec!["gain", "o1", "o2", "o3"],
        Experiment::Order5 => vec!["o1", "o2", "o3", "o4", "o5", "r"],
        Experiment::Shor15 => vec!["o1", "o2", "o3", "r"],
        Experiment::TwoBitCode => vec![
            "p",
            "accept_probability",
            "undetected_probability",
            "conditional_infidelity",
            "ellipticity_coded",
            "ellipticity_uncoded",
        ],
        Experiment::Custom => return (1..=cfg.system.n).map(|i| format!("o{i}")).collect(),
    };
    v.into_iter().map(String::from).collect()
}

fn relaxation(cfg: &ExperimentConfig) -> CliResult<RelaxationParams> {
    let s = &cfg.system;
    if s.t1.iter().chain(&s.t2).any(Option::is_none) {
        return Err(invalid(format!("molecule '{}' has no relaxation constants", s.name)));
    }
    let r = cfg.params.ratio.unwrap_or(1.0);
    if r <= 0.0 {
        return Err(invalid("ratio must be positive"));
    }
    Ok(RelaxationParams::from_system(s, EPSILON).scaled(r, r))
}

/// Runs `gates` on a deviation matrix in the configured mode and returns
/// the output deviation. Decoherence acts on the full state
/// I/d + (epsilon/d) rho_dev so that T1 relaxes toward equilibrium.
pub fn execute(
    cfg: &ExperimentConfig,
    gates: &[Gate],
    rho: &DensityMatrix,
) -> CliResult<(DensityMatrix, CompiledSequence)> {
    let sys = &cfg.system;
    let opts = match cfg.mode {
        // The unwinding surrogate overcorrects in multiply coupled systems.
        ExecMode::Pulse => CompileOptions { library: PulseLibrary::for_system(sys), ..CompileOptions::default() },
        _ => CompileOptions::default(),
    };
    let seq = compile_circuit(gates, sys, &opts)?;
    let out = match cfg.mode {
        ExecMode::PulseDecoherence => {
            let ex = Executor::new(sys, cfg.mode).with_relaxation(relaxation(cfg)?);
            let d = rho.dim() as f64;
            let id = linalg::identity(rho.dim());
            let full =
                DensityMatrix { n: rho.n, mat: &id / linalg::c(d, 0.0) + &rho.mat * linalg::c(EPSILON / d, 0.0) };
            let r = ex.run(&seq, &full)?;
            DensityMatrix { n: rho.n, mat: (r.mat - id / linalg::c(d, 0.0)) * linalg::c(d / EPSILON, 0.0) }
        }
        _ => Executor::new(sys, cfg.mode).run(&seq, rho)?,
    };
    Ok((out, seq))
}

/// Spectra of the listed spins after a read pulse on each.
pub fn spectra(cfg: &ExperimentConfig, rho: &DensityMatrix, spins: &[usize]) -> CliResult<Vec<Spectrum>> {
    let sys = &cfg.system;
    let points = cfg.params.points.unwrap_or(readout::DEFAULT_POINTS);
    spins
        .iter()
        .map(|&s| {
            let r = rho.apply_local(&readout::readout_pulse(), &[s]);
            let dt = readout::default_dwell(sys, s);
            let t2 = sys.t2[s].unwrap_or(1.0);
            let series = readout::fid(sys, &r, s, points, dt, Some(t2))?;
            Ok(readout::spectrum(&series, dt, s)?)
        })
        .collect()
}

fn thermal(sys: &SpinSystem) -> DensityMatrix {
    prep::thermal_state(sys, ThermalMode::Deviation)
}

fn parse_bits(s: &str, n: usize) -> CliResult<usize> {
    if s.len() != n || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(invalid(format!("x0 must be {n} binary digits, got '{s}'")));
    }
    Ok(usize::from_str_radix(s, 2).expect("checked digits"))
}

fn bits(x: usize, n: usize) -> String {
    format!("{x:0n$b}")
}

/// (beta, alpha) of a deviation diagonal beta + alpha |0><0|.
fn pure_scale(d: &[f64]) -> (f64, f64) {
    (d[1], d[0] - d[1])
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Report> {
    let mut rep = match cfg.experiment {
        Experiment::Dj => run_dj(cfg)?,
        Experiment::Grover3 => run_grover3(cfg)?,
        Experiment::Loglab => run_loglab(cfg)?,
        Experiment::Cooling => run_cooling(cfg)?,
        Experiment::Order5 => run_order5(cfg)?,
        Experiment::Shor15 => run_shor15(cfg)?,
        Experiment::TwoBitCode => run_twobit(cfg)?,
        Experiment::Custom => run_custom(cfg)?,
    };
    if rep.metrics.iter().any(|(_, v)| !v.is_finite()) {
        return Err(invalid("non-finite result"));
    }
    let names: Vec<String> = rep.metrics.iter().map(|(n, _)| n.clone()).collect();
    debug_assert_eq!(names, metric_names(cfg));
    if cfg.mode == ExecMode::Ideal {
        rep.listing = None;
    }
    Ok(rep)
}

fn listing(cfg: &ExperimentConfig, seq: &CompiledSequence) -> Option<String> {
    Some(seq.listing(&cfg.system))
}

fn run_dj(cfg: &ExperimentConfig) -> CliResult<Report> {
    let f: DjFunction = cfg.params.function.as_deref().unwrap_or("").parse()?;
    let sys = &cfg.system;
    let rho_in = match cfg.params.input.as_deref().unwrap_or("thermal") {
        "thermal" => thermal(sys),
        "pure" => prep::temporal_cyclic(2)?.summed_state(&thermal(sys), true)?,
        other => return Err(invalid(format!("unknown input '{other}'"))),
    };
    let dj = algorithms::deutsch_jozsa_circuit(f);
    let (out, seq) = execute(cfg, &dj.gates, &rho_in)?;
    let o_in = readout::observables(&rho_in, &[0])[0];
    let o1 = readout::observables(&out, &[0])[0] / o_in;
    let lines = readout::line_amplitudes(&out.apply_local(&readout::readout_pulse(), &[0]), 0);
    let lines_in = readout::line_amplitudes(&rho_in.apply_local(&readout::readout_pulse(), &[0]), 0);
    let scale = lines_in[0].re.abs().max(f64::MIN_POSITIVE);
    // the work-qubit |0> line carries the answer
    let constant = lines[0].re > 0.0;
    let verdict = format!("f = {f:?}: {}", if constant { "constant" } else { "balanced" });
    Ok(Report {
        metrics: vec![
            ("o1".into(), o1),
            ("line_0".into(), lines[0].re / scale),
            ("line_1".into(), lines[1].re / scale),
            ("constant".into(), if constant { 1.0 } else { 0.0 }),
        ],
        observables: readout::all_observables(&out).into_iter().enumerate().map(|(i, v)| (i, v / o_in)).collect(),
        spectra: spectra(cfg, &out, &[0])?,
        verdict,
        checks: vec![("classification".into(), constant == f.is_constant())],
        listing: listing(cfg, &seq),
    })
}

fn run_grover3(cfg: &ExperimentConfig) -> CliResult<Report> {
    let sys = &cfg.system;
    let x0 = parse_bits(cfg.params.x0.as_deref().unwrap_or(""), 3)?;
    let k = cfg.params.iterations.unwrap_or(2);
    let rho_in = prep::temporal_cyclic(3)?.summed_state(&thermal(sys), true)?;
    let gates = algorithms::grover_circuit(3, x0, k)?;
    let (out, seq) = execute(cfg, &gates, &rho_in)?;
    let (beta, alpha) = pure_scale(&rho_in.diagonal_real());
    let d = out.diagonal_real();
    let p = (d[x0] - beta) / alpha;
    let found = (0..8).max_by(|&a, &b| d[a].total_cmp(&d[b])).expect("nonempty");
    let o_in = readout::observables(&rho_in, &[0])[0];
    let o = readout::all_observables(&out);
    let mut metrics = vec![("p_x0".into(), p), ("p_analytic".into(), algorithms::grover_amplitude(3, k))];
    metrics.extend(o.iter().enumerate().map(|(i, v)| (format!("o{}", i + 1), v / o_in)));
    Ok(Report {
        metrics,
        observables: o.iter().enumerate().map(|(i, v)| (i, v / o_in)).collect(),
        spectra: spectra(cfg, &out, &[0, 1, 2])?,
        verdict: format!("x0 identified = {}, P = {p:.3}", bits(found, 3)),
        checks: vec![("identified".into(), found == x0 || algorithms::grover_amplitude(3, k) < 0.5)],
        listing: listing(cfg, &seq),
    })
}

fn run_loglab(cfg: &ExperimentConfig) -> CliResult<Report> {
    let sys = &cfg.system;
    let x0 = parse_bits(cfg.params.x0.as_deref().unwrap_or(""), 2)?;
    let k = cfg.params.iterations.unwrap_or(1);
    let (label, sub) = prep::logical_label_3();
    let mut gates = label.clone();
    gates.extend(algorithms::grover_on(&sub.spins, x0, k)?);
    let rho_in = thermal(sys);
    let labeled = rho_in.apply(&nmrqc::compiler::circuit_unitary(&label, 3)?)?;
    let (out, seq) = execute(cfg, &gates, &rho_in)?;
    // label spin is the most significant bit, so its |0> block is indices 0..4
    let block = |r: &DensityMatrix| r.diagonal_real()[..4].to_vec();
    let (beta, alpha) = pure_scale(&block(&labeled));
    let d = block(&out);
    let p = (d[x0] - beta) / alpha;
    let found = (0..4).max_by(|&a, &b| d[a].total_cmp(&d[b])).expect("nonempty");
    Ok(Report {
        metrics: vec![("p_x0".into(), p), ("p_analytic".into(), algorithms::grover_amplitude(2, k))],
        observables: readout::all_observables(&out).into_iter().enumerate().collect(),
        spectra: spectra(cfg, &out, &sub.spins)?,
        verdict: format!("x0 identified = {}, P = {p:.3}", bits(found, 2)),
        checks: vec![("identified".into(), found == x0 || algorithms::grover_amplitude(2, k) < 0.5)],
        listing: listing(cfg, &seq),
    })
}

fn run_cooling(cfg: &ExperimentConfig) -> CliResult<Report> {
    let rho_in = thermal(&cfg.system);
    let boost = prep::schulman_vazirani_boost();
    let (out, seq) = execute(cfg, &boost.circuit, &rho_in)?;
    let o_in = readout::observables(&rho_in, &[0])[0];
    let o: Vec<f64> = readout::all_observables(&out).iter().map(|v| v / o_in).collect();
    let gain = o[0];
    let equal = cfg.system.polarization_ratio.windows(2).all(|w| w[0] == w[1]);
    let ok = if cfg.mode == ExecMode::Ideal && equal { (gain - 1.5).abs() < 1e-6 } else { gain > 1.0 };
    let mut metrics = vec![("gain".into(), gain)];
    metrics.extend(o.iter().enumerate().map(|(i, v)| (format!("o{}", i + 1), *v)));
    Ok(Report {
        metrics,
        observables: o.into_iter().enumerate().collect(),
        spectra: spectra(cfg, &out, &[0])?,
        verdict: format!("spin 1 polarization gain {gain:.3}"),
        checks: vec![("gain".into(), ok)],
        listing: listing(cfg, &seq),
    })
}

/// Order whose ideal (O1, O2, O3) lies closest to `o`.
pub fn nearest_order(o: &[f64]) -> usize {
    (1..=4)
        .min_by(|&a, &b| {
            let dist = |r: usize| {
                let e = algorithms::bit_observables(&algorithms::order_distribution(r), 3);
                e.iter().zip(o).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
            };
            dist(a).total_cmp(&dist(b))
        })
        .expect("nonempty")
}

fn run_order5(cfg: &ExperimentConfig) -> CliResult<Report> {
    let r = cfg.params.r.unwrap_or(0);
    if !(1..=4).contains(&r) {
        return Err(invalid(format!("r must be 1..=4, got {r}")));
    }
    let pi = Permutation::cycle(4, r)?;
    let of = algorithms::order_finding_circuit(&pi, 0)?;
    let rho_in = prep::five_spin_plan()?.summed_state(&thermal(&cfg.system), true)?;
    let (out, seq) = execute(cfg, &of.gates, &rho_in)?;
    let o_in = readout::observables(&rho_in, &[0])[0];
    let o: Vec<f64> = readout::all_observables(&out).iter().map(|v| v / o_in).collect();
    let found = nearest_order(&o[..3]);
    let mut metrics: Vec<(String, f64)> = o.iter().enumerate().map(|(i, v)| (format!("o{}", i + 1), *v)).collect();
    metrics.push(("r".into(), found as f64));
    Ok(Report {
        metrics,
        observables: o.into_iter().enumerate().collect(),
        spectra: spectra(cfg, &out, &[0, 1, 2])?,
        verdict: format!("r={found}"),
        checks: vec![("order".into(), found == of.r)],
        listing: listing(cfg, &seq),
    })
}

fn run_shor15(cfg: &ExperimentConfig) -> CliResult<Report> {
    let a = cfg.params.a.unwrap_or(0);
    let sc = algorithms::shor15_circuit(a)?;
    let rho_in = prep::seven_spin_plan(&prep::CarbonMask::default())?.summed_state(&thermal(&cfg.system), true)?;
    let (out, seq) = execute(cfg, &sc.simplified, &rho_in)?;
    let o_in = readout::observables(&rho_in, &[0])[0];
    let o: Vec<f64> = readout::all_observables(&out).iter().map(|v| v / o_in).collect();
    let r = algorithms::deduce_period(&o[..3]);
    let factors = r.map(|r| algorithms::factors_from_period(a, r)).unwrap_or_default();
    let list = factors.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let verdict = match r {
        Some(r) => format!("r={r}, factors {{{list}}}"),
        None => "no period deduced".to_string(),
    };
    let mut metrics: Vec<(String, f64)> = o[..3].iter().enumerate().map(|(i, v)| (format!("o{}", i + 1), *v)).collect();
    metrics.push(("r".into(), r.map_or(0.0, |r| r as f64)));
    Ok(Report {
        metrics,
        observables: o.into_iter().enumerate().collect(),
        spectra: spectra(cfg, &out, &algorithms::SHOR_X)?,
        verdict,
        checks: vec![("period".into(), r == Some(sc.period)), ("factors".into(), factors == sc.factors)],
        listing: listing(cfg, &seq),
    })
}

fn run_twobit(cfg: &ExperimentConfig) -> CliResult<Report> {
    let pr = &cfg.params;
    let p = match (pr.p, pr.storage_time) {
        (Some(p), _) => p,
        (None, Some(t)) => algorithms::phase_error_probability(t, pr.t2.unwrap_or(algorithms::TWO_BIT_T2)),
        _ => return Err(invalid("twobitcode needs p or storage_time")),
    };
    let theta = pr.theta.unwrap_or(90.0);
    if !(0.0..=180.0).contains(&theta) {
        return Err(invalid(format!("theta must be within [0, 180], got {theta}")));
    }
    let coded = algorithms::two_bit_code(theta, p, true)?;
    let ec = algorithms::bloch_ellipticity(p, true)?;
    let eu = algorithms::bloch_ellipticity(p, false)?;
    let (x, z) = algorithms::accepted_bloch(theta, p, true)?;
    let ok = (coded.undetected_probability - p * p).abs() < 1e-12 && (ec - 1.0).abs() <= (eu - 1.0).abs() + 1e-12;
    Ok(Report {
        metrics: vec![
            ("p".into(), p),
            ("accept_probability".into(), coded.accept_probability),
            ("undetected_probability".into(), coded.undetected_probability),
            ("conditional_infidelity".into(), coded.conditional_infidelity),
            ("ellipticity_coded".into(), ec),
            ("ellipticity_uncoded".into(), eu),
        ],
        observables: vec![(0, z / coded.accept_probability), (1, x / coded.accept_probability)],
        spectra: Vec::new(),
        verdict: format!("p = {p:.3}: ellipticity coded {ec:.3}, uncoded {eu:.3}"),
        checks: vec![("coding".into(), ok)],
        listing: None,
    })
}

fn run_custom(cfg: &ExperimentConfig) -> CliResult<Report> {
    let path = cfg.base.join(cfg.params.circuit.as_deref().unwrap_or(""));
    let gates = parse_circuit(&read_file(&path)?)?;
    let sys = &cfg.system;
    let rho_in = match cfg.params.input.as_deref().unwrap_or("thermal") {
        "thermal" => thermal(sys),
        "pure" => prep::temporal_cyclic(sys.n)?.summed_state(&thermal(sys), true)?,
        other => return Err(invalid(format!("unknown input '{other}'"))),
    };
    let (out, seq) = execute(cfg, &gates, &rho_in)?;
    let o = readout::all_observables(&out);
    let spins: Vec<usize> = (0..sys.n).collect();
    Ok(Report {
        metrics: o.iter().enumerate().map(|(i, v)| (format!("o{}", i + 1), *v)).collect(),
        observables: o.into_iter().enumerate().collect(),
        spectra: spectra(cfg, &out, &spins)?,
        verdict: format!("ran {} gates", gates.len()),
        checks: Vec::new(),
        listing: listing(cfg, &seq),
    })
}
