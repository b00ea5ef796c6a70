use std::path::{Path, PathBuf};
use std::process::Command;

use nmrqc::algorithms;
use nmrqc_cli::config::ExperimentConfig;
use nmrqc_cli::{output, runner};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn nmrqc(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_nmrqc")).args(args).arg("--out").arg(out).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name)).unwrap()
}

#[test]
fn bundled_configs_pass_their_checks() {
    let cases = [
        ("dj.toml", "balanced"),
        ("grover3.toml", "x0 identified = 101"),
        ("loglab.toml", "x0 identified = 11"),
        ("cooling.toml", "gain 1.500"),
        ("order5.toml", "r=2"),
        ("shor15.toml", "r=4, factors {3,5}"),
        ("twobitcode.toml", "p = 0.132"),
        ("custom.toml", "ran 0 gates"),
    ];
    for (cfg, want) in cases {
        let dir = tempfile::tempdir().unwrap();
        let (code, stdout) = nmrqc(&["--check", "run", configs().join(cfg).to_str().unwrap()], dir.path());
        assert_eq!(code, 0, "{cfg}: {stdout}");
        assert!(stdout.contains(want), "{cfg}: {stdout}");
        let verdict = std::fs::read_to_string(dir.path().join("verdict.txt")).unwrap();
        assert!(verdict.starts_with(stdout.trim_end()));
        assert!(dir.path().join("metrics.csv").exists() && dir.path().join("observables.csv").exists());
        // listings only in pulse modes
        assert!(!dir.path().join("listing.txt").exists());
    }
}

#[test]
fn outputs_are_deterministic() {
    let cfg = configs().join("grover3.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let (code, _) = nmrqc(&["--mode", "pulse", "run", cfg.to_str().unwrap()], d.path());
        assert_eq!(code, 0);
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "listing.txt"));
    assert!(names.iter().any(|n| n == "spectrum_spin3.csv"));
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(nmrqc(&["run", "/nonexistent/x.toml"], &out).0, 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = 'teleport'\nmolecule = 'chloroform'\n").unwrap();
    assert_eq!(nmrqc(&["run", bad.to_str().unwrap()], &out).0, 3);

    let wrong_size = dir.path().join("size.toml");
    std::fs::write(&wrong_size, "experiment = 'shor15'\nmolecule = 'chloroform'\n[params]\na = 7\n").unwrap();
    assert_eq!(nmrqc(&["run", wrong_size.to_str().unwrap()], &out).0, 3);

    let no_molecule = dir.path().join("nomol.toml");
    std::fs::write(&no_molecule, "experiment = 'cooling'\nmolecule = 'missing.toml'\n").unwrap();
    assert_eq!(nmrqc(&["run", no_molecule.to_str().unwrap()], &out).0, 2);

    // a weakly polarized pair of partners cannot boost spin 1
    std::fs::write(
        dir.path().join("weak.toml"),
        "name = 'weak'\nn = 3\nnuclei = ['1H', '13C', '15N']\noffsets_hz = [100.0, -200.0, 300.0]\n\
         j_hz = [[50.0, 40.0], [30.0]]\npolarization = [1.0, 0.1, 0.1]\n",
    )
    .unwrap();
    let weak = dir.path().join("weak_cooling.toml");
    std::fs::write(&weak, "experiment = 'cooling'\nmolecule = 'weak.toml'\n").unwrap();
    assert_eq!(nmrqc(&["run", weak.to_str().unwrap()], &out).0, 0);
    assert_eq!(nmrqc(&["--check", "run", weak.to_str().unwrap()], &out).0, 1);

    let tb = configs().join("twobitcode.toml");
    assert_eq!(nmrqc(&["sweep", tb.to_str().unwrap(), "--param", "a", "--values", "1"], &out).0, 3);
    assert_eq!(nmrqc(&["--mode", "warp", "run", tb.to_str().unwrap()], &out).0, 3);
    // no relaxation constants for this molecule
    let g = configs().join("grover3.toml");
    assert_eq!(nmrqc(&["--mode", "pulse+decoherence", "run", g.to_str().unwrap()], &out).0, 3);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("grover3.toml");
    let (code, stdout) = nmrqc(&["sweep", cfg.to_str().unwrap(), "--param", "iterations", "--values", ""], dir.path());
    assert_eq!(code, 0);
    assert_eq!(stdout, "iterations,p_x0,p_analytic,o1,o2,o3,verdict\n");
    assert_eq!(std::fs::read_to_string(dir.path().join("sweep_iterations.csv")).unwrap(), stdout);
}

#[test]
fn grover_sweep_follows_the_analytic_curve() {
    let cfg = load("grover3.toml");
    let values: Vec<f64> = (1..=37).map(f64::from).collect();
    let csv = output::sweep_csv(&cfg, "iterations", &values).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let k: usize = rec[0].parse().unwrap();
        let p: f64 = rec[1].parse().unwrap();
        let theta = (1.0 / 8f64.sqrt()).asin();
        assert!((p - ((2 * k + 1) as f64 * theta).sin().powi(2)).abs() < 1e-9, "k = {k}: {p}");
        rows += 1;
    }
    assert_eq!(rows, 37);
}

#[test]
fn storage_time_sweep_gives_the_phase_error_list() {
    let cfg = load("twobitcode.toml");
    let values: Vec<f64> = (0..6).map(|k| k as f64 * algorithms::TWO_BIT_STEP).collect();
    let csv = output::sweep_csv(&cfg, "storage_time", &values).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let p: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    let want = [0.0, 0.071, 0.132, 0.185, 0.230, 0.269];
    for (a, b) in p.iter().zip(want) {
        assert!((a - b).abs() < 2e-3, "{p:?}");
    }
}

#[test]
fn empty_circuit_gives_thermal_spectra() {
    let cfg = load("custom.toml");
    let rep = runner::run(&cfg).unwrap();
    let thermal = nmrqc::prep::thermal_state(&cfg.system, nmrqc::prep::ThermalMode::Deviation);
    let direct = runner::spectra(&cfg, &thermal, &[0, 1]).unwrap();
    assert_eq!(rep.spectra, direct);
    // both lines of each doublet positive
    for s in 0..2 {
        let lines = nmrqc::readout::line_amplitudes(&thermal.apply_local(&nmrqc::readout::readout_pulse(), &[s]), s);
        assert!(lines.iter().all(|l| l.re > 0.0));
    }
}

#[test]
fn shor_survives_decoherence() {
    let mut cfg = load("shor15.toml");
    cfg.params.a = Some(11);
    cfg.mode = nmrqc::compiler::ExecMode::PulseDecoherence;
    let rep = runner::run(&cfg).unwrap();
    assert!(rep.passed(), "{}", rep.verdict);
    assert_eq!(rep.verdict, "r=2, factors {3,5}");
    assert!(rep.listing.is_some());
}
