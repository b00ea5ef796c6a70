//! Writing reports and sweeps to disk.

use std::path::Path;

use crate::config::{invalid, CliError, CliResult, ExperimentConfig};
use crate::runner::{self, metric_names, Report};

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    invalid(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| invalid(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: f64) -> String {
    format!("{v:.10e}")
}

/// observables.csv, metrics.csv, spectrum_spin<k>.csv, verdict.txt and,
/// in pulse modes, listing.txt.
pub fn write_report(report: &Report, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let obs: Vec<Vec<String>> = report.observables.iter().map(|(s, v)| vec![(s + 1).to_string(), num(*v)]).collect();
    write(&dir.join("observables.csv"), &csv_string(&["spin".into(), "observable".into()], &obs)?)?;
    let met: Vec<Vec<String>> = report.metrics.iter().map(|(n, v)| vec![n.clone(), num(*v)]).collect();
    write(&dir.join("metrics.csv"), &csv_string(&["name".into(), "value".into()], &met)?)?;
    for sp in &report.spectra {
        write(&dir.join(format!("spectrum_spin{}.csv", sp.spin + 1)), &sp.to_csv())?;
    }
    let mut v = report.verdict.clone();
    v.push('\n');
    for (name, ok) in &report.checks {
        v.push_str(&format!("{name}: {}\n", if *ok { "pass" } else { "FAIL" }));
    }
    write(&dir.join("verdict.txt"), &v)?;
    if let Some(l) = &report.listing {
        write(&dir.join("listing.txt"), l)?;
    }
    Ok(())
}

/// One row per value with the experiment's metrics; an empty value list
/// gives the header alone.
pub fn sweep_csv(cfg: &ExperimentConfig, param: &str, values: &[f64]) -> CliResult<String> {
    // reject unknown parameters even when there is nothing to run
    cfg.clone().set_param(param, 0.0)?;
    let mut header = vec![param.to_string()];
    header.extend(metric_names(cfg));
    header.push("verdict".into());
    let mut rows = Vec::new();
    for &v in values {
        let mut c = cfg.clone();
        c.set_param(param, v)?;
        let rep = runner::run(&c)?;
        let mut row = vec![format!("{v}")];
        row.extend(rep.metrics.iter().map(|(_, x)| num(*x)));
        row.push(rep.verdict);
        rows.push(row);
    }
    csv_string(&header, &rows)
}
