//! Experiment configuration files.
//!
//! ```toml
//! experiment = "shor15"
//! molecule = "seven_spin"   # bundled name or path relative to this file
//! mode = "ideal"            # ideal | pulse | pulse+decoherence
//!
//! [params]
//! a = 7
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use nmrqc::compiler::ExecMode;
use nmrqc::{molecule, SpinSystem};

#[derive(Debug)]
pub enum CliError {
    /// A file named by the user does not exist (exit code 2).
    Missing(PathBuf),
    /// Bad configuration or a violated invariant (exit code 3).
    Invalid(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Missing(p) => write!(f, "file not found: {}", p.display()),
            CliError::Invalid(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nmrqc::Error> for CliError {
    fn from(e: nmrqc::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Missing(_) => 2,
            CliError::Invalid(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Missing(path.to_path_buf()),
        _ => invalid(format!("{}: {e}", path.display())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Dj,
    Grover3,
    Loglab,
    Cooling,
    Order5,
    Shor15,
    TwoBitCode,
    Custom,
}

impl FromStr for Experiment {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "dj" => Experiment::Dj,
            "grover3" => Experiment::Grover3,
            "loglab" => Experiment::Loglab,
            "cooling" => Experiment::Cooling,
            "order5" => Experiment::Order5,
            "shor15" => Experiment::Shor15,
            "twobitcode" => Experiment::TwoBitCode,
            "custom-circuit" | "custom" => Experiment::Custom,
            _ => return Err(invalid(format!("unknown experiment '{s}'"))),
        })
    }
}

impl Experiment {
    /// Spin count the experiment is written for, if fixed.
    pub fn spins(self) -> Option<usize> {
        match self {
            Experiment::Dj | Experiment::TwoBitCode => Some(2),
            Experiment::Grover3 | Experiment::Loglab | Experiment::Cooling => Some(3),
            Experiment::Order5 => Some(5),
            Experiment::Shor15 => Some(7),
            Experiment::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Shor base.
    pub a: Option<u64>,
    /// Marked item as a bit string, spin 1 first.
    pub x0: Option<String>,
    pub iterations: Option<usize>,
    /// Deutsch-Jozsa function f1..f4.
    pub function: Option<String>,
    /// Order of the permutation for order finding.
    pub r: Option<usize>,
    pub theta: Option<f64>,
    /// Seconds of storage for the error detection code.
    pub storage_time: Option<f64>,
    /// Phase-flip probability; overrides storage_time.
    pub p: Option<f64>,
    /// Effective dephasing time for storage_time.
    pub t2: Option<f64>,
    /// Multiplies every T1 and T2.
    pub ratio: Option<f64>,
    /// thermal | pure
    pub input: Option<String>,
    pub circuit: Option<String>,
    /// FID points per spectrum.
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    molecule: String,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    params: Params,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub system: SpinSystem,
    pub mode: ExecMode,
    pub params: Params,
    /// Directory of the config file; relative paths resolve against it.
    pub base: PathBuf,
}

pub fn parse_mode(s: &str) -> CliResult<ExecMode> {
    ExecMode::from_str(s).map_err(CliError::from)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_file(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        let experiment: Experiment = raw.experiment.parse()?;
        let system = if molecule::bundled_source(&raw.molecule).is_some() {
            molecule::bundled(&raw.molecule)?
        } else {
            let p = base.join(&raw.molecule);
            molecule::parse_molecule(&read_file(&p)?)?
        };
        if let Some(n) = experiment.spins() {
            if system.n != n {
                return Err(invalid(format!("{} needs {n} spins, molecule has {}", raw.experiment, system.n)));
            }
        }
        let mode = parse_mode(raw.mode.as_deref().unwrap_or("ideal"))?;
        let cfg = ExperimentConfig { experiment, system, mode, params: raw.params, base: base.to_path_buf() };
        cfg.check_params()?;
        Ok(cfg)
    }

    fn check_params(&self) -> CliResult<()> {
        let p = &self.params;
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(invalid(format!("missing parameter '{what}'"))) };
        match self.experiment {
            Experiment::Dj => need(p.function.is_some(), "function"),
            Experiment::Grover3 | Experiment::Loglab => need(p.x0.is_some(), "x0"),
            Experiment::Shor15 => need(p.a.is_some(), "a"),
            Experiment::Order5 => need(p.r.is_some(), "r"),
            Experiment::Custom => need(p.circuit.is_some(), "circuit"),
            Experiment::TwoBitCode => need(p.p.is_some() || p.storage_time.is_some(), "storage_time or p"),
            Experiment::Cooling => Ok(()),
        }
    }

    /// Sets a swept parameter.
    pub fn set_param(&mut self, name: &str, value: f64) -> CliResult<()> {
        let p = &mut self.params;
        match name {
            "iterations" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(invalid(format!("iterations must be a non-negative integer, got {value}")));
                }
                p.iterations = Some(value as usize);
            }
            "storage_time" => {
                p.storage_time = Some(value);
                p.p = None;
            }
            "theta" => p.theta = Some(value),
            "ratio" => p.ratio = Some(value),
            _ => {
                return Err(invalid(format!(
                    "unknown sweep parameter '{name}' (iterations, storage_time, theta, ratio)"
                )))
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bundled_config() {
        let c = ExperimentConfig::parse(
            "experiment = 'shor15'\nmolecule = 'seven_spin'\n[params]\na = 7\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(c.experiment, Experiment::Shor15);
        assert_eq!(c.mode, ExecMode::Ideal);
        assert_eq!(c.params.a, Some(7));
    }

    #[test]
    fn rejects_bad_configs() {
        let e =
            ExperimentConfig::parse("experiment = 'shor15'\nmolecule = 'seven_spin'\n", Path::new(".")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = ExperimentConfig::parse(
            "experiment = 'dj'\nmolecule = 'seven_spin'\n[params]\nfunction='f1'\n",
            Path::new("."),
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = ExperimentConfig::parse("experiment = 'dj'\nmolecule = 'nope.toml'\n", Path::new("/nonexistent"))
            .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
