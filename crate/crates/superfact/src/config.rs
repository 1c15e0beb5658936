//! Resolved, serializable run configurations.
//!
//! Everything a command needs is captured in a [`RunConfig`] before any
//! work starts. The same value is stored in the run manifest, so a replay
//! goes through exactly the code path of the original run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use superfact_core::dynamics::Controls;
use superfact_core::levelset::LevelTargets;
use superfact_core::{Family, RationalGamma, SystemSpec};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_INDEPENDENCE_POINTS: usize = 200;
pub const DEFAULT_CLOSURE_EPS: f64 = 1e-4;
pub const DEFAULT_PERIODS: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Spec(#[from] superfact_core::Error),
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

/// System selection as given on the command line, before validation.
#[derive(Clone, Debug, Default)]
pub struct SystemFlags {
    pub system: Option<String>,
    pub omega: Option<f64>,
    pub gamma: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub config: Option<PathBuf>,
}

impl SystemFlags {
    /// A config file gives the base spec; explicit flags override its fields.
    pub fn resolve(&self) -> Result<SystemSpec, ConfigError> {
        let base = match &self.config {
            Some(path) => Some(read_spec(path)?),
            None => None,
        };
        let family = match (&self.system, &base) {
            (Some(s), _) => s.parse::<Family>()?,
            (None, Some(b)) => b.family(),
            (None, None) => return Err(ConfigError::Invalid("either --system or --config is required".into())),
        };
        let omega = self.omega.or(base.map(|b| b.omega())).unwrap_or(1.0);
        let gamma = match (&self.gamma, &base) {
            (Some(g), _) => g.parse::<RationalGamma>()?,
            (None, Some(b)) => b.gamma(),
            (None, None) => RationalGamma::ONE,
        };
        let inherit = base.filter(|b| b.family() == Family::Ttw && family == Family::Ttw);
        let (alpha, beta) = if family == Family::Ttw {
            (
                self.alpha.or(inherit.map(|b| b.alpha())),
                self.beta.or(inherit.map(|b| b.beta())),
            )
        } else {
            (self.alpha, self.beta)
        };
        Ok(SystemSpec::new(family, omega, gamma, alpha, beta)?)
    }
}

pub fn read_spec(path: &Path) -> Result<SystemSpec, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `a,b`.
pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([num(a)?, num(b)?])
}

/// Parses `X=c` or `Y=c`.
pub fn parse_symmetry(s: &str) -> Result<(superfact_core::verification::SymmetryChoice, f64), String> {
    use superfact_core::verification::SymmetryChoice;
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected X=value or Y=value, got `{s}`"))?;
    let which = match name.trim() {
        "X" | "x" => SymmetryChoice::X,
        "Y" | "y" => SymmetryChoice::Y,
        other => return Err(format!("unknown symmetry `{other}`, expected X or Y")),
    };
    let v = value.trim().parse::<f64>().map_err(|e| format!("`{value}`: {e}"))?;
    Ok((which, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    Rtheta,
    Xy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub spec: SystemSpec,
    pub samples: usize,
    pub seed: u64,
    pub margin: f64,
    pub independence_points: usize,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub t_end: f64,
    pub controls: Controls,
    pub external_angle: bool,
    pub closure_eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateConfig {
    pub spec: SystemSpec,
    /// External coordinates `(x, y)` or `(r, φ)` for TTW.
    pub q0: [f64; 2],
    pub p0: [f64; 2],
    pub integration: IntegrationConfig,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub spec: SystemSpec,
    pub targets: LevelTargets,
    pub grid: usize,
    pub plane: Plane,
    pub integration: IntegrationConfig,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Verify(VerifyConfig),
    Integrate(IntegrateConfig),
    Trace(TraceConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Verify(_) => "verify",
            RunConfig::Integrate(_) => "integrate",
            RunConfig::Trace(_) => "trace",
        }
    }

    pub fn spec(&self) -> &SystemSpec {
        match self {
            RunConfig::Verify(c) => &c.spec,
            RunConfig::Integrate(c) => &c.spec,
            RunConfig::Trace(c) => &c.spec,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Verify(c) => Some(c.seed),
            _ => None,
        }
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            RunConfig::Verify(c) => c.out.as_deref(),
            RunConfig::Integrate(c) => Some(&c.out),
            RunConfig::Trace(c) => Some(&c.out),
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            RunConfig::Verify(c) => c.out = Some(out),
            RunConfig::Integrate(c) => c.out = out,
            RunConfig::Trace(c) => c.out = out,
        }
    }
}

/// `<prefix>.<ext>`, keeping any dots already in the prefix.
pub fn output_path(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
