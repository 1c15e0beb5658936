use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use superfact_core::dynamics::{characteristic_period, Controls, Method};
use superfact_core::levelset::LevelTargets;
use superfact_core::systems::DEFAULT_MARGIN;
use superfact_core::{Family, SystemSpec};

use crate::catalog;
use crate::commands::{execute_recorded, Status};
use crate::config::{
    parse_pair, parse_symmetry, ConfigError, IntegrateConfig, IntegrationConfig, Plane, RunConfig, SystemFlags,
    TraceConfig, VerifyConfig, DEFAULT_CLOSURE_EPS, DEFAULT_INDEPENDENCE_POINTS, DEFAULT_PERIODS, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
use crate::manifest::RunManifest;

/// Factorized superintegrable systems: identity checks, trajectories and
/// level-set tracing.
#[derive(Debug, Parser)]
#[command(name = "superfact", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the families, their parameters, domains and special cases.
    Catalog {
        #[arg(long)]
        family: Option<String>,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Run the identity suite and the independence check.
    Verify(VerifyArgs),
    /// Integrate Hamilton's equations from an initial point.
    Integrate(IntegrateArgs),
    /// Find a point on a level set of (H, I2, X or Y) and integrate from it.
    Trace(TraceArgs),
    /// Re-run the configuration recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// euclidean, sphere or ttw.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    /// Anisotropy as m/n, or a bare integer m.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// System spec as JSON; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SystemArgs {
    fn resolve(&self) -> Result<SystemSpec, ConfigError> {
        SystemFlags {
            system: self.system.clone(),
            omega: self.omega,
            gamma: self.gamma.clone(),
            alpha: self.alpha,
            beta: self.beta,
            config: self.config.clone(),
        }
        .resolve()
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, env = "SUPERFACT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Distance kept from the singular boundaries when sampling.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Points used for the Jacobian-rank check.
    #[arg(long, default_value_t = DEFAULT_INDEPENDENCE_POINTS)]
    rank_points: usize,
    /// Output prefix; the report goes to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dopri5,
    Midpoint,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// End time; defaults to --periods characteristic periods.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PERIODS)]
    periods: f64,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = 0.1)]
    max_step: f64,
    #[arg(long, default_value_t = 0.01)]
    sample_dt: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Dopri5)]
    method: MethodArg,
    /// Runs stop within margin/2 of a domain boundary.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Add the external angle phi = theta/gamma as a column (TTW).
    #[arg(long)]
    external_angle: bool,
    /// Return distance below which an orbit counts as closed.
    #[arg(long, default_value_t = DEFAULT_CLOSURE_EPS)]
    closure_eps: f64,
}

impl FlowArgs {
    fn resolve(&self, spec: &SystemSpec) -> IntegrationConfig {
        IntegrationConfig {
            t_end: self.t_end.unwrap_or(self.periods * characteristic_period(spec)),
            controls: Controls {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
                max_step: self.max_step,
                sample_dt: self.sample_dt,
                method: match self.method {
                    MethodArg::Dopri5 => Method::Dopri5,
                    MethodArg::Midpoint => Method::ImplicitMidpoint,
                },
                margin: self.margin,
            },
            external_angle: self.external_angle,
            closure_eps: self.closure_eps,
        }
    }
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial position `a,b`: (x, y), or (r, phi) for ttw.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    q0: [f64; 2],
    /// Initial momenta `c,d`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    p0: [f64; 2],
    #[command(flatten)]
    flow: FlowArgs,
    /// Output prefix for .csv, .report.json and .manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    energy: f64,
    /// Level of the quadratic integral.
    #[arg(long, allow_hyphen_values = true)]
    second: f64,
    /// `X=c` or `Y=c`.
    #[arg(long, value_parser = parse_symmetry, allow_hyphen_values = true)]
    symmetry: (superfact_core::verification::SymmetryChoice, f64),
    #[arg(long, value_enum)]
    plane: Option<Plane>,
    /// Starts per axis of the root-finding grid.
    #[arg(long, default_value_t = 4)]
    grid: usize,
    #[command(flatten)]
    flow: FlowArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    manifest: PathBuf,
    /// New output prefix; defaults to the recorded one.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn to_config(command: &Command) -> Result<RunConfig, ConfigError> {
    Ok(match command {
        Command::Verify(a) => RunConfig::Verify(VerifyConfig {
            spec: a.system.resolve()?,
            samples: a.samples,
            seed: a.seed,
            margin: a.margin,
            independence_points: a.rank_points,
            out: a.out.clone(),
        }),
        Command::Integrate(a) => {
            let spec = a.system.resolve()?;
            RunConfig::Integrate(IntegrateConfig {
                spec,
                q0: a.q0,
                p0: a.p0,
                integration: a.flow.resolve(&spec),
                out: a.out.clone(),
            })
        }
        Command::Trace(a) => {
            let spec = a.system.resolve()?;
            RunConfig::Trace(TraceConfig {
                spec,
                targets: LevelTargets {
                    energy: a.energy,
                    second: a.second,
                    symmetry: a.symmetry.0,
                    symmetry_value: a.symmetry.1,
                },
                grid: a.grid,
                plane: a.plane.unwrap_or(match spec.family() {
                    Family::Ttw => Plane::Rtheta,
                    _ => Plane::Xy,
                }),
                integration: a.flow.resolve(&spec),
                out: a.out.clone(),
            })
        }
        Command::Catalog { .. } | Command::Replay(_) => unreachable!("handled before resolution"),
    })
}

fn catalog(family: &Option<String>, json: bool) -> anyhow::Result<i32> {
    let filter = match family {
        Some(f) => match f.parse::<Family>() {
            Ok(f) => Some(f),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(Status::ConfigError.exit_code());
            }
        },
        None => None,
    };
    let entries = catalog::entries(filter);
    if json {
        println!("{}", serde_json::to_string_pretty(&entries)?);
    } else {
        print!("{}", catalog::render(&entries));
    }
    Ok(0)
}

fn run_config(command: &str, config: &RunConfig) -> anyhow::Result<i32> {
    let outcome = execute_recorded(command, config)?;
    match outcome.status {
        Status::Ok => eprintln!("{}", outcome.message),
        s => eprintln!("{}: {}", s.name(), outcome.message),
    }
    for p in &outcome.outputs {
        eprintln!("wrote {}", p.display());
    }
    Ok(outcome.status.exit_code())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let line = args.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ");
    let result = match &cli.command {
        Command::Catalog { family, json } => catalog(family, *json),
        Command::Replay(a) => match RunManifest::load(&a.manifest) {
            Ok(m) => {
                let mut config = m.config;
                if let Some(out) = &a.out {
                    config.set_out(out.clone());
                }
                run_config(&line, &config)
            }
            Err(e) => {
                eprintln!("error: reading {}: {e}", a.manifest.display());
                return Status::ConfigError.exit_code();
            }
        },
        command => match to_config(command) {
            Ok(config) => run_config(&line, &config),
            Err(e) => {
                eprintln!("error: {e}");
                return Status::ConfigError.exit_code();
            }
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::ConfigError.exit_code()
        }
    }
}
