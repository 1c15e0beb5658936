//! Execution of resolved run configurations.

use std::path::{Path, PathBuf};

use anyhow::Context;
use superfact_core::dynamics::{self, detect_closure, drift_report, IntegrationFailure, Trajectory};
use superfact_core::levelset;
use superfact_core::systems::{self, DomainBox};
use superfact_core::verification::{self, SymmetryChoice};
use superfact_core::{factorization, Complex64, PhasePoint, SystemSpec};

use crate::config::{output_path, IntegrateConfig, IntegrationConfig, RunConfig, TraceConfig, VerifyConfig};
use crate::manifest::{timestamp, RunManifest, TOOL_VERSION};
use crate::output::{write_csv_file, write_json, Columns};
use crate::report::{Breach, FlowReport, Independence, LevelPoint, TraceReport, VerifyReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    IdentityFailure,
    ConfigError,
    DomainBreach,
    StepFailure,
    NoSolution,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::IdentityFailure => 1,
            Status::ConfigError => 2,
            Status::DomainBreach => 3,
            Status::StepFailure => 4,
            Status::NoSolution => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::IdentityFailure => "identity_failure",
            Status::ConfigError => "config_error",
            Status::DomainBreach => "domain_breach",
            Status::StepFailure => "step_failure",
            Status::NoSolution => "no_solution",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub outputs: Vec<PathBuf>,
    /// One human-readable line for the terminal.
    pub message: String,
    pub breach: Option<String>,
}

impl Outcome {
    fn config_error(message: impl Into<String>) -> Self {
        Outcome {
            status: Status::ConfigError,
            outputs: Vec::new(),
            message: message.into(),
            breach: None,
        }
    }
}

pub fn execute(config: &RunConfig) -> anyhow::Result<Outcome> {
    match config {
        RunConfig::Verify(c) => verify(c),
        RunConfig::Integrate(c) => integrate(c),
        RunConfig::Trace(c) => trace(c),
    }
}

/// Runs `config` and, when it has an output prefix, writes the manifest.
pub fn execute_recorded(command: &str, config: &RunConfig) -> anyhow::Result<Outcome> {
    let started_at = timestamp();
    let mut outcome = execute(config)?;
    if let Some(out) = config.out() {
        if outcome.status != Status::ConfigError || !outcome.outputs.is_empty() {
            let path = output_path(out, "manifest.json");
            let manifest = RunManifest {
                command: command.to_string(),
                config: config.clone(),
                seed: config.seed(),
                tool_version: TOOL_VERSION.to_string(),
                started_at,
                finished_at: timestamp(),
                outputs: outcome.outputs.clone(),
                status: outcome.status.name().to_string(),
                exit_code: outcome.status.exit_code(),
                breach: outcome.breach.clone(),
            };
            write_json(&path, &manifest).with_context(|| format!("writing {}", path.display()))?;
            outcome.outputs.push(path);
        }
    }
    Ok(outcome)
}

fn verify(c: &VerifyConfig) -> anyhow::Result<Outcome> {
    if !(c.margin >= 0.0 && c.margin.is_finite()) {
        return Ok(Outcome::config_error("margin must be non-negative"));
    }
    let bx = DomainBox::with_margin(&c.spec, c.margin);
    let points = match verification::sample_points(&c.spec, &bx, c.samples, c.seed) {
        Ok(p) => p,
        Err(e) => return Ok(Outcome::config_error(e.to_string())),
    };
    let suite = verification::standard_suite(&c.spec);
    let bracket = verification::run_suite(&c.spec, &suite, &points);
    let rank_points = &points[..c.independence_points.min(points.len())];
    let independence = Independence::new(
        verification::independence_report(&c.spec, rank_points, SymmetryChoice::X),
        verification::independence_report(&c.spec, rank_points, SymmetryChoice::Y),
    );
    let report = VerifyReport::new(c.seed, points.len(), bx, &bracket, independence);

    let mut outputs = Vec::new();
    match &c.out {
        Some(out) => {
            let path = output_path(out, "report.json");
            write_json(&path, &report).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(path);
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    let s = &report.summary;
    let message = format!(
        "{}: {}/{} identities pass, max residual {}, full rank (X) {:.3}, (Y) {:.3}",
        c.spec.describe(),
        s.identities - s.failed.len(),
        s.identities,
        s.max_residual.map_or("non-finite".to_string(), |r| format!("{r:.3e}")),
        report.independence.with_x.full_rank_fraction,
        report.independence.with_y.full_rank_fraction,
    );
    Ok(Outcome {
        status: if s.pass { Status::Ok } else { Status::IdentityFailure },
        outputs,
        message,
        breach: None,
    })
}

fn integrate(c: &IntegrateConfig) -> anyhow::Result<Outcome> {
    let external = PhasePoint::new(c.q0[0], c.q0[1], c.p0[0], c.p0[1]);
    // Only points off the strict domain are configuration errors; a start
    // inside the guard band is reported as a breach by the integrator.
    let z = systems::to_internal_coords(&c.spec, &external.to_array().map(|v| Complex64::new(v, 0.0)));
    let start = PhasePoint::from_array(z.map(|v| v.re));
    if let Err(v) = systems::domain_check_with(&c.spec, &start, 0.0) {
        return Ok(Outcome::config_error(format!("initial point outside the domain: {v}")));
    }
    let cols = Columns {
        external_angle: c.integration.external_angle,
        plane: None,
    };
    let (outcome, report) = flow(&c.spec, start, &c.integration, cols, &c.out)?;
    if let Some(report) = report {
        write_report(&c.out, &report, outcome)
    } else {
        Ok(outcome)
    }
}

fn trace(c: &TraceConfig) -> anyhow::Result<Outcome> {
    let bx = DomainBox::with_margin(&c.spec, c.integration.controls.margin);
    let mut report = TraceReport {
        spec: c.spec,
        targets: c.targets,
        grid: c.grid,
        status: "found".into(),
        best_residual: None,
        point: None,
        flow: None,
    };
    let start = match levelset::trace(&c.spec, &c.targets, &bx, c.grid) {
        Ok(p) => p,
        Err(e) => {
            report.status = "no_solution".into();
            report.best_residual = e.best_residual.is_finite().then_some(e.best_residual);
            let outcome = Outcome {
                status: Status::NoSolution,
                outputs: Vec::new(),
                message: e.to_string(),
                breach: None,
            };
            return write_report(&c.out, &report, outcome);
        }
    };
    let pair = factorization::higher_integral(&c.spec, &start)?;
    report.point = Some(LevelPoint {
        internal: start,
        external: systems::to_external(&c.spec, &start),
        energy: systems::hamiltonian(&c.spec, &start)?,
        second: systems::second_integral(&c.spec, &start)?,
        symmetry_value: match c.targets.symmetry {
            SymmetryChoice::X => pair.x_real,
            SymmetryChoice::Y => pair.y_real,
        },
    });
    let cols = Columns {
        external_angle: c.integration.external_angle,
        plane: Some(c.plane),
    };
    let (outcome, flow_report) = flow(&c.spec, start, &c.integration, cols, &c.out)?;
    report.flow = flow_report;
    write_report(&c.out, &report, outcome)
}

fn write_report<T: serde::Serialize>(out: &Path, report: &T, mut outcome: Outcome) -> anyhow::Result<Outcome> {
    let path = output_path(out, "report.json");
    write_json(&path, report).with_context(|| format!("writing {}", path.display()))?;
    outcome.outputs.push(path);
    Ok(outcome)
}

/// Integrates from an internal start, writes the (possibly partial) CSV and
/// summarizes the run. Returns no report when the run never started.
fn flow(
    spec: &SystemSpec,
    start: PhasePoint,
    cfg: &IntegrationConfig,
    cols: Columns,
    out: &Path,
) -> anyhow::Result<(Outcome, Option<FlowReport>)> {
    let result = dynamics::integrate(spec, &start, cfg.t_end, &cfg.controls);
    let (traj, status, message, breach): (&Trajectory, _, _, _) = match &result {
        Ok(traj) => (traj, Status::Ok, None, None),
        Err(e @ IntegrationFailure::DomainBreach { partial, last_good, violation }) => (
            partial.as_ref(),
            Status::DomainBreach,
            Some(e.to_string()),
            Some(Breach {
                t: last_good.t,
                last_good: last_good.point,
                violation: *violation,
            }),
        ),
        Err(e @ IntegrationFailure::StepFailure { partial, .. }) => {
            (partial.as_ref(), Status::StepFailure, Some(e.to_string()), None)
        }
        Err(e) => return Ok((Outcome::config_error(e.to_string()), None)),
    };

    let csv = output_path(out, "csv");
    write_csv_file(&csv, spec, &traj.samples, cols).with_context(|| format!("writing {}", csv.display()))?;

    let closure = match status {
        Status::Ok => detect_closure(traj, cfg.closure_eps).ok(),
        _ => None,
    };
    let final_time = traj.samples.last().map_or(0.0, |s| s.t);
    let report = FlowReport {
        spec: *spec,
        initial_internal: start,
        initial_external: systems::to_external(spec, &start),
        t_end: cfg.t_end,
        controls: cfg.controls,
        status: match status {
            Status::Ok => "completed",
            Status::DomainBreach => "domain_breach",
            _ => "step_failure",
        }
        .into(),
        message: message.clone(),
        breach,
        samples: traj.samples.len(),
        final_time,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        drift: drift_report(traj),
        closure_eps: cfg.closure_eps,
        closure,
    };
    let text = match (&message, &report.drift) {
        (Some(m), _) => m.clone(),
        (None, Some(d)) => format!(
            "{} samples to t = {final_time}, relative drift H {:.2e}, I2 {:.2e}{}",
            report.samples,
            d.h.relative,
            d.i2.relative,
            match closure {
                Some(c) if c.closed => format!(", closes at t = {:.10}", c.period.unwrap_or(f64::NAN)),
                _ => String::new(),
            }
        ),
        (None, None) => format!("{} samples", report.samples),
    };
    let outcome = Outcome {
        status,
        outputs: vec![csv],
        message: text,
        breach: if status == Status::DomainBreach { message } else { None },
    };
    Ok((outcome, Some(report)))
}
