//! JSON report schemas.

use serde::{Deserialize, Serialize};
use superfact_core::dynamics::{ClosureResult, Controls, DriftReport};
use superfact_core::levelset::LevelTargets;
use superfact_core::verification::{BracketReport, IdentityOutcome, RankStatistics};
use superfact_core::{DomainBox, DomainViolation, PhasePoint, SystemSpec};

/// Minimum fraction of full-rank points for the independence check.
pub const INDEPENDENCE_THRESHOLD: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub label: String,
    pub samples: usize,
    /// `null` when some residual was not finite.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub failed_points: usize,
    pub evaluation_errors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

impl From<&IdentityOutcome> for IdentityRecord {
    fn from(o: &IdentityOutcome) -> Self {
        IdentityRecord {
            label: o.label.clone(),
            samples: o.samples,
            max_residual: o.max_residual.is_finite().then_some(o.max_residual),
            tolerance: o.tolerance,
            pass: o.pass,
            failed_points: o.failed_points,
            evaluation_errors: o.evaluation_errors,
            first_error: o.first_error.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Independence {
    pub threshold: f64,
    pub with_x: RankStatistics,
    pub with_y: RankStatistics,
    pub pass: bool,
}

impl Independence {
    pub fn new(with_x: RankStatistics, with_y: RankStatistics) -> Self {
        let pass = [&with_x, &with_y]
            .iter()
            .all(|s| s.points > 0 && s.full_rank_fraction >= INDEPENDENCE_THRESHOLD);
        Independence {
            threshold: INDEPENDENCE_THRESHOLD,
            with_x,
            with_y,
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: bool,
    pub identities: usize,
    pub failed: Vec<String>,
    pub max_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub spec: SystemSpec,
    pub seed: u64,
    pub samples: usize,
    pub sampler_box: DomainBox,
    pub identities: Vec<IdentityRecord>,
    pub independence: Independence,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn new(seed: u64, samples: usize, sampler_box: DomainBox, bracket: &BracketReport, independence: Independence) -> Self {
        let identities: Vec<IdentityRecord> = bracket.identities.iter().map(IdentityRecord::from).collect();
        let failed: Vec<String> = identities.iter().filter(|r| !r.pass).map(|r| r.label.clone()).collect();
        let max_residual = identities
            .iter()
            .map(|r| r.max_residual)
            .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)));
        VerifyReport {
            spec: bracket.spec,
            seed,
            samples,
            sampler_box,
            summary: Summary {
                pass: failed.is_empty() && independence.pass,
                identities: identities.len(),
                failed,
                max_residual,
            },
            identities,
            independence,
        }
    }

    /// Internal consistency of a (possibly re-read) report.
    pub fn validate(&self) -> Result<(), String> {
        if self.identities.is_empty() {
            return Err("report lists no identities".into());
        }
        if self.summary.identities != self.identities.len() {
            return Err("summary identity count disagrees with the list".into());
        }
        let mut labels: Vec<&str> = self.identities.iter().map(|r| r.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate identity labels".into());
        }
        for r in &self.identities {
            if r.samples != self.samples {
                return Err(format!("{} evaluated on {} points, expected {}", r.label, r.samples, self.samples));
            }
            let within = r.max_residual.is_some_and(|m| m <= r.tolerance);
            let expected = within && r.failed_points == 0 && r.evaluation_errors == 0;
            if r.pass != expected {
                return Err(format!("{} pass flag inconsistent with its residuals", r.label));
            }
        }
        let failed: Vec<&str> = self.identities.iter().filter(|r| !r.pass).map(|r| r.label.as_str()).collect();
        if failed != self.summary.failed.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err("summary failure list disagrees with the identities".into());
        }
        if self.summary.pass != (failed.is_empty() && self.independence.pass) {
            return Err("summary pass flag inconsistent".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breach {
    pub t: f64,
    pub last_good: PhasePoint,
    pub violation: DomainViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub spec: SystemSpec,
    pub initial_internal: PhasePoint,
    pub initial_external: PhasePoint,
    pub t_end: f64,
    pub controls: Controls,
    /// `completed`, `domain_breach` or `step_failure`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breach: Option<Breach>,
    pub samples: usize,
    pub final_time: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub drift: Option<DriftReport>,
    pub closure_eps: f64,
    pub closure: Option<ClosureResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub internal: PhasePoint,
    pub external: PhasePoint,
    pub energy: f64,
    pub second: f64,
    pub symmetry_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub spec: SystemSpec,
    pub targets: LevelTargets,
    pub grid: usize,
    /// `found` or `no_solution`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_residual: Option<f64>,
    pub point: Option<LevelPoint>,
    pub flow: Option<FlowReport>,
}
