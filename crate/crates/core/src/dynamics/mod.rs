//! Hamilton's equations, trajectory integration and orbit closure.
//!
//! The flow is integrated in internal coordinates, where every Hamiltonian
//! in the crate is smooth on an open box. Two integrators are available:
//! Dormand–Prince 5(4) with step-size control and dense output (the
//! default), and the fixed-step implicit midpoint rule, which is symplectic.

mod closure;
mod midpoint;
mod rk;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use closure::{detect_closure, ClosureError, ClosureResult};

use crate::error::{DomainViolation, Error};
use crate::factorization;
use crate::observable::PhasePoint;
use crate::scalar::DualComplex;
use crate::systems::{self, Family, SystemSpec, DEFAULT_MARGIN};

/// `(∂H/∂p₁, ∂H/∂p₂, −∂H/∂q₁, −∂H/∂q₂)` from exact dual-number derivatives.
pub fn hamilton_rhs(spec: &SystemSpec, p: &PhasePoint) -> Result<[f64; 4], Error> {
    systems::domain_check_with(spec, p, 0.0)?;
    let base: [DualComplex; 4] = p.lift();
    let mut grad = [0.0; 4];
    for (k, g) in grad.iter_mut().enumerate() {
        let mut z = base;
        z[k] = DualComplex::variable(z[k].value.re);
        *g = systems::hamiltonian_expr(spec, &z)?.derivative.re;
    }
    Ok([grad[2], grad[3], -grad[0], -grad[1]])
}

/// Rough period of the motion, used to size default run lengths and
/// closure scans: `2π/ω` for the oscillators, `π/ω` for TTW.
pub fn characteristic_period(spec: &SystemSpec) -> f64 {
    match spec.family() {
        Family::Ttw => PI / spec.omega(),
        _ => 2.0 * PI / spec.omega(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dopri5,
    ImplicitMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step for the adaptive method; the step of the midpoint rule.
    pub max_step: f64,
    pub sample_dt: f64,
    pub method: Method,
    /// The run stops once the state comes within `margin / 2` of a domain
    /// boundary.
    pub margin: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            sample_dt: 0.01,
            method: Method::Dopri5,
            margin: DEFAULT_MARGIN,
        }
    }
}

impl Controls {
    fn validate(&self, t_end: f64) -> Result<(), &'static str> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(t_end) {
            return Err("t_end must be positive and finite");
        }
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err("tolerances must be positive");
        }
        if !positive(self.max_step) {
            return Err("max_step must be positive");
        }
        if !positive(self.sample_dt) {
            return Err("sample_dt must be positive");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err("margin must be non-negative");
        }
        Ok(())
    }
}

/// One recorded state with the conserved quantities evaluated on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub point: PhasePoint,
    pub h: f64,
    pub i2: f64,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl Sample {
    pub fn at(spec: &SystemSpec, t: f64, point: PhasePoint) -> Result<Self, Error> {
        let (x, y) = match factorization::higher_integral(spec, &point) {
            Ok(v) => (Some(v.x_real), Some(v.y_real)),
            Err(_) => (None, None),
        };
        Ok(Sample {
            t,
            point,
            h: systems::hamiltonian(spec, &point)?,
            i2: systems::second_integral(spec, &point)?,
            x,
            y,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: SystemSpec,
    pub initial: PhasePoint,
    pub t_end: f64,
    pub controls: Controls,
    pub samples: Vec<Sample>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum IntegrationFailure {
    #[error("invalid initial point: {0}")]
    InvalidStart(Error),
    #[error("invalid controls: {0}")]
    InvalidControls(&'static str),
    #[error("trajectory left the valid region at t = {}: {violation}", .last_good.t)]
    DomainBreach {
        partial: Box<Trajectory>,
        last_good: Sample,
        violation: DomainViolation,
    },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepFailure { partial: Box<Trajectory>, t: f64, h: f64 },
}

impl IntegrationFailure {
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrationFailure::DomainBreach { partial, .. } | IntegrationFailure::StepFailure { partial, .. } => {
                Some(partial)
            }
            _ => None,
        }
    }
}

/// Dense output over one accepted step `[t0, t0 + h]`.
pub(crate) trait Interpolant {
    fn eval(&self, t: f64) -> [f64; 4];
}

pub(crate) enum StepOutcome<I> {
    Accepted { y: [f64; 4], h_next: f64, dense: I },
    Rejected { h_next: f64 },
}

/// The part shared by both integrators: sample bookkeeping and guards.
pub(crate) struct Recorder<'a> {
    spec: &'a SystemSpec,
    sample_dt: f64,
    t_end: f64,
    next_index: u64,
    margin: f64,
    pub traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn sample_time(&self, k: u64) -> f64 {
        (k as f64 * self.sample_dt).min(self.t_end)
    }

    fn done(&self) -> bool {
        self.traj.samples.last().is_some_and(|s| s.t >= self.t_end)
    }

    fn guard(&self, p: &PhasePoint) -> Result<(), DomainViolation> {
        systems::domain_check_with(self.spec, p, self.margin / 2.0)
    }

    /// Records every sample time in `(t0, t1]` using `dense`.
    fn record<I: Interpolant>(&mut self, t1: f64, dense: &I) -> Result<(), Error> {
        loop {
            let t = self.sample_time(self.next_index);
            if t > t1 || self.done() {
                return Ok(());
            }
            let point = PhasePoint::from_array(dense.eval(t));
            self.traj.samples.push(Sample::at(self.spec, t, point)?);
            self.next_index += 1;
        }
    }

    fn breach(self, violation: DomainViolation) -> IntegrationFailure {
        let last_good = *self
            .traj
            .samples
            .last()
            .expect("the initial sample is recorded before stepping");
        IntegrationFailure::DomainBreach {
            partial: Box::new(self.traj),
            last_good,
            violation,
        }
    }
}

/// Integrates Hamilton's equations from `p0` (internal coordinates) to
/// `t_end`, sampling every `sample_dt` and at `t_end`.
pub fn integrate(
    spec: &SystemSpec,
    p0: &PhasePoint,
    t_end: f64,
    controls: &Controls,
) -> Result<Trajectory, IntegrationFailure> {
    controls.validate(t_end).map_err(IntegrationFailure::InvalidControls)?;
    let first = Sample::at(spec, 0.0, *p0)
        .and_then(|s| systems::domain_check_with(spec, p0, 0.0).map(|_| s).map_err(Error::from))
        .map_err(IntegrationFailure::InvalidStart)?;
    let rec = Recorder {
        spec,
        sample_dt: controls.sample_dt,
        t_end,
        next_index: 1,
        margin: controls.margin,
        traj: Trajectory {
            spec: *spec,
            initial: *p0,
            t_end,
            controls: *controls,
            samples: alloc::vec![first],
            accepted_steps: 0,
            rejected_steps: 0,
        },
    };
    if let Err(v) = rec.guard(p0) {
        return Err(rec.breach(v));
    }
    match controls.method {
        Method::Dopri5 => drive(rec, p0, t_end, controls, rk::Dopri5::new(spec, controls)),
        Method::ImplicitMidpoint => {
            let n = (t_end / controls.max_step).ceil().max(1.0);
            drive(rec, p0, t_end, controls, midpoint::Midpoint::new(spec, t_end / n))
        }
    }
}

pub(crate) trait Stepper {
    type Dense: Interpolant;
    fn initial_step(&mut self, y: &[f64; 4], t_end: f64) -> Result<f64, Error>;
    fn step(&mut self, t: f64, y: &[f64; 4], h: f64) -> StepOutcome<Self::Dense>;
    /// Smallest step below which the run is declared failed.
    fn min_step(&self, t: f64) -> f64;
}

fn drive<S: Stepper>(
    mut rec: Recorder<'_>,
    p0: &PhasePoint,
    t_end: f64,
    controls: &Controls,
    mut stepper: S,
) -> Result<Trajectory, IntegrationFailure> {
    let mut t = 0.0;
    let mut y = p0.to_array();
    let mut h = match stepper.initial_step(&y, t_end) {
        Ok(h) => h.min(controls.max_step),
        Err(_) => {
            return Err(IntegrationFailure::StepFailure {
                partial: Box::new(rec.traj),
                t,
                h: 0.0,
            })
        }
    };
    while !rec.done() {
        let remaining = t_end - t;
        // Snap onto t_end instead of leaving a sliver of a step.
        let h_try = if h >= remaining * (1.0 - 1e-12) { remaining } else { h };
        if !(h_try > stepper.min_step(t)) && h_try < remaining {
            return Err(IntegrationFailure::StepFailure {
                partial: Box::new(rec.traj),
                t,
                h: h_try,
            });
        }
        match stepper.step(t, &y, h_try) {
            StepOutcome::Rejected { h_next } => {
                rec.traj.rejected_steps += 1;
                h = h_next.min(controls.max_step);
            }
            StepOutcome::Accepted { y: y1, h_next, dense } => {
                let t1 = if h_try == remaining { t_end } else { t + h_try };
                if let Err(v) = rec.guard(&PhasePoint::from_array(y1)) {
                    return Err(rec.breach(v));
                }
                rec.traj.accepted_steps += 1;
                if rec.record(t1, &dense).is_err() {
                    // A sample strayed outside the region where the integrals
                    // are defined although both step ends are inside it.
                    let v = rec
                        .guard(&PhasePoint::from_array(dense.eval(rec.sample_time(rec.next_index))))
                        .err()
                        .unwrap_or(DomainViolation::NonFinite);
                    return Err(rec.breach(v));
                }
                t = t1;
                y = y1;
                h = h_next.min(controls.max_step);
            }
        }
    }
    Ok(rec.traj)
}

/// Drift of one conserved quantity along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub initial: f64,
    pub max_abs: f64,
    /// `max_abs` divided by the quantity's scale at `t = 0`.
    pub relative: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub h: Drift,
    pub i2: Drift,
    pub x: Option<Drift>,
    pub y: Option<Drift>,
}

fn drift_of(values: impl Iterator<Item = f64>, initial: f64, scale: f64) -> Drift {
    let max_abs = values.map(|v| (v - initial).abs()).fold(0.0, |m, d| {
        if d.is_nan() {
            f64::INFINITY
        } else {
            m.max(d)
        }
    });
    Drift {
        initial,
        max_abs,
        relative: if max_abs == 0.0 { 0.0 } else { max_abs / scale.max(f64::MIN_POSITIVE) },
    }
}

/// Maximum deviation of `H`, the second integral, `X` and `Y` from their
/// initial values. `H` and `I₂` are scaled by their own initial modulus;
/// `X` and `Y` are scaled by `|X⁺(0)|`, of which they are the real and
/// imaginary parts. Returns `None` for an empty trajectory.
pub fn drift_report(traj: &Trajectory) -> Option<DriftReport> {
    let s0 = traj.samples.first()?;
    let h = drift_of(traj.samples.iter().map(|s| s.h), s0.h, s0.h.abs());
    let i2 = drift_of(traj.samples.iter().map(|s| s.i2), s0.i2, s0.i2.abs());
    let scale = factorization::higher_integral(&traj.spec, &s0.point)
        .map(|v| v.x_plus.norm())
        .unwrap_or(0.0);
    let sym = |pick: fn(&Sample) -> Option<f64>| {
        pick(s0).map(|v0| drift_of(traj.samples.iter().map(|s| pick(s).unwrap_or(f64::NAN)), v0, scale))
    };
    Some(DriftReport {
        h,
        i2,
        x: sym(|s| s.x),
        y: sym(|s| s.y),
    })
}

/// Cubic Hermite interpolation between two states with known derivatives.
pub(crate) fn hermite(y0: &[f64; 4], f0: &[f64; 4], y1: &[f64; 4], f1: &[f64; 4], h: f64, s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    core::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

pub(crate) fn max_norm(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::RationalGamma;
    use approx::assert_relative_eq;

    fn euclid(m: u32, n: u32) -> SystemSpec {
        SystemSpec::euclidean(1.0, RationalGamma::new(m, n).unwrap()).unwrap()
    }

    #[test]
    fn rhs_restoring_force() {
        let rhs = hamilton_rhs(&euclid(1, 1), &PhasePoint::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(rhs, [0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn rhs_vanishes_at_equilibria() {
        let g = RationalGamma::new(3, 2).unwrap();
        for spec in [SystemSpec::euclidean(1.3, g).unwrap(), SystemSpec::sphere(0.7, g).unwrap()] {
            let rhs = hamilton_rhs(&spec, &PhasePoint::new(0.0, 0.0, 0.0, 0.0)).unwrap();
            assert!(rhs.iter().all(|v| v.abs() < 1e-15), "{rhs:?}");
        }
    }

    #[test]
    fn rhs_circular_ttw_orbit() {
        let spec = SystemSpec::ttw(1.0, RationalGamma::ONE, 1.0, 1.0).unwrap();
        let p = PhasePoint::new(2f64.sqrt(), PI / 4.0, 0.0, 0.0);
        let rhs = hamilton_rhs(&spec, &p).unwrap();
        assert!(rhs.iter().all(|v| v.abs() < 1e-14), "{rhs:?}");
        // Finite-difference check of the radial force slightly off the circle.
        let q = PhasePoint::new(1.3, 0.6, 0.2, -0.3);
        let rhs = hamilton_rhs(&spec, &q).unwrap();
        let e = 1e-6;
        let h = |r: f64| systems::hamiltonian(&spec, &PhasePoint { q1: r, ..q }).unwrap();
        assert_relative_eq!(rhs[2], -(h(1.3 + e) - h(1.3 - e)) / (2.0 * e), max_relative = 1e-8);
    }

    #[test]
    fn rhs_domain_error() {
        let spec = SystemSpec::sphere(1.0, RationalGamma::ONE).unwrap();
        assert!(matches!(
            hamilton_rhs(&spec, &PhasePoint::new(2.0, 0.0, 0.0, 0.0)),
            Err(Error::Domain(DomainViolation::XiBound { .. }))
        ));
    }

    #[test]
    fn harmonic_period() {
        let spec = euclid(1, 1);
        let p0 = PhasePoint::new(1.0, 0.0, 0.0, 0.0);
        for method in [Method::Dopri5, Method::ImplicitMidpoint] {
            let controls = Controls {
                method,
                max_step: if method == Method::Dopri5 { 0.1 } else { 1e-3 },
                ..Controls::default()
            };
            let traj = integrate(&spec, &p0, 2.0 * PI, &controls).unwrap();
            let last = traj.samples.last().unwrap();
            assert_eq!(last.t, 2.0 * PI);
            let tol = if method == Method::Dopri5 { 1e-8 } else { 1e-5 };
            assert!(last.point.distance(&p0) < tol, "{method:?} {:?}", last.point);
        }
    }

    #[test]
    fn samples_strictly_increasing() {
        let spec = euclid(2, 1);
        let traj = integrate(&spec, &PhasePoint::new(0.0, 0.0, 0.5, 1.0), 1.234, &Controls::default()).unwrap();
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(traj.samples.len(), 125);
        assert_eq!(traj.samples.last().unwrap().t, 1.234);
    }

    #[test]
    fn equilibrium_stays_put() {
        let spec = SystemSpec::sphere(1.0, RationalGamma::ONE).unwrap();
        let p0 = PhasePoint::new(0.0, 0.0, 0.0, 0.0);
        let traj = integrate(&spec, &p0, 5.0, &Controls::default()).unwrap();
        assert!(traj.samples.iter().all(|s| s.point == p0));
        let d = drift_report(&traj).unwrap();
        assert_eq!((d.h.max_abs, d.i2.max_abs), (0.0, 0.0));
        assert_eq!(d.x.unwrap().max_abs, 0.0);
    }

    #[test]
    fn breach_is_reported() {
        let spec = SystemSpec::sphere(1.0, RationalGamma::ONE).unwrap();
        let p0 = PhasePoint::new(PI / 2.0 - 0.01, 0.0, 5.0, 0.0);
        match integrate(&spec, &p0, 1.0, &Controls::default()) {
            Err(IntegrationFailure::DomainBreach { partial, last_good, .. }) => {
                assert_eq!(last_good.point, p0);
                assert_eq!(partial.samples.len(), 1);
            }
            other => panic!("expected breach, got {other:?}"),
        }
    }

    #[test]
    fn breach_mid_run() {
        let spec = SystemSpec::ttw(1.0, RationalGamma::ONE, 0.0, 0.3).unwrap();
        // Strong inward momentum toward θ = 0 where only β guards; α = 0
        // lets the angle run to π/2.
        let p0 = PhasePoint::new(1.0, 0.7, 0.0, 3.0);
        let err = integrate(&spec, &p0, 5.0, &Controls::default()).unwrap_err();
        let IntegrationFailure::DomainBreach { partial, last_good, .. } = err else {
            panic!("expected breach")
        };
        assert!(last_good.t > 0.0);
        assert!(partial.samples.iter().all(|s| systems::domain_check_with(&spec, &s.point, 0.025).is_ok()));
    }

    #[test]
    fn invalid_inputs() {
        let spec = euclid(1, 1);
        let p0 = PhasePoint::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            integrate(&spec, &p0, -1.0, &Controls::default()),
            Err(IntegrationFailure::InvalidControls(_))
        ));
        assert!(matches!(
            integrate(&spec, &PhasePoint::new(f64::NAN, 0.0, 0.0, 0.0), 1.0, &Controls::default()),
            Err(IntegrationFailure::InvalidStart(_))
        ));
    }

    #[test]
    fn coarse_run_drifts_more() {
        let spec = euclid(2, 1);
        let p0 = systems::to_internal(&spec, &PhasePoint::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        let run = |rel_tol| {
            let c = Controls {
                rel_tol,
                abs_tol: rel_tol * 1e-2,
                max_step: 10.0,
                ..Controls::default()
            };
            drift_report(&integrate(&spec, &p0, 2.0 * PI, &c).unwrap()).unwrap()
        };
        let (fine, coarse) = (run(1e-10), run(1e-3));
        assert!(fine.h.relative <= 1e-7 && fine.i2.relative <= 1e-7);
        assert!(fine.x.unwrap().relative <= 1e-7 && fine.y.unwrap().relative <= 1e-7);
        assert!(coarse.h.relative > fine.h.relative);
    }
}
