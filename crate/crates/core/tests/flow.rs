mod common;

use common::{all_specs, bounded_start, family_specs, gamma};
use core::f64::consts::PI;
use superfact_core::dynamics::{
    characteristic_period, detect_closure, drift_report, integrate, Controls, IntegrationFailure, Method,
};
use superfact_core::systems::{self, SystemSpec};
use superfact_core::PhasePoint;

#[test]
fn integrals_conserved_over_fifty_periods() {
    for spec in all_specs() {
        let p0 = bounded_start(&spec);
        let controls = Controls {
            sample_dt: 0.05,
            ..Controls::default()
        };
        let traj = integrate(&spec, &p0, 50.0 * characteristic_period(&spec), &controls).unwrap();
        let d = drift_report(&traj).unwrap();
        let (x, y) = (d.x.unwrap(), d.y.unwrap());
        assert!(d.h.relative <= 1e-6 && d.i2.relative <= 1e-6, "{}: {d:?}", spec.describe());
        assert!(x.relative <= 1e-5 && y.relative <= 1e-5, "{}: {d:?}", spec.describe());
    }
}

fn round_trip(spec: &SystemSpec, p0: &PhasePoint, t_end: f64, controls: &Controls) -> f64 {
    let forward = integrate(spec, p0, t_end, controls).unwrap();
    let turned = forward.samples.last().unwrap().point.reversed();
    let back = integrate(spec, &turned, t_end, controls).unwrap();
    let end = back.samples.last().unwrap().point.reversed();
    end.distance(p0) / (1.0 + p0.distance(&PhasePoint::new(0.0, 0.0, 0.0, 0.0)))
}

#[test]
fn time_reversal() {
    for spec in family_specs(gamma(3, 2)) {
        let p0 = bounded_start(&spec);
        let t_end = 2.0 * characteristic_period(&spec);
        let adaptive = round_trip(&spec, &p0, t_end, &Controls::default());
        assert!(adaptive <= 1e-6, "{} adaptive {adaptive:e}", spec.describe());
        let midpoint = Controls {
            method: Method::ImplicitMidpoint,
            max_step: 1e-3,
            ..Controls::default()
        };
        let symplectic = round_trip(&spec, &p0, t_end, &midpoint);
        assert!(symplectic <= 1e-8, "{} midpoint {symplectic:e}", spec.describe());
    }
}

#[test]
fn rational_orbits_close() {
    for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 3)] {
        for spec in family_specs(gamma(m, n)) {
            let p0 = bounded_start(&spec);
            let period = characteristic_period(&spec);
            let traj = integrate(&spec, &p0, 30.0 * period, &Controls::default()).unwrap();
            let c = detect_closure(&traj, 1e-4).unwrap();
            assert!(c.closed, "{}: {c:?}", spec.describe());
            assert!(c.period.unwrap() <= 30.0 * period);
        }
    }
}

#[test]
fn decoupled_oscillators_match_closed_form() {
    let spec = SystemSpec::euclidean(1.0, gamma(2, 1)).unwrap();
    let p0 = systems::to_internal(&spec, &PhasePoint::new(0.0, 0.0, 1.0, 1.0)).unwrap();
    let traj = integrate(&spec, &p0, 2.0 * PI, &Controls::default()).unwrap();
    for s in &traj.samples {
        let ext = systems::to_external(&spec, &s.point);
        let t = s.t;
        let exact = PhasePoint::new((2.0 * t).sin() / 2.0, t.sin(), (2.0 * t).cos(), t.cos());
        assert!(ext.distance(&exact) < 1e-8, "t = {t}");
    }
    let last = traj.samples.last().unwrap();
    assert!(last.point.distance(&p0) < 1e-7);
}

#[test]
fn trajectory_samples_stay_valid() {
    for spec in family_specs(gamma(2, 3)) {
        let traj = integrate(&spec, &bounded_start(&spec), 20.0, &Controls::default()).unwrap();
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(traj
            .samples
            .iter()
            .all(|s| systems::domain_check_with(&spec, &s.point, 0.0).is_ok()));
    }
}

#[test]
fn runs_are_reproducible() {
    let spec = SystemSpec::ttw(1.0, gamma(2, 3), 1.0, 2.0).unwrap();
    let a = integrate(&spec, &bounded_start(&spec), 15.0, &Controls::default()).unwrap();
    let b = integrate(&spec, &bounded_start(&spec), 15.0, &Controls::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sphere_edge_breach() {
    let spec = SystemSpec::sphere(1.0, gamma(1, 1)).unwrap();
    let p0 = PhasePoint::new(PI / 2.0 - 0.01, 0.0, 3.0, 0.0);
    assert!(matches!(
        integrate(&spec, &p0, 1.0, &Controls::default()),
        Err(IntegrationFailure::DomainBreach { .. })
    ));
}
