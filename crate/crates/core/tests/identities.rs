mod common;

use common::{all_specs, family_specs, gamma, GAMMAS};
use superfact_core::factorization::{self, FactorFn};
use superfact_core::observable::Coord;
use superfact_core::systems::{self, DomainBox, SystemFn, SystemSpec};
use superfact_core::verification::{
    certify, independence_report, rank_statistics, run_suite, sample_points, standard_suite, SymmetryChoice,
};
use superfact_core::{Observable, PhasePoint};

#[test]
fn every_suite_passes_on_1000_points() {
    for spec in all_specs() {
        let report = certify(&spec, &DomainBox::for_spec(&spec), 1000, 42).unwrap();
        for o in &report.identities {
            assert_eq!(o.samples, 1000);
            assert!(
                o.pass && o.max_residual <= 1e-9,
                "{}: {} residual {:e} (tol {:e}, eval errors {})",
                spec.describe(),
                o.label,
                o.max_residual,
                o.tolerance,
                o.evaluation_errors
            );
        }
        assert!(report.pass);
        assert_eq!(report.seed, Some(42));
    }
}

#[test]
fn symmetry_holds_for_large_rational_orders() {
    for g in [gamma(5, 2), gamma(7, 5), gamma(141, 100)] {
        for spec in family_specs(g) {
            let suite: Vec<_> = standard_suite(&spec)
                .into_iter()
                .filter(|id| id.label.contains(".symmetry.HX"))
                .collect();
            assert_eq!(suite.len(), 3);
            let pts = sample_points(&spec, &DomainBox::for_spec(&spec), 1000, 5).unwrap();
            let report = run_suite(&spec, &suite, &pts);
            for o in &report.identities {
                assert!(o.pass && o.max_residual <= 1e-8, "{} {} {:e}", spec.describe(), o.label, o.max_residual);
            }
        }
    }
}

#[test]
fn sign_flip_breaks_each_identity() {
    for spec in family_specs(gamma(3, 2)) {
        let pts = sample_points(&spec, &DomainBox::for_spec(&spec), 300, 11).unwrap();
        let suite = standard_suite(&spec);
        let mut mutated = 0;
        for id in suite.iter().filter(|id| !id.rhs_is_zero()) {
            let report = run_suite(&spec, &[id.negated()], &pts);
            let o = &report.identities[0];
            assert!(
                o.failed_points as f64 >= 0.99 * pts.len() as f64,
                "{}: negated {} failed at only {} points",
                spec.describe(),
                id.label,
                o.failed_points
            );
            mutated += 1;
        }
        assert!(mutated >= 10);
    }
}

#[test]
fn reports_are_deterministic() {
    for spec in family_specs(gamma(2, 3)) {
        let bx = DomainBox::for_spec(&spec);
        let a = certify(&spec, &bx, 200, 99).unwrap();
        let b = certify(&spec, &bx, 200, 99).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.identities.iter().zip(&b.identities) {
            assert_eq!(x.max_residual.to_bits(), y.max_residual.to_bits());
        }
    }
}

#[test]
fn integrals_are_functionally_independent() {
    for spec in all_specs() {
        let pts = sample_points(&spec, &DomainBox::for_spec(&spec), 200, 3).unwrap();
        for which in [SymmetryChoice::X, SymmetryChoice::Y] {
            let stats = independence_report(&spec, &pts, which);
            assert!(
                stats.full_rank_fraction >= 0.99,
                "{} {:?}: {:?}",
                spec.describe(),
                which,
                stats.histogram
            );
        }
    }
}

#[test]
fn dependent_triple_has_rank_two() {
    for &(m, n) in &GAMMAS {
        let spec = SystemSpec::euclidean(1.0, gamma(m, n)).unwrap();
        let pts = sample_points(&spec, &DomainBox::for_spec(&spec), 200, 3).unwrap();
        let fs = [
            systems::observable(&spec, SystemFn::Hamiltonian),
            systems::observable(&spec, SystemFn::SecondIntegral),
            systems::observable(&spec, SystemFn::YSector),
        ];
        let stats = rank_statistics(&fs, &pts, 1e-8);
        assert_eq!(stats.histogram[2], 200, "{:?}", stats.histogram);
    }
}

#[test]
fn isotropic_reductions() {
    let w = 1.3;
    let spec = SystemSpec::euclidean(w, gamma(1, 1)).unwrap();
    let pts = sample_points(&spec, &DomainBox::for_spec(&spec), 1000, 8).unwrap();
    let x = factorization::observable(&spec, FactorFn::X);
    let y = factorization::observable(&spec, FactorFn::Y);
    for p in &pts {
        let PhasePoint { q1, q2, p1, p2 } = *p;
        let fradkin = -(p1 * p2 + w * w * q1 * q2) / 2.0;
        let angular = -(w / 2.0) * (q1 * p2 - q2 * p1);
        let xv = x.real_value(p, 1e-12).unwrap();
        let yv = y.real_value(p, 1e-12).unwrap();
        assert!((xv - fradkin).abs() <= 1e-12 * (1.0 + fradkin.abs()), "{p:?}");
        assert!((yv - angular).abs() <= 1e-12 * (1.0 + angular.abs()), "{p:?}");
    }
}

#[test]
fn higgs_oscillator_potential() {
    let w = 0.8;
    let spec = SystemSpec::sphere(w, gamma(1, 1)).unwrap();
    let pts = sample_points(&spec, &DomainBox::for_spec(&spec), 1000, 8).unwrap();
    for p in &pts {
        let at_rest = PhasePoint::new(p.q1, p.q2, 0.0, 0.0);
        let v = systems::external_hamiltonian(&spec, &at_rest).unwrap();
        let (r, _) = systems::geodesic_polar(p.q1, p.q2);
        assert!((r.cos() - p.q1.cos() * p.q2.cos()).abs() < 1e-14);
        let higgs = 0.5 * w * w * r.tan().powi(2);
        assert!((v - higgs).abs() <= 1e-12 * (1.0 + higgs.abs()), "{p:?}: {v} vs {higgs}");
    }
}

#[test]
fn coordinate_map_is_canonical() {
    for spec in all_specs() {
        let s = spec;
        let internal = |c: Coord| {
            Observable::coordinate(c).pulled_back(format!("{c:?}"), move |z| systems::to_internal_coords(&s, z))
        };
        let ext_pts: Vec<PhasePoint> = sample_points(&spec, &DomainBox::for_spec(&spec), 50, 1)
            .unwrap()
            .iter()
            .map(|p| systems::to_external(&spec, p))
            .collect();
        for p in &ext_pts {
            for a in Coord::ALL {
                for b in Coord::ALL {
                    let v = superfact_core::observable::poisson_bracket(&internal(a), &internal(b), p).unwrap();
                    let expected = match (a.index(), b.index()) {
                        (i, j) if j == i + 2 => 1.0,
                        (i, j) if i == j + 2 => -1.0,
                        _ => 0.0,
                    };
                    assert!((v.re - expected).abs() < 1e-15 && v.im == 0.0);
                }
            }
            let back = systems::to_internal(&spec, p).unwrap();
            assert!(systems::to_external(&spec, &back).distance(p) < 1e-14);
        }
    }
}
