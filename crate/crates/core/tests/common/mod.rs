#![allow(dead_code)]

use superfact_core::systems::{RationalGamma, SystemSpec};
use superfact_core::PhasePoint;

pub const GAMMAS: [(u32, u32); 5] = [(1, 1), (2, 1), (1, 2), (3, 2), (2, 3)];

pub fn gamma(m: u32, n: u32) -> RationalGamma {
    RationalGamma::new(m, n).unwrap()
}

pub fn family_specs(g: RationalGamma) -> [SystemSpec; 3] {
    [
        SystemSpec::euclidean(1.0, g).unwrap(),
        SystemSpec::sphere(1.0, g).unwrap(),
        SystemSpec::ttw(1.0, g, 1.0, 2.0).unwrap(),
    ]
}

pub fn all_specs() -> Vec<SystemSpec> {
    GAMMAS.iter().flat_map(|&(m, n)| family_specs(gamma(m, n))).collect()
}

/// A bounded orbit well inside the domain, in internal coordinates.
pub fn bounded_start(spec: &SystemSpec) -> PhasePoint {
    match spec.family() {
        superfact_core::Family::EuclideanAniso => PhasePoint::new(0.5, 0.3, 0.4, -0.6),
        superfact_core::Family::SphereAniso => PhasePoint::new(0.3, 0.2, 0.3, -0.2),
        superfact_core::Family::Ttw => PhasePoint::new(1.0, 0.7, 0.3, 0.5),
    }
}
