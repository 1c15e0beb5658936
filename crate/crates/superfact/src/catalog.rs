use std::fmt::Write;

use serde::Serialize;
use superfact_core::Family;

#[derive(Clone, Debug, Serialize)]
pub struct Parameter {
    pub name: &'static str,
    pub meaning: &'static str,
    pub constraint: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecialCase {
    pub gamma: &'static str,
    pub note: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub family: Family,
    pub title: &'static str,
    pub hamiltonian: &'static str,
    pub external_coordinates: &'static str,
    pub internal_coordinates: &'static str,
    pub second_integral: &'static str,
    pub parameters: Vec<Parameter>,
    pub gamma_lower_bound: Option<String>,
    pub domain: Vec<&'static str>,
    pub special_cases: Vec<SpecialCase>,
}

const OMEGA: Parameter = Parameter {
    name: "omega",
    meaning: "frequency",
    constraint: "> 0",
};

fn gamma(constraint: &'static str) -> Parameter {
    Parameter {
        name: "gamma",
        meaning: "anisotropy m/n, integers",
        constraint,
    }
}

pub fn entry(family: Family) -> Entry {
    let gamma_lower_bound = family.gamma_lower_bound().map(|(m, n)| format!("{m}/{n}"));
    match family {
        Family::EuclideanAniso => Entry {
            family,
            title: "anisotropic oscillator on the Euclidean plane",
            hamiltonian: "H = (p_x^2 + p_y^2)/2 + omega^2 (gamma^2 x^2 + y^2)/2",
            external_coordinates: "(x, y, p_x, p_y)",
            internal_coordinates: "(xi, y, p_xi, p_y) with xi = gamma x, p_xi = p_x / gamma",
            second_integral: "H^xi = p_xi^2/2 + omega^2 xi^2 / (2 gamma^2)",
            parameters: vec![OMEGA, gamma("> 0")],
            gamma_lower_bound,
            domain: vec!["whole plane"],
            special_cases: vec![
                SpecialCase {
                    gamma: "1",
                    note: "isotropic 1:1 oscillator; Y is proportional to the angular momentum, X to a Demkov-Fradkin component",
                },
                SpecialCase {
                    gamma: "2",
                    note: "2:1 oscillator, cubic symmetry",
                },
            ],
        },
        Family::SphereAniso => Entry {
            family,
            title: "anisotropic oscillator on the sphere in geodesic parallel coordinates",
            hamiltonian: "H = p_y^2/2 + (p_x^2/2 + omega^2 / (2 cos^2(gamma x))) / cos^2 y - omega^2/2",
            external_coordinates: "(x, y, p_x, p_y)",
            internal_coordinates: "(xi, y, p_xi, p_y) with xi = gamma x, p_xi = p_x / gamma",
            second_integral: "H^xi = p_xi^2/2 + omega^2 / (2 gamma^2 cos^2 xi)",
            parameters: vec![OMEGA, gamma(">= 1/2")],
            gamma_lower_bound,
            domain: vec!["|gamma x| < pi/2", "|y| < pi/2"],
            special_cases: vec![
                SpecialCase {
                    gamma: "1",
                    note: "Higgs oscillator, potential (omega^2/2) tan^2 r with cos r = cos x cos y",
                },
                SpecialCase {
                    gamma: "2",
                    note: "the 2:1 curved oscillator of the superintegrable classification",
                },
            ],
        },
        Family::Ttw => Entry {
            family,
            title: "Tremblay-Turbiner-Winternitz system",
            hamiltonian: "H = p_r^2 + omega^2 r^2 + (p_phi^2 + gamma^2 alpha^2 / cos^2(gamma phi) + gamma^2 beta^2 / sin^2(gamma phi)) / r^2",
            external_coordinates: "(r, phi, p_r, p_phi)",
            internal_coordinates: "(r, theta, p_r, p_theta) with theta = gamma phi, p_theta = p_phi / gamma",
            second_integral: "H_theta = p_theta^2 + alpha^2 / cos^2 theta + beta^2 / sin^2 theta",
            parameters: vec![
                OMEGA,
                gamma(">= 1/4"),
                Parameter {
                    name: "alpha",
                    meaning: "Poschl-Teller coupling",
                    constraint: "real",
                },
                Parameter {
                    name: "beta",
                    meaning: "Poschl-Teller coupling",
                    constraint: "real",
                },
            ],
            gamma_lower_bound,
            domain: vec!["r > 0", "0 < gamma phi < pi/2"],
            special_cases: vec![SpecialCase {
                gamma: "1",
                note: "the isotropic oscillator with two centrifugal barriers",
            }],
        },
    }
}

pub fn entries(filter: Option<Family>) -> Vec<Entry> {
    Family::ALL
        .into_iter()
        .filter(|f| filter.is_none_or(|g| g == *f))
        .map(entry)
        .collect()
}

pub fn render(entries: &[Entry]) -> String {
    let mut s = String::new();
    for e in entries {
        let _ = writeln!(s, "{}: {}", e.family, e.title);
        let _ = writeln!(s, "  {}", e.hamiltonian);
        let _ = writeln!(s, "  coordinates  {} -> {}", e.external_coordinates, e.internal_coordinates);
        let _ = writeln!(s, "  integral     {}", e.second_integral);
        for p in &e.parameters {
            let _ = writeln!(s, "  --{:<10} {} ({})", p.name, p.meaning, p.constraint);
        }
        if let Some(b) = &e.gamma_lower_bound {
            let _ = writeln!(s, "  bounds       gamma >= {b}");
        }
        let _ = writeln!(s, "  domain       {}", e.domain.join(", "));
        for c in &e.special_cases {
            let _ = writeln!(s, "  gamma = {:<5} {}", c.gamma, c.note);
        }
        s.push('\n');
    }
    s
}
