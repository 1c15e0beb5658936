//! Phase points on a prescribed common level set of `(H, I₂, S)` with `S`
//! one of the real symmetries `X` or `Y`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::factorization::{self, FactorFn};
use crate::linalg;
use crate::observable::{self, Observable, PhasePoint};
use crate::systems::{self, DomainBox, SystemFn, SystemSpec};
use crate::verification::SymmetryChoice;

pub const LEVEL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTargets {
    pub energy: f64,
    pub second: f64,
    pub symmetry: SymmetryChoice,
    pub symmetry_value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
#[error("no phase point matches the levels within tolerance (best residual {best_residual:e})")]
pub struct NoSolution {
    pub best_residual: f64,
}

struct System {
    fs: [Observable; 3],
    targets: [f64; 3],
}

impl System {
    fn residual(&self, p: &PhasePoint) -> Option<[f64; 3]> {
        let mut out = [0.0; 3];
        for (k, f) in self.fs.iter().enumerate() {
            let v = f.value(p).ok()?;
            if !v.re.is_finite() {
                return None;
            }
            out[k] = v.re - self.targets[k];
        }
        Some(out)
    }

    fn converged(&self, r: &[f64; 3]) -> bool {
        r.iter().zip(&self.targets).all(|(ri, ti)| ri.abs() <= LEVEL_TOL * (1.0 + ti.abs()))
    }

    fn score(&self, r: &[f64; 3]) -> f64 {
        r.iter()
            .zip(&self.targets)
            .map(|(ri, ti)| (ri / (1.0 + ti.abs())).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Damped minimum-norm Gauss–Newton from one start.
fn newton(sys: &System, spec: &SystemSpec, margin: f64, mut p: PhasePoint) -> (PhasePoint, f64, bool) {
    let valid = |q: &PhasePoint| systems::domain_check_with(spec, q, margin).is_ok();
    let Some(mut r) = sys.residual(&p) else {
        return (p, f64::INFINITY, false);
    };
    for _ in 0..100 {
        if sys.converged(&r) {
            return (p, sys.score(&r), true);
        }
        let Ok(j) = observable::jacobian(&sys.fs, &p, f64::INFINITY) else { break };
        // δ = −Jᵀ (J Jᵀ + μ I)⁻¹ r
        let mut jjt = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                jjt[a][b] = (0..4).map(|k| j[a][k] * j[b][k]).sum();
            }
        }
        let trace = (0..3).map(|a| jjt[a][a]).sum::<f64>();
        let score = sys.score(&r);
        let mut mu = 1e-12 * trace;
        let mut improved = false;
        for _ in 0..30 {
            let mut m = jjt;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += mu;
            }
            if let Some(w) = linalg::solve(m, r) {
                let delta: [f64; 4] = core::array::from_fn(|k| -(0..3).map(|a| j[a][k] * w[a]).sum::<f64>());
                let q = PhasePoint::from_array(core::array::from_fn(|k| p.to_array()[k] + delta[k]));
                if valid(&q) {
                    if let Some(rq) = sys.residual(&q) {
                        if sys.score(&rq) < score {
                            p = q;
                            r = rq;
                            improved = true;
                            break;
                        }
                    }
                }
            }
            mu = if mu == 0.0 { 1e-12 } else { mu * 10.0 };
        }
        if !improved {
            break;
        }
    }
    let ok = sys.converged(&r);
    (p, sys.score(&r), ok)
}

/// Finds an internal-coordinate phase point where `H = energy`,
/// `I₂ = second` and the chosen symmetry takes its prescribed value.
/// Starts from a `grid⁴` lattice of cell centres in `bx` and returns the
/// first converged root in lattice order, so the result is deterministic.
pub fn trace(spec: &SystemSpec, targets: &LevelTargets, bx: &DomainBox, grid: usize) -> Result<PhasePoint, NoSolution> {
    let sym = match targets.symmetry {
        SymmetryChoice::X => FactorFn::X,
        SymmetryChoice::Y => FactorFn::Y,
    };
    let sys = System {
        fs: [
            systems::observable(spec, SystemFn::Hamiltonian),
            systems::observable(spec, SystemFn::SecondIntegral),
            factorization::observable(spec, sym),
        ],
        targets: [targets.energy, targets.second, targets.symmetry_value],
    };
    let grid = grid.max(1);
    let iv = bx.intervals();
    let axis = |k: usize, i: usize| iv[k].0 + (iv[k].1 - iv[k].0) * (i as f64 + 0.5) / grid as f64;
    let mut best = f64::INFINITY;
    let starts: Vec<PhasePoint> = (0..grid.pow(4))
        .map(|n| {
            let idx = [n % grid, (n / grid) % grid, (n / grid / grid) % grid, n / grid / grid / grid];
            PhasePoint::new(axis(0, idx[0]), axis(1, idx[1]), axis(2, idx[2]), axis(3, idx[3]))
        })
        .filter(|p| systems::domain_check_with(spec, p, bx.margin).is_ok())
        .collect();
    for start in starts {
        let (p, score, ok) = newton(&sys, spec, bx.margin, start);
        if ok {
            return Ok(p);
        }
        best = best.min(score);
    }
    Err(NoSolution { best_residual: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::RationalGamma;

    fn levels(spec: &SystemSpec, p: &PhasePoint, which: SymmetryChoice) -> LevelTargets {
        let pair = factorization::higher_integral(spec, p).unwrap();
        LevelTargets {
            energy: systems::hamiltonian(spec, p).unwrap(),
            second: systems::second_integral(spec, p).unwrap(),
            symmetry: which,
            symmetry_value: match which {
                SymmetryChoice::X => pair.x_real,
                SymmetryChoice::Y => pair.y_real,
            },
        }
    }

    #[test]
    fn rediscovers_levels() {
        let g = RationalGamma::new(3, 2).unwrap();
        for spec in [
            SystemSpec::euclidean(1.0, RationalGamma::ONE).unwrap(),
            SystemSpec::sphere(1.0, g).unwrap(),
            SystemSpec::ttw(1.0, g, 0.5, 0.7).unwrap(),
        ] {
            let seed = match spec.family() {
                crate::Family::Ttw => PhasePoint::new(1.1, 0.6, 0.3, -0.4),
                _ => PhasePoint::new(0.3, -0.2, 0.5, 0.4),
            };
            for which in [SymmetryChoice::X, SymmetryChoice::Y] {
                let t = levels(&spec, &seed, which);
                let p = trace(&spec, &t, &DomainBox::for_spec(&spec), 4).unwrap();
                let found = levels(&spec, &p, which);
                assert!((found.energy - t.energy).abs() <= 1e-9 * (1.0 + t.energy.abs()));
                assert!((found.second - t.second).abs() <= 1e-9 * (1.0 + t.second.abs()));
                assert!((found.symmetry_value - t.symmetry_value).abs() <= 1e-9 * (1.0 + t.symmetry_value.abs()));
            }
        }
    }

    #[test]
    fn infeasible_levels() {
        // H = H^y + γ² H^ξ with H^y ≥ 0, so E < γ² I₂ has no solution.
        let spec = SystemSpec::euclidean(1.0, RationalGamma::ONE).unwrap();
        let t = LevelTargets {
            energy: 0.1,
            second: 0.5,
            symmetry: SymmetryChoice::X,
            symmetry_value: 0.0,
        };
        assert!(trace(&spec, &t, &DomainBox::for_spec(&spec), 3).is_err());
    }
}
