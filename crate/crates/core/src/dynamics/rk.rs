//! Dormand–Prince 5(4) with Hairer's continuous extension.

#[allow(unused_imports)]
use num_traits::Float;

use super::{hamilton_rhs, Controls, Interpolant, StepOutcome, Stepper};
use crate::error::Error;
use crate::observable::PhasePoint;
use crate::systems::SystemSpec;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

type V = [f64; 4];

fn axpy(y: &V, terms: &[(f64, &V)], h: f64) -> V {
    core::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

pub(crate) struct Dopri5<'a> {
    spec: &'a SystemSpec,
    rel_tol: f64,
    abs_tol: f64,
    /// First-same-as-last stage carried over from the previous accepted step.
    fsal: Option<V>,
}

pub(crate) struct Dense {
    t0: f64,
    h: f64,
    r: [V; 5],
}

impl Interpolant for Dense {
    fn eval(&self, t: f64) -> V {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        core::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }
}

impl<'a> Dopri5<'a> {
    pub(crate) fn new(spec: &'a SystemSpec, controls: &Controls) -> Self {
        Dopri5 {
            spec,
            rel_tol: controls.rel_tol,
            abs_tol: controls.abs_tol,
            fsal: None,
        }
    }

    fn f(&self, y: &V) -> Result<V, Error> {
        hamilton_rhs(self.spec, &PhasePoint::from_array(*y))
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }

    fn stages(&self, y: &V, k1: &V, h: f64) -> Result<(V, [V; 7]), Error> {
        let k2 = self.f(&axpy(y, &[(A21, k1)], h))?;
        let k3 = self.f(&axpy(y, &[(A31, k1), (A32, &k2)], h))?;
        let k4 = self.f(&axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h))?;
        let k5 = self.f(&axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h))?;
        let k6 = self.f(&axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h))?;
        let y1 = axpy(y, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let k7 = self.f(&y1)?;
        Ok((y1, [*k1, k2, k3, k4, k5, k6, k7]))
    }
}

impl Stepper for Dopri5<'_> {
    type Dense = Dense;

    fn initial_step(&mut self, y: &V, t_end: f64) -> Result<f64, Error> {
        let f0 = self.f(y)?;
        self.fsal = Some(f0);
        let sc: V = core::array::from_fn(|i| self.scale(y[i], y[i]));
        let d0 = (0..4).map(|i| (y[i] / sc[i]).powi(2)).sum::<f64>().sqrt() / 2.0;
        let d1 = (0..4).map(|i| (f0[i] / sc[i]).powi(2)).sum::<f64>().sqrt() / 2.0;
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(t_end);
        let y1 = axpy(y, &[(1.0, &f0)], h0);
        let f1 = self.f(&y1).unwrap_or(f0);
        let d2 = (0..4).map(|i| ((f1[i] - f0[i]) / sc[i]).powi(2)).sum::<f64>().sqrt() / 2.0 / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        Ok((100.0 * h0).min(h1).min(t_end))
    }

    fn step(&mut self, t: f64, y: &V, h: f64) -> StepOutcome<Dense> {
        let k1 = match self.fsal {
            Some(k) => k,
            None => match self.f(y) {
                Ok(k) => k,
                Err(_) => return StepOutcome::Rejected { h_next: h * FAC_MIN },
            },
        };
        self.fsal = Some(k1);
        let (y1, k) = match self.stages(y, &k1, h) {
            Ok(v) => v,
            // A stage left the domain: shrink and retry.
            Err(_) => return StepOutcome::Rejected { h_next: h * 0.25 },
        };
        let err = ((0..4)
            .map(|i| {
                let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                (e / self.scale(y[i], y1[i])).powi(2)
            })
            .sum::<f64>()
            / 4.0)
            .sqrt();
        if !err.is_finite() {
            return StepOutcome::Rejected { h_next: h * FAC_MIN };
        }
        let fac = if err == 0.0 {
            FAC_MAX
        } else {
            (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
        };
        if err > 1.0 {
            return StepOutcome::Rejected {
                h_next: h * fac.min(1.0),
            };
        }
        let r2: V = core::array::from_fn(|i| y1[i] - y[i]);
        let r3: V = core::array::from_fn(|i| h * k[0][i] - r2[i]);
        let r4: V = core::array::from_fn(|i| r2[i] - h * k[6][i] - r3[i]);
        let r5: V = core::array::from_fn(|i| {
            h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i])
        });
        self.fsal = Some(k[6]);
        StepOutcome::Accepted {
            y: y1,
            h_next: h * fac,
            dense: Dense {
                t0: t,
                h,
                r: [*y, r2, r3, r4, r5],
            },
        }
    }

    fn min_step(&self, t: f64) -> f64 {
        1e-14 * t.abs().max(1.0)
    }
}
