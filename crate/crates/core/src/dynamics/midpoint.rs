//! Fixed-step implicit midpoint rule, solved by fixed-point iteration.

use super::{hamilton_rhs, hermite, max_norm, Interpolant, StepOutcome, Stepper};
use crate::error::Error;
use crate::observable::PhasePoint;
use crate::systems::SystemSpec;

const ITER_TOL: f64 = 1e-13;
const MAX_ITER: usize = 50;

type V = [f64; 4];

pub(crate) struct Midpoint<'a> {
    spec: &'a SystemSpec,
    h: f64,
}

pub(crate) struct Dense {
    t0: f64,
    h: f64,
    y0: V,
    f0: V,
    y1: V,
    f1: V,
}

impl Interpolant for Dense {
    fn eval(&self, t: f64) -> V {
        hermite(&self.y0, &self.f0, &self.y1, &self.f1, self.h, (t - self.t0) / self.h)
    }
}

impl<'a> Midpoint<'a> {
    pub(crate) fn new(spec: &'a SystemSpec, h: f64) -> Self {
        Midpoint { spec, h }
    }

    fn f(&self, y: &V) -> Result<V, Error> {
        hamilton_rhs(self.spec, &PhasePoint::from_array(*y))
    }

    fn solve(&self, y0: &V, f0: &V, h: f64) -> Option<V> {
        let mut y1: V = core::array::from_fn(|i| y0[i] + h * f0[i]);
        for _ in 0..MAX_ITER {
            let mid: V = core::array::from_fn(|i| 0.5 * (y0[i] + y1[i]));
            let fm = self.f(&mid).ok()?;
            let next: V = core::array::from_fn(|i| y0[i] + h * fm[i]);
            let delta: V = core::array::from_fn(|i| next[i] - y1[i]);
            y1 = next;
            if max_norm(&delta) <= ITER_TOL * (1.0 + max_norm(&y1)) {
                return Some(y1);
            }
        }
        None
    }
}

impl Stepper for Midpoint<'_> {
    type Dense = Dense;

    fn initial_step(&mut self, _y: &V, _t_end: f64) -> Result<f64, Error> {
        Ok(self.h)
    }

    fn step(&mut self, t: f64, y: &V, h: f64) -> StepOutcome<Dense> {
        let reject = StepOutcome::Rejected { h_next: 0.0 };
        let Ok(f0) = self.f(y) else { return reject };
        let Some(y1) = self.solve(y, &f0, h) else { return reject };
        let Ok(f1) = self.f(&y1) else { return reject };
        StepOutcome::Accepted {
            y: y1,
            h_next: self.h,
            dense: Dense {
                t0: t,
                h,
                y0: *y,
                f0,
                y1,
                f1,
            },
        }
    }

    fn min_step(&self, _t: f64) -> f64 {
        // Any rejection is final: the step is never adapted.
        self.h * 0.5
    }
}
