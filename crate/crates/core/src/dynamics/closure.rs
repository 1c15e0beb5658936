//! First return of a trajectory to its starting point.

use serde::{Deserialize, Serialize};

use super::{integrate, Controls, Trajectory};
use crate::observable::PhasePoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureResult {
    pub closed: bool,
    /// Return time of the best candidate, closed or not.
    pub period: Option<f64>,
    /// Phase-space distance to the initial point at `period`.
    pub return_distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClosureError {
    #[error("trajectory never returns toward its start: no candidate return time")]
    InsufficientSpan,
}

const DEPARTURE_FRACTION: f64 = 0.25;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Scans the distance to the initial point for local minima after the orbit
/// has moved away, refines each by a golden-section search along the flow, and reports the first one within `eps`. If none
/// qualifies the closest candidate is returned with `closed = false`.
pub fn detect_closure(traj: &Trajectory, eps: f64) -> Result<ClosureResult, ClosureError> {
    let s = &traj.samples;
    let p0 = s.first().ok_or(ClosureError::InsufficientSpan)?.point;
    let d: alloc::vec::Vec<f64> = s.iter().map(|x| x.point.distance(&p0)).collect();
    let d_max = d.iter().copied().fold(0.0, f64::max);
    if d_max == 0.0 {
        // A fixed point returns immediately.
        return Err(ClosureError::InsufficientSpan);
    }
    let Some(departed) = d.iter().position(|&v| v > DEPARTURE_FRACTION * d_max) else {
        return Err(ClosureError::InsufficientSpan);
    };

    let mut best: Option<(f64, f64)> = None;
    for k in departed + 1..s.len() {
        let is_min = d[k] <= d[k - 1] && (k + 1 == s.len() || d[k] < d[k + 1]);
        if !is_min || d[k] > DEPARTURE_FRACTION * d_max {
            continue;
        }
        let hi = (k + 1).min(s.len() - 1);
        let (t, dist) = refine(traj, &p0, k - 1, hi).unwrap_or((s[k].t, d[k]));
        if best.is_none_or(|(_, b)| dist < b) {
            best = Some((t, dist));
        }
        if dist <= eps {
            return Ok(ClosureResult {
                closed: true,
                period: Some(t),
                return_distance: dist,
            });
        }
    }
    match best {
        Some((t, dist)) => Ok(ClosureResult {
            closed: false,
            period: Some(t),
            return_distance: dist,
        }),
        None => Err(ClosureError::InsufficientSpan),
    }
}

/// Minimizes the distance over `[t_lo, t_hi]`, following the flow itself
/// from the sample at `t_lo` with the trajectory's own controls.
fn refine(traj: &Trajectory, p0: &PhasePoint, lo: usize, hi: usize) -> Option<(f64, f64)> {
    let s = &traj.samples;
    let start = s[lo];
    let controls = traj.controls;
    let dist = |t: f64| -> f64 {
        let dt = t - start.t;
        if dt <= 0.0 {
            return start.point.distance(p0);
        }
        let c = Controls {
            sample_dt: dt,
            ..controls
        };
        match integrate(&traj.spec, &start.point, dt, &c) {
            Ok(tr) => tr.samples.last().map_or(f64::INFINITY, |x| x.point.distance(p0)),
            Err(_) => f64::INFINITY,
        }
    };
    let (mut a, mut b) = (start.t, s[hi].t);
    let mut c = b - GOLDEN * (b - a);
    let mut e = a + GOLDEN * (b - a);
    let (mut fc, mut fe) = (dist(c), dist(e));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - GOLDEN * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + GOLDEN * (b - a);
            fe = dist(e);
        }
    }
    let t = 0.5 * (a + b);
    let d = dist(t);
    d.is_finite().then_some((t, d))
}
