//! Phase points, observables and the canonical Poisson bracket.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg;
use crate::scalar::{DualComplex, Scalar};

/// Canonical coordinates `(q1, q2, p1, p2)` of a two-degree-of-freedom
/// system. The meaning of each slot depends on the system: `(ξ, y, p_ξ, p_y)`
/// for the oscillators, `(r, θ, p_r, p_θ)` for TTW.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        PhasePoint { q1, q2, p1, p2 }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        PhasePoint::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.p1, self.p2]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Same configuration, momenta reversed.
    pub fn reversed(self) -> Self {
        PhasePoint::new(self.q1, self.q2, -self.p1, -self.p2)
    }

    pub fn get(&self, c: Coord) -> f64 {
        self.to_array()[c.index()]
    }

    /// Euclidean distance in `R⁴`.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        let mut s = 0.0;
        for k in 0..4 {
            s += (a[k] - b[k]) * (a[k] - b[k]);
        }
        num_traits::Float::sqrt(s)
    }

    /// The point lifted into the scalar type `S` with no derivative.
    pub fn lift<S: Scalar>(&self) -> [S; 4] {
        self.to_array().map(S::from_real)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    Q1,
    Q2,
    P1,
    P2,
}

impl Coord {
    pub const ALL: [Coord; 4] = [Coord::Q1, Coord::Q2, Coord::P1, Coord::P2];

    pub const fn index(self) -> usize {
        match self {
            Coord::Q1 => 0,
            Coord::Q2 => 1,
            Coord::P1 => 2,
            Coord::P2 => 3,
        }
    }
}

type Rule = dyn Fn(&[DualComplex; 4]) -> Result<DualComplex, Error> + Send + Sync;

/// A labelled scalar function of a phase point.
///
/// The rule receives the four coordinates as [`DualComplex`] numbers so that
/// one coordinate can carry a unit derivative; evaluation must be pure.
#[derive(Clone)]
pub struct Observable {
    label: String,
    rule: Arc<Rule>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Observable").field(&self.label).finish()
    }
}

impl Observable {
    pub fn new<F>(label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&[DualComplex; 4]) -> Result<DualComplex, Error> + Send + Sync + 'static,
    {
        Observable {
            label: label.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn coordinate(c: Coord) -> Self {
        let label = match c {
            Coord::Q1 => "q1",
            Coord::Q2 => "q2",
            Coord::P1 => "p1",
            Coord::P2 => "p2",
        };
        Observable::new(label, move |z| Ok(z[c.index()]))
    }

    pub fn constant(c: Complex64) -> Self {
        Observable::new(alloc::format!("{}", c), move |_| Ok(DualComplex::constant(c)))
    }

    pub fn eval_dual(&self, z: &[DualComplex; 4]) -> Result<DualComplex, Error> {
        (self.rule)(z)
    }

    pub fn value(&self, p: &PhasePoint) -> Result<Complex64, Error> {
        if !p.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.eval_dual(&p.lift())?.value)
    }

    /// Value at `p`, required to be real up to `tol · (1 + |re|)`.
    pub fn real_value(&self, p: &PhasePoint, tol: f64) -> Result<f64, Error> {
        let v = self.value(p)?;
        if v.im.abs() > tol * (1.0 + v.re.abs()) {
            return Err(Error::NotReal {
                label: self.label.clone(),
                imag: v.im,
            });
        }
        Ok(v.re)
    }

    pub fn plus(&self, other: &Observable) -> Observable {
        let (a, b) = (self.clone(), other.clone());
        Observable::new(alloc::format!("({} + {})", a.label, b.label), move |z| {
            Ok(a.eval_dual(z)? + b.eval_dual(z)?)
        })
    }

    pub fn minus(&self, other: &Observable) -> Observable {
        let (a, b) = (self.clone(), other.clone());
        Observable::new(alloc::format!("({} - {})", a.label, b.label), move |z| {
            Ok(a.eval_dual(z)? - b.eval_dual(z)?)
        })
    }

    pub fn times(&self, other: &Observable) -> Observable {
        let (a, b) = (self.clone(), other.clone());
        Observable::new(alloc::format!("{}·{}", a.label, b.label), move |z| {
            Ok(a.eval_dual(z)? * b.eval_dual(z)?)
        })
    }

    pub fn scaled(&self, c: Complex64) -> Observable {
        let a = self.clone();
        Observable::new(alloc::format!("{}·{}", c, a.label), move |z| {
            Ok(a.eval_dual(z)? * DualComplex::constant(c))
        })
    }

    pub fn pow(&self, n: u32) -> Observable {
        let a = self.clone();
        Observable::new(alloc::format!("{}^{}", a.label, n), move |z| {
            Ok(a.eval_dual(z)?.powi(n))
        })
    }

    /// `self ∘ map`, where `map` sends the caller's coordinates to the
    /// coordinates this observable is written in.
    pub fn pulled_back<M>(&self, label: impl Into<String>, map: M) -> Observable
    where
        M: Fn(&[DualComplex; 4]) -> [DualComplex; 4] + Send + Sync + 'static,
    {
        let a = self.clone();
        Observable::new(label, move |z| a.eval_dual(&map(z)))
    }
}

fn seeded(p: &PhasePoint, which: Coord) -> [DualComplex; 4] {
    let mut z: [DualComplex; 4] = p.lift();
    z[which.index()].derivative = Complex64::new(1.0, 0.0);
    z
}

/// `∂f/∂c` at `p`, exact up to rounding.
pub fn partial_derivative(f: &Observable, p: &PhasePoint, which: Coord) -> Result<Complex64, Error> {
    if !p.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(f.eval_dual(&seeded(p, which))?.derivative)
}

pub fn gradient(f: &Observable, p: &PhasePoint) -> Result<[Complex64; 4], Error> {
    let mut g = [Complex64::new(0.0, 0.0); 4];
    for c in Coord::ALL {
        g[c.index()] = partial_derivative(f, p, c)?;
    }
    Ok(g)
}

/// A Poisson bracket value together with the size of the terms it was
/// summed from, which sets the rounding scale of the result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketValue {
    pub value: Complex64,
    pub magnitude: f64,
}

pub fn poisson_bracket_terms(f: &Observable, g: &Observable, p: &PhasePoint) -> Result<BracketValue, Error> {
    let df = gradient(f, p)?;
    let dg = gradient(g, p)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for k in 0..2 {
        let a = df[k] * dg[k + 2];
        let b = df[k + 2] * dg[k];
        value += a - b;
        magnitude += a.norm() + b.norm();
    }
    Ok(BracketValue { value, magnitude })
}

/// `{f, g} = Σ_k ∂f/∂q_k ∂g/∂p_k − ∂f/∂p_k ∂g/∂q_k`.
pub fn poisson_bracket(f: &Observable, g: &Observable, p: &PhasePoint) -> Result<Complex64, Error> {
    Ok(poisson_bracket_terms(f, g, p)?.value)
}

/// Default relative singular-value threshold for [`jacobian_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Real Jacobian `∂f_i/∂c_j`, one row per observable. Each observable must
/// be real at `p` to within `tol`.
pub fn jacobian(fs: &[Observable], p: &PhasePoint, tol: f64) -> Result<Vec<[f64; 4]>, Error> {
    fs.iter()
        .map(|f| {
            f.real_value(p, tol)?;
            Ok(gradient(f, p)?.map(|d| d.re))
        })
        .collect()
}

/// Numerical rank of the Jacobian of `fs` at `p`: the number of singular
/// values above `tol` times the largest one, after scaling each gradient
/// to unit length.
pub fn jacobian_rank(fs: &[Observable], p: &PhasePoint, tol: f64) -> Result<usize, Error> {
    let rows = jacobian(fs, p, tol)?;
    // Rank does not depend on the scale of each function; normalizing the
    // rows keeps a large integral from masking a small one.
    let flat: Vec<f64> = rows
        .iter()
        .flat_map(|r| {
            let norm = num_traits::Float::sqrt(r.iter().map(|v| v * v).sum::<f64>());
            let k = if norm > 0.0 { 1.0 / norm } else { 0.0 };
            r.map(|v| v * k)
        })
        .collect();
    let sv = linalg::singular_values(&flat, rows.len(), 4);
    Ok(linalg::numerical_rank(&sv, tol))
}
