//! Ladder functions `B±`, shift functions `A±`, their factorization
//! constants, and the higher-order integrals `X±`, `X`, `Y`.
//!
//! | family    | ladder `B±` factorizes         | shift `A±` factorizes        |
//! |-----------|--------------------------------|------------------------------|
//! | euclidean | `H^ξ = B⁺B⁻ + λ_B`             | `H^y = A⁺A⁻ + λ_A`           |
//! | sphere    | `h^ξ = B⁺B⁻ + λ_B`             | `H = A⁺A⁻ + λ_A`             |
//! | ttw       | `H_θ = B⁺B⁻ + λ_B`             | `H = A_k⁺A_k⁻ + λ_kA`, k=1,2 |
//!
//! Sphere and TTW factors depend on `ℰ` (`√(2H^ξ)` and `√H_θ`), which is
//! always evaluated as a function of the phase point, so brackets include
//! the chain rule through `ℰ`.
//!
//! For TTW the pure shift functions are `A⁺ = A₁⁺A₂⁻`, `A⁻ = A₁⁻A₂⁺`, and
//! they factorize quadratically: `H² = A⁺A⁻ + 4ω²γ²ℰ²`. With the ladder
//! sign convention `B± = ±i sin2θ p_θ + …` the pure shifts rotate in the
//! same direction as the ladders under the flow, so the TTW integrals pair
//! opposite signs: `X± = (B±)ⁿ(A∓)ᵐ`. The oscillators use `X± = (B±)ⁿ(A±)ᵐ`.

use core::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::observable::{Observable, PhasePoint};
use crate::scalar::{checked_recip, positive_sqrt, DualComplex, Scalar};
use crate::systems::{self, Family, SystemSpec, POSITIVITY_FLOOR};

/// A `±` pair of factor functions and the associated constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factors<S> {
    pub plus: S,
    pub minus: S,
    pub lambda: S,
}

/// [`Factors`] evaluated at a real phase point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorValue {
    pub plus: Complex64,
    pub minus: Complex64,
    pub lambda: f64,
}

impl From<Factors<Complex64>> for FactorValue {
    fn from(f: Factors<Complex64>) -> Self {
        FactorValue {
            plus: f.plus,
            minus: f.minus,
            lambda: f.lambda.re,
        }
    }
}

/// `X±` and their real combinations `X = (X⁺ + X⁻)/2`, `Y = (X⁺ − X⁻)/2i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralPair {
    pub x_plus: Complex64,
    pub x_minus: Complex64,
    pub x_real: f64,
    pub y_real: f64,
}

/// Mixed and pure TTW shift functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TtwShifts<S> {
    pub first: Factors<S>,
    pub second: Factors<S>,
    /// `A± = A₁±A₂∓`; `lambda` is the constant in `H² = A⁺A⁻ + λ`.
    pub pure: Factors<S>,
}

pub fn ladder_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<Factors<S>, Error> {
    let i = S::i();
    match spec.family() {
        Family::EuclideanAniso => {
            let kin = i * z[2] / SQRT_2;
            let pot = z[0] * (spec.omega() / (SQRT_2 * spec.g()));
            Ok(Factors {
                plus: -kin + pot,
                minus: kin + pot,
                lambda: S::from_real(0.0),
            })
        }
        Family::SphereAniso => {
            let hxi = systems::second_integral_expr(spec, z)?;
            let root = positive_sqrt(hxi, POSITIVITY_FLOOR, "H^xi")?;
            let kin = i * z[0].cos() * z[2] / SQRT_2;
            let pot = root * z[0].sin();
            Ok(Factors {
                plus: -kin + pot,
                minus: kin + pot,
                lambda: -hxi,
            })
        }
        Family::Ttw => {
            let (a2, b2) = (spec.alpha() * spec.alpha(), spec.beta() * spec.beta());
            let diff = b2 - a2;
            let ht = systems::second_integral_expr(spec, z)?;
            let root = positive_sqrt(ht, POSITIVITY_FLOOR, "H_theta")?;
            let two_theta = z[1] * 2.0;
            let kin = i * two_theta.sin() * z[3];
            let rest = root * two_theta.cos() + S::from_real(diff) / root;
            Ok(Factors {
                plus: kin + rest,
                minus: -kin + rest,
                lambda: S::from_real(2.0 * (a2 + b2)) - S::from_real(diff * diff) / ht,
            })
        }
    }
}

pub fn shift_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<Factors<S>, Error> {
    let i = S::i();
    let w = spec.omega();
    match spec.family() {
        Family::EuclideanAniso => {
            let kin = i * z[3] / SQRT_2;
            let pot = z[1] * (w / SQRT_2);
            Ok(Factors {
                plus: -kin - pot,
                minus: kin - pot,
                lambda: S::from_real(0.0),
            })
        }
        Family::SphereAniso => {
            let e = systems::epsilon_expr(spec, z)?;
            checked_recip(z[1].cos(), "cos y")?;
            let g = spec.g();
            let kin = i * z[3] / SQRT_2;
            let pot = e * z[1].tan() * (g / SQRT_2);
            Ok(Factors {
                plus: -kin - pot,
                minus: kin - pot,
                lambda: (e * e * (g * g) - w * w) * 0.5,
            })
        }
        Family::Ttw => Err(Error::Unsupported {
            operation: "shift (use the mixed and pure TTW shifts)",
            family: Family::Ttw,
        }),
    }
}

pub fn shift_ttw_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<TtwShifts<S>, Error> {
    if spec.family() != Family::Ttw {
        return Err(Error::Unsupported {
            operation: "TTW shift functions",
            family: spec.family(),
        });
    }
    let i = S::i();
    let (w, g) = (spec.omega(), spec.g());
    let e = systems::epsilon_expr(spec, z)?;
    let r = z[0];
    let inv_r = checked_recip(r, "r")?;
    let kin = i * z[2];
    let centrifugal = e * inv_r * g;
    let base = r * w;
    let first = Factors {
        plus: -kin + base - centrifugal,
        minus: kin + base - centrifugal,
        lambda: e * (2.0 * w * g),
    };
    let second = Factors {
        plus: -kin + base + centrifugal,
        minus: kin + base + centrifugal,
        lambda: e * (-2.0 * w * g),
    };
    let pure = Factors {
        plus: first.plus * second.minus,
        minus: first.minus * second.plus,
        lambda: e * e * (4.0 * w * w * g * g),
    };
    Ok(TtwShifts { first, second, pure })
}

/// `(X⁺, X⁻)` for `γ = m/n`.
pub fn higher_integral_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<(S, S), Error> {
    let (m, n) = (spec.gamma().m(), spec.gamma().n());
    let b = ladder_expr(spec, z)?;
    match spec.family() {
        Family::Ttw => {
            let a = shift_ttw_expr(spec, z)?.pure;
            Ok((b.plus.powi(n) * a.minus.powi(m), b.minus.powi(n) * a.plus.powi(m)))
        }
        _ => {
            let a = shift_expr(spec, z)?;
            Ok((b.plus.powi(n) * a.plus.powi(m), b.minus.powi(n) * a.minus.powi(m)))
        }
    }
}

/// `(X⁺, X⁻)` divided by the constant `|X⁺(p)|` taken at the evaluation
/// point, with every factor normalized before the powers are formed.
/// Brackets of the result equal those of `X±` up to that constant, and
/// the values stay in floating-point range for any `m + n`.
pub fn unit_higher_integral_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<(S, S), Error> {
    let (m, n) = (spec.gamma().m(), spec.gamma().n());
    let b = ladder_expr(spec, z)?;
    let (a_for_plus, a_for_minus) = match spec.family() {
        Family::Ttw => {
            let a = shift_ttw_expr(spec, z)?.pure;
            (a.minus, a.plus)
        }
        _ => {
            let a = shift_expr(spec, z)?;
            (a.plus, a.minus)
        }
    };
    let unit = |v: S| {
        let r = v.value().norm();
        if r > 0.0 && r.is_finite() {
            1.0 / r
        } else {
            1.0
        }
    };
    let (sb, sa) = (unit(b.plus), unit(a_for_plus));
    Ok((
        (b.plus * sb).powi(n) * (a_for_plus * sa).powi(m),
        (b.minus * sb).powi(n) * (a_for_minus * sa).powi(m),
    ))
}

/// Sphere only: `h^ξ = cos²ξ (p_ξ²/2 − H^ξ)`, identically `−ω²/(2γ²)`.
pub fn sphere_h_xi_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<S, Error> {
    if spec.family() != Family::SphereAniso {
        return Err(Error::Unsupported {
            operation: "h^xi",
            family: spec.family(),
        });
    }
    let hxi = systems::second_integral_expr(spec, z)?;
    Ok(z[0].cos().square() * (z[2].square() * 0.5 - hxi))
}

fn inside(spec: &SystemSpec, p: &PhasePoint) -> Result<[Complex64; 4], Error> {
    systems::domain_check_with(spec, p, 0.0)?;
    Ok(p.lift())
}

pub fn ladder(spec: &SystemSpec, p: &PhasePoint) -> Result<FactorValue, Error> {
    Ok(ladder_expr(spec, &inside(spec, p)?)?.into())
}

pub fn shift(spec: &SystemSpec, p: &PhasePoint) -> Result<FactorValue, Error> {
    Ok(shift_expr(spec, &inside(spec, p)?)?.into())
}

/// `(A₁±, A₂±, A±)` for TTW.
pub fn shift_ttw(spec: &SystemSpec, p: &PhasePoint) -> Result<(FactorValue, FactorValue, FactorValue), Error> {
    let s = shift_ttw_expr(spec, &inside(spec, p)?)?;
    Ok((s.first.into(), s.second.into(), s.pure.into()))
}

pub fn higher_integral(spec: &SystemSpec, p: &PhasePoint) -> Result<IntegralPair, Error> {
    let (xp, xm) = higher_integral_expr(spec, &inside(spec, p)?)?;
    Ok(IntegralPair {
        x_plus: xp,
        x_minus: xm,
        x_real: ((xp + xm) * 0.5).re,
        y_real: ((xp - xm) / Complex64::new(0.0, 2.0)).re,
    })
}

pub fn sphere_h_xi(spec: &SystemSpec, p: &PhasePoint) -> Result<f64, Error> {
    Ok(sphere_h_xi_expr(spec, &inside(spec, p)?)?.re)
}

/// Named factor functions, usable as observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorFn {
    LadderPlus,
    LadderMinus,
    LadderLambda,
    /// Pure shift functions for TTW.
    ShiftPlus,
    ShiftMinus,
    ShiftLambda,
    /// TTW `A₁±`, `λ_{1A}`.
    FirstShiftPlus,
    FirstShiftMinus,
    FirstShiftLambda,
    /// TTW `A₂±`, `λ_{2A}`.
    SecondShiftPlus,
    SecondShiftMinus,
    SecondShiftLambda,
    XPlus,
    XMinus,
    X,
    Y,
    /// Sphere `h^ξ`.
    SphereHXi,
}

impl FactorFn {
    pub fn label(self) -> &'static str {
        match self {
            FactorFn::LadderPlus => "B+",
            FactorFn::LadderMinus => "B-",
            FactorFn::LadderLambda => "lambda_B",
            FactorFn::ShiftPlus => "A+",
            FactorFn::ShiftMinus => "A-",
            FactorFn::ShiftLambda => "lambda_A",
            FactorFn::FirstShiftPlus => "A1+",
            FactorFn::FirstShiftMinus => "A1-",
            FactorFn::FirstShiftLambda => "lambda_1A",
            FactorFn::SecondShiftPlus => "A2+",
            FactorFn::SecondShiftMinus => "A2-",
            FactorFn::SecondShiftLambda => "lambda_2A",
            FactorFn::XPlus => "X+",
            FactorFn::XMinus => "X-",
            FactorFn::X => "X",
            FactorFn::Y => "Y",
            FactorFn::SphereHXi => "h^xi",
        }
    }
}

fn shift_family<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<Factors<S>, Error> {
    match spec.family() {
        Family::Ttw => Ok(shift_ttw_expr(spec, z)?.pure),
        _ => shift_expr(spec, z),
    }
}

/// The requested factor function as an observable in internal coordinates.
pub fn observable(spec: &SystemSpec, which: FactorFn) -> Observable {
    let s = *spec;
    let label = which.label();
    match which {
        FactorFn::LadderPlus => Observable::new(label, move |z| Ok(ladder_expr(&s, z)?.plus)),
        FactorFn::LadderMinus => Observable::new(label, move |z| Ok(ladder_expr(&s, z)?.minus)),
        FactorFn::LadderLambda => Observable::new(label, move |z| Ok(ladder_expr(&s, z)?.lambda)),
        FactorFn::ShiftPlus => Observable::new(label, move |z| Ok(shift_family(&s, z)?.plus)),
        FactorFn::ShiftMinus => Observable::new(label, move |z| Ok(shift_family(&s, z)?.minus)),
        FactorFn::ShiftLambda => Observable::new(label, move |z| Ok(shift_family(&s, z)?.lambda)),
        FactorFn::FirstShiftPlus => Observable::new(label, move |z| Ok(shift_ttw_expr(&s, z)?.first.plus)),
        FactorFn::FirstShiftMinus => Observable::new(label, move |z| Ok(shift_ttw_expr(&s, z)?.first.minus)),
        FactorFn::FirstShiftLambda => Observable::new(label, move |z| Ok(shift_ttw_expr(&s, z)?.first.lambda)),
        FactorFn::SecondShiftPlus => Observable::new(label, move |z| Ok(shift_ttw_expr(&s, z)?.second.plus)),
        FactorFn::SecondShiftMinus => Observable::new(label, move |z| Ok(shift_ttw_expr(&s, z)?.second.minus)),
        FactorFn::SecondShiftLambda => {
            Observable::new(label, move |z| Ok(shift_ttw_expr(&s, z)?.second.lambda))
        }
        FactorFn::XPlus => Observable::new(label, move |z| Ok(higher_integral_expr(&s, z)?.0)),
        FactorFn::XMinus => Observable::new(label, move |z| Ok(higher_integral_expr(&s, z)?.1)),
        FactorFn::X => Observable::new(label, move |z| {
            let (p, m) = higher_integral_expr(&s, z)?;
            Ok((p + m) * 0.5)
        }),
        FactorFn::Y => Observable::new(label, move |z| {
            let (p, m) = higher_integral_expr(&s, z)?;
            Ok((p - m) / (DualComplex::i() * 2.0))
        }),
        FactorFn::SphereHXi => Observable::new(label, move |z| sphere_h_xi_expr(&s, z)),
    }
}
