//! The three Hamiltonian families, their parameters and domain guards.
//!
//! All formulas work in *internal* coordinates: `(ξ, y, p_ξ, p_y)` with
//! `ξ = γx`, `p_ξ = p_x/γ` for the two oscillators and `(r, θ, p_r, p_θ)`
//! with `θ = γφ`, `p_θ = p_φ/γ` for TTW. The oscillators carry the usual `½`
//! kinetic factor; TTW does not.

use alloc::format;
use alloc::string::{String, ToString};
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{DomainViolation, Error};
use crate::observable::{Observable, PhasePoint};
use crate::scalar::{checked_recip, positive_sqrt, DualComplex, Scalar};

/// Default distance kept from singular surfaces (radians, and radius units
/// for TTW).
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Second integrals must exceed this before their square root is taken.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "euclidean")]
    EuclideanAniso,
    #[serde(rename = "sphere")]
    SphereAniso,
    #[serde(rename = "ttw")]
    Ttw,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::EuclideanAniso, Family::SphereAniso, Family::Ttw];

    pub fn name(self) -> &'static str {
        match self {
            Family::EuclideanAniso => "euclidean",
            Family::SphereAniso => "sphere",
            Family::Ttw => "ttw",
        }
    }

    /// Smallest admissible `γ`, as `(numerator, denominator)`; `None` means
    /// any positive value.
    pub fn gamma_lower_bound(self) -> Option<(u32, u32)> {
        match self {
            Family::EuclideanAniso => None,
            Family::SphereAniso => Some((1, 2)),
            Family::Ttw => Some((1, 4)),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "euclid" => Ok(Family::EuclideanAniso),
            "sphere" => Ok(Family::SphereAniso),
            "ttw" => Ok(Family::Ttw),
            other => Err(Error::InvalidSpec(format!("unknown family `{other}`"))),
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `γ = m/n`, stored reduced. The exponents of the higher-order integrals
/// are taken from `m` and `n` directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGamma")]
pub struct RationalGamma {
    m: u32,
    n: u32,
}

#[derive(Deserialize)]
struct RawGamma {
    m: u32,
    n: u32,
}

impl TryFrom<RawGamma> for RationalGamma {
    type Error = Error;
    fn try_from(r: RawGamma) -> Result<Self, Error> {
        RationalGamma::new(r.m, r.n)
    }
}

impl RationalGamma {
    pub const ONE: RationalGamma = RationalGamma { m: 1, n: 1 };

    pub fn new(m: u32, n: u32) -> Result<Self, Error> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSpec(format!("gamma = {m}/{n} must have positive m and n")));
        }
        let g = gcd(m, n);
        Ok(RationalGamma { m: m / g, n: n / g })
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn value(self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// `m + n`, the maximal momentum order of the extra integrals.
    pub fn order(self) -> u32 {
        self.m + self.n
    }
}

impl fmt::Display for RationalGamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.m, self.n)
    }
}

impl FromStr for RationalGamma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidSpec(format!("gamma `{s}` is not of the form m/n"));
        let (m, n) = match s.split_once('/') {
            Some((m, n)) => (m.trim(), n.trim()),
            None => (s.trim(), "1"),
        };
        let m = m.parse::<u32>().map_err(|_| bad())?;
        let n = n.parse::<u32>().map_err(|_| bad())?;
        RationalGamma::new(m, n)
    }
}

/// A fully parameterized system. Immutable once built; construct through
/// [`SystemSpec::euclidean`], [`SystemSpec::sphere`], [`SystemSpec::ttw`] or
/// deserialization, all of which validate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr")]
pub struct SystemSpec {
    family: Family,
    omega: f64,
    gamma: RationalGamma,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

#[derive(Deserialize)]
struct SpecRepr {
    family: Family,
    omega: f64,
    gamma: RationalGamma,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
}

impl TryFrom<SpecRepr> for SystemSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self, Error> {
        SystemSpec::new(r.family, r.omega, r.gamma, r.alpha, r.beta)
    }
}

impl SystemSpec {
    pub fn new(
        family: Family,
        omega: f64,
        gamma: RationalGamma,
        alpha: Option<f64>,
        beta: Option<f64>,
    ) -> Result<Self, Error> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidSpec(format!("omega must be positive, got {omega}")));
        }
        if let Some((lm, ln)) = family.gamma_lower_bound() {
            // m/n >= lm/ln without floating point.
            if (gamma.m() as u64) * (ln as u64) < (lm as u64) * (gamma.n() as u64) {
                return Err(Error::InvalidSpec(format!(
                    "gamma = {gamma} is below the {family} bound {lm}/{ln}"
                )));
            }
        }
        match (family, alpha, beta) {
            (Family::Ttw, Some(a), Some(b)) => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidSpec("alpha and beta must be finite".to_string()));
                }
            }
            (Family::Ttw, _, _) => {
                return Err(Error::InvalidSpec("ttw requires both alpha and beta".to_string()))
            }
            (_, None, None) => {}
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "alpha and beta only apply to ttw, not {family}"
                )))
            }
        }
        Ok(SystemSpec {
            family,
            omega,
            gamma,
            alpha,
            beta,
        })
    }

    pub fn euclidean(omega: f64, gamma: RationalGamma) -> Result<Self, Error> {
        SystemSpec::new(Family::EuclideanAniso, omega, gamma, None, None)
    }

    pub fn sphere(omega: f64, gamma: RationalGamma) -> Result<Self, Error> {
        SystemSpec::new(Family::SphereAniso, omega, gamma, None, None)
    }

    pub fn ttw(omega: f64, gamma: RationalGamma, alpha: f64, beta: f64) -> Result<Self, Error> {
        SystemSpec::new(Family::Ttw, omega, gamma, Some(alpha), Some(beta))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> RationalGamma {
        self.gamma
    }

    /// `γ` as a float, for formulas.
    pub fn g(&self) -> f64 {
        self.gamma.value()
    }

    /// TTW `α` (zero for the other families).
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.0)
    }

    /// TTW `β` (zero for the other families).
    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(0.0)
    }

    pub fn describe(&self) -> String {
        match self.family {
            Family::Ttw => format!(
                "ttw(omega={}, gamma={}, alpha={}, beta={})",
                self.omega,
                self.gamma,
                self.alpha(),
                self.beta()
            ),
            f => format!("{f}(omega={}, gamma={})", self.omega, self.gamma),
        }
    }
}

/// Open sampling region in internal coordinates, already shrunk by the
/// margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub q1: (f64, f64),
    pub q2: (f64, f64),
    pub p1: (f64, f64),
    pub p2: (f64, f64),
    pub margin: f64,
}

/// Default half-width of the momentum (and Euclidean position) ranges.
pub const DEFAULT_EXTENT: f64 = 2.0;

impl DomainBox {
    pub fn for_spec(spec: &SystemSpec) -> Self {
        DomainBox::with_margin(spec, DEFAULT_MARGIN)
    }

    pub fn with_margin(spec: &SystemSpec, margin: f64) -> Self {
        let e = DEFAULT_EXTENT;
        let mom = (-e, e);
        match spec.family {
            Family::EuclideanAniso => DomainBox {
                q1: (-e, e),
                q2: (-e, e),
                p1: mom,
                p2: mom,
                margin,
            },
            Family::SphereAniso => {
                let lim = FRAC_PI_2 - margin;
                DomainBox {
                    q1: (-lim, lim),
                    q2: (-lim, lim),
                    p1: mom,
                    p2: mom,
                    margin,
                }
            }
            Family::Ttw => DomainBox {
                q1: (margin, 3.0),
                q2: (margin, FRAC_PI_2 - margin),
                p1: mom,
                p2: mom,
                margin,
            },
        }
    }

    /// Replaces the momentum ranges by `(-extent, extent)`.
    pub fn with_momentum_extent(mut self, extent: f64) -> Self {
        self.p1 = (-extent, extent);
        self.p2 = (-extent, extent);
        self
    }

    pub fn intervals(&self) -> [(f64, f64); 4] {
        [self.q1, self.q2, self.p1, self.p2]
    }

    pub fn contains(&self, p: &PhasePoint) -> bool {
        self.intervals()
            .iter()
            .zip(p.to_array())
            .all(|(&(lo, hi), v)| lo < v && v < hi)
    }
}

/// Domain verdict with the default margin.
pub fn domain_check(spec: &SystemSpec, p: &PhasePoint) -> Result<(), DomainViolation> {
    domain_check_with(spec, p, DEFAULT_MARGIN)
}

/// Domain verdict: `Ok` when `p` is at least `margin` away from every
/// singular surface of the family, otherwise the first violated constraint.
pub fn domain_check_with(spec: &SystemSpec, p: &PhasePoint, margin: f64) -> Result<(), DomainViolation> {
    if !p.is_finite() {
        return Err(DomainViolation::NonFinite);
    }
    match spec.family {
        Family::EuclideanAniso => Ok(()),
        Family::SphereAniso => {
            let limit = FRAC_PI_2 - margin;
            if !(p.q1.abs() < limit) {
                return Err(DomainViolation::XiBound { value: p.q1, limit });
            }
            if !(p.q2.abs() < limit) {
                return Err(DomainViolation::YBound { value: p.q2, limit });
            }
            Ok(())
        }
        Family::Ttw => {
            if !(p.q1 > margin) {
                return Err(DomainViolation::RadiusBound {
                    value: p.q1,
                    limit: margin,
                });
            }
            let (lower, upper) = (margin, FRAC_PI_2 - margin);
            if !(p.q2 > lower && p.q2 < upper) {
                return Err(DomainViolation::AngleBound {
                    value: p.q2,
                    lower,
                    upper,
                });
            }
            Ok(())
        }
    }
}

/// External → internal coordinates on any scalar.
pub fn to_internal_coords<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> [S; 4] {
    let g = spec.g();
    [
        match spec.family {
            Family::Ttw => z[0],
            _ => z[0] * g,
        },
        match spec.family {
            Family::Ttw => z[1] * g,
            _ => z[1],
        },
        match spec.family {
            Family::Ttw => z[2],
            _ => z[2] / g,
        },
        match spec.family {
            Family::Ttw => z[3] / g,
            _ => z[3],
        },
    ]
}

/// Internal → external coordinates on any scalar.
pub fn to_external_coords<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> [S; 4] {
    let g = spec.g();
    match spec.family {
        Family::Ttw => [z[0], z[1] / g, z[2], z[3] * g],
        _ => [z[0] / g, z[1], z[2] * g, z[3]],
    }
}

/// Maps `(x, y, p_x, p_y)` (or `(r, φ, p_r, p_φ)` for TTW) to internal
/// coordinates and checks the internal domain guards.
pub fn to_internal(spec: &SystemSpec, external: &PhasePoint) -> Result<PhasePoint, Error> {
    if !external.is_finite() {
        return Err(Error::NonFinite);
    }
    let z = to_internal_coords(spec, &external.to_array().map(|v| Complex64::new(v, 0.0)));
    let p = PhasePoint::from_array(z.map(|c| c.re));
    domain_check(spec, &p)?;
    Ok(p)
}

pub fn to_external(spec: &SystemSpec, internal: &PhasePoint) -> PhasePoint {
    let z = to_external_coords(spec, &internal.to_array().map(|v| Complex64::new(v, 0.0)));
    PhasePoint::from_array(z.map(|c| c.re))
}

/// Second (quadratic) integral: `H^ξ` for the oscillators, `H_θ` for TTW.
pub fn second_integral_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<S, Error> {
    let w2 = spec.omega * spec.omega;
    let g2 = spec.g() * spec.g();
    match spec.family {
        Family::EuclideanAniso => Ok(z[2].square() * 0.5 + z[0].square() * (w2 / (2.0 * g2))),
        Family::SphereAniso => {
            let sec2 = checked_recip(z[0].cos().square(), "cos xi")?;
            Ok(z[2].square() * 0.5 + sec2 * (w2 / (2.0 * g2)))
        }
        Family::Ttw => {
            let (a2, b2) = (spec.alpha() * spec.alpha(), spec.beta() * spec.beta());
            let sec2 = checked_recip(z[1].cos().square(), "cos theta")?;
            let csc2 = checked_recip(z[1].sin().square(), "sin theta")?;
            Ok(z[3].square() + sec2 * a2 + csc2 * b2)
        }
    }
}

/// `H^y = p_y²/2 + ω²y²/2`, the Euclidean y-sector.
pub fn y_sector_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<S, Error> {
    match spec.family {
        Family::EuclideanAniso => {
            let w2 = spec.omega * spec.omega;
            Ok(z[3].square() * 0.5 + z[1].square() * (w2 * 0.5))
        }
        family => Err(Error::Unsupported {
            operation: "y-sector Hamiltonian",
            family,
        }),
    }
}

/// Hamiltonian in internal coordinates.
pub fn hamiltonian_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<S, Error> {
    let w2 = spec.omega * spec.omega;
    let g2 = spec.g() * spec.g();
    match spec.family {
        Family::EuclideanAniso => Ok(z[3].square() * 0.5
            + z[1].square() * (w2 * 0.5)
            + (z[2].square() * 0.5 + z[0].square() * (w2 / (2.0 * g2))) * g2),
        Family::SphereAniso => {
            let sec2y = checked_recip(z[1].cos().square(), "cos y")?;
            let sec2xi = checked_recip(z[0].cos().square(), "cos xi")?;
            let inner = z[2].square() * 0.5 + sec2xi * (w2 / (2.0 * g2));
            Ok(z[3].square() * 0.5 + sec2y * inner * g2 - w2 * 0.5)
        }
        Family::Ttw => {
            let ht = second_integral_expr(spec, z)?;
            let inv_r2 = checked_recip(z[0].square(), "r")?;
            Ok(z[2].square() + z[0].square() * w2 + ht * inv_r2 * g2)
        }
    }
}

/// Hamiltonian written in the original external coordinates
/// `(x, y, p_x, p_y)` or `(r, φ, p_r, p_φ)`, before any rescaling.
pub fn external_hamiltonian_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<S, Error> {
    let w = spec.omega;
    let g = spec.g();
    match spec.family {
        Family::EuclideanAniso => {
            let wx = g * w;
            Ok((z[2].square() + z[3].square()) * 0.5
                + (z[0].square() * (wx * wx) + z[1].square() * (w * w)) * 0.5)
        }
        Family::SphereAniso => {
            let sec2y = checked_recip(z[1].cos().square(), "cos y")?;
            let gx = z[0] * g;
            checked_recip(gx.cos(), "cos gamma x")?;
            let potential = (gx.tan().square() * sec2y + z[1].tan().square()) * (w * w * 0.5);
            Ok((z[2].square() * sec2y + z[3].square()) * 0.5 + potential)
        }
        Family::Ttw => {
            let (a2, b2) = (spec.alpha() * spec.alpha(), spec.beta() * spec.beta());
            let gphi = z[1] * g;
            let sec2 = checked_recip(gphi.cos().square(), "cos gamma phi")?;
            let csc2 = checked_recip(gphi.sin().square(), "sin gamma phi")?;
            let inv_r2 = checked_recip(z[0].square(), "r")?;
            let angular = z[3].square() + sec2 * (g * g * a2) + csc2 * (g * g * b2);
            Ok(z[2].square() + z[0].square() * (w * w) + angular * inv_r2)
        }
    }
}

/// `ℰ = √(2H^ξ)` on the sphere, `ℰ = √H_θ` for TTW.
pub fn epsilon_expr<S: Scalar>(spec: &SystemSpec, z: &[S; 4]) -> Result<S, Error> {
    let second = second_integral_expr(spec, z)?;
    match spec.family {
        Family::EuclideanAniso => Err(Error::Unsupported {
            operation: "epsilon",
            family: spec.family,
        }),
        Family::SphereAniso => Ok(positive_sqrt(second, POSITIVITY_FLOOR, "H^xi")? * core::f64::consts::SQRT_2),
        Family::Ttw => positive_sqrt(second, POSITIVITY_FLOOR, "H_theta"),
    }
}

fn real<F>(p: &PhasePoint, f: F) -> Result<f64, Error>
where
    F: FnOnce(&[Complex64; 4]) -> Result<Complex64, Error>,
{
    if !p.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(f(&p.lift())?.re)
}

pub fn hamiltonian(spec: &SystemSpec, p: &PhasePoint) -> Result<f64, Error> {
    real(p, |z| hamiltonian_expr(spec, z))
}

pub fn second_integral(spec: &SystemSpec, p: &PhasePoint) -> Result<f64, Error> {
    real(p, |z| second_integral_expr(spec, z))
}

pub fn y_sector(spec: &SystemSpec, p: &PhasePoint) -> Result<f64, Error> {
    real(p, |z| y_sector_expr(spec, z))
}

pub fn epsilon(spec: &SystemSpec, p: &PhasePoint) -> Result<f64, Error> {
    real(p, |z| epsilon_expr(spec, z))
}

pub fn external_hamiltonian(spec: &SystemSpec, external: &PhasePoint) -> Result<f64, Error> {
    real(external, |z| external_hamiltonian_expr(spec, z))
}

/// Named scalar functions of a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemFn {
    Hamiltonian,
    SecondIntegral,
    /// Euclidean `H^y` only.
    YSector,
    Epsilon,
}

/// The requested function as an observable in internal coordinates.
pub fn observable(spec: &SystemSpec, which: SystemFn) -> Observable {
    let s = *spec;
    match which {
        SystemFn::Hamiltonian => Observable::new("H", move |z| hamiltonian_expr(&s, z)),
        SystemFn::SecondIntegral => {
            let label = if s.family == Family::Ttw { "H_theta" } else { "H^xi" };
            Observable::new(label, move |z| second_integral_expr(&s, z))
        }
        SystemFn::YSector => Observable::new("H^y", move |z| y_sector_expr(&s, z)),
        SystemFn::Epsilon => Observable::new("E", move |z| epsilon_expr(&s, z)),
    }
}

/// An internal-coordinate observable re-expressed in external coordinates.
pub fn in_external_coords(spec: &SystemSpec, f: &Observable) -> Observable {
    let s = *spec;
    f.pulled_back(format!("{}∘T", f.label()), move |z: &[DualComplex; 4]| {
        to_internal_coords(&s, z)
    })
}

/// Hamiltonian in external coordinates as an observable.
pub fn external_hamiltonian_observable(spec: &SystemSpec) -> Observable {
    let s = *spec;
    Observable::new("H_ext", move |z| external_hamiltonian_expr(&s, z))
}

/// Both sides of `tan²x/cos²y + tan²y = (1 − cos²x cos²y)/(cos²x cos²y)`,
/// i.e. the Higgs potential in parallel coordinates against `tan² r` with
/// `cos r = cos x cos y`.
pub fn higgs_potential_identity(x: f64, y: f64) -> Result<(f64, f64), Error> {
    let (cx, cy) = (x.cos(), y.cos());
    if !(cx.abs() > crate::scalar::SINGULAR_EPS) || !(cy.abs() > crate::scalar::SINGULAR_EPS) {
        return Err(Error::Singular { what: "cos x cos y" });
    }
    let lhs = x.tan().powi(2) / (cy * cy) + y.tan().powi(2);
    let c2 = (cx * cy).powi(2);
    let rhs = (1.0 - c2) / c2;
    Ok((lhs, rhs))
}

/// Geodesic polar coordinates `(r, φ)` of the sphere point with parallel
/// coordinates `(x, y)`; `φ ∈ [0, 2π)`.
pub fn geodesic_polar(x: f64, y: f64) -> (f64, f64) {
    let x0 = x.cos() * y.cos();
    let x1 = x.sin() * y.cos();
    let x2 = y.sin();
    let r = x1.hypot(x2).atan2(x0);
    let mut phi = x2.atan2(x1);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    (r, phi)
}
