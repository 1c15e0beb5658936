//! Randomized certification of the bracket and factorization identities.
//!
//! An [`IdentitySpec`] pairs two [`Quantity`] expressions (values and
//! Poisson brackets of observables, combined with sums, products and
//! constants) with a tolerance. [`run_suite`] evaluates each identity at a
//! list of phase points and records the worst residual
//!
//! ```text
//! |lhs − rhs| / (1 + max(scale(lhs), scale(rhs)))
//! ```
//!
//! where the scale of a plain value is its modulus and the scale of a
//! bracket is the sum of the moduli of the products it is summed from. The
//! latter is what rounding error is proportional to, and it keeps
//! identities of the form `{H, X} = 0` meaningful when `X` is large.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::factorization::{self, FactorFn};
use crate::observable::{self, Observable, PhasePoint, DEFAULT_RANK_TOL};
use crate::scalar::{checked_recip, DualComplex, Scalar};
use crate::systems::{self, DomainBox, Family, SystemFn, SystemSpec, POSITIVITY_FLOOR};

/// A scalar expression in observables and their Poisson brackets.
#[derive(Clone, Debug)]
pub enum Quantity {
    Value(Observable),
    Bracket(Observable, Observable),
    Constant(Complex64),
    Sum(Vec<Quantity>),
    Product(Vec<Quantity>),
    Conj(Box<Quantity>),
    Imag(Box<Quantity>),
}

/// A quantity's value with the magnitude that sets its rounding scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluated {
    pub value: Complex64,
    pub magnitude: f64,
}

impl Quantity {
    pub fn of(f: &Observable) -> Self {
        Quantity::Value(f.clone())
    }

    pub fn bracket(f: &Observable, g: &Observable) -> Self {
        Quantity::Bracket(f.clone(), g.clone())
    }

    pub fn constant(c: Complex64) -> Self {
        Quantity::Constant(c)
    }

    pub fn real(x: f64) -> Self {
        Quantity::Constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Quantity::real(0.0)
    }

    pub fn times(self, other: Quantity) -> Self {
        match self {
            Quantity::Product(mut v) => {
                v.push(other);
                Quantity::Product(v)
            }
            q => Quantity::Product(alloc::vec![q, other]),
        }
    }

    pub fn plus(self, other: Quantity) -> Self {
        match self {
            Quantity::Sum(mut v) => {
                v.push(other);
                Quantity::Sum(v)
            }
            q => Quantity::Sum(alloc::vec![q, other]),
        }
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Quantity::Constant(c).times(self)
    }

    pub fn conj(self) -> Self {
        Quantity::Conj(Box::new(self))
    }

    pub fn imag(self) -> Self {
        Quantity::Imag(Box::new(self))
    }

    pub fn evaluate(&self, p: &PhasePoint) -> Result<Evaluated, Error> {
        Ok(match self {
            Quantity::Value(f) => {
                let v = f.value(p)?;
                Evaluated {
                    value: v,
                    magnitude: v.norm(),
                }
            }
            Quantity::Bracket(f, g) => {
                let b = observable::poisson_bracket_terms(f, g, p)?;
                Evaluated {
                    value: b.value,
                    magnitude: b.magnitude,
                }
            }
            Quantity::Constant(c) => Evaluated {
                value: *c,
                magnitude: c.norm(),
            },
            Quantity::Sum(terms) => {
                let mut acc = Evaluated {
                    value: Complex64::new(0.0, 0.0),
                    magnitude: 0.0,
                };
                for t in terms {
                    let e = t.evaluate(p)?;
                    acc.value += e.value;
                    acc.magnitude += e.magnitude;
                }
                acc
            }
            Quantity::Product(factors) => {
                let mut acc = Evaluated {
                    value: Complex64::new(1.0, 0.0),
                    magnitude: 1.0,
                };
                for f in factors {
                    let e = f.evaluate(p)?;
                    acc.value *= e.value;
                    acc.magnitude *= e.magnitude;
                }
                acc
            }
            Quantity::Conj(q) => {
                let e = q.evaluate(p)?;
                Evaluated {
                    value: e.value.conj(),
                    magnitude: e.magnitude,
                }
            }
            Quantity::Imag(q) => {
                let e = q.evaluate(p)?;
                Evaluated {
                    value: Complex64::new(e.value.im, 0.0),
                    magnitude: e.magnitude,
                }
            }
        })
    }
}

/// Tolerance classes for identity residuals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToleranceClass {
    /// Plain polynomial identities.
    Polynomial,
    /// One square root or tangent involved.
    Transcendental,
    /// `ℰ` carried through a bracket.
    ChainedEpsilon,
    /// `{H, X±}` with `m + n ≥ 5`.
    HighOrder,
}

impl ToleranceClass {
    pub fn tolerance(self) -> f64 {
        match self {
            ToleranceClass::Polynomial => 1e-12,
            ToleranceClass::Transcendental => 1e-10,
            ToleranceClass::ChainedEpsilon => 1e-9,
            ToleranceClass::HighOrder => 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IdentitySpec {
    pub label: String,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub tolerance: f64,
}

impl IdentitySpec {
    pub fn new(label: impl Into<String>, lhs: Quantity, rhs: Quantity, class: ToleranceClass) -> Self {
        IdentitySpec {
            label: label.into(),
            lhs,
            rhs,
            tolerance: class.tolerance(),
        }
    }

    /// The same identity with the sign of the right-hand side flipped.
    pub fn negated(&self) -> Self {
        IdentitySpec {
            label: format!("{}[negated]", self.label),
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone().scaled(Complex64::new(-1.0, 0.0)),
            tolerance: self.tolerance,
        }
    }

    /// Whether the right-hand side is the literal constant zero, for which
    /// sign mutation is meaningless.
    pub fn rhs_is_zero(&self) -> bool {
        matches!(self.rhs, Quantity::Constant(c) if c == Complex64::new(0.0, 0.0))
    }

    /// Residual at one point.
    pub fn residual(&self, p: &PhasePoint) -> Result<f64, Error> {
        let l = self.lhs.evaluate(p)?;
        let r = self.rhs.evaluate(p)?;
        let diff = (l.value - r.value).norm();
        let res = diff / (1.0 + l.magnitude.max(r.magnitude));
        Ok(if res.is_nan() { f64::INFINITY } else { res })
    }
}

/// Outcome of one identity over a point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityOutcome {
    pub label: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Points at which the residual exceeded the tolerance.
    pub failed_points: usize,
    /// Points at which evaluation itself failed.
    pub evaluation_errors: usize,
    pub first_error: Option<String>,
    pub worst_point: Option<PhasePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub spec: SystemSpec,
    pub seed: Option<u64>,
    pub sampler_box: Option<DomainBox>,
    pub identities: Vec<IdentityOutcome>,
    pub pass: bool,
}

impl BracketReport {
    pub fn outcome(&self, label: &str) -> Option<&IdentityOutcome> {
        self.identities.iter().find(|o| o.label == label)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityOutcome> {
        self.identities.iter().filter(|o| !o.pass)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("sampler exhausted: accepted {accepted} of {requested} points after {draws} draws")]
    Exhausted {
        accepted: usize,
        requested: usize,
        draws: usize,
    },
    #[error("sampling box is empty or inverted")]
    EmptyBox,
}

fn point_is_usable(spec: &SystemSpec, p: &PhasePoint, margin: f64) -> bool {
    if systems::domain_check_with(spec, p, margin).is_err() {
        return false;
    }
    match spec.family() {
        Family::EuclideanAniso => true,
        _ => matches!(systems::second_integral(spec, p), Ok(v) if v > POSITIVITY_FLOOR),
    }
}

/// Deterministic uniform samples from `bx` that pass the domain and
/// positivity guards. Uses ChaCha8 seeded from `seed`, so the sequence is
/// identical on every platform.
pub fn sample_points(
    spec: &SystemSpec,
    bx: &DomainBox,
    count: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>, SampleError> {
    if count == 0 {
        return Err(SampleError::ZeroCount);
    }
    let intervals = bx.intervals();
    if intervals.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(SampleError::EmptyBox);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_draws = count.saturating_mul(100);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        if draws >= max_draws {
            return Err(SampleError::Exhausted {
                accepted: out.len(),
                requested: count,
                draws,
            });
        }
        draws += 1;
        let coords = intervals.map(|(lo, hi)| loop {
            let v = rng.random_range(lo..hi);
            // open interval: reject the lower endpoint
            if v > lo {
                break v;
            }
        });
        let p = PhasePoint::from_array(coords);
        if point_is_usable(spec, &p, bx.margin) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Evaluates every identity at every point. Evaluation failures mark the
/// (identity, point) pair as failed and never abort the run.
pub fn run_suite(spec: &SystemSpec, suite: &[IdentitySpec], points: &[PhasePoint]) -> BracketReport {
    debug_assert!(duplicate_label(suite).is_none(), "duplicate identity label");
    let identities: Vec<IdentityOutcome> = suite
        .iter()
        .map(|id| {
            let mut out = IdentityOutcome {
                label: id.label.clone(),
                samples: points.len(),
                max_residual: 0.0,
                tolerance: id.tolerance,
                pass: true,
                failed_points: 0,
                evaluation_errors: 0,
                first_error: None,
                worst_point: None,
            };
            for p in points {
                match id.residual(p) {
                    Ok(r) => {
                        if r > id.tolerance {
                            out.failed_points += 1;
                        }
                        if r > out.max_residual || out.worst_point.is_none() {
                            out.max_residual = out.max_residual.max(r);
                            out.worst_point = Some(*p);
                        }
                    }
                    Err(e) => {
                        out.evaluation_errors += 1;
                        if out.first_error.is_none() {
                            out.first_error = Some(e.to_string());
                        }
                    }
                }
            }
            out.pass = out.failed_points == 0 && out.evaluation_errors == 0;
            out
        })
        .collect();
    let pass = identities.iter().all(|o| o.pass);
    BracketReport {
        spec: *spec,
        seed: None,
        sampler_box: None,
        identities,
        pass,
    }
}

/// Samples `count` points with `seed` from `bx` and runs the standard suite.
pub fn certify(spec: &SystemSpec, bx: &DomainBox, count: usize, seed: u64) -> Result<BracketReport, SampleError> {
    let points = sample_points(spec, bx, count, seed)?;
    let mut report = run_suite(spec, &standard_suite(spec), &points);
    report.seed = Some(seed);
    report.sampler_box = Some(*bx);
    Ok(report)
}

pub fn duplicate_label(suite: &[IdentitySpec]) -> Option<&str> {
    suite.iter().enumerate().find_map(|(i, a)| {
        suite[..i]
            .iter()
            .any(|b| b.label == a.label)
            .then_some(a.label.as_str())
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn symmetry_class(spec: &SystemSpec, base: ToleranceClass) -> ToleranceClass {
    if spec.gamma().order() >= 5 {
        ToleranceClass::HighOrder
    } else {
        base
    }
}

/// `X⁺, X⁻, X, Y`, each divided by `|X⁺(p)|` at the evaluation point. The
/// normalized residual of a bracket is unchanged by a constant factor, and
/// the rescaled products cannot overflow for large `m + n`.
fn unit_symmetries(spec: &SystemSpec) -> [Observable; 4] {
    let s = *spec;
    let pair = move |z: &[DualComplex; 4]| factorization::unit_higher_integral_expr(&s, z);
    [
        Observable::new("X+/|X+|", move |z| Ok(pair(z)?.0)),
        Observable::new("X-/|X+|", move |z| Ok(pair(z)?.1)),
        Observable::new("X/|X+|", move |z| {
            let (p, m) = pair(z)?;
            Ok((p + m) * 0.5)
        }),
        Observable::new("Y/|X+|", move |z| {
            let (p, m) = pair(z)?;
            Ok((p - m) / (DualComplex::i() * 2.0))
        }),
    ]
}

/// Identities common to every family: the Hamiltonian against its original
/// external-coordinate form, commutation with the second integral, `{H, X±}`
/// and conjugacy/realness of the factor functions.
fn common_identities(spec: &SystemSpec, prefix: &str, base: ToleranceClass) -> Vec<IdentitySpec> {
    let s = *spec;
    let h = systems::observable(spec, SystemFn::Hamiltonian);
    let i2 = systems::observable(spec, SystemFn::SecondIntegral);
    let f = |w| factorization::observable(spec, w);
    let h_ext = systems::external_hamiltonian_observable(spec)
        .pulled_back("H_ext∘T⁻¹", move |z: &[DualComplex; 4]| systems::to_external_coords(&s, z));
    let hx = symmetry_class(spec, base);
    let [x_plus, x_minus, x, y] = unit_symmetries(spec);
    alloc::vec![
        IdentitySpec::new(
            format!("{prefix}.hamiltonian.external_form"),
            Quantity::of(&h),
            Quantity::of(&h_ext),
            ToleranceClass::Polynomial,
        ),
        IdentitySpec::new(
            format!("{prefix}.H.I2"),
            Quantity::bracket(&h, &i2),
            Quantity::zero(),
            ToleranceClass::Polynomial,
        ),
        IdentitySpec::new(
            format!("{prefix}.symmetry.HX+"),
            Quantity::bracket(&h, &x_plus),
            Quantity::zero(),
            hx,
        ),
        IdentitySpec::new(
            format!("{prefix}.symmetry.HX-"),
            Quantity::bracket(&h, &x_minus),
            Quantity::zero(),
            hx,
        ),
        IdentitySpec::new(
            format!("{prefix}.symmetry.HX"),
            Quantity::bracket(&h, &x),
            Quantity::zero(),
            hx,
        ),
        IdentitySpec::new(
            format!("{prefix}.symmetry.HY"),
            Quantity::bracket(&h, &y),
            Quantity::zero(),
            hx,
        ),
        IdentitySpec::new(
            format!("{prefix}.conj.B"),
            Quantity::of(&f(FactorFn::LadderMinus)),
            Quantity::of(&f(FactorFn::LadderPlus)).conj(),
            ToleranceClass::Polynomial,
        ),
        IdentitySpec::new(
            format!("{prefix}.conj.A"),
            Quantity::of(&f(FactorFn::ShiftMinus)),
            Quantity::of(&f(FactorFn::ShiftPlus)).conj(),
            ToleranceClass::Polynomial,
        ),
        IdentitySpec::new(
            format!("{prefix}.conj.X"),
            Quantity::of(&x_minus),
            Quantity::of(&x_plus).conj(),
            ToleranceClass::Polynomial,
        ),
        IdentitySpec::new(
            format!("{prefix}.real.X"),
            Quantity::of(&x).imag(),
            Quantity::zero(),
            ToleranceClass::Polynomial,
        ),
        IdentitySpec::new(
            format!("{prefix}.real.Y"),
            Quantity::of(&y).imag(),
            Quantity::zero(),
            ToleranceClass::Polynomial,
        ),
    ]
}

/// Ladder-bracket identities of the form `{F, G±} = ∓ i·k·G±` for both signs.
fn eigen_pair(
    out: &mut Vec<IdentitySpec>,
    label: &str,
    f: &Observable,
    plus: &Observable,
    minus: &Observable,
    rate: Quantity,
    class: ToleranceClass,
) {
    out.push(IdentitySpec::new(
        format!("{label}+"),
        Quantity::bracket(f, plus),
        rate.clone().scaled(c(0.0, -1.0)).times(Quantity::of(plus)),
        class,
    ));
    out.push(IdentitySpec::new(
        format!("{label}-"),
        Quantity::bracket(f, minus),
        rate.scaled(c(0.0, 1.0)).times(Quantity::of(minus)),
        class,
    ));
}

fn euclidean_suite(spec: &SystemSpec) -> Vec<IdentitySpec> {
    use ToleranceClass::Polynomial;
    let (w, g) = (spec.omega(), spec.g());
    let h = systems::observable(spec, SystemFn::Hamiltonian);
    let hxi = systems::observable(spec, SystemFn::SecondIntegral);
    let hy = systems::observable(spec, SystemFn::YSector);
    let f = |w| factorization::observable(spec, w);
    let (bp, bm, lb) = (f(FactorFn::LadderPlus), f(FactorFn::LadderMinus), f(FactorFn::LadderLambda));
    let (ap, am, la) = (f(FactorFn::ShiftPlus), f(FactorFn::ShiftMinus), f(FactorFn::ShiftLambda));

    let mut out = common_identities(spec, "euclid", Polynomial);
    out.extend([
        IdentitySpec::new(
            "euclid.decomposition",
            Quantity::of(&h),
            Quantity::of(&hy).plus(Quantity::of(&hxi).scaled(c(g * g, 0.0))),
            Polynomial,
        ),
        IdentitySpec::new("euclid.H.Hy", Quantity::bracket(&h, &hy), Quantity::zero(), Polynomial),
        IdentitySpec::new("euclid.Hxi.Hy", Quantity::bracket(&hxi, &hy), Quantity::zero(), Polynomial),
        IdentitySpec::new(
            "euclid.qa",
            Quantity::of(&hxi),
            Quantity::of(&bp).times(Quantity::of(&bm)).plus(Quantity::of(&lb)),
            Polynomial,
        ),
        IdentitySpec::new(
            "euclid.qb",
            Quantity::of(&hy),
            Quantity::of(&ap).times(Quantity::of(&am)).plus(Quantity::of(&la)),
            Polynomial,
        ),
        IdentitySpec::new(
            "euclid.factorized_H",
            Quantity::of(&h),
            Quantity::of(&ap)
                .times(Quantity::of(&am))
                .plus(Quantity::of(&bp).times(Quantity::of(&bm)).scaled(c(g * g, 0.0))),
            Polynomial,
        ),
        IdentitySpec::new(
            "euclid.commpt20.B-B+",
            Quantity::bracket(&bm, &bp),
            Quantity::constant(c(0.0, -w / g)),
            Polynomial,
        ),
        IdentitySpec::new(
            "euclid.Hy_algebra.A-A+",
            Quantity::bracket(&am, &ap),
            Quantity::constant(c(0.0, w)),
            Polynomial,
        ),
    ]);
    eigen_pair(&mut out, "euclid.commpt20.HxiB", &hxi, &bp, &bm, Quantity::real(w / g), Polynomial);
    // {H^y, A±} = ±iωA±: opposite orientation, so the rate is negative.
    eigen_pair(&mut out, "euclid.Hy_algebra.HyA", &hy, &ap, &am, Quantity::real(-w), Polynomial);
    eigen_pair(&mut out, "euclid.H.B", &h, &bp, &bm, Quantity::real(g * w), Polynomial);
    eigen_pair(&mut out, "euclid.H.A", &h, &ap, &am, Quantity::real(-w), Polynomial);
    out
}

fn sec2_y() -> Observable {
    Observable::new("1/cos^2 y", |z| checked_recip(z[1].cos().square(), "cos y"))
}

fn inv_r2() -> Observable {
    Observable::new("1/r^2", |z| checked_recip(z[0].square(), "r"))
}

/// Both sides of the Higgs identity as observables of `(q1, q2) = (x, y)`.
fn higgs_sides() -> (Observable, Observable) {
    let lhs = Observable::new("tan^2 x/cos^2 y + tan^2 y", |z| {
        let sec2y = checked_recip(z[1].cos().square(), "cos y")?;
        Ok(z[0].tan().square() * sec2y + z[1].tan().square())
    });
    let rhs = Observable::new("(1 - cos^2 x cos^2 y)/(cos^2 x cos^2 y)", |z| {
        let c2 = (z[0].cos() * z[1].cos()).square();
        Ok(checked_recip(c2, "cos x cos y")? - 1.0)
    });
    (lhs, rhs)
}

fn sphere_suite(spec: &SystemSpec) -> Vec<IdentitySpec> {
    use ToleranceClass::{ChainedEpsilon, Polynomial, Transcendental};
    let (w, g) = (spec.omega(), spec.g());
    let h = systems::observable(spec, SystemFn::Hamiltonian);
    let hxi = systems::observable(spec, SystemFn::SecondIntegral);
    let e = systems::observable(spec, SystemFn::Epsilon);
    let f = |w| factorization::observable(spec, w);
    let (bp, bm, lb) = (f(FactorFn::LadderPlus), f(FactorFn::LadderMinus), f(FactorFn::LadderLambda));
    let (ap, am, la) = (f(FactorFn::ShiftPlus), f(FactorFn::ShiftMinus), f(FactorFn::ShiftLambda));
    let sec2y = sec2_y();
    let py2 = Observable::coordinate(crate::observable::Coord::P2).pow(2);
    let (higgs_l, higgs_r) = higgs_sides();

    let mut out = common_identities(spec, "sphere", ChainedEpsilon);
    out.extend([
        IdentitySpec::new(
            "sphere.hc31.decomposition",
            Quantity::of(&h),
            Quantity::of(&py2)
                .scaled(c(0.5, 0.0))
                .plus(Quantity::of(&hxi).times(Quantity::of(&sec2y)).scaled(c(g * g, 0.0)))
                .plus(Quantity::real(-w * w / 2.0)),
            Polynomial,
        ),
        IdentitySpec::new(
            "sphere.hxi_constant",
            Quantity::of(&f(FactorFn::SphereHXi)),
            Quantity::real(-w * w / (2.0 * g * g)),
            Polynomial,
        ),
        IdentitySpec::new(
            "sphere.bc.factorization",
            Quantity::of(&f(FactorFn::SphereHXi)),
            Quantity::of(&bp).times(Quantity::of(&bm)).plus(Quantity::of(&lb)),
            Transcendental,
        ),
        IdentitySpec::new(
            "sphere.mm.epsilon",
            Quantity::of(&e).times(Quantity::of(&e)),
            Quantity::of(&hxi).scaled(c(2.0, 0.0)),
            Transcendental,
        ),
        IdentitySpec::new(
            "sphere.commpt1.B-B+",
            Quantity::bracket(&bm, &bp),
            Quantity::of(&e).scaled(c(0.0, -1.0)),
            ChainedEpsilon,
        ),
        IdentitySpec::new(
            "sphere.capm.factorization",
            Quantity::of(&h),
            Quantity::of(&ap).times(Quantity::of(&am)).plus(Quantity::of(&la)),
            Transcendental,
        ),
        IdentitySpec::new(
            "sphere.capm.A-A+",
            Quantity::bracket(&am, &ap),
            Quantity::of(&e).times(Quantity::of(&sec2y)).scaled(c(0.0, g)),
            ChainedEpsilon,
        ),
        IdentitySpec::new(
            "sphere.higgs_potential",
            Quantity::of(&higgs_l),
            Quantity::of(&higgs_r),
            Transcendental,
        ),
    ]);
    eigen_pair(&mut out, "sphere.commpt1.HxiB", &hxi, &bp, &bm, Quantity::of(&e), ChainedEpsilon);
    eigen_pair(
        &mut out,
        "sphere.H.B",
        &h,
        &bp,
        &bm,
        Quantity::of(&e).times(Quantity::of(&sec2y)).scaled(c(g * g, 0.0)),
        ChainedEpsilon,
    );
    eigen_pair(
        &mut out,
        "sphere.capm.HA",
        &h,
        &ap,
        &am,
        Quantity::of(&e).times(Quantity::of(&sec2y)).scaled(c(-g, 0.0)),
        ChainedEpsilon,
    );
    out
}

fn ttw_suite(spec: &SystemSpec) -> Vec<IdentitySpec> {
    use ToleranceClass::{ChainedEpsilon, Polynomial, Transcendental};
    let (w, g) = (spec.omega(), spec.g());
    let (a2, b2) = (spec.alpha() * spec.alpha(), spec.beta() * spec.beta());
    let d = b2 - a2;
    let h = systems::observable(spec, SystemFn::Hamiltonian);
    let ht = systems::observable(spec, SystemFn::SecondIntegral);
    let e = systems::observable(spec, SystemFn::Epsilon);
    let f = |w| factorization::observable(spec, w);
    let (bp, bm) = (f(FactorFn::LadderPlus), f(FactorFn::LadderMinus));
    let (a1p, a1m, l1) = (
        f(FactorFn::FirstShiftPlus),
        f(FactorFn::FirstShiftMinus),
        f(FactorFn::FirstShiftLambda),
    );
    let (a2p, a2m, l2) = (
        f(FactorFn::SecondShiftPlus),
        f(FactorFn::SecondShiftMinus),
        f(FactorFn::SecondShiftLambda),
    );
    let (ap, am, la) = (f(FactorFn::ShiftPlus), f(FactorFn::ShiftMinus), f(FactorFn::ShiftLambda));
    let r2 = inv_r2();
    let inv_ht = Observable::new("1/H_theta", {
        let s = *spec;
        move |z| checked_recip(systems::second_integral_expr(&s, z)?, "H_theta")
    });
    // γℰ/r²
    let centrifugal_rate = Quantity::of(&e).times(Quantity::of(&r2)).scaled(c(g, 0.0));

    let mut out = common_identities(spec, "ttw", ChainedEpsilon);
    out.extend([
        IdentitySpec::new(
            "ttw.hcm.decomposition",
            Quantity::of(&h),
            Quantity::of(&Observable::coordinate(crate::observable::Coord::P1).pow(2))
                .plus(Quantity::of(&Observable::coordinate(crate::observable::Coord::Q1).pow(2)).scaled(c(w * w, 0.0)))
                .plus(Quantity::of(&ht).times(Quantity::of(&r2)).scaled(c(g * g, 0.0))),
            Polynomial,
        ),
        IdentitySpec::new(
            "ttw.bc2.product",
            Quantity::of(&bp).times(Quantity::of(&bm)),
            Quantity::of(&ht)
                .plus(Quantity::of(&inv_ht).scaled(c(d * d, 0.0)))
                .plus(Quantity::real(-2.0 * (a2 + b2))),
            Transcendental,
        ),
        IdentitySpec::new(
            "ttw.hbb.B-B+",
            Quantity::bracket(&bm, &bp),
            Quantity::of(&e)
                .times(
                    Quantity::real(1.0).plus(
                        Quantity::of(&inv_ht)
                            .times(Quantity::of(&inv_ht))
                            .scaled(c(-d * d, 0.0)),
                    ),
                )
                .scaled(c(0.0, -4.0)),
            ChainedEpsilon,
        ),
        IdentitySpec::new(
            "ttw.mixed.A1.factorization",
            Quantity::of(&h),
            Quantity::of(&a1p).times(Quantity::of(&a1m)).plus(Quantity::of(&l1)),
            Transcendental,
        ),
        IdentitySpec::new(
            "ttw.mixed.A2.factorization",
            Quantity::of(&h),
            Quantity::of(&a2p).times(Quantity::of(&a2m)).plus(Quantity::of(&l2)),
            Transcendental,
        ),
        IdentitySpec::new(
            "ttw.mixed.A1-A1+",
            Quantity::bracket(&a1m, &a1p),
            Quantity::real(w).plus(centrifugal_rate.clone()).scaled(c(0.0, -2.0)),
            ChainedEpsilon,
        ),
        IdentitySpec::new(
            "ttw.mixed.A2-A2+",
            Quantity::bracket(&a2m, &a2p),
            Quantity::real(w)
                .plus(centrifugal_rate.clone().scaled(c(-1.0, 0.0)))
                .scaled(c(0.0, -2.0)),
            ChainedEpsilon,
        ),
        IdentitySpec::new(
            "ttw.aes.factorization",
            Quantity::of(&h).times(Quantity::of(&h)),
            Quantity::of(&ap).times(Quantity::of(&am)).plus(Quantity::of(&la)),
            Transcendental,
        ),
        IdentitySpec::new(
            "ttw.paes.A-A+",
            Quantity::bracket(&am, &ap),
            centrifugal_rate.clone().times(Quantity::of(&h)).scaled(c(0.0, -8.0)),
            ChainedEpsilon,
        ),
    ]);
    eigen_pair(
        &mut out,
        "ttw.hbb.HthetaB",
        &ht,
        &bp,
        &bm,
        Quantity::of(&e).scaled(c(4.0, 0.0)),
        ChainedEpsilon,
    );
    eigen_pair(
        &mut out,
        "ttw.H.B",
        &h,
        &bp,
        &bm,
        Quantity::of(&e).times(Quantity::of(&r2)).scaled(c(4.0 * g * g, 0.0)),
        ChainedEpsilon,
    );
    eigen_pair(
        &mut out,
        "ttw.mixed.HA1",
        &h,
        &a1p,
        &a1m,
        Quantity::real(w).plus(centrifugal_rate.clone()).scaled(c(2.0, 0.0)),
        ChainedEpsilon,
    );
    eigen_pair(
        &mut out,
        "ttw.mixed.HA2",
        &h,
        &a2p,
        &a2m,
        Quantity::real(w)
            .plus(centrifugal_rate.clone().scaled(c(-1.0, 0.0)))
            .scaled(c(2.0, 0.0)),
        ChainedEpsilon,
    );
    eigen_pair(
        &mut out,
        "ttw.paes.HA",
        &h,
        &ap,
        &am,
        centrifugal_rate.scaled(c(4.0, 0.0)),
        ChainedEpsilon,
    );
    out
}

/// Every bracket, factorization and symmetry identity for the family of
/// `spec`.
pub fn standard_suite(spec: &SystemSpec) -> Vec<IdentitySpec> {
    match spec.family() {
        Family::EuclideanAniso => euclidean_suite(spec),
        Family::SphereAniso => sphere_suite(spec),
        Family::Ttw => ttw_suite(spec),
    }
}

/// Which real symmetry completes the triple `(H, I₂, ·)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryChoice {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankStatistics {
    pub labels: Vec<String>,
    pub points: usize,
    /// `histogram[k]` counts points with rank `k`.
    pub histogram: Vec<usize>,
    pub evaluation_errors: usize,
    /// Fraction of points at which the rank equals the number of functions.
    pub full_rank_fraction: f64,
}

impl RankStatistics {
    pub fn fraction_with_rank(&self, rank: usize) -> f64 {
        if self.points == 0 {
            return 0.0;
        }
        self.histogram.get(rank).copied().unwrap_or(0) as f64 / self.points as f64
    }
}

/// Jacobian-rank histogram of `fs` over `points`.
pub fn rank_statistics(fs: &[Observable], points: &[PhasePoint], tol: f64) -> RankStatistics {
    let mut histogram = alloc::vec![0; fs.len() + 1];
    let mut errors = 0;
    for p in points {
        match observable::jacobian_rank(fs, p, tol) {
            Ok(r) => histogram[r] += 1,
            Err(_) => errors += 1,
        }
    }
    let full = histogram[fs.len()];
    RankStatistics {
        labels: fs.iter().map(|f| f.label().to_string()).collect(),
        points: points.len(),
        histogram,
        evaluation_errors: errors,
        full_rank_fraction: if points.is_empty() {
            0.0
        } else {
            full as f64 / points.len() as f64
        },
    }
}

/// Functional independence of `(H, I₂, X)` or `(H, I₂, Y)`.
pub fn independence_report(spec: &SystemSpec, points: &[PhasePoint], which: SymmetryChoice) -> RankStatistics {
    let sym = match which {
        SymmetryChoice::X => FactorFn::X,
        SymmetryChoice::Y => FactorFn::Y,
    };
    let fs = [
        systems::observable(spec, SystemFn::Hamiltonian),
        systems::observable(spec, SystemFn::SecondIntegral),
        factorization::observable(spec, sym),
    ];
    rank_statistics(&fs, points, DEFAULT_RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::RationalGamma;

    fn euclid() -> SystemSpec {
        SystemSpec::euclidean(1.0, RationalGamma::new(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn zero_count_rejected() {
        let s = euclid();
        assert_eq!(
            sample_points(&s, &DomainBox::for_spec(&s), 0, 1),
            Err(SampleError::ZeroCount)
        );
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = SystemSpec::ttw(1.0, RationalGamma::ONE, 0.5, 0.8).unwrap();
        let bx = DomainBox::for_spec(&s);
        let a = sample_points(&s, &bx, 50, 9).unwrap();
        let b = sample_points(&s, &bx, 50, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_points(&s, &bx, 50, 10).unwrap());
    }

    #[test]
    fn sphere_samples_respect_margin() {
        let s = SystemSpec::sphere(1.0, RationalGamma::new(3, 2).unwrap()).unwrap();
        let bx = DomainBox::with_margin(&s, 0.05);
        let pts = sample_points(&s, &bx, 1000, 3).unwrap();
        assert_eq!(pts.len(), 1000);
        let lim = core::f64::consts::FRAC_PI_2 - 0.05;
        assert!(pts.iter().all(|p| p.q1.abs() < lim && p.q2.abs() < lim));
    }

    #[test]
    fn sampler_exhaustion() {
        // With α = β = 0, H_θ = p_θ², and a momentum box this thin never
        // clears the positivity floor.
        let s = SystemSpec::ttw(1.0, RationalGamma::ONE, 0.0, 0.0).unwrap();
        let bx = DomainBox::for_spec(&s).with_momentum_extent(1e-6);
        assert!(matches!(
            sample_points(&s, &bx, 10, 1),
            Err(SampleError::Exhausted { accepted: 0, requested: 10, draws: 1000 })
        ));
    }

    #[test]
    fn empty_point_list() {
        let s = euclid();
        let suite = standard_suite(&s);
        let report = run_suite(&s, &suite, &[]);
        assert!(report.pass);
        assert_eq!(report.identities.len(), suite.len());
        assert!(report.identities.iter().all(|o| o.samples == 0 && o.max_residual == 0.0));
    }

    #[test]
    fn evaluation_errors_do_not_abort() {
        let s = SystemSpec::sphere(1.0, RationalGamma::ONE).unwrap();
        let suite = standard_suite(&s);
        let bad = PhasePoint::new(core::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0);
        let good = PhasePoint::new(0.2, 0.1, 0.3, -0.4);
        let report = run_suite(&s, &suite, &[bad, good]);
        assert!(!report.pass);
        let hx = report.outcome("sphere.symmetry.HX+").unwrap();
        assert_eq!(hx.evaluation_errors, 1);
        assert!(hx.first_error.as_deref().unwrap().contains("singular"));
        assert!(report.outcome("sphere.higgs_potential").unwrap().evaluation_errors == 1);
    }

    #[test]
    fn labels_are_unique() {
        for spec in [
            euclid(),
            SystemSpec::sphere(1.0, RationalGamma::ONE).unwrap(),
            SystemSpec::ttw(1.0, RationalGamma::ONE, 1.0, 2.0).unwrap(),
        ] {
            assert_eq!(duplicate_label(&standard_suite(&spec)), None);
        }
    }

    #[test]
    fn euclidean_suite_small_run() {
        let s = euclid();
        let report = certify(&s, &DomainBox::for_spec(&s), 50, 42).unwrap();
        for o in &report.identities {
            assert!(o.pass, "{} max residual {:e}", o.label, o.max_residual);
        }
    }

    #[test]
    fn corrupted_identity_fails_alone() {
        let s = euclid();
        let pts = sample_points(&s, &DomainBox::for_spec(&s), 100, 42).unwrap();
        let suite: Vec<IdentitySpec> = standard_suite(&s)
            .into_iter()
            .map(|id| if id.label == "euclid.commpt20.B-B+" { id.negated() } else { id })
            .collect();
        let report = run_suite(&s, &suite, &pts);
        let failed: Vec<&str> = report.failures().map(|o| o.label.as_str()).collect();
        assert_eq!(failed, ["euclid.commpt20.B-B+[negated]"]);
    }
}
