//! Scalar tower: complex numbers and complex numbers carrying one
//! forward-mode derivative.
//!
//! Every phase-space formula in the crate is written once, generic over
//! [`Scalar`], and instantiated with [`Complex64`] for plain values or with
//! [`DualComplex`] when an exact partial derivative is needed. Real values
//! are complex values with zero imaginary part.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// Magnitude below which a denominator is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_complex(z: Complex64) -> Self;
    /// The value part, dropping any derivative information.
    fn value(self) -> Complex64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    /// Principal square root.
    fn sqrt(self) -> Self;

    fn from_real(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    fn i() -> Self {
        Self::from_complex(Complex64::i())
    }

    fn powi(self, n: u32) -> Self {
        let mut acc = Self::from_real(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    fn square(self) -> Self {
        self * self
    }
}

fn csin(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re.sin(), 0.0)
    } else {
        z.sin()
    }
}

fn ccos(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re.cos(), 0.0)
    } else {
        z.cos()
    }
}

fn ctan(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re.tan(), 0.0)
    } else {
        csin(z) / ccos(z)
    }
}

fn csqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re >= 0.0 {
        Complex64::new(z.re.sqrt(), 0.0)
    } else {
        z.sqrt()
    }
}

impl Scalar for Complex64 {
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn value(self) -> Complex64 {
        self
    }
    fn sin(self) -> Self {
        csin(self)
    }
    fn cos(self) -> Self {
        ccos(self)
    }
    fn tan(self) -> Self {
        ctan(self)
    }
    fn sqrt(self) -> Self {
        csqrt(self)
    }
}

/// A complex value with one infinitesimal part: `value + ε·derivative`,
/// `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualComplex {
    pub value: Complex64,
    pub derivative: Complex64,
}

impl DualComplex {
    pub const fn new(value: Complex64, derivative: Complex64) -> Self {
        DualComplex { value, derivative }
    }

    pub const fn constant(value: Complex64) -> Self {
        DualComplex {
            value,
            derivative: Complex64::new(0.0, 0.0),
        }
    }

    /// A real variable seeded with unit derivative.
    pub const fn variable(x: f64) -> Self {
        DualComplex {
            value: Complex64::new(x, 0.0),
            derivative: Complex64::new(1.0, 0.0),
        }
    }
}

impl Add for DualComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        DualComplex::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl Sub for DualComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        DualComplex::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl Mul for DualComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        DualComplex::new(
            self.value * rhs.value,
            self.value * rhs.derivative + self.derivative * rhs.value,
        )
    }
}

impl Div for DualComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        DualComplex::new(q, (self.derivative - q * rhs.derivative) / rhs.value)
    }
}

impl Neg for DualComplex {
    type Output = Self;
    fn neg(self) -> Self {
        DualComplex::new(-self.value, -self.derivative)
    }
}

impl Add<f64> for DualComplex {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        DualComplex::new(self.value + rhs, self.derivative)
    }
}

impl Sub<f64> for DualComplex {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        DualComplex::new(self.value - rhs, self.derivative)
    }
}

impl Mul<f64> for DualComplex {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        DualComplex::new(self.value * rhs, self.derivative * rhs)
    }
}

impl Div<f64> for DualComplex {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        DualComplex::new(self.value / rhs, self.derivative / rhs)
    }
}

impl Scalar for DualComplex {
    fn from_complex(z: Complex64) -> Self {
        DualComplex::constant(z)
    }
    fn value(self) -> Complex64 {
        self.value
    }
    fn sin(self) -> Self {
        DualComplex::new(csin(self.value), ccos(self.value) * self.derivative)
    }
    fn cos(self) -> Self {
        DualComplex::new(ccos(self.value), -csin(self.value) * self.derivative)
    }
    fn tan(self) -> Self {
        let t = ctan(self.value);
        DualComplex::new(t, (t * t + 1.0) * self.derivative)
    }
    fn sqrt(self) -> Self {
        let s = csqrt(self.value);
        DualComplex::new(s, self.derivative / (s * 2.0))
    }
    fn powi(self, n: u32) -> Self {
        if n == 0 {
            return DualComplex::from_real(1.0);
        }
        let mut lower = Complex64::new(1.0, 0.0);
        for _ in 0..n - 1 {
            lower *= self.value;
        }
        DualComplex::new(lower * self.value, lower * self.derivative * n as f64)
    }
}

/// `num / den`, failing when the denominator is numerically zero.
pub fn checked_div<S: Scalar>(num: S, den: S, what: &'static str) -> Result<S, Error> {
    let d = den.value();
    if !(d.norm() > SINGULAR_EPS) {
        return Err(Error::Singular { what });
    }
    Ok(num / den)
}

/// `1 / den` with the same guard as [`checked_div`].
pub fn checked_recip<S: Scalar>(den: S, what: &'static str) -> Result<S, Error> {
    checked_div(S::from_real(1.0), den, what)
}

/// Square root of a quantity required to exceed `floor`.
pub fn positive_sqrt<S: Scalar>(x: S, floor: f64, what: &'static str) -> Result<S, Error> {
    let v = x.value();
    if !(v.re > floor) {
        return Err(Error::Positivity { what, value: v.re });
    }
    Ok(x.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fd<F: Fn(Complex64) -> Complex64>(f: F, x: f64) -> Complex64 {
        let h = 1e-6;
        (f(Complex64::new(x + h, 0.0)) - f(Complex64::new(x - h, 0.0))) / (2.0 * h)
    }

    #[test]
    fn product_rule() {
        let a = DualComplex::new(Complex64::new(2.0, 1.0), Complex64::new(0.5, 0.0));
        let b = DualComplex::new(Complex64::new(-1.0, 3.0), Complex64::new(0.0, 2.0));
        let p = a * b;
        assert_eq!(p.value, a.value * b.value);
        assert_eq!(p.derivative, a.value * b.derivative + a.derivative * b.value);
    }

    #[test]
    fn powi_zero_is_one() {
        let x = DualComplex::variable(3.0);
        assert_eq!(x.powi(0), DualComplex::from_real(1.0));
        let c = x.powi(3);
        assert_eq!(c.value.re, 27.0);
        assert_eq!(c.derivative.re, 27.0);
    }

    #[test]
    fn guards() {
        assert!(matches!(
            checked_div(1.0_f64.into_c(), Complex64::new(1e-17, 0.0), "d"),
            Err(Error::Singular { what: "d" })
        ));
        assert!(matches!(
            positive_sqrt(Complex64::new(0.0, 0.0), 1e-8, "h"),
            Err(Error::Positivity { .. })
        ));
        assert_eq!(
            positive_sqrt(Complex64::new(4.0, 0.0), 1e-8, "h").unwrap(),
            Complex64::new(2.0, 0.0)
        );
    }

    trait IntoC {
        fn into_c(self) -> Complex64;
    }
    impl IntoC for f64 {
        fn into_c(self) -> Complex64 {
            Complex64::new(self, 0.0)
        }
    }

    proptest! {
        #[test]
        fn elementary_derivatives_match_finite_differences(x in 0.1f64..1.4) {
            let cases: [(fn(DualComplex) -> DualComplex, fn(Complex64) -> Complex64); 5] = [
                (|z| z.sin() * z.cos(), |z| Scalar::sin(z) * Scalar::cos(z)),
                (|z| z.tan(), |z| Scalar::tan(z)),
                (|z| z.sqrt() / (z + 1.0), |z| Scalar::sqrt(z) / (z + 1.0)),
                (|z| z.powi(5) - z * DualComplex::i(), |z| Scalar::powi(z, 5) - z * Complex64::i()),
                (|z| DualComplex::from_real(1.0) / z.cos().square(), |z| 1.0 / Scalar::cos(z).square()),
            ];
            for (dual, plain) in cases {
                let d = dual(DualComplex::variable(x)).derivative;
                let f = fd(plain, x);
                assert_relative_eq!(d.re, f.re, max_relative = 1e-6, epsilon = 1e-8);
                assert_relative_eq!(d.im, f.im, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }
}
