use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::systems::Family;

/// Errors raised while evaluating phase-space functions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("singular denominator: {what}")]
    Singular { what: &'static str },
    #[error("{what} must be positive before taking a square root, got {value}")]
    Positivity { what: &'static str, value: f64 },
    #[error("point outside the valid domain: {0}")]
    Domain(DomainViolation),
    #[error("{operation} is not defined for the {family} family")]
    Unsupported {
        operation: &'static str,
        family: Family,
    },
    #[error("phase point has non-finite coordinates")]
    NonFinite,
    #[error("{label} is not real at this point (imaginary part {imag:e})")]
    NotReal { label: String, imag: f64 },
    #[error("invalid system parameters: {0}")]
    InvalidSpec(String),
}

/// The constraint a phase point violates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum DomainViolation {
    NonFinite,
    /// `|ξ| < π/2 − margin` on the sphere.
    XiBound { value: f64, limit: f64 },
    /// `|y| < π/2 − margin` on the sphere.
    YBound { value: f64, limit: f64 },
    /// `r > margin` for TTW.
    RadiusBound { value: f64, limit: f64 },
    /// `margin < θ < π/2 − margin` for TTW.
    AngleBound { value: f64, lower: f64, upper: f64 },
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainViolation::NonFinite => f.write_str("non-finite coordinate"),
            DomainViolation::XiBound { value, limit } => {
                write!(f, "|xi| = {} not below {}", value.abs(), limit)
            }
            DomainViolation::YBound { value, limit } => {
                write!(f, "|y| = {} not below {}", value.abs(), limit)
            }
            DomainViolation::RadiusBound { value, limit } => {
                write!(f, "r = {} not above {}", value, limit)
            }
            DomainViolation::AngleBound {
                value,
                lower,
                upper,
            } => write!(f, "theta = {} outside ({}, {})", value, lower, upper),
        }
    }
}

impl From<DomainViolation> for Error {
    fn from(v: DomainViolation) -> Self {
        Error::Domain(v)
    }
}
