//! Factorization of classical superintegrable Hamiltonians.
//!
//! Three two-degree-of-freedom families are covered: the anisotropic
//! oscillator on the Euclidean plane, the anisotropic oscillator on the unit
//! sphere (written in geodesic parallel coordinates), and the
//! Tremblay–Turbiner–Winternitz (TTW) system. For each family the crate
//! provides the Hamiltonian and its quadratic integral, the ladder (`B±`) and
//! shift (`A±`) factor functions, the higher-order integrals `X± = (B±)ⁿ(A±)ᵐ`
//! available for rational `γ = m/n`, and the machinery to check every
//! Poisson-bracket relation between them numerically with exact derivatives.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and reporting live in the `superfact` crate.
//!
//! ```
//! use superfact_core::{factorization, observable::poisson_bracket, systems::SystemSpec};
//! use superfact_core::{PhasePoint, RationalGamma};
//!
//! let spec = SystemSpec::euclidean(1.0, RationalGamma::new(2, 1).unwrap()).unwrap();
//! let h = superfact_core::systems::observable(&spec, superfact_core::systems::SystemFn::Hamiltonian);
//! let x_plus = factorization::observable(&spec, factorization::FactorFn::XPlus);
//! let p = PhasePoint::new(0.3, -0.7, 1.1, 0.4);
//! let bracket = poisson_bracket(&h, &x_plus, &p).unwrap();
//! assert!(bracket.norm() < 1e-12);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod factorization;
pub mod levelset;
pub mod linalg;
pub mod observable;
pub mod scalar;
pub mod systems;
pub mod verification;

pub use error::{DomainViolation, Error};
pub use observable::{Coord, Observable, PhasePoint};
pub use scalar::{DualComplex, Scalar};
pub use systems::{DomainBox, Family, RationalGamma, SystemSpec};

pub use num_complex::Complex64;
