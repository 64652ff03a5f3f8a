//! K-finite matrix coefficients of the genuine discrete series of the
//! metaplectic double cover of SL2(ℝ), and threshold arithmetic for the
//! non-vanishing of their Poincaré series over congruence subgroups.
//!
//! The crate is `no_std` and needs only `alloc` (element lists, grid
//! reports). Transcendental functions come from [`libm`].
//!
//! Module map:
//!
//! - [`metgroup`]: the group itself, as a matrix with a sign bit selecting
//!   the square root of the cocycle, with Iwasawa and Cartan coordinates
//!   and the Cayley-conjugate disk realization.
//! - [`coefficients`]: the basis functions `f_{k,m}`, the lift `F_f`,
//!   the matrix coefficients `F_{k,m}` and finite-difference checks of
//!   the Casimir eigen-equation and the raising operator.
//! - [`quadrature`]: Gauss–Legendre integration, the incomplete beta
//!   function and Haar-measure integrals.
//! - [`betamedian`]: the median of the beta distribution.
//! - [`nonvanishing`]: thresholds `N_{k,m}`, radius windows, certificates
//!   and grid verification.
//! - [`poincare`]: congruence subgroup enumeration, the theta multiplier
//!   and partial Poincaré sums.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod betamedian;
pub mod coefficients;
mod error;
pub mod metgroup;
pub mod nonvanishing;
pub mod poincare;
pub mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use betamedian::{median, MedianResult};
pub use coefficients::Weight;
pub use metgroup::{CartanCoords, HalfInt, IwasawaCoords, MetElement, Sign};
pub use nonvanishing::{certify, threshold_n, Certificate, Verdict};
pub use quadrature::{BetaParams, QuadratureSpec};
