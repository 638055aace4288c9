//! Numerical toolkit for the linearized Navier–Stokes flow outside a disk
//! that rotates and sucks fluid in: the spectral function of the |n| = 1
//! modes, zero-free certification, the explicit Bessel-function resolvent
//! and the semigroup through a Dunford integral.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub mod error;
pub mod numerics;
pub mod report;
pub mod resolvent;
pub mod semigroup;
pub mod special;
pub mod spectral;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// A complex value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexResult {
    pub value: Complex64,
    pub abs_err: f64,
}
