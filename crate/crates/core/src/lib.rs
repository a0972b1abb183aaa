//! Numerical verification of sharp space-time estimates for the
//! Klein-Gordon propagator.
//!
//! The crate evaluates both sides of the sharp bilinear estimate for
//! products of one-sided Klein-Gordon waves, the derived Strichartz
//! inequalities in dimensions 2, 3 and 5, the extremizing family and its
//! asymptotics, and the concentration diagnostics of maximising
//! sequences. Everything reduces to low-dimensional radial quadrature,
//! driven by an adaptive Gauss-Kronrod engine with a-posteriori error
//! estimates.

pub mod error;
pub mod functionals;
pub mod hyperboloid;
pub mod kernel;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};
