//! Numerical laboratory for the circle and divisor problems, moments of the
//! Riemann zeta function on the critical line, and the Laplace transforms
//! that connect them.

pub mod arith;
pub mod calib;
pub mod errterm;
pub mod error;
pub mod fit;
pub mod funceq;
pub mod laplace;
pub mod quad;
pub mod report;
pub mod special;
pub mod zeta;

pub use error::{LabError, Result};
