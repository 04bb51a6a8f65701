//! Realization calculus, pseudo-spectral factorization and interpolation for
//! generalized positive even rational matrix functions over the complex
//! numbers and the quaternions.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod factorization;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod quat;
pub mod realization;
pub mod sampling;
pub mod slicefun;

pub use error::{Error, Result};
pub use quat::{QuatMatrix, Quaternion};
pub use realization::{QuatRealization, Realization};
