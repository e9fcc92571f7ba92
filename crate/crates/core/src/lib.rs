//! Generalized non-commutative harmonic oscillators: reduction of the
//! eigenvalue problem to a Fuchsian system on the unit disk, the scalar
//! Heun-type equation for 2×2 data, and two independent spectrum solvers.

pub mod covariance;
pub mod error;
pub mod fuchsian;
pub mod heun;
pub mod numerics;
pub mod pencil;
pub mod sampling;
pub mod spectral;

pub use error::{NchoError, Result};
pub use numerics::{CMatrix, C64};
pub use pencil::NchoProblem;
