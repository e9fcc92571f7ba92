//! Dense complex linear algebra and root-finding kernels.

pub mod eigen;
pub mod gamma;
pub mod matrix;
pub mod poly;
pub mod rng;

pub use eigen::{eigen_general_small, eigen_hermitian, HermitianEigen};
pub use matrix::{adjugate_and_det, c, re, CMatrix, C64, I, ONE, ZERO};
pub use poly::{poly_roots, Root};
