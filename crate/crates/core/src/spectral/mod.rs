//! Discrete spectrum: Laguerre truncation, the connection determinant, and
//! eigenfunction profiles.

use serde::Serialize;

pub mod confluence;
pub mod connection;
pub mod laguerre;
pub mod profile;
pub mod truncation;

pub use confluence::{confluence_sweep, rabi_truncated, ConfluenceRow, ConfluenceSweep};
pub use connection::{
    connection_determinant, refine_eigenvalue, spectrum_connection, ConnectionSolver, RefinedRoot,
};
pub use laguerre::{gauss_laguerre, gram_matrix, laguerre_modes, mode_norm, GaussLaguerre};
pub use profile::{eigenfunction_profile, EigenProfile};
pub use truncation::{build_truncated, spectrum_truncated, BlockTridiagonal, TruncatedOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Truncation,
    Connection,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub method: SpectrumMethod,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Per-eigenvalue error estimate: the change between the last two orders
    /// for truncation; for the connection determinant, |T(λ)| plus the
    /// spread of T between two matching radii, divided by the local slope.
    pub estimates: Vec<f64>,
    /// Truncation orders used (for the connection method, the seed order).
    pub orders: Vec<usize>,
    pub flags: Vec<String>,
}
