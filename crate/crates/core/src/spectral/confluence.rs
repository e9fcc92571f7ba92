//! Confluence of the NCHO spectrum onto a Rabi-type spectrum as μ → ∞.
//!
//! With A = Ã, B = B̃/√μ and C₀ = C̃₀ + (μ/2)Ã the section of L − 2C₀ has
//! blocks 2(Ãm − C̃₀) and 2B̃√(m+1)·√(1 + m/μ), so λ/2 approaches the
//! spectrum of Ãn − C̃₀ with couplings B̃√(n+1) at rate O(1/μ).

use serde::Serialize;

use crate::error::{NchoError, Result};
use crate::heun::RabiParameters;
use crate::numerics::CMatrix;
use crate::pencil::{positivity_margin, NchoProblem};

use super::truncation::{converge_by_doubling, spectrum_truncated, BlockTridiagonal};

/// Section of the Rabi-type operator: diagonal Ãn − C̃₀, (n+1, n) block B̃√(n+1).
pub fn rabi_truncated(
    a_tilde: &CMatrix,
    b_tilde: &CMatrix,
    c0_tilde: &CMatrix,
    order: usize,
) -> Result<BlockTridiagonal> {
    if order == 0 {
        return Err(NchoError::Dimension("truncation order must be positive".into()));
    }
    let diagonal = (0..order)
        .map(|n| &a_tilde.scale_real(n as f64) - c0_tilde)
        .collect();
    let lower = (0..order - 1)
        .map(|n| b_tilde.scale_real((n as f64 + 1.0).sqrt()))
        .collect();
    BlockTridiagonal::new(diagonal, lower)
}

/// The NCHO problem whose halved spectrum tends to the Rabi spectrum.
pub fn ncho_at(mu: f64, a_tilde: &CMatrix, b_tilde: &CMatrix, c0_tilde: &CMatrix) -> Result<NchoProblem> {
    let c0 = c0_tilde + &a_tilde.scale_real(mu / 2.0);
    NchoProblem::new(mu, a_tilde.clone(), b_tilde.scale_real(1.0 / mu.sqrt()), c0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfluenceRow {
    pub mu: f64,
    /// λ/2 for the lowest levels.
    pub scaled_spectrum: Vec<f64>,
    /// max_k |λ_k/2 − E_k|.
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfluenceSweep {
    pub model: RabiParameters,
    pub rabi_spectrum: Vec<f64>,
    pub rows: Vec<ConfluenceRow>,
    /// deviation(μ_{k+1}) / deviation(μ_k).
    pub ratios: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Compares the lowest `count` levels of the NCHO problems at each μ with the
/// Rabi model (Ã, B̃, C̃₀) = (ωI, gσ₁, −Δσ₃ − εσ₁).
pub fn confluence_sweep(model: &RabiParameters, mus: &[f64], count: usize, tol: f64) -> Result<ConfluenceSweep> {
    let zero_lambda = RabiParameters { lambda: 0.0, ..*model };
    let (a, b, c0) = zero_lambda.matrices();
    let rabi = converge_by_doubling(count, tol, |order| rabi_truncated(&a, &b, &c0, order))?;
    let mut rows = Vec::with_capacity(mus.len());
    for &mu in mus {
        let problem = ncho_at(mu, &a, &b, &c0)?;
        let margin = positivity_margin(&problem, 256);
        if !margin.is_positive() {
            return Err(NchoError::Positivity(format!(
                "NCHO at mu = {mu} is not positive (margin {:.3e}); need mu > 4g^2/omega^2",
                margin.margin
            )));
        }
        let levels = spectrum_truncated(&problem, count, tol)?;
        let scaled: Vec<f64> = levels.eigenvalues.iter().map(|l| l / 2.0).collect();
        let deviation = scaled
            .iter()
            .zip(&rabi.eigenvalues)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        rows.push(ConfluenceRow {
            mu,
            scaled_spectrum: scaled,
            deviation,
        });
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].deviation / w[0].deviation).collect();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    Ok(ConfluenceSweep {
        model: *model,
        rabi_spectrum: rabi.eigenvalues,
        rows,
        ratios,
        strictly_decreasing,
    })
}
