//! Eigenfunctions on the half-line from truncation eigenvectors.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{NchoError, Result};
use crate::numerics::eigen::hermitian_function;
use crate::numerics::{C64, ZERO};
use crate::pencil::NchoProblem;

use super::laguerre::{mode_norm, orthonormal_modes};
use super::truncation::build_truncated;

pub const DEFAULT_PROFILE_ORDER: usize = 128;
/// Relative distance from the requested λ to the nearest section eigenvalue.
pub const EIGENVALUE_MATCH_TOL: f64 = 1e-6;
/// Coefficients below this fraction of the largest are excluded from the
/// decay fit; they are dominated by round-off.
const DECAY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct EigenProfile {
    /// Section eigenvalue actually used.
    pub lambda: f64,
    pub requested: f64,
    pub order: usize,
    pub t: Vec<f64>,
    /// values[k][i]: component i at t[k].
    pub values: Vec<Vec<(f64, f64)>>,
    /// ‖u_m‖ for the expansion f = Σ u_m l_m.
    pub coefficient_norms: Vec<f64>,
    /// Geometric decay rate of the tail of `coefficient_norms`.
    pub decay_ratio: Option<f64>,
}

impl EigenProfile {
    /// Columns t, re_1, im_1, re_2, im_2, …
    pub fn to_csv(&self) -> String {
        let p = self.values.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=p {
            let _ = write!(out, ",re_{i},im_{i}");
        }
        out.push('\n');
        for (t, row) in self.t.iter().zip(&self.values) {
            let _ = write!(out, "{t}");
            for (re, im) in row {
                let _ = write!(out, ",{re},{im}");
            }
            out.push('\n');
        }
        out
    }
}

/// Least-squares slope of log‖u_m‖ over m ∈ [from, to], as a ratio.
pub fn decay_ratio(norms: &[f64], from: usize, to: usize) -> Option<f64> {
    let top = norms.iter().copied().fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = (from..=to.min(norms.len().saturating_sub(1)))
        .filter(|&m| norms[m] > DECAY_FLOOR * top)
        .map(|m| (m as f64, norms[m].ln()))
        .collect();
    if points.len() < 4 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

/// The eigenfunction for the section eigenvalue nearest `lambda`, with unit
/// norm, evaluated on `t_grid`. The largest coefficient is made real positive.
pub fn eigenfunction_profile(
    problem: &NchoProblem,
    lambda: f64,
    order: usize,
    t_grid: &[f64],
) -> Result<EigenProfile> {
    if let Some(&t) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(NchoError::Contract(format!("profile grid point {t} is not in [0, ∞)")));
    }
    let section = build_truncated(problem, order)?;
    let (values, vectors) = section.matrix.dense_eigenpairs()?;
    let (index, nearest) = values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| (a.1 - lambda).abs().total_cmp(&(b.1 - lambda).abs()))
        .expect("nonempty section");
    let distance = (nearest - lambda).abs();
    if distance > EIGENVALUE_MATCH_TOL * lambda.abs().max(1.0) {
        return Err(NchoError::NotAnEigenvalue {
            lambda,
            nearest,
            distance,
        });
    }
    let p = problem.p();
    let mu = problem.mu();
    let mut x = vectors.column(index);
    let big = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ZERO);
    if big != ZERO {
        let unit = big.conj() / big.norm();
        x.iter_mut().for_each(|z| *z *= unit);
    }
    // Undo the weight congruence: f = W^{−1/2} g.
    let back = if problem.has_identity_weight() {
        None
    } else {
        Some(hermitian_function(problem.weight(), |w| 1.0 / w.sqrt())?)
    };
    let blocks: Vec<Vec<C64>> = x
        .chunks(p)
        .map(|g| match &back {
            Some(s) => s.mul_vec(g),
            None => g.to_vec(),
        })
        .collect();
    let coefficient_norms: Vec<f64> = blocks
        .iter()
        .enumerate()
        .map(|(m, b)| b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / mode_norm(m, mu).sqrt())
        .collect();
    let mut values_out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let modes = orthonormal_modes(order, mu, t);
        let mut f = vec![ZERO; p];
        for (b, l) in blocks.iter().zip(&modes) {
            for (fi, bi) in f.iter_mut().zip(b) {
                *fi += bi * l;
            }
        }
        values_out.push(f.iter().map(|z| (z.re, z.im)).collect());
    }
    let decay = decay_ratio(&coefficient_norms, order / 8, order - 1);
    Ok(EigenProfile {
        lambda: nearest,
        requested: lambda,
        order,
        t: t_grid.to_vec(),
        values: values_out,
        coefficient_norms,
        decay_ratio: decay,
    })
}

/// Uniform grid of `n` points on [0, t_max].
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::CMatrix;

    fn scalar_problem() -> NchoProblem {
        NchoProblem::new(
            0.5,
            CMatrix::from_real_rows(&[vec![1.0]]),
            CMatrix::from_real_rows(&[vec![0.25]]),
            CMatrix::zeros(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn ground_state_tail_decays_like_inner_pole() {
        let lambda = 3f64.sqrt() / 4.0;
        let prof = eigenfunction_profile(&scalar_problem(), lambda, 64, &[0.0, 1.0]).unwrap();
        let alpha = 2.0 - 3f64.sqrt();
        let ratio = decay_ratio(&prof.coefficient_norms, 10, 30).unwrap();
        assert!((ratio - alpha).abs() < 0.02, "{ratio} vs {alpha}");
    }

    #[test]
    fn profile_is_stable_under_order_doubling() {
        let lambda = 3f64.sqrt() / 4.0 * 5.0;
        let grid = uniform_grid(6.0, 13);
        let a = eigenfunction_profile(&scalar_problem(), lambda, 64, &grid).unwrap();
        let b = eigenfunction_profile(&scalar_problem(), lambda, 128, &grid).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            let d = ((ra[0].0 - rb[0].0).powi(2) + (ra[0].1 - rb[0].1).powi(2)).sqrt();
            assert!(d < 1e-8, "{d:e}");
        }
    }

    #[test]
    fn off_spectrum_value_is_rejected() {
        let err = eigenfunction_profile(&scalar_problem(), 1.0, 32, &[0.0]).unwrap_err();
        assert!(matches!(err, NchoError::NotAnEigenvalue { .. }));
    }

    #[test]
    fn csv_has_component_columns() {
        let lambda = 3f64.sqrt() / 4.0;
        let prof = eigenfunction_profile(&scalar_problem(), lambda, 32, &[0.0, 0.5]).unwrap();
        let csv = prof.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,re_1,im_1"));
        assert_eq!(csv.lines().count(), 3);
    }
}
