//! Laguerre modes of the weighted half-line space and generalized
//! Gauss–Laguerre quadrature.
//!
//! l_m(t) = i^m (m!/(μ)_m) L_m^{(μ−1)}(2t) e^{−t}, orthogonal for
//! ⟨φ, ψ⟩ = (2^μ/Γ(μ)) ∫ φ ψ̄ t^{μ−1} dt with ⟨l_m, l_m⟩ = m!/(μ)_m.

use serde::Serialize;

use crate::error::{NchoError, Result};
use crate::numerics::gamma::ln_gamma;
use crate::numerics::{eigen_hermitian, CMatrix, C64, I, ONE};

pub const QUADRATURE_NODES: usize = 64;

/// L_0^{(α)}(x), …, L_n^{(α)}(x) by the three-term recurrence.
pub fn laguerre_polynomials(n: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// m!/(μ)_m, the squared norm of l_m.
pub fn mode_norm(m: usize, mu: f64) -> f64 {
    (0..m).fold(1.0, |acc, k| acc * (k as f64 + 1.0) / (mu + k as f64))
}

/// l_m(t) for m = 0, …, count−1.
pub fn laguerre_modes(count: usize, mu: f64, t: f64) -> Vec<C64> {
    if count == 0 {
        return vec![];
    }
    let poly = laguerre_polynomials(count - 1, mu - 1.0, 2.0 * t);
    let decay = (-t).exp();
    let mut phase = ONE;
    let mut norm = 1.0;
    let mut out = Vec::with_capacity(count);
    for (m, &l) in poly.iter().enumerate() {
        if m > 0 {
            phase *= I;
            norm *= m as f64 / (mu + m as f64 - 1.0);
        }
        out.push(phase * (norm * l * decay));
    }
    out
}

/// l_m(t)/‖l_m‖ for m = 0, …, count−1; an orthonormal family.
pub fn orthonormal_modes(count: usize, mu: f64, t: f64) -> Vec<C64> {
    laguerre_modes(count, mu, t)
        .into_iter()
        .enumerate()
        .map(|(m, v)| v / mode_norm(m, mu).sqrt())
        .collect()
}

/// Nodes and weights for ∫₀^∞ x^α e^{−x} f(x) dx.
#[derive(Debug, Clone, Serialize)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Nodes from the Jacobi matrix, polished by Newton on L_n^{(α)}; weights from
/// Γ(n+α+1) x / (n! (n+α)² L_{n−1}(x)²), evaluated in logarithms.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<GaussLaguerre> {
    if n == 0 || !(alpha > -1.0) {
        return Err(NchoError::Contract(format!(
            "Gauss-Laguerre needs n > 0 and alpha > -1 (got n = {n}, alpha = {alpha})"
        )));
    }
    let jacobi = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(2.0 * i as f64 + alpha + 1.0, 0.0)
        } else if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            C64::new((k * (k + alpha)).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut nodes = eigen_hermitian(&jacobi, false)?.values;
    let nf = n as f64;
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let l = laguerre_polynomials(n, alpha, *x);
            // x L_n' = n L_n − (n+α) L_{n−1}
            let deriv = (nf * l[n] - (nf + alpha) * l[n - 1]) / *x;
            if deriv == 0.0 {
                break;
            }
            let step = l[n] / deriv;
            *x -= step;
            if step.abs() <= 2.0 * f64::EPSILON * x.abs() {
                break;
            }
        }
    }
    let log_front = ln_gamma(nf + alpha + 1.0) - ln_gamma(nf + 1.0) - 2.0 * (nf + alpha).ln();
    let weights = nodes
        .iter()
        .map(|&x| {
            let prev = laguerre_polynomials(n - 1, alpha, x)[n - 1];
            (log_front + x.ln() - 2.0 * prev.abs().ln()).exp()
        })
        .collect();
    Ok(GaussLaguerre {
        alpha,
        nodes,
        weights,
    })
}

/// ⟨l_m, l_n⟩ for m, n < size by 64-node quadrature (exact up to size 64).
pub fn gram_matrix(size: usize, mu: f64) -> Result<CMatrix> {
    if 2 * size > 2 * QUADRATURE_NODES {
        return Err(NchoError::Unsupported(format!(
            "Gram matrix of size {size} exceeds the exactness of {QUADRATURE_NODES}-node quadrature"
        )));
    }
    let rule = gauss_laguerre(QUADRATURE_NODES, mu - 1.0)?;
    let gamma_mu = ln_gamma(mu).exp();
    let scaled: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            let poly = laguerre_polynomials(size.saturating_sub(1), mu - 1.0, x);
            (0..size).map(|m| mode_norm(m, mu) * poly[m]).collect()
        })
        .collect();
    let phase = |m: usize| I.powu(m as u32);
    Ok(CMatrix::from_fn(size, size, |m, n| {
        let real: f64 = rule
            .weights
            .iter()
            .zip(&scaled)
            .map(|(w, v)| w * v[m] * v[n])
            .sum::<f64>()
            / gamma_mu;
        phase(m) * phase(n).conj() * real
    }))
}
