//! Finite sections of the operator in the Laguerre basis.
//!
//! The matrix is Hermitian block tridiagonal with p×p blocks, so as a scalar
//! matrix it is banded with half-bandwidth 2p−1. Eigenvalue counts below a
//! shift come from the inertia of a banded LDL* factorization; individual
//! eigenvalues from bisection on those counts.

use crate::error::{NchoError, Result};
use crate::numerics::{eigen_hermitian, CMatrix, C64, ZERO};
use crate::pencil::NchoProblem;

use super::{SpectrumMethod, SpectrumResult};

pub const MIN_ORDER: usize = 64;
pub const MAX_ORDER: usize = 8192;
/// Above this scalar dimension eigenvectors are not computed densely.
pub const DENSE_VECTOR_LIMIT: usize = 1024;

/// Hermitian block tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub block: usize,
    pub diagonal: Vec<CMatrix>,
    /// `lower[m]` is block (m+1, m); block (m, m+1) is its adjoint.
    pub lower: Vec<CMatrix>,
}

impl BlockTridiagonal {
    pub fn new(diagonal: Vec<CMatrix>, lower: Vec<CMatrix>) -> Result<Self> {
        let block = diagonal.first().map_or(0, |d| d.rows());
        if diagonal.is_empty() || lower.len() + 1 != diagonal.len() {
            return Err(NchoError::Dimension(format!(
                "{} diagonal blocks need {} couplings, got {}",
                diagonal.len(),
                diagonal.len().saturating_sub(1),
                lower.len()
            )));
        }
        if diagonal.iter().chain(&lower).any(|b| b.rows() != block || b.cols() != block) {
            return Err(NchoError::Dimension("blocks of unequal size".into()));
        }
        Ok(BlockTridiagonal {
            block,
            diagonal: diagonal.iter().map(CMatrix::hermitian_part).collect(),
            lower,
        })
    }

    pub fn blocks(&self) -> usize {
        self.diagonal.len()
    }

    pub fn dimension(&self) -> usize {
        self.block * self.blocks()
    }

    pub fn half_bandwidth(&self) -> usize {
        (2 * self.block).saturating_sub(1)
    }

    /// Scalar entry (i, j) for |i − j| within the band.
    fn entry(&self, i: usize, j: usize) -> C64 {
        let p = self.block;
        let (bi, bj) = (i / p, j / p);
        let (ri, rj) = (i % p, j % p);
        if bi == bj {
            self.diagonal[bi][(ri, rj)]
        } else if bi == bj + 1 {
            self.lower[bj][(ri, rj)]
        } else if bj == bi + 1 {
            self.lower[bi][(rj, ri)].conj()
        } else {
            ZERO
        }
    }

    pub fn assemble(&self) -> CMatrix {
        let n = self.dimension();
        let mut out = CMatrix::zeros(n, n);
        let p = self.block;
        for (m, d) in self.diagonal.iter().enumerate() {
            out.set_block(m * p, m * p, d);
        }
        for (m, l) in self.lower.iter().enumerate() {
            out.set_block((m + 1) * p, m * p, l);
            out.set_block(m * p, (m + 1) * p, &l.adjoint());
        }
        out
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dimension();
        let w = self.half_bandwidth();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let centre = self.entry(i, i).re;
            let radius: f64 = (i.saturating_sub(w)..(i + w + 1).min(n))
                .filter(|&j| j != i)
                .map(|j| self.entry(i, j).norm())
                .sum();
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`, from the signs of the
    /// pivots of T − σI = LDL*. Exactly zero pivots are nudged negative.
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut scratch = SturmScratch::new(self.dimension(), self.half_bandwidth());
        self.count_below_with(sigma, &mut scratch)
    }

    fn count_below_with(&self, sigma: f64, s: &mut SturmScratch) -> usize {
        let n = self.dimension();
        let w = self.half_bandwidth();
        let tiny = f64::EPSILON * (1.0 + sigma.abs()) * 1e-3;
        let mut negatives = 0;
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..i {
                let mut acc = self.entry(i, j);
                for k in lo.max(j.saturating_sub(w))..j {
                    acc -= s.l(i, k) * s.d[k] * s.l(j, k).conj();
                }
                *s.l_mut(i, j) = acc / s.d[j];
            }
            let mut d = self.entry(i, i).re - sigma;
            for k in lo..i {
                d -= s.l(i, k).norm_sqr() * s.d[k];
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                negatives += 1;
            }
            s.d[i] = d;
        }
        negatives
    }

    /// The `count` lowest eigenvalues by bisection on the inertia count.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        let n = self.dimension();
        if count > n {
            return Err(NchoError::Dimension(format!(
                "{count} eigenvalues requested from a section of dimension {n}"
            )));
        }
        if count == 0 {
            return Ok(vec![]);
        }
        let mut scratch = SturmScratch::new(n, self.half_bandwidth());
        let (g_lo, g_hi) = self.gershgorin();
        let width = (g_hi - g_lo).max(1.0);
        let floor = g_lo - 1e-3 * width;
        // Shrink the upper end while it still encloses `count` eigenvalues.
        let mut ceiling = g_hi + 1e-3 * width;
        let mut probe = floor + 1.0;
        while probe < ceiling {
            if self.count_below_with(probe, &mut scratch) >= count {
                ceiling = probe;
                break;
            }
            probe = floor + 2.0 * (probe - floor);
        }

        let mut lower = vec![floor; count];
        let mut upper = vec![ceiling; count];
        for k in 0..count {
            for _ in 0..200 {
                let (a, b) = (lower[k], upper[k]);
                if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) + f64::MIN_POSITIVE {
                    break;
                }
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let below = self.count_below_with(mid, &mut scratch);
                // Every probe tightens the brackets of all pending indices.
                for j in k..count {
                    if j < below {
                        upper[j] = upper[j].min(mid);
                    } else {
                        lower[j] = lower[j].max(mid);
                    }
                }
            }
        }
        Ok((0..count).map(|k| 0.5 * (lower[k] + upper[k])).collect())
    }

    /// All eigenvalues from the dense Hermitian solver.
    pub fn dense_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigen_hermitian(&self.assemble(), false)?.values)
    }

    /// Dense eigenpairs; limited to moderate sizes.
    pub fn dense_eigenpairs(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.dimension();
        if n > DENSE_VECTOR_LIMIT {
            return Err(NchoError::Unsupported(format!(
                "dense eigenvectors above dimension {DENSE_VECTOR_LIMIT} (requested {n})"
            )));
        }
        let eig = eigen_hermitian(&self.assemble(), true)?;
        Ok((eig.values, eig.vectors.expect("vectors requested")))
    }
}

struct SturmScratch {
    width: usize,
    l: Vec<C64>,
    d: Vec<f64>,
}

impl SturmScratch {
    fn new(n: usize, width: usize) -> Self {
        SturmScratch {
            width,
            l: vec![ZERO; n * (width + 1)],
            d: vec![0.0; n],
        }
    }

    /// L(i, j) for i − w ≤ j < i, stored by offset.
    fn l(&self, i: usize, j: usize) -> C64 {
        self.l[i * (self.width + 1) + (i - j)]
    }

    fn l_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.l[i * (self.width + 1) + (i - j)]
    }
}

/// The order-M section of L − 2C₀ for a problem with W = I.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub order: usize,
    pub mu: f64,
    pub matrix: BlockTridiagonal,
}

impl TruncatedOperator {
    pub fn p(&self) -> usize {
        self.matrix.block
    }
}

/// Diagonal blocks A(2m+μ) − 2C₀ and couplings 2B√((m+1)(m+μ)) at (m+1, m).
/// A non-identity weight is first removed by congruence with W^{−1/2}.
pub fn build_truncated(problem: &NchoProblem, order: usize) -> Result<TruncatedOperator> {
    if order == 0 {
        return Err(NchoError::Dimension("truncation order must be positive".into()));
    }
    let problem = problem.unweighted()?;
    let mu = problem.mu();
    let two_c0 = problem.c0().scale_real(2.0);
    let diagonal = (0..order)
        .map(|m| &problem.a().scale_real(2.0 * m as f64 + mu) - &two_c0)
        .collect();
    let lower = (0..order - 1)
        .map(|m| {
            let mf = m as f64;
            problem.b().scale_real(2.0 * ((mf + 1.0) * (mf + mu)).sqrt())
        })
        .collect();
    Ok(TruncatedOperator {
        order,
        mu,
        matrix: BlockTridiagonal::new(diagonal, lower)?,
    })
}

/// Lowest `count` eigenvalues, doubling the order from 64 until consecutive
/// orders agree within `tol·max(1,|λ|)`.
pub fn spectrum_truncated(problem: &NchoProblem, count: usize, tol: f64) -> Result<SpectrumResult> {
    converge_by_doubling(count, tol, |order| {
        build_truncated(problem, order).map(|t| t.matrix)
    })
}

/// Shared doubling loop for any family of sections indexed by order.
pub(crate) fn converge_by_doubling(
    count: usize,
    tol: f64,
    section: impl Fn(usize) -> Result<BlockTridiagonal>,
) -> Result<SpectrumResult> {
    let mut order = MIN_ORDER;
    let first = section(order)?;
    while first.block * order < count {
        order *= 2;
    }
    let mut previous = section(order)?.lowest_eigenvalues(count)?;
    let mut orders = vec![order];
    loop {
        let next_order = order * 2;
        if next_order > MAX_ORDER {
            return Err(NchoError::Convergence(format!(
                "lowest {count} eigenvalues not stable to {tol:e} at order {order}"
            )));
        }
        let current = section(next_order)?.lowest_eigenvalues(count)?;
        orders.push(next_order);
        let estimates: Vec<f64> = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).abs())
            .collect();
        let converged = estimates
            .iter()
            .zip(&current)
            .all(|(e, v)| *e <= tol * v.abs().max(1.0));
        if converged {
            return Ok(SpectrumResult {
                method: SpectrumMethod::Truncation,
                eigenvalues: current,
                estimates,
                orders,
                flags: vec![],
            });
        }
        previous = current;
        order = next_order;
    }
}
