//! Problem data and the partial-fraction structure of the quadratic pencil
//! Q(z) = Bz² + Az + B†.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{NchoError, Result};
use crate::numerics::eigen::{hermitian_function, numerical_rank, singular_values};
use crate::numerics::matrix::{adjugate_and_det, complex_vec, CMatrix, C64, I, ZERO};
use crate::numerics::poly::{poly_derivative, poly_eval, poly_roots};
use crate::numerics::rng::{hash_floats, seeded};
use crate::numerics::{eigen, eigen_hermitian};

/// Tolerance for Hermiticity of input data, relative to the largest entry.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;
/// Determinant coefficients below this fraction of the largest are exact zeros.
pub const DET_TRIM_TOL: f64 = 1e-12;
/// Roots of det Q closer than this (relative) are one pole. A double root is
/// only resolved to about √ε, so the merge radius sits above that.
pub const POLE_CLUSTER_TOL: f64 = 1e-6;
/// Poles with ||α| − 1| below this are treated as lying on the unit circle.
pub const UNIT_CIRCLE_TOL: f64 = 1e-10;
/// Pairing tolerance α ↔ 1/ᾱ, relative.
pub const PAIRING_TOL: f64 = 1e-8;
const KERNEL_RANK_TOL: f64 = 1e-7;
const MAX_DIMENSION: usize = 8;

/// Matrix data of the eigenvalue problem.
///
/// The spectral family is C(λ) = C₀ + (λ/2)·W. User input always has W = I;
/// congruence steps (normalization, gauge) transform W alongside C₀ so the
/// λ-dependence survives them exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NchoProblem {
    pub(crate) p: usize,
    pub(crate) mu: f64,
    #[serde(rename = "A")]
    pub(crate) a: CMatrix,
    #[serde(rename = "B")]
    pub(crate) b: CMatrix,
    #[serde(rename = "C0")]
    pub(crate) c0: CMatrix,
    #[serde(rename = "W")]
    pub(crate) weight: CMatrix,
}

impl NchoProblem {
    pub fn new(mu: f64, a: CMatrix, b: CMatrix, c0: CMatrix) -> Result<Self> {
        let p = a.rows();
        Self::with_weight(mu, a, b, c0, CMatrix::identity(p))
    }

    /// Same as [`NchoProblem::new`] with an explicit positive definite weight W.
    pub fn with_weight(
        mu: f64,
        a: CMatrix,
        b: CMatrix,
        c0: CMatrix,
        weight: CMatrix,
    ) -> Result<Self> {
        let p = a.rows();
        if p == 0 || p > MAX_DIMENSION {
            return Err(NchoError::Dimension(format!(
                "matrix size {p} outside 1..={MAX_DIMENSION}"
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C0", &c0), ("W", &weight)] {
            if m.rows() != p || m.cols() != p {
                return Err(NchoError::Dimension(format!(
                    "{name} is {}x{}, expected {p}x{p}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(NchoError::Contract(format!("{name} has non-finite entries")));
            }
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(NchoError::Contract(format!("mu must be positive, got {mu}")));
        }
        for (name, m) in [("A", &a), ("C0", &c0), ("W", &weight)] {
            if !m.is_hermitian(HERMITIAN_INPUT_TOL) {
                return Err(NchoError::Contract(format!(
                    "{name} is not Hermitian (defect {:.3e})",
                    m.hermitian_defect()
                )));
            }
        }
        if !weight.is_positive_definite(0.0) {
            return Err(NchoError::Contract("W is not positive definite".into()));
        }
        Ok(NchoProblem {
            p,
            mu,
            a: a.hermitian_part(),
            b,
            c0: c0.hermitian_part(),
            weight: weight.hermitian_part(),
        })
    }

    /// Builds the problem from the Hermitian triple (A₁, A₂, A₃).
    pub fn from_a123(mu: f64, a1: &CMatrix, a2: &CMatrix, a3: &CMatrix, c0: CMatrix) -> Result<Self> {
        let (a, b) = ab_from_a123(a1, a2, a3)?;
        Self::new(mu, a, b, c0)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c0(&self) -> &CMatrix {
        &self.c0
    }

    pub fn weight(&self) -> &CMatrix {
        &self.weight
    }

    pub fn has_identity_weight(&self) -> bool {
        self.weight == CMatrix::identity(self.p)
    }

    /// C(λ) = C₀ + (λ/2)W.
    pub fn c_at(&self, lambda: C64) -> CMatrix {
        &self.c0 + &self.weight.scale(lambda / 2.0)
    }

    /// Q(z) = Bz² + Az + B†.
    pub fn pencil_at(&self, z: C64) -> CMatrix {
        &(&self.b.scale(z * z) + &self.a.scale(z)) + &self.b.adjoint()
    }

    /// Be^{iφ} + A + B†e^{−iφ}, Hermitian.
    pub fn symbol_on_circle(&self, phi: f64) -> CMatrix {
        let z = C64::from_polar(1.0, phi);
        (&(&self.b.scale(z) + &self.a) + &self.b.adjoint().scale(z.conj())).hermitian_part()
    }

    /// Equivalent problem with W = I, by congruence with W^{−1/2}.
    pub fn unweighted(&self) -> Result<NchoProblem> {
        if self.has_identity_weight() {
            return Ok(self.clone());
        }
        let s = hermitian_function(&self.weight, |x| 1.0 / x.sqrt())?;
        let cong = |m: &CMatrix| &(&s * m) * &s;
        Ok(NchoProblem {
            p: self.p,
            mu: self.mu,
            a: cong(&self.a).hermitian_part(),
            b: cong(&self.b),
            c0: cong(&self.c0).hermitian_part(),
            weight: CMatrix::identity(self.p),
        })
    }

    /// Replaces A, B, C₀, W without re-validation; used by exact transforms.
    pub(crate) fn with_parts(&self, a: CMatrix, b: CMatrix, c0: CMatrix, weight: CMatrix) -> Self {
        NchoProblem {
            p: self.p,
            mu: self.mu,
            a: a.hermitian_part(),
            b,
            c0: c0.hermitian_part(),
            weight: weight.hermitian_part(),
        }
    }

    /// Stable hash of the data, used to seed sampling.
    pub fn input_hash(&self) -> u64 {
        let mats = [&self.a, &self.b, &self.c0, &self.weight];
        hash_floats(
            std::iter::once(self.mu).chain(
                mats.iter()
                    .flat_map(|m| m.as_slice().iter().flat_map(|z| [z.re, z.im])),
            ),
        )
    }
}

/// A = A₁ + A₃, B = (−iA₁ + A₂ + iA₃)/2.
pub fn ab_from_a123(a1: &CMatrix, a2: &CMatrix, a3: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let p = a1.rows();
    for (name, m) in [("A1", a1), ("A2", a2), ("A3", a3)] {
        if m.rows() != p || m.cols() != p {
            return Err(NchoError::Dimension(format!("{name} must be {p}x{p}")));
        }
        if !m.is_hermitian(HERMITIAN_INPUT_TOL) {
            return Err(NchoError::Contract(format!("{name} is not Hermitian")));
        }
    }
    let a = a1 + a3;
    let b = (&(&a1.scale(-I) + a2) + &a3.scale(I)).scale_real(0.5);
    Ok((a, b))
}

/// Inverse of [`ab_from_a123`].
pub fn a123_from_ab(a: &CMatrix, b: &CMatrix) -> (CMatrix, CMatrix, CMatrix) {
    let skew = (b - &b.adjoint()).scale(I);
    let a1 = (a + &skew).scale_real(0.5);
    let a2 = b + &b.adjoint();
    let a3 = (a - &skew).scale_real(0.5);
    (a1, a2, a3)
}

/// μ = k + n/2 for the degree-k harmonic sector in dimension n.
pub fn mu_from_harmonic(n: u32, k: u32) -> f64 {
    f64::from(k) + f64::from(n) / 2.0
}

/// Poles α_j and residues P_j of Q(z)⁻¹ = Σ P_j/(z − α_j).
#[derive(Debug, Clone, Serialize)]
pub struct PencilDecomposition {
    /// Ascending coefficients of det Q(z), trimmed.
    #[serde(with = "complex_vec")]
    pub det_coeffs: Vec<C64>,
    #[serde(with = "complex_vec")]
    pub poles: Vec<C64>,
    pub residues: Vec<CMatrix>,
    /// Multiplicity of each pole as a root of det Q.
    pub root_multiplicities: Vec<usize>,
    /// dim Ker Q(α_j).
    pub kernel_dims: Vec<usize>,
    pub zero_is_pole: bool,
    #[serde(rename = "detB_zero")]
    pub detb_zero: bool,
}

impl PencilDecomposition {
    pub fn zero_index(&self) -> Option<usize> {
        self.poles.iter().position(|&a| a == ZERO)
    }

    /// P₀ when 0 is a pole.
    pub fn p0(&self) -> Option<&CMatrix> {
        self.zero_index().map(|k| &self.residues[k])
    }

    /// Index of the pole closest to 1/ᾱ_j, with its relative distance.
    pub fn partner_index(&self, j: usize) -> Option<(usize, f64)> {
        let a = self.poles[j];
        if a == ZERO {
            return None;
        }
        let target = C64::new(1.0, 0.0) / a.conj();
        self.poles
            .iter()
            .enumerate()
            .map(|(k, &b)| (k, (b - target).norm() / target.norm().max(1.0)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
    }

    /// Indices of poles strictly inside the unit disk.
    pub fn inner_indices(&self) -> Vec<usize> {
        (0..self.poles.len())
            .filter(|&j| self.poles[j].norm() < 1.0)
            .collect()
    }

    /// Σ P_j/(z − α_j).
    pub fn reconstruct_inverse(&self, z: C64) -> CMatrix {
        let p = self.residues.first().map_or(0, |r| r.rows());
        let mut out = CMatrix::zeros(p, p);
        for (a, r) in self.poles.iter().zip(&self.residues) {
            out += &r.scale(C64::new(1.0, 0.0) / (z - a));
        }
        out
    }

    pub fn distinct_roots(&self) -> usize {
        self.poles.len()
    }
}

/// Coefficients of det Q(z) by evaluation at the 2p+1 roots of unity and an
/// inverse DFT, then trimming of round-off coefficients.
pub fn pencil_det_coeffs(problem: &NchoProblem) -> Result<Vec<C64>> {
    let n = 2 * problem.p + 1;
    let values: Vec<C64> = (0..n)
        .map(|k| {
            let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            problem.pencil_at(z).det()
        })
        .collect::<Result<_>>()?;
    let mut coeffs: Vec<C64> = (0..n)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect();
    let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(NchoError::DegeneratePencil);
    }
    for c in coeffs.iter_mut() {
        if c.norm() <= DET_TRIM_TOL * top {
            *c = ZERO;
        }
    }
    Ok(coeffs)
}

/// Partial fractions of Q(z)⁻¹ with certified simple poles.
pub fn decompose_pencil(problem: &NchoProblem) -> Result<PencilDecomposition> {
    let det_coeffs = pencil_det_coeffs(problem)?;
    let p = problem.p;
    let detb_zero = det_coeffs[2 * p] == ZERO;
    let zero_is_pole = det_coeffs[0] == ZERO;
    let roots = poly_roots(&det_coeffs, POLE_CLUSTER_TOL)?;
    let deriv = poly_derivative(&det_coeffs);
    let scale = problem.a.max_abs() + 2.0 * problem.b.max_abs();

    let mut poles = Vec::with_capacity(roots.len());
    let mut residues = Vec::with_capacity(roots.len());
    let mut root_multiplicities = Vec::with_capacity(roots.len());
    let mut kernel_dims = Vec::with_capacity(roots.len());
    for (idx, root) in roots.iter().enumerate() {
        let alpha = root.value;
        if (alpha.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL {
            return Err(NchoError::PoleOnUnitCircle(fmt_c(alpha)));
        }
        let q = problem.pencil_at(alpha);
        let q_scale = scale * alpha.norm().max(1.0).powi(2);
        let kernel = singular_values(&q)
            .iter()
            .filter(|&&s| s <= KERNEL_RANK_TOL * q_scale.max(1e-300))
            .count();
        let residue = if root.multiplicity == 1 {
            let (adj, _) = adjugate_and_det(&q)?;
            let dd = poly_eval(&deriv, alpha);
            if dd == ZERO {
                return Err(NchoError::SimplePoleViolation {
                    location: fmt_c(alpha),
                    detail: "vanishing derivative of det Q".into(),
                });
            }
            adj.scale(C64::new(1.0, 0.0) / dd)
        } else {
            if kernel != root.multiplicity {
                return Err(NchoError::SimplePoleViolation {
                    location: fmt_c(alpha),
                    detail: format!(
                        "root multiplicity {} but dim Ker Q = {kernel}",
                        root.multiplicity
                    ),
                });
            }
            let others = roots
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != idx)
                .map(|(_, r)| (r.value - alpha).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = if others.is_finite() {
                0.25 * others
            } else {
                0.5 * alpha.norm().max(1.0)
            };
            contour_residue(problem, alpha, radius)?
        };
        poles.push(alpha);
        residues.push(residue);
        root_multiplicities.push(root.multiplicity);
        kernel_dims.push(kernel);
    }
    Ok(PencilDecomposition {
        det_coeffs,
        poles,
        residues,
        root_multiplicities,
        kernel_dims,
        zero_is_pole,
        detb_zero,
    })
}

/// Residue of Q⁻¹ at a clustered root by the trapezoidal rule on a circle;
/// the next Laurent coefficient certifies the pole is simple.
fn contour_residue(problem: &NchoProblem, alpha: C64, radius: f64) -> Result<CMatrix> {
    const NODES: usize = 128;
    let p = problem.p;
    let mut a_minus1 = CMatrix::zeros(p, p);
    let mut a_minus2 = CMatrix::zeros(p, p);
    for k in 0..NODES {
        let w = C64::from_polar(radius, 2.0 * PI * k as f64 / NODES as f64);
        let inv = problem.pencil_at(alpha + w).inverse()?;
        a_minus1 += &inv.scale(w);
        a_minus2 += &inv.scale(w * w);
    }
    let a_minus1 = a_minus1.scale_real(1.0 / NODES as f64);
    let a_minus2 = a_minus2.scale_real(1.0 / NODES as f64);
    if a_minus2.max_abs() > 1e-7 * radius * a_minus1.max_abs().max(1.0) {
        return Err(NchoError::SimplePoleViolation {
            location: fmt_c(alpha),
            detail: format!(
                "second Laurent coefficient {:.3e} does not vanish",
                a_minus2.max_abs()
            ),
        });
    }
    Ok(a_minus1)
}

pub(crate) fn fmt_c(z: C64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

/// Outcome of one structural identity.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaItem {
    pub item: u8,
    pub name: String,
    /// False for the det B branch that does not apply.
    pub applicable: bool,
    pub residual: f64,
    pub passed: bool,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub items: Vec<LemmaItem>,
    pub tol: f64,
    pub all_passed: bool,
}

impl LemmaReport {
    /// One line per item, e.g. `PASS 1 pole-pairing residual=1.2e-16`.
    pub fn lines(&self) -> Vec<String> {
        self.items
            .iter()
            .map(|it| format!("{} {} {} residual={:.3e}", it.status, it.item, it.name, it.residual))
            .collect()
    }
}

fn item(index: u8, name: &str, applicable: bool, residual: f64, ok: bool, tol: f64) -> LemmaItem {
    let passed = !applicable || (ok && residual <= tol);
    LemmaItem {
        item: index,
        name: name.into(),
        applicable,
        residual,
        passed,
        status: match (applicable, passed) {
            (false, _) => "N/A".into(),
            (true, true) => "PASS".into(),
            (true, false) => "FAIL".into(),
        },
    }
}

fn rel(diff: &CMatrix, scale: f64) -> f64 {
    diff.max_abs() / scale.max(1.0)
}

/// Machine check of the six partial-fraction identities, with sample points
/// seeded from the problem data.
pub fn verify_pencil_lemma(
    dec: &PencilDecomposition,
    problem: &NchoProblem,
    tol: f64,
) -> Result<LemmaReport> {
    verify_pencil_lemma_seeded(dec, problem, tol, problem.input_hash())
}

pub fn verify_pencil_lemma_seeded(
    dec: &PencilDecomposition,
    problem: &NchoProblem,
    tol: f64,
    seed: u64,
) -> Result<LemmaReport> {
    let p = problem.p;
    let id = CMatrix::identity(p);
    let b = &problem.b;
    let a = &problem.a;
    let n = dec.poles.len();
    let pmax = dec.residues.iter().map(|r| r.max_abs()).fold(0.0, f64::max);

    // (1) pairing
    let mut pairing = 0.0f64;
    for j in 0..n {
        if let Some((_, d)) = dec.partner_index(j) {
            pairing = pairing.max(d);
        }
    }
    let item1 = item(1, "pole-pairing", true, pairing, pairing <= PAIRING_TOL.max(tol), tol);

    // (2) P_{1/ᾱ} = −P_α† and no higher-order terms (sampled identity)
    let mut res2 = 0.0f64;
    for j in 0..n {
        if let Some((k, _)) = dec.partner_index(j) {
            let diff = &dec.residues[k] + &dec.residues[j].adjoint();
            res2 = res2.max(rel(&diff, dec.residues[j].max_abs()));
        }
    }
    let mut rng = seeded(seed);
    let mut samples = 0;
    while samples < 16 {
        let z = C64::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(0.0..2.0 * PI));
        if dec.poles.iter().any(|&al| (z - al).norm() < 1e-3) {
            continue;
        }
        samples += 1;
        let q = problem.pencil_at(z);
        let prod = &dec.reconstruct_inverse(z) * &q;
        let scale: f64 = dec
            .poles
            .iter()
            .zip(&dec.residues)
            .map(|(al, r)| r.max_abs() / (z - al).norm())
            .sum::<f64>()
            * q.max_abs();
        res2 = res2.max(rel(&(&prod - &id), scale));
    }
    let item2 = item(2, "adjoint-residues-no-higher-terms", true, res2, true, tol);

    let sum_p = dec.residues.iter().fold(CMatrix::zeros(p, p), |acc, r| &acc + r);
    let sum_pb = &sum_p * b;
    let mut sum_apb = CMatrix::zeros(p, p);
    let mut apb_scale = 0.0;
    for (al, r) in dec.poles.iter().zip(&dec.residues) {
        sum_apb += &(r * b).scale(*al);
        apb_scale += al.norm() * r.max_abs() * b.max_abs() * p as f64;
    }

    // (3) det B ≠ 0
    let item3 = if !dec.detb_zero {
        let r = rel(&sum_p, pmax).max(rel(&(&sum_apb - &id), apb_scale));
        item(3, "detB-nonzero-sums", true, r, true, tol)
    } else {
        item(3, "detB-nonzero-sums", false, 0.0, true, tol)
    };

    // (4) det B = 0
    let item4 = match (dec.detb_zero, dec.p0()) {
        (true, Some(p0)) => {
            let p0d = p0.adjoint();
            let r1 = rel(&(&sum_p - &p0d), pmax);
            let r2 = rel(&sum_pb, pmax * b.max_abs() * p as f64);
            let rhs = &id - &(&p0d * a);
            let r3 = rel(&(&sum_apb - &rhs), apb_scale + p0.max_abs() * a.max_abs());
            item(4, "detB-zero-sums", true, r1.max(r2).max(r3), true, tol)
        }
        (true, None) => item(4, "detB-zero-sums", true, f64::INFINITY, false, tol),
        (false, _) => item(4, "detB-zero-sums", false, 0.0, true, tol),
    };

    // (5) rank bound
    let mut res5 = 0.0f64;
    let mut rank_ok = true;
    for j in 0..n {
        let q = problem.pencil_at(dec.poles[j]);
        let r = &dec.residues[j];
        res5 = res5.max(rel(&(&q * r), q.max_abs() * r.max_abs() * p as f64));
        if numerical_rank(r, 1e-8) > dec.kernel_dims[j] {
            rank_ok = false;
        }
    }
    let item5 = item(5, "rank-bound", true, res5, rank_ok, tol);

    // (6) P(2αB + A)P = P
    let mut res6 = 0.0f64;
    for (al, r) in dec.poles.iter().zip(&dec.residues) {
        let mid = &b.scale(al * 2.0) + a;
        let lhs = &(r * &mid) * r;
        let scale = r.max_abs().powi(2) * mid.max_abs() * (p * p) as f64;
        res6 = res6.max(rel(&(&lhs - r), scale));
    }
    let item6 = item(6, "projector-identity", true, res6, true, tol);

    let items = vec![item1, item2, item3, item4, item5, item6];
    let all_passed = items.iter().all(|i| i.passed);
    Ok(LemmaReport {
        items,
        tol,
        all_passed,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PositivityMargin {
    /// Grid minimum of λ_min(Be^{iφ} + A + B†e^{−iφ}).
    pub margin: f64,
    pub argmin_angle: f64,
    /// margin − 2π‖B‖/N, valid on the whole circle.
    pub certified_lower_bound: f64,
    pub grid_size: usize,
}

impl PositivityMargin {
    pub fn is_positive(&self) -> bool {
        self.margin > 0.0
    }

    pub fn is_certified(&self) -> bool {
        self.certified_lower_bound > 0.0
    }
}

/// Least eigenvalue of the Hermitian symbol on a uniform grid of the unit circle.
pub fn positivity_margin(problem: &NchoProblem, grid_size: usize) -> PositivityMargin {
    let n = grid_size.max(64);
    let mut margin = f64::INFINITY;
    let mut argmin = 0.0;
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let least = eigen::hermitian_eigenvalues_unchecked(&problem.symbol_on_circle(phi))[0];
        if least < margin {
            margin = least;
            argmin = phi;
        }
    }
    let b_norm = problem.b.norm2();
    PositivityMargin {
        margin,
        argmin_angle: argmin,
        certified_lower_bound: margin - 2.0 * PI * b_norm / n as f64,
        grid_size: n,
    }
}

/// Hermitian inverse square root of a positive definite matrix.
pub(crate) fn inverse_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = eigen_hermitian(m, false)?;
    if eig.values.first().is_none_or(|&l| l <= 0.0) {
        return Err(NchoError::Contract("matrix is not positive definite".into()));
    }
    hermitian_function(m, |x| 1.0 / x.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{c, re, ONE};

    fn scalar_problem(b: f64) -> NchoProblem {
        NchoProblem::new(
            0.5,
            CMatrix::identity(1),
            CMatrix::from_real_rows(&[vec![b]]),
            CMatrix::zeros(1, 1),
        )
        .unwrap()
    }

    fn two_level_family(beta: f64, gamma: f64) -> NchoProblem {
        let b = CMatrix::from_rows(&[vec![ZERO, c(0.0, 0.5)], vec![c(0.0, -0.5), ZERO]]);
        NchoProblem::new(0.5, CMatrix::diag_real(&[beta, gamma]), b, CMatrix::zeros(2, 2)).unwrap()
    }

    #[test]
    fn scalar_test_pencil_poles_and_residues() {
        let dec = decompose_pencil(&scalar_problem(0.25)).unwrap();
        let s3 = 3f64.sqrt();
        assert_eq!(dec.poles.len(), 2);
        for (al, r) in dec.poles.iter().zip(&dec.residues) {
            if (al.re - (-2.0 + s3)).abs() < 1e-12 {
                assert!((r[(0, 0)] - re(2.0 / s3)).norm() < 1e-12);
            } else {
                assert!((al.re - (-2.0 - s3)).abs() < 1e-12);
                assert!((r[(0, 0)] - re(-2.0 / s3)).norm() < 1e-12);
            }
        }
        assert!(!dec.detb_zero && !dec.zero_is_pole);
        let report = verify_pencil_lemma(&dec, &scalar_problem(0.25), 1e-12).unwrap();
        assert!(report.all_passed, "{:?}", report.lines());
    }

    #[test]
    fn linear_pencil_has_single_pole_at_zero() {
        let prob = scalar_problem(0.0);
        let dec = decompose_pencil(&prob).unwrap();
        assert_eq!(dec.poles, vec![ZERO]);
        assert_eq!(dec.residues[0], CMatrix::identity(1));
        assert!(dec.detb_zero && dec.zero_is_pole);
        let report = verify_pencil_lemma(&dec, &prob, 1e-12).unwrap();
        assert!(report.all_passed);
        assert!(!report.items[2].applicable && report.items[3].applicable);
    }

    #[test]
    fn double_zero_pole_of_free_oscillator_is_simple() {
        let prob = NchoProblem::new(
            1.0,
            CMatrix::identity(2),
            CMatrix::zeros(2, 2),
            CMatrix::zeros(2, 2),
        )
        .unwrap();
        let dec = decompose_pencil(&prob).unwrap();
        assert_eq!(dec.poles, vec![ZERO]);
        assert_eq!(dec.root_multiplicities, vec![2]);
        assert!(dec.residues[0].approx_eq(&CMatrix::identity(2), 1e-12));
    }

    #[test]
    fn genuine_double_pole_is_rejected() {
        // Q(z) = [[z, z²/2], [1/2, z]], det Q = (3/4)z², Ker Q(0) one-dimensional
        let b = CMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.0, 0.0]]);
        let prob =
            NchoProblem::new(1.0, CMatrix::identity(2), b, CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            decompose_pencil(&prob),
            Err(NchoError::SimplePoleViolation { .. })
        ));
    }

    #[test]
    fn a123_round_trip_on_two_level_matrices() {
        let prob = two_level_family(2.0, 2.0);
        let (a1, a2, a3) = a123_from_ab(prob.a(), prob.b());
        let (a, b) = ab_from_a123(&a1, &a2, &a3).unwrap();
        assert!(a.approx_eq(prob.a(), 1e-15));
        assert!(b.approx_eq(prob.b(), 1e-15));
    }

    #[test]
    fn a123_half_identity_gives_free_oscillator() {
        let half = CMatrix::scalar(2, re(0.5));
        let (a, b) = ab_from_a123(&half, &CMatrix::zeros(2, 2), &half).unwrap();
        assert_eq!(a, CMatrix::identity(2));
        assert_eq!(b, CMatrix::zeros(2, 2));
    }

    #[test]
    fn non_hermitian_a123_is_rejected() {
        let bad = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(ab_from_a123(&bad, &z, &z), Err(NchoError::Contract(_))));
    }

    #[test]
    fn harmonic_weights() {
        assert_eq!(mu_from_harmonic(1, 0), 0.5);
        assert_eq!(mu_from_harmonic(1, 1), 1.5);
        assert_eq!(mu_from_harmonic(3, 2), 3.5);
    }

    #[test]
    fn positivity_examples() {
        let m = positivity_margin(&two_level_family(2.0, 2.0), 512);
        assert!((m.margin - 1.0).abs() < 1e-12);
        assert!(m.argmin_angle.cos().abs() > 1.0 - 1e-12);
        assert!(m.is_certified());

        let free = NchoProblem::new(
            1.0,
            CMatrix::identity(2),
            CMatrix::zeros(2, 2),
            CMatrix::zeros(2, 2),
        )
        .unwrap();
        let m = positivity_margin(&free, 64);
        assert_eq!(m.margin, 1.0);
        assert_eq!(m.certified_lower_bound, 1.0);
    }

    #[test]
    fn pole_on_circle_is_rejected() {
        // A = 1, B = 1/2: det Q = (z + 1)²/2
        let err = decompose_pencil(&scalar_problem(0.5)).unwrap_err();
        assert!(matches!(err, NchoError::PoleOnUnitCircle(_)));
    }

    #[test]
    fn weight_congruence_round_trip() {
        let prob = two_level_family(3.0, 2.0);
        let w = CMatrix::diag_real(&[4.0, 1.0]);
        let weighted =
            NchoProblem::with_weight(0.5, prob.a().clone(), prob.b().clone(), prob.c0().clone(), w)
                .unwrap();
        let u = weighted.unweighted().unwrap();
        assert!(u.has_identity_weight());
        assert!((u.a()[(0, 0)] - re(0.75)).norm() < 1e-14);
        assert_eq!(u.c_at(ONE), u.c0().clone() + CMatrix::scalar(2, re(0.5)));
    }
}
