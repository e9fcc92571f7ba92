//! Scalar second-order reduction of the p = 2 standard form: Heun-type
//! parameters, exponent schemes, closed forms for the η-shifted oscillator
//! family, and the confluence to Rabi-type models.

use std::f64::consts::PI;

use serde::Serialize;

use crate::covariance::{check_std_form, ExtComplex};
use crate::error::{NchoError, Result};
use crate::numerics::matrix::{adjugate_and_det, complex_pair, opt_complex_pair, CMatrix, C64, ONE, ZERO};
use crate::pencil::NchoProblem;

/// Tolerance for recognizing the standard form on input.
pub const STD_FORM_TOL: f64 = 1e-9;
/// |c₃ + μ/2| below this (relative) is the coalescence case.
pub const COALESCENCE_TOL: f64 = 1e-12;
const LAURENT_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeunCase {
    /// b₂ ≠ 0: singular points {0, α, 1/ᾱ, ε, ∞} with ε apparent.
    FivePoint,
    /// b₂ = 0: Heun equation on {0, α, 1/α, ∞}.
    FourPoint,
    /// b₂ ≠ 0 but c₃ + μ/2 = 0; ε and q₂ are undefined.
    Coalescence,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeRow {
    pub label: &'static str,
    pub point: ExtComplex,
    #[serde(with = "crate::numerics::matrix::complex_vec")]
    pub exponents: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeunParameters {
    pub case: HeunCase,
    pub mu: f64,
    #[serde(with = "complex_pair")]
    pub lambda: C64,
    #[serde(with = "complex_pair")]
    pub alpha: C64,
    #[serde(with = "complex_pair")]
    pub kappa0: C64,
    #[serde(with = "complex_pair")]
    pub kappa1: C64,
    /// Analytic continuation of κ̄₀, i.e. conj(κ₀ at λ̄); equals κ̄₀ for real λ.
    #[serde(skip)]
    pub kappa0_reflected: C64,
    #[serde(skip)]
    pub kappa1_reflected: C64,
    #[serde(with = "opt_complex_pair")]
    pub epsilon: Option<C64>,
    #[serde(with = "complex_pair")]
    pub q1: C64,
    #[serde(with = "opt_complex_pair")]
    pub q2: Option<C64>,
    /// (1 − |b₂|²)² − 4|b₁|², whose positive root gives |α| < 1.
    pub discriminant: f64,
    pub scheme: Vec<SchemeRow>,
}

impl HeunParameters {
    /// 1/ᾱ.
    pub fn alpha_outer(&self) -> C64 {
        ONE / self.alpha.conj()
    }

    /// Finite singular points of the scalar equation.
    pub fn finite_singular_points(&self) -> Vec<C64> {
        let mut pts = vec![ZERO, self.alpha, self.alpha_outer()];
        if let Some(e) = self.epsilon {
            pts.push(e);
        }
        pts
    }

    /// Coefficients (P, Q) of f″ + P f′ + Q f = 0 at z.
    pub fn ode_coefficients(&self, z: C64) -> Result<(C64, C64)> {
        let mu = self.mu;
        let half = mu / 2.0;
        let a_in = self.alpha;
        let a_out = self.alpha_outer();
        let pair = (z - a_in) * (z - a_out);
        let common_p = (-self.kappa0 + half) / z + (1.0 - self.kappa1 + half) / (z - a_in);
        match self.case {
            HeunCase::FivePoint => {
                let eps = self.epsilon.expect("five-point case has epsilon");
                let q2 = self.q2.expect("five-point case has q2");
                let p = common_p + (1.0 + self.kappa1_reflected + half) / (z - a_out) - ONE / (z - eps);
                let q = mu * (-self.kappa0_reflected + half) / pair
                    + self.q1 / (z * pair)
                    + q2 / (pair * (z - eps));
                Ok((p, q))
            }
            HeunCase::FourPoint => {
                let p = common_p + (1.0 + self.kappa1 + half) / (z - a_out);
                let q = (mu * (1.0 - self.kappa0 + half) * z + self.q1) / (z * pair);
                Ok((p, q))
            }
            HeunCase::Coalescence => Err(NchoError::Unsupported(
                "scalar equation is not available when c3 + mu/2 = 0".into(),
            )),
        }
    }

    /// Sum of all tabulated exponents.
    pub fn exponent_sum(&self) -> C64 {
        self.scheme.iter().flat_map(|r| r.exponents.iter()).sum()
    }

    /// Fuchs relation defect |Σ exponents − (n − 2)|.
    pub fn fuchs_defect(&self) -> f64 {
        let n = self.scheme.len() as f64;
        (self.exponent_sum() - (n - 2.0)).norm()
    }

    /// Plain-text exponent table.
    pub fn scheme_table(&self) -> String {
        let mut out = String::from("point\tlocation\texponents\n");
        for row in &self.scheme {
            let ex: Vec<String> = row
                .exponents
                .iter()
                .map(|e| format!("{:.12}{:+.12}i", e.re, e.im))
                .collect();
            out.push_str(&format!("{}\t{}\t{}\n", row.label, row.point, ex.join(", ")));
        }
        out
    }
}

fn tr_adj_times(m: &CMatrix, c: &CMatrix) -> Result<C64> {
    let (adj, _) = adjugate_and_det(m)?;
    Ok((&adj * c).trace())
}

/// κ₀ and κ₁ from the trace/adjugate forms for a given C.
fn kappas(problem: &NchoProblem, alpha: C64, c: &CMatrix) -> Result<(C64, C64)> {
    let a = problem.a();
    let b = problem.b();
    let bd = b.adjoint();
    let kappa0 = tr_adj_times(&bd, c)? / tr_adj_times(a, &bd)?;
    let local = &(&b.scale(alpha) + a) + &bd.scale(ONE / alpha);
    let kappa1 = tr_adj_times(&local, c)? / ((alpha - ONE / alpha.conj()) * tr_adj_times(a, b)?);
    Ok((kappa0, kappa1))
}

/// Scalar-reduction parameters for a problem in standard form.
pub fn heun_like_parameters(std_problem: &NchoProblem, lambda: C64) -> Result<HeunParameters> {
    check_std_form(std_problem, STD_FORM_TOL)?;
    let mu = std_problem.mu();
    let half = mu / 2.0;
    let b = std_problem.b();
    let (b1, b2) = (b[(0, 0)], b[(0, 1)]);
    let discriminant = (1.0 - b2.norm_sqr()).powi(2) - 4.0 * b1.norm_sqr();
    if discriminant < 0.0 {
        return Err(NchoError::NotStdForm(format!(
            "negative discriminant {discriminant:e}"
        )));
    }
    let root = |sign: f64| (-1.0 + b2.norm_sqr() + sign * discriminant.sqrt()) / (2.0 * b1);
    let alpha = [root(1.0), root(-1.0)]
        .into_iter()
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("two candidates");

    let c = std_problem.c_at(lambda);
    let (kappa0, kappa1) = kappas(std_problem, alpha, &c)?;
    let (k0r, k1r) = kappas(std_problem, alpha, &c.adjoint())?;
    let (kappa0_reflected, kappa1_reflected) = (k0r.conj(), k1r.conj());

    let shifted = &c - &std_problem.a().scale_real(half);
    let q1 = shifted.det()? / tr_adj_times(std_problem.a(), b)?;

    let (c1, c2, c2_partner, c3) = (c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]);
    let case = if b2 == ZERO {
        HeunCase::FourPoint
    } else if (c3 + half).norm() <= COALESCENCE_TOL * c.max_abs().max(mu).max(1.0) {
        HeunCase::Coalescence
    } else {
        HeunCase::FivePoint
    };
    let (epsilon, q2) = if case == HeunCase::FivePoint {
        let eps = c2 / (b2 * (c3 + half));
        let det_shift = (c1 - half) * (c3 - half) - c2 * c2_partner;
        let q2 = (mu * (b2 * (c1 - half) - b1 * c2) + b2 * det_shift) / (b1 * b2 * (c3 + half));
        (Some(eps), Some(q2))
    } else {
        (None, None)
    };

    let zero = ZERO;
    let alpha_outer = ONE / alpha.conj();
    let mut scheme = vec![
        SchemeRow {
            label: "0",
            point: zero.into(),
            exponents: vec![zero, 1.0 + kappa0 - half],
        },
        SchemeRow {
            label: "alpha",
            point: alpha.into(),
            exponents: vec![zero, kappa1 - half],
        },
    ];
    match case {
        HeunCase::FourPoint => {
            scheme.push(SchemeRow {
                label: "1/alpha",
                point: alpha_outer.into(),
                exponents: vec![zero, -kappa1 - half],
            });
            scheme.push(SchemeRow {
                label: "inf",
                point: ExtComplex::Infinity,
                exponents: vec![mu.into(), 1.0 - kappa0 + half],
            });
        }
        HeunCase::FivePoint | HeunCase::Coalescence => {
            scheme.push(SchemeRow {
                label: "1/conj(alpha)",
                point: alpha_outer.into(),
                exponents: vec![zero, -kappa1_reflected - half],
            });
            if let Some(e) = epsilon {
                scheme.push(SchemeRow {
                    label: "epsilon",
                    point: e.into(),
                    exponents: vec![zero, C64::new(2.0, 0.0)],
                });
            }
            scheme.push(SchemeRow {
                label: "inf",
                point: ExtComplex::Infinity,
                exponents: vec![mu.into(), -kappa0_reflected + half],
            });
        }
    }

    Ok(HeunParameters {
        case,
        mu,
        lambda,
        alpha,
        kappa0,
        kappa1,
        kappa0_reflected,
        kappa1_reflected,
        epsilon,
        q1,
        q2,
        discriminant,
        scheme,
    })
}

/// The B = B† branch: the Heun equation on {0, α, 1/α, ∞}.
pub fn heun_equation_4pt(std_problem: &NchoProblem, lambda: C64) -> Result<HeunParameters> {
    check_std_form(std_problem, STD_FORM_TOL)?;
    let b2 = std_problem.b()[(0, 1)];
    if b2 != ZERO {
        return Err(NchoError::WrongBranch(format!(
            "b2 = {b2} is nonzero; the reduction has an extra apparent singularity"
        )));
    }
    let params = heun_like_parameters(std_problem, lambda)?;
    let defect = params.fuchs_defect();
    if defect > 1e-10 {
        return Err(NchoError::Contract(format!(
            "Fuchs relation defect {defect:e} for the four-point scheme"
        )));
    }
    Ok(params)
}

/// Closed forms for the η-shifted oscillator A = diag(β, γ), B = ½[[0, i], [−i, 0]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleForms {
    pub alpha: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub q_plus: f64,
    pub q_minus: f64,
}

pub fn example_closed_forms(beta: f64, gamma: f64, eta: f64, lambda: f64, mu: f64) -> Result<ExampleForms> {
    if !(beta > 0.0 && gamma > 0.0 && beta * gamma > 1.0) {
        return Err(NchoError::Positivity(format!(
            "need beta, gamma > 0 and beta*gamma > 1 (beta = {beta}, gamma = {gamma})"
        )));
    }
    let bg = beta * gamma;
    let kappa_mid = lambda / 4.0 * (beta + gamma) / (bg * (bg - 1.0)).sqrt();
    let q = |sign: f64| {
        -(lambda * lambda / 4.0 - lambda * mu * bg.sqrt() * (beta + gamma) / (4.0 * (bg - 1.0).sqrt())
            + mu * mu / 4.0 * (bg + 1.0)
            - sign * eta * mu
            - eta * eta * (bg - 1.0))
            / bg.sqrt()
    };
    Ok(ExampleForms {
        alpha: 1.0 / bg.sqrt(),
        kappa_plus: kappa_mid + eta,
        kappa_minus: kappa_mid - eta,
        q_plus: q(1.0),
        q_minus: q(-1.0),
    })
}

/// κ̃± and q̃± of the confluent equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfluentForms {
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub q_plus: f64,
    pub q_minus: f64,
}

pub fn confluent_limit_params(g_tilde: f64, lambda_tilde: f64, delta: f64, eps_bias: f64) -> ConfluentForms {
    let shifted = lambda_tilde + g_tilde * g_tilde;
    let base = shifted * (lambda_tilde - 3.0 * g_tilde * g_tilde) - eps_bias * eps_bias - delta * delta;
    let cross = 4.0 * g_tilde * g_tilde * eps_bias;
    ConfluentForms {
        kappa_plus: shifted - eps_bias,
        kappa_minus: shifted + eps_bias,
        q_plus: base + cross,
        q_minus: base - cross,
    }
}

/// κ± and q± in Rabi-type variables (g, λ′, Δ, ε) at finite μ, |g| < 1/2.
pub fn rabi_form_params(g: f64, lambda_prime: f64, delta: f64, eps_bias: f64, mu: f64) -> ConfluentForms {
    let root = (1.0 - 4.0 * g * g).sqrt();
    let q = |sign: f64| {
        -(lambda_prime * lambda_prime - lambda_prime * mu / root + mu * mu / 4.0 * (1.0 + 4.0 * g * g)
            + sign * 4.0 * g * g * mu * eps_bias / root
            - eps_bias * eps_bias
            - delta * delta)
            / (2.0 * g)
    };
    ConfluentForms {
        kappa_plus: (lambda_prime - eps_bias) / root,
        kappa_minus: (lambda_prime + eps_bias) / root,
        q_plus: q(1.0),
        q_minus: q(-1.0),
    }
}

/// Residuals of κ± = κ̃± + μ/2 + O(1/μ) and q±·(2g̃/√μ) = −q̃± + O(1/μ)
/// with g = g̃/√μ, λ′ = λ̃ + μ/2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConfluenceResidual {
    pub mu: f64,
    pub kappa: [f64; 2],
    pub q: [f64; 2],
}

pub fn confluence_residual(g_tilde: f64, lambda_tilde: f64, delta: f64, eps_bias: f64, mu: f64) -> ConfluenceResidual {
    let limit = confluent_limit_params(g_tilde, lambda_tilde, delta, eps_bias);
    let finite = rabi_form_params(g_tilde / mu.sqrt(), lambda_tilde + mu / 2.0, delta, eps_bias, mu);
    let scale = 2.0 * g_tilde / mu.sqrt();
    ConfluenceResidual {
        mu,
        kappa: [
            (finite.kappa_plus - limit.kappa_plus - mu / 2.0).abs(),
            (finite.kappa_minus - limit.kappa_minus - mu / 2.0).abs(),
        ],
        q: [
            (finite.q_plus * scale + limit.q_plus).abs(),
            (finite.q_minus * scale + limit.q_minus).abs(),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiParameters {
    pub omega: f64,
    pub g_coupling: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub eps_bias: f64,
    pub lambda: f64,
}

impl RabiParameters {
    /// (Ã, B̃, C̃) = (ωI, gσ₁, −Δσ₃ − εσ₁ + λI).
    pub fn matrices(&self) -> (CMatrix, CMatrix, CMatrix) {
        let a = CMatrix::diag_real(&[self.omega, self.omega]);
        let b = CMatrix::from_real_rows(&[vec![0.0, self.g_coupling], vec![self.g_coupling, 0.0]]);
        let c = CMatrix::from_real_rows(&[
            vec![self.lambda - self.delta, -self.eps_bias],
            vec![-self.eps_bias, self.lambda + self.delta],
        ]);
        (a, b, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum RabiClassification {
    AsymmetricRabi(RabiParameters),
    JaynesCummings(RabiParameters),
    Generic,
}

/// Recognizes the asymmetric Rabi (B̃ = gσ₁) and Jaynes–Cummings (B̃ = gσ⁻)
/// patterns with C̃ = −Δσ₃ − εσ₁ + λI.
pub fn rabi_jc_map(a_tilde: &CMatrix, b_tilde: &CMatrix, c_tilde: &CMatrix) -> Result<RabiClassification> {
    for (name, m) in [("A", a_tilde), ("B", b_tilde), ("C", c_tilde)] {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(NchoError::Dimension(format!("{name} must be 2x2")));
        }
    }
    let scale = a_tilde.max_abs().max(b_tilde.max_abs()).max(c_tilde.max_abs()).max(1.0);
    let tol = 1e-12 * scale;
    let omega = a_tilde[(0, 0)].re;
    if !a_tilde.approx_eq(&CMatrix::diag_real(&[omega, omega]), tol) {
        return Err(NchoError::Unsupported("A is not a real multiple of the identity".into()));
    }
    let is_real = |m: &CMatrix| m.as_slice().iter().all(|z| z.im.abs() <= tol);
    if !is_real(c_tilde) || !c_tilde.is_hermitian(tol) || !is_real(b_tilde) {
        return Ok(RabiClassification::Generic);
    }
    let lambda = 0.5 * (c_tilde[(0, 0)].re + c_tilde[(1, 1)].re);
    let delta = 0.5 * (c_tilde[(1, 1)].re - c_tilde[(0, 0)].re);
    let eps_bias = -c_tilde[(0, 1)].re;
    let b = |i, j| b_tilde[(i, j)].re;
    let diag_zero = b(0, 0).abs() <= tol && b(1, 1).abs() <= tol;
    if !diag_zero {
        return Ok(RabiClassification::Generic);
    }
    let params = |g| RabiParameters {
        omega,
        g_coupling: g,
        delta,
        eps_bias,
        lambda,
    };
    if (b(0, 1) - b(1, 0)).abs() <= tol && b(0, 1).abs() > tol {
        return Ok(RabiClassification::AsymmetricRabi(params(b(0, 1))));
    }
    if b(0, 1).abs() <= tol && b(1, 0).abs() > tol && eps_bias.abs() <= tol {
        return Ok(RabiClassification::JaynesCummings(params(b(1, 0))));
    }
    Ok(RabiClassification::Generic)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantizationReport {
    /// 1 + κ₀ − μ/2 and κ₁ − μ/2.
    #[serde(with = "crate::numerics::matrix::complex_vec")]
    pub values: Vec<C64>,
    pub nearest: Vec<i64>,
    pub distances: Vec<f64>,
    pub passed: bool,
    pub note: &'static str,
}

/// Necessary condition for a 2-dimensional space of holomorphic solutions:
/// both nontrivial exponents inside the disk are positive integers.
pub fn quantization_check(params: &HeunParameters) -> QuantizationReport {
    let half = params.mu / 2.0;
    let values = vec![1.0 + params.kappa0 - half, params.kappa1 - half];
    let nearest: Vec<i64> = values.iter().map(|v| v.re.round().max(1.0) as i64).collect();
    let distances: Vec<f64> = values
        .iter()
        .zip(&nearest)
        .map(|(v, &n)| (v - n as f64).norm())
        .collect();
    QuantizationReport {
        passed: distances.iter().all(|&d| d <= 1e-8),
        values,
        nearest,
        distances,
        note: "necessary only: logarithmic solutions can still occur",
    }
}

/// Laurent coefficients c_k, k ∈ [k_min, k_max], of f around `center` from
/// an N-point trapezoid rule on the circle of the given radius.
pub fn laurent_coefficients(
    f: impl Fn(C64) -> C64,
    center: C64,
    radius: f64,
    k_min: i32,
    k_max: i32,
) -> Vec<C64> {
    let n = LAURENT_NODES;
    let samples: Vec<(C64, C64)> = (0..n)
        .map(|j| {
            let w = C64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / n as f64);
            (w, f(center + w))
        })
        .collect();
    (k_min..=k_max)
        .map(|k| samples.iter().map(|(w, v)| v * w.powi(-k)).sum::<C64>() / n as f64)
        .collect()
}

/// Roots of ρ² + bρ + c.
fn quadratic_roots(b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    let big = if (-b + disc).norm() >= (-b - disc).norm() {
        (-b + disc) / 2.0
    } else {
        (-b - disc) / 2.0
    };
    if big == ZERO {
        return [ZERO, ZERO];
    }
    [big, c / big]
}

/// Frobenius exponents of f″ + P f′ + Q f = 0 at a point, with leading
/// Laurent data taken on a circle of the given radius (for ∞: a circle
/// enclosing every finite singularity).
pub fn indicial_exponents(
    p: impl Fn(C64) -> C64,
    q: impl Fn(C64) -> C64,
    point: ExtComplex,
    radius: f64,
) -> [C64; 2] {
    match point {
        ExtComplex::Finite(s) => {
            let p0 = laurent_coefficients(&p, s, radius, -1, -1)[0];
            let q0 = laurent_coefficients(&q, s, radius, -2, -2)[0];
            quadratic_roots(p0 - 1.0, q0)
        }
        ExtComplex::Infinity => {
            // f ~ z^{−ρ}: ρ² + (1 − p∞)ρ + q∞ = 0.
            let p_inf = laurent_coefficients(&p, ZERO, radius, -1, -1)[0];
            let q_inf = laurent_coefficients(&q, ZERO, radius, -2, -2)[0];
            quadratic_roots(ONE - p_inf, q_inf)
        }
    }
}

/// Half the distance from `s` to the nearest other point.
pub fn isolating_radius(s: C64, others: &[C64]) -> f64 {
    0.5 * others
        .iter()
        .filter(|&&o| o != s)
        .map(|o| (o - s).norm())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct ApparentReport {
    #[serde(with = "complex_pair")]
    pub point: C64,
    #[serde(with = "crate::numerics::matrix::complex_vec")]
    pub exponents: Vec<C64>,
    /// First Frobenius coefficient of the exponent-0 solution.
    #[serde(with = "complex_pair")]
    pub a1: C64,
    /// Relative obstruction to a log-free exponent-0 solution.
    pub residual: f64,
}

/// Exponents at ε and the consistency condition at order 2 of the
/// exponent-0 Frobenius recursion; it vanishes iff there is no logarithm,
/// i.e. the local monodromy at ε is trivial.
pub fn apparent_singularity_check(params: &HeunParameters) -> Result<ApparentReport> {
    let eps = params.epsilon.ok_or_else(|| {
        NchoError::Unsupported("no apparent singularity in this case".into())
    })?;
    let others = params.finite_singular_points();
    let radius = isolating_radius(eps, &others);
    let p = |z| params.ode_coefficients(z).map(|(p, _)| p).unwrap_or(ZERO);
    let q = |z| params.ode_coefficients(z).map(|(_, q)| q).unwrap_or(ZERO);
    let pc = laurent_coefficients(p, eps, radius, -1, 0);
    let qc = laurent_coefficients(q, eps, radius, -2, 0);
    let exponents = quadratic_roots(pc[0] - 1.0, qc[0]).to_vec();
    let (p0, q_m1, q0) = (pc[1], qc[1], qc[2]);
    let a1 = q_m1 / (-pc[0]);
    let obstruction = (p0 + q_m1) * a1 + q0;
    let scale = [(p0 * a1).norm(), (q_m1 * a1).norm(), q0.norm(), 1.0]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ApparentReport {
        point: eps,
        exponents,
        a1,
        residual: obstruction.norm() / scale,
    })
}

/// Frobenius exponents at every singular point from the closed-form
/// coefficient functions.
pub fn computed_scheme(params: &HeunParameters) -> Result<Vec<SchemeRow>> {
    params.ode_coefficients(C64::new(0.123, 0.456))?;
    let finite = params.finite_singular_points();
    let outer = finite.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let p = |z| params.ode_coefficients(z).map(|(p, _)| p).unwrap_or(ZERO);
    let q = |z| params.ode_coefficients(z).map(|(_, q)| q).unwrap_or(ZERO);
    Ok(params
        .scheme
        .iter()
        .map(|row| {
            let radius = match row.point {
                ExtComplex::Finite(s) => isolating_radius(s, &finite),
                ExtComplex::Infinity => 2.0 * outer + 1.0,
            };
            SchemeRow {
                label: row.label,
                point: row.point,
                exponents: indicial_exponents(p, q, row.point, radius).to_vec(),
            }
        })
        .collect())
}
