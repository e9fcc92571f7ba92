//! Disk automorphisms, unitary gauge and A-normalization acting on problem
//! data, and the reduction of 2×2 problems to standard form.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{NchoError, Result};
use crate::numerics::matrix::{complex_pair, CMatrix, C64, ONE, ZERO};
use crate::numerics::poly::positive_arg;
use crate::numerics::{eigen_hermitian, re};
use crate::pencil::{decompose_pencil, inverse_sqrt, positivity_margin, NchoProblem};

const GROUP_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
/// Standard-form entries within this of their target are snapped exactly.
pub const SNAP_TOL: f64 = 1e-10;
/// Below this |b₂| (relative to max(1,|b₁|)) the Heun branch is taken.
pub const B2_ZERO_TOL: f64 = 1e-12;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(C64),
    Infinity,
}

impl ExtComplex {
    pub fn finite(self) -> Option<C64> {
        match self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }
}

impl From<C64> for ExtComplex {
    fn from(z: C64) -> Self {
        ExtComplex::Finite(z)
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ExtComplex::Infinity => write!(f, "inf"),
        }
    }
}

/// `[re, im]` or the string `"inf"`.
impl Serialize for ExtComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtComplex::Finite(z) => [z.re, z.im].serialize(s),
            ExtComplex::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Pair([re, im]) => Ok(ExtComplex::Finite(C64::new(re, im))),
            Repr::Tag(t) if t == "inf" => Ok(ExtComplex::Infinity),
            Repr::Tag(t) => Err(de::Error::custom(format!("unknown point {t:?}"))),
        }
    }
}

/// Element of SU(1,1), the matrix [[a, b], [b̄, ā]] with |a|² − |b|² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su11Element {
    #[serde(with = "complex_pair")]
    pub a: C64,
    #[serde(with = "complex_pair")]
    pub b: C64,
}

impl Su11Element {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let defect = a.norm_sqr() - b.norm_sqr() - 1.0;
        if defect.abs() > GROUP_TOL * a.norm_sqr().max(1.0) {
            return Err(NchoError::Contract(format!(
                "|a|^2 - |b|^2 = {} is not 1",
                defect + 1.0
            )));
        }
        Ok(Su11Element { a, b })
    }

    /// Rescales (a, b) by 1/√(|a|² − |b|²).
    pub fn normalized(a: C64, b: C64) -> Result<Self> {
        let d = a.norm_sqr() - b.norm_sqr();
        if d <= 0.0 {
            return Err(NchoError::Contract("|a| <= |b|".into()));
        }
        let s = 1.0 / d.sqrt();
        Ok(Su11Element { a: a * s, b: b * s })
    }

    pub fn identity() -> Self {
        Su11Element { a: ONE, b: ZERO }
    }

    /// (cosh t, sinh t): 0 ↦ tanh t.
    pub fn boost(t: f64) -> Self {
        Su11Element {
            a: re(t.cosh()),
            b: re(t.sinh()),
        }
    }

    /// z ↦ e^{iθ}z.
    pub fn rotation(theta: f64) -> Self {
        Su11Element {
            a: C64::from_polar(1.0, theta / 2.0),
            b: ZERO,
        }
    }

    /// The automorphism z ↦ (z − β)/(1 − β̄z), normalized into SU(1,1).
    pub fn sending_to_zero(beta: C64) -> Result<Self> {
        let r2 = beta.norm_sqr();
        if r2 >= 1.0 {
            return Err(NchoError::Contract(format!(
                "point {beta} is not inside the unit disk"
            )));
        }
        let a = 1.0 / (1.0 - r2).sqrt();
        Ok(Su11Element {
            a: re(a),
            b: -beta * a,
        })
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Su11Element) -> Su11Element {
        Su11Element {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }

    pub fn inverse(&self) -> Su11Element {
        Su11Element {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn determinant_defect(&self) -> f64 {
        (self.a.norm_sqr() - self.b.norm_sqr() - 1.0).abs()
    }

    pub fn is_identity(&self) -> bool {
        self.a == ONE && self.b == ZERO
    }
}

/// g.z = (az + b)/(b̄z + ā).
pub fn mobius_apply(g: &Su11Element, z: ExtComplex) -> ExtComplex {
    match z {
        ExtComplex::Infinity => {
            if g.b == ZERO {
                ExtComplex::Infinity
            } else {
                ExtComplex::Finite(g.a / g.b.conj())
            }
        }
        ExtComplex::Finite(z) => {
            let den = g.b.conj() * z + g.a.conj();
            let scale = (g.b.conj() * z).norm() + g.a.norm();
            if den.norm() <= 1e-14 * scale {
                ExtComplex::Infinity
            } else {
                ExtComplex::Finite((g.a * z + g.b) / den)
            }
        }
    }
}

/// The induced action on (A, B):
/// gA = (|a|²+|b|²)A − 2(āb·B + ab̄·B†), gB = −āb̄·A + ā²B + b̄²B†.
pub fn transform_ab(g: &Su11Element, a: &CMatrix, b: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !a.is_hermitian(1e-10) {
        return Err(NchoError::Contract("A is not Hermitian".into()));
    }
    let (ga, gb) = (g.a, g.b);
    let bd = b.adjoint();
    let new_a = &a.scale_real(ga.norm_sqr() + gb.norm_sqr())
        - &(&b.scale(ga.conj() * gb) + &bd.scale(ga * gb.conj())).scale_real(2.0);
    let new_b = &(&a.scale(-(ga.conj() * gb.conj())) + &b.scale(ga.conj() * ga.conj()))
        + &bd.scale(gb.conj() * gb.conj());
    Ok((new_a.hermitian_part(), new_b))
}

/// Problem with (A, B) transformed by g; C₀ and the weight are unchanged.
pub fn transform_problem(g: &Su11Element, problem: &NchoProblem) -> Result<NchoProblem> {
    let (a, b) = transform_ab(g, problem.a(), problem.b())?;
    Ok(problem.with_parts(a, b, problem.c0().clone(), problem.weight().clone()))
}

/// (UAU†, UBU†, UCU†).
pub fn gauge_unitary(
    u: &CMatrix,
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
) -> Result<(CMatrix, CMatrix, CMatrix)> {
    if !u.is_unitary(UNITARY_TOL) {
        return Err(NchoError::Contract("gauge matrix is not unitary".into()));
    }
    let ud = u.adjoint();
    let cong = |m: &CMatrix| &(u * m) * &ud;
    Ok((cong(a).hermitian_part(), cong(b), cong(c).hermitian_part()))
}

pub fn gauge_problem(u: &CMatrix, problem: &NchoProblem) -> Result<NchoProblem> {
    let (a, b, c0) = gauge_unitary(u, problem.a(), problem.b(), problem.c0())?;
    let w = &(u * problem.weight()) * &u.adjoint();
    Ok(problem.with_parts(a, b, c0, w))
}

/// (I, A^{−1/2}BA^{−1/2}, A^{−1/2}CA^{−1/2}) with the positive square root.
pub fn normalize_a(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let s = inverse_sqrt(a)?;
    let cong = |m: &CMatrix| &(&s * m) * &s;
    Ok((CMatrix::identity(a.rows()), cong(b), cong(c).hermitian_part()))
}

fn congruence_problem(s: &CMatrix, problem: &NchoProblem) -> NchoProblem {
    let cong = |m: &CMatrix| &(s * m) * s;
    problem.with_parts(
        cong(problem.a()),
        cong(problem.b()),
        cong(problem.c0()),
        cong(problem.weight()),
    )
}

/// One recorded step of the standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptStep {
    Mobius {
        #[serde(with = "complex_pair")]
        a: C64,
        #[serde(with = "complex_pair")]
        b: C64,
    },
    Normalize {
        #[serde(rename = "A_inv_sqrt")]
        inv_sqrt_a: CMatrix,
    },
    Gauge {
        #[serde(rename = "U")]
        u: CMatrix,
    },
}

/// Output of [`standardize_p2`].
#[derive(Debug, Clone, Serialize)]
pub struct Standardization {
    pub problem: NchoProblem,
    pub transcript: Vec<TranscriptStep>,
    /// Nonzero inner pole of the standard problem.
    #[serde(with = "complex_pair")]
    pub alpha: C64,
    /// Inner root sent to 0, when a Möbius step was needed.
    #[serde(with = "crate::numerics::matrix::opt_complex_pair")]
    pub sent_to_zero: Option<C64>,
}

/// Applies the transcript, then snaps the result onto the standard form.
pub fn replay(transcript: &[TranscriptStep], problem: &NchoProblem) -> Result<NchoProblem> {
    let mut cur = problem.clone();
    for step in transcript {
        cur = match step {
            TranscriptStep::Mobius { a, b } => transform_problem(&Su11Element::new(*a, *b)?, &cur)?,
            TranscriptStep::Normalize { inv_sqrt_a } => {
                let mut next = congruence_problem(inv_sqrt_a, &cur);
                next.a = CMatrix::identity(cur.p());
                next
            }
            TranscriptStep::Gauge { u } => gauge_problem(u, &cur)?,
        };
    }
    if matches!(transcript.last(), Some(TranscriptStep::Gauge { .. })) {
        cur = snap_std_form(cur)?;
    }
    Ok(cur)
}

/// Undoes the transcript; recovers the input up to round-off.
pub fn inverse_replay(transcript: &[TranscriptStep], std_problem: &NchoProblem) -> Result<NchoProblem> {
    let mut cur = std_problem.clone();
    for step in transcript.iter().rev() {
        cur = match step {
            TranscriptStep::Mobius { a, b } => {
                transform_problem(&Su11Element::new(*a, *b)?.inverse(), &cur)?
            }
            TranscriptStep::Normalize { inv_sqrt_a } => {
                congruence_problem(&inv_sqrt_a.inverse()?, &cur)
            }
            TranscriptStep::Gauge { u } => gauge_problem(&u.adjoint(), &cur)?,
        };
    }
    Ok(cur)
}

fn snap_std_form(mut prob: NchoProblem) -> Result<NchoProblem> {
    let id = CMatrix::identity(2);
    if !prob.a.approx_eq(&id, SNAP_TOL) {
        return Err(NchoError::NotStdForm(format!(
            "A deviates from I by {:.3e}",
            (&prob.a - &id).max_abs()
        )));
    }
    prob.a = id;
    let scale = prob.b.max_abs().max(1.0);
    let low = prob.b[(1, 0)].norm().max(prob.b[(1, 1)].norm());
    if low > SNAP_TOL * scale {
        return Err(NchoError::NotStdForm(format!("second row of B is {low:.3e}")));
    }
    prob.b[(1, 0)] = ZERO;
    prob.b[(1, 1)] = ZERO;
    if prob.b[(0, 1)].norm() <= B2_ZERO_TOL * prob.b[(0, 0)].norm().max(1.0) {
        prob.b[(0, 1)] = ZERO;
    }
    Ok(prob)
}

/// Checks A = I, B = [[b₁, b₂], [0, 0]], b₁ ≠ 0 and 2|b₁| + |b₂|² < 1.
pub fn check_std_form(problem: &NchoProblem, tol: f64) -> Result<()> {
    if problem.p() != 2 {
        return Err(NchoError::NotStdForm(format!("p = {} (need 2)", problem.p())));
    }
    if !problem.a().approx_eq(&CMatrix::identity(2), tol) {
        return Err(NchoError::NotStdForm("A is not the identity".into()));
    }
    let b = problem.b();
    if b[(1, 0)].norm() > tol || b[(1, 1)].norm() > tol {
        return Err(NchoError::NotStdForm("second row of B is nonzero".into()));
    }
    let (b1, b2) = (b[(0, 0)], b[(0, 1)]);
    if b1.norm() <= tol {
        return Err(NchoError::NotStdForm("b1 vanishes".into()));
    }
    if 2.0 * b1.norm() + b2.norm_sqr() >= 1.0 {
        return Err(NchoError::NotStdForm(format!(
            "2|b1| + |b2|^2 = {} is not < 1",
            2.0 * b1.norm() + b2.norm_sqr()
        )));
    }
    Ok(())
}

/// Reduces a 2×2 problem to standard form by a disk automorphism sending
/// one inner pole to 0, A-normalization, and a unitary gauge.
pub fn standardize_p2(problem: &NchoProblem) -> Result<Standardization> {
    if problem.p() != 2 {
        return Err(NchoError::Dimension(format!(
            "standardization needs p = 2, got {}",
            problem.p()
        )));
    }
    let margin = positivity_margin(problem, 256);
    if margin.margin <= 0.0 {
        return Err(NchoError::Positivity(format!(
            "least symbol eigenvalue {:.6e} at angle {:.6}",
            margin.margin, margin.argmin_angle
        )));
    }
    let dec = decompose_pencil(problem).map_err(|e| match e {
        NchoError::PoleOnUnitCircle(z) => NchoError::Positivity(format!("pole on unit circle {z}")),
        other => other,
    })?;
    if dec.poles.len() < 3 {
        return Err(NchoError::NotGeneric(dec.poles.len()));
    }
    let inner: Vec<C64> = dec
        .poles
        .iter()
        .copied()
        .filter(|z| z.norm() < 1.0 && *z != ZERO)
        .collect();

    let (g0, target, sent) = if dec.zero_is_pole {
        if inner.len() != 1 {
            return Err(NchoError::NotGeneric(dec.poles.len()));
        }
        (Su11Element::identity(), inner[0], None)
    } else {
        if inner.len() != 2 {
            return Err(NchoError::NotGeneric(dec.poles.len()));
        }
        let beta = choose_root_to_send(&inner);
        let gamma = if inner[0] == beta { inner[1] } else { inner[0] };
        let g0 = Su11Element::sending_to_zero(beta)?;
        let image = mobius_apply(&g0, gamma.into())
            .finite()
            .ok_or(NchoError::NotGeneric(dec.poles.len()))?;
        (g0, image, Some(beta))
    };
    let mut theta = target.arg();
    if theta.abs() < 1e-13 {
        theta = 0.0;
    }
    let g = if theta == 0.0 {
        g0
    } else {
        Su11Element::rotation(-theta).compose(&g0)
    };

    let mut transcript = Vec::new();
    let mut cur = problem.clone();
    if !g.is_identity() {
        transcript.push(TranscriptStep::Mobius { a: g.a, b: g.b });
        cur = transform_problem(&g, &cur)?;
    }
    let s = inverse_sqrt(cur.a())?;
    transcript.push(TranscriptStep::Normalize {
        inv_sqrt_a: s.clone(),
    });
    cur = congruence_problem(&s, &cur);
    let u = top_row_gauge(&cur)?;
    transcript.push(TranscriptStep::Gauge { u });

    let std_problem = replay(&transcript, problem)?;
    check_std_form(&std_problem, 1e-9)?;
    let std_dec = decompose_pencil(&std_problem)?;
    let alpha = std_dec
        .poles
        .iter()
        .copied()
        .filter(|z| z.norm() < 1.0 && *z != ZERO)
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .ok_or(NchoError::NotGeneric(std_dec.poles.len()))?;
    Ok(Standardization {
        problem: std_problem,
        transcript,
        alpha,
        sent_to_zero: sent,
    })
}

/// Smallest modulus, ties broken by smallest argument in [0, 2π).
fn choose_root_to_send(inner: &[C64]) -> C64 {
    let mut best = inner[0];
    for &z in &inner[1..] {
        let (mz, mb) = (z.norm(), best.norm());
        let tie = (mz - mb).abs() <= 1e-9 * mb.max(1e-300);
        if (!tie && mz < mb) || (tie && positive_arg(z) < positive_arg(best)) {
            best = z;
        }
    }
    best
}

/// Unitary U with UBU† = [[b₁, b₂], [0, 0]] and b₂ real non-negative; when
/// b₂ = 0 the residual phase makes the off-diagonal of C₀ (or W) real.
fn top_row_gauge(prob: &NchoProblem) -> Result<CMatrix> {
    let b = prob.b();
    let bbd = b * &b.adjoint();
    let eig = eigen_hermitian(&bbd, true)?;
    let v = eig.vectors.expect("vectors requested");
    let (u0, u1) = (v[(0, 1)], v[(1, 1)]);
    let u = CMatrix::from_rows(&[vec![u0.conj(), u1.conj()], vec![-u1, u0]]);
    let x = &(&u * b) * &u.adjoint();
    let b2 = x[(0, 1)];
    let psi = if b2.norm() > B2_ZERO_TOL * x[(0, 0)].norm().max(1.0) {
        b2.arg()
    } else {
        let c = &(&u * prob.c0()) * &u.adjoint();
        let w = &(&u * prob.weight()) * &u.adjoint();
        if c[(0, 1)].norm() > 1e-14 {
            c[(0, 1)].arg()
        } else if w[(0, 1)].norm() > 1e-14 {
            w[(0, 1)].arg()
        } else {
            0.0
        }
    };
    let d = CMatrix::diag(&[ONE, C64::from_polar(1.0, psi)]);
    Ok(&d * &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{c, I};
    use crate::pencil::decompose_pencil;

    fn two_level(beta: f64, gamma: f64, eta: f64) -> NchoProblem {
        let b = CMatrix::from_rows(&[vec![ZERO, c(0.0, 0.5)], vec![c(0.0, -0.5), ZERO]]);
        let off = if eta == 0.0 { 0.0 } else { eta * (beta * gamma - 1.0).sqrt() };
        let c0 = CMatrix::from_rows(&[vec![ZERO, c(0.0, off)], vec![c(0.0, -off), ZERO]]);
        NchoProblem::new(0.5, CMatrix::diag_real(&[beta, gamma]), b, c0).unwrap()
    }

    #[test]
    fn identity_and_boost() {
        let z = c(0.3, -0.2);
        assert_eq!(mobius_apply(&Su11Element::identity(), z.into()), z.into());
        let t = 0.7;
        let img = mobius_apply(&Su11Element::boost(t), ZERO.into()).finite().unwrap();
        assert!((img - re(t.tanh())).norm() < 1e-15);
    }

    #[test]
    fn infinity_bookkeeping() {
        let g = Su11Element::new(c(1.25, 0.0), c(0.0, 0.75)).unwrap();
        let pole = -g.a.conj() / g.b.conj();
        assert_eq!(mobius_apply(&g, pole.into()), ExtComplex::Infinity);
        let img = mobius_apply(&g, ExtComplex::Infinity).finite().unwrap();
        assert!((img - g.a / g.b.conj()).norm() < 1e-15);
        assert_eq!(
            mobius_apply(&Su11Element::rotation(0.4), ExtComplex::Infinity),
            ExtComplex::Infinity
        );
    }

    #[test]
    fn group_law() {
        let g = Su11Element::boost(0.4).compose(&Su11Element::rotation(1.1));
        let h = Su11Element::sending_to_zero(c(0.2, 0.5)).unwrap();
        let gh = g.compose(&h);
        assert!(gh.determinant_defect() < 1e-12);
        let z = c(0.1, 0.35);
        let lhs = mobius_apply(&gh, z.into()).finite().unwrap();
        let rhs = mobius_apply(&g, mobius_apply(&h, z.into())).finite().unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        let id = g.compose(&g.inverse());
        assert!((id.a - ONE).norm() < 1e-14 && id.b.norm() < 1e-14);
    }

    #[test]
    fn non_unimodular_element_is_rejected() {
        assert!(Su11Element::new(re(1.0), re(0.5)).is_err());
    }

    #[test]
    fn transform_of_example_h_plus() {
        // A′ = I, B′ = σ₁/4 under the boost with tanh t = 1/2
        let sigma1 = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let g = Su11Element::boost(0.5f64.atanh() / 2.0);
        let (ga, gb) = transform_ab(&g, &CMatrix::identity(2), &sigma1.scale_real(0.25)).unwrap();
        let s3 = 3f64.sqrt();
        let want_a = CMatrix::from_real_rows(&[vec![1.0, -0.25], vec![-0.25, 1.0]]).scale_real(2.0 / s3);
        let want_b = CMatrix::from_real_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).scale_real(1.0 / (2.0 * s3));
        assert!(ga.approx_eq(&want_a, 1e-14), "{ga:?}");
        assert!(gb.approx_eq(&want_b, 1e-14), "{gb:?}");
    }

    #[test]
    fn gauge_diagonalizes_sigma_two_type() {
        let h = 1.0 / 2f64.sqrt();
        let u = CMatrix::from_real_rows(&[vec![h, h], vec![h, -h]]);
        let b = CMatrix::from_rows(&[vec![ZERO, I.scale(0.5)], vec![-I.scale(0.5), ZERO]]);
        let (_, gb, _) = gauge_unitary(&u, &CMatrix::identity(2), &b, &CMatrix::zeros(2, 2)).unwrap();
        // result is diag(±1/2) up to phase
        assert!(gb[(0, 1)].norm() + gb[(1, 0)].norm() < 1e-15 || gb[(0, 0)].norm() < 1e-15);
        let mut ev: Vec<f64> = crate::numerics::eigen_general_small(&gb)
            .unwrap()
            .iter()
            .map(|z| z.norm())
            .collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 0.5).abs() < 1e-15 && (ev[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_unitary_gauge_is_rejected() {
        let m = CMatrix::diag_real(&[1.0, 2.0]);
        let id = CMatrix::identity(2);
        assert!(gauge_unitary(&m, &id, &id, &id).is_err());
    }

    #[test]
    fn normalize_diagonal_a() {
        let a = CMatrix::diag_real(&[4.0, 1.0]);
        let b = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(3.0, 0.0)], vec![c(0.0, -1.0), c(2.0, 2.0)]]);
        let (na, nb, _) = normalize_a(&a, &b, &CMatrix::zeros(2, 2)).unwrap();
        let d = CMatrix::diag_real(&[0.5, 1.0]);
        assert_eq!(na, CMatrix::identity(2));
        assert!(nb.approx_eq(&(&(&d * &b) * &d), 1e-15));
    }

    #[test]
    fn two_level_standardizes_to_half() {
        let st = standardize_p2(&two_level(2.0, 2.0, 0.0)).unwrap();
        assert!((st.alpha - re(0.5)).norm() < 1e-12, "{}", st.alpha);
        check_std_form(&st.problem, 1e-12).unwrap();
        // B = B† input lands on the Heun branch
        assert_eq!(st.problem.b()[(0, 1)], ZERO);
        let replayed = replay(&st.transcript, &two_level(2.0, 2.0, 0.0)).unwrap();
        assert_eq!(replayed, st.problem);
        let back = inverse_replay(&st.transcript, &st.problem).unwrap();
        let orig = two_level(2.0, 2.0, 0.0);
        assert!(back.a().approx_eq(orig.a(), 1e-10) && back.b().approx_eq(orig.b(), 1e-10));
    }

    #[test]
    fn std_form_input_has_trivial_transcript() {
        // b₁ < 0 puts the inner pole on the positive axis already
        let b = CMatrix::from_rows(&[vec![re(-0.2), re(0.3)], vec![ZERO, ZERO]]);
        let c0 = CMatrix::from_rows(&[vec![re(0.1), c(0.2, 0.1)], vec![c(0.2, -0.1), re(-0.3)]]);
        let prob = NchoProblem::new(1.5, CMatrix::identity(2), b, c0).unwrap();
        let st = standardize_p2(&prob).unwrap();
        assert!(st.problem.b().approx_eq(prob.b(), 1e-12), "{:?} {:?}", st.problem.b(), st.transcript);
        assert!(st.problem.c0().approx_eq(prob.c0(), 1e-12));
        assert!(!st.transcript.iter().any(|s| matches!(s, TranscriptStep::Mobius { .. })));
    }

    #[test]
    fn free_oscillator_is_not_generic() {
        let prob = NchoProblem::new(
            0.5,
            CMatrix::identity(2),
            CMatrix::zeros(2, 2),
            CMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!(matches!(standardize_p2(&prob), Err(NchoError::NotGeneric(1))));
    }

    #[test]
    fn non_positive_problem_is_rejected() {
        assert!(matches!(
            standardize_p2(&two_level(0.8, 1.0, 0.0)),
            Err(NchoError::Positivity(_))
        ));
    }

    #[test]
    fn poles_follow_mobius_rule() {
        let prob = two_level(3.0, 2.0, 0.1);
        let g = Su11Element::normalized(c(1.1, 0.2), c(0.3, -0.35)).unwrap();
        let before = decompose_pencil(&prob).unwrap();
        let after = decompose_pencil(&transform_problem(&g, &prob).unwrap()).unwrap();
        for al in &before.poles {
            let img = mobius_apply(&g, (*al).into()).finite().unwrap();
            let d = after.poles.iter().map(|z| (z - img).norm() / img.norm().max(1.0)).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "{img} missing");
        }
    }

    #[test]
    fn transcript_serializes_as_tagged_steps() {
        let st = standardize_p2(&two_level(3.0, 2.0, 0.0)).unwrap();
        let json = serde_json::to_string(&st.transcript).unwrap();
        assert!(json.starts_with("[{\"mobius\":{\"a\":"));
        assert!(json.contains("\"normalize\":{\"A_inv_sqrt\":") && json.contains("\"gauge\":{\"U\":"));
        let back: Vec<TranscriptStep> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, st.transcript);
    }
}
