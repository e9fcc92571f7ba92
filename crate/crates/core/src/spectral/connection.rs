//! Eigenvalues as zeros of a connection determinant.
//!
//! A solution of the Fuchsian system that is holomorphic in the unit disk
//! must, at every inner singular point s, have no component along local
//! solutions with a non-integer nontrivial exponent ρ. Expressing one frame
//! of solutions in each local Frobenius basis gives rows K_s; weighting the
//! row of exponent ρ by 1/Γ(−ρ) removes the condition exactly when ρ ∈ ℕ.
//! The determinant of the p weighted rows vanishes precisely at eigenvalues
//! and is continuous in λ; for real data every factor is real on the real
//! axis. A positive factor 1/Γ(1 + |ρ|) keeps the weights from growing
//! factorially, so |T| between roots stays moderate.

use serde::Serialize;

use crate::covariance::standardize_p2;
use crate::error::{NchoError, Result};
use crate::fuchsian::{build_fuchsian_from, FuchsianSystem};
use crate::numerics::gamma::{ln_gamma, rgamma};
use crate::numerics::{eigen_general_small, CMatrix, C64, ONE, ZERO};
use crate::pencil::{decompose_pencil, positivity_margin, NchoProblem, PencilDecomposition};

use super::truncation::spectrum_truncated;
use super::{SpectrumMethod, SpectrumResult};

pub const TAYLOR_ORDER: usize = 30;
/// Continuation steps stay within this fraction of the distance to the
/// nearest singular point.
pub const STEP_FRACTION: f64 = 0.4;
/// Frobenius series are matched at this fraction of the isolating radius.
pub const MATCH_FRACTION: f64 = 0.5;
const MAX_SERIES_TERMS: usize = 4000;
const MAX_STEPS: usize = 20_000;
/// Growth of a single Frobenius coefficient beyond which the evaluation is
/// reported as sitting on a logarithmic resonance.
const RESONANCE_AMPLIFICATION: f64 = 1e6;
const CLUSTER_TOL: f64 = 1e-6;
/// Second matching fraction; T does not depend on it in exact arithmetic,
/// so the difference between the two values measures rounding error.
const CHECK_FRACTION: f64 = 0.4;
/// Uncertainty in λ, relative to max(1, |λ|), above which a root is flagged.
const ILL_CONDITIONED: f64 = 1e-8;

/// Local exponents at a singular point with the eigenvectors that start the
/// Frobenius series.
#[derive(Debug, Clone)]
struct LocalBasis {
    exponents: Vec<C64>,
    vectors: Vec<Vec<C64>>,
    nontrivial: Vec<bool>,
}

/// 1/Γ(−ρ), divided by Γ(1 + |ρ|) so it stays bounded (≈ sin(πρ)/π) for
/// large positive ρ. Vanishes exactly on ρ ∈ ℕ.
fn holomorphy_weight(rho: C64) -> C64 {
    rgamma(-rho) * (-ln_gamma(1.0 + rho.norm())).exp()
}

/// Scales v so its largest-modulus component is real and positive.
fn fix_phase(v: &mut [C64]) {
    let big = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ZERO);
    if big != ZERO {
        let unit = big.conj() / big.norm();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z = *z * unit / norm;
        }
    }
}

/// A null vector of a singular 2×2 matrix.
fn null_vector_2x2(m: &CMatrix) -> Vec<C64> {
    let r0 = m[(0, 0)].norm_sqr() + m[(0, 1)].norm_sqr();
    let r1 = m[(1, 0)].norm_sqr() + m[(1, 1)].norm_sqr();
    let (a, b) = if r0 >= r1 {
        (m[(0, 0)], m[(0, 1)])
    } else {
        (m[(1, 0)], m[(1, 1)])
    };
    if a == ZERO && b == ZERO {
        return vec![ONE, ZERO];
    }
    let mut v = vec![-b, a];
    fix_phase(&mut v);
    v
}

fn local_basis(system: &FuchsianSystem, j: usize) -> Result<LocalBasis> {
    let r = &system.residues[j];
    let pj = &system.pencil_residues[j];
    let p = system.p();
    if p == 1 {
        return Ok(LocalBasis {
            exponents: vec![r[(0, 0)]],
            vectors: vec![vec![ONE]],
            nontrivial: vec![true],
        });
    }
    if p > 2 {
        return Err(NchoError::Unsupported(format!(
            "connection determinant for p = {p}"
        )));
    }
    // For a simple pole rank P_j = dim Ker Q(α_j), which the decomposition certified.
    let rank = system.kernel_dims[j];
    if rank == 2 {
        let exponents = eigen_general_small(r)?;
        let scale = r.max_abs().max(1.0);
        let shifted0 = r - &CMatrix::scalar(2, exponents[0]);
        let vectors = if shifted0.max_abs() <= 1e-12 * scale {
            vec![vec![ONE, ZERO], vec![ZERO, ONE]]
        } else {
            let shifted1 = r - &CMatrix::scalar(2, exponents[1]);
            vec![null_vector_2x2(&shifted0), null_vector_2x2(&shifted1)]
        };
        return Ok(LocalBasis {
            exponents,
            vectors,
            nontrivial: vec![true, true],
        });
    }
    // Rank one: R = u rᵀ with u spanning Im P_j, independent of λ.
    let col = (0..2)
        .max_by(|&a, &b| {
            let na = pj[(0, a)].norm_sqr() + pj[(1, a)].norm_sqr();
            let nb = pj[(0, b)].norm_sqr() + pj[(1, b)].norm_sqr();
            na.total_cmp(&nb)
        })
        .expect("two columns");
    let mut u = pj.column(col);
    fix_phase(&mut u);
    let lead = if u[0].norm() >= u[1].norm() { 0 } else { 1 };
    let row: Vec<C64> = r.row(lead).iter().map(|&x| x / u[lead]).collect();
    let mut kernel = if row[0].norm() + row[1].norm() == 0.0 {
        vec![-u[1].conj(), u[0].conj()]
    } else {
        vec![row[1], -row[0]]
    };
    fix_phase(&mut kernel);
    Ok(LocalBasis {
        exponents: vec![r.trace(), ZERO],
        vectors: vec![u, kernel],
        nontrivial: vec![true, false],
    })
}

/// Solves ((ρ+n)I − R) c = rhs, nudging an exactly singular shift.
fn shifted_solve(r: &CMatrix, shift: C64, rhs: &CMatrix) -> Result<CMatrix> {
    let p = r.rows();
    let m = &CMatrix::scalar(p, shift) - r;
    match m.solve(rhs) {
        Ok(x) if x.is_finite() => Ok(x),
        _ => {
            let nudge = shift + 1e-14 * shift.norm().max(1.0);
            (&CMatrix::scalar(p, nudge) - r).solve(rhs)
        }
    }
}

/// Columns are the local solutions (w/ω)^ρ Σ c_n wⁿ at w = z − s, one per
/// exponent, with (w/ω)^ρ on the principal branch.
fn frobenius_frame(
    system: &FuchsianSystem,
    j: usize,
    basis: &LocalBasis,
    omega: C64,
    w: C64,
    flags: &mut Vec<String>,
) -> Result<CMatrix> {
    let p = system.p();
    let s = system.singular_points[j];
    let r = &system.residues[j];
    let others: Vec<(C64, &CMatrix)> = system
        .singular_points
        .iter()
        .zip(&system.residues)
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, (a, rk))| (ONE / (a - s), rk))
        .collect();
    let radius = w.norm();
    let mut h: Vec<CMatrix> = Vec::new();
    let mut powers: Vec<C64> = others.iter().map(|(inv, _)| *inv).collect();
    let mut out = CMatrix::zeros(p, p);

    for (col, (&rho, v)) in basis.exponents.iter().zip(&basis.vectors).enumerate() {
        let mut coeffs: Vec<CMatrix> = vec![CMatrix::from_columns(std::slice::from_ref(v))];
        let mut sum = coeffs[0].clone();
        let mut wn = ONE;
        let mut largest_term = coeffs[0].max_abs();
        let mut quiet = 0;
        let mut n = 0;
        while quiet < 3 {
            n += 1;
            if n > MAX_SERIES_TERMS {
                return Err(NchoError::Continuation(format!(
                    "Frobenius series at {s} did not converge"
                )));
            }
            while h.len() < n {
                // H_k = −Σ R_i/(α_i − s)^{k+1}
                let mut hk = CMatrix::zeros(p, p);
                for ((inv, rk), pw) in others.iter().zip(powers.iter_mut()) {
                    hk -= &rk.scale(*pw);
                    *pw *= *inv;
                }
                h.push(hk);
            }
            let mut rhs = CMatrix::zeros(p, 1);
            for (k, ck) in coeffs.iter().enumerate() {
                rhs += &(&h[n - 1 - k] * ck);
            }
            let cn = shifted_solve(r, rho + n as f64, &rhs)?;
            wn *= w;
            let term_size = cn.max_abs() * radius.powi(n as i32);
            if !term_size.is_finite() {
                return Err(NchoError::Continuation(format!(
                    "Frobenius series at {s} overflowed"
                )));
            }
            if term_size > RESONANCE_AMPLIFICATION * largest_term {
                flags.push(format!(
                    "near logarithmic resonance at z = {s:.6}, exponent {rho:.6}, order {n}"
                ));
            }
            largest_term = largest_term.max(term_size);
            sum += &cn.scale(wn);
            coeffs.push(cn);
            if term_size <= 1e-17 * sum.max_abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        let lead = (w / omega).powc(rho);
        for i in 0..p {
            out[(i, col)] = sum[(i, 0)] * lead;
        }
    }
    Ok(out)
}

/// Taylor continuation of a fundamental matrix along the segment from → to.
fn transport(system: &FuchsianSystem, mut frame: CMatrix, from: C64, to: C64) -> Result<CMatrix> {
    let p = system.p();
    let mut z = from;
    for _ in 0..MAX_STEPS {
        let remaining = to - z;
        if remaining.norm() <= 1e-15 * to.norm().max(1.0) {
            return Ok(frame);
        }
        let dist = system
            .singular_points
            .iter()
            .map(|a| (a - z).norm())
            .fold(f64::INFINITY, f64::min);
        if dist < 1e-10 {
            return Err(NchoError::Continuation(format!(
                "path passes through a singular point near {z}"
            )));
        }
        let mut step_len = remaining.norm().min(STEP_FRACTION * dist);
        let direction = remaining / remaining.norm();
        // M_n = −Σ R_j/(α_j − z)^{n+1}
        let inverses: Vec<C64> = system.singular_points.iter().map(|a| ONE / (a - z)).collect();
        let mut m: Vec<CMatrix> = Vec::with_capacity(TAYLOR_ORDER);
        let mut powers = inverses.clone();
        for _ in 0..TAYLOR_ORDER {
            let mut mk = CMatrix::zeros(p, p);
            for ((rj, pw), inv) in system.residues.iter().zip(powers.iter_mut()).zip(&inverses) {
                mk -= &rj.scale(*pw);
                *pw *= *inv;
            }
            m.push(mk);
        }
        let mut a: Vec<CMatrix> = vec![frame.clone()];
        for n in 0..TAYLOR_ORDER {
            let mut next = CMatrix::zeros(p, p);
            for k in 0..=n {
                next += &(&m[n - k] * &a[k]);
            }
            a.push(next.scale_real(1.0 / (n as f64 + 1.0)));
        }
        loop {
            let hstep = direction * step_len;
            let tail = a[TAYLOR_ORDER].max_abs() * step_len.powi(TAYLOR_ORDER as i32)
                + a[TAYLOR_ORDER - 1].max_abs() * step_len.powi(TAYLOR_ORDER as i32 - 1);
            if tail <= 1e-15 * frame.max_abs() || step_len <= 1e-6 * dist {
                let mut value = CMatrix::zeros(p, p);
                let mut hn = ONE;
                for an in &a {
                    value += &an.scale(hn);
                    hn *= hstep;
                }
                frame = value;
                z += hstep;
                break;
            }
            step_len *= 0.5;
        }
        if !frame.is_finite() {
            return Err(NchoError::Continuation("continuation overflowed".into()));
        }
    }
    Err(NchoError::Continuation(format!(
        "continuation from {from} to {to} exceeded {MAX_STEPS} steps"
    )))
}

/// Value of the connection determinant with any diagnostics raised on the way.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectionValue {
    #[serde(with = "crate::numerics::matrix::complex_pair")]
    pub value: C64,
    pub flags: Vec<String>,
}

/// Precomputed pencil data for repeated determinant evaluations.
#[derive(Debug, Clone)]
pub struct ConnectionSolver {
    problem: NchoProblem,
    dec: PencilDecomposition,
    standardized: bool,
    real_data: bool,
}

impl ConnectionSolver {
    /// For p = 2 the problem is first brought to standard form, which keeps
    /// the determinant real on the real axis; non-generic pencils keep their
    /// original coordinates.
    pub fn new(problem: &NchoProblem) -> Result<Self> {
        let p = problem.p();
        if p > 2 {
            return Err(NchoError::Unsupported(format!(
                "connection determinant for p = {p}; use truncation"
            )));
        }
        let margin = positivity_margin(problem, 256);
        if margin.margin <= 0.0 {
            return Err(NchoError::Positivity(format!(
                "least symbol eigenvalue {:.6e} at angle {:.6}",
                margin.margin, margin.argmin_angle
            )));
        }
        let base = problem.unweighted()?;
        let (work, standardized) = if p == 2 {
            match standardize_p2(&base) {
                Ok(std) => (std.problem, true),
                Err(NchoError::NotGeneric(_)) => (base, false),
                Err(e) => return Err(e),
            }
        } else {
            (base, false)
        };
        let dec = decompose_pencil(&work)?;
        let scale = work.a().max_abs().max(work.b().max_abs()).max(work.c0().max_abs());
        let real_data = [work.a(), work.b(), work.c0()]
            .iter()
            .all(|m| m.as_slice().iter().all(|z| z.im.abs() <= 1e-14 * scale.max(1.0)));
        Ok(ConnectionSolver {
            problem: work,
            dec,
            standardized,
            real_data,
        })
    }

    /// The problem the determinant is evaluated on.
    pub fn working_problem(&self) -> &NchoProblem {
        &self.problem
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// True when T is real on the real axis.
    pub fn is_real(&self) -> bool {
        self.real_data
    }

    pub fn evaluate(&self, lambda: C64) -> Result<ConnectionValue> {
        self.evaluate_matched(lambda, MATCH_FRACTION)
    }

    /// |T| difference between two matching radii: a sample of the rounding
    /// error in T at λ.
    pub fn spread(&self, lambda: C64) -> Result<f64> {
        let main = self.evaluate_matched(lambda, MATCH_FRACTION)?.value;
        let check = self.evaluate_matched(lambda, CHECK_FRACTION)?.value;
        Ok((main - check).norm())
    }

    fn evaluate_matched(&self, lambda: C64, fraction: f64) -> Result<ConnectionValue> {
        let system = build_fuchsian_from(&self.problem, &self.dec, lambda);
        let p = system.p();
        let poles = &system.singular_points;
        let zero = self.dec.zero_index();
        let inner: Vec<usize> = self
            .dec
            .inner_indices()
            .into_iter()
            .filter(|&j| Some(j) != zero)
            .collect();
        let mut flags = Vec::new();
        let mut rows: Vec<Vec<C64>> = Vec::new();

        let base = match zero {
            Some(z0) => {
                let basis = local_basis(&system, z0)?;
                for (k, (&rho, &nontrivial)) in
                    basis.exponents.iter().zip(&basis.nontrivial).enumerate()
                {
                    if nontrivial {
                        let mut row = vec![ZERO; p];
                        row[k] = holomorphy_weight(rho);
                        rows.push(row);
                    }
                }
                let omega = inner.first().map_or(ONE, |&j| poles[j] / poles[j].norm());
                let radius = fraction
                    * poles
                        .iter()
                        .filter(|a| **a != ZERO)
                        .map(|a| a.norm())
                        .fold(f64::INFINITY, f64::min);
                Some((z0, basis, omega, radius))
            }
            None => None,
        };

        for &j in &inner {
            let s = poles[j];
            let toward_zero = -s / s.norm();
            let isolation = poles
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, a)| (a - s).norm())
                .fold(s.norm(), f64::min);
            let meet = s + toward_zero * (fraction * isolation);
            let (start, frame) = match &base {
                Some((z0, basis, omega, radius)) => {
                    let start = -toward_zero * *radius;
                    let y0 = frobenius_frame(&system, *z0, basis, *omega, start, &mut flags)?;
                    (start, y0)
                }
                None => (ZERO, CMatrix::identity(p)),
            };
            let phi = transport(&system, frame, start, meet)?;
            let basis = local_basis(&system, j)?;
            let local = frobenius_frame(&system, j, &basis, toward_zero, meet - s, &mut flags)?;
            let k = local.solve(&phi)?;
            for (row, (&rho, &nontrivial)) in basis.exponents.iter().zip(&basis.nontrivial).enumerate()
            {
                if nontrivial {
                    let g = holomorphy_weight(rho);
                    rows.push(k.row(row).iter().map(|&x| x * g).collect());
                }
            }
        }

        if rows.len() != p {
            return Err(NchoError::Unsupported(format!(
                "{} holomorphy conditions for p = {p}",
                rows.len()
            )));
        }
        let value = CMatrix::from_rows(&rows).det()?;
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(NchoError::Continuation(format!(
                "connection determinant is not finite at λ = {lambda}"
            )));
        }
        flags.dedup();
        Ok(ConnectionValue { value, flags })
    }

    fn real_value(&self, lambda: f64) -> Result<f64> {
        Ok(self.evaluate(C64::new(lambda, 0.0))?.value.re)
    }

    /// Bracketed refinement around `seed`, widening up to `max_radius`.
    pub fn refine(&self, seed: f64, max_radius: f64) -> Result<RefinedRoot> {
        if !self.real_data {
            return self.refine_secant(seed, max_radius, 1);
        }
        let f_seed = self.real_value(seed)?;
        if f_seed == 0.0 {
            return self.finish(seed, 0, Some((seed, seed)), 1, f64::NAN);
        }
        let mut delta = (1e-3 * seed.abs().max(1.0)).min(max_radius);
        let (mut a, mut b, mut fa, mut fb);
        loop {
            let lo = seed - delta;
            let hi = seed + delta;
            let (flo, fhi) = (self.real_value(lo)?, self.real_value(hi)?);
            // Prefer the half-interval that changes sign next to the seed.
            if flo.signum() != f_seed.signum() {
                (a, b, fa, fb) = (lo, seed, flo, f_seed);
                break;
            }
            if fhi.signum() != f_seed.signum() {
                (a, b, fa, fb) = (seed, hi, f_seed, fhi);
                break;
            }
            if delta >= max_radius {
                return Err(NchoError::Refinement(format!(
                    "no sign change of the connection determinant within {max_radius:.3e} of {seed}"
                )));
            }
            delta = (2.0 * delta).min(max_radius);
        }
        let slope = ((fb - fa) / (b - a)).abs();
        // Illinois variant of regula falsi.
        let mut side = 0i8;
        let mut iterations = 0;
        while iterations < 200 {
            iterations += 1;
            if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
                break;
            }
            let mut x = (a * fb - b * fa) / (fb - fa);
            if !(x > a.min(b) && x < a.max(b)) {
                x = 0.5 * (a + b);
            }
            let fx = self.real_value(x)?;
            if fx == 0.0 {
                a = x;
                b = x;
                break;
            }
            if fx.signum() == fb.signum() {
                b = x;
                fb = fx;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                a = x;
                fa = fx;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            }
        }
        let (fa_true, fb_true) = (self.real_value(a)?.abs(), self.real_value(b)?.abs());
        let root = if fa_true <= fb_true { a } else { b };
        self.finish(root, iterations, Some((a.min(b), a.max(b))), 1, slope)
    }

    /// Secant iteration in the complex plane; used for complex data and for
    /// clusters of eigenvalues where T does not change sign.
    pub fn refine_secant(&self, seed: f64, max_radius: f64, multiplicity: usize) -> Result<RefinedRoot> {
        let mut x0 = C64::new(seed, 0.0);
        let mut f0 = self.evaluate(x0)?.value;
        if f0 == ZERO {
            return self.finish(seed, 0, None, multiplicity, f64::NAN);
        }
        let mut x1 = x0 + 1e-4 * seed.abs().max(1.0);
        let mut f1 = self.evaluate(x1)?.value;
        let slope = ((f1 - f0) / (x1 - x0)).norm();
        let mut best = if f1.norm() < f0.norm() { (x1, f1.norm()) } else { (x0, f0.norm()) };
        let mut iterations = 0;
        while iterations < 200 {
            iterations += 1;
            if f1 == f0 {
                break;
            }
            let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if !(x2.re.is_finite() && x2.im.is_finite()) {
                break;
            }
            let f2 = self.evaluate(x2)?.value;
            if f2.norm() < best.1 {
                best = (x2, f2.norm());
            }
            let settled = (x2 - x1).norm() <= 1e-14 * x2.norm().max(1.0);
            (x0, f0, x1, f1) = (x1, f1, x2, f2);
            if settled || f2 == ZERO {
                break;
            }
        }
        let root = best.0;
        if (root.re - seed).abs() > max_radius {
            return Err(NchoError::Refinement(format!(
                "secant iteration from {seed} left the admissible window (reached {root})"
            )));
        }
        let mut refined = self.finish(root.re, iterations, None, multiplicity, slope)?;
        refined.imaginary_part = root.im;
        Ok(refined)
    }

    /// Packages a root; `slope` is a secant slope of T near it, used to
    /// turn |T| and its rounding spread into an uncertainty in λ.
    fn finish(
        &self,
        lambda: f64,
        iterations: usize,
        bracket: Option<(f64, f64)>,
        multiplicity: usize,
        slope: f64,
    ) -> Result<RefinedRoot> {
        let at = C64::new(lambda, 0.0);
        let value = self.evaluate(at)?;
        let residual = value.value.norm();
        let spread = self.spread(at)?;
        let slope = if slope > 0.0 {
            slope
        } else {
            // No secant was formed (the seed was an exact zero).
            let h = 1e-6 * lambda.abs().max(1.0);
            let up = self.evaluate(C64::new(lambda + h, 0.0))?.value;
            let down = self.evaluate(C64::new(lambda - h, 0.0))?.value;
            (up - down).norm() / (2.0 * h)
        };
        let uncertainty = if residual + spread == 0.0 {
            0.0
        } else if slope > 0.0 {
            (residual + spread) / slope
        } else {
            f64::INFINITY
        };
        let mut flags = value.flags;
        if uncertainty > ILL_CONDITIONED * lambda.abs().max(1.0) {
            flags.push(format!("ill-conditioned: λ uncertain by {uncertainty:.2e}"));
        }
        Ok(RefinedRoot {
            lambda,
            imaginary_part: 0.0,
            residual,
            uncertainty,
            iterations,
            bracket,
            multiplicity,
            flags,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinedRoot {
    pub lambda: f64,
    /// Imaginary part left by a complex secant iteration; zero otherwise.
    pub imaginary_part: f64,
    /// |T(λ)|.
    pub residual: f64,
    /// (|T| + rounding spread)/slope at the root.
    pub uncertainty: f64,
    pub iterations: usize,
    pub bracket: Option<(f64, f64)>,
    pub multiplicity: usize,
    pub flags: Vec<String>,
}

/// T(λ) for the problem (in standard form when p = 2).
pub fn connection_determinant(problem: &NchoProblem, lambda: C64) -> Result<C64> {
    Ok(ConnectionSolver::new(problem)?.evaluate(lambda)?.value)
}

/// Refines `seed` to the zero of T it brackets, searching within
/// 0.25·max(1, |seed|).
pub fn refine_eigenvalue(problem: &NchoProblem, seed: f64) -> Result<RefinedRoot> {
    let solver = ConnectionSolver::new(problem)?;
    solver.refine(seed, 0.25 * seed.abs().max(1.0))
}

/// Lowest `count` eigenvalues as zeros of T, seeded from truncation.
pub fn spectrum_connection(problem: &NchoProblem, count: usize, tol: f64) -> Result<SpectrumResult> {
    let seeds = spectrum_truncated(problem, count + 1, tol.max(1e-10))?;
    let solver = ConnectionSolver::new(problem)?;
    let values = &seeds.eigenvalues;

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        let split = k == values.len()
            || (values[k] - values[k - 1]).abs() > CLUSTER_TOL * values[k].abs().max(1.0);
        if split {
            clusters.push((start, k));
            start = k;
        }
    }

    let mut eigenvalues = Vec::with_capacity(count);
    let mut estimates = Vec::with_capacity(count);
    let mut flags = Vec::new();
    for (ci, &(lo, hi)) in clusters.iter().enumerate() {
        if lo >= count {
            break;
        }
        let size = hi - lo;
        let centre = values[lo..hi].iter().sum::<f64>() / size as f64;
        let gap_below = if ci > 0 { centre - values[lo - 1] } else { f64::INFINITY };
        let gap_above = if hi < values.len() { values[hi] - centre } else { f64::INFINITY };
        let radius = (0.45 * gap_below.min(gap_above)).min(0.25 * centre.abs().max(1.0));
        let root = if size == 1 {
            solver.refine(centre, radius)?
        } else {
            flags.push(format!(
                "eigenvalue {centre:.10} has multiplicity {size}; refined by secant"
            ));
            solver.refine_secant(centre, radius, size)?
        };
        for f in &root.flags {
            flags.push(format!("λ = {:.10}: {f}", root.lambda));
        }
        for _ in 0..size.min(count - lo) {
            eigenvalues.push(root.lambda);
            estimates.push(root.uncertainty);
        }
    }
    Ok(SpectrumResult {
        method: SpectrumMethod::Connection,
        eigenvalues,
        estimates,
        orders: vec![*seeds.orders.last().expect("at least one order")],
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, re, I};

    fn scalar_problem() -> NchoProblem {
        NchoProblem::new(
            0.5,
            CMatrix::from_real_rows(&[vec![1.0]]),
            CMatrix::from_real_rows(&[vec![0.25]]),
            CMatrix::zeros(1, 1),
        )
        .unwrap()
    }

    fn ncho(beta: f64, gamma: f64, eta: f64, mu: f64) -> NchoProblem {
        let b = CMatrix::from_rows(&[vec![ZERO, c(0.0, 0.5)], vec![c(0.0, -0.5), ZERO]]);
        let off = I * eta * (beta * gamma - 1.0).sqrt();
        let c0 = CMatrix::from_rows(&[vec![ZERO, off], vec![-off, ZERO]]);
        NchoProblem::new(mu, CMatrix::diag_real(&[beta, gamma]), b, c0).unwrap()
    }

    #[test]
    fn scalar_zeros_are_exact() {
        let solver = ConnectionSolver::new(&scalar_problem()).unwrap();
        assert!(solver.is_real());
        let s = 3f64.sqrt() / 2.0;
        for m in 0..6 {
            let exact = s * (2.0 * m as f64 + 0.5);
            let t = solver.evaluate(re(exact)).unwrap().value;
            let off = solver.evaluate(re(exact + 0.3)).unwrap().value;
            assert!(t.norm() < 1e-12 * off.norm(), "m = {m}: {t} vs {off}");
        }
    }

    #[test]
    fn scalar_refinement() {
        let s = 3f64.sqrt() / 2.0;
        let root = refine_eigenvalue(&scalar_problem(), 2.0).unwrap();
        assert!((root.lambda - s * 2.5).abs() < 1e-12, "{}", root.lambda);
        assert!(root.residual < 1e-10);
    }

    #[test]
    fn sign_changes_across_each_level() {
        let solver = ConnectionSolver::new(&scalar_problem()).unwrap();
        let s = 3f64.sqrt() / 2.0;
        for m in 0..4 {
            let level = s * (2.0 * m as f64 + 0.5);
            let a = solver.real_value(level - 0.1).unwrap();
            let b = solver.real_value(level + 0.1).unwrap();
            assert!(a * b < 0.0, "m = {m}");
        }
    }

    #[test]
    fn ncho_connection_matches_closed_form() {
        let problem = ncho(2.0, 2.0, 0.1, 1.5);
        let result = spectrum_connection(&problem, 5, 1e-10).unwrap();
        let s3 = 3f64.sqrt();
        let mut exact: Vec<f64> = (0..4)
            .flat_map(|m| {
                let base = s3 * (2.0 * m as f64 + 1.5);
                [base - 0.2 * s3, base + 0.2 * s3]
            })
            .collect();
        exact.sort_by(f64::total_cmp);
        for (v, e) in result.eigenvalues.iter().zip(&exact) {
            assert!((v - e).abs() < 1e-9, "{v} vs {e}");
        }
        assert!(result.estimates.iter().all(|&r| r < 1e-8), "{:?}", result.estimates);
    }

    #[test]
    fn degenerate_levels_use_secant() {
        let problem = ncho(2.0, 2.0, 0.0, 1.5);
        let result = spectrum_connection(&problem, 4, 1e-10).unwrap();
        let s3 = 3f64.sqrt();
        let exact = [1.5 * s3, 1.5 * s3, 3.5 * s3, 3.5 * s3];
        for (v, e) in result.eigenvalues.iter().zip(&exact) {
            assert!((v - e).abs() < 1e-6, "{v} vs {e}");
        }
        assert!(result.flags.iter().any(|f| f.contains("multiplicity 2")));
    }

    #[test]
    fn no_sign_change_is_a_refinement_error() {
        let solver = ConnectionSolver::new(&scalar_problem()).unwrap();
        let s = 3f64.sqrt() / 2.0;
        let midway = s * 1.5;
        assert!(matches!(
            solver.refine(midway, 0.1),
            Err(NchoError::Refinement(_))
        ));
    }

    #[test]
    fn larger_systems_are_unsupported() {
        let problem = NchoProblem::new(
            1.0,
            CMatrix::identity(3),
            CMatrix::zeros(3, 3),
            CMatrix::zeros(3, 3),
        )
        .unwrap();
        assert!(matches!(
            ConnectionSolver::new(&problem),
            Err(NchoError::Unsupported(_))
        ));
    }

    #[test]
    fn free_block_pencil_falls_back_to_raw_coordinates() {
        let problem = NchoProblem::new(
            1.0,
            CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]),
            CMatrix::zeros(2, 2),
            CMatrix::zeros(2, 2),
        )
        .unwrap();
        let solver = ConnectionSolver::new(&problem).unwrap();
        assert!(!solver.is_standardized());
        // Spectrum (2m+1)·{1, 2}.
        for lambda in [1.0, 2.0, 3.0, 6.0] {
            assert!(solver.evaluate(re(lambda)).unwrap().value.norm() < 1e-12);
        }
        assert!(solver.evaluate(re(1.5)).unwrap().value.norm() > 1e-3);
    }
}
