//! The first-order Fuchsian system f′ = Σ R_j/(z − α_j) f equivalent to the
//! disk equation at a fixed spectral parameter.

use serde::Serialize;

use crate::covariance::{mobius_apply, transform_problem, ExtComplex, Su11Element};
use crate::error::{NchoError, Result};
use crate::numerics::eigen::{eigen_hermitian, numerical_rank};
use crate::numerics::matrix::{complex_pair, complex_vec, CMatrix, C64, ZERO};
use crate::numerics::eigen_general_small;
use crate::pencil::{decompose_pencil, PencilDecomposition, NchoProblem};

const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct FuchsianSystem {
    pub mu: f64,
    #[serde(with = "complex_pair")]
    pub lambda: C64,
    #[serde(with = "complex_vec")]
    pub singular_points: Vec<C64>,
    /// R_j = P_j(−μ(α_jB + A/2) + C(λ)).
    pub residues: Vec<CMatrix>,
    pub residue_at_infinity: CMatrix,
    /// Pencil residues P_j at the same points.
    #[serde(skip)]
    pub pencil_residues: Vec<CMatrix>,
    /// dim Ker Q(α_j).
    #[serde(skip)]
    pub kernel_dims: Vec<usize>,
    /// C(λ).
    #[serde(skip)]
    pub c: CMatrix,
    #[serde(skip)]
    pub detb_zero: bool,
}

impl FuchsianSystem {
    pub fn p(&self) -> usize {
        self.c.rows()
    }

    /// Σ R_j/(z − α_j).
    pub fn coefficient_at(&self, z: C64) -> CMatrix {
        let mut out = CMatrix::zeros(self.p(), self.p());
        for (a, r) in self.singular_points.iter().zip(&self.residues) {
            out += &r.scale(C64::new(1.0, 0.0) / (z - a));
        }
        out
    }

    pub fn index_of(&self, z: C64, tol: f64) -> Option<usize> {
        self.singular_points
            .iter()
            .position(|a| (a - z).norm() <= tol * a.norm().max(1.0))
    }
}

pub fn build_fuchsian(problem: &NchoProblem, lambda: C64) -> Result<FuchsianSystem> {
    let dec = decompose_pencil(problem)?;
    Ok(build_fuchsian_from(problem, &dec, lambda))
}

/// Same as [`build_fuchsian`] for an existing decomposition.
pub fn build_fuchsian_from(
    problem: &NchoProblem,
    dec: &PencilDecomposition,
    lambda: C64,
) -> FuchsianSystem {
    let p = problem.p();
    let c = problem.c_at(lambda);
    let half_a = problem.a().scale_real(0.5);
    let residues: Vec<CMatrix> = dec
        .poles
        .iter()
        .zip(&dec.residues)
        .map(|(al, pj)| {
            let inner = &(&problem.b().scale(*al) + &half_a).scale_real(-problem.mu()) + &c;
            pj * &inner
        })
        .collect();
    let residue_at_infinity = -residues.iter().fold(CMatrix::zeros(p, p), |acc, r| &acc + r);
    FuchsianSystem {
        mu: problem.mu(),
        lambda,
        singular_points: dec.poles.clone(),
        residues,
        residue_at_infinity,
        pencil_residues: dec.residues.clone(),
        kernel_dims: dec.kernel_dims.clone(),
        c,
        detb_zero: dec.detb_zero,
    }
}

/// Local exponents at one singular point and the structural checks on them.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    #[serde(with = "complex_pair")]
    pub point: C64,
    /// Eigenvalues of R_j.
    #[serde(with = "complex_vec")]
    pub exponents: Vec<C64>,
    /// {eig(P_jC restricted to Im P_j) − μ/2} ∪ {0}^{p − rank P_j}.
    #[serde(with = "complex_vec")]
    pub predicted: Vec<C64>,
    pub rank: usize,
    pub kernel_dim: usize,
    pub rank_ok: bool,
    pub shift_residual: f64,
}

pub fn exponents_at(system: &FuchsianSystem, j: usize) -> Result<ExponentReport> {
    if j >= system.singular_points.len() {
        return Err(NchoError::Dimension(format!(
            "pole index {j} out of range ({} poles)",
            system.singular_points.len()
        )));
    }
    let r = &system.residues[j];
    let pj = &system.pencil_residues[j];
    let rank_p = numerical_rank(pj, RANK_TOL);
    let rank_r = numerical_rank(r, RANK_TOL);
    // R maps into its image, so in a basis adapted to Im R it is block upper
    // triangular with a zero block; deflating avoids the ill-conditioned
    // zero cluster of a nearly nilpotent R.
    let exponents = if rank_r < system.p() {
        let v = image_basis(r, rank_r)?;
        let mut values = eigen_general_small(&(&(&v.adjoint() * r) * &v))?;
        values.extend(std::iter::repeat_n(ZERO, system.p() - rank_r));
        values
    } else {
        eigen_general_small(r)?
    };
    let basis = image_basis(pj, rank_p)?;
    let restricted = &(&basis.adjoint() * &(pj * &system.c)) * &basis;
    let mut predicted: Vec<C64> = eigen_general_small(&restricted)?
        .into_iter()
        .map(|x| x - system.mu / 2.0)
        .collect();
    predicted.extend(std::iter::repeat_n(ZERO, system.p() - rank_p));
    let scale = r.max_abs().max(system.c.max_abs()).max(system.mu).max(1.0);
    let shift_residual = multiset_distance(&exponents, &predicted) / scale;
    Ok(ExponentReport {
        point: system.singular_points[j],
        exponents,
        predicted,
        rank: rank_r,
        kernel_dim: system.kernel_dims[j],
        rank_ok: rank_r <= system.kernel_dims[j],
        shift_residual,
    })
}

/// Orthonormal basis (columns) of the dominant rank-r image of m.
pub(crate) fn image_basis(m: &CMatrix, r: usize) -> Result<CMatrix> {
    let p = m.rows();
    let mmd = (m * &m.adjoint()).hermitian_part();
    let eig = eigen_hermitian(&mmd, true)?;
    let v = eig.vectors.expect("vectors requested");
    Ok(CMatrix::from_fn(p, r, |i, k| v[(i, p - 1 - k)]))
}

/// Greedy matching distance between two multisets of equal size.
pub fn multiset_distance(xs: &[C64], ys: &[C64]) -> f64 {
    if xs.len() != ys.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; ys.len()];
    let mut worst = 0.0f64;
    for x in xs {
        let (k, d) = ys
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Residuals of the structural statements about the system.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    /// ‖Σ R_j + R_∞‖.
    pub sum_rule: f64,
    /// ‖R_∞ − μI‖ or ‖R_∞ − (μI − P₀†(μA/2 + C))‖ by det B branch.
    pub infinity_formula: f64,
    /// Worst relative distance from 1/ᾱ to the nearest singular point.
    pub pairing: f64,
    pub rank_ok: bool,
    pub shift_residual: f64,
    pub exponents: Vec<ExponentReport>,
}

impl TheoremReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.sum_rule <= tol
            && self.infinity_formula <= tol
            && self.pairing <= tol
            && self.rank_ok
            && self.shift_residual <= tol
    }
}

pub fn verify_fuchs_theorem(system: &FuchsianSystem, problem: &NchoProblem) -> Result<TheoremReport> {
    let p = system.p();
    let id = CMatrix::identity(p);
    let sum = system
        .residues
        .iter()
        .fold(CMatrix::zeros(p, p), |acc, r| &acc + r);
    let scale = system
        .residues
        .iter()
        .map(|r| r.max_abs())
        .fold(1.0, f64::max);
    let sum_rule = (&sum + &system.residue_at_infinity).max_abs() / scale;

    let expected_inf = if system.detb_zero {
        let k = system
            .singular_points
            .iter()
            .position(|&a| a == ZERO)
            .ok_or_else(|| NchoError::Contract("det B = 0 but 0 is not a pole".into()))?;
        let p0d = system.pencil_residues[k].adjoint();
        let inner = &problem.a().scale_real(system.mu / 2.0) + &system.c;
        &id.scale_real(system.mu) - &(&p0d * &inner)
    } else {
        id.scale_real(system.mu)
    };
    let infinity_formula = (&system.residue_at_infinity - &expected_inf).max_abs() / scale;

    let mut pairing = 0.0f64;
    for &a in &system.singular_points {
        if a == ZERO {
            continue;
        }
        let target = C64::new(1.0, 0.0) / a.conj();
        let d = system
            .singular_points
            .iter()
            .map(|b| (b - target).norm() / target.norm().max(1.0))
            .fold(f64::INFINITY, f64::min);
        pairing = pairing.max(d);
    }

    let exponents: Vec<ExponentReport> = (0..system.singular_points.len())
        .map(|j| exponents_at(system, j))
        .collect::<Result<_>>()?;
    Ok(TheoremReport {
        sum_rule,
        infinity_formula,
        pairing,
        rank_ok: exponents.iter().all(|e| e.rank_ok),
        shift_residual: exponents
            .iter()
            .map(|e| e.shift_residual)
            .fold(0.0, f64::max),
        exponents,
    })
}

/// Moves the system by a disk automorphism: singular points map by g,
/// residues at surviving points are unchanged, a point sent to ∞ is folded
/// into R_∞, and g.∞ becomes singular with residue −(Σ R_j + μI).
pub fn transform_fuchsian(
    g: &Su11Element,
    system: &FuchsianSystem,
    problem: &NchoProblem,
) -> Result<FuchsianSystem> {
    let p = system.p();
    let moved = transform_problem(g, problem)?;
    let moved_dec = decompose_pencil(&moved)?;

    let mut points = Vec::new();
    let mut residues = Vec::new();
    for (a, r) in system.singular_points.iter().zip(&system.residues) {
        if let ExtComplex::Finite(img) = mobius_apply(g, (*a).into()) {
            points.push(img);
            residues.push(r.clone());
        }
    }
    if let ExtComplex::Finite(new_point) = mobius_apply(g, ExtComplex::Infinity) {
        let total = system
            .residues
            .iter()
            .fold(CMatrix::zeros(p, p), |acc, r| &acc + r);
        let fresh = -(&total + &CMatrix::identity(p).scale_real(system.mu));
        let scale = total.max_abs().max(system.mu).max(1.0);
        if fresh.max_abs() > 1e-10 * scale {
            points.push(new_point);
            residues.push(fresh);
        }
    }

    let mut pencil_residues = Vec::with_capacity(points.len());
    let mut kernel_dims = Vec::with_capacity(points.len());
    for z in &points {
        let k = moved_dec
            .poles
            .iter()
            .enumerate()
            .map(|(k, a)| (k, (a - z).norm() / a.norm().max(1.0)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .filter(|&(_, d)| d <= 1e-6)
            .map(|(k, _)| k)
            .ok_or_else(|| {
                NchoError::Contract(format!("transformed point {z} is not a pencil pole"))
            })?;
        pencil_residues.push(moved_dec.residues[k].clone());
        kernel_dims.push(moved_dec.kernel_dims[k]);
    }
    let residue_at_infinity = -residues.iter().fold(CMatrix::zeros(p, p), |acc, r| &acc + r);
    Ok(FuchsianSystem {
        mu: system.mu,
        lambda: system.lambda,
        singular_points: points,
        residues,
        residue_at_infinity,
        pencil_residues,
        kernel_dims,
        c: system.c.clone(),
        detb_zero: moved_dec.detb_zero,
    })
}
