//! Hermitian and small general eigenvalue problems.

use super::matrix::{CMatrix, C64, ONE, ZERO};
use super::poly::{poly_roots, DEFAULT_MERGE_TOL};
use crate::error::{NchoError, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Option<CMatrix>,
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn eigen_hermitian(m: &CMatrix, with_vectors: bool) -> Result<HermitianEigen> {
    m.require_square("eigen_hermitian")?;
    if !m.is_hermitian(HERMITIAN_TOL) {
        return Err(NchoError::Contract(format!(
            "matrix is not Hermitian (defect {:.3e})",
            m.hermitian_defect()
        )));
    }
    Ok(hermitian_decompose(&m.hermitian_part(), with_vectors))
}

pub(crate) fn hermitian_eigenvalues_unchecked(m: &CMatrix) -> Vec<f64> {
    hermitian_decompose(&m.hermitian_part(), false).values
}

fn hermitian_decompose(m: &CMatrix, with_vectors: bool) -> HermitianEigen {
    let n = m.rows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: with_vectors.then(|| CMatrix::zeros(0, 0)),
        };
    }
    if n == 1 {
        return HermitianEigen {
            values: vec![m[(0, 0)].re],
            vectors: with_vectors.then(|| CMatrix::identity(1)),
        };
    }
    let na = m.to_nalgebra();
    if !with_vectors {
        let mut values: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return HermitianEigen {
            values,
            vectors: None,
        };
    }
    let eig = nalgebra::SymmetricEigen::new(na);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen {
        values,
        vectors: Some(vectors),
    }
}

/// Characteristic polynomial coefficients of det(zI − M), ascending, by
/// Faddeev–LeVerrier. Exact on integer data.
pub fn characteristic_polynomial(m: &CMatrix) -> Result<Vec<C64>> {
    m.require_square("characteristic_polynomial")?;
    let n = m.rows();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut mk = CMatrix::zeros(n, n);
    for k in 1..=n {
        let mut shifted = mk.clone();
        for i in 0..n {
            shifted[(i, i)] += coeffs[n - k + 1];
        }
        mk = m * &shifted;
        coeffs[n - k] = -mk.trace() / k as f64;
    }
    Ok(coeffs)
}

/// Eigenvalues of a small square matrix, each repeated per multiplicity.
pub fn eigen_general_small(m: &CMatrix) -> Result<Vec<C64>> {
    m.require_square("eigen_general_small")?;
    let n = m.rows();
    if n > 8 {
        return Err(NchoError::Dimension(format!(
            "eigen_general_small: dimension {n} > 8"
        )));
    }
    match n {
        0 => return Ok(vec![]),
        1 => return Ok(vec![m[(0, 0)]]),
        2 => return Ok(eigen_2x2(m).to_vec()),
        _ => {}
    }
    let roots = poly_roots(&characteristic_polynomial(m)?, DEFAULT_MERGE_TOL)?;
    Ok(roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
        .collect())
}

/// Stable closed form for 2×2: the larger-modulus root by the quadratic
/// formula, the other from the determinant.
pub fn eigen_2x2(m: &CMatrix) -> [C64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let half = tr / 2.0;
    let disc = (half * half - det).sqrt();
    let big = if (half + disc).norm() >= (half - disc).norm() {
        half + disc
    } else {
        half - disc
    };
    if big == ZERO {
        return [ZERO, ZERO];
    }
    let small = det / big;
    [small, big]
}

/// Numerical rank from singular values above `rel_tol·max(1, σ_max)`.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return vec![];
    }
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Hermitian function of a positive definite matrix, V f(Λ) V†.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let eig = eigen_hermitian(m, true)?;
    let v = eig.vectors.expect("vectors requested");
    let n = m.rows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &l) in eig.values.iter().enumerate() {
        let fl = f(l);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * fl;
            }
        }
    }
    Ok(out.hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{c, re, I};

    #[test]
    fn diagonal_hermitian_sorted() {
        let e = eigen_hermitian(&CMatrix::diag_real(&[3.0, 1.0, 2.0]), false).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn sigma_two_type() {
        let m = CMatrix::from_rows(&[vec![ZERO, I], vec![-I, ZERO]]);
        let e = eigen_hermitian(&m, true).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let v = e.vectors.unwrap();
        for k in 0..2 {
            let col = v.column(k);
            let mv = m.mul_vec(&col);
            for i in 0..2 {
                assert!((mv[i] - col[i] * e.values[k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn real_symmetric_two_by_two() {
        let m = CMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = eigen_hermitian(&m, false).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_is_contract_violation() {
        let m = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(
            eigen_hermitian(&m, false),
            Err(NchoError::Contract(_))
        ));
    }

    #[test]
    fn general_small_examples() {
        let d = eigen_general_small(&CMatrix::diag(&[c(1.0, 2.0), re(-3.0)])).unwrap();
        assert!(d.contains(&c(1.0, 2.0)) && d.contains(&re(-3.0)));

        let nil = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(eigen_general_small(&nil).unwrap(), vec![ZERO, ZERO]);

        let rank1 = CMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let mut ev = eigen_general_small(&rank1).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(ev, vec![ZERO, re(2.0)]);
    }

    #[test]
    fn faddeev_leverrier_is_exact_on_integers() {
        let nil3 = CMatrix::from_real_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ]);
        assert_eq!(
            characteristic_polynomial(&nil3).unwrap(),
            vec![ZERO, ZERO, ZERO, ONE]
        );
        assert_eq!(eigen_general_small(&nil3).unwrap(), vec![ZERO; 3]);
    }

    #[test]
    fn rank_and_square_root() {
        let p = CMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(numerical_rank(&p, 1e-10), 1);
        let a = CMatrix::diag_real(&[4.0, 1.0]);
        let s = hermitian_function(&a, |x| 1.0 / x.sqrt()).unwrap();
        assert!(s.approx_eq(&CMatrix::diag_real(&[0.5, 1.0]), 1e-15));
    }
}
