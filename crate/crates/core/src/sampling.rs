//! Seeded random instances for property checks.
//!
//! Every generated problem has a positive symbol on the unit circle and a
//! pencil with simple poles, so it is admissible for every pipeline.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::covariance::Su11Element;
use crate::error::Result;
use crate::numerics::eigen::hermitian_eigenvalues_unchecked;
use crate::numerics::rng::seeded;
use crate::numerics::{CMatrix, C64};
use crate::pencil::{decompose_pencil, positivity_margin, NchoProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    seeded(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> CMatrix {
    let data = (0..p * p).map(|_| random_complex(rng, scale)).collect();
    CMatrix::from_row_major(p, p, data).expect("p×p entries")
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> CMatrix {
    random_matrix(rng, p, scale).hermitian_part()
}

/// Haar-ish unitary by Gram–Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, p: usize) -> CMatrix {
    loop {
        let m = random_matrix(rng, p, 1.0);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(p);
        let mut ok = true;
        for j in 0..p {
            let mut v = m.column(j);
            for q in &cols {
                let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        if ok {
            return CMatrix::from_columns(&cols);
        }
    }
}

/// g with |b| ≤ max_b and random phases.
pub fn random_su11(rng: &mut ChaCha8Rng, max_b: f64) -> Result<Su11Element> {
    let b = C64::from_polar(rng.gen_range(0.0..max_b), rng.gen_range(0.0..std::f64::consts::TAU));
    let a = C64::from_polar((1.0 + b.norm_sqr()).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    Su11Element::new(a, b)
}

/// A admissible problem of size p with μ ∈ [0.3, 3).
///
/// A is Hermitian with least eigenvalue at least 1; ‖B‖ stays below
/// 0.45·λ_min(A), so the symbol is positive by a margin of λ_min(A)/10.
pub fn random_problem(rng: &mut ChaCha8Rng, p: usize) -> NchoProblem {
    loop {
        let x = random_matrix(rng, p, 1.0);
        let a = &(&x * &x.adjoint()) + &CMatrix::identity(p);
        let least = hermitian_eigenvalues_unchecked(&a)[0];
        let raw_b = random_matrix(rng, p, 1.0);
        let shrink = rng.gen_range(0.1..0.45) * least / raw_b.norm2().max(1e-12);
        let b = raw_b.scale_real(shrink);
        let c0 = random_hermitian(rng, p, 1.0);
        let mu = rng.gen_range(0.3..3.0);
        let Ok(problem) = NchoProblem::new(mu, a, b, c0) else {
            continue;
        };
        if positivity_margin(&problem, 256).margin > 0.0 && decompose_pencil(&problem).is_ok() {
            return problem;
        }
    }
}

/// The two-level family diag(β, γ), B = (1/2)[[0, i], [−i, 0]] with the
/// off-diagonal coupling iη√(βγ − 1) in C₀.
pub fn two_level_family(beta: f64, gamma: f64, eta: f64, mu: f64) -> Result<NchoProblem> {
    let zero = C64::new(0.0, 0.0);
    let b = CMatrix::from_rows(&[
        vec![zero, C64::new(0.0, 0.5)],
        vec![C64::new(0.0, -0.5), zero],
    ]);
    let off = C64::new(0.0, eta * (beta * gamma - 1.0).max(0.0).sqrt());
    let c0 = CMatrix::from_rows(&[vec![zero, off], vec![-off, zero]]);
    NchoProblem::new(mu, CMatrix::diag_real(&[beta, gamma]), b, c0)
}

/// p = 1, A = 1, B = 1/4, C₀ = 0, μ = 1/2; spectrum (√3/2)(2m + 1/2).
pub fn scalar_fixture() -> NchoProblem {
    NchoProblem::new(
        0.5,
        CMatrix::identity(1),
        CMatrix::from_real_rows(&[vec![0.25]]),
        CMatrix::zeros(1, 1),
    )
    .expect("fixture is admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_admissible() {
        for p in 1..=3 {
            let a = random_problem(&mut rng(7), p);
            let b = random_problem(&mut rng(7), p);
            assert_eq!(a, b);
            assert!(positivity_margin(&a, 256).margin > 0.0);
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(&mut rng(3), 3);
        assert!(u.is_unitary(1e-12));
    }
}
