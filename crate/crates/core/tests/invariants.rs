//! Property checks over seeded random instances.

use ncho::covariance::{
    gauge_problem, mobius_apply, standardize_p2, transform_problem, ExtComplex,
};
use ncho::fuchsian::{build_fuchsian, transform_fuchsian, verify_fuchs_theorem};
use ncho::numerics::eigen_hermitian;
use ncho::pencil::{decompose_pencil, positivity_margin, verify_pencil_lemma_seeded};
use ncho::sampling::{random_problem, random_su11, random_unitary, rng};
use ncho::spectral::{build_truncated, spectrum_connection, spectrum_truncated};
use ncho::{CMatrix, C64};
use proptest::prelude::*;
use rand::Rng;

fn lowest(problem: &ncho::NchoProblem, count: usize) -> Vec<f64> {
    spectrum_truncated(problem, count, 1e-11).unwrap().eigenvalues
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_fraction_identities_hold(seed in any::<u64>(), p in 1usize..=3) {
        let problem = random_problem(&mut rng(seed), p);
        let dec = decompose_pencil(&problem).unwrap();
        let report = verify_pencil_lemma_seeded(&dec, &problem, 1e-9, seed).unwrap();
        prop_assert!(report.all_passed, "{:?}", report.lines());
    }

    #[test]
    fn fuchsian_structure_holds(seed in any::<u64>(), p in 1usize..=3) {
        let mut r = rng(seed);
        let problem = random_problem(&mut r, p);
        let lambda = C64::new(r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0));
        let system = build_fuchsian(&problem, lambda).unwrap();
        let report = verify_fuchs_theorem(&system, &problem).unwrap();
        prop_assert!(report.passed(1e-8), "{report:?}");
    }

    #[test]
    fn margin_is_gauge_invariant(seed in any::<u64>(), p in 1usize..=3) {
        let mut r = rng(seed);
        let problem = random_problem(&mut r, p);
        let u = random_unitary(&mut r, p);
        let moved = gauge_problem(&u, &problem).unwrap();
        let (m0, m1) = (positivity_margin(&problem, 512), positivity_margin(&moved, 512));
        prop_assert!((m0.margin - m1.margin).abs() < 1e-10);
    }

    #[test]
    fn standardization_replays(seed in any::<u64>()) {
        let problem = random_problem(&mut rng(seed), 2);
        let st = standardize_p2(&problem).unwrap();
        let again = ncho::covariance::replay(&st.transcript, &problem).unwrap();
        prop_assert!(again.a().approx_eq(st.problem.a(), 1e-9));
        prop_assert!(again.b().approx_eq(st.problem.b(), 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn section_is_hermitian_and_variational(seed in any::<u64>(), p in 1usize..=3) {
        let problem = random_problem(&mut rng(seed), p);
        let small = build_truncated(&problem, 16).unwrap();
        let assembled = small.matrix.assemble();
        prop_assert!(assembled.hermitian_defect() <= 1e-12 * assembled.max_abs().max(1.0));
        // Principal sections: lowest eigenvalues cannot increase with the order.
        let mut previous: Option<Vec<f64>> = None;
        for order in [16, 32, 64, 128] {
            let values = build_truncated(&problem, order).unwrap().matrix.lowest_eigenvalues(5).unwrap();
            if let Some(prev) = &previous {
                for (a, b) in values.iter().zip(prev) {
                    prop_assert!(*a <= b + 1e-10 * b.abs().max(1.0), "{a} > {b}");
                }
            }
            previous = Some(values);
        }
    }

    #[test]
    fn lower_bound_is_consistent(seed in any::<u64>(), p in 1usize..=3) {
        let problem = random_problem(&mut rng(seed), p);
        let bare = ncho::NchoProblem::new(
            problem.mu(),
            problem.a().clone(),
            problem.b().clone(),
            CMatrix::zeros(p, p),
        ).unwrap();
        let c = lowest(&bare, 1)[0];
        let least_a = eigen_hermitian(problem.a(), false).unwrap().values[0];
        prop_assert!(least_a >= c / problem.mu() - 1e-9, "{least_a} < {}", c / problem.mu());
    }

    #[test]
    fn gauge_preserves_spectrum(seed in any::<u64>(), p in 1usize..=3) {
        let mut r = rng(seed);
        let problem = random_problem(&mut r, p);
        let u = random_unitary(&mut r, p);
        let moved = gauge_problem(&u, &problem).unwrap();
        for (a, b) in lowest(&problem, 5).iter().zip(&lowest(&moved, 5)) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn disk_automorphisms_preserve_spectrum(seed in any::<u64>(), p in 1usize..=2) {
        let mut r = rng(seed);
        let problem = random_problem(&mut r, p);
        let g = random_su11(&mut r, 0.5).unwrap();
        let moved = transform_problem(&g, &problem).unwrap();
        prop_assume!(positivity_margin(&moved, 256).margin > 0.0);
        for (a, b) in lowest(&problem, 5).iter().zip(&lowest(&moved, 5)) {
            prop_assert!((a - b).abs() < 1e-7 * a.abs().max(1.0), "{a} vs {b}");
        }
        // Singular points move by the Möbius rule.
        let lambda = C64::new(r.gen_range(-2.0..2.0), 0.0);
        let system = build_fuchsian(&problem, lambda).unwrap();
        let image = transform_fuchsian(&g, &system, &problem).unwrap();
        let direct = decompose_pencil(&moved).unwrap();
        let mapped: Vec<C64> = system
            .singular_points
            .iter()
            .filter_map(|&z| mobius_apply(&g, ExtComplex::Finite(z)).finite())
            .collect();
        for z in &mapped {
            for points in [&image.singular_points, &direct.poles] {
                let nearest = points.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(nearest < 1e-8 * z.norm().max(1.0), "{z} not among transformed points");
            }
        }
    }

    #[test]
    fn truncation_and_connection_agree(seed in any::<u64>(), p in 1usize..=2) {
        let problem = random_problem(&mut rng(seed), p);
        let trunc = spectrum_truncated(&problem, 5, 1e-11).unwrap();
        let conn = spectrum_connection(&problem, 5, 1e-11).unwrap();
        // Where matching is ill-conditioned the connection route must say so
        // and still bracket the truncation value within its own estimate.
        for ((a, b), est) in trunc.eigenvalues.iter().zip(&conn.eigenvalues).zip(&conn.estimates) {
            let diff = (a - b).abs();
            prop_assert!(diff < 1e-6 || (diff <= *est && !conn.flags.is_empty()), "{a} vs {b} (estimate {est:e})");
        }
        prop_assert!(conn.estimates.iter().all(|e| e.is_finite() && *e >= 0.0));
    }
}

/// Two close inner poles with large complex exponents: the connection route
/// loses digits at higher levels and has to report it.
#[test]
fn ill_conditioned_matching_is_reported() {
    let problem = random_problem(&mut rng(14464847825936174658), 2);
    let trunc = spectrum_truncated(&problem, 5, 1e-11).unwrap();
    let conn = spectrum_connection(&problem, 5, 1e-11).unwrap();
    assert!((trunc.eigenvalues[0] - conn.eigenvalues[0]).abs() < 1e-12);
    let diff = (trunc.eigenvalues[4] - conn.eigenvalues[4]).abs();
    assert!(diff <= conn.estimates[4], "{diff:e} vs {:e}", conn.estimates[4]);
    assert!(conn.flags.iter().any(|f| f.contains("ill-conditioned")));
}

/// A nearly nilpotent rank-one residue: exponents still match to 1e-8.
#[test]
fn nearly_nilpotent_residue_exponents() {
    let mut r = rng(16028581886591273235);
    let problem = random_problem(&mut r, 3);
    let lambda = C64::new(r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0));
    let system = build_fuchsian(&problem, lambda).unwrap();
    let report = verify_fuchs_theorem(&system, &problem).unwrap();
    assert!(report.passed(1e-8), "{report:?}");
}
