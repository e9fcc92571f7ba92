use ncho::heun::RabiParameters;
use ncho::sampling::{scalar_fixture, two_level_family};
use ncho::spectral::confluence::rabi_truncated;
use ncho::spectral::profile::uniform_grid;
use ncho::spectral::{
    build_truncated, connection_determinant, eigenfunction_profile, refine_eigenvalue,
    spectrum_connection, spectrum_truncated, ConnectionSolver,
};
use ncho::{CMatrix, NchoError, NchoProblem, C64};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn free_oscillator_has_p_fold_levels() {
    let problem =
        NchoProblem::new(0.5, CMatrix::identity(2), CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
    let values = spectrum_truncated(&problem, 6, 1e-12).unwrap().eigenvalues;
    for (k, v) in values.iter().enumerate() {
        assert!(close(*v, 2.0 * (k / 2) as f64 + 0.5, 1e-12), "{k}: {v}");
    }
}

#[test]
fn decoupled_scaling() {
    let mu = 0.5;
    let problem = NchoProblem::new(
        mu,
        CMatrix::diag_real(&[1.0, 2.0]),
        CMatrix::zeros(2, 2),
        CMatrix::zeros(2, 2),
    )
    .unwrap();
    let mut expected: Vec<f64> = (0..6)
        .flat_map(|m| [2.0 * m as f64 + mu, 2.0 * (2.0 * m as f64 + mu)])
        .collect();
    expected.sort_by(f64::total_cmp);
    let values = spectrum_truncated(&problem, 6, 1e-12).unwrap().eigenvalues;
    for (v, e) in values.iter().zip(&expected) {
        assert!(close(*v, *e, 1e-12));
    }
}

#[test]
fn scalar_ground_state_at_order_200() {
    let t = build_truncated(&scalar_fixture(), 200).unwrap();
    let v = t.matrix.lowest_eigenvalues(1).unwrap()[0];
    assert!(close(v, 3f64.sqrt() / 4.0, 1e-8), "{v}");
}

#[test]
fn two_level_family_levels() {
    let s3 = 3f64.sqrt();
    for eta in [0.0, 0.1] {
        let problem = two_level_family(2.0, 2.0, eta, 0.5).unwrap();
        let values = spectrum_truncated(&problem, 6, 1e-11).unwrap().eigenvalues;
        let mut expected: Vec<f64> = (0..3)
            .flat_map(|m| {
                let base = s3 * (2.0 * m as f64 + 0.5);
                [base - 2.0 * eta * s3, base + 2.0 * eta * s3]
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (v, e) in values.iter().zip(&expected) {
            assert!(close(*v, *e, 1e-8), "η = {eta}: {v} vs {e}");
        }
    }
}

#[test]
fn uncoupled_rabi_levels() {
    let model = RabiParameters {
        omega: 1.0,
        g_coupling: 0.0,
        delta: 0.5,
        eps_bias: 0.0,
        lambda: 0.0,
    };
    let (a, b, c0) = model.matrices();
    let values = rabi_truncated(&a, &b, &c0, 16).unwrap().lowest_eigenvalues(6).unwrap();
    let expected = [-0.5, 0.5, 0.5, 1.5, 1.5, 2.5];
    for (v, e) in values.iter().zip(&expected) {
        assert!(close(*v, *e, 1e-12));
    }
}

#[test]
fn determinant_vanishes_at_scalar_levels() {
    let problem = scalar_fixture();
    let solver = ConnectionSolver::new(&problem).unwrap();
    let s3 = 3f64.sqrt();
    let mut signs = Vec::new();
    for m in 0..3 {
        let level = s3 * (m as f64 + 0.25);
        let t = solver.evaluate(C64::new(level, 0.0)).unwrap().value;
        assert!(t.norm() < 1e-6, "m = {m}: {t}");
        signs.push(solver.evaluate(C64::new(level + 0.5, 0.0)).unwrap().value.re.signum());
    }
    assert!(signs.windows(2).all(|w| w[0] != w[1]), "{signs:?}");
    let below = connection_determinant(&problem, C64::new(-1.0, 0.0)).unwrap();
    assert!(below.norm() > 1e-3, "{below}");
}

#[test]
fn refinement_examples() {
    let problem = scalar_fixture();
    let ground = 3f64.sqrt() / 4.0;
    let root = refine_eigenvalue(&problem, 0.43).unwrap();
    assert!(close(root.lambda, ground, 1e-9));

    let solver = ConnectionSolver::new(&problem).unwrap();
    let exact = solver.refine(ground, 0.1).unwrap();
    assert!(exact.iterations <= 1 || exact.residual < 1e-12);

    // Between levels 1 and 2 but closer to 2: the bracket closes on level 2.
    let s3 = 3f64.sqrt();
    let (l1, l2) = (s3 * 1.25, s3 * 2.25);
    let root = solver.refine(0.3 * l1 + 0.7 * l2, 0.6 * (l2 - l1)).unwrap();
    assert!(close(root.lambda, l2, 1e-9), "{}", root.lambda);
}

#[test]
fn connection_matches_truncation_on_two_level_family() {
    let problem = two_level_family(2.0, 2.0, 0.1, 1.5).unwrap();
    let trunc = spectrum_truncated(&problem, 5, 1e-11).unwrap();
    let conn = spectrum_connection(&problem, 5, 1e-11).unwrap();
    for (a, b) in trunc.eigenvalues.iter().zip(&conn.eigenvalues) {
        assert!(close(*a, *b, 1e-6));
    }
}

#[test]
fn free_ground_state_is_a_pure_exponential() {
    let problem =
        NchoProblem::new(1.5, CMatrix::identity(1), CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)).unwrap();
    let grid = uniform_grid(5.0, 11);
    let prof = eigenfunction_profile(&problem, 1.5, 32, &grid).unwrap();
    let scale = prof.values[0][0].0;
    for (t, v) in grid.iter().zip(&prof.values) {
        assert!(close(v[0].0, scale * (-t).exp(), 1e-12));
        assert!(v[0].1.abs() < 1e-12);
    }
}

#[test]
fn non_eigenvalue_profile_is_refused() {
    let err = eigenfunction_profile(&scalar_fixture(), 1.0, 64, &[0.0]).unwrap_err();
    match err {
        NchoError::NotAnEigenvalue { nearest, .. } => assert!(close(nearest, 3f64.sqrt() / 4.0, 1e-8)),
        other => panic!("unexpected {other}"),
    }
}
