mod common;

use common::*;
use gapbound::linalg::{eigenvalues, expm, is_hurwitz, lyapunov_residual, solve_lyapunov, spectral_norm, symmetric_eigenvalues};
use gapbound::powermodels::{generator_jacobians, GeneratorModel, GeneratorParams};
use gapbound::Matrix;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn spectral_norm_matches_svd() {
    let mut r = rng(11);
    for _ in 0..50 {
        let m = random_matrix(&mut r, 4, 4);
        let svd = to_na(&m).singular_values().max();
        let ours = spectral_norm(&m).unwrap();
        assert!((ours - svd).abs() <= 1e-10 * svd.max(1.0), "{ours} vs {svd}");
    }
    assert_eq!(spectral_norm(&Matrix::identity(3)).unwrap(), 1.0);
    assert!((spectral_norm(&Matrix::from_diag(&[3.0, -4.0])).unwrap() - 4.0).abs() < 1e-14);
    let mut bad = Matrix::identity(2);
    bad[(0, 1)] = f64::NAN;
    assert!(spectral_norm(&bad).is_err());
}

fn sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    v
}

#[test]
fn eigenvalues_match_schur_oracle() {
    let mut r = rng(12);
    for n in 1..=4 {
        for _ in 0..25 {
            let m = random_matrix(&mut r, n, n);
            let ours = sorted(eigenvalues(&m).unwrap().eigenvalues.iter().map(|z| (z.re, z.im)).collect());
            let oracle = sorted(to_na(&m).complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect());
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8, "{ours:?} vs {oracle:?}");
            }
        }
    }
}

#[test]
fn eigenvalue_examples() {
    let rot = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
    let s = sorted(eigenvalues(&rot).unwrap().eigenvalues.iter().map(|z| (z.re, z.im)).collect());
    assert!(s[0].0.abs() < 1e-14 && (s[0].1 + 1.0).abs() < 1e-14 && (s[1].1 - 1.0).abs() < 1e-14);
    let d = sorted(eigenvalues(&Matrix::from_diag(&[-1.0, -2.0])).unwrap().eigenvalues.iter().map(|z| (z.re, z.im)).collect());
    assert_eq!(d, vec![(-2.0, 0.0), (-1.0, 0.0)]);
    assert!(eigenvalues(&Matrix::zeros(2, 3)).is_err());
}

#[test]
fn generator_limit_matrix_is_a_stable_focus() {
    let m = GeneratorModel::new(GeneratorParams::default()).unwrap();
    let x = m.equilibrium(-1.5).unwrap();
    let (a, _) = generator_jacobians(&x, m.params());
    // roots of λ² − tr·λ + det
    let (tr, det) = (a.trace(), a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]);
    let disc = tr * tr - 4.0 * det;
    assert!(disc < 0.0);
    let (re, im) = (tr / 2.0, (-disc).sqrt() / 2.0);
    let spec = eigenvalues(&a).unwrap();
    for z in &spec.eigenvalues {
        assert!((z.re - re).abs() < 1e-8 && (z.im.abs() - im).abs() < 1e-8);
        assert!(z.re < 0.0 && z.im != 0.0);
    }
    assert!(is_hurwitz(&a, 0.0).unwrap());
}

#[test]
fn hurwitz_examples() {
    assert!(is_hurwitz(&Matrix::from_diag(&[-1.0, -2.0]), 0.0).unwrap());
    assert!(!is_hurwitz(&Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(), 0.0).unwrap());
    assert!(!is_hurwitz(&Matrix::from_diag(&[-1.0, -2.0]), 1.5).unwrap());
}

#[test]
fn expm_matches_pade_oracle() {
    let mut r = rng(13);
    for n in 1..=6 {
        for scale in [0.1, 1.0, 5.0] {
            let m = random_matrix(&mut r, n, n).scale(scale);
            let oracle = to_na(&m).exp();
            let err = max_abs_diff(&expm(&m).unwrap(), &oracle);
            assert!(err <= 1e-10 * oracle.abs().max().max(1.0), "n={n} scale={scale} err={err}");
        }
    }
    assert_eq!(expm(&Matrix::zeros(2, 2)).unwrap(), Matrix::identity(2));
    let t = std::f64::consts::FRAC_PI_2;
    let rot = expm(&Matrix::from_rows(&[[0.0, t], [-t, 0.0]]).unwrap()).unwrap();
    assert!(max_abs_diff(&rot, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])) < 1e-14);
    let d = expm(&Matrix::from_diag(&[-1.0, -2.0])).unwrap();
    assert!((d[(0, 0)] - (-1f64).exp()).abs() < 1e-15 && (d[(1, 1)] - (-2f64).exp()).abs() < 1e-15 && d[(0, 1)] == 0.0);
}

/// Solves `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(H) = −vec(I)`.
fn kronecker_lyapunov(a: &Matrix) -> DMatrix<f64> {
    let n = a.rows();
    let at = to_na(a).transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DMatrix::<f64>::identity(n, n).reshape_generic(nalgebra::Dyn(n * n), nalgebra::Const::<1>);
    let v = k.lu().solve(&rhs).unwrap();
    v.reshape_generic(nalgebra::Dyn(n), nalgebra::Dyn(n))
}

#[test]
fn lyapunov_matches_kronecker_oracle() {
    let a = Matrix::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]).unwrap();
    let l = solve_lyapunov(&a).unwrap();
    assert!(max_abs_diff(&l.h, &kronecker_lyapunov(&a)) < 1e-10);
    let mut r = rng(14);
    for n in 2..=5 {
        let a = random_hurwitz(&mut r, n);
        let l = solve_lyapunov(&a).unwrap();
        let oracle = kronecker_lyapunov(&a);
        assert!(max_abs_diff(&l.h, &oracle) <= 1e-10 * oracle.abs().max().max(1.0));
        assert!(lyapunov_residual(&a, &l.h) <= 1e-8);
    }
}

#[test]
fn lyapunov_examples() {
    let l = solve_lyapunov(&Matrix::identity(2).scale(-1.0)).unwrap();
    assert!(max_abs_diff(&l.h, &DMatrix::from_diagonal_element(2, 2, 0.5)) < 1e-14);
    assert!((l.beta - 1.0).abs() < 1e-12 && (l.c - 2.0).abs() < 1e-12);
    let l = solve_lyapunov(&Matrix::from_diag(&[-1.0, -2.0])).unwrap();
    assert!(max_abs_diff(&l.h, &DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25])) < 1e-14);
    assert!((l.beta - 2f64.sqrt()).abs() < 1e-12 && (l.c - 2.0).abs() < 1e-12);
    assert!(solve_lyapunov(&Matrix::from_diag(&[1.0, -1.0])).is_err());
}

#[test]
fn rate_one_over_lambda_max_is_too_fast() {
    let a = Matrix::identity(2).scale(-1.0);
    let l = solve_lyapunov(&a).unwrap();
    assert_eq!(l.certified_rate(), 1.0);
    // ‖e^{-t}I‖ = e^{-t} exceeds e^{-2t} for every t > 0
    let t = 1.0;
    assert!(spectral_norm(&expm(&a.scale(t)).unwrap()).unwrap() > l.bound(t));
    assert!((spectral_norm(&expm(&a.scale(t)).unwrap()).unwrap() - l.certified_bound(t)).abs() < 1e-15);
}

fn hurwitz_strategy() -> impl Strategy<Value = Matrix> {
    (2usize..=4, any::<u64>()).prop_map(|(n, seed)| random_hurwitz(&mut rng(seed), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lyapunov_decay_bound_holds(a in hurwitz_strategy()) {
        let l = solve_lyapunov(&a).unwrap();
        for i in 0..=50 {
            let t = 5.0 / l.c * i as f64 / 50.0;
            let lhs = spectral_norm(&expm(&a.scale(t)).unwrap()).unwrap();
            prop_assert!(lhs <= l.certified_bound(t) * (1.0 + 1e-8));
        }
        prop_assert!(symmetric_eigenvalues(&l.h).unwrap().iter().all(|e| *e > 0.0));
        prop_assert!(lyapunov_residual(&a, &l.h) <= 1e-8);
    }

    #[test]
    fn expm_semigroup(a in hurwitz_strategy(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let lhs = expm(&a.scale(s + t)).unwrap();
        let rhs = &expm(&a.scale(s)).unwrap() * &expm(&a.scale(t)).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-9 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn spectral_norm_submultiplicative(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let (a, b) = (random_matrix(&mut r, n, n), random_matrix(&mut r, n, n));
        let ab = spectral_norm(&(&a * &b)).unwrap();
        prop_assert!(ab <= spectral_norm(&a).unwrap() * spectral_norm(&b).unwrap() + 1e-12);
    }
}
