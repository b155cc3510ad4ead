#![allow(dead_code)]

use std::sync::Arc;

use gapbound::ode::IntegratorConfig;
use gapbound::powermodels::{GeneratorModel, GeneratorParams, CASE_X0};
use gapbound::sensitivity::{build_param_sensitivity, simulate, SteadyCheck};
use gapbound::{LtvSystem, Matrix, Trajectory};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Matrix {
    Matrix::from_fn(n, m, |_, _| rng.gen_range(-2.0..2.0))
}

/// Shifting by the Frobenius norm moves every eigenvalue into the open left half-plane.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = random_matrix(rng, n, n);
    let shift = m.norm_frobenius() + rng.gen_range(0.05..1.0);
    &m - &Matrix::identity(n).scale(shift)
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn max_abs_diff(a: &Matrix, b: &DMatrix<f64>) -> f64 {
    (to_na(a) - b).abs().max()
}

pub fn tight() -> IntegratorConfig {
    IntegratorConfig { abs_tol: 1e-12, rel_tol: 1e-11, ..IntegratorConfig::default() }
}

pub fn generator() -> Arc<GeneratorModel> {
    Arc::new(GeneratorModel::new(GeneratorParams::default()).unwrap())
}

/// Nominal case-study run over `[0, t_end]` and its `P_m` sensitivity system.
pub fn generator_case(t_end: f64, ctrl: &IntegratorConfig) -> (Arc<GeneratorModel>, Arc<Trajectory>, LtvSystem) {
    let m = generator();
    let nom = Arc::new(simulate(&*m, &CASE_X0, 0.0, t_end, &[1.0], ctrl).unwrap());
    let sys = build_param_sensitivity(m.clone(), nom.clone(), &[1.0], &[1.0], &SteadyCheck::default()).unwrap();
    (m, nom, sys)
}

pub fn grid(t_end: f64, step: f64) -> Vec<f64> {
    gapbound::bounds::uniform_grid(0.0, t_end, step).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}
