use super::{integrate_envelope, Envelope, EnvelopeSpec};
use crate::error::{Error, Result};
use crate::linalg::{expm, solve_lyapunov, spectral_norm, Matrix};
use crate::scalar::Real;
use crate::sensitivity::LtvSystem;

/// `‖e^{A s}‖₂` on a grid of lags.
pub fn sample_expm_norm<T: Real>(a_inf: &Matrix<T>, grid: &[T]) -> Result<Vec<T>> {
    grid.iter().map(|&s| spectral_norm(&expm(&a_inf.scale(s))?)).collect()
}

/// `‖A(τ) − A(∞)‖₂` on a grid of times.
pub fn sample_deviation<T: Real>(sys: &LtvSystem<T>, grid: &[T]) -> Result<Vec<T>> {
    grid.iter().map(|&t| sys.deviation(t)).collect()
}

/// `β·e^{−cs}` from the Lyapunov solution of `Aᵀ H + H A = −I`.
pub fn lemma3_envelope<T: Real>(a_inf: &Matrix<T>) -> Result<EnvelopeSpec> {
    let lyap = solve_lyapunov(a_inf)?;
    EnvelopeSpec::exponential(lyap.beta.to_f64_lossy(), lyap.c.to_f64_lossy())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Looseness {
    /// `value(0)` over the largest sample.
    pub peak_ratio: f64,
    /// Envelope integral over the trapezoid integral of the samples.
    pub area_ratio: f64,
    /// Either ratio above the threshold.
    pub loose: bool,
}

/// Compares an envelope with the samples it is meant to bound.
pub fn looseness<T: Real>(env: &Envelope, samples: &[T], grid: &[T], threshold: f64) -> Result<Looseness> {
    if samples.len() != grid.len() || grid.len() < 2 {
        return Err(Error::Shape("samples and grid must match and hold ≥ 2 points".into()));
    }
    let max = samples.iter().fold(0.0f64, |m, v| m.max(v.to_f64_lossy()));
    let area: f64 = grid
        .windows(2)
        .zip(samples.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]).to_f64_lossy() * (y[0] + y[1]).to_f64_lossy())
        .sum();
    let span = (grid[grid.len() - 1] - grid[0]).to_f64_lossy();
    let env_area = integrate_envelope(env, span)?;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a > 0.0 { f64::INFINITY } else { 1.0 };
    let peak_ratio = ratio(env.value(0.0), max);
    let area_ratio = ratio(env_area, area);
    Ok(Looseness { peak_ratio, area_ratio, loose: peak_ratio > threshold || area_ratio > threshold })
}
