//! Scalar envelopes `C·e^{−ks}·(1 + S·sin(ωs + φ))` for `‖e^{A(∞)s}‖` and `‖A(τ) − A(∞)‖`,
//! their integrals and convolutions.

mod fit;
mod sampling;

pub use fit::{fit_envelope, FitOptions};
pub use sampling::{lemma3_envelope, looseness, sample_deviation, sample_expm_norm, Looseness};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    #[serde(rename = "C")]
    pub c: f64,
    pub k: f64,
    #[serde(rename = "S", default)]
    pub s: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phi: f64,
}

impl EnvelopeSpec {
    pub fn new(c: f64, k: f64, s: f64, omega: f64, phi: f64) -> Result<Self> {
        let spec = Self { c, k, s, omega, phi };
        spec.validate()?;
        Ok(spec)
    }

    /// Pure exponential `C·e^{−ks}`.
    pub fn exponential(c: f64, k: f64) -> Result<Self> {
        Self::new(c, k, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { c, k, s, omega, phi } = *self;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Parameter(format!("envelope C must be positive, got {c}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Parameter(format!("envelope k must be positive, got {k}")));
        }
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Parameter(format!("envelope S must lie in [0, 1), got {s}")));
        }
        if !(omega.is_finite() && omega >= 0.0 && phi.is_finite()) {
            return Err(Error::Parameter("envelope omega must be non-negative and phi finite".into()));
        }
        Ok(())
    }

    pub fn value<T: Real>(&self, s: T) -> T {
        let l = T::lit;
        l(self.c) * (-l(self.k) * s).exp() * (T::one() + l(self.s) * (l(self.omega) * s + l(self.phi)).sin())
    }
}

/// An envelope, or the identically zero function for time-invariant systems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Envelope {
    Decaying(EnvelopeSpec),
    Zero,
}

impl From<EnvelopeSpec> for Envelope {
    fn from(s: EnvelopeSpec) -> Self {
        Envelope::Decaying(s)
    }
}

impl Envelope {
    pub fn validate(&self) -> Result<()> {
        match self {
            Envelope::Decaying(s) => s.validate(),
            Envelope::Zero => Ok(()),
        }
    }

    pub fn spec(&self) -> Option<&EnvelopeSpec> {
        match self {
            Envelope::Decaying(s) => Some(s),
            Envelope::Zero => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Envelope::Zero)
    }

    pub fn value<T: Real>(&self, s: T) -> T {
        match self {
            Envelope::Decaying(spec) => spec.value(s),
            Envelope::Zero => T::zero(),
        }
    }

    /// The envelope as `Σ cᵢ·e^{αᵢ s}` with complex `cᵢ`, `αᵢ`.
    pub fn terms<T: Real>(&self) -> Vec<(Complex<T>, Complex<T>)> {
        let Some(&EnvelopeSpec { c, k, s, omega, phi }) = self.spec() else {
            return Vec::new();
        };
        let l = T::lit;
        let base = Complex::new(-l(k), T::zero());
        if s == 0.0 {
            return vec![(Complex::new(l(c), T::zero()), base)];
        }
        if omega == 0.0 {
            return vec![(Complex::new(l(c * (1.0 + s * phi.sin())), T::zero()), base)];
        }
        // sin(x) = (e^{ix} − e^{−ix}) / 2i
        let half = l(c * s / 2.0);
        let rot = Complex::new(T::zero(), l(phi)).exp();
        let up = rot * Complex::new(T::zero(), -half);
        let down = rot.conj() * Complex::new(T::zero(), half);
        vec![
            (Complex::new(l(c), T::zero()), base),
            (up, base + Complex::new(T::zero(), l(omega))),
            (down, base - Complex::new(T::zero(), l(omega))),
        ]
    }
}

/// `(e^z − 1) / z`, accurate near zero.
fn phi1<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(1e-4) {
        let c = |v: f64| Complex::new(T::lit(v), T::zero());
        c(1.0) + z * (c(0.5) + z * (c(1.0 / 6.0) + z * c(1.0 / 24.0)))
    } else {
        (z.exp() - T::one()) / z
    }
}

/// `∫₀ᵗ e^{αs} ds`
fn exp_integral<T: Real>(alpha: Complex<T>, t: T) -> Complex<T> {
    phi1(alpha * t) * t
}

/// `∫₀ᵗ env(s) ds` in closed form. Nonnegative and nondecreasing in `t`.
pub fn integrate_envelope<T: Real>(env: &Envelope, t: T) -> Result<T> {
    check_time(t)?;
    let acc: Complex<T> = env.terms().into_iter().map(|(c, a)| c * exp_integral(a, t)).sum();
    Ok(acc.re.max(T::zero()))
}

/// `∫₀ᵘ e^{α(t−s)}·e^{βs} ds`, arranged so no intermediate exponential overflows.
fn exp_convolution<T: Real>(alpha: Complex<T>, beta: Complex<T>, t: T, u: T) -> Complex<T> {
    let d = beta - alpha;
    if d.re <= T::zero() {
        (alpha * t).exp() * exp_integral(d, u)
    } else {
        (alpha * (t - u) + beta * u).exp() * phi1(-d * u) * u
    }
}

/// `∫₀ᵗ env_exp(t − s)·env_da(s) ds` in closed form.
pub fn integrate_envelope_product<T: Real>(env_exp: &Envelope, env_da: &Envelope, t: T) -> Result<T> {
    integrate_envelope_product_to(env_exp, env_da, t, t)
}

/// `∫₀ᵘ env_exp(t − s)·env_da(s) ds` for `0 ≤ u ≤ t`.
pub fn integrate_envelope_product_to<T: Real>(env_exp: &Envelope, env_da: &Envelope, t: T, upper: T) -> Result<T> {
    check_time(t)?;
    if !(upper >= T::zero() && upper <= t) {
        return Err(Error::Parameter(format!("upper limit {upper} outside [0, {t}]")));
    }
    let (a, b) = (env_exp.terms::<T>(), env_da.terms::<T>());
    let mut acc = Complex::new(T::zero(), T::zero());
    for &(ca, ra) in &a {
        for &(cb, rb) in &b {
            acc = acc + ca * cb * exp_convolution(ra, rb, t, upper);
        }
    }
    Ok(acc.re.max(T::zero()))
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero() && t.is_finite()) {
        return Err(Error::Parameter(format!("integration horizon must be a finite t ≥ 0, got {t}")));
    }
    Ok(())
}

// 5-point Gauss–Legendre on [0, 1]
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

/// `G(tⱼ) = ∫_{t₀}^{tⱼ} env(tⱼ − s)·f(s) ds` on an increasing grid starting at `t₀`.
///
/// Each exponential term of `env` is advanced cell by cell, so the cost is linear in
/// the grid length; `f` is integrated by 5-point Gauss–Legendre on each cell.
pub fn convolve_on_grid<T: Real>(env: &Envelope, f: impl Fn(T) -> T, grid: &[T]) -> Result<Vec<T>> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("convolution grid must strictly increase".into()));
    }
    let terms = env.terms::<T>();
    let mut state = vec![Complex::new(T::zero(), T::zero()); terms.len()];
    let mut out = Vec::with_capacity(grid.len());
    if grid.is_empty() {
        return Ok(out);
    }
    out.push(T::zero());
    let nodes: Vec<(T, T)> = GL_NODES.iter().zip(&GL_WEIGHTS).map(|(&x, &w)| (T::lit(x), T::lit(w))).collect();
    for w in grid.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let h = tb - ta;
        let fv: Vec<(T, T)> = nodes.iter().map(|&(x, wt)| (x, wt * f(ta + x * h))).collect();
        let mut total = T::zero();
        for ((c, alpha), g) in terms.iter().zip(state.iter_mut()) {
            let mut cell = Complex::new(T::zero(), T::zero());
            for &(x, wf) in &fv {
                cell = cell + (*alpha * ((T::one() - x) * h)).exp() * wf;
            }
            *g = *g * (*alpha * h).exp() + cell * h;
            total += (*c * *g).re;
        }
        out.push(total.max(T::zero()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(c: f64, k: f64, s: f64, w: f64, p: f64) -> Envelope {
        EnvelopeSpec::new(c, k, s, w, p).unwrap().into()
    }

    #[test]
    fn validation() {
        assert!(EnvelopeSpec::new(0.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(EnvelopeSpec::new(1.0, -1.0, 0.0, 0.0, 0.0).is_err());
        assert!(EnvelopeSpec::new(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(EnvelopeSpec::new(1.0, 1.0, 0.5, -2.0, 0.0).is_err());
    }

    #[test]
    fn terms_reproduce_value() {
        let e = env(2.0, 0.7, 0.6, 5.0, 0.4);
        for s in [0.0, 0.3, 1.7, 4.0] {
            let sum: Complex<f64> = e.terms().into_iter().map(|(c, a)| c * (a * s).exp()).sum();
            assert!((sum.re - e.value(s)).abs() < 1e-14 && sum.im.abs() < 1e-14);
        }
    }

    #[test]
    fn pure_exponential_integral() {
        let e = env(1.0, 2.0, 0.0, 0.0, 0.0);
        let v = integrate_envelope(&e, 1.0).unwrap();
        assert!((v - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-15);
        assert_eq!(integrate_envelope(&e, 0.0).unwrap(), 0.0);
        assert!(integrate_envelope(&e, -1.0).is_err());
    }

    #[test]
    fn product_of_unit_exponentials() {
        let e = env(1.0, 1.0, 0.0, 0.0, 0.0);
        let v = integrate_envelope_product(&e, &e, 1.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-14);
        assert_eq!(integrate_envelope_product(&e, &e, 0.0).unwrap(), 0.0);
        assert_eq!(integrate_envelope_product(&e, &Envelope::Zero, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn partial_product_and_extreme_rates() {
        let slow = env(1.0, 0.1, 0.0, 0.0, 0.0);
        let fast = env(1.0, 30.0, 0.0, 0.0, 0.0);
        // ∫₀ᵘ e^{−0.1(t−s)} e^{−30 s} ds
        let (t, u) = (50.0f64, 2.0f64);
        let want = (-0.1 * t).exp() * (1.0 - (-29.9 * u).exp()) / 29.9;
        let got = integrate_envelope_product_to(&slow, &fast, t, u).unwrap();
        assert!((got - want).abs() < 1e-15 * want.max(1.0));
        // reversed roles over a long horizon must not overflow
        let got: f64 = integrate_envelope_product(&fast, &slow, 2000.0).unwrap();
        assert!(got.is_finite() && got >= 0.0);
        assert!(integrate_envelope_product_to(&slow, &fast, 1.0, 2.0).is_err());
    }

    #[test]
    fn grid_convolution_of_exponentials() {
        let e = env(1.0, 1.0, 0.0, 0.0, 0.0);
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.02).collect();
        let g = convolve_on_grid(&e, |s| (-s).exp(), &grid).unwrap();
        for (t, v) in grid.iter().zip(&g) {
            assert!((v - t * (-t).exp()).abs() < 1e-12);
        }
    }
}
