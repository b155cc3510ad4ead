use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::sensitivity::ParametricModel;

/// Synchronous machine data in per unit. Defaults are the case-study values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Mechanical starting time, kWs/kVA.
    #[serde(rename = "M")]
    pub m: f64,
    /// Electrical frequency, Hz. The base speed is `2πf`.
    pub f: f64,
    pub xd_p: f64,
    pub xq_p: f64,
    pub xl: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub ed_p: f64,
    pub eq_p: f64,
    pub ra: f64,
    #[serde(rename = "Pm")]
    pub pm: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self { m: 13.0, f: 60.0, xd_p: 0.2, xq_p: 0.4, xl: 0.15, v: 1.0, ed_p: 0.1, eq_p: 0.9, ra: 0.0005, pm: 1.0, d: 100.0 }
    }
}

impl GeneratorParams {
    pub fn omega_b(&self) -> f64 {
        2.0 * PI * self.f
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("M", self.m), ("f", self.f), ("xd_p", self.xd_p), ("xq_p", self.xq_p), ("xl", self.xl), ("V", self.v), ("Pm", self.pm), ("D", self.d)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.ra.is_finite() && self.ra >= 0.0) {
            return Err(Error::Parameter(format!("ra must be non-negative, got {}", self.ra)));
        }
        if !(self.ed_p.is_finite() && self.eq_p.is_finite()) {
            return Err(Error::Parameter("transient potentials must be finite".into()));
        }
        if self.xd_p <= self.xl || self.xq_p <= self.xl {
            return Err(Error::Parameter("transient reactances must exceed the leakage reactance".into()));
        }
        Ok(())
    }
}

/// Stator currents, terminal voltages and air-gap power at one rotor angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatorSolution<T> {
    pub id: T,
    pub iq: T,
    pub vd: T,
    pub vq: T,
    pub pe: T,
    pub qe: T,
    pub pe_ddelta: T,
}

/// Solves the two stator equations
/// `0 = vq + ra·iq − e'q + (x'd − xl)·id` and `0 = vd + ra·id − e'd − (x'q − xl)·iq`
/// with `vd = V cos δ`, `vq = V sin δ`.
pub fn stator_solve<T: Real>(delta: T, p: &GeneratorParams) -> Result<StatorSolution<T>> {
    let a11 = p.xd_p - p.xl;
    let a22 = -(p.xq_p - p.xl);
    let det = a11 * a22 - p.ra * p.ra;
    let scale = a11.abs().max(a22.abs()).max(p.ra.abs());
    if !det.is_finite() || det.abs() <= 1e-12 * scale * scale {
        return Err(Error::Degenerate(format!("stator system singular (det = {det:e})")));
    }
    Ok(stator_unchecked(delta, p))
}

pub(crate) fn stator_unchecked<T: Real>(delta: T, p: &GeneratorParams) -> StatorSolution<T> {
    let l = T::lit;
    let (a11, a12, a21, a22) = (l(p.xd_p - p.xl), l(p.ra), l(p.ra), l(-(p.xq_p - p.xl)));
    let det = a11 * a22 - a12 * a21;
    let solve = |b1: T, b2: T| ((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det);

    let v = l(p.v);
    let ra = l(p.ra);
    let (s, c) = delta.sin_cos();
    let (vd, vq) = (v * c, v * s);
    let (id, iq) = solve(l(p.eq_p) - vq, l(p.ed_p) - vd);
    let (dvd, dvq) = (-v * s, v * c);
    let (did, diq) = solve(-dvq, -dvd);

    let pe = (vq + ra * iq) * iq + (vd + ra * id) * id;
    let qe = (vq + ra * iq) * id - (vd + ra * id) * iq;
    let pe_ddelta = (dvq + ra * diq) * iq + (vq + ra * iq) * diq + (dvd + ra * did) * id + (vd + ra * id) * did;
    StatorSolution { id, iq, vd, vq, pe, qe, pe_ddelta }
}

/// `dδ/dt = Ω_b(ω − 1)`, `dω/dt = (P_m − P_e(δ) − D(ω − 1)) / M`.
pub fn generator_rhs<T: Real>(x: &[T], pm: T, p: &GeneratorParams) -> [T; 2] {
    let slip = x[1] - T::one();
    let pe = stator_unchecked(x[0], p).pe;
    [T::lit(p.omega_b()) * slip, (pm - pe - T::lit(p.d) * slip) / T::lit(p.m)]
}

/// `∂f/∂x` and `∂f/∂P_m`.
pub fn generator_jacobians<T: Real>(x: &[T], p: &GeneratorParams) -> (Matrix<T>, [T; 2]) {
    let m = T::lit(p.m);
    let pe_d = stator_unchecked(x[0], p).pe_ddelta;
    let mut a = Matrix::zeros(2, 2);
    a[(0, 1)] = T::lit(p.omega_b());
    a[(1, 0)] = -pe_d / m;
    a[(1, 1)] = -T::lit(p.d) / m;
    (a, [T::zero(), T::one() / m])
}

/// Time profile added on top of the parameter `P_m`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PmProfile {
    #[default]
    Constant,
    /// `magnitude · sin(omega · t)`
    Sine { magnitude: f64, omega: f64 },
}

impl PmProfile {
    pub fn offset<T: Real>(&self, t: T) -> T {
        match *self {
            PmProfile::Constant => T::zero(),
            PmProfile::Sine { magnitude, omega } => T::lit(magnitude) * (T::lit(omega) * t).sin(),
        }
    }
}

/// Second-order generator with state `(δ, ω)` and parameter `λ = (P_m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorModel {
    params: GeneratorParams,
    profile: PmProfile,
}

impl GeneratorModel {
    pub fn new(params: GeneratorParams) -> Result<Self> {
        params.validate()?;
        stator_solve::<f64>(0.0, &params)?;
        Ok(Self { params, profile: PmProfile::Constant })
    }

    pub fn with_profile(mut self, profile: PmProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn params(&self) -> &GeneratorParams {
        &self.params
    }

    /// The nominal parameter vector `(P_m)`.
    pub fn lambda<T: Real>(&self) -> [T; 1] {
        [T::lit(self.params.pm)]
    }

    /// Stable equilibrium `(δ*, 1)` found by Newton's method on `P_e(δ) = P_m` from `guess`.
    pub fn equilibrium(&self, guess: f64) -> Result<[f64; 2]> {
        let mut d = guess;
        for _ in 0..100 {
            let s = stator_unchecked(d, &self.params);
            let r = s.pe - self.params.pm;
            if r.abs() < 1e-14 {
                return Ok([d, 1.0]);
            }
            if s.pe_ddelta.abs() < 1e-12 {
                break;
            }
            d -= r / s.pe_ddelta;
        }
        let s = stator_unchecked(d, &self.params);
        if (s.pe - self.params.pm).abs() < 1e-10 {
            return Ok([d, 1.0]);
        }
        Err(Error::NoSolution(format!("no equilibrium near δ = {guess}")))
    }
}

impl<T: Real> ParametricModel<T> for GeneratorModel {
    fn dimension(&self) -> usize {
        2
    }

    fn param_count(&self) -> usize {
        1
    }

    fn rhs(&self, t: T, x: &[T], lambda: &[T], dx: &mut [T]) {
        let pm = lambda[0] + self.profile.offset(t);
        dx.copy_from_slice(&generator_rhs(x, pm, &self.params));
    }

    fn jac_x(&self, _t: T, x: &[T], _lambda: &[T]) -> Option<Matrix<T>> {
        Some(generator_jacobians(x, &self.params).0)
    }

    fn jac_lambda(&self, _t: T, x: &[T], _lambda: &[T]) -> Option<Matrix<T>> {
        let b = generator_jacobians(x, &self.params).1;
        Some(Matrix::from_fn(2, 1, |i, _| b[i]))
    }
}
