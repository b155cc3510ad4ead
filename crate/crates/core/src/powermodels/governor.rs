use serde::{Deserialize, Serialize};

use super::generator::{generator_rhs, stator_unchecked, GeneratorParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::sensitivity::ParametricModel;

/// Turbine-governor data. `t_order` is the load reference; 1.0 makes the governor's
/// steady output equal the second-order model's `P_m = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GovernorParams {
    pub omega_ref: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    #[serde(rename = "T_min")]
    pub t_min: f64,
    #[serde(rename = "Ts")]
    pub ts: f64,
    #[serde(rename = "Tc")]
    pub tc: f64,
    #[serde(rename = "T3")]
    pub t3: f64,
    #[serde(rename = "T4")]
    pub t4: f64,
    #[serde(rename = "T5")]
    pub t5: f64,
    #[serde(rename = "T_order")]
    pub t_order: f64,
}

impl Default for GovernorParams {
    fn default() -> Self {
        Self { omega_ref: 1.0, r: 0.02, t_max: 1.2, t_min: 0.3, ts: 0.1, tc: 0.45, t3: 0.0, t4: 12.0, t5: 50.0, t_order: 1.0 }
    }
}

impl GovernorParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_ref, self.r, self.t_max, self.t_min, self.ts, self.tc, self.t3, self.t4, self.t5, self.t_order];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("governor parameters must be finite".into()));
        }
        if !(self.t_min < self.t_max) {
            return Err(Error::Parameter("T_min must be below T_max".into()));
        }
        if !(self.r > 0.0 && self.ts > 0.0 && self.tc > 0.0 && self.t5 > 0.0) {
            return Err(Error::Parameter("R, Ts, Tc and T5 must be positive".into()));
        }
        if self.t3 < 0.0 || self.t4 < 0.0 {
            return Err(Error::Parameter("T3 and T4 must be non-negative".into()));
        }
        Ok(())
    }

    /// Droop setpoint clamped to `[T_min, T_max]`.
    pub fn t_in<T: Real>(&self, omega: T) -> T {
        let raw = T::lit(self.t_order) + (T::lit(self.omega_ref) - omega) / T::lit(self.r);
        raw.max(T::lit(self.t_min)).min(T::lit(self.t_max))
    }

    /// Mechanical power output for turbine states `(t_g1, t_g2, t_g3)`.
    pub fn pm<T: Real>(&self, tg: &[T]) -> T {
        let l = T::lit;
        tg[2] + l(self.t4 / self.t5) * (tg[1] + l(self.t3 / self.tc) * tg[0])
    }

    /// Turbine states at rest for a constant input `t_in`.
    pub fn steady_turbine(&self, t_in: f64) -> [f64; 3] {
        let tg1 = t_in;
        let tg2 = (1.0 - self.t3 / self.tc) * tg1;
        let tg3 = (1.0 - self.t4 / self.t5) * (tg2 + self.t3 / self.tc * tg1);
        [tg1, tg2, tg3]
    }
}

/// Second-order generator driven by the governor, state `(δ, ω, t_g1, t_g2, t_g3)`.
/// It has no free parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GovernorModel {
    gen: GeneratorParams,
    gov: GovernorParams,
}

impl GovernorModel {
    pub fn new(gen: GeneratorParams, gov: GovernorParams) -> Result<Self> {
        gen.validate()?;
        gov.validate()?;
        Ok(Self { gen, gov })
    }

    pub fn generator(&self) -> &GeneratorParams {
        &self.gen
    }

    pub fn governor(&self) -> &GovernorParams {
        &self.gov
    }

    /// Extends a generator state with turbine states at rest for `ω = ω_ref`.
    pub fn initial_state(&self, x: [f64; 2]) -> [f64; 5] {
        let tg = self.gov.steady_turbine(self.gov.t_in(self.gov.omega_ref));
        [x[0], x[1], tg[0], tg[1], tg[2]]
    }

    /// Mechanical power along a 5-state trajectory sample.
    pub fn pm<T: Real>(&self, x: &[T]) -> T {
        self.gov.pm(&x[2..5])
    }
}

pub fn governor_rhs<T: Real>(x: &[T], gov: &GovernorParams, gen: &GeneratorParams, dx: &mut [T]) {
    let l = T::lit;
    let t_in = gov.t_in(x[1]);
    let (tg1, tg2, tg3) = (x[2], x[3], x[4]);
    let pm = gov.pm(&x[2..5]);
    let g = generator_rhs(&x[..2], pm, gen);
    dx[0] = g[0];
    dx[1] = g[1];
    dx[2] = (t_in - tg1) / l(gov.ts);
    dx[3] = (l(1.0 - gov.t3 / gov.tc) * tg1 - tg2) / l(gov.tc);
    dx[4] = (l(1.0 - gov.t4 / gov.t5) * (tg2 + l(gov.t3 / gov.tc) * tg1) - tg3) / l(gov.t5);
}

impl<T: Real> ParametricModel<T> for GovernorModel {
    fn dimension(&self) -> usize {
        5
    }

    fn param_count(&self) -> usize {
        0
    }

    fn rhs(&self, _t: T, x: &[T], _lambda: &[T], dx: &mut [T]) {
        governor_rhs(x, &self.gov, &self.gen, dx);
    }

    fn jac_x(&self, _t: T, x: &[T], _lambda: &[T]) -> Option<Matrix<T>> {
        let l = T::lit;
        let (gen, gov) = (&self.gen, &self.gov);
        let m = l(gen.m);
        let mut a = Matrix::zeros(5, 5);
        a[(0, 1)] = l(gen.omega_b());
        a[(1, 0)] = -stator_unchecked(x[0], gen).pe_ddelta / m;
        a[(1, 1)] = -l(gen.d) / m;
        a[(1, 2)] = l(gov.t4 / gov.t5 * gov.t3 / gov.tc) / m;
        a[(1, 3)] = l(gov.t4 / gov.t5) / m;
        a[(1, 4)] = T::one() / m;
        let raw = l(gov.t_order) + (l(gov.omega_ref) - x[1]) / l(gov.r);
        // derivative of the clamp taken as zero on the saturated side
        if raw > l(gov.t_min) && raw < l(gov.t_max) {
            a[(2, 1)] = -T::one() / l(gov.r * gov.ts);
        }
        a[(2, 2)] = -T::one() / l(gov.ts);
        a[(3, 2)] = l((1.0 - gov.t3 / gov.tc) / gov.tc);
        a[(3, 3)] = -T::one() / l(gov.tc);
        a[(4, 2)] = l((1.0 - gov.t4 / gov.t5) * gov.t3 / gov.tc / gov.t5);
        a[(4, 3)] = l((1.0 - gov.t4 / gov.t5) / gov.t5);
        a[(4, 4)] = -T::one() / l(gov.t5);
        Some(a)
    }
}
