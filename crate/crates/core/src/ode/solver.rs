use serde::{Deserialize, Serialize};

use super::{OdeSystem, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dormand–Prince 5(4) with step-size control.
    #[default]
    Adaptive,
    /// Classical RK4 with a uniform step no larger than `max_step`.
    FixedRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-8, max_step: 0.01, method: Method::Adaptive, max_steps: 5_000_000 }
    }
}

impl IntegratorConfig {
    pub fn fixed(step: f64) -> Self {
        Self { max_step: step, method: Method::FixedRk4, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.max_step) && ok(self.abs_tol) && self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(Error::Parameter(format!("invalid integrator settings {self:?}")));
        }
        Ok(())
    }
}

/// Integrates `sys` from `x0` at `t0` to `t_end`. The last step lands on `t_end` exactly.
pub fn integrate<T: Real, S: OdeSystem<T>>(
    sys: &S,
    x0: &[T],
    t0: T,
    t_end: T,
    params: &[T],
    ctrl: &IntegratorConfig,
) -> Result<Trajectory<T>> {
    ctrl.validate()?;
    if x0.len() != sys.dimension() {
        return Err(Error::Shape(format!("x0 has {} entries, system has {}", x0.len(), sys.dimension())));
    }
    if !(t_end > t0) {
        return Err(Error::Parameter(format!("t_end {t_end} must exceed t0 {t0}")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite initial state".into()));
    }
    match ctrl.method {
        Method::Adaptive => dopri5(sys, x0, t0, t_end, params, ctrl),
        Method::FixedRk4 => rk4(sys, x0, t0, t_end, params, ctrl),
    }
}

fn eval<T: Real, S: OdeSystem<T>>(sys: &S, t: T, x: &[T], p: &[T], dx: &mut [T]) -> Result<()> {
    sys.rhs(t, x, p, dx);
    if dx.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite right-hand side at t = {t}")));
    }
    Ok(())
}

fn rk4<T: Real, S: OdeSystem<T>>(
    sys: &S,
    x0: &[T],
    t0: T,
    t_end: T,
    p: &[T],
    ctrl: &IntegratorConfig,
) -> Result<Trajectory<T>> {
    let n = x0.len();
    let span = (t_end - t0).to_f64_lossy();
    let steps = (span / ctrl.max_step - 1e-9).ceil().max(1.0) as usize;
    if steps > ctrl.max_steps {
        return Err(Error::Parameter(format!("{steps} fixed steps exceed max_steps")));
    }
    let h = (t_end - t0) / T::from_usize_lossy(steps);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);

    let mut traj = Trajectory::with_capacity(n, steps + 1);
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut tmp = vec![T::zero(); n];
    eval(sys, t0, &x, p, &mut k1)?;
    traj.push(t0, &x, &k1);
    for i in 0..steps {
        // recompute t from the index so the grid does not drift
        let t = t0 + h * T::from_usize_lossy(i);
        for j in 0..n {
            tmp[j] = x[j] + half * h * k1[j];
        }
        eval(sys, t + half * h, &tmp, p, &mut k2)?;
        for j in 0..n {
            tmp[j] = x[j] + half * h * k2[j];
        }
        eval(sys, t + half * h, &tmp, p, &mut k3)?;
        for j in 0..n {
            tmp[j] = x[j] + h * k3[j];
        }
        eval(sys, t + h, &tmp, p, &mut k4)?;
        for j in 0..n {
            x[j] += h * sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
        }
        let t_next = if i + 1 == steps { t_end } else { t0 + h * T::from_usize_lossy(i + 1) };
        eval(sys, t_next, &x, p, &mut k1)?;
        traj.push(t_next, &x, &k1);
    }
    Ok(traj)
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th minus embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri5<T: Real, S: OdeSystem<T>>(
    sys: &S,
    x0: &[T],
    t0: T,
    t_end: T,
    p: &[T],
    ctrl: &IntegratorConfig,
) -> Result<Trajectory<T>> {
    let n = x0.len();
    let atol = T::lit(ctrl.abs_tol);
    let rtol = T::lit(ctrl.rel_tol);
    let hmax = T::lit(ctrl.max_step).min(t_end - t0);
    let a: Vec<Vec<T>> = A.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
    let c: Vec<T> = C.iter().map(|&v| T::lit(v)).collect();
    let e: Vec<T> = E.iter().map(|&v| T::lit(v)).collect();

    let mut traj = Trajectory::with_capacity(n, 1024);
    let mut k = vec![vec![T::zero(); n]; 7];
    let mut x = x0.to_vec();
    let mut xn = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let mut t = t0;
    eval(sys, t, &x, p, &mut k[0])?;
    traj.push(t, &x, &k[0]);

    let err_norm = |x: &[T], xn: &[T], k: &[Vec<T>], h: T| -> T {
        let mut acc = T::zero();
        for j in 0..n {
            let mut d = T::zero();
            for (s, ks) in k.iter().enumerate() {
                d += e[s] * ks[j];
            }
            let sc = atol + rtol * x[j].abs().max(xn[j].abs());
            let r = h * d / sc;
            acc += r * r;
        }
        (acc / T::from_usize_lossy(n)).sqrt()
    };

    let mut h = initial_step(sys, &x, &k[0], t, p, atol, rtol, hmax)?;
    let eps = T::epsilon();
    let safety = T::lit(0.9);
    let (fac_min, fac_max) = (T::lit(0.2), T::lit(5.0));
    let mut steps = 0usize;
    let mut rejected_last = false;

    while t < t_end {
        steps += 1;
        if steps > ctrl.max_steps {
            return Err(Error::Integration { t: t.to_f64_lossy(), reason: "step budget exhausted".into() });
        }
        if h < T::lit(16.0) * eps * t.abs().max(T::one()) {
            return Err(Error::Integration { t: t.to_f64_lossy(), reason: "step size underflow".into() });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let mut stage_ok = true;
        for s in 1..7 {
            for j in 0..n {
                let mut acc = x[j];
                for r in 0..s {
                    acc += h * a[s][r] * k[r][j];
                }
                tmp[j] = acc;
            }
            sys.rhs(t + c[s] * h, &tmp, p, &mut k[s]);
            if k[s].iter().any(|v| !v.is_finite()) {
                stage_ok = false;
                break;
            }
        }
        // stage 7 evaluates at the 5th-order solution
        if stage_ok {
            xn.copy_from_slice(&tmp);
        }
        let err = if stage_ok { err_norm(&x, &xn, &k, h) } else { T::infinity() };

        if err <= T::one() {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut x, &mut xn);
            k.swap(0, 6);
            traj.push(t, &x, &k[0]);
            let fac = if err == T::zero() { fac_max } else { (safety * err.powf(T::lit(-0.2))).min(fac_max) };
            let fac = if rejected_last { fac.min(T::one()) } else { fac };
            h = (h * fac).min(hmax);
            rejected_last = false;
        } else {
            let fac = if err.is_finite() { (safety * err.powf(T::lit(-0.2))).max(fac_min) } else { fac_min };
            h *= fac;
            rejected_last = true;
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn initial_step<T: Real, S: OdeSystem<T>>(
    sys: &S,
    x: &[T],
    f0: &[T],
    t: T,
    p: &[T],
    atol: T,
    rtol: T,
    hmax: T,
) -> Result<T> {
    let n = x.len();
    let nf = T::from_usize_lossy(n);
    let sc: Vec<T> = x.iter().map(|v| atol + rtol * v.abs()).collect();
    let rms = |v: &[T]| (v.iter().zip(&sc).map(|(a, s)| (*a / *s).powi(2)).sum::<T>() / nf).sqrt();
    let d0 = rms(x);
    let d1 = rms(f0);
    let small = T::lit(1e-5);
    let h0 = if d0 < small || d1 < small { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let h0 = h0.min(hmax);
    let x1: Vec<T> = x.iter().zip(f0).map(|(a, f)| *a + h0 * *f).collect();
    let mut f1 = vec![T::zero(); n];
    eval(sys, t + h0, &x1, p, &mut f1)?;
    let diff: Vec<T> = f1.iter().zip(f0).map(|(a, b)| *a - *b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h0).min(h1).min(hmax))
}

struct Linear<FA, FU> {
    dim: usize,
    a_of_t: FA,
    u_of_t: FU,
}

impl<T: Real, FA, FU> OdeSystem<T> for Linear<FA, FU>
where
    FA: Fn(T) -> Matrix<T>,
    FU: Fn(T) -> Vec<T>,
{
    fn dimension(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: T, z: &[T], _p: &[T], dz: &mut [T]) {
        let a = (self.a_of_t)(t);
        let u = (self.u_of_t)(t);
        a.mul_vec_into(z, dz);
        for (d, v) in dz.iter_mut().zip(&u) {
            *d += *v;
        }
    }
}

/// Integrates `dz/dt = A(t) z + u(t)` from `z0`.
pub fn integrate_linear<T, FA, FU>(
    a_of_t: FA,
    u_of_t: FU,
    z0: &[T],
    t0: T,
    t_end: T,
    ctrl: &IntegratorConfig,
) -> Result<Trajectory<T>>
where
    T: Real,
    FA: Fn(T) -> Matrix<T>,
    FU: Fn(T) -> Vec<T>,
{
    let n = z0.len();
    let a0 = a_of_t(t0);
    a0.ensure_square("A(t)")?;
    if a0.rows() != n {
        return Err(Error::Shape(format!("A(t) is {}x{}, state has {n} entries", a0.rows(), a0.cols())));
    }
    let u0 = u_of_t(t0);
    if u0.len() != n {
        return Err(Error::Shape(format!("u(t) has {} entries, state has {n}", u0.len())));
    }
    let sys = Linear { dim: n, a_of_t, u_of_t };
    integrate(&sys, z0, t0, t_end, &[], ctrl)
}

/// Integrates `dz/dt = A(t) z + u(t)` from the zero state.
pub fn integrate_ltv<T, FA, FU>(
    a_of_t: FA,
    u_of_t: FU,
    t0: T,
    t_end: T,
    ctrl: &IntegratorConfig,
) -> Result<Trajectory<T>>
where
    T: Real,
    FA: Fn(T) -> Matrix<T>,
    FU: Fn(T) -> Vec<T>,
{
    let n = a_of_t(t0).rows();
    integrate_linear(a_of_t, u_of_t, &vec![T::zero(); n], t0, t_end, ctrl)
}
