//! Trajectory sensitivities of `dx/dt = f(t, x, λ)` as linear time-varying systems.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, spectral_norm, Matrix};
use crate::ode::{integrate, integrate_linear, IntegratorConfig, OdeSystem, Trajectory};
use crate::scalar::Real;

/// A vector field with parameters and optionally analytic Jacobians.
pub trait ParametricModel<T: Real>: Send + Sync {
    fn dimension(&self) -> usize;
    fn param_count(&self) -> usize;
    fn rhs(&self, t: T, x: &[T], lambda: &[T], dx: &mut [T]);

    /// `∂f/∂x`, `dimension × dimension`.
    fn jac_x(&self, _t: T, _x: &[T], _lambda: &[T]) -> Option<Matrix<T>> {
        None
    }

    /// `∂f/∂λ`, `dimension × param_count`.
    fn jac_lambda(&self, _t: T, _x: &[T], _lambda: &[T]) -> Option<Matrix<T>> {
        None
    }
}

impl<T: Real, M: ParametricModel<T> + ?Sized> ParametricModel<T> for Arc<M> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn param_count(&self) -> usize {
        (**self).param_count()
    }
    fn rhs(&self, t: T, x: &[T], lambda: &[T], dx: &mut [T]) {
        (**self).rhs(t, x, lambda, dx)
    }
    fn jac_x(&self, t: T, x: &[T], lambda: &[T]) -> Option<Matrix<T>> {
        (**self).jac_x(t, x, lambda)
    }
    fn jac_lambda(&self, t: T, x: &[T], lambda: &[T]) -> Option<Matrix<T>> {
        (**self).jac_lambda(t, x, lambda)
    }
}

/// Views a model as an ODE whose parameters are passed at integration time.
pub struct AsOde<'a, M: ?Sized>(pub &'a M);

impl<T: Real, M: ParametricModel<T> + ?Sized> OdeSystem<T> for AsOde<'_, M> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }
    fn rhs(&self, t: T, x: &[T], params: &[T], dx: &mut [T]) {
        self.0.rhs(t, x, params, dx)
    }
}

/// Integrates a model from `x0`.
pub fn simulate<T: Real, M: ParametricModel<T> + ?Sized>(
    model: &M,
    x0: &[T],
    t0: T,
    t_end: T,
    lambda: &[T],
    ctrl: &IntegratorConfig,
) -> Result<Trajectory<T>> {
    check_lambda(model, lambda)?;
    integrate(&AsOde(model), x0, t0, t_end, lambda, ctrl)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wrt {
    State,
    Param,
}

/// Central-difference Jacobian with step `max(1e-6, 1e-6·|v|)` per component.
pub fn jacobian_fd<T: Real, M: ParametricModel<T> + ?Sized>(
    model: &M,
    t: T,
    x: &[T],
    lambda: &[T],
    which: Wrt,
) -> Result<Matrix<T>> {
    let n = model.dimension();
    let cols = match which {
        Wrt::State => n,
        Wrt::Param => model.param_count(),
    };
    if cols == 0 {
        return Ok(Matrix::zeros(n, 1));
    }
    let mut xp = x.to_vec();
    let mut lp = lambda.to_vec();
    let mut fp = vec![T::zero(); n];
    let mut fm = vec![T::zero(); n];
    let mut jac = Matrix::zeros(n, cols);
    let base = T::lit(1e-6);
    for j in 0..cols {
        let v = match which {
            Wrt::State => x[j],
            Wrt::Param => lambda[j],
        };
        let h = base.max(base * v.abs());
        let set = |val: T, xp: &mut [T], lp: &mut [T]| match which {
            Wrt::State => xp[j] = val,
            Wrt::Param => lp[j] = val,
        };
        set(v + h, &mut xp, &mut lp);
        model.rhs(t, &xp, &lp, &mut fp);
        set(v - h, &mut xp, &mut lp);
        model.rhs(t, &xp, &lp, &mut fm);
        set(v, &mut xp, &mut lp);
        if fp.iter().chain(&fm).any(|f| !f.is_finite()) {
            return Err(Error::Domain(format!("non-finite rhs while probing component {j}")));
        }
        let two_h = (v + h) - (v - h);
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / two_h;
        }
    }
    Ok(jac)
}

/// Analytic `∂f/∂x` when the model provides it, central differences otherwise.
pub fn state_jacobian<T: Real, M: ParametricModel<T> + ?Sized>(model: &M, t: T, x: &[T], lambda: &[T]) -> Result<Matrix<T>> {
    match model.jac_x(t, x, lambda) {
        Some(j) => Ok(j),
        None => jacobian_fd(model, t, x, lambda, Wrt::State),
    }
}

pub fn param_jacobian<T: Real, M: ParametricModel<T> + ?Sized>(model: &M, t: T, x: &[T], lambda: &[T]) -> Result<Matrix<T>> {
    match model.jac_lambda(t, x, lambda) {
        Some(j) => Ok(j),
        None => jacobian_fd(model, t, x, lambda, Wrt::Param),
    }
}

pub type MatrixFn<T> = Arc<dyn Fn(T) -> Matrix<T> + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// Checks applied when an LTV system is assembled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyCheck {
    /// Tolerance on `‖A(t_end) − A(t_end − window)‖` and `‖A(t_end) − A(∞)‖`.
    pub steady_tol: f64,
    pub window: f64,
    /// Required distance of the spectrum of `A(∞)` from the imaginary axis.
    pub hurwitz_margin: f64,
}

impl Default for SteadyCheck {
    fn default() -> Self {
        Self { steady_tol: 1e-4, window: 1.0, hurwitz_margin: 0.0 }
    }
}

/// `dz/dt = A(t) z + u(t)`, `z(t0) = 0`, with a Hurwitz limit matrix `A(∞)`.
#[derive(Clone)]
pub struct LtvSystem<T> {
    dim: usize,
    a_of_t: MatrixFn<T>,
    u_of_t: VectorFn<T>,
    a_inf: Matrix<T>,
    span: (T, T),
    input_magnitude: Option<T>,
}

impl<T: Real> fmt::Debug for LtvSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LtvSystem")
            .field("dim", &self.dim)
            .field("a_inf", &self.a_inf)
            .field("span", &self.span)
            .field("input_magnitude", &self.input_magnitude)
            .finish_non_exhaustive()
    }
}

impl<T: Real> LtvSystem<T> {
    /// Validates shapes, the Hurwitz property of `a_inf` and convergence of `A(t)` to it.
    pub fn new(a_of_t: MatrixFn<T>, u_of_t: VectorFn<T>, a_inf: Matrix<T>, span: (T, T), check: &SteadyCheck) -> Result<Self> {
        let (t0, t1) = span;
        if !(t1 > t0) {
            return Err(Error::Parameter("empty LTV time span".into()));
        }
        a_inf.ensure_square("A(∞)")?;
        a_inf.ensure_finite("A(∞)")?;
        let n = a_inf.rows();
        let a_end = a_of_t(t1);
        if a_end.rows() != n || a_end.cols() != n || u_of_t(t0).len() != n {
            return Err(Error::Shape("A(t), u(t) and A(∞) dimensions disagree".into()));
        }
        let spectrum = eigenvalues(&a_inf)?;
        let worst = spectrum.max_real_part().to_f64_lossy();
        if !(worst < -check.hurwitz_margin) {
            return Err(Error::Assumption(format!("A(∞) is not Hurwitz: max Re λ = {worst:e}")));
        }
        let tol = T::lit(check.steady_tol);
        let gap = spectral_norm(&(&a_end - &a_inf))?;
        if gap > tol {
            return Err(Error::Assumption(format!("A(t_end) is {gap:e} away from A(∞)")));
        }
        let t_prev = (t1 - T::lit(check.window)).max(t0);
        let drift = spectral_norm(&(&a_end - &a_of_t(t_prev)))?;
        if drift > tol {
            return Err(Error::Assumption(format!(
                "A(t) has not settled: drift {drift:e} over the last {} s",
                check.window
            )));
        }
        Ok(Self { dim: n, a_of_t, u_of_t, a_inf, span, input_magnitude: None })
    }

    /// Records `M_u`, the bound on each entry of the unknown input.
    pub fn with_input_magnitude(mut self, m: T) -> Self {
        self.input_magnitude = Some(m);
        self
    }

    /// Same state matrix, different input.
    pub fn with_input(&self, u_of_t: VectorFn<T>) -> Result<Self> {
        if u_of_t(self.span.0).len() != self.dim {
            return Err(Error::Shape("input dimension disagrees with the system".into()));
        }
        Ok(Self { u_of_t, ..self.clone() })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn a(&self, t: T) -> Matrix<T> {
        (self.a_of_t)(t)
    }

    pub fn u(&self, t: T) -> Vec<T> {
        (self.u_of_t)(t)
    }

    pub fn a_of_t(&self) -> &MatrixFn<T> {
        &self.a_of_t
    }

    pub fn u_of_t(&self) -> &VectorFn<T> {
        &self.u_of_t
    }

    pub fn a_inf(&self) -> &Matrix<T> {
        &self.a_inf
    }

    pub fn span(&self) -> (T, T) {
        self.span
    }

    pub fn input_magnitude(&self) -> Option<T> {
        self.input_magnitude
    }

    /// `‖A(t) − A(∞)‖₂`.
    pub fn deviation(&self, t: T) -> Result<T> {
        spectral_norm(&(&self.a(t) - &self.a_inf))
    }
}

fn check_lambda<T: Real, M: ParametricModel<T> + ?Sized>(model: &M, lambda: &[T]) -> Result<()> {
    if lambda.len() != model.param_count() {
        return Err(Error::Shape(format!("λ has {} entries, model expects {}", lambda.len(), model.param_count())));
    }
    Ok(())
}

fn check_nominal<T: Real, M: ParametricModel<T> + ?Sized>(model: &M, nominal: &Trajectory<T>, lambda: &[T]) -> Result<()> {
    check_lambda(model, lambda)?;
    if nominal.dimension() != model.dimension() {
        return Err(Error::Shape("nominal trajectory dimension differs from the model".into()));
    }
    Ok(())
}

fn nan_matrix<T: Real>(r: usize, c: usize) -> Matrix<T> {
    Matrix::from_fn(r, c, |_, _| T::nan())
}

/// `A(t) = ∂f/∂x` evaluated on the interpolated nominal trajectory.
fn jacobian_along<T, M>(model: Arc<M>, nominal: Arc<Trajectory<T>>, lambda: Arc<[T]>) -> MatrixFn<T>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    let n = model.dimension();
    Arc::new(move |t: T| {
        let t = t.max(nominal.start()).min(nominal.end());
        nominal
            .sample(t)
            .and_then(|x| state_jacobian(&*model, t, &x, &lambda))
            // NaN entries surface as a domain error in the integrator
            .unwrap_or_else(|_| nan_matrix(n, n))
    })
}

/// Input `u(t) = (∂f/∂λ)(t) · δλ(t)` along the nominal trajectory.
fn forcing_along<T, M>(model: Arc<M>, nominal: Arc<Trajectory<T>>, lambda: Arc<[T]>, dlambda: VectorFn<T>) -> VectorFn<T>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    let n = model.dimension();
    Arc::new(move |t: T| {
        let tc = t.max(nominal.start()).min(nominal.end());
        let b = nominal.sample(tc).and_then(|x| param_jacobian(&*model, tc, &x, &lambda));
        match b {
            Ok(b) => b.mul_vec(&dlambda(t)),
            Err(_) => vec![T::nan(); n],
        }
    })
}

fn limit_matrix<T: Real, M: ParametricModel<T> + ?Sized>(model: &M, nominal: &Trajectory<T>, lambda: &[T]) -> Result<Matrix<T>> {
    state_jacobian(model, nominal.end(), nominal.last_state(), lambda)
}

/// LTV system for the sensitivity along a direction `δλ` in parameter space,
/// `dz/dt = A(t) z + B(t) δλ`, `z(t0) = 0`.
pub fn build_param_sensitivity<T, M>(
    model: Arc<M>,
    nominal: Arc<Trajectory<T>>,
    lambda: &[T],
    direction: &[T],
    check: &SteadyCheck,
) -> Result<LtvSystem<T>>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    if direction.len() != model.param_count() {
        return Err(Error::Shape("direction length differs from param_count".into()));
    }
    let d: Arc<[T]> = direction.into();
    build_input_sensitivity(model, nominal, lambda, Arc::new(move |_t| d.to_vec()), check)
}

/// Like [`build_param_sensitivity`] with a time-varying parameter deviation `δλ(t)`.
pub fn build_input_sensitivity<T, M>(
    model: Arc<M>,
    nominal: Arc<Trajectory<T>>,
    lambda: &[T],
    dlambda: VectorFn<T>,
    check: &SteadyCheck,
) -> Result<LtvSystem<T>>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    check_nominal(&*model, &nominal, lambda)?;
    if dlambda(nominal.start()).len() != model.param_count() {
        return Err(Error::Shape("δλ(t) length differs from param_count".into()));
    }
    let a_inf = limit_matrix(&*model, &nominal, lambda)?;
    let span = (nominal.start(), nominal.end());
    let lam: Arc<[T]> = lambda.into();
    let a_of_t = jacobian_along(model.clone(), nominal.clone(), lam.clone());
    let u_of_t = forcing_along(model, nominal, lam, dlambda);
    LtvSystem::new(a_of_t, u_of_t, a_inf, span, check)
}

/// System for an unknown disturbance `δλ(t)` with `‖δλ‖∞ ≤ 1`. The input is left
/// at zero; only its entrywise bound `M_u = sup_t max_i Σ_j |∂f_i/∂λ_j|` is stored.
pub fn build_bounded_disturbance_sensitivity<T, M>(
    model: Arc<M>,
    nominal: Arc<Trajectory<T>>,
    lambda: &[T],
    check: &SteadyCheck,
) -> Result<LtvSystem<T>>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    check_nominal(&*model, &nominal, lambda)?;
    let n = model.dimension();
    let mut m_u = T::zero();
    for (i, &t) in nominal.times().iter().enumerate() {
        let b = param_jacobian(&*model, t, nominal.state(i), lambda)?;
        for r in 0..n {
            let row: T = b.row(r).iter().map(|v| v.abs()).sum();
            m_u = m_u.max(row);
        }
    }
    let a_inf = limit_matrix(&*model, &nominal, lambda)?;
    let span = (nominal.start(), nominal.end());
    let a_of_t = jacobian_along(model, nominal, lambda.into());
    let sys = LtvSystem::new(a_of_t, Arc::new(move |_t| vec![T::zero(); n]), a_inf, span, check)?;
    Ok(sys.with_input_magnitude(m_u))
}

/// `z₃`: integrates the LTV system from zero over its span.
pub fn sensitivity_to_params<T: Real>(sys: &LtvSystem<T>, ctrl: &IntegratorConfig) -> Result<Trajectory<T>> {
    let (t0, t1) = sys.span;
    let (a, u) = (sys.a_of_t.clone(), sys.u_of_t.clone());
    integrate_linear(move |t| a(t), move |t| u(t), &vec![T::zero(); sys.dim], t0, t1, ctrl)
}

/// `z₂ = ∂x/∂x₀`, started from the identity. Each state is the `n×n` matrix
/// flattened column by column, so entry `(i, j)` sits at index `j·n + i`.
pub fn sensitivity_to_x0<T, M>(model: Arc<M>, nominal: Arc<Trajectory<T>>, lambda: &[T], ctrl: &IntegratorConfig) -> Result<Trajectory<T>>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    check_nominal(&*model, &nominal, lambda)?;
    let n = model.dimension();
    let (t0, t1) = (nominal.start(), nominal.end());
    let a = jacobian_along(model, nominal, lambda.into());
    let block = move |t: T| {
        let at = a(t);
        let mut big = Matrix::zeros(n * n, n * n);
        for c in 0..n {
            for i in 0..n {
                for k in 0..n {
                    big[(c * n + i, c * n + k)] = at[(i, k)];
                }
            }
        }
        big
    };
    let z0 = Matrix::<T>::identity(n).transpose().as_slice().to_vec();
    integrate_linear(block, move |_t| vec![T::zero(); n * n], &z0, t0, t1, ctrl)
}

/// `z₁ = ∂x/∂t₀`, started from `−f(t₀, x₀, λ)`.
pub fn sensitivity_to_t0<T, M>(model: Arc<M>, nominal: Arc<Trajectory<T>>, lambda: &[T], ctrl: &IntegratorConfig) -> Result<Trajectory<T>>
where
    T: Real,
    M: ParametricModel<T> + ?Sized + 'static,
{
    check_nominal(&*model, &nominal, lambda)?;
    let n = model.dimension();
    let (t0, t1) = (nominal.start(), nominal.end());
    let mut f0 = vec![T::zero(); n];
    model.rhs(t0, nominal.state(0), lambda, &mut f0);
    let z0: Vec<T> = f0.iter().map(|v| -*v).collect();
    let a = jacobian_along(model, nominal, lambda.into());
    integrate_linear(move |t| a(t), move |_t| vec![T::zero(); n], &z0, t0, t1, ctrl)
}

/// Column `j` of a flattened `z₂` state.
pub fn x0_column<T: Real>(flat: &[T], n: usize, j: usize) -> Vec<T> {
    flat[j * n..(j + 1) * n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// dx/dt = λ x
    struct Scalar;

    impl ParametricModel<f64> for Scalar {
        fn dimension(&self) -> usize {
            1
        }
        fn param_count(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, x: &[f64], l: &[f64], dx: &mut [f64]) {
            dx[0] = l[0] * x[0];
        }
    }

    /// dx/dt = A x, no parameter dependence
    struct Linear(Matrix<f64>);

    impl ParametricModel<f64> for Linear {
        fn dimension(&self) -> usize {
            self.0.rows()
        }
        fn param_count(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, x: &[f64], _l: &[f64], dx: &mut [f64]) {
            self.0.mul_vec_into(x, dx);
        }
    }

    fn ctrl() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn fd_of_linear_field_is_exact() {
        let a = Matrix::from_rows(&[[-1.0, 2.0], [0.5, -3.0]]).unwrap();
        let m = Linear(a.clone());
        let j = jacobian_fd(&m, 0.0, &[0.3, -1.2], &[0.0], Wrt::State).unwrap();
        assert!((&j - &a).max_abs() < 1e-9);
        let b = jacobian_fd(&m, 0.0, &[0.3, -1.2], &[0.0], Wrt::Param).unwrap();
        assert!(b.max_abs() < 1e-12);
    }

    #[test]
    fn scalar_param_sensitivity_closed_form() {
        let lam = -0.7;
        let model = Arc::new(Scalar);
        let nominal = Arc::new(simulate(&*model, &[2.0], 0.0, 30.0, &[lam], &ctrl()).unwrap());
        let sys = build_param_sensitivity(model, nominal.clone(), &[lam], &[1.0], &SteadyCheck::default()).unwrap();
        assert!((sys.a(3.0)[(0, 0)] - lam).abs() < 1e-9);
        assert!((sys.u(3.0)[0] - nominal.sample(3.0).unwrap()[0]).abs() < 1e-8);
        let z = sensitivity_to_params(&sys, &ctrl()).unwrap();
        assert_eq!(z.state(0), &[0.0]);
        for t in [0.5, 1.0, 4.0, 10.0] {
            let want = t * 2.0 * (lam * t).exp();
            assert!((z.sample(t).unwrap()[0] - want).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn unstable_limit_is_rejected() {
        let model = Arc::new(Scalar);
        let nominal = Arc::new(simulate(&*model, &[1.0], 0.0, 2.0, &[0.3], &ctrl()).unwrap());
        let r = build_param_sensitivity(model, nominal, &[0.3], &[1.0], &SteadyCheck::default());
        assert!(matches!(r, Err(Error::Assumption(_))));
    }

    #[test]
    fn unsettled_jacobian_is_rejected() {
        // dx/dt = -x + x³/3 has a state-dependent Jacobian; stop before it settles
        struct Cubic;
        impl ParametricModel<f64> for Cubic {
            fn dimension(&self) -> usize {
                1
            }
            fn param_count(&self) -> usize {
                0
            }
            fn rhs(&self, _t: f64, x: &[f64], _l: &[f64], dx: &mut [f64]) {
                dx[0] = -x[0] + x[0].powi(3) / 3.0;
            }
        }
        let model = Arc::new(Cubic);
        let nominal = Arc::new(simulate(&*model, &[1.0], 0.0, 2.0, &[], &ctrl()).unwrap());
        let r = build_bounded_disturbance_sensitivity(model, nominal, &[], &SteadyCheck::default());
        assert!(matches!(r, Err(Error::Assumption(_))), "{r:?}");
    }

    #[test]
    fn x0_sensitivity_is_matrix_exponential() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [-4.0, -0.8]]).unwrap();
        let model = Arc::new(Linear(a.clone()));
        let nominal = Arc::new(simulate(&*model, &[1.0, 0.0], 0.0, 5.0, &[0.0], &ctrl()).unwrap());
        let z = sensitivity_to_x0(model, nominal, &[0.0], &ctrl()).unwrap();
        assert_eq!(z.state(0), &[1.0, 0.0, 0.0, 1.0]);
        for t in [1.0, 2.5, 5.0] {
            let e = crate::linalg::expm(&a.scale(t)).unwrap();
            let s = z.sample(t).unwrap();
            for j in 0..2 {
                let col = x0_column(&s, 2, j);
                for i in 0..2 {
                    assert!((col[i] - e[(i, j)]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn t0_sensitivity_is_time_shift() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [-4.0, -0.8]]).unwrap();
        let model = Arc::new(Linear(a.clone()));
        let nominal = Arc::new(simulate(&*model, &[1.0, 0.5], 0.0, 5.0, &[0.0], &ctrl()).unwrap());
        let z = sensitivity_to_t0(model, nominal.clone(), &[0.0], &ctrl()).unwrap();
        for t in [0.0, 0.7, 3.0] {
            let f = a.mul_vec(&nominal.sample(t).unwrap());
            let s = z.sample(t).unwrap();
            assert!((s[0] + f[0]).abs() < 1e-6 && (s[1] + f[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn parameter_free_model_has_zero_sensitivity() {
        let a = Matrix::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]).unwrap();
        let model = Arc::new(Linear(a));
        let nominal = Arc::new(simulate(&*model, &[1.0, 1.0], 0.0, 20.0, &[0.0], &ctrl()).unwrap());
        let sys = build_param_sensitivity(model.clone(), nominal.clone(), &[0.0], &[1.0], &SteadyCheck::default()).unwrap();
        let z = sensitivity_to_params(&sys, &ctrl()).unwrap();
        assert!(z.states().all(|s| s.iter().all(|v| *v == 0.0)));
        let d = build_bounded_disturbance_sensitivity(model, nominal, &[0.0], &SteadyCheck::default()).unwrap();
        assert_eq!(d.input_magnitude(), Some(0.0));
    }

    #[test]
    fn shape_errors() {
        let model = Arc::new(Scalar);
        let nominal = Arc::new(simulate(&*model, &[1.0], 0.0, 20.0, &[-1.0], &ctrl()).unwrap());
        let r = build_param_sensitivity(model.clone(), nominal.clone(), &[-1.0, 2.0], &[1.0], &SteadyCheck::default());
        assert!(matches!(r, Err(Error::Shape(_))));
        let r = build_param_sensitivity(model, nominal, &[-1.0], &[1.0, 0.0], &SteadyCheck::default());
        assert!(matches!(r, Err(Error::Shape(_))));
    }
}
