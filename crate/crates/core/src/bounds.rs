//! Upper and lower envelopes on LTV sensitivities, and their scaling to model-gap bounds.

use serde::{Deserialize, Serialize};

use crate::envelopes::{convolve_on_grid, integrate_envelope, integrate_envelope_product_to, Envelope};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::ode::{integrate_linear, IntegratorConfig, Trajectory};
use crate::scalar::Real;
use crate::sensitivity::LtvSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Bound1,
    Bound1Tight,
    Bound2,
    Theorem2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [BoundKind::Bound1, BoundKind::Bound1Tight, BoundKind::Bound2, BoundKind::Theorem2];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Bound1 => "bound1",
            BoundKind::Bound1Tight => "bound1_tight",
            BoundKind::Bound2 => "bound2",
            BoundKind::Theorem2 => "theorem2",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-entry envelopes `center ± radius` on a time grid. Symmetric bounds have no center.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult<T> {
    pub kind: BoundKind,
    pub times: Vec<T>,
    pub center: Option<Vec<Vec<T>>>,
    pub radius: Vec<T>,
    pub dim: usize,
    /// Factor already applied to center and radius.
    pub scale: T,
}

impl<T: Real> BoundResult<T> {
    fn center_at(&self, i: usize, k: usize) -> T {
        self.center.as_ref().map_or(T::zero(), |c| c[i][k])
    }

    pub fn lower(&self, i: usize, k: usize) -> T {
        self.center_at(i, k) - self.radius[i]
    }

    pub fn upper(&self, i: usize, k: usize) -> T {
        self.center_at(i, k) + self.radius[i]
    }

    pub fn lower_entry(&self, k: usize) -> Vec<T> {
        (0..self.times.len()).map(|i| self.lower(i, k)).collect()
    }

    pub fn upper_entry(&self, k: usize) -> Vec<T> {
        (0..self.times.len()).map(|i| self.upper(i, k)).collect()
    }

    /// Grid indices where `values` (entry `k`) leave the envelope by more than `tol`.
    pub fn violations(&self, k: usize, values: &[T], tol: T) -> Vec<usize> {
        values
            .iter()
            .enumerate()
            .filter(|&(i, &v)| !(v >= self.lower(i, k) - tol && v <= self.upper(i, k) + tol))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn contains(&self, k: usize, values: &[T], tol: T) -> bool {
        values.len() == self.times.len() && self.violations(k, values, tol).is_empty()
    }

    /// Largest envelope magnitude over the largest magnitude of `values`.
    pub fn looseness(&self, k: usize, values: &[T]) -> T {
        let reach = (0..self.times.len())
            .map(|i| self.lower(i, k).abs().max(self.upper(i, k).abs()))
            .fold(T::zero(), T::max);
        let actual = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if actual > T::zero() {
            reach / actual
        } else {
            T::infinity()
        }
    }
}

/// `t0, t0 + step, …` with `floor((t_end − t0)/step) + 1` points.
pub fn uniform_grid<T: Real>(t0: T, t_end: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero() && t_end >= t0) {
        return Err(Error::Parameter("grid needs step > 0 and t_end ≥ t0".into()));
    }
    // tolerate representation error in the ratio
    let n = ((t_end - t0) / step * (T::one() + T::lit(8.0) * T::epsilon())).floor();
    let n = n.to_usize().ok_or_else(|| Error::Parameter("grid too long".into()))?;
    Ok((0..=n).map(|i| t0 + step * T::from_usize_lossy(i)).collect())
}

fn running_max<T: Real>(v: &[T]) -> Vec<T> {
    let mut m = T::zero();
    v.iter()
        .map(|&x| {
            m = m.max(x);
            m
        })
        .collect()
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("bound grid must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

/// `z_LTI`: integrates `dz/dt = A(∞) z + u(t)` from zero over the system span.
pub fn z_lti<T: Real>(sys: &LtvSystem<T>, ctrl: &IntegratorConfig) -> Result<Trajectory<T>> {
    let (t0, t1) = sys.span();
    let a = sys.a_inf().clone();
    let u = sys.u_of_t().clone();
    integrate_linear(move |_t| a.clone(), move |t| u(t), &vec![T::zero(); sys.dimension()], t0, t1, ctrl)
}

/// `H(t) = ∫_{t₀}^t env_exp(t − s)·env_da(s − t₀) ds` on the grid.
pub fn h_integral<T: Real>(env_exp: &Envelope, env_da: &Envelope, grid: &[T]) -> Result<Vec<T>> {
    check_grid(grid)?;
    let t0 = grid[0];
    grid.iter().map(|&t| integrate_envelope_product_to(env_exp, env_da, t - t0, t - t0)).collect()
}

/// `g(t) = ∫_{t₀}^t env_exp(t − τ)·env_da(τ − t₀)·‖z_LTI(τ)‖ dτ` on the grid.
pub fn g_of_t<T: Real>(zlti: &Trajectory<T>, env_exp: &Envelope, env_da: &Envelope, grid: &[T]) -> Result<Vec<T>> {
    check_grid(grid)?;
    if env_da.is_zero() || env_exp.is_zero() {
        return Ok(vec![T::zero(); grid.len()]);
    }
    let t0 = grid[0];
    // a sampling failure becomes NaN and is reported below
    let integrand = |tau: T| {
        let z = zlti.sample(tau).map(|z| norm2(&z)).unwrap_or(T::nan());
        env_da.value(tau - t0) * z
    };
    let g = convolve_on_grid(env_exp, integrand, grid)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Range {
            t: grid[grid.len() - 1].to_f64_lossy(),
            start: zlti.start().to_f64_lossy(),
            end: zlti.end().to_f64_lossy(),
        });
    }
    Ok(g)
}

fn sample_grid<T: Real>(traj: &Trajectory<T>, grid: &[T]) -> Result<Vec<Vec<T>>> {
    traj.resample(grid)
}

/// `‖z − z_LTI‖ ≤ g(t) + max_{τ≤t} g(τ)·(e^{H(t)} − 1)`, centred on `z_LTI`.
pub fn bound1<T: Real>(zlti: &Trajectory<T>, g: &[T], h: &[T], grid: &[T]) -> Result<BoundResult<T>> {
    check_grid(grid)?;
    if g.len() != grid.len() || h.len() != grid.len() {
        return Err(Error::Shape("g and H must be sampled on the bound grid".into()));
    }
    let gmax = running_max(g);
    let radius = (0..grid.len()).map(|i| g[i] + gmax[i] * h[i].exp_m1()).collect();
    Ok(BoundResult {
        kind: BoundKind::Bound1,
        times: grid.to_vec(),
        center: Some(sample_grid(zlti, grid)?),
        radius,
        dim: zlti.dimension(),
        scale: T::one(),
    })
}

/// Breakpoints for the tightened form of Bound 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// `n` equal pieces of the whole grid span.
    Uniform(usize),
    /// Interior breakpoints, seconds from the grid start.
    Breakpoints(Vec<f64>),
}

impl Partition {
    fn indices<T: Real>(&self, grid: &[T]) -> Result<Vec<usize>> {
        let t0 = grid[0];
        let span = (grid[grid.len() - 1] - t0).to_f64_lossy();
        let cuts: Vec<f64> = match self {
            Partition::Uniform(0) => return Err(Error::Parameter("partition needs at least one piece".into())),
            Partition::Uniform(n) => (1..*n).map(|i| span * i as f64 / *n as f64).collect(),
            Partition::Breakpoints(b) => {
                if b.windows(2).any(|w| !(w[1] > w[0])) || b.iter().any(|&x| !(x > 0.0 && x < span)) {
                    return Err(Error::Parameter("breakpoints must increase strictly inside the grid span".into()));
                }
                b.clone()
            }
        };
        // snap each cut to the first grid node at or after it
        let mut idx = vec![0];
        for c in cuts {
            let j = grid.partition_point(|&t| (t - t0).to_f64_lossy() < c);
            if j > *idx.last().expect("non-empty") && j < grid.len() - 1 {
                idx.push(j);
            }
        }
        Ok(idx)
    }
}

/// Bound 1 with `max g` taken piecewise over a partition of `[t₀, t]`:
/// `Σᵢ max_{[tᵢ,tᵢ₊₁]} g · e^{H(t)}(e^{−Hᵢ(t)} − e^{−Hᵢ₊₁(t)}) + g(t)` with
/// `Hᵢ(t) = ∫_{t₀}^{tᵢ} h(t, s) ds`.
pub fn bound1_tight<T: Real>(
    zlti: &Trajectory<T>,
    g: &[T],
    env_exp: &Envelope,
    env_da: &Envelope,
    grid: &[T],
    partition: &Partition,
) -> Result<BoundResult<T>> {
    check_grid(grid)?;
    if g.len() != grid.len() {
        return Err(Error::Shape("g must be sampled on the bound grid".into()));
    }
    let starts = partition.indices(grid)?;
    let t0 = grid[0];
    let h = h_integral(env_exp, env_da, grid)?;
    let loose = bound1(zlti, g, &h, grid)?;
    let mut radius = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let ht = h[i];
        let mut sum = T::zero();
        // pieces that begin at or before t; the last is truncated at t
        let live: Vec<usize> = starts.iter().copied().filter(|&s| s <= i).collect();
        for (p, &a) in live.iter().enumerate() {
            let b = live.get(p + 1).copied().unwrap_or(i);
            let piece_max = g[a..=b].iter().copied().fold(T::zero(), T::max);
            let ha = integrate_envelope_product_to(env_exp, env_da, t - t0, grid[a] - t0)?;
            let hb = if b == i { ht } else { integrate_envelope_product_to(env_exp, env_da, t - t0, grid[b] - t0)? };
            sum += piece_max * ((ht - ha).exp() - (ht - hb).exp());
        }
        // both are valid bounds; the min only absorbs rounding in the telescoping sum
        radius.push((sum + g[i]).min(loose.radius[i]));
    }
    Ok(BoundResult { kind: BoundKind::Bound1Tight, radius, ..loose })
}

/// `‖z‖ ≤ ‖z_LTI‖ + max_{τ≤t}‖z_LTI(τ)‖·(e^{H(t)} − 1)`, symmetric about zero.
pub fn bound2<T: Real>(zlti: &Trajectory<T>, h: &[T], grid: &[T]) -> Result<BoundResult<T>> {
    check_grid(grid)?;
    if h.len() != grid.len() {
        return Err(Error::Shape("H must be sampled on the bound grid".into()));
    }
    let norms: Vec<T> = sample_grid(zlti, grid)?.iter().map(|z| norm2(z)).collect();
    let nmax = running_max(&norms);
    let radius = (0..grid.len()).map(|i| norms[i] + nmax[i] * h[i].exp_m1()).collect();
    Ok(BoundResult { kind: BoundKind::Bound2, times: grid.to_vec(), center: None, radius, dim: zlti.dimension(), scale: T::one() })
}

/// `‖z‖ ≤ K·M_u·(a(t) + max_{τ≤t} a(τ)·(e^{H(t)} − 1))` with `a(t) = ∫₀ᵗ env_exp`.
pub fn theorem2_bound<T: Real>(m_u: T, k2inf: T, env_exp: &Envelope, h: &[T], grid: &[T], dim: usize) -> Result<BoundResult<T>> {
    check_grid(grid)?;
    if !(m_u >= T::zero() && m_u.is_finite()) {
        return Err(Error::Parameter(format!("M_u must be finite and non-negative, got {m_u}")));
    }
    if !(k2inf >= T::one() && k2inf.is_finite()) {
        return Err(Error::Parameter(format!("K must be at least 1, got {k2inf}")));
    }
    if h.len() != grid.len() {
        return Err(Error::Shape("H must be sampled on the bound grid".into()));
    }
    let t0 = grid[0];
    let a = grid.iter().map(|&t| integrate_envelope(env_exp, t - t0)).collect::<Result<Vec<T>>>()?;
    let amax = running_max(&a);
    let radius = (0..grid.len()).map(|i| k2inf * m_u * (a[i] + amax[i] * h[i].exp_m1())).collect();
    Ok(BoundResult { kind: BoundKind::Theorem2, times: grid.to_vec(), center: None, radius, dim, scale: T::one() })
}

/// Multiplies a sensitivity bound by the disturbance size to bound the model gap.
pub fn scale_to_gap<T: Real>(b: &BoundResult<T>, epsilon: T) -> Result<BoundResult<T>> {
    if !(epsilon >= T::zero() && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be finite and non-negative, got {epsilon}")));
    }
    Ok(BoundResult {
        kind: b.kind,
        times: b.times.clone(),
        center: b.center.as_ref().map(|c| c.iter().map(|z| z.iter().map(|v| *v * epsilon).collect()).collect()),
        radius: b.radius.iter().map(|r| *r * epsilon).collect(),
        dim: b.dim,
        scale: b.scale * epsilon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convergence<T> {
    pub peak: T,
    pub tail: T,
    pub ratio: T,
}

/// Peak of `‖z − z_LTI‖` against its maximum over the final `tail_fraction` of the span,
/// on the sample times of `z`.
pub fn corollary_convergence<T: Real>(z: &Trajectory<T>, zlti: &Trajectory<T>, tail_fraction: T) -> Result<Convergence<T>> {
    if !(tail_fraction > T::zero() && tail_fraction <= T::one()) {
        return Err(Error::Parameter("tail fraction must lie in (0, 1]".into()));
    }
    if z.dimension() != zlti.dimension() {
        return Err(Error::Shape("trajectories differ in dimension".into()));
    }
    let cut = z.end() - tail_fraction * (z.end() - z.start());
    let (mut peak, mut tail) = (T::zero(), T::zero());
    for (i, &t) in z.times().iter().enumerate() {
        let r = zlti.sample(t)?;
        let d: Vec<T> = z.state(i).iter().zip(&r).map(|(a, b)| *a - *b).collect();
        let n = norm2(&d);
        peak = peak.max(n);
        if t >= cut {
            tail = tail.max(n);
        }
    }
    let ratio = if peak > T::zero() { tail / peak } else { T::zero() };
    Ok(Convergence { peak, tail, ratio })
}

/// Samples for checking the integral inequality
/// `γ ≤ α + ∫βγ ⇒ γ ≤ α + ∫ αβ e^{∫β}` on a grid (trapezoid rule).
#[derive(Clone, Debug, PartialEq)]
pub struct GronwallCheck<T> {
    pub grid: Vec<T>,
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub gamma: Vec<T>,
    /// Discrete hypothesis right-hand side `α(t) + ∫₀ᵗ βγ`.
    pub hypothesis: Vec<T>,
    /// Discrete conclusion right-hand side `α(t) + ∫₀ᵗ α(s)β(s)e^{∫ₛᵗβ} ds`.
    pub rhs: Vec<T>,
}

fn cumulative_trapezoid<T: Real>(grid: &[T], f: impl Fn(usize) -> T) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = vec![T::zero()];
    for j in 1..grid.len() {
        acc += T::lit(0.5) * (grid[j] - grid[j - 1]) * (f(j - 1) + f(j));
        out.push(acc);
    }
    out
}

impl<T: Real> GronwallCheck<T> {
    pub fn new(grid: Vec<T>, alpha: Vec<T>, beta: Vec<T>, gamma: Vec<T>) -> Result<Self> {
        check_grid(&grid)?;
        let n = grid.len();
        if alpha.len() != n || beta.len() != n || gamma.len() != n {
            return Err(Error::Shape("α, β, γ must be sampled on the grid".into()));
        }
        if beta.iter().any(|b| !(*b >= T::zero())) {
            return Err(Error::Parameter("β must be non-negative".into()));
        }
        let int_bg = cumulative_trapezoid(&grid, |j| beta[j] * gamma[j]);
        let hypothesis = (0..n).map(|j| alpha[j] + int_bg[j]).collect();
        let big_b = cumulative_trapezoid(&grid, |j| beta[j]);
        let rhs = (0..n)
            .map(|j| {
                let inner = cumulative_trapezoid(&grid[..=j], |s| alpha[s] * beta[s] * (big_b[j] - big_b[s]).exp());
                alpha[j] + inner[j]
            })
            .collect();
        Ok(Self { grid, alpha, beta, gamma, hypothesis, rhs })
    }
}

/// True iff the conclusion holds at every grid time up to which the hypothesis holds.
pub fn gronwall_check<T: Real>(data: &GronwallCheck<T>) -> bool {
    let slack = |v: T| T::lit(1e-12) * (T::one() + v.abs());
    for j in 0..data.grid.len() {
        if data.gamma[j] > data.hypothesis[j] {
            break;
        }
        if data.gamma[j] > data.rhs[j] + slack(data.rhs[j]) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelopes::EnvelopeSpec;
    use crate::linalg::Matrix;
    use std::sync::Arc;

    fn exp_env(c: f64, k: f64) -> Envelope {
        EnvelopeSpec::exponential(c, k).unwrap().into()
    }

    fn lti(c: f64, u: Vec<f64>) -> LtvSystem<f64> {
        let a = Matrix::identity(u.len()).scale(-c);
        let a2 = a.clone();
        LtvSystem::new(Arc::new(move |_t| a2.clone()), Arc::new(move |_t| u.clone()), a, (0.0, 5.0), &Default::default()).unwrap()
    }

    #[test]
    fn grid_length() {
        assert_eq!(uniform_grid(0.0, 20.0, 0.005).unwrap().len(), 4001);
        assert_eq!(uniform_grid(0.0, 1.0, 0.3).unwrap().len(), 4);
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn z_lti_closed_form() {
        let sys = lti(2.0, vec![1.0, -0.5]);
        let z = z_lti(&sys, &IntegratorConfig::default()).unwrap();
        let t = 1.3f64;
        let s = z.sample(t).unwrap();
        let f = (1.0 - (-2.0 * t).exp()) / 2.0;
        assert!((s[0] - f).abs() < 1e-8 && (s[1] + 0.5 * f).abs() < 1e-8);
    }

    #[test]
    fn time_invariant_collapses() {
        let sys = lti(1.0, vec![1.0, 1.0]);
        let z = z_lti(&sys, &IntegratorConfig::default()).unwrap();
        let grid = uniform_grid(0.0, 5.0, 0.01).unwrap();
        let env = exp_env(1.0, 1.0);
        let g = g_of_t(&z, &env, &Envelope::Zero, &grid).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
        let h = h_integral(&env, &Envelope::Zero, &grid).unwrap();
        let b1 = bound1(&z, &g, &h, &grid).unwrap();
        assert!(b1.radius.iter().all(|r| *r == 0.0));
        let b2 = bound2(&z, &h, &grid).unwrap();
        let zn = norm2(&z.sample(2.0).unwrap());
        assert!((b2.upper(200, 0) - zn).abs() < 1e-12);
    }

    #[test]
    fn theorem2_closed_form() {
        let grid = uniform_grid(0.0, 3.0, 0.01).unwrap();
        let h = vec![0.0; grid.len()];
        let b = theorem2_bound(0.4, 2f64.sqrt(), &exp_env(1.0, 2.0), &h, &grid, 2).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let want = 2f64.sqrt() * 0.4 * (1.0 - (-2.0 * t).exp()) / 2.0;
            assert!((b.upper(i, 1) - want).abs() < 1e-14);
            assert_eq!(b.lower(i, 1), -b.upper(i, 1));
        }
        let zero = theorem2_bound(0.0, 1.0, &exp_env(1.0, 2.0), &h, &grid, 2).unwrap();
        assert!(zero.radius.iter().all(|r| *r == 0.0));
        assert!(theorem2_bound(-1.0, 1.0, &exp_env(1.0, 2.0), &h, &grid, 2).is_err());
    }

    #[test]
    fn single_piece_partition_matches_bound1() {
        let sys = lti(1.0, vec![1.0]);
        let z = z_lti(&sys, &IntegratorConfig::default()).unwrap();
        let grid = uniform_grid(0.0, 5.0, 0.05).unwrap();
        let (e, d) = (exp_env(1.0, 1.0), exp_env(0.5, 2.0));
        let g = g_of_t(&z, &e, &d, &grid).unwrap();
        let h = h_integral(&e, &d, &grid).unwrap();
        let b1 = bound1(&z, &g, &h, &grid).unwrap();
        let one = bound1_tight(&z, &g, &e, &d, &grid, &Partition::Uniform(1)).unwrap();
        for (a, b) in b1.radius.iter().zip(&one.radius) {
            assert!((a - b).abs() <= 1e-15 * a.max(1.0));
        }
        let ten = bound1_tight(&z, &g, &e, &d, &grid, &Partition::Uniform(10)).unwrap();
        assert!(ten.radius.iter().zip(&b1.radius).all(|(t, l)| t <= l));
        assert!(bound1_tight(&z, &g, &e, &d, &grid, &Partition::Uniform(0)).is_err());
        assert!(bound1_tight(&z, &g, &e, &d, &grid, &Partition::Breakpoints(vec![2.0, 1.0])).is_err());
    }

    #[test]
    fn scaling() {
        let grid = uniform_grid(0.0, 1.0, 0.1).unwrap();
        let b = theorem2_bound(1.0, 1.0, &exp_env(1.0, 1.0), &vec![0.0; grid.len()], &grid, 2).unwrap();
        assert_eq!(scale_to_gap(&b, 1.0).unwrap(), b);
        let z = scale_to_gap(&b, 0.0).unwrap();
        assert!(z.radius.iter().all(|r| *r == 0.0));
        assert!(scale_to_gap(&b, -0.1).is_err());
    }

    #[test]
    fn gronwall_equality_cases() {
        let grid = uniform_grid(0.0f64, 2.0, 0.01).unwrap();
        let n = grid.len();
        let gamma: Vec<f64> = grid.iter().map(|t: &f64| 0.5 * (0.8 * t).exp()).collect();
        let c = GronwallCheck::new(grid.clone(), vec![0.5; n], vec![0.8; n], gamma).unwrap();
        assert!(gronwall_check(&c));
        let c = GronwallCheck::new(grid.clone(), vec![1.0; n], vec![0.0; n], vec![1.0; n]).unwrap();
        assert!(gronwall_check(&c));
        assert_eq!(c.rhs, vec![1.0; n]);
        assert!(GronwallCheck::new(grid, vec![1.0; n], vec![-1.0; n], vec![1.0; n]).is_err());
    }

    #[test]
    fn convergence_of_identical_trajectories() {
        let sys = lti(1.0, vec![1.0]);
        let z = z_lti(&sys, &IntegratorConfig::default()).unwrap();
        let c = corollary_convergence(&z, &z, 0.1).unwrap();
        assert_eq!(c.ratio, 0.0);
    }
}
