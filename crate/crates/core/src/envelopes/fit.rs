use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;

use super::{Envelope, EnvelopeSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Final multiplicative margin on `C`.
    pub inflation: f64,
    /// Samples below `noise_floor · max(samples)` are treated as numerical zero and
    /// excluded from fitting and from the domination certificate.
    pub noise_floor: f64,
    /// If every sample is at most this, the zero envelope is returned.
    pub zero_tol: f64,
    /// Upper end of the frequency scan for the oscillation term, rad/s.
    pub omega_max: f64,
    pub omega_steps: usize,
    /// Nelder–Mead iterations spent shrinking the envelope area.
    pub refine_iters: u64,
    /// Envelope returned instead whenever the fit exceeds it somewhere on the grid.
    pub fallback: Option<EnvelopeSpec>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            inflation: 0.05,
            noise_floor: 1e-7,
            zero_tol: 1e-12,
            omega_max: 200.0,
            omega_steps: 800,
            refine_iters: 4000,
            fallback: None,
        }
    }
}

const S_MAX: f64 = 0.95;

/// Fits `C·e^{−ks}·(1 + S·sin(ωs + φ))` above `samples` taken at lags `grid`.
///
/// The decay is fitted through the local maxima in log space, the oscillation by a
/// linear least-squares scan over `ω`, and the shape is then refined to minimise the
/// enclosed area with `C` lifted to dominate every retained sample.
pub fn fit_envelope<T: Real>(samples: &[T], grid: &[T], opts: &FitOptions) -> Result<Envelope> {
    if samples.len() != grid.len() || grid.len() < 3 {
        return Err(Error::Shape("fit needs ≥ 3 samples on a matching grid".into()));
    }
    if !(opts.inflation >= 0.0 && opts.noise_floor >= 0.0 && opts.noise_floor < 1.0) {
        return Err(Error::Parameter("inflation and noise floor must be non-negative".into()));
    }
    let y: Vec<f64> = samples.iter().map(|v| v.to_f64_lossy()).collect();
    let s: Vec<f64> = grid.iter().map(|v| v.to_f64_lossy()).collect();
    if y.iter().chain(&s).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite samples".into()));
    }
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("fit grid must strictly increase".into()));
    }
    if y.iter().any(|v| *v < 0.0) {
        return Err(Error::Fit("samples must be non-negative".into()));
    }
    let ymax = y.iter().cloned().fold(0.0, f64::max);
    if ymax <= opts.zero_tol {
        return Ok(Envelope::Zero);
    }
    let keep: Vec<usize> = (0..y.len()).filter(|&i| y[i] > ymax * opts.noise_floor).collect();
    let problem = Problem { s: &s, y: &y, keep: &keep };

    let (c0, k0) = decay_fit(&problem)?;
    let start = oscillation_scan(&problem, c0, k0, opts);
    let shape = problem.refine(start, opts.refine_iters);

    let mut spec = EnvelopeSpec::new(problem.lift(&shape) * (1.0 + opts.inflation), shape[0], shape[1], shape[2], shape[3])?;
    certify(&mut spec, samples, grid, &keep)?;

    if let Some(fb) = opts.fallback {
        fb.validate()?;
        if grid.iter().any(|&t| spec.value(t) > fb.value(t)) {
            return Ok(fb.into());
        }
    }
    Ok(spec.into())
}

struct Problem<'a> {
    s: &'a [f64],
    y: &'a [f64],
    keep: &'a [usize],
}

fn clamp_shape(q: &[f64]) -> [f64; 4] {
    [q[0], q[1].clamp(0.0, S_MAX), q[2].abs(), q[3]]
}

fn shape_value(q: &[f64; 4], s: f64) -> f64 {
    (-q[0] * s).exp() * (1.0 + q[1] * (q[2] * s + q[3]).sin())
}

impl Problem<'_> {
    /// Smallest `C` dominating the retained samples for a given shape.
    fn lift(&self, q: &[f64; 4]) -> f64 {
        self.keep.iter().map(|&i| self.y[i] / shape_value(q, self.s[i])).fold(0.0, f64::max)
    }

    fn area(&self, q: &[f64; 4]) -> f64 {
        if !(q[0] > 0.0) {
            return f64::INFINITY;
        }
        let c = self.lift(q);
        let v: f64 = self
            .s
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (shape_value(q, w[0]) + shape_value(q, w[1])))
            .sum();
        let a = c * v;
        if a.is_finite() {
            a
        } else {
            f64::INFINITY
        }
    }

    fn refine(&self, start: [f64; 4], iters: u64) -> [f64; 4] {
        if iters == 0 {
            return start;
        }
        let steps = [0.1 * start[0], 0.05, (0.02 * start[2]).max(0.5), 0.3];
        let mut simplex = vec![start.to_vec()];
        for (d, h) in steps.iter().enumerate() {
            let mut v = start.to_vec();
            v[d] += h;
            simplex.push(v);
        }
        let best = NelderMead::new(simplex)
            .with_sd_tolerance(1e-12)
            .ok()
            .and_then(|solver| Executor::new(AreaCost(self), solver).configure(|st| st.max_iters(iters)).run().ok())
            .and_then(|res| res.state.best_param)
            .map(|p| clamp_shape(&p));
        match best {
            Some(q) if self.area(&q) < self.area(&start) => q,
            _ => start,
        }
    }
}

struct AreaCost<'a, 'b>(&'a Problem<'b>);

impl CostFunction for AreaCost<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        // a large finite value keeps the simplex ordering well defined
        Ok(self.0.area(&clamp_shape(p)).min(1e300))
    }
}

/// Least squares for `ln y ≈ ln C − k s` through the local maxima.
fn decay_fit(p: &Problem) -> Result<(f64, f64)> {
    let (s, y) = (p.s, p.y);
    let n = s.len();
    let kept: Vec<bool> = {
        let mut m = vec![false; n];
        p.keep.iter().for_each(|&i| m[i] = true);
        m
    };
    let mut peaks: Vec<usize> = p
        .keep
        .iter()
        .copied()
        .filter(|&i| (i == 0 || !kept[i - 1] || y[i] >= y[i - 1]) && (i + 1 == n || !kept[i + 1] || y[i] >= y[i + 1]))
        .collect();
    if peaks.len() < 2 {
        peaks = p.keep.to_vec();
    }
    if peaks.len() < 2 {
        return Err(Error::Fit("too few samples above the noise floor".into()));
    }
    let m = peaks.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &i in &peaks {
        let (xi, yi) = (s[i], y[i].ln());
        sx += xi;
        sy += yi;
        sxx += xi * xi;
        sxy += xi * yi;
    }
    let den = m * sxx - sx * sx;
    if den.abs() <= f64::EPSILON * m * sxx {
        return Err(Error::Fit("peaks do not span a time interval".into()));
    }
    let slope = (m * sxy - sx * sy) / den;
    let intercept = (sy - slope * sx) / m;
    let k = -slope;
    if !(k > 0.0) {
        return Err(Error::Fit(format!("samples do not decay (fitted rate {k:e})")));
    }
    Ok((intercept.exp(), k))
}

/// Scans `ω`, fitting `y / (C₀e^{−k s}) ≈ a + b sin ωs + c cos ωs`, and keeps the shape
/// whose lifted envelope has the least area.
fn oscillation_scan(p: &Problem, c0: f64, k: f64, opts: &FitOptions) -> [f64; 4] {
    let mut best = [k, 0.0, 0.0, 0.0];
    let mut best_area = p.area(&best);
    let q: Vec<(f64, f64)> = p.keep.iter().map(|&i| (p.s[i], p.y[i] / (c0 * (-k * p.s[i]).exp()))).collect();
    let steps = opts.omega_steps.max(2);
    let w_lo = 0.5;
    for j in 0..steps {
        let w = w_lo + (opts.omega_max - w_lo) * j as f64 / (steps - 1) as f64;
        // normal equations in the basis (1, sin, cos)
        let mut g = [[0.0; 3]; 3];
        let mut r = [0.0; 3];
        for &(s, v) in &q {
            let (sn, cs) = (w * s).sin_cos();
            let basis = [1.0, sn, cs];
            for a in 0..3 {
                r[a] += basis[a] * v;
                for b in 0..3 {
                    g[a][b] += basis[a] * basis[b];
                }
            }
        }
        let Some([al, bs, bc]) = solve3(g, r) else { continue };
        if !(al > 0.0) {
            continue;
        }
        let depth = (bs.hypot(bc) / al).min(S_MAX);
        let shape = [k, depth, w, bc.atan2(bs)];
        let area = p.area(&shape);
        if area < best_area {
            best = shape;
            best_area = area;
        }
    }
    best
}

fn solve3(g: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(g);
    let scale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(d.abs() > 1e-12 * scale.powi(3)) {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = g;
        for row in 0..3 {
            m[row][c] = r[row];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// Raises `C` until the envelope, evaluated in the caller's precision, is at least
/// every retained sample.
fn certify<T: Real>(spec: &mut EnvelopeSpec, samples: &[T], grid: &[T], keep: &[usize]) -> Result<()> {
    for _ in 0..8 {
        let worst = keep
            .iter()
            .map(|&i| samples[i].to_f64_lossy() / spec.value(grid[i]).to_f64_lossy())
            .fold(0.0, f64::max);
        if keep.iter().all(|&i| spec.value(grid[i]) >= samples[i]) {
            return Ok(());
        }
        spec.c *= worst.max(1.0) * (1.0 + 8.0 * T::epsilon().to_f64_lossy());
    }
    Err(Error::Fit("could not certify domination".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn pure_exponential() {
        let g = grid(2001, 0.005);
        let y: Vec<f64> = g.iter().map(|s| (-2.0 * s).exp()).collect();
        let env = fit_envelope(&y, &g, &FitOptions { inflation: 0.0, ..Default::default() }).unwrap();
        let spec = env.spec().unwrap();
        assert!((spec.c - 1.0).abs() < 1e-3 && (spec.k - 2.0).abs() < 1e-2 && spec.s < 1e-2, "{spec:?}");
        assert!(y.iter().zip(&g).all(|(v, s)| env.value(*s) >= *v));
    }

    #[test]
    fn damped_oscillation_is_dominated() {
        let g = grid(4001, 0.005);
        let y: Vec<f64> = g.iter().map(|s| 3.0 * (-s).exp() * (1.0 + 0.5 * (7.0 * s).sin()).max(0.0)).collect();
        let env = fit_envelope(&y, &g, &FitOptions::default()).unwrap();
        assert!(y.iter().zip(&g).all(|(v, s)| env.value(*s) >= *v));
    }

    #[test]
    fn zero_and_growing_samples() {
        let g = grid(100, 0.1);
        assert_eq!(fit_envelope(&vec![0.0; 100], &g, &FitOptions::default()).unwrap(), Envelope::Zero);
        let grow: Vec<f64> = g.iter().map(|s| s.exp()).collect();
        assert!(matches!(fit_envelope(&grow, &g, &FitOptions::default()), Err(Error::Fit(_))));
    }

    #[test]
    fn fallback_replaces_wider_fit() {
        let g = grid(1001, 0.01);
        let y: Vec<f64> = g.iter().map(|s| (-s).exp()).collect();
        let fb = EnvelopeSpec::exponential(1.0, 1.0).unwrap();
        let env = fit_envelope(&y, &g, &FitOptions { fallback: Some(fb), ..Default::default() }).unwrap();
        assert_eq!(env, fb.into());
    }
}
