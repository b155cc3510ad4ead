use crate::error::{Error, Result};
use crate::scalar::Real;

/// Time-stamped states with their derivatives, interpolated by cubic Hermite
/// polynomials between accepted steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    dim: usize,
    times: Vec<T>,
    states: Vec<T>,
    derivs: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub(crate) fn with_capacity(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap * dim),
            derivs: Vec::with_capacity(cap * dim),
        }
    }

    pub(crate) fn push(&mut self, t: T, x: &[T], dx: &[T]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.extend_from_slice(x);
        self.derivs.extend_from_slice(dx);
    }

    /// Builds a trajectory from samples and derivatives.
    pub fn from_samples(times: Vec<T>, states: Vec<Vec<T>>, derivs: Vec<Vec<T>>) -> Result<Self> {
        if times.len() < 2 || states.len() != times.len() || derivs.len() != times.len() {
            return Err(Error::Shape("trajectory needs >= 2 matching samples".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("trajectory times must strictly increase".into()));
        }
        let dim = states[0].len();
        if states.iter().chain(&derivs).any(|s| s.len() != dim) {
            return Err(Error::Shape("inconsistent state dimensions".into()));
        }
        if states.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite trajectory state".into()));
        }
        Ok(Self {
            dim,
            times,
            states: states.into_iter().flatten().collect(),
            derivs: derivs.into_iter().flatten().collect(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn derivative(&self, i: usize) -> &[T] {
        &self.derivs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[T]> {
        self.states.chunks(self.dim)
    }

    pub fn start(&self) -> T {
        self.times[0]
    }

    pub fn end(&self) -> T {
        self.times[self.times.len() - 1]
    }

    pub fn last_state(&self) -> &[T] {
        self.state(self.len() - 1)
    }

    /// Interpolated state at `t`.
    pub fn sample(&self, t: T) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.dim];
        self.sample_into(t, &mut out)?;
        Ok(out)
    }

    pub fn sample_into(&self, t: T, out: &mut [T]) -> Result<()> {
        let (t0, t1) = (self.start(), self.end());
        if !(t >= t0 && t <= t1) {
            return Err(Error::Range { t: t.to_f64_lossy(), start: t0.to_f64_lossy(), end: t1.to_f64_lossy() });
        }
        // index of the last knot <= t
        let i = match self.times.binary_search_by(|probe| probe.partial_cmp(&t).expect("finite times")) {
            Ok(i) => {
                out.copy_from_slice(self.state(i));
                return Ok(());
            }
            Err(i) => i - 1,
        };
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        let (xa, xb) = (self.state(i), self.state(i + 1));
        let (da, db) = (self.derivative(i), self.derivative(i + 1));
        for k in 0..self.dim {
            out[k] = h00 * xa[k] + h10 * h * da[k] + h01 * xb[k] + h11 * h * db[k];
        }
        Ok(())
    }

    /// One state per grid time.
    pub fn resample(&self, grid: &[T]) -> Result<Vec<Vec<T>>> {
        grid.iter().map(|&t| self.sample(t)).collect()
    }

    /// Single component sampled on a grid.
    pub fn component_on(&self, grid: &[T], k: usize) -> Result<Vec<T>> {
        let mut buf = vec![T::zero(); self.dim];
        grid.iter()
            .map(|&t| {
                self.sample_into(t, &mut buf)?;
                Ok(buf[k])
            })
            .collect()
    }
}
