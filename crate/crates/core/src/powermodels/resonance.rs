use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, norm2, Matrix};
use crate::scalar::Real;

/// Log-spaced frequency grid, rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub w_min: f64,
    pub w_max: f64,
    pub steps: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Self { w_min: 1e-2, w_max: 1e3, steps: 2000 }
    }
}

/// `‖(iωI − A)⁻¹ b‖₂` through the equivalent real system of twice the size.
pub fn frequency_gain<T: Real>(a: &Matrix<T>, b: &[T], omega: T) -> Result<T> {
    let n = a.rows();
    let big = Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (r, c) = (i % n, j % n);
        let eye = if r == c { omega } else { T::zero() };
        match (bi, bj) {
            (0, 0) | (1, 1) => -a[(r, c)],
            (0, 1) => -eye,
            _ => eye,
        }
    });
    let mut rhs = vec![T::zero(); 2 * n];
    rhs[..n].copy_from_slice(b);
    Ok(norm2(&big.solve(&rhs)?))
}

/// Frequency of the peak steady-state gain from `input` through `dx/dt = A x + input·u`.
pub fn resonant_frequency<T: Real>(a_inf: &Matrix<T>, input: &[T], sweep: &Sweep) -> Result<T> {
    a_inf.ensure_square("A(∞)")?;
    if input.len() != a_inf.rows() {
        return Err(Error::Shape("input direction length differs from A(∞)".into()));
    }
    if !is_hurwitz(a_inf, T::zero())? {
        return Err(Error::Assumption("A(∞) is not Hurwitz".into()));
    }
    if !(sweep.w_min > 0.0 && sweep.w_max > sweep.w_min && sweep.steps >= 3) {
        return Err(Error::Parameter(format!("bad sweep {sweep:?}")));
    }
    let ratio = (sweep.w_max / sweep.w_min).ln() / (sweep.steps - 1) as f64;
    let grid: Vec<f64> = (0..sweep.steps).map(|k| sweep.w_min * (ratio * k as f64).exp()).collect();
    let gains = grid
        .iter()
        .map(|&w| frequency_gain(a_inf, input, T::lit(w)))
        .collect::<Result<Vec<_>>>()?;
    let (k, _) = gains
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |best, (i, &g)| if g > best.1 { (i, g) } else { best });
    if k == 0 || k + 1 == grid.len() {
        return Err(Error::NoResonance(format!("gain peaks at the sweep edge ({} rad/s)", grid[k])));
    }

    // golden-section maximisation on the bracketing cell pair
    let gain = |w: f64| frequency_gain(a_inf, input, T::lit(w)).map(|g| g.to_f64_lossy());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (grid[k - 1], grid[k + 1]);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (gain(x1)?, gain(x2)?);
    while hi - lo > 1e-10 * hi {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = gain(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = gain(x1)?;
        }
    }
    Ok(T::lit(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overdamped_has_no_resonance() {
        let a = Matrix::from_diag(&[-1.0, -2.0]);
        let r = resonant_frequency(&a, &[1.0, 1.0], &Sweep::default());
        assert!(matches!(r, Err(Error::NoResonance(_))));
    }

    #[test]
    fn unstable_is_rejected() {
        let a = Matrix::from_diag(&[1.0, -2.0]);
        assert!(matches!(resonant_frequency(&a, &[1.0, 1.0], &Sweep::default()), Err(Error::Assumption(_))));
    }

    #[test]
    fn scalar_gain() {
        // 1/|iω + 1|
        let a = Matrix::from_diag(&[-1.0]);
        let g = frequency_gain(&a, &[1.0], 2.0).unwrap();
        assert!((g - 1.0 / 5f64.sqrt()).abs() < 1e-14);
    }
}
