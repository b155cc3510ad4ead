use super::{is_hurwitz, symmetric_eigenvalues, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Decay data from the Lyapunov solution `H` of `AᵀH + HA = -I`:
/// `beta = √(λmax(H)/λmin(H))` and `c = 1/λmax(H)`.
///
/// With this normalisation `V = xᵀHx` only gives `‖e^{At}‖ ≤ beta·e^{-ct/2}`;
/// `beta·e^{-ct}` can fail (for `A = -I` it is `e^{-2t}` against `‖e^{At}‖ = e^{-t}`).
/// [`LyapunovEnvelope::certified_rate`] is the rate the argument does support.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovEnvelope<T> {
    pub beta: T,
    pub c: T,
    pub h: Matrix<T>,
}

impl<T: Real> LyapunovEnvelope<T> {
    /// `beta·e^{-ct}`.
    pub fn bound(&self, t: T) -> T {
        self.beta * (-self.c * t).exp()
    }

    /// `1/(2 λmax(H))`.
    pub fn certified_rate(&self) -> T {
        self.c / T::lit(2.0)
    }

    /// `beta·e^{-t/(2 λmax(H))}`, a valid bound on `‖e^{At}‖₂` for every `t ≥ 0`.
    pub fn certified_bound(&self, t: T) -> T {
        self.beta * (-self.certified_rate() * t).exp()
    }
}

/// Solves `AᵀX + XA = -Q` for Hurwitz `A` by the matrix sign-function iteration.
pub fn solve_lyapunov_general<T: Real>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    a.ensure_square("Lyapunov matrix")?;
    a.ensure_finite("Lyapunov matrix")?;
    if !is_hurwitz(a, T::zero())? {
        return Err(Error::NoSolution("Lyapunov equation needs a Hurwitz matrix".into()));
    }
    let n = a.rows();
    let mut x = sign_iteration(a, q)?;
    // residual correction: solve for the defect with the same iteration
    for _ in 0..3 {
        let res = residual(a, &x, q);
        if res.max_abs() <= T::epsilon() * x.max_abs() * a.max_abs() {
            break;
        }
        let dx = sign_iteration(a, &res)?;
        x = &x + &dx;
    }
    debug_assert_eq!(x.rows(), n);
    Ok(x.symmetrize())
}

/// `AᵀX + XA + Q`.
fn residual<T: Real>(a: &Matrix<T>, x: &Matrix<T>, q: &Matrix<T>) -> Matrix<T> {
    let at = a.transpose();
    &(&at.matmul(x) + &x.matmul(a)) + q
}

fn sign_iteration<T: Real>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let half = T::lit(0.5);
    let mut ak = a.clone();
    let mut qk = q.clone();
    let ident = Matrix::identity(n);
    let tol = T::lit(10.0) * T::from_usize_lossy(n) * T::epsilon();
    for _ in 0..100 {
        let lu = ak.lu()?;
        let inv = lu.inverse()?;
        // determinant scaling accelerates the early iterations
        let det = lu.determinant().abs();
        let scale = if det > T::zero() && det.is_finite() {
            det.powf(-T::one() / T::from_usize_lossy(n))
        } else {
            T::one()
        };
        let next_a = (&ak.scale(scale) + &inv.scale(T::one() / scale)).scale(half);
        let inv_t = inv.transpose();
        let next_q =
            (&qk.scale(scale) + &inv_t.matmul(&qk).matmul(&inv).scale(T::one() / scale)).scale(half);
        let step = (&next_a - &ak).norm_1();
        ak = next_a;
        qk = next_q;
        if !ak.is_finite() || !qk.is_finite() {
            return Err(Error::Numeric("sign iteration diverged".into()));
        }
        if (&ak + &ident).norm_1() <= tol || step <= tol * ak.norm_1() {
            return Ok(qk.scale(half));
        }
    }
    Err(Error::Numeric("sign iteration did not converge".into()))
}

/// Lyapunov solution of `AᵀH + HA = -I` with the derived decay certificate.
pub fn solve_lyapunov<T: Real>(a: &Matrix<T>) -> Result<LyapunovEnvelope<T>> {
    let n = a.rows();
    let h = solve_lyapunov_general(a, &Matrix::identity(n))?;
    let eigs = symmetric_eigenvalues(&h)?;
    let lo = eigs[0];
    let hi = eigs[n - 1];
    if lo <= T::zero() {
        return Err(Error::Numeric("Lyapunov solution is not positive definite".into()));
    }
    Ok(LyapunovEnvelope { beta: (hi / lo).sqrt(), c: T::one() / hi, h })
}

/// Max-abs residual of `AᵀH + HA + I`.
pub fn lyapunov_residual<T: Real>(a: &Matrix<T>, h: &Matrix<T>) -> T {
    residual(a, h, &Matrix::identity(a.rows())).max_abs()
}
