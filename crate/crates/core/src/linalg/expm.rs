use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm threshold below which the degree-13 approximant needs no scaling.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    m.ensure_square("expm input")?;
    m.ensure_finite("expm input")?;
    let n = m.rows();
    let norm = m.norm_1().to_f64_lossy();
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if squarings > 1000 {
        return Err(Error::Numeric(format!("norm {norm:e} too large for expm")));
    }
    let a = m.scale(T::lit(2f64.powi(-squarings)));
    let b = |i: usize| T::lit(PADE13[i]);

    let ident = Matrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let lin = |c: [T; 4]| -> Matrix<T> {
        Matrix::from_fn(n, n, |i, j| {
            c[0] * a6[(i, j)] + c[1] * a4[(i, j)] + c[2] * a2[(i, j)] + c[3] * ident[(i, j)]
        })
    };
    let u_inner = a6.matmul(&lin([b(13), b(11), b(9), T::zero()]));
    let u = a.matmul(&(&u_inner + &lin([b(7), b(5), b(3), b(1)])));
    let v_inner = a6.matmul(&lin([b(12), b(10), b(8), T::zero()]));
    let v = &v_inner + &lin([b(6), b(4), b(2), b(0)]);

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den.lu()?.solve_matrix(&num)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    if !r.is_finite() {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(r)
}
