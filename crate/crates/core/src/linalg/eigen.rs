//! Eigenvalue routines for small dense matrices.
//!
//! General real matrices go through balancing, reduction to upper Hessenberg
//! form and the shifted double-step QR iteration. Symmetric matrices use
//! cyclic Jacobi rotations, which also back the spectral norm.

use num_complex::Complex;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues of a real square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Spectral abscissa: the largest real part.
    pub fn max_real_part(&self) -> T {
        self.eigenvalues.iter().map(|z| z.re).fold(T::neg_infinity(), T::max)
    }

    pub fn has_complex_pair(&self) -> bool {
        self.eigenvalues.iter().any(|z| z.im != T::zero())
    }

    /// Largest imaginary part magnitude.
    pub fn max_imag_part(&self) -> T {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(T::zero(), T::max)
    }
}

/// Eigenvalues of `m`, sorted by descending real part then descending imaginary part.
pub fn eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Spectrum<T>> {
    m.ensure_square("eigenvalue input")?;
    m.ensure_finite("eigenvalue input")?;
    let n = m.rows();
    let mut eigs = match n {
        1 => vec![Complex::new(m[(0, 0)], T::zero())],
        2 => eig2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec(),
        _ => {
            let mut a = one_based(m);
            balance(&mut a, n);
            hessenberg(&mut a, n);
            hqr(&mut a, n)?
        }
    };
    eigs.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(Spectrum { eigenvalues: eigs })
}

/// True iff every eigenvalue has real part `< -margin`.
pub fn is_hurwitz<T: Real>(m: &Matrix<T>, margin: T) -> Result<bool> {
    if margin < T::zero() {
        return Err(Error::Parameter("stability margin must be non-negative".into()));
    }
    Ok(eigenvalues(m)?.max_real_part() < -margin)
}

fn eig2<T: Real>(a: T, b: T, c: T, d: T) -> [Complex<T>; 2] {
    let half = T::lit(0.5);
    let mean = half * (a + d);
    // (a - d)^2/4 + bc, computed without cancellation in the trace term
    let hd = half * (a - d);
    let disc = hd * hd + b * c;
    if disc >= T::zero() {
        let r = disc.sqrt();
        // avoid cancellation for the smaller-magnitude root
        let big = if mean >= T::zero() { mean + r } else { mean - r };
        let det = a * d - b * c;
        let small = if big != T::zero() { det / big } else { mean - r };
        let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
        [Complex::new(hi, T::zero()), Complex::new(lo, T::zero())]
    } else {
        let im = (-disc).sqrt();
        [Complex::new(mean, im), Complex::new(mean, -im)]
    }
}

type Work<T> = Vec<Vec<T>>;

fn one_based<T: Real>(m: &Matrix<T>) -> Work<T> {
    let n = m.rows();
    let mut a = vec![vec![T::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    a
}

fn balance<T: Real>(a: &mut Work<T>, n: usize) {
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let ginv = T::one() / f;
                    for j in 1..=n {
                        a[i][j] *= ginv;
                    }
                    for row in a.iter_mut().skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

/// Reduction to upper Hessenberg form by stabilized elementary similarity transforms.
fn hessenberg<T: Real>(a: &mut Work<T>, n: usize) {
    for m in 2..n {
        let mut x = T::zero();
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let tmp = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != T::zero() {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != T::zero() {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        let v = a[m][j];
                        a[i][j] -= y * v;
                    }
                    for row in a.iter_mut().skip(1) {
                        let v = row[i];
                        row[m] += y * v;
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..(i - 1) {
            a[i][j] = T::zero();
        }
    }
}

#[inline]
fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix (1-based storage) by shifted QR.
fn hqr<T: Real>(a: &mut Work<T>, n: usize) -> Result<Vec<Complex<T>>> {
    const MAX_ITS: usize = 60;
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];
    let mut anorm = T::zero();
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let half = T::lit(0.5);
    let mut nn = n as isize;
    let mut t = T::zero();
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = T::zero();
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = T::zero();
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = half * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != T::zero() {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = T::zero();
                    wi[nu] = T::zero();
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITS {
                return Err(Error::Numeric("QR eigenvalue iteration did not converge".into()));
            }
            if its % 10 == 0 && its > 0 {
                // exceptional shift
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1).skip(1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[i][i - 2] = T::zero();
                if i != m + 2 {
                    a[i][i - 3] = T::zero();
                }
            }
            let mut k = m;
            while k + 1 <= nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = T::zero();
                    if k != nu - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k != nu - 1 {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = nu.min(k + 3);
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        p = x * row[k] + y * row[k + 1];
                        if k != nu - 1 {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k + 1] -= p * q;
                        row[k] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Vec<T>> {
    m.ensure_square("symmetric eigenvalue input")?;
    m.ensure_finite("symmetric eigenvalue input")?;
    let n = m.rows();
    let mut a = m.symmetrize();
    let half = T::lit(0.5);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: T = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = half * (a[(q, q)] - a[(p, p)]) / apq;
                let t = sign(T::one(), theta) / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(eigs)
}

/// Largest singular value of `m`.
pub fn spectral_norm<T: Real>(m: &Matrix<T>) -> Result<T> {
    m.ensure_finite("spectral norm input")?;
    // Gram matrix on the smaller side
    let gram = if m.rows() >= m.cols() { m.transpose().matmul(m) } else { m.matmul(&m.transpose()) };
    let eigs = symmetric_eigenvalues(&gram)?;
    let top = eigs.last().copied().unwrap_or_else(T::zero);
    Ok(top.max(T::zero()).sqrt())
}
