//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::{Mat, C64};

/// Eigenvector matrices with condition number above this are rejected.
pub const COND_MAX: f64 = 1e8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> Mat {
    DMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> Mat {
    DMatrix::zeros(n, n)
}

/// Elementary matrix e_ij.
pub fn elem(n: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn diag(v: &[C64]) -> Mat {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

pub fn diag_of(m: &Mat) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

/// Largest entry modulus. This is the norm used for all residuals.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn trace(m: &Mat) -> C64 {
    m.trace()
}

pub fn is_diagonal(m: &Mat) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

pub fn inv(m: &Mat) -> Result<Mat> {
    let scale = max_abs(m);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::SingularValue);
    }
    let out = m.clone().try_inverse().ok_or(Error::SingularValue)?;
    if !out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::SingularValue);
    }
    Ok(out)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Row-major vectorization: entry (i,j) goes to slot i*n+j.
pub fn vec_rm(m: &Mat) -> DVector<C64> {
    let (r, cols) = m.shape();
    DVector::from_iterator(r * cols, (0..r).flat_map(|i| (0..cols).map(move |j| m[(i, j)])))
}

pub fn unvec_rm(v: &[C64], n: usize) -> Mat {
    DMatrix::from_row_slice(n, n, v)
}

pub fn expm(m: &Mat) -> Mat {
    m.clone().exp()
}

/// Principal square root by the Denman-Beavers iteration.
pub fn sqrtm(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = eye(n);
    for _ in 0..100 {
        let yi = inv(&y)?;
        let zi = inv(&z)?;
        let y1 = (&y + zi) * C64::new(0.5, 0.0);
        let z1 = (&z + yi) * C64::new(0.5, 0.0);
        let step = max_abs(&(&y1 - &y));
        y = y1;
        z = z1;
        if step <= 1e-15 * max_abs(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::LogBranch)
}

/// Principal logarithm by inverse scaling and squaring.
pub fn logm(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let ev = eigenvalues(a)?;
    for z in &ev {
        if z.norm() < 1e-300 || (z.im.abs() <= 1e-10 * z.norm() && z.re < 0.0) {
            return Err(Error::LogBranch);
        }
    }
    let id = eye(n);
    let mut x = a.clone();
    let mut s = 0u32;
    while max_abs(&(&x - &id)) > 0.2 {
        if s >= 60 {
            return Err(Error::LogBranch);
        }
        x = sqrtm(&x)?;
        s += 1;
    }
    // log x = 2 atanh(z), z = (x-1)(x+1)^-1
    let z = (&x - &id) * inv(&(&x + &id))?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..200 {
        term = &term * &z2;
        let add = &term * C64::new(1.0 / (2 * k + 1) as f64, 0.0);
        sum += &add;
        if max_abs(&add) <= 1e-18 * max_abs(&sum).max(1e-300) {
            break;
        }
    }
    Ok(sum * C64::new(2f64.powi(s as i32 + 1), 0.0))
}

pub fn eigenvalues(m: &Mat) -> Result<Vec<C64>> {
    if is_diagonal(m) {
        return Ok(diag_of(m));
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::NonDiagonalizable { cond: f64::INFINITY })?;
    let (_, t) = schur.unpack();
    Ok(diag_of(&t))
}

/// Eigendecomposition m = V diag(values) V^-1 with unit columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: Mat,
    pub inverse: Mat,
    pub cond: f64,
}

/// Eigendecomposition via complex Schur form and triangular back-substitution.
/// Defective matrices return `NonDiagonalizable`; the condition number of V is
/// reported and left to the caller to judge.
pub fn eig(m: &Mat) -> Result<Eigen> {
    let n = m.nrows();
    if is_diagonal(m) {
        return Ok(Eigen { values: diag_of(m), vectors: eye(n), inverse: eye(n), cond: 1.0 });
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::NonDiagonalizable { cond: f64::INFINITY })?;
    let (q, t) = schur.unpack();
    let scale = max_abs(&t).max(1e-300);
    let mut vt = zeros(n);
    for k in 0..n {
        vt[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * vt[(j, k)];
            }
            let d = t[(i, i)] - t[(k, k)];
            if d.norm() <= 1e-13 * scale {
                if s.norm() <= 1e-11 * scale {
                    vt[(i, k)] = C64::new(0.0, 0.0);
                } else {
                    return Err(Error::NonDiagonalizable { cond: f64::INFINITY });
                }
            } else {
                vt[(i, k)] = -s / d;
            }
        }
    }
    let mut v = q * vt;
    for k in 0..n {
        let nrm = v.column(k).norm();
        if nrm > 0.0 {
            v.column_mut(k).scale_mut(1.0 / nrm);
        }
    }
    let vi = inv(&v).map_err(|_| Error::NonDiagonalizable { cond: f64::INFINITY })?;
    let cond = v.norm() * vi.norm();
    Ok(Eigen { values: diag_of(&t), vectors: v, inverse: vi, cond })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat {
        DMatrix::from_row_slice(
            3,
            3,
            &[c(0.3, 0.1), c(-0.2, 0.05), c(0.1, 0.0), c(0.07, -0.2), c(-0.1, 0.3), c(0.2, 0.2), c(0.0, 0.1), c(0.15, 0.0), c(0.25, -0.1)],
        )
    }

    #[test]
    fn log_inverts_exp() {
        let x = sample();
        let back = logm(&expm(&x)).unwrap();
        assert!(max_abs(&(back - x)) < 1e-13);
    }

    #[test]
    fn log_of_rotation_far_from_identity() {
        let x = sample() * c(4.0, 0.0);
        let back = logm(&expm(&x)).unwrap();
        assert!(max_abs(&(expm(&back) - expm(&x))) < 1e-11);
    }

    #[test]
    fn log_rejects_negative_axis() {
        let m = diag(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(logm(&m), Err(Error::LogBranch));
    }

    #[test]
    fn eig_reconstructs() {
        let x = sample();
        let e = eig(&x).unwrap();
        let back = &e.vectors * diag(&e.values) * &e.inverse;
        assert!(max_abs(&(back - x)) < 1e-13);
        assert!(e.cond < 1e3);
    }

    #[test]
    fn eig_handles_repeated_semisimple() {
        let h = expm(&sample());
        let x = &h * diag(&[c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]) * inv(&h).unwrap();
        let e = eig(&x).unwrap();
        let back = &e.vectors * diag(&e.values) * &e.inverse;
        assert!(max_abs(&(back - x)) < 1e-12);
    }

    #[test]
    fn eig_rejects_jordan_block() {
        let j = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(eig(&j), Err(Error::NonDiagonalizable { .. })));
    }

    #[test]
    fn vec_roundtrip() {
        let x = sample();
        let v = vec_rm(&x);
        assert_eq!(v[1], x[(0, 1)]);
        assert_eq!(unvec_rm(v.as_slice(), 3), x);
    }
}
