//! Triples (b₋, b₊, Λ) in G* and the Gauss factorization behind them.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::LieContext;
use crate::linalg::{self, diag_of, expm, eye, inv, logm, max_abs};
use crate::{Mat, C64};

/// Pivots below this fraction of the matrix scale count as leaving the big cell.
pub const BIG_CELL_PIVOT: f64 = 1e-12;

/// A point of G*: b₋ in the negative Borel, b₊ in the positive one (for
/// `ctx`), with δ(b₋)δ(b₊) = 1 and δ(b₊) = e^{πiΛ}.
#[derive(Debug, Clone, Serialize)]
pub struct GStarTriple {
    #[serde(skip)]
    pub ctx: LieContext,
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub b_minus: Mat,
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub b_plus: Mat,
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub lambda: Mat,
}

impl GStarTriple {
    pub fn identity(ctx: &LieContext) -> Self {
        let n = ctx.n();
        Self { ctx: ctx.clone(), b_minus: eye(n), b_plus: eye(n), lambda: linalg::zeros(n) }
    }

    /// (e^{−πiΛ}, e^{πiΛ}, Λ) for diagonal Λ.
    pub fn from_diagonal(ctx: &LieContext, lambda: &Mat) -> Self {
        let pi_i = C64::new(0.0, PI);
        Self {
            ctx: ctx.clone(),
            b_minus: expm(&(lambda * -pi_i)),
            b_plus: expm(&(lambda * pi_i)),
            lambda: lambda.clone(),
        }
    }

    /// Worst violation among triangularity, δ(b₋)δ(b₊) = 1 and δ(b₊) = e^{πiΛ}.
    pub fn membership_residual(&self) -> f64 {
        let n = self.ctx.n();
        let mut worst: f64 = 0.0;
        for (i, j) in self.ctx.roots() {
            if self.ctx.is_positive(i, j) {
                worst = worst.max(self.b_minus[(i, j)].norm());
            } else {
                worst = worst.max(self.b_plus[(i, j)].norm());
            }
        }
        for i in 0..n {
            let prod = self.b_minus[(i, i)] * self.b_plus[(i, i)];
            worst = worst.max((prod - 1.0).norm());
            let target = (self.lambda[(i, i)] * C64::new(0.0, PI)).exp();
            worst = worst.max((self.b_plus[(i, i)] - target).norm());
            for j in 0..n {
                if j != i {
                    worst = worst.max(self.lambda[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// b₋⁻¹b₊.
    pub fn product(&self) -> Result<Mat> {
        Ok(inv(&self.b_minus)? * &self.b_plus)
    }

    /// Group inverse in G*: (b₋⁻¹, b₊⁻¹, −Λ).
    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            ctx: self.ctx.clone(),
            b_minus: inv(&self.b_minus)?,
            b_plus: inv(&self.b_plus)?,
            lambda: -&self.lambda,
        })
    }
}

/// M = L·D·U with L, U unit lower and upper triangular. Doolittle without pivoting.
fn ldu(m: &Mat) -> Result<(Mat, Vec<C64>, Mat)> {
    let n = m.nrows();
    let scale = max_abs(m).max(1e-300);
    let mut l = eye(n);
    let mut u = m.clone();
    for k in 0..n {
        let p = u[(k, k)];
        if p.norm() <= BIG_CELL_PIVOT * scale || !p.is_finite() {
            return Err(Error::OutsideBigCell);
        }
        for i in k + 1..n {
            let f = u[(i, k)] / p;
            l[(i, k)] = f;
            for j in k..n {
                let s = u[(k, j)];
                u[(i, j)] -= f * s;
            }
        }
    }
    let d = diag_of(&u);
    for i in 0..n {
        let di = d[i];
        for j in i..n {
            u[(i, j)] /= di;
        }
    }
    Ok((l, d, u))
}

/// Balanced Gauss factorization M = b₋⁻¹b₊ with respect to the positive system of `ctx`.
///
/// b₋ = D^{−1/2}L⁻¹ and b₊ = D^{1/2}U in the ordered frame, principal square
/// roots, and Λ = Log(D)/(2πi) so that δ(b₊) = e^{πiΛ}.
pub fn dual_factorize(ctx: &LieContext, m: &Mat) -> Result<GStarTriple> {
    let p = ctx.permutation();
    let pm = &p * m * p.transpose();
    let (l, d, u) = ldu(&pm)?;
    let n = ctx.n();
    let mut sqrt_d = linalg::zeros(n);
    let mut inv_sqrt_d = linalg::zeros(n);
    let mut lam = linalg::zeros(n);
    for k in 0..n {
        let s = d[k].sqrt();
        sqrt_d[(k, k)] = s;
        inv_sqrt_d[(k, k)] = 1.0 / s;
        lam[(k, k)] = d[k].ln() / C64::new(0.0, 2.0 * PI);
    }
    let bm = inv_sqrt_d * inv(&l)?;
    let bp = sqrt_d * u;
    let pt = p.transpose();
    Ok(GStarTriple {
        ctx: ctx.clone(),
        b_minus: &pt * bm * &p,
        b_plus: &pt * bp * &p,
        lambda: &pt * lam * &p,
    })
}

/// Tangent of the factorization: (δb₋, δb₊) induced by δM at M = b₋⁻¹b₊.
///
/// With Y = b₋ δM b₊⁻¹, δb₊·b₊⁻¹ is the positive part of Y plus half its
/// diagonal and δb₋·b₋⁻¹ is minus the negative part minus half the diagonal.
pub fn factorization_tangent(t: &GStarTriple, dm: &Mat) -> Result<(Mat, Mat)> {
    let n = t.ctx.n();
    let y = &t.b_minus * dm * inv(&t.b_plus)?;
    let mut up = linalg::zeros(n);
    let mut lo = linalg::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                up[(i, i)] = y[(i, i)] * 0.5;
                lo[(i, i)] = y[(i, i)] * 0.5;
            } else if t.ctx.is_positive(i, j) {
                up[(i, j)] = y[(i, j)];
            } else {
                lo[(i, j)] = y[(i, j)];
            }
        }
    }
    Ok((-(lo * &t.b_minus), up * &t.b_plus))
}

/// The map I: g* → G*, e^{x} = b₋⁻¹b₊.
///
/// L(I(x)) is taken to be b₋ and R(I(x)) to be b₊.
pub fn map_i(ctx: &LieContext, x: &Mat) -> Result<GStarTriple> {
    dual_factorize(ctx, &expm(x))
}

/// x = Log(b₋⁻¹b₊), principal branch.
pub fn map_i_inverse(t: &GStarTriple) -> Result<Mat> {
    logm(&t.product()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag};

    fn sample(n: usize, s: f64) -> Mat {
        Mat::from_fn(n, n, |i, j| c(0.3 * (i as f64 + 1.0) - 0.2 * j as f64, 0.1 * (i * j) as f64 - 0.15) * s)
    }

    #[test]
    fn identity_factors_trivially() {
        let ctx = LieContext::new(3);
        let t = dual_factorize(&ctx, &eye(3)).unwrap();
        assert!(max_abs(&(&t.b_minus - eye(3))) < 1e-15);
        assert!(max_abs(&(&t.b_plus - eye(3))) < 1e-15);
        assert!(max_abs(&t.lambda) < 1e-15);
    }

    #[test]
    fn diagonal_factorization() {
        let ctx = LieContext::new(2);
        let d = diag(&[c(0.1, 0.02), c(-0.07, 0.05)]);
        let m = expm(&(&d * C64::new(0.0, 2.0 * PI)));
        let t = dual_factorize(&ctx, &m).unwrap();
        assert!(max_abs(&(&t.lambda - &d)) < 1e-14);
        assert!(max_abs(&(&t.b_plus - expm(&(&d * C64::new(0.0, PI))))) < 1e-14);
    }

    #[test]
    fn round_trip_in_any_order() {
        for order in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]] {
            let ctx = LieContext::with_order(order).unwrap();
            let m = expm(&sample(3, 0.5));
            let t = dual_factorize(&ctx, &m).unwrap();
            assert!(max_abs(&(t.product().unwrap() - &m)) < 1e-12);
            assert!(t.membership_residual() < 1e-12);
        }
    }

    #[test]
    fn big_cell_boundary_is_rejected() {
        let ctx = LieContext::new(2);
        let m = Mat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(dual_factorize(&ctx, &m).unwrap_err(), Error::OutsideBigCell);
        let opp = ctx.opposite();
        assert_eq!(dual_factorize(&opp, &m).unwrap_err(), Error::OutsideBigCell);
    }

    #[test]
    fn tangent_matches_difference_quotient() {
        let ctx = LieContext::with_order(vec![1, 0, 2]).unwrap();
        let m = expm(&sample(3, 0.4));
        let dm = sample(3, 1.0).transpose();
        let t = dual_factorize(&ctx, &m).unwrap();
        let (dbm, dbp) = factorization_tangent(&t, &dm).unwrap();
        let h = 1e-6;
        let tp = dual_factorize(&ctx, &(&m + &dm * C64::new(h, 0.0))).unwrap();
        let tm = dual_factorize(&ctx, &(&m - &dm * C64::new(h, 0.0))).unwrap();
        let fd_m = (&tp.b_minus - &tm.b_minus) / C64::new(2.0 * h, 0.0);
        let fd_p = (&tp.b_plus - &tm.b_plus) / C64::new(2.0 * h, 0.0);
        assert!(max_abs(&(fd_m - dbm)) < 1e-8);
        assert!(max_abs(&(fd_p - dbp)) < 1e-8);
    }

    #[test]
    fn map_i_round_trip() {
        let ctx = LieContext::new(3);
        let x = sample(3, 0.3);
        let back = map_i_inverse(&map_i(&ctx, &x).unwrap()).unwrap();
        assert!(max_abs(&(back - x)) < 1e-12);
    }
}
