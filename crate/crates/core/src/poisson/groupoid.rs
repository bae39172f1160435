//! The symplectic groupoid G×g* ⇉ g* and the map v into the double.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::LieContext;
use crate::linalg::{self, elem, expm, inv, max_abs};
use crate::poisson::tensors::{am_coords, pi_am_tensor};
use crate::poisson::triple::{dual_factorize, GStarTriple};
use crate::rmatrix::GValuedMap;
use crate::{Mat, C64};

/// Relative tolerance on β(h₁,x) = α(h₂,y) for multiplication.
pub const COMPOSABLE_TOL: f64 = 1e-9;

/// An arrow (h, x) with source x and target Ad_h x.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrow {
    pub h: Mat,
    pub x: Mat,
}

pub struct Groupoid<'a> {
    pub g: &'a dyn GValuedMap,
}

impl<'a> Groupoid<'a> {
    pub fn new(g: &'a dyn GValuedMap) -> Self {
        Self { g }
    }

    pub fn alpha(&self, a: &Arrow) -> Mat {
        a.x.clone()
    }

    pub fn beta(&self, a: &Arrow) -> Result<Mat> {
        Ok(&a.h * &a.x * inv(&a.h)?)
    }

    /// ε(x) = (g(x), x); its target is Ad_{g(x)}x.
    pub fn epsilon(&self, x: &Mat) -> Result<Arrow> {
        Ok(Arrow { h: self.g.eval(x)?, x: x.clone() })
    }

    /// (h₁, x)·(h₂, Ad_{h₁}x) = (h₂h₁, x).
    pub fn multiply(&self, a: &Arrow, b: &Arrow) -> Result<Arrow> {
        let t = self.beta(a)?;
        if max_abs(&(&t - &b.x)) > COMPOSABLE_TOL * max_abs(&t).max(1.0) {
            return Err(Error::NotComposable);
        }
        Ok(Arrow { h: &b.h * &a.h, x: a.x.clone() })
    }
}

/// ∂(h x h⁻¹)_b/∂z for every chart coordinate z = (vec h, vec x).
fn beta_gradients(h: &Mat, x: &Mat) -> Result<Vec<Vec<C64>>> {
    let n = h.nrows();
    let m = n * n;
    let hi = inv(h)?;
    let y = h * x * &hi;
    let mut cols: Vec<Mat> = Vec::with_capacity(2 * m);
    for a in 0..m {
        let e = elem(n, a / n, a % n);
        cols.push(&e * x * &hi - &y * &e * &hi);
    }
    for a in 0..m {
        let e = elem(n, a / n, a % n);
        cols.push(h * e * &hi);
    }
    Ok((0..m).map(|b| cols.iter().map(|c| c[(b / n, b % n)]).collect()).collect())
}

/// max_{a,b} |{α*x_a, β*y_b}| under π_AM at (h, x).
pub fn mixed_bracket_residual(ctx: &LieContext, h: &Mat, x: &Mat) -> Result<f64> {
    let m = ctx.dim();
    let p = pi_am_tensor(ctx, h, x)?;
    let grads = beta_gradients(h, x)?;
    let mut worst: f64 = 0.0;
    for a in 0..m {
        // ∇(α*x_a) is the unit vector at chart index m + a
        let row = p.row(m + a);
        for g in &grads {
            let v: C64 = row.iter().zip(g).map(|(p, q)| p * q).sum();
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

/// (g(x)h, g*(x)) with g(x)e^{x}g(x)⁻¹ = b₋b₊⁻¹, i.e. L(g*) = b₋ and R(g*) = b₊.
#[derive(Debug, Clone, Serialize)]
pub struct VImage {
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub gh: Mat,
    pub dual: GStarTriple,
    /// |g e^x g⁻¹ − b₋b₊⁻¹|.
    pub identity_residual: f64,
}

pub fn map_v(ctx: &LieContext, g: &dyn GValuedMap, h: &Mat, x: &Mat) -> Result<VImage> {
    let gx = g.eval(x)?;
    let m = &gx * expm(x) * inv(&gx)?;
    // b₋b₊⁻¹ = M  ⇔  (b₋⁻¹)⁻¹(b₊⁻¹) = M
    let dual = dual_factorize(ctx, &m)?.inverse()?;
    let identity_residual = max_abs(&(&m - &dual.b_minus * inv(&dual.b_plus)?));
    Ok(VImage { gh: gx * h, dual, identity_residual })
}

/// Chart point of an arrow, for the FD verifiers.
pub fn arrow_coords(a: &Arrow) -> Vec<C64> {
    am_coords(&a.h, &a.x)
}

pub fn is_diagonal_triple(t: &GStarTriple, tol: f64) -> bool {
    let off = |m: &Mat| {
        let mut w: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    w = w.max(m[(i, j)].norm());
                }
            }
        }
        w
    };
    off(&t.b_minus) <= tol && off(&t.b_plus) <= tol && linalg::is_diagonal(&t.lambda)
}
