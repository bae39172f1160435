//! Finite-difference verifiers: Jacobi identity, Poisson maps, pushforwards.

use rayon::prelude::*;

use crate::error::Result;
use crate::fd::{derivative, FdScheme};
use crate::lie::LieContext;
use crate::linalg::{self, inv, max_abs};
use crate::poisson::tensors::{chart_bivector, sigma_coords, split_sigma_coords, ChartTerms, TensorField};
use crate::rmatrix::GValuedMap;
use crate::{Mat, C64};

/// max_{i,j,k} |Σ_l π^{il}∂_lπ^{jk} + cyclic|.
pub fn jacobi_residual(field: &dyn TensorField, z: &[C64], scheme: FdScheme) -> Result<f64> {
    scheme.check()?;
    let d = field.dim();
    let p = field.eval(z)?;
    let dp: Result<Vec<Mat>> = (0..d)
        .into_par_iter()
        .map(|l| {
            derivative(
                |t| {
                    let mut w = z.to_vec();
                    w[l] += t;
                    field.eval(&w)
                },
                scheme,
            )
        })
        .collect();
    let dp = dp?;
    // s[i][j][k] = Σ_l P[i,l] dP_l[j,k]
    let mut s = vec![C64::new(0.0, 0.0); d * d * d];
    for i in 0..d {
        for (l, dpl) in dp.iter().enumerate() {
            let pil = p[(i, l)];
            if pil == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    s[(i * d + j) * d + k] += pil * dpl[(j, k)];
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let v = s[(i * d + j) * d + k] + s[(j * d + k) * d + i] + s[(k * d + i) * d + j];
                worst = worst.max(v.norm());
            }
        }
    }
    Ok(worst)
}

/// FD Jacobian ∂f_i/∂z_j of a chart map.
pub fn jacobian<F>(f: &F, z: &[C64], scheme: FdScheme) -> Result<Mat>
where
    F: Fn(&[C64]) -> Result<Vec<C64>> + Sync,
{
    scheme.check()?;
    let cols: Result<Vec<Vec<C64>>> = (0..z.len())
        .into_par_iter()
        .map(|l| {
            derivative(
                |t| {
                    let mut w = z.to_vec();
                    w[l] += t;
                    f(&w)
                },
                scheme,
            )
        })
        .collect();
    let cols = cols?;
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(Mat::from_fn(rows, z.len(), |i, j| cols[j][i]))
}

/// f(z) and J·π_src(z)·Jᵀ.
pub fn pushforward<F>(f: &F, src: &dyn TensorField, z: &[C64], scheme: FdScheme) -> Result<(Vec<C64>, Mat)>
where
    F: Fn(&[C64]) -> Result<Vec<C64>> + Sync,
{
    let j = jacobian(f, z, scheme)?;
    let p = src.eval(z)?;
    Ok((f(z)?, &j * p * j.transpose()))
}

/// Least-squares κ with push ≈ κ·target.
pub fn calibrate_scale(push: &Mat, target: &Mat) -> C64 {
    let num: C64 = target.iter().zip(push.iter()).map(|(t, p)| t.conj() * p).sum();
    let den: f64 = target.iter().map(|t| t.norm_sqr()).sum();
    if den == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapResidual {
    pub residual: f64,
    /// The scale that would have fit this point alone.
    pub local_kappa: C64,
}

/// ‖J·π_src·Jᵀ − κ·π_dst(f(z))‖.
pub fn poisson_map_residual<F>(
    f: &F,
    src: &dyn TensorField,
    dst: &dyn TensorField,
    z: &[C64],
    kappa: C64,
    scheme: FdScheme,
) -> Result<MapResidual>
where
    F: Fn(&[C64]) -> Result<Vec<C64>> + Sync,
{
    let (w, push) = pushforward(f, src, z, scheme)?;
    let target = dst.eval(&w)?;
    Ok(MapResidual { residual: max_abs(&(&push - &target * kappa)), local_kappa: calibrate_scale(&push, &target) })
}

/// F_g(h, λ) = (g(Ad_h λ)·h, λ) in the Σ chart.
pub fn f_g_coords(g: &dyn GValuedMap, z: &[C64]) -> Result<Vec<C64>> {
    let n = g.n();
    let (h, lam) = split_sigma_coords(z, n);
    let x = &h * linalg::diag(&lam) * inv(&h)?;
    let gh = g.eval(&x)? * &h;
    Ok(sigma_coords(&gh, &lam))
}

/// F'_g(h, λ) = (g(2πi·Ad_h λ)·h, λ) in the chart of Σ'.
pub fn f_prime_g(g: &dyn GValuedMap, h: &Mat, lambda: &[C64]) -> Result<(Mat, Vec<C64>)> {
    let x = h * linalg::diag(lambda) * inv(h)? * C64::new(0.0, std::f64::consts::TAU);
    Ok((g.eval(&x)? * h, lambda.to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushforwardResidual {
    pub residual: f64,
    pub local_kappa: C64,
}

/// ‖(F_g)_*π_Σ − κ·π_r‖ at (h, λ); `ctx` carries the positive system of r₀.
pub fn pushforward_residual(
    ctx: &LieContext,
    g: &dyn GValuedMap,
    h: &Mat,
    lambda: &[C64],
    kappa: C64,
    scheme: FdScheme,
) -> Result<PushforwardResidual> {
    let z = sigma_coords(h, lambda);
    let f = |w: &[C64]| f_g_coords(g, w);
    let src = SigmaSource(ctx.clone());
    let (w, push) = pushforward(&f, &src, &z, scheme)?;
    let (hp, lp) = split_sigma_coords(&w, ctx.n());
    let target = chart_bivector(ctx, &hp, &lp, ChartTerms::PI_R)?;
    Ok(PushforwardResidual {
        residual: max_abs(&(&push - &target * kappa)),
        local_kappa: calibrate_scale(&push, &target),
    })
}

struct SigmaSource(LieContext);

impl TensorField for SigmaSource {
    fn name(&self) -> String {
        "pi_sigma".into()
    }
    fn dim(&self) -> usize {
        self.0.dim() + self.0.n()
    }
    fn eval(&self, z: &[C64]) -> Result<Mat> {
        let (h, lam) = split_sigma_coords(z, self.0.n());
        chart_bivector(&self.0, &h, &lam, ChartTerms::PI_SIGMA)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eye};
    use crate::poisson::tensors::{Kks, Sts};
    use crate::rmatrix::ConstantMap;

    #[test]
    fn kks_jacobi_is_exact() {
        let z: Vec<C64> = (0..9).map(|k| c(0.1 * k as f64 - 0.3, 0.05 * (k % 4) as f64)).collect();
        let r = jacobi_residual(&Kks { n: 3 }, &z, FdScheme::default()).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn identity_map_is_poisson_for_kks() {
        let z: Vec<C64> = (0..4).map(|k| c(0.2 - 0.1 * k as f64, 0.03 * k as f64)).collect();
        let f = |w: &[C64]| Ok(w.to_vec());
        let r = poisson_map_residual(&f, &Kks { n: 2 }, &Kks { n: 2 }, &z, c(1.0, 0.0), FdScheme::default()).unwrap();
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn sts_jacobi_small() {
        let ctx = LieContext::new(2);
        let z = vec![c(0.2, 0.1), c(-0.13, 0.05), c(0.07, -0.2), c(-0.11, 0.03)];
        let r = jacobi_residual(&Sts { ctx }, &z, FdScheme::default()).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn abelian_pushforward_is_trivial() {
        let ctx = LieContext::new(1);
        let g = ConstantMap(eye(1));
        let h = Mat::from_element(1, 1, c(0.8, 0.3));
        let r = pushforward_residual(&ctx, &g, &h, &[c(0.3, 0.1)], c(1.0, 0.0), FdScheme::default()).unwrap();
        assert!(r.residual < 1e-12);
    }
}
