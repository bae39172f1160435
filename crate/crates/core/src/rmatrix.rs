//! φ, the Alekseev–Meinrenken r-matrix, CDYBE residuals and the gauge
//! transformation equation for maps g* → G.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fd::{derivative, FdScheme};
use crate::lie::{scalar_function_of_ad, LieContext};
use crate::linalg::{self, inv, max_abs};
use crate::tensor::{casimir, cybe, standard_r0, ThreeTensor, TwoTensor};
use crate::{Mat, C64};

/// Below this modulus φ is evaluated by its Taylor series.
pub const PHI_CROSSOVER: f64 = 0.5;
/// Distance to 2πik (k ≠ 0) inside which φ reports a pole.
pub const POLE_GUARD: f64 = 1e-6;

// B_{2k}/(2k)!, k = 1..12
const PHI_SERIES: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
];

/// Rejects z within `POLE_GUARD` of 2πik, k ≠ 0.
pub fn check_pole(z: C64) -> Result<()> {
    let k = (z.im / (2.0 * PI)).round();
    if k != 0.0 && (z - C64::new(0.0, 2.0 * PI * k)).norm() < POLE_GUARD {
        return Err(Error::PoleHit { z });
    }
    Ok(())
}

/// coth, stable for large |Re w|.
pub fn coth(w: C64) -> C64 {
    if w.re < 0.0 {
        return -coth(-w);
    }
    let e = (-2.0 * w).exp();
    (1.0 + e) / (1.0 - e)
}

pub fn phi_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut acc = C64::new(0.0, 0.0);
    for &c in PHI_SERIES.iter().rev() {
        acc = acc * z2 + c;
    }
    acc * z
}

pub fn phi_closed(z: C64) -> C64 {
    -1.0 / z + 0.5 * coth(z / 2.0)
}

/// φ(z) = −1/z + ½coth(z/2).
pub fn phi(z: C64) -> Result<C64> {
    check_pole(z)?;
    if z.norm() < PHI_CROSSOVER {
        Ok(phi_series(z))
    } else {
        Ok(phi_closed(z))
    }
}

/// (z/2)coth(z/2), even with value 1 at 0.
pub fn half_z_coth(z: C64) -> Result<C64> {
    check_pole(z)?;
    if z.norm() < PHI_CROSSOVER {
        // 1/z + φ(z) = ½coth(z/2)
        Ok(1.0 + z * phi_series(z))
    } else {
        Ok(z / 2.0 * coth(z / 2.0))
    }
}

/// r_AM(x) = (id ⊗ φ(ad_x))(t).
pub fn r_am(ctx: &LieContext, x: &Mat) -> Result<TwoTensor> {
    let op = scalar_function_of_ad(phi, x)?;
    Ok(casimir(ctx).apply_right(&op))
}

pub trait DynamicalRMatrix: Sync {
    fn n(&self) -> usize;
    fn eval(&self, x: &Mat) -> Result<TwoTensor>;
    fn in_domain(&self, x: &Mat) -> bool {
        self.eval(x).is_ok()
    }
}

/// r_AM + s·t.
#[derive(Debug, Clone)]
pub struct AlekseevMeinrenken {
    pub ctx: LieContext,
    pub casimir_shift: f64,
}

impl AlekseevMeinrenken {
    pub fn new(ctx: LieContext) -> Self {
        Self { ctx, casimir_shift: 0.0 }
    }

    /// r_AM + t/2, the classical dynamical r-matrix.
    pub fn with_half_casimir(ctx: LieContext) -> Self {
        Self { ctx, casimir_shift: 0.5 }
    }
}

impl DynamicalRMatrix for AlekseevMeinrenken {
    fn n(&self) -> usize {
        self.ctx.n()
    }
    fn eval(&self, x: &Mat) -> Result<TwoTensor> {
        let r = r_am(&self.ctx, x)?;
        if self.casimir_shift == 0.0 {
            return Ok(r);
        }
        Ok(r + casimir(&self.ctx) * self.casimir_shift)
    }
}

/// A field with no dynamics.
#[derive(Debug, Clone)]
pub struct ConstantR(pub TwoTensor);

impl DynamicalRMatrix for ConstantR {
    fn n(&self) -> usize {
        self.0.n
    }
    fn eval(&self, _x: &Mat) -> Result<TwoTensor> {
        Ok(self.0.clone())
    }
}

/// Per-direction step h·max(1, ‖x‖).
pub fn scaled_scheme(scheme: FdScheme, x: &Mat) -> FdScheme {
    FdScheme { step: scheme.step * max_abs(x).max(1.0), ..scheme }
}

/// dr = Σ_a e_a ⊗ ∂r/∂ξ^a, where ξ^a moves x along the trace-dual of e_a.
pub fn dynamical_differential(r: &dyn DynamicalRMatrix, x: &Mat, scheme: FdScheme) -> Result<ThreeTensor> {
    let n = r.n();
    let ctx = LieContext::new(n);
    let s = scaled_scheme(scheme, x);
    let parts: Result<Vec<ThreeTensor>> = (0..n * n)
        .into_par_iter()
        .map(|a| {
            let dir = ctx.basis(ctx.dual_index(a));
            let d = derivative(|t| r.eval(&(x + &dir * C64::new(t, 0.0))), s)?;
            Ok(ThreeTensor::first_slot(&ctx.basis(a), &d))
        })
        .collect();
    Ok(parts?.into_iter().fold(ThreeTensor::zeros(n), |acc, t| acc + t))
}

/// Left side of the CDYBE.
///
/// With the trace-form identification g* ≅ g and dr as in
/// [`dynamical_differential`], the equation reads CYB(r) − ½·Alt(dr) = 0,
/// where Alt is the unnormalized six-term sum.
pub fn cdybe_residual(r: &dyn DynamicalRMatrix, x: &Mat, scheme: FdScheme) -> Result<ThreeTensor> {
    let dr = dynamical_differential(r, x, scheme)?;
    Ok(cybe(&r.eval(x)?) - dr.alt() * 0.5)
}

/// A map g* → G, possibly expensive to evaluate.
pub trait GValuedMap: Sync {
    fn n(&self) -> usize;
    fn eval(&self, x: &Mat) -> Result<Mat>;
    /// Derivative of g at x along `dir`.
    fn partial(&self, x: &Mat, dir: &Mat, scheme: FdScheme) -> Result<Mat> {
        derivative(|t| self.eval(&(x + dir * C64::new(t, 0.0))), scheme)
    }
}

#[derive(Debug, Clone)]
pub struct ConstantMap(pub Mat);

impl GValuedMap for ConstantMap {
    fn n(&self) -> usize {
        self.0.nrows()
    }
    fn eval(&self, _x: &Mat) -> Result<Mat> {
        Ok(self.0.clone())
    }
    fn partial(&self, _x: &Mat, _dir: &Mat, _scheme: FdScheme) -> Result<Mat> {
        Ok(Mat::zeros(self.0.nrows(), self.0.nrows()))
    }
}

/// Wraps a closure as a map g* → G.
pub struct FnMap<F> {
    pub n: usize,
    pub f: F,
}

impl<F> GValuedMap for FnMap<F>
where
    F: Fn(&Mat) -> Result<Mat> + Sync,
{
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &Mat) -> Result<Mat> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone)]
pub struct GaugeTerms {
    /// Σ_a g⁻¹∂_{ξ^a}g ⊗ e_a.
    pub d: TwoTensor,
    /// (Ad_g⁻¹ ⊗ Ad_g⁻¹) r₀.
    pub conjugated_r0: TwoTensor,
    /// Σ_{a,b} ⟨x, [e_a, e_b]⟩ U_a ⊗ U_b with U_a = g⁻¹∂_{ξ^a}g.
    pub bracket_term: TwoTensor,
    pub lhs: TwoTensor,
}

/// g⁻¹∂_{ξ^a}g for every basis index a.
pub fn log_partials(g: &dyn GValuedMap, x: &Mat, scheme: FdScheme) -> Result<(Mat, Vec<Mat>)> {
    let n = g.n();
    let ctx = LieContext::new(n);
    let g0 = g.eval(x)?;
    let gi = inv(&g0)?;
    let s = scaled_scheme(scheme, x);
    let us: Result<Vec<Mat>> = (0..n * n)
        .into_par_iter()
        .map(|a| {
            let dir = ctx.basis(ctx.dual_index(a));
            Ok(&gi * g.partial(x, &dir, s)?)
        })
        .collect();
    Ok((g0, us?))
}

/// Left side of the gauge transformation equation.
///
/// D − flip(D) + (Ad_g⁻¹⊗Ad_g⁻¹)r₀ − Σ⟨x,[e_a,e_b]⟩U_a⊗U_b. The last term
/// is the pairing of x with the third slot of [g₁⁻¹d₃g₁, g₂⁻¹d₃g₂]; its sign
/// follows from the coordinate convention for ξ^a and is pinned by the
/// exact solution C_{2πi}.
pub fn gauge_lhs(ctx: &LieContext, g: &dyn GValuedMap, x: &Mat, scheme: FdScheme) -> Result<GaugeTerms> {
    scheme.check()?;
    let n = ctx.n();
    let (g0, us) = log_partials(g, x, scheme)?;
    let mut d = TwoTensor::zeros(n);
    for (a, u) in us.iter().enumerate() {
        d = d + TwoTensor::pure(u, &ctx.basis(a));
    }
    let conjugated_r0 = standard_r0(ctx).conjugate(&inv(&g0)?)?;
    let mut bracket_term = TwoTensor::zeros(n);
    for a in 0..n * n {
        for b in 0..n * n {
            let c = ctx.pairing(x, &linalg::commutator(&ctx.basis(a), &ctx.basis(b)));
            if c != C64::new(0.0, 0.0) {
                bracket_term = bracket_term + TwoTensor::pure(&us[a], &us[b]) * c;
            }
        }
    }
    let lhs = d.clone() - d.flip() + conjugated_r0.clone() - bracket_term.clone();
    Ok(GaugeTerms { d, conjugated_r0, bracket_term, lhs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeResidual {
    pub residual: f64,
    pub residual_half: f64,
    /// residual / residual_half.
    pub ratio: f64,
}

/// ‖gauge_lhs − r_AM‖ at step h and h/2.
pub fn gauge_residual(ctx: &LieContext, g: &dyn GValuedMap, x: &Mat, scheme: FdScheme) -> Result<GaugeResidual> {
    let target = r_am(ctx, x)?;
    let residual = (gauge_lhs(ctx, g, x, scheme)?.lhs - target.clone()).max_abs();
    let residual_half = (gauge_lhs(ctx, g, x, scheme.halved())?.lhs - target).max_abs();
    Ok(GaugeResidual { residual, residual_half, ratio: residual / residual_half })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, elem};

    #[test]
    fn phi_crossover_agrees() {
        for k in 0..16 {
            let th = k as f64 * PI / 8.0;
            let z = C64::from_polar(PHI_CROSSOVER, th);
            assert!((phi_series(z) - phi_closed(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn phi_reference_value() {
        // high-precision value at 0.5 + 0.2i
        let z = c(0.5, 0.2);
        let want = c(0.041_575_910_689_069_686, 0.016_470_855_432_829_666);
        assert!((phi(z).unwrap() - want).norm() < 1e-15);
        assert!((phi(c(0.0, PI)).unwrap() - c(0.0, 1.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn phi_pole() {
        assert!(matches!(phi(c(0.0, 2.0 * PI)), Err(Error::PoleHit { .. })));
        assert!(phi(c(0.0, 2.0 * PI + 1e-3)).is_ok());
    }

    #[test]
    fn r_am_gl2_diagonal() {
        let ctx = LieContext::new(2);
        let a = c(0.3, 0.1);
        let r = r_am(&ctx, &diag(&[a, -a])).unwrap();
        // ad_x e₂₁ = −2a e₂₁, so φ(−2a) sits on e₁₂⊗e₂₁
        let want = TwoTensor::pure(&elem(2, 0, 1), &elem(2, 1, 0)) * phi(-a * 2.0).unwrap()
            + TwoTensor::pure(&elem(2, 1, 0), &elem(2, 0, 1)) * phi(a * 2.0).unwrap();
        assert!((r - want).max_abs() < 1e-15);
    }

    #[test]
    fn constant_map_gauge_lhs_is_conjugation() {
        let ctx = LieContext::new(2);
        let g0 = linalg::expm(&Mat::from_row_slice(2, 2, &[c(0.1, 0.2), c(0.3, 0.0), c(-0.2, 0.1), c(0.05, -0.1)]));
        let x = Mat::from_row_slice(2, 2, &[c(0.1, 0.0), c(0.2, 0.1), c(0.0, 0.3), c(-0.1, 0.0)]);
        let terms = gauge_lhs(&ctx, &ConstantMap(g0.clone()), &x, FdScheme::default()).unwrap();
        let want = standard_r0(&ctx).conjugate(&inv(&g0).unwrap()).unwrap();
        assert!((terms.lhs - want).max_abs() < 1e-15);
    }
}
