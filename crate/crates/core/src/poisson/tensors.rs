//! Poisson bivectors in chart coordinates.
//!
//! Charts: g* uses the n² matrix entries of x (row-major); G×g* uses the
//! entries of h followed by those of x; G×t' uses the entries of h followed
//! by the n diagonal entries of λ. A bivector is the antisymmetric matrix
//! P[i,j] = {z_i, z_j}.

use crate::error::{Error, Result};
use crate::lie::{scalar_function_of_ad, GOperator, LieContext};
use crate::linalg::{self, elem, eye, kron, vec_rm};
use crate::rmatrix::{half_z_coth, phi, r_am};
use crate::tensor::{casimir, standard_r0};
use crate::{Mat, C64};

/// Roots closer to zero than this make λ leave t'.
pub const TPRIME_MARGIN: f64 = 1e-6;

/// A bivector field evaluated pointwise in chart coordinates.
pub trait TensorField: Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn eval(&self, z: &[C64]) -> Result<Mat>;
}

/// max |P + Pᵀ|.
pub fn antisymmetry_defect(p: &Mat) -> f64 {
    linalg::max_abs(&(p + p.transpose()))
}

/// {x_pq, x_ru} = ⟨x, [e_qp, e_ur]⟩.
pub fn kks_tensor(x: &Mat) -> Mat {
    let n = x.nrows();
    let mut p = Mat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    // x[e_ba, e_dc] traced: e_ba e_dc = δ_ad e_bc
                    let mut v = C64::new(0.0, 0.0);
                    if a == d {
                        v += x[(c, b)];
                    }
                    if c == b {
                        v -= x[(a, d)];
                    }
                    p[(a * n + b, c * n + d)] = v;
                }
            }
        }
    }
    p
}

/// (ad_x ⊗ f(ad_x))t − (ad_x ⊗ ad_x)r₀ with f(z) = (z/2)coth(z/2).
pub fn sts_tensor(ctx: &LieContext, x: &Mat) -> Result<Mat> {
    let adx = GOperator::ad(x);
    let f = scalar_function_of_ad(half_z_coth, x)?;
    let first = casimir(ctx).apply_right(&f).apply_left(&adx);
    let second = standard_r0(ctx).apply_left(&adx).apply_right(&adx);
    Ok((first - second).coeffs)
}

/// Which pieces of π_AM to include; everything but the negative controls uses all of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmTerms {
    pub kks: bool,
    pub theta: bool,
    pub r_am: bool,
    pub r0: bool,
}

impl AmTerms {
    pub const ALL: AmTerms = AmTerms { kks: true, theta: true, r_am: true, r0: true };
}

/// π_KKS(x) + l_h(θ) + l_h(r_AM(x)) − r_h(r₀) on G×g*.
pub fn pi_am_tensor(ctx: &LieContext, h: &Mat, x: &Mat) -> Result<Mat> {
    pi_am_tensor_with(ctx, h, x, AmTerms::ALL)
}

pub fn pi_am_tensor_with(ctx: &LieContext, h: &Mat, x: &Mat, terms: AmTerms) -> Result<Mat> {
    let n = ctx.n();
    let m = n * n;
    let mut p = Mat::zeros(2 * m, 2 * m);
    if terms.kks {
        p.view_mut((m, m), (m, m)).copy_from(&kks_tensor(x));
    }
    // vec(h e) = kron(h, 1) vec(e), vec(e h) = kron(1, hᵀ) vec(e)
    let left = kron(h, &eye(n));
    let right = kron(&eye(n), &h.transpose());
    if terms.theta {
        // θ = Σ_a ∂/∂x^a ∧ e_a, where x^a for e_a = e_ij is the entry x_ji
        for a in 0..m {
            let row = m + ctx.dual_index(a);
            for k in 0..m {
                let w = left[(k, a)];
                p[(row, k)] += w;
                p[(k, row)] -= w;
            }
        }
    }
    let mut block = Mat::zeros(m, m);
    if terms.r_am {
        block += &left * r_am(ctx, x)?.coeffs * left.transpose();
    }
    if terms.r0 {
        block -= &right * standard_r0(ctx).coeffs * right.transpose();
    }
    let mut view = p.view_mut((0, 0), (m, m));
    view += block;
    Ok(p)
}

/// Signs of the pieces of a bivector on G×t'.
///
/// `theta` = +1 puts ∂/∂λ_i first, i.e. {λ_i, h_kl} = (h e_ii)_kl; −1 is the
/// opposite orientation. `ad_inverse` and `phi` multiply 1/(λ_j−λ_i) and
/// φ(λ_j−λ_i) on l_h(e_ij)⊗l_h(e_ji); `r0` multiplies −r_h(r₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartTerms {
    pub theta: f64,
    pub ad_inverse: f64,
    pub phi: f64,
    pub r0: f64,
}

impl ChartTerms {
    /// π_r: θ + l_h(id⊗ad⁻¹_λ)t + l_h r_AM(λ) − r_h r₀.
    pub const PI_R: ChartTerms = ChartTerms { theta: 1.0, ad_inverse: 1.0, phi: 1.0, r0: 1.0 };
    /// π on Σ: θ + l_h(id⊗ad⁻¹_λ)t.
    pub const PI_SIGMA: ChartTerms = ChartTerms { theta: 1.0, ad_inverse: 1.0, phi: 0.0, r0: 0.0 };
    /// π on Σ with θ in the opposite orientation; ω_Σ is its inverse.
    pub const PI_SIGMA_DUAL: ChartTerms = ChartTerms { theta: -1.0, ad_inverse: 1.0, phi: 0.0, r0: 0.0 };
}

/// Rejects λ with a root value closer than `TPRIME_MARGIN` to zero.
pub fn check_tprime(lambda: &[C64]) -> Result<()> {
    let mut margin = f64::INFINITY;
    for i in 0..lambda.len() {
        for j in 0..lambda.len() {
            if i != j {
                margin = margin.min((lambda[i] - lambda[j]).norm());
            }
        }
    }
    if margin < TPRIME_MARGIN {
        return Err(Error::TPrimeViolation { margin });
    }
    Ok(())
}

pub fn chart_bivector(ctx: &LieContext, h: &Mat, lambda: &[C64], terms: ChartTerms) -> Result<Mat> {
    let n = ctx.n();
    let m = n * n;
    check_tprime(lambda)?;
    let mut p = Mat::zeros(m + n, m + n);
    for i in 0..n {
        let v = vec_rm(&(h * elem(n, i, i)));
        for k in 0..m {
            p[(m + i, k)] += v[k] * terms.theta;
            p[(k, m + i)] -= v[k] * terms.theta;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = lambda[j] - lambda[i];
            let mut c = C64::new(terms.ad_inverse, 0.0) / d;
            if terms.phi != 0.0 {
                c += phi(d)? * terms.phi;
            }
            let u = vec_rm(&(h * elem(n, i, j)));
            let w = vec_rm(&(h * elem(n, j, i)));
            let mut view = p.view_mut((0, 0), (m, m));
            view += (u * w.transpose()) * c;
        }
    }
    if terms.r0 != 0.0 {
        let right = kron(&eye(n), &h.transpose());
        let blk = &right * standard_r0(ctx).coeffs * right.transpose() * C64::new(terms.r0, 0.0);
        let mut view = p.view_mut((0, 0), (m, m));
        view -= blk;
    }
    Ok(p)
}

pub fn pi_r_tensor(ctx: &LieContext, h: &Mat, lambda: &[C64]) -> Result<Mat> {
    chart_bivector(ctx, h, lambda, ChartTerms::PI_R)
}

pub fn pi_sigma_tensor(ctx: &LieContext, h: &Mat, lambda: &[C64]) -> Result<Mat> {
    chart_bivector(ctx, h, lambda, ChartTerms::PI_SIGMA)
}

/// Chart point (h, λ) ↦ [vec h, diag λ].
pub fn sigma_coords(h: &Mat, lambda: &[C64]) -> Vec<C64> {
    let mut z: Vec<C64> = vec_rm(h).iter().copied().collect();
    z.extend_from_slice(lambda);
    z
}

pub fn split_sigma_coords(z: &[C64], n: usize) -> (Mat, Vec<C64>) {
    (linalg::unvec_rm(&z[..n * n], n), z[n * n..].to_vec())
}

/// (h, x) ↦ [vec h, vec x].
pub fn am_coords(h: &Mat, x: &Mat) -> Vec<C64> {
    let mut z: Vec<C64> = vec_rm(h).iter().copied().collect();
    z.extend(vec_rm(x).iter().copied());
    z
}

pub fn split_am_coords(z: &[C64], n: usize) -> (Mat, Mat) {
    let m = n * n;
    (linalg::unvec_rm(&z[..m], n), linalg::unvec_rm(&z[m..2 * m], n))
}

#[derive(Debug, Clone)]
pub struct Kks {
    pub n: usize,
}

impl TensorField for Kks {
    fn name(&self) -> String {
        "kks".into()
    }
    fn dim(&self) -> usize {
        self.n * self.n
    }
    fn eval(&self, z: &[C64]) -> Result<Mat> {
        Ok(kks_tensor(&linalg::unvec_rm(z, self.n)))
    }
}

#[derive(Debug, Clone)]
pub struct Sts {
    pub ctx: LieContext,
}

impl TensorField for Sts {
    fn name(&self) -> String {
        "sts".into()
    }
    fn dim(&self) -> usize {
        self.ctx.dim()
    }
    fn eval(&self, z: &[C64]) -> Result<Mat> {
        sts_tensor(&self.ctx, &linalg::unvec_rm(z, self.ctx.n()))
    }
}

#[derive(Debug, Clone)]
pub struct PiAm {
    pub ctx: LieContext,
    pub terms: AmTerms,
}

impl PiAm {
    pub fn new(ctx: LieContext) -> Self {
        Self { ctx, terms: AmTerms::ALL }
    }
}

impl TensorField for PiAm {
    fn name(&self) -> String {
        if self.terms == AmTerms::ALL {
            "pi_am".into()
        } else {
            format!("pi_am{:?}", self.terms)
        }
    }
    fn dim(&self) -> usize {
        2 * self.ctx.dim()
    }
    fn eval(&self, z: &[C64]) -> Result<Mat> {
        let (h, x) = split_am_coords(z, self.ctx.n());
        pi_am_tensor_with(&self.ctx, &h, &x, self.terms)
    }
}

#[derive(Debug, Clone)]
pub struct ChartField {
    pub ctx: LieContext,
    pub terms: ChartTerms,
    pub label: &'static str,
}

impl ChartField {
    pub fn pi_r(ctx: LieContext) -> Self {
        Self { ctx, terms: ChartTerms::PI_R, label: "pi_r" }
    }
    pub fn pi_sigma(ctx: LieContext) -> Self {
        Self { ctx, terms: ChartTerms::PI_SIGMA, label: "pi_sigma" }
    }
}

impl TensorField for ChartField {
    fn name(&self) -> String {
        self.label.into()
    }
    fn dim(&self) -> usize {
        self.ctx.dim() + self.ctx.n()
    }
    fn eval(&self, z: &[C64]) -> Result<Mat> {
        let (h, lam) = split_sigma_coords(z, self.ctx.n());
        chart_bivector(&self.ctx, &h, &lam, self.terms)
    }
}

/// A field plus a constant bivector; used as a mutation control.
pub struct Shifted<'a> {
    pub inner: &'a dyn TensorField,
    pub shift: Mat,
}

impl TensorField for Shifted<'_> {
    fn name(&self) -> String {
        format!("{}+const", self.inner.name())
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, z: &[C64]) -> Result<Mat> {
        Ok(self.inner.eval(z)? + &self.shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, max_abs};
    use crate::rmatrix::phi;

    fn x2() -> Mat {
        Mat::from_row_slice(2, 2, &[c(0.2, 0.1), c(-0.13, 0.05), c(0.07, -0.2), c(-0.11, 0.03)])
    }

    #[test]
    fn kks_structure_constants() {
        // {x_00, x_01} = ⟨x, [e_00, e_10]⟩ = −x_01
        let x = x2();
        let p = kks_tensor(&x);
        assert_eq!(p[(0, 1)], -x[(0, 1)]);
        assert!(antisymmetry_defect(&p) == 0.0);
        assert!(max_abs(&kks_tensor(&linalg::zeros(3))) == 0.0);
    }

    #[test]
    fn sts_vanishes_at_zero_and_on_diagonal_directions() {
        let ctx = LieContext::new(2);
        assert!(max_abs(&sts_tensor(&ctx, &linalg::zeros(2)).unwrap()) == 0.0);
        let d = diag(&[c(0.3, 0.1), c(-0.2, 0.05)]);
        let p = sts_tensor(&ctx, &d).unwrap();
        assert!(p[(0, 3)].norm() < 1e-15 && p[(3, 0)].norm() < 1e-15);
        assert!(antisymmetry_defect(&sts_tensor(&ctx, &x2()).unwrap()) < 1e-14);
    }

    #[test]
    fn sts_is_minus_kks_to_first_order() {
        // with ad_x⊗f(ad_x) acting on t, π_STS(εx)/ε → −π_KKS(x)
        let ctx = LieContext::new(2);
        let e = 1e-5;
        let p = sts_tensor(&ctx, &(x2() * c(e, 0.0))).unwrap() / c(e, 0.0);
        assert!(max_abs(&(p + kks_tensor(&x2()))) < 1e-4);
    }

    #[test]
    fn pi_am_at_identity_and_zero_is_theta() {
        let ctx = LieContext::new(2);
        let p = pi_am_tensor(&ctx, &eye(2), &linalg::zeros(2)).unwrap();
        let theta =
            pi_am_tensor_with(&ctx, &eye(2), &linalg::zeros(2), AmTerms { kks: false, theta: true, r_am: false, r0: false })
                .unwrap();
        // r_AM(0) = 0 and l_1 r₀ − r_1 r₀ = 0 leaves −r₀ only from the r-block; θ alone otherwise
        let r0blk = &p - &theta;
        let want = -standard_r0(&ctx).coeffs;
        assert!(max_abs(&(r0blk.view((0, 0), (4, 4)) - want)) < 1e-15);
        assert!(antisymmetry_defect(&p) < 1e-15);
    }

    #[test]
    fn pi_r_at_identity_uses_half_coth() {
        let ctx = LieContext::new(2);
        let lam = [c(0.31, 0.2), c(-0.4, 0.1)];
        let p = chart_bivector(&ctx, &eye(2), &lam, ChartTerms { r0: 0.0, ..ChartTerms::PI_R }).unwrap();
        let d = lam[1] - lam[0];
        let want = 0.5 * crate::rmatrix::coth(d / 2.0);
        // coefficient of e_01 ⊗ e_10 sits at (index of e_01, index of e_10)
        assert!((p[(1, 2)] - want).norm() < 1e-14);
        assert!((1.0 / d + phi(d).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn abelian_chart_has_only_theta() {
        let ctx = LieContext::new(1);
        let h = Mat::from_element(1, 1, c(1.3, 0.2));
        let p = pi_r_tensor(&ctx, &h, &[c(0.4, 0.0)]).unwrap();
        assert_eq!(p[(1, 0)], c(1.3, 0.2));
        assert_eq!(p[(0, 1)], c(-1.3, -0.2));
        assert_eq!(p[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn tprime_margin() {
        let ctx = LieContext::new(2);
        let err = pi_sigma_tensor(&ctx, &eye(2), &[c(0.1, 0.0), c(0.1, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::TPrimeViolation { .. }));
    }
}
