//! Symplectic and quasi-Hamiltonian two-forms evaluated on explicit tangents.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::LieContext;
use crate::linalg::{commutator, eye, inv, max_abs, trace};
use crate::{Mat, C64};

/// Residual allowed on the torus and triangularity constraints of C̃.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// A tangent to Σ ≅ G×t': X = h⁻¹δh and R = δλ (diagonal).
#[derive(Debug, Clone)]
pub struct SigmaTangent {
    pub x: Mat,
    pub r: Mat,
}

impl SigmaTangent {
    pub fn from_chart(h: &Mat, dh: &Mat, dlambda: &Mat) -> Result<Self> {
        Ok(Self { x: inv(h)? * dh, r: dlambda.clone() })
    }
}

/// ω_Σ = ⟨R₁,X₂⟩ − ⟨R₂,X₁⟩ + ⟨λ,[X₁,X₂]⟩.
pub fn omega_sigma(lambda: &Mat, v1: &SigmaTangent, v2: &SigmaTangent) -> C64 {
    trace(&(&v1.r * &v2.x)) - trace(&(&v2.r * &v1.x)) + trace(&(lambda * commutator(&v1.x, &v2.x)))
}

/// A point (g₀, A) of the extended orbit, A = Σ_j A_j dz/z^j with `a[j-1]` = A_j.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub g0: Mat,
    pub a: Vec<Mat>,
}

impl OrbitPoint {
    pub fn order(&self) -> usize {
        self.a.len()
    }
}

/// Tangent data (X, R): X = Σ X_j z^j in g_k and R ∈ t.
#[derive(Debug, Clone)]
pub struct OrbitTangent {
    pub x: Vec<Mat>,
    pub r: Mat,
}

/// ⟨A, X⟩ = Res₀(A, X) = Σ_j (A_j, X_{j−1}).
pub fn residue_pairing(a: &[Mat], x: &[Mat]) -> C64 {
    a.iter().zip(x).map(|(aj, xj)| trace(&(aj * xj))).sum()
}

/// [X, Y] in g[z]/z^k.
pub fn truncated_bracket(x: &[Mat], y: &[Mat]) -> Vec<Mat> {
    let k = x.len();
    let n = x[0].nrows();
    let mut out = vec![Mat::zeros(n, n); k];
    for p in 0..k {
        for q in 0..k - p {
            out[p + q] += commutator(&x[p], &y[q]);
        }
    }
    out
}

/// ⟨R₁, Ad_{g₀}X₂(0)⟩ − ⟨R₂, Ad_{g₀}X₁(0)⟩ + ⟨A, [X₁, X₂]⟩ for k = 1, 2.
pub fn omega_extended_orbit(p: &OrbitPoint, v1: &OrbitTangent, v2: &OrbitTangent) -> Result<C64> {
    let k = p.order();
    if k != 1 && k != 2 {
        return Err(Error::UnsupportedOrder(k));
    }
    if v1.x.len() != k || v2.x.len() != k {
        return Err(Error::InvalidConfig("tangent jet length differs from pole order".into()));
    }
    let gi = inv(&p.g0)?;
    let ad = |y: &Mat| &p.g0 * y * &gi;
    Ok(trace(&(&v1.r * ad(&v2.x[0]))) - trace(&(&v2.r * ad(&v1.x[0])))
        + residue_pairing(&p.a, &truncated_bracket(&v1.x, &v2.x)))
}

/// The tangent vector (δg₀·g₀⁻¹-free form) generated by (X, R): δg₀ = g₀X(0) and
/// δA = [A, X] + g₀⁻¹Rg₀, truncated to the polar part.
pub fn orbit_chart_tangent(p: &OrbitPoint, v: &OrbitTangent) -> Result<(Mat, Vec<Mat>)> {
    let k = p.order();
    let gi = inv(&p.g0)?;
    let mut da = vec![Mat::zeros(p.g0.nrows(), p.g0.nrows()); k];
    // coefficient of z^{-j}: Σ_{m} [A_{j+m}, X_m]
    for (j, slot) in da.iter_mut().enumerate() {
        for m in 0..k - j {
            *slot += commutator(&p.a[j + m], &v.x[m]);
        }
    }
    da[0] += &gi * &v.r * &p.g0;
    Ok((&p.g0 * &v.x[0], da))
}

/// A point of C̃ for pole order k = d.len() + 1: (C, d₁..d_{k−1}, e₁..e_{k−1}).
///
/// d_odd and e_even lie in B₋, d_even and e_odd in B₊, all for the positive system `ctx`.
#[derive(Debug, Clone)]
pub struct QhPoint {
    pub ctx: LieContext,
    pub c: Mat,
    pub d: Vec<Mat>,
    pub e: Vec<Mat>,
}

#[derive(Debug, Clone)]
pub struct QhTangent {
    pub dc: Mat,
    pub dd: Vec<Mat>,
    pub de: Vec<Mat>,
}

fn borel_defect(ctx: &LieContext, m: &Mat, lower: bool) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, j) in ctx.roots() {
        if ctx.is_positive(i, j) == lower {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

impl QhPoint {
    pub fn order(&self) -> usize {
        self.d.len() + 1
    }

    /// k = 2 point (C, b₋, b₊).
    pub fn pair(ctx: &LieContext, c: Mat, b_minus: Mat, b_plus: Mat) -> Self {
        Self { ctx: ctx.clone(), c, d: vec![b_minus], e: vec![b_plus] }
    }

    /// Worst violation of triangularity and δ(d_j)⁻¹ = δ(e_j) = δ(e₁).
    pub fn constraint_residual(&self) -> f64 {
        let n = self.ctx.n();
        let mut worst: f64 = 0.0;
        for (j, (dj, ej)) in self.d.iter().zip(&self.e).enumerate() {
            let odd = j % 2 == 0; // 1-based index j+1
            worst = worst.max(borel_defect(&self.ctx, dj, odd)).max(borel_defect(&self.ctx, ej, !odd));
            for i in 0..n {
                worst = worst.max((dj[(i, i)] * ej[(i, i)] - 1.0).norm());
                worst = worst.max((ej[(i, i)] - self.e[0][(i, i)]).norm());
            }
        }
        worst
    }

    pub fn check(&self) -> Result<()> {
        if self.d.len() != self.e.len() || self.d.is_empty() {
            return Err(Error::UnsupportedOrder(self.d.len() + 1));
        }
        let residual = self.constraint_residual();
        if residual > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation { residual });
        }
        Ok(())
    }
}

/// (D_j, δD_j) for j = 0..k−1 with D_j = m_j⋯m_1C.
fn chain(c: &Mat, dc: &Mat, ms: &[Mat], dms: &[Mat]) -> Vec<(Mat, Mat)> {
    let mut out = vec![(c.clone(), dc.clone())];
    for (m, dm) in ms.iter().zip(dms) {
        let (prev, dprev) = out.last().expect("nonempty").clone();
        out.push((m * &prev, dm * &prev + m * dprev));
    }
    out
}

/// (α, β)(v, w) = tr(α(v)β(w)) − tr(α(w)β(v)).
fn wedge_pair(a1: &Mat, b1: &Mat, a2: &Mat, b2: &Mat) -> C64 {
    trace(&(a1 * b2)) - trace(&(a2 * b1))
}

/// ½(D̄, Ē) + ½Σ_j [(𝒟_j, 𝒟_{j−1}) − (ℰ_j, ℰ_{j−1})] with θ-pullbacks along D_j, E_j.
pub fn qh_form(p: &QhPoint, t1: &QhTangent, t2: &QhTangent) -> Result<C64> {
    p.check()?;
    let d1 = chain(&p.c, &t1.dc, &p.d, &t1.dd);
    let d2 = chain(&p.c, &t2.dc, &p.d, &t2.dd);
    let e1 = chain(&p.c, &t1.dc, &p.e, &t1.de);
    let e2 = chain(&p.c, &t2.dc, &p.e, &t2.de);
    let theta = |g: &Mat, dg: &Mat| -> Result<Mat> { Ok(inv(g)? * dg) };
    let theta_bar = |g: &Mat, dg: &Mat| -> Result<Mat> { Ok(dg * inv(g)?) };
    let k = p.order();
    let (dd, ee) = (&d1[k - 1], &e1[k - 1]);
    let (dd2, ee2) = (&d2[k - 1], &e2[k - 1]);
    let mut w = wedge_pair(
        &theta_bar(&dd.0, &dd.1)?,
        &theta_bar(&ee.0, &ee.1)?,
        &theta_bar(&dd2.0, &dd2.1)?,
        &theta_bar(&ee2.0, &ee2.1)?,
    ) * 0.5;
    for j in 1..k {
        let dj = wedge_pair(
            &theta(&d1[j].0, &d1[j].1)?,
            &theta(&d1[j - 1].0, &d1[j - 1].1)?,
            &theta(&d2[j].0, &d2[j].1)?,
            &theta(&d2[j - 1].0, &d2[j - 1].1)?,
        );
        let ej = wedge_pair(
            &theta(&e1[j].0, &e1[j].1)?,
            &theta(&e1[j - 1].0, &e1[j - 1].1)?,
            &theta(&e2[j].0, &e2[j].1)?,
            &theta(&e2[j - 1].0, &e2[j - 1].1)?,
        );
        w += (dj - ej) * 0.5;
    }
    Ok(w)
}

/// μ = C⁻¹d₁⁻¹⋯d_{k−1}⁻¹e_{k−1}⋯e₁C.
pub fn qh_moment(p: &QhPoint) -> Result<Mat> {
    let n = p.c.nrows();
    let mut m = eye(n);
    for d in &p.d {
        m = m * inv(d)?;
    }
    for e in p.e.iter().rev() {
        m *= e;
    }
    Ok(inv(&p.c)? * m * &p.c)
}

/// δμ along a tangent, by the product rule.
pub fn qh_moment_tangent(p: &QhPoint, t: &QhTangent) -> Result<Mat> {
    let n = p.c.nrows();
    let ci = inv(&p.c)?;
    let mut factors: Vec<(Mat, Mat)> = vec![(ci.clone(), -(&ci * &t.dc * &ci))];
    for (d, dd) in p.d.iter().zip(&t.dd) {
        let di = inv(d)?;
        let ddi = -(&di * dd * &di);
        factors.push((di, ddi));
    }
    for (e, de) in p.e.iter().zip(&t.de).rev() {
        factors.push((e.clone(), de.clone()));
    }
    factors.push((p.c.clone(), t.dc.clone()));
    let mut total = Mat::zeros(n, n);
    for k in 0..factors.len() {
        let mut term = eye(n);
        for (i, (f, df)) in factors.iter().enumerate() {
            term = if i == k { term * df } else { term * f };
        }
        total += term;
    }
    Ok(total)
}

/// One factor of a fusion product: a point with the two tangents to evaluate.
pub struct FusionFactor<'a> {
    pub point: &'a QhPoint,
    pub v1: &'a QhTangent,
    pub v2: &'a QhTangent,
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionValue {
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub omega: C64,
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub moment: Mat,
}

/// ω₁ + ω₂ − ½(μ₁*θ, μ₂*θ̄) and μ₁μ₂.
pub fn fusion_form(f1: &FusionFactor, f2: &FusionFactor) -> Result<FusionValue> {
    let w1 = qh_form(f1.point, f1.v1, f1.v2)?;
    let w2 = qh_form(f2.point, f2.v1, f2.v2)?;
    let mu1 = qh_moment(f1.point)?;
    let mu2 = qh_moment(f2.point)?;
    let mu1i = inv(&mu1)?;
    let mu2i = inv(&mu2)?;
    let th1 = |t: &QhTangent| -> Result<Mat> { Ok(&mu1i * qh_moment_tangent(f1.point, t)?) };
    let tb2 = |t: &QhTangent| -> Result<Mat> { Ok(qh_moment_tangent(f2.point, t)? * &mu2i) };
    let corr = wedge_pair(&th1(f1.v1)?, &tb2(f2.v1)?, &th1(f1.v2)?, &tb2(f2.v2)?);
    Ok(FusionValue { omega: w1 + w2 - corr * 0.5, moment: mu1 * mu2 })
}

/// max |μ − 1| for a fused pair, the quasi-Hamiltonian reduction level.
pub fn moment_level_residual(v: &FusionValue) -> f64 {
    max_abs(&(&v.moment - eye(v.moment.nrows())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, expm};

    fn m(seed: f64) -> Mat {
        Mat::from_fn(2, 2, |i, j| c((seed * (1.0 + i as f64) + j as f64).sin(), (seed + 2.0 * i as f64 - j as f64).cos()))
    }

    #[test]
    fn omega_sigma_special_cases() {
        let lam = diag(&[c(0.3, 0.0), c(-0.1, 0.2)]);
        let x = m(0.7);
        let r = diag(&[c(0.5, 0.1), c(-0.2, 0.0)]);
        let zero = Mat::zeros(2, 2);
        let a = SigmaTangent { x: x.clone(), r: zero.clone() };
        let b = SigmaTangent { x: zero.clone(), r: r.clone() };
        assert_eq!(omega_sigma(&lam, &a, &b), -trace(&(&r * &x)));
        let a2 = SigmaTangent { x: m(1.3), r: zero };
        assert_eq!(omega_sigma(&lam, &a, &a2), trace(&(&lam * commutator(&x, &m(1.3)))));
        assert_eq!(omega_sigma(&lam, &a, &b), -omega_sigma(&lam, &b, &a));
    }

    #[test]
    fn orbit_form_k1_is_sigma_form() {
        let lam = diag(&[c(0.3, 0.0), c(-0.1, 0.2)]);
        let p = OrbitPoint { g0: eye(2), a: vec![lam.clone()] };
        let v1 = OrbitTangent { x: vec![m(0.2)], r: diag(&[c(0.1, 0.0), c(0.3, 0.0)]) };
        let v2 = OrbitTangent { x: vec![m(0.9)], r: diag(&[c(-0.4, 0.1), c(0.0, 0.2)]) };
        let s1 = SigmaTangent { x: v1.x[0].clone(), r: v1.r.clone() };
        let s2 = SigmaTangent { x: v2.x[0].clone(), r: v2.r.clone() };
        let w = omega_extended_orbit(&p, &v1, &v2).unwrap();
        assert!((w - omega_sigma(&lam, &s1, &s2)).norm() < 1e-15);
        let bad = OrbitPoint { g0: eye(2), a: vec![lam.clone(); 3] };
        let v3 = OrbitTangent { x: vec![m(0.2); 3], r: lam };
        assert_eq!(omega_extended_orbit(&bad, &v3, &v3).unwrap_err(), Error::UnsupportedOrder(3));
    }

    #[test]
    fn trivial_qh_point_has_unit_moment() {
        let ctx = LieContext::new(2);
        let p = QhPoint::pair(&ctx, eye(2), eye(2), eye(2));
        assert!(max_abs(&(qh_moment(&p).unwrap() - eye(2))) == 0.0);
    }

    #[test]
    fn k1_restriction_moment() {
        // (h, e^{−πiλ}, e^{πiλ}) has μ = h⁻¹e^{2πiλ}h
        let ctx = LieContext::new(2);
        let lam = diag(&[c(0.1, 0.02), c(-0.2, 0.05)]);
        let pi_i = c(0.0, std::f64::consts::PI);
        let h = expm(&(m(0.4) * c(0.3, 0.0)));
        let p = QhPoint::pair(&ctx, h.clone(), expm(&(&lam * -pi_i)), expm(&(&lam * pi_i)));
        let want = inv(&h).unwrap() * expm(&(&lam * (pi_i * 2.0))) * &h;
        assert!(max_abs(&(qh_moment(&p).unwrap() - want)) < 1e-14);
        assert!(p.constraint_residual() < 1e-15);
    }

    #[test]
    fn moment_tangent_matches_difference() {
        let ctx = LieContext::new(2);
        let up = |a: C64| Mat::from_row_slice(2, 2, &[c(1.1, 0.1), a, c(0.0, 0.0), c(1.0, 0.0) / c(1.1, 0.1)]);
        let lo = |a: C64| Mat::from_row_slice(2, 2, &[c(1.0, 0.0) / c(1.1, 0.1), c(0.0, 0.0), a, c(1.1, 0.1)]);
        let p = QhPoint::pair(&ctx, expm(&(m(0.3) * c(0.2, 0.0))), lo(c(0.3, -0.1)), up(c(-0.2, 0.4)));
        let t = QhTangent { dc: m(1.7), dd: vec![lo(c(0.5, 0.5)) - lo(c(0.0, 0.0))], de: vec![up(c(0.2, -0.3)) - up(c(0.0, 0.0))] };
        let h = 1e-6;
        let shift = |s: f64| QhPoint {
            ctx: ctx.clone(),
            c: &p.c + &t.dc * c(s, 0.0),
            d: vec![&p.d[0] + &t.dd[0] * c(s, 0.0)],
            e: vec![&p.e[0] + &t.de[0] * c(s, 0.0)],
        };
        let fd = (qh_moment(&shift(h)).unwrap() - qh_moment(&shift(-h)).unwrap()) / c(2.0 * h, 0.0);
        assert!(max_abs(&(fd - qh_moment_tangent(&p, &t).unwrap())) < 1e-8);
        let w12 = qh_form(&p, &t, &QhTangent { dc: m(0.1), ..t.clone() }).unwrap();
        let w21 = qh_form(&p, &QhTangent { dc: m(0.1), ..t.clone() }, &t).unwrap();
        assert!((w12 + w21).norm() < 1e-13);
    }

    #[test]
    fn constraint_violation_is_reported() {
        let ctx = LieContext::new(2);
        let p = QhPoint::pair(&ctx, eye(2), m(0.5), eye(2));
        let t = QhTangent { dc: eye(2), dd: vec![eye(2)], de: vec![eye(2)] };
        assert!(matches!(qh_form(&p, &t, &t), Err(Error::ConstraintViolation { .. })));
    }
}
