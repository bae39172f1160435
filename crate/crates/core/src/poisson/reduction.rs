//! The two reductions onto Σ and Σ': orbits of g* and the fused monodromy spaces.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::LieContext;
use crate::linalg::{self, commutator, diag, diag_of, expm, eye, inv, max_abs, trace};
use crate::poisson::forms::{
    fusion_form, omega_extended_orbit, omega_sigma, FusionFactor, OrbitPoint, OrbitTangent, QhPoint, QhTangent,
    SigmaTangent,
};
use crate::poisson::tensors::{chart_bivector, ChartTerms};
use crate::poisson::triple::{dual_factorize, factorization_tangent, GStarTriple};
use crate::{Mat, C64};

/// Allowed |μ − 1| and off-diagonal size in the reduction constraints.
pub const REDUCTION_CONSTRAINT_TOL: f64 = 1e-8;

/// ι(g₁, x₁, g₂, −x₁) = (g₂g₁⁻¹, −Ad_{g₁}x₁).
pub fn reduction_orbit_iota(g1: &Mat, x1: &Mat, g2: &Mat) -> Result<(Mat, Mat)> {
    let g1i = inv(g1)?;
    let ad = g1 * x1 * &g1i;
    let n = ad.nrows();
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(ad[(i, j)].norm());
            }
        }
    }
    if off > REDUCTION_CONSTRAINT_TOL * max_abs(&ad).max(1.0) {
        return Err(Error::ConstraintViolation { residual: off });
    }
    Ok((g2 * g1i, -delta_of(&ad)))
}

fn delta_of(m: &Mat) -> Mat {
    diag(&diag_of(m))
}

/// The three values of the orbit reduction identity on one tangent pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitReductionValues {
    /// ω_{Õ₁} + ω_{Õ₂} on the tangents of μ⁻¹(0).
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub restricted: C64,
    /// ω_Σ on ι_* of the tangents.
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub pulled_back: C64,
    /// ⟨R₂,Ad_{g₁g₂⁻¹}X₁⟩ − ⟨R₁,Ad_{g₁g₂⁻¹}X₂⟩ − ⟨x₁,Ad_{g₂⁻¹}[X₁,X₂]⟩.
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub closed_form: C64,
    /// ω_{Õ₂} with the residue change fed in as g₂⁻¹R'g₂ and the [A, X] part
    /// of the tangent dropped. Agrees with `closed_form`; `restricted` differs
    /// from it by 2⟨x₁, Ad_{g₂⁻¹}[X₁,X₂]⟩.
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub residue_shortcut: C64,
}

impl OrbitReductionValues {
    /// max(|restricted − pulled_back|, |restricted − closed_form|).
    pub fn discrepancy(&self) -> f64 {
        (self.restricted - self.pulled_back).norm().max((self.restricted - self.closed_form).norm())
    }

    pub fn shortcut_discrepancy(&self) -> f64 {
        (self.residue_shortcut - self.pulled_back).norm().max((self.residue_shortcut - self.closed_form).norm())
    }
}

/// Õ₂ data (X, R) for the μ⁻¹(0) tangent (0, Ad_{g₁⁻¹}R, Ad_{g₂⁻¹}X, −Ad_{g₁⁻¹}R).
///
/// X(0) = Ad_{g₂⁻¹}X and the residue equation
/// [A₂,X₁] + [A₁,X(0)] + g₂⁻¹R'g₂ = −Ad_{g₁⁻¹}R is solved for X₁ and R'.
fn orbit2_tangent(a0: &[C64], g2: &Mat, a1: &Mat, x: &Mat, r: &Mat, g1: &Mat) -> Result<OrbitTangent> {
    let n = a0.len();
    let g2i = inv(g2)?;
    let g1i = inv(g1)?;
    let x0 = &g2i * x * g2;
    let da1 = -(&g1i * r * g1);
    let y = g2 * (da1 - commutator(a1, &x0)) * &g2i;
    let mut w = linalg::zeros(n);
    let mut rr = linalg::zeros(n);
    for i in 0..n {
        rr[(i, i)] = y[(i, i)];
        for j in 0..n {
            if i != j {
                w[(i, j)] = y[(i, j)] / (a0[i] - a0[j]);
            }
        }
    }
    Ok(OrbitTangent { x: vec![x0, &g2i * w * g2], r: rr })
}

/// Evaluate both sides of ι*ω_Σ = ω|_{μ⁻¹(0)} at (g₁, x₁, g₂, −x₁) on the
/// tangent pair generated by (X₁, R₁), (X₂, R₂). `a0` is the irregular type at
/// the double pole.
pub fn orbit_reduction_identity(
    a0: &[C64],
    g1: &Mat,
    x1: &Mat,
    g2: &Mat,
    t1: (&Mat, &Mat),
    t2: (&Mat, &Mat),
) -> Result<OrbitReductionValues> {
    let (h, lambda) = reduction_orbit_iota(g1, x1, g2)?;
    let g1i = inv(g1)?;
    let g2i = inv(g2)?;
    let a2 = &g2i * diag(a0) * g2;
    let a1 = -x1;
    let o1 = OrbitPoint { g0: g1.clone(), a: vec![x1.clone()] };
    let o2 = OrbitPoint { g0: g2.clone(), a: vec![a1.clone(), a2] };
    let zero = linalg::zeros(a0.len());
    let orbit1 = |r: &Mat| OrbitTangent { x: vec![zero.clone()], r: r.clone() };
    let v1 = orbit2_tangent(a0, g2, &a1, t1.0, t1.1, g1)?;
    let v2 = orbit2_tangent(a0, g2, &a1, t2.0, t2.1, g1)?;
    let restricted = omega_extended_orbit(&o1, &orbit1(t1.1), &orbit1(t2.1))? + omega_extended_orbit(&o2, &v1, &v2)?;

    // push forward (δg₁, δx₁, δg₂) = (0, g₁⁻¹Rg₁, g₂X(0)) through ι
    let push = |x: &Mat, r: &Mat| -> Result<SigmaTangent> {
        let dg2 = g2 * (&g2i * x * g2);
        let dx1 = &g1i * r * g1;
        let dh = dg2 * &g1i;
        let dl = -(g1 * dx1 * &g1i);
        SigmaTangent::from_chart(&h, &dh, &dl)
    };
    let pulled_back = omega_sigma(&lambda, &push(t1.0, t1.1)?, &push(t2.0, t2.1)?);

    let ad12 = |y: &Mat| g1 * &g2i * y * g2 * &g1i;
    let closed_form = trace(&(t2.1 * ad12(t1.0))) - trace(&(t1.1 * ad12(t2.0)))
        - trace(&(x1 * (&g2i * commutator(t1.0, t2.0) * g2)));

    let shortcut = |x: &Mat, r: &Mat| OrbitTangent { x: vec![&g2i * x * g2], r: g2 * -(&g1i * r * g1) * &g2i };
    let x2 = OrbitPoint { g0: g2.clone(), a: vec![a1] };
    let residue_shortcut = omega_extended_orbit(&x2, &shortcut(t1.0, t1.1), &shortcut(t2.0, t2.1))?;
    Ok(OrbitReductionValues { restricted, pulled_back, closed_form, residue_shortcut })
}

/// Image of a point of μ⁻¹(1) in the chart of Σ'.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaPrimeImage {
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub h: Mat,
    /// Chart coordinate of e^{−2πiλ}: λ' = −2πiλ.
    #[serde(serialize_with = "crate::serial::ser_vec_c64")]
    pub lambda: Vec<C64>,
    #[serde(serialize_with = "crate::serial::ser_mat")]
    pub u: Mat,
    pub triple: GStarTriple,
}

/// |h⁻¹e^{−2πiλ}h·C⁻¹b₋⁻¹b₊C − 1|, the fused moment at (h, e₋^{2πiλ}, C, b₋, b₊).
pub fn monodromy_constraint_residual(h: &Mat, lambda: &[C64], c: &Mat, triple: &GStarTriple) -> Result<f64> {
    let e = expm(&(diag(lambda) * C64::new(0.0, -TAU)));
    let mu = inv(h)? * e * h * inv(c)? * triple.product()? * c;
    Ok(max_abs(&(mu - eye(h.nrows()))))
}

/// (h, e₋^{2πiλ}, C, (b₋, b₊, Λ)) ↦ (Ch⁻¹, e^{−2πiλ}, u, (b₋, b₊, Λ)) with u = b₊⁻¹Ch⁻¹e^{πiλ}.
pub fn reduction_monodromy(h: &Mat, lambda: &[C64], c: &Mat, triple: &GStarTriple) -> Result<SigmaPrimeImage> {
    let residual = monodromy_constraint_residual(h, lambda, c, triple)?;
    if residual > REDUCTION_CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation { residual });
    }
    let hp = c * inv(h)?;
    let u = inv(&triple.b_plus)? * &hp * expm(&(diag(lambda) * C64::new(0.0, PI)));
    let lp = lambda.iter().map(|l| l * C64::new(0.0, -TAU)).collect();
    Ok(SigmaPrimeImage { h: hp, lambda: lp, u, triple: triple.clone() })
}

/// A point of μ⁻¹(1): the triple is the factorization of C·h⁻¹e^{2πiλ}h·C⁻¹.
pub fn constrained_monodromy_point(ctx: &LieContext, h: &Mat, lambda: &[C64], c: &Mat) -> Result<GStarTriple> {
    let e = expm(&(diag(lambda) * C64::new(0.0, TAU)));
    let m = c * inv(h)? * e * h * inv(c)?;
    dual_factorize(ctx, &m)
}

/// Chart tangent (δh, δλ, δC) at a constrained point.
#[derive(Debug, Clone)]
pub struct MonodromyTangent {
    pub dh: Mat,
    pub dlambda: Vec<C64>,
    pub dc: Mat,
}

/// The bivector whose inverse is the reduced form in the Σ' chart:
/// θ opposite to π_r, and the ad⁻¹, φ terms with flipped sign.
pub const SIGMA_PRIME_TERMS: ChartTerms = ChartTerms { theta: -1.0, ad_inverse: -1.0, phi: -1.0, r0: 1.0 };

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonodromyReductionValues {
    /// Fused form ω₁ + ω₂ − ½(μ₁*θ, μ₂*θ̄) on C̃₁ ⊛ C̃₂.
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub fused: C64,
    /// vᵀ·P⁻¹·w in the Σ' chart, before scaling.
    #[serde(serialize_with = "crate::serial::ser_c64")]
    pub chart: C64,
    /// |μ − 1| at the point.
    pub moment_residual: f64,
}

/// Both sides of the Σ' form agreement at (h, λ, C) on two tangents.
pub fn monodromy_reduction_forms(
    ctx: &LieContext,
    h: &Mat,
    lambda: &[C64],
    c: &Mat,
    t1: &MonodromyTangent,
    t2: &MonodromyTangent,
) -> Result<MonodromyReductionValues> {
    let n = ctx.n();
    let triple = constrained_monodromy_point(ctx, h, lambda, c)?;
    let pi_i = C64::new(0.0, PI);
    let lam = diag(lambda);
    let e2 = expm(&(&lam * (pi_i * 2.0)));
    let hi = inv(h)?;
    let ci = inv(c)?;
    let k = &hi * &e2 * h;
    let dm_of = |t: &MonodromyTangent| -> Mat {
        let dl = diag(&t.dlambda);
        let dk = -(&hi * &t.dh * &k) + &hi * (&dl * (pi_i * 2.0)) * &e2 * h + &hi * &e2 * &t.dh;
        &t.dc * &k * &ci + c * dk * &ci - c * &k * &ci * &t.dc * &ci
    };
    // factor 1 carries the opposite Borels: (h, e^{πiλ}, e^{−πiλ})
    let ep = expm(&(&lam * pi_i));
    let em = expm(&(&lam * -pi_i));
    let p1 = QhPoint { ctx: ctx.opposite(), c: h.clone(), d: vec![ep.clone()], e: vec![em.clone()] };
    let p2 = QhPoint::pair(ctx, c.clone(), triple.b_minus.clone(), triple.b_plus.clone());
    let tangents = |t: &MonodromyTangent| -> Result<(QhTangent, QhTangent)> {
        let dl = diag(&t.dlambda);
        let q1 = QhTangent { dc: t.dh.clone(), dd: vec![&dl * pi_i * &ep], de: vec![&dl * -pi_i * &em] };
        let (dbm, dbp) = factorization_tangent(&triple, &dm_of(t))?;
        let q2 = QhTangent { dc: t.dc.clone(), dd: vec![dbm], de: vec![dbp] };
        Ok((q1, q2))
    };
    let (a1, a2) = tangents(t1)?;
    let (b1, b2) = tangents(t2)?;
    let v = fusion_form(
        &FusionFactor { point: &p1, v1: &a1, v2: &b1 },
        &FusionFactor { point: &p2, v1: &a2, v2: &b2 },
    )?;

    let image = reduction_monodromy(h, lambda, c, &triple)?;
    let push = |t: &MonodromyTangent| -> Vec<C64> {
        let dhp = &t.dc * &hi - c * &hi * &t.dh * &hi;
        let mut w: Vec<C64> = linalg::vec_rm(&dhp).iter().copied().collect();
        w.extend(t.dlambda.iter().map(|l| l * C64::new(0.0, -TAU)));
        w
    };
    let p = chart_bivector(ctx, &image.h, &image.lambda, SIGMA_PRIME_TERMS)?;
    let omega = inv(&p)?;
    let w1 = nalgebra::DVector::from_vec(push(t1));
    let w2 = nalgebra::DVector::from_vec(push(t2));
    let chart = (w1.transpose() * omega * w2)[(0, 0)];
    let moment_residual = linalg::max_abs(&(&v.moment - eye(n)));
    Ok(MonodromyReductionValues { fused: v.omega, chart, moment_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn m(seed: f64, n: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| c((seed * (1.0 + i as f64) + j as f64).sin(), (seed + 2.0 * i as f64 - j as f64).cos()))
    }

    #[test]
    fn iota_at_identity() {
        let x = diag(&[c(0.2, 0.0), c(-0.3, 0.1)]);
        let (h, l) = reduction_orbit_iota(&eye(2), &x, &eye(2)).unwrap();
        assert_eq!(h, eye(2));
        assert_eq!(l, -x);
    }

    #[test]
    fn iota_is_constant_on_orbits() {
        let x = diag(&[c(0.2, 0.0), c(-0.3, 0.1)]);
        let g1 = expm(&(m(0.3, 2) * c(0.2, 0.0)));
        let g2 = expm(&(m(0.9, 2) * c(0.2, 0.0)));
        let k = expm(&(m(1.4, 2) * c(0.2, 0.0)));
        let x1 = inv(&g1).unwrap() * &x * &g1;
        let (h, l) = reduction_orbit_iota(&g1, &x1, &g2).unwrap();
        // G acts by g_j ↦ g_j k⁻¹ and X ↦ Ad_k X
        let ki = inv(&k).unwrap();
        let x1k = &k * &x1 * &ki;
        let (hk, lk) = reduction_orbit_iota(&(&g1 * &ki), &x1k, &(&g2 * &ki)).unwrap();
        assert!(max_abs(&(h - hk)) < 1e-13 && max_abs(&(l - lk)) < 1e-13);
    }

    #[test]
    fn iota_rejects_off_slice() {
        assert!(matches!(reduction_orbit_iota(&eye(2), &m(0.1, 2), &eye(2)), Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn trivial_monodromy_point() {
        let ctx = LieContext::new(2);
        let lam = [c(0.1, 0.05), c(-0.2, 0.02)];
        let h = expm(&(m(0.5, 2) * c(0.2, 0.0)));
        let t = GStarTriple::from_diagonal(&ctx, &diag(&lam));
        let img = reduction_monodromy(&h, &lam, &h, &t).unwrap();
        assert!(max_abs(&(img.h - eye(2))) < 1e-14);
        let bad = GStarTriple::from_diagonal(&ctx, &diag(&[c(0.3, 0.0), c(0.0, 0.0)]));
        assert!(matches!(reduction_monodromy(&h, &lam, &h, &bad), Err(Error::ConstraintViolation { .. })));
    }
}
