use std::f64::consts::PI;

use stokes_core::experiments::Sampler;
use stokes_core::lie::{ad_inverse_restricted, delta_projection, scalar_function_of_ad};
use stokes_core::linalg::{c, commutator, diag, elem, eye, max_abs, zeros};
use stokes_core::rmatrix::{
    cdybe_residual, gauge_lhs, gauge_residual, phi, r_am, AlekseevMeinrenken, ConstantMap, ConstantR,
};
use stokes_core::tensor::{casimir, cybe, standard_r, standard_r0, ThreeTensor, TwoTensor};
use stokes_core::{FdScheme, GOperator, LieContext, Mat};

#[test]
fn casimir_of_gl1_and_gl2() {
    let t1 = casimir(&LieContext::new(1));
    assert_eq!(t1, TwoTensor::pure(&eye(1), &eye(1)));
    let t2 = casimir(&LieContext::new(2));
    assert_eq!(t2.flip(), t2);
}

#[test]
fn casimir_is_invariant() {
    let ctx = LieContext::new(3);
    let t = casimir(&ctx);
    let x = Sampler::new(1, 0).matrix(3, 1.0);
    let ad = GOperator::ad(&x);
    let moved = t.apply_left(&ad) + t.apply_right(&ad);
    assert!(moved.max_abs() < 1e-14);
}

#[test]
fn delta_projection_examples() {
    let d = diag(&[c(1.0, 2.0), c(-3.0, 0.5)]);
    assert_eq!(delta_projection(&d), d);
    assert_eq!(delta_projection(&(elem(3, 0, 2) + elem(3, 2, 1))), zeros(3));
    let x = elem(2, 0, 1) + elem(2, 0, 0) * c(3.0, 0.0);
    assert_eq!(delta_projection(&x), elem(2, 0, 0) * c(3.0, 0.0));
}

#[test]
fn spectral_calculus_examples() {
    let x = diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
    assert!(scalar_function_of_ad(phi, &zeros(2)).unwrap().max_abs() < 1e-15);
    let id = scalar_function_of_ad(Ok, &x).unwrap();
    assert!(max_abs(&(&id.matrix - &GOperator::ad(&x).matrix)) < 1e-14);
    let e12 = elem(2, 0, 1);
    let f = scalar_function_of_ad(phi, &x).unwrap().apply(&e12);
    assert!(max_abs(&(f - &e12 * phi(c(2.0, 0.0)).unwrap())) < 1e-14);

    let inv = ad_inverse_restricted(&x).unwrap();
    assert!(max_abs(&(inv.apply(&e12) - &e12 * c(0.5, 0.0))) < 1e-14);
    let y = Sampler::new(2, 0).matrix(2, 1.0);
    assert!(max_abs(&ad_inverse_restricted(&y).unwrap().apply(&y)) < 1e-12);
}

#[test]
fn ad_inverse_is_a_pseudo_inverse_on_root_vectors() {
    let x = Sampler::new(3, 0).diagonal(3, 1.0);
    let ad = GOperator::ad(&x);
    let composed = ad.compose(&ad_inverse_restricted(&x).unwrap()).compose(&ad);
    assert!(max_abs(&(&composed.matrix - &ad.matrix)) < 1e-12);
}

#[test]
fn standard_r_examples() {
    let r1 = standard_r(&LieContext::new(1));
    assert!((r1.clone() - casimir(&LieContext::new(1)) * 0.5).max_abs() < 1e-15);

    let ctx = LieContext::new(2);
    let r0 = standard_r0(&ctx);
    let want = TwoTensor::wedge(&elem(2, 0, 1), &elem(2, 1, 0)) * 0.5;
    assert!((r0.clone() - want.clone()).max_abs() < 1e-15);
    // the opposite positive system flips the sign
    assert!((standard_r0(&ctx.opposite()) + want).max_abs() < 1e-15);

    for ctx in [LieContext::new(3), LieContext::with_order(vec![2, 0, 1]).unwrap()] {
        let r = standard_r(&ctx);
        assert!((r.clone() + r.flip() - casimir(&ctx)).max_abs() < 1e-15);
        assert!(cybe(&r).max_abs() < 1e-13);
    }
}

#[test]
fn phi_examples() {
    let z = c(3e-5, -2e-5);
    assert!((phi(z).unwrap() - z / 12.0).norm() <= 1e-8 * z.norm());
    let mut s = Sampler::new(4, 0);
    for _ in 0..10 {
        let w = s.disk(3.0);
        assert!((phi(-w).unwrap() + phi(w).unwrap()).norm() < 1e-13);
    }
    assert!((phi(c(0.0, PI)).unwrap() - c(0.0, 1.0 / PI)).norm() < 1e-14);
    assert!(phi(c(0.0, 2.0 * PI)).is_err());
}

#[test]
fn r_am_examples() {
    let ctx = LieContext::new(2);
    assert!(r_am(&ctx, &zeros(2)).unwrap().max_abs() == 0.0);
    let x = Sampler::new(6, 0).matrix(2, 0.5);
    let r = r_am(&ctx, &x).unwrap();
    assert!((r.clone() + r.flip()).max_abs() < 1e-14);

    let a = c(0.3, 0.1);
    let r = r_am(&ctx, &diag(&[a, -a])).unwrap();
    let (e12, e21) = (elem(2, 0, 1), elem(2, 1, 0));
    let want = TwoTensor::pure(&e12, &e21) * phi(-a * 2.0).unwrap() + TwoTensor::pure(&e21, &e12) * phi(a * 2.0).unwrap();
    assert!((r - want).max_abs() < 1e-14);
}

#[test]
fn cdybe_for_constant_and_dynamical_fields() {
    let ctx = LieContext::new(2);
    let x = Sampler::new(7, 0).matrix(2, 0.5);
    let scheme = FdScheme::default();
    let r = ConstantR(standard_r(&ctx));
    assert!(cdybe_residual(&r, &x, scheme).unwrap().max_abs() < 1e-14);

    let am = AlekseevMeinrenken::with_half_casimir(ctx.clone());
    assert!(cdybe_residual(&am, &x, scheme).unwrap().max_abs() < 1e-8);

    // t/2 alone: ¼ of the cyclic commutators of t
    let t = casimir(&ctx);
    let half = ConstantR(t.clone() * 0.5);
    let res = cdybe_residual(&half, &x, scheme).unwrap();
    let (a, b, d) = (ThreeTensor::embed(&t, (0, 1)).op, ThreeTensor::embed(&t, (0, 2)).op, ThreeTensor::embed(&t, (1, 2)).op);
    let com = |p: &Mat, q: &Mat| p * q - q * p;
    let quarter = (com(&a, &b) + com(&a, &d) + com(&b, &d)) * c(0.25, 0.0);
    assert!(max_abs(&(&res.op - &quarter)) < 1e-14);
    assert!(res.max_abs() > 1e-2);
}

#[test]
fn gauge_equation_for_constant_maps() {
    let ctx = LieContext::new(2);
    let scheme = FdScheme::default();
    let terms = gauge_lhs(&ctx, &ConstantMap(eye(2)), &zeros(2), scheme).unwrap();
    assert!((terms.lhs - standard_r0(&ctx)).max_abs() < 1e-15);
    let g = gauge_residual(&ctx, &ConstantMap(eye(2)), &zeros(2), scheme).unwrap();
    assert!((g.residual - standard_r0(&ctx).max_abs()).abs() < 1e-15);
    assert!(g.residual > 0.0);
}

#[test]
fn commutator_sanity() {
    let (e12, e21) = (elem(2, 0, 1), elem(2, 1, 0));
    assert_eq!(commutator(&e12, &e21), diag(&[c(1.0, 0.0), c(-1.0, 0.0)]));
}
