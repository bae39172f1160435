use proptest::prelude::*;

use stokes_core::experiments::{ExperimentConfig, Sampler};
use stokes_core::linalg::max_abs;
use stokes_core::poisson::{antisymmetry_defect, dual_factorize, kks_tensor, map_i, map_i_inverse, sts_tensor};
use stokes_core::rmatrix::r_am;
use stokes_core::LieContext;

fn ctx_for(n: usize, rotate: usize) -> LieContext {
    let order: Vec<usize> = (0..n).map(|i| (i + rotate) % n).collect();
    LieContext::with_order(order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn r_am_is_antisymmetric(seed in any::<u64>(), n in 1usize..4, scale in 0.01f64..0.9) {
        let x = Sampler::new(seed, 0).matrix(n, scale);
        let r = r_am(&LieContext::new(n), &x).unwrap();
        prop_assert!((r.clone() + r.flip()).max_abs() < 1e-12);
    }

    #[test]
    fn linear_tensors_are_antisymmetric(seed in any::<u64>(), n in 1usize..4, rotate in 0usize..3) {
        let x = Sampler::new(seed, 1).matrix(n, 1.0);
        prop_assert_eq!(antisymmetry_defect(&kks_tensor(&x)), 0.0);
        prop_assert!(antisymmetry_defect(&sts_tensor(&ctx_for(n, rotate), &x).unwrap()) < 1e-14);
    }

    #[test]
    fn map_i_round_trip(seed in any::<u64>(), n in 1usize..4, rotate in 0usize..3, scale in 0.01f64..0.5) {
        let ctx = ctx_for(n, rotate);
        let x = Sampler::new(seed, 2).matrix(n, scale);
        let back = map_i_inverse(&map_i(&ctx, &x).unwrap()).unwrap();
        prop_assert!(max_abs(&(back - &x)) < 1e-10);
    }

    #[test]
    fn dual_factorize_round_trip(seed in any::<u64>(), n in 1usize..4, rotate in 0usize..3) {
        let ctx = ctx_for(n, rotate);
        let g = Sampler::new(seed, 3).group(n, 0.3);
        let t = dual_factorize(&ctx, &g).unwrap();
        prop_assert!(max_abs(&(t.product().unwrap() - &g)) < 1e-11);
        prop_assert!(t.membership_residual() < 1e-11);
    }

    #[test]
    fn sampler_is_reproducible(seed in any::<u64>(), stream in 0u64..8) {
        let mut a = Sampler::new(seed, stream);
        let mut b = Sampler::new(seed, stream);
        prop_assert_eq!(a.matrix(3, 1.0), b.matrix(3, 1.0));
        prop_assert_eq!(a.group(2, 0.3), b.group(2, 0.3));
    }

    #[test]
    fn config_json_round_trip(samples in 1usize..100, seed in any::<u64>(), xnorm in 0.01f64..0.5, n in 1usize..4) {
        let mut cfg = ExperimentConfig::for_n(n);
        cfg.parse_kv(&format!("samples = {samples}\nseed = {seed}\nxnorm = {xnorm}")).unwrap();
        prop_assert_eq!((cfg.samples, cfg.seed, cfg.xnorm), (samples, seed, xnorm));
        let text = serde_json::to_string(&cfg).unwrap();
        let mut back = ExperimentConfig::default();
        back.apply_json(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
