//! Poisson bivectors, symplectic forms and the maps between them.

mod forms;
mod groupoid;
mod reduction;
mod tensors;
mod triple;
mod verify;

pub use forms::{
    fusion_form, moment_level_residual, omega_extended_orbit, omega_sigma, orbit_chart_tangent, qh_form, qh_moment,
    qh_moment_tangent, residue_pairing, truncated_bracket, FusionFactor, FusionValue, OrbitPoint, OrbitTangent,
    QhPoint, QhTangent, SigmaTangent, CONSTRAINT_TOL,
};
pub use groupoid::{arrow_coords, is_diagonal_triple, map_v, mixed_bracket_residual, Arrow, Groupoid, VImage};
pub use reduction::{
    constrained_monodromy_point, monodromy_constraint_residual, monodromy_reduction_forms, orbit_reduction_identity,
    reduction_monodromy, reduction_orbit_iota, MonodromyReductionValues, MonodromyTangent, OrbitReductionValues,
    SigmaPrimeImage, REDUCTION_CONSTRAINT_TOL, SIGMA_PRIME_TERMS,
};
pub use tensors::{
    am_coords, antisymmetry_defect, chart_bivector, check_tprime, kks_tensor, pi_am_tensor, pi_am_tensor_with,
    pi_r_tensor, pi_sigma_tensor, sigma_coords, split_am_coords, split_sigma_coords, sts_tensor, AmTerms,
    ChartField, ChartTerms, Kks, PiAm, Shifted, Sts, TensorField, TPRIME_MARGIN,
};
pub use triple::{dual_factorize, factorization_tangent, map_i, map_i_inverse, GStarTriple, BIG_CELL_PIVOT};
pub use verify::{
    calibrate_scale, f_g_coords, f_prime_g, jacobi_residual, jacobian, poisson_map_residual, pushforward,
    pushforward_residual, MapResidual, PushforwardResidual,
};
