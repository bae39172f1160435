//! Monodromy data of ∇ = d − (A0/z² + x/z)dz on P¹.

mod field;
mod layout;
mod series;
mod solve;

pub use field::C2piField;
pub use layout::{check_regular, SectorLayout, BASE_RAY_MARGIN, REGULARITY_MARGIN};
pub use series::{
    formal_h_series, frobenius_hinf, h_recursion_residual, hinf_recursion_residual, FormalSeries, Pole,
    RESONANCE_MARGIN,
};
pub use solve::{
    canonical_frame, connection_matrix, seeded_h, SEED_CORRECTION_LIMIT, eval_canonical_f, eval_f_infinity, eval_f_infinity_via, literal_relation_residual,
    monodromy, monodromy_relation_residual, stokes_map, stokes_matrices, MonodromyData, SolverOptions,
};

use crate::error::Result;
use crate::lie::LieContext;
use crate::linalg::diag;
use crate::{Mat, C64};

/// The pair (A0, x). A0 is regular diagonal and stored by its entries.
#[derive(Debug, Clone)]
pub struct IrregularConnection {
    pub ctx: LieContext,
    pub a0: Vec<C64>,
    pub x: Mat,
}

impl IrregularConnection {
    pub fn new(a0: &[C64], x: Mat) -> Result<Self> {
        check_regular(a0)?;
        assert_eq!(x.nrows(), a0.len(), "x and A0 sizes differ");
        Ok(Self { ctx: LieContext::new(a0.len()), a0: a0.to_vec(), x })
    }

    pub fn n(&self) -> usize {
        self.a0.len()
    }

    pub fn a0_matrix(&self) -> Mat {
        diag(&self.a0)
    }

    pub fn with_residue(&self, x: Mat) -> Self {
        Self { ctx: self.ctx.clone(), a0: self.a0.clone(), x }
    }
}
