//! Fixed inputs shared by the benchmarks.

use stokes_core::experiments::{ExperimentConfig, Sampler};
use stokes_core::{IrregularConnection, Mat, SectorLayout, SolverOptions};

pub struct Fixture {
    pub conn: IrregularConnection,
    pub layout: SectorLayout,
    pub opts: SolverOptions,
}

impl Fixture {
    /// The preset A0 for `n` with a seeded residue of entry modulus ≤ 0.5.
    pub fn new(n: usize) -> Self {
        let cfg = ExperimentConfig::for_n(n);
        let x: Mat = Sampler::new(7, 0).matrix(n, cfg.xnorm);
        let conn = IrregularConnection::new(&cfg.a0(), x).expect("preset A0 is regular");
        let layout = cfg.layout().expect("preset layout");
        Self { conn, layout, opts: cfg.solver_options() }
    }

    pub fn x(&self) -> &Mat {
        &self.conn.x
    }
}
