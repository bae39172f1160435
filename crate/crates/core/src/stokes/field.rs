use std::collections::HashMap;
use std::f64::consts::TAU;

use parking_lot::RwLock;

use crate::error::Result;
use crate::rmatrix::GValuedMap;
use crate::stokes::{connection_matrix, IrregularConnection, SectorLayout, SolverOptions};
use crate::{Mat, C64};

/// x ↦ C(x/2πi) for fixed A0 and sector layout, memoized.
pub struct C2piField {
    a0: Vec<C64>,
    layout: SectorLayout,
    opts: SolverOptions,
    cache: RwLock<HashMap<Vec<u64>, Mat>>,
}

impl C2piField {
    pub fn new(a0: &[C64], layout: SectorLayout, opts: SolverOptions) -> Result<Self> {
        crate::stokes::check_regular(a0)?;
        Ok(Self { a0: a0.to_vec(), layout, opts, cache: RwLock::new(HashMap::new()) })
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    pub fn cached_points(&self) -> usize {
        self.cache.read().len()
    }

    fn key(&self, x: &Mat) -> Vec<u64> {
        let mut k: Vec<u64> = x.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect();
        k.push(self.opts.ode.rtol.to_bits());
        k.push(self.opts.ode.atol.to_bits());
        k
    }
}

impl GValuedMap for C2piField {
    fn n(&self) -> usize {
        self.a0.len()
    }

    fn eval(&self, x: &Mat) -> Result<Mat> {
        let key = self.key(x);
        if let Some(c) = self.cache.read().get(&key) {
            return Ok(c.clone());
        }
        let scaled = x / C64::new(0.0, TAU);
        let conn = IrregularConnection::new(&self.a0, scaled)?;
        let c = connection_matrix(&conn, &self.layout, &self.opts)?;
        self.cache.write().insert(key, c.clone());
        Ok(c)
    }
}
