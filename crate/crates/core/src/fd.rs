//! Central finite differences with optional Richardson extrapolation.

use crate::error::{Error, Result};
use crate::tensor::TwoTensor;
use crate::{Mat, C64};

/// Steps above this are refused: the stencils here assume a local regime.
pub const MAX_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdScheme {
    pub step: f64,
    pub richardson: bool,
}

impl FdScheme {
    pub fn new(step: f64) -> Self {
        Self { step, richardson: true }
    }

    pub fn plain(step: f64) -> Self {
        Self { step, richardson: false }
    }

    pub fn halved(self) -> Self {
        Self { step: self.step / 2.0, ..self }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.step > 0.0) || self.step > MAX_STEP {
            return Err(Error::FdStepTooLarge { step: self.step });
        }
        Ok(())
    }
}

impl Default for FdScheme {
    fn default() -> Self {
        Self::new(1e-4)
    }
}

/// Values that can be combined linearly by the stencils.
pub trait Linear: Sized {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl Linear for Mat {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        self * C64::new(a, 0.0) + other * C64::new(b, 0.0)
    }
}

impl Linear for TwoTensor {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        TwoTensor { n: self.n, coeffs: self.coeffs.lin(a, &other.coeffs, b) }
    }
}

impl Linear for Vec<C64> {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        self.iter().zip(other).map(|(p, q)| p * a + q * b).collect()
    }
}

/// d/ds f(s) at s = 0.
pub fn derivative<T: Linear>(f: impl Fn(f64) -> Result<T>, scheme: FdScheme) -> Result<T> {
    scheme.check()?;
    let h = scheme.step;
    let d1 = f(h)?.lin(1.0 / (2.0 * h), &f(-h)?, -1.0 / (2.0 * h));
    if !scheme.richardson {
        return Ok(d1);
    }
    let d2 = f(2.0 * h)?.lin(1.0 / (4.0 * h), &f(-2.0 * h)?, -1.0 / (4.0 * h));
    Ok(d1.lin(4.0 / 3.0, &d2, -1.0 / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_fourth_order() {
        let f = |s: f64| Ok(vec![C64::new((1.0 + s).exp(), 0.0)]);
        let e = 1f64.exp();
        let err = |h: f64| (derivative(f, FdScheme::new(h)).unwrap()[0].re - e).abs();
        let ratio = err(1e-2) / err(5e-3);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
        let plain = |h: f64| (derivative(f, FdScheme::plain(h)).unwrap()[0].re - e).abs();
        let r2 = plain(1e-2) / plain(5e-3);
        assert!(r2 > 3.5 && r2 < 4.5, "{r2}");
    }

    #[test]
    fn large_step_refused() {
        let f = |_s: f64| Ok(vec![C64::new(0.0, 0.0)]);
        assert!(matches!(derivative(f, FdScheme::new(0.5)), Err(Error::FdStepTooLarge { .. })));
    }
}
