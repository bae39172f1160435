use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{delta_projection, GOperator};
use crate::linalg::{self, eye, max_abs};
use crate::stokes::IrregularConnection;
use crate::{Mat, C64};

/// Margin on ‖(k + ad_x)⁻¹‖⁻¹ below which the residue counts as resonant.
pub const RESONANCE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pole {
    Zero,
    Infinity,
}

/// H = Σ H_k z^k at 0, or H_∞ = Σ G_k z^{−k} at ∞. Index 0 is the identity.
#[derive(Debug, Clone)]
pub struct FormalSeries {
    pub pole: Pole,
    pub coeffs: Vec<Mat>,
}

impl FormalSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Partial sum at z (powers of z at 0, of 1/z at ∞).
    pub fn eval(&self, z: C64) -> Mat {
        let w = match self.pole {
            Pole::Zero => z,
            Pole::Infinity => 1.0 / z,
        };
        // Horner
        let mut acc = self.coeffs.last().expect("nonempty series").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * w + c;
        }
        acc
    }

    /// ‖coefficient k‖·|w|^k, the size of term k at the point.
    pub fn term_size(&self, k: usize, z: C64) -> f64 {
        let w = match self.pole {
            Pole::Zero => z.norm(),
            Pole::Infinity => 1.0 / z.norm(),
        };
        max_abs(&self.coeffs[k]) * w.powi(k as i32)
    }
}

/// Formal solution H at the irregular pole: z²H' = [A0,H] + z(xH − Hδ(x)).
///
/// Order k gives [A0,H_k] = (k−1)H_{k−1} − xH_{k−1} + H_{k−1}δ; the
/// diagonal of H_k is fixed by the vanishing diagonal at order k+1.
pub fn formal_h_series(conn: &IrregularConnection, order: usize) -> FormalSeries {
    let n = conn.n();
    let a = &conn.a0;
    let x = &conn.x;
    let d = delta_projection(x);
    let mut coeffs = vec![eye(n)];
    for k in 1..=order {
        let p = &coeffs[k - 1];
        let rhs = p * C64::new((k - 1) as f64, 0.0) - x * p + p * &d;
        let mut hk = linalg::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    hk[(i, j)] = rhs[(i, j)] / (a[i] - a[j]);
                }
            }
        }
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for l in 0..n {
                if l != i {
                    s += x[(i, l)] * hk[(l, i)];
                }
            }
            hk[(i, i)] = s / k as f64;
        }
        coeffs.push(hk);
    }
    FormalSeries { pole: Pole::Zero, coeffs }
}

/// max_k ‖[A0,H_k] − ((k−1)H_{k−1} − xH_{k−1} + H_{k−1}δ)‖, with the diagonal
/// condition checked one order up.
pub fn h_recursion_residual(conn: &IrregularConnection, s: &FormalSeries) -> f64 {
    let a0 = conn.a0_matrix();
    let x = &conn.x;
    let d = delta_projection(x);
    let mut worst: f64 = 0.0;
    for k in 1..s.coeffs.len() {
        let p = &s.coeffs[k - 1];
        let rhs = p * C64::new((k - 1) as f64, 0.0) - x * p + p * &d;
        let lhs = linalg::commutator(&a0, &s.coeffs[k]);
        worst = worst.max(max_abs(&(lhs - rhs)));
    }
    worst
}

/// H_∞ = 1 + Σ G_k z^{−k} with (k + ad_x)G_k = −A0·G_{k−1}.
pub fn frobenius_hinf(conn: &IrregularConnection, order: usize) -> Result<FormalSeries> {
    let n = conn.n();
    let a0 = conn.a0_matrix();
    let adx = GOperator::ad(&conn.x).matrix;
    let id = eye(n * n);
    let mut coeffs = vec![eye(n)];
    for k in 1..=order {
        let m = &adx + &id * C64::new(k as f64, 0.0);
        let mi = linalg::inv(&m).map_err(|_| Error::Resonant { k })?;
        if 1.0 / mi.norm() < RESONANCE_MARGIN {
            return Err(Error::Resonant { k });
        }
        let rhs = -(&a0 * &coeffs[k - 1]);
        let g = mi * linalg::vec_rm(&rhs);
        coeffs.push(linalg::unvec_rm(g.as_slice(), n));
    }
    Ok(FormalSeries { pole: Pole::Infinity, coeffs })
}

/// max_k ‖k·G_k + [x, G_k] + A0·G_{k−1}‖.
pub fn hinf_recursion_residual(conn: &IrregularConnection, s: &FormalSeries) -> f64 {
    let a0 = conn.a0_matrix();
    let mut worst: f64 = 0.0;
    for k in 1..s.coeffs.len() {
        let g = &s.coeffs[k];
        let r = g * C64::new(k as f64, 0.0) + linalg::commutator(&conn.x, g) + &a0 * &s.coeffs[k - 1];
        worst = worst.max(max_abs(&r));
    }
    worst
}
