//! Tensors in g⊗g and g⊗g⊗g for g = gl_n.
//!
//! A two-tensor is stored by coefficients: `coeffs[(a, b)]` multiplies
//! e_a ⊗ e_b, with a = i*n+j for e_ij. A three-tensor is stored as its image
//! in End(V⊗V⊗V), which is exactly g⊗g⊗g for gl_n; commutators of embedded
//! two-tensors are then plain matrix commutators.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Result;
use crate::lie::{GOperator, LieContext};
use crate::linalg::{self, kron};
use crate::{Mat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoTensor {
    pub n: usize,
    pub coeffs: Mat,
}

impl TwoTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, coeffs: Mat::zeros(n * n, n * n) }
    }

    pub fn from_coeffs(n: usize, coeffs: Mat) -> Self {
        assert_eq!(coeffs.shape(), (n * n, n * n));
        Self { n, coeffs }
    }

    /// a ⊗ b for matrices a, b expanded in the elementary basis.
    pub fn pure(a: &Mat, b: &Mat) -> Self {
        let n = a.nrows();
        let va = linalg::vec_rm(a);
        let vb = linalg::vec_rm(b);
        Self { n, coeffs: va * vb.transpose() }
    }

    pub fn wedge(a: &Mat, b: &Mat) -> Self {
        Self::pure(a, b) - Self::pure(b, a)
    }

    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        self.coeffs[(a, b)]
    }

    pub fn flip(&self) -> Self {
        Self { n: self.n, coeffs: self.coeffs.transpose() }
    }

    /// ½(T − flip T).
    pub fn antisymmetric_part(&self) -> Self {
        (self.clone() - self.flip()) * 0.5
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.coeffs)
    }

    /// (L ⊗ id) T.
    pub fn apply_left(&self, op: &GOperator) -> Self {
        Self { n: self.n, coeffs: &op.matrix * &self.coeffs }
    }

    /// (id ⊗ L) T.
    pub fn apply_right(&self, op: &GOperator) -> Self {
        Self { n: self.n, coeffs: &self.coeffs * op.matrix.transpose() }
    }

    /// (Ad_g ⊗ Ad_g) T.
    pub fn conjugate(&self, g: &Mat) -> Result<Self> {
        let ad = GOperator::adjoint(g)?;
        Ok(self.apply_left(&ad).apply_right(&ad))
    }

    /// Image in End(V⊗V): Σ c_ab e_a ⊗ e_b as a Kronecker product.
    pub fn to_operator(&self) -> Mat {
        let n = self.n;
        let mut m = Mat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        m[(i * n + k, j * n + l)] = self.coeffs[(i * n + j, k * n + l)];
                    }
                }
            }
        }
        m
    }

    pub fn from_operator(n: usize, m: &Mat) -> Self {
        let mut c = Mat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        c[(i * n + j, k * n + l)] = m[(i * n + k, j * n + l)];
                    }
                }
            }
        }
        Self { n, coeffs: c }
    }

    /// Contract the second slot with y via the trace form: Σ c_ab ⟨e_b, y⟩ e_a.
    pub fn contract_second(&self, y: &Mat) -> Mat {
        let n = self.n;
        let yd = linalg::vec_rm(&y.transpose());
        let v = &self.coeffs * yd;
        linalg::unvec_rm(v.as_slice(), n)
    }
}

impl Add for TwoTensor {
    type Output = TwoTensor;
    fn add(self, rhs: TwoTensor) -> TwoTensor {
        TwoTensor { n: self.n, coeffs: self.coeffs + rhs.coeffs }
    }
}

impl Sub for TwoTensor {
    type Output = TwoTensor;
    fn sub(self, rhs: TwoTensor) -> TwoTensor {
        TwoTensor { n: self.n, coeffs: self.coeffs - rhs.coeffs }
    }
}

impl Neg for TwoTensor {
    type Output = TwoTensor;
    fn neg(self) -> TwoTensor {
        TwoTensor { n: self.n, coeffs: -self.coeffs }
    }
}

impl Mul<f64> for TwoTensor {
    type Output = TwoTensor;
    fn mul(self, s: f64) -> TwoTensor {
        TwoTensor { n: self.n, coeffs: self.coeffs * C64::new(s, 0.0) }
    }
}

impl Mul<C64> for TwoTensor {
    type Output = TwoTensor;
    fn mul(self, s: C64) -> TwoTensor {
        TwoTensor { n: self.n, coeffs: self.coeffs * s }
    }
}

/// t = Σ e_ij ⊗ e_ji.
pub fn casimir(ctx: &LieContext) -> TwoTensor {
    let n = ctx.n();
    let mut t = TwoTensor::zeros(n);
    for a in 0..ctx.dim() {
        t.coeffs[(a, ctx.dual_index(a))] = C64::new(1.0, 0.0);
    }
    t
}

/// r = ½t + ½ Σ_{α>0} e_α ∧ e_{−α} for the positive system of `ctx`.
pub fn standard_r(ctx: &LieContext) -> TwoTensor {
    let mut r = casimir(ctx) * 0.5;
    for (i, j) in ctx.positive_roots() {
        let a = ctx.index(i, j);
        let b = ctx.index(j, i);
        r.coeffs[(a, b)] += C64::new(0.5, 0.0);
        r.coeffs[(b, a)] -= C64::new(0.5, 0.0);
    }
    r
}

/// r₀ = ½ Σ_{α>0} e_α ∧ e_{−α}.
pub fn standard_r0(ctx: &LieContext) -> TwoTensor {
    standard_r(ctx).antisymmetric_part()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTensor {
    pub n: usize,
    /// Image in End(V⊗V⊗V), an n³×n³ matrix.
    pub op: Mat,
}

impl ThreeTensor {
    pub fn zeros(n: usize) -> Self {
        let d = n * n * n;
        Self { n, op: Mat::zeros(d, d) }
    }

    /// Coefficient of e_a ⊗ e_b ⊗ e_c.
    pub fn coeff(&self, a: usize, b: usize, c: usize) -> C64 {
        let n = self.n;
        let (o0, i0) = (a / n, a % n);
        let (o1, i1) = (b / n, b % n);
        let (o2, i2) = (c / n, c % n);
        self.op[((o0 * n + o1) * n + o2, (i0 * n + i1) * n + i2)]
    }

    /// e ⊗ T with e in the first slot.
    pub fn first_slot(e: &Mat, t: &TwoTensor) -> Self {
        Self { n: t.n, op: kron(e, &t.to_operator()) }
    }

    /// Embed a two-tensor into the slots (s, t), identity in the third.
    pub fn embed(r: &TwoTensor, slots: (usize, usize)) -> Self {
        let n = r.n;
        let mut out = Self::zeros(n);
        let free = 3 - slots.0 - slots.1;
        for a in 0..n * n {
            for b in 0..n * n {
                let c = r.coeffs[(a, b)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for m in 0..n {
                    let mut o = [0usize; 3];
                    let mut i = [0usize; 3];
                    o[slots.0] = a / n;
                    i[slots.0] = a % n;
                    o[slots.1] = b / n;
                    i[slots.1] = b % n;
                    o[free] = m;
                    i[free] = m;
                    out.op[((o[0] * n + o[1]) * n + o[2], (i[0] * n + i[1]) * n + i[2])] += c;
                }
            }
        }
        out
    }

    /// Slot s of self becomes slot p[s] of the result.
    pub fn permute(&self, p: [usize; 3]) -> Self {
        let n = self.n;
        let d = n * n * n;
        let mut out = Self::zeros(n);
        let split = |k: usize| [k / (n * n), (k / n) % n, k % n];
        for row in 0..d {
            let o = split(row);
            let mut o2 = [0usize; 3];
            for s in 0..3 {
                o2[p[s]] = o[s];
            }
            let r2 = (o2[0] * n + o2[1]) * n + o2[2];
            for col in 0..d {
                let v = self.op[(row, col)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let i = split(col);
                let mut i2 = [0usize; 3];
                for s in 0..3 {
                    i2[p[s]] = i[s];
                }
                out.op[(r2, (i2[0] * n + i2[1]) * n + i2[2])] = v;
            }
        }
        out
    }

    /// Alt(T) = Σ_{σ∈S₃} sgn(σ) σ(T), without a 1/3! factor.
    pub fn alt(&self) -> Self {
        const PERMS: [([usize; 3], f64); 6] = [
            ([0, 1, 2], 1.0),
            ([1, 2, 0], 1.0),
            ([2, 0, 1], 1.0),
            ([1, 0, 2], -1.0),
            ([0, 2, 1], -1.0),
            ([2, 1, 0], -1.0),
        ];
        let mut out = Self::zeros(self.n);
        for (p, s) in PERMS {
            out.op += self.permute(p).op * C64::new(s, 0.0);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.op)
    }
}

impl Add for ThreeTensor {
    type Output = ThreeTensor;
    fn add(self, rhs: ThreeTensor) -> ThreeTensor {
        ThreeTensor { n: self.n, op: self.op + rhs.op }
    }
}

impl Sub for ThreeTensor {
    type Output = ThreeTensor;
    fn sub(self, rhs: ThreeTensor) -> ThreeTensor {
        ThreeTensor { n: self.n, op: self.op - rhs.op }
    }
}

impl Mul<f64> for ThreeTensor {
    type Output = ThreeTensor;
    fn mul(self, s: f64) -> ThreeTensor {
        ThreeTensor { n: self.n, op: self.op * C64::new(s, 0.0) }
    }
}

/// [r¹²,r¹³] + [r¹²,r²³] + [r¹³,r²³].
pub fn cybe(r: &TwoTensor) -> ThreeTensor {
    let a = ThreeTensor::embed(r, (0, 1)).op;
    let b = ThreeTensor::embed(r, (0, 2)).op;
    let c = ThreeTensor::embed(r, (1, 2)).op;
    let com = |p: &Mat, q: &Mat| p * q - q * p;
    ThreeTensor { n: r.n, op: com(&a, &b) + com(&a, &c) + com(&b, &c) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::elem;

    #[test]
    fn operator_roundtrip() {
        let ctx = LieContext::new(2);
        let r = standard_r(&ctx);
        let back = TwoTensor::from_operator(2, &r.to_operator());
        assert_eq!(back, r);
    }

    #[test]
    fn casimir_operator_is_swap() {
        let ctx = LieContext::new(3);
        let p = casimir(&ctx).to_operator();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p[(i * 3 + j, j * 3 + i)], C64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn r_plus_flip_is_casimir() {
        let ctx = LieContext::with_order(vec![2, 0, 1]).unwrap();
        let r = standard_r(&ctx);
        assert_eq!(r.clone() + r.flip(), casimir(&ctx));
    }

    #[test]
    fn r0_for_gl2() {
        let ctx = LieContext::new(2);
        let r0 = standard_r0(&ctx);
        let want = TwoTensor::wedge(&elem(2, 0, 1), &elem(2, 1, 0)) * 0.5;
        assert!((r0 - want).max_abs() < 1e-16);
    }

    #[test]
    fn coefficient_access_matches_embedding() {
        let ctx = LieContext::new(2);
        let t = TwoTensor::pure(&elem(2, 0, 1), &elem(2, 1, 1));
        let e = ThreeTensor::embed(&t, (0, 2));
        // e_01 ⊗ 1 ⊗ e_11 has coefficient 1 on e_01 ⊗ e_00 ⊗ e_11
        assert_eq!(e.coeff(ctx.index(0, 1), ctx.index(0, 0), ctx.index(1, 1)), C64::new(1.0, 0.0));
        assert_eq!(e.coeff(ctx.index(0, 1), ctx.index(0, 1), ctx.index(1, 1)), C64::new(0.0, 0.0));
    }

    #[test]
    fn alt_of_alt_is_six_alt() {
        let t = ThreeTensor::first_slot(&elem(2, 0, 1), &TwoTensor::pure(&elem(2, 1, 0), &elem(2, 0, 0)));
        let a = t.alt();
        let aa = a.alt();
        assert!((aa - a * 6.0).max_abs() < 1e-14);
    }
}
