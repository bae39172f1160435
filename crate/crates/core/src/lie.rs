//! gl_n with the trace form, root data and functions of ad.

use crate::error::{Error, Result};
use crate::linalg::{self, eig, elem, eye, kron, COND_MAX};
use crate::{Mat, C64};

/// gl_n together with a positive system.
///
/// Positive systems of type A are total orders on the indices: the root
/// α_ij is positive iff i comes before j in `order`. The default order is
/// 0 < 1 < ... < n-1, i.e. upper triangular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieContext {
    n: usize,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl LieContext {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "gl_0 is not supported");
        Self { n, order: (0..n).collect(), rank: (0..n).collect() }
    }

    pub fn with_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (pos, &i) in order.iter().enumerate() {
            if i >= n || rank[i] != usize::MAX {
                return Err(Error::InvalidConfig(format!("{order:?} is not a permutation")));
            }
            rank[i] = pos;
        }
        if n == 0 {
            return Err(Error::InvalidConfig("empty order".into()));
        }
        Ok(Self { n, order, rank })
    }

    pub fn opposite(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Self::with_order(order).expect("reversed permutation")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        i != j && self.rank[i] < self.rank[j]
    }

    pub fn positive_roots(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.is_positive(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All roots α_ij, i != j.
    pub fn roots(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect()
    }

    /// α_ij(Λ) = Λ_ii − Λ_jj.
    pub fn root_value(&self, root: (usize, usize), lambda: &Mat) -> C64 {
        lambda[(root.0, root.0)] - lambda[(root.1, root.1)]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn pair_of(&self, a: usize) -> (usize, usize) {
        (a / self.n, a % self.n)
    }

    pub fn basis(&self, a: usize) -> Mat {
        let (i, j) = self.pair_of(a);
        elem(self.n, i, j)
    }

    /// Index of the trace-dual basis element: e_ij is dual to e_ji.
    pub fn dual_index(&self, a: usize) -> usize {
        let (i, j) = self.pair_of(a);
        self.index(j, i)
    }

    pub fn pairing(&self, x: &Mat, y: &Mat) -> C64 {
        (x * y).trace()
    }

    /// Permutation matrix P with (P M P^T)[a,b] = M[order[a], order[b]].
    /// Conjugating by P turns this positive system into the upper-triangular one.
    pub fn permutation(&self) -> Mat {
        let mut p = linalg::zeros(self.n);
        for (k, &i) in self.order.iter().enumerate() {
            p[(k, i)] = C64::new(1.0, 0.0);
        }
        p
    }

    /// Zero out entries that are neither diagonal nor in a positive root space.
    pub fn upper_part(&self, m: &Mat) -> Mat {
        let mut out = m.clone();
        for (i, j) in self.roots() {
            if !self.is_positive(i, j) {
                out[(i, j)] = C64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Diagonal part of x, i.e. the projection onto t along the root spaces.
pub fn delta_projection(x: &Mat) -> Mat {
    let n = x.nrows();
    let mut out = linalg::zeros(n);
    for i in 0..n {
        out[(i, i)] = x[(i, i)];
    }
    out
}

/// Linear operator on g acting on row-major vectorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct GOperator {
    pub n: usize,
    pub matrix: Mat,
}

impl GOperator {
    pub fn identity(n: usize) -> Self {
        Self { n, matrix: eye(n * n) }
    }

    /// ad_x as an n²×n² matrix.
    pub fn ad(x: &Mat) -> Self {
        let n = x.nrows();
        let m = kron(x, &eye(n)) - kron(&eye(n), &x.transpose());
        Self { n, matrix: m }
    }

    /// Ad_g(Y) = g Y g^-1.
    pub fn adjoint(g: &Mat) -> Result<Self> {
        let n = g.nrows();
        let gi = linalg::inv(g)?;
        Ok(Self { n, matrix: kron(g, &gi.transpose()) })
    }

    pub fn apply(&self, y: &Mat) -> Mat {
        let v = &self.matrix * linalg::vec_rm(y);
        linalg::unvec_rm(v.as_slice(), self.n)
    }

    pub fn compose(&self, other: &GOperator) -> GOperator {
        GOperator { n: self.n, matrix: &self.matrix * &other.matrix }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }
}

/// f(ad_x) computed from the eigendecomposition of x.
///
/// The n²×n² spectral decomposition of ad_x is used only if the n×n
/// eigenvector matrix is too ill-conditioned.
pub fn scalar_function_of_ad<F>(f: F, x: &Mat) -> Result<GOperator>
where
    F: Fn(C64) -> Result<C64>,
{
    let n = x.nrows();
    match eig(x) {
        Ok(e) if e.cond <= COND_MAX => {
            let mut fv = Vec::with_capacity(n * n);
            for p in 0..n {
                for q in 0..n {
                    fv.push(f(e.values[p] - e.values[q])?);
                }
            }
            let fd = linalg::diag(&fv);
            // Ad_V diag(F) Ad_{V^-1}
            let ad_v = kron(&e.vectors, &e.inverse.transpose());
            let ad_vi = kron(&e.inverse, &e.vectors.transpose());
            Ok(GOperator { n, matrix: ad_v * fd * ad_vi })
        }
        first => {
            let adm = GOperator::ad(x).matrix;
            let e = eig(&adm)?;
            if e.cond > COND_MAX {
                let cond = match first {
                    Ok(e1) => e1.cond.min(e.cond),
                    Err(_) => e.cond,
                };
                return Err(Error::NonDiagonalizable { cond });
            }
            let fv: Result<Vec<C64>> = e.values.iter().map(|&z| f(z)).collect();
            let fd = linalg::diag(&fv?);
            Ok(GOperator { n, matrix: &e.vectors * fd * &e.inverse })
        }
    }
}

/// Inverse of ad_x on its image, extended by zero on the centralizer.
pub fn ad_inverse_restricted(x: &Mat) -> Result<GOperator> {
    let scale = linalg::max_abs(x).max(1.0);
    scalar_function_of_ad(
        |z| Ok(if z.norm() <= 1e-10 * scale { C64::new(0.0, 0.0) } else { C64::new(1.0, 0.0) / z }),
        x,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, max_abs};

    #[test]
    fn trace_form_dual_basis() {
        let ctx = LieContext::new(3);
        for a in 0..9 {
            for b in 0..9 {
                let v = ctx.pairing(&ctx.basis(a), &ctx.basis(b));
                let want = if b == ctx.dual_index(a) { 1.0 } else { 0.0 };
                assert_eq!(v, c(want, 0.0));
            }
        }
    }

    #[test]
    fn identity_function_gives_ad() {
        let x = diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let op = scalar_function_of_ad(Ok, &x).unwrap();
        assert!(max_abs(&(op.matrix - GOperator::ad(&x).matrix)) < 1e-15);
    }

    #[test]
    fn ad_inverse_on_root_vector() {
        let x = diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let op = ad_inverse_restricted(&x).unwrap();
        let y = op.apply(&elem(2, 0, 1));
        assert!(max_abs(&(y - elem(2, 0, 1) * c(0.5, 0.0))) < 1e-15);
        assert!(max_abs(&op.apply(&x)) < 1e-15);
    }

    #[test]
    fn order_and_permutation() {
        let ctx = LieContext::with_order(vec![1, 0]).unwrap();
        assert!(ctx.is_positive(1, 0));
        assert!(!ctx.is_positive(0, 1));
        let p = ctx.permutation();
        let m = elem(2, 1, 0);
        let up = &p * m * p.transpose();
        assert_eq!(up[(0, 1)], c(1.0, 0.0));
        assert!(LieContext::with_order(vec![0, 0]).is_err());
    }
}
