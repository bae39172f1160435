use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::LieContext;
use crate::C64;

/// Minimum separation of the eigenvalues of A0.
pub const REGULARITY_MARGIN: f64 = 1e-6;
/// Minimum angular distance of the base direction from every ray.
pub const BASE_RAY_MARGIN: f64 = 1e-8;
const SAME_RAY: f64 = 1e-10;

/// Stokes rays, sectors and the positive system they induce.
///
/// Angles are absolute reals. The rays are listed as d₁ < d₂ < … < d_{2l}
/// starting from the positive edge d₁ of Sect₀, so Sect₀ is
/// (d_{2l} − 2π, d₁) and Sect_k is (d_k, d_{k+1}). log z is taken with the
/// cut along d₁, i.e. arg z ∈ (d₁ − 2π, d₁).
#[derive(Debug, Clone, Serialize)]
pub struct SectorLayout {
    pub a0: Vec<(f64, f64)>,
    pub base_direction: f64,
    pub rays: Vec<f64>,
    /// Roots α_ij (as index pairs) whose ray is the corresponding entry of `rays`.
    pub ray_roots: Vec<Vec<(usize, usize)>>,
    pub l: usize,
    #[serde(skip)]
    pub ordering: LieContext,
}

fn wrap(angle: f64) -> f64 {
    angle.rem_euclid(TAU)
}

/// Signed angular distance reduced to (−π, π].
fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

pub fn check_regular(a0: &[C64]) -> Result<()> {
    let mut margin = f64::INFINITY;
    for i in 0..a0.len() {
        for j in i + 1..a0.len() {
            margin = margin.min((a0[i] - a0[j]).norm());
        }
    }
    if margin < REGULARITY_MARGIN {
        return Err(Error::DegenerateA0 { margin });
    }
    Ok(())
}

impl SectorLayout {
    pub fn new(a0: &[C64], base_direction: f64) -> Result<Self> {
        check_regular(a0)?;
        let n = a0.len();
        let a0_pairs: Vec<(f64, f64)> = a0.iter().map(|z| (z.re, z.im)).collect();
        if n == 1 {
            return Ok(Self {
                a0: a0_pairs,
                base_direction,
                rays: Vec::new(),
                ray_roots: Vec::new(),
                l: 0,
                ordering: LieContext::new(1),
            });
        }
        // distinct directions mod 2π
        let mut dirs: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ang = wrap((a0[i] - a0[j]).arg());
                match dirs.iter_mut().find(|(a, _)| angular_gap(*a, ang).abs() < SAME_RAY) {
                    Some((_, roots)) => roots.push((i, j)),
                    None => dirs.push((ang, vec![(i, j)])),
                }
            }
        }
        for (a, _) in &dirs {
            if angular_gap(*a, base_direction).abs() < BASE_RAY_MARGIN {
                return Err(Error::BaseOnRay { angle: base_direction });
            }
        }
        // d₁ is the first ray counterclockwise from the base direction
        let mut rel: Vec<(f64, Vec<(usize, usize)>)> =
            dirs.into_iter().map(|(a, r)| ((a - base_direction).rem_euclid(TAU), r)).collect();
        rel.sort_by(|p, q| p.0.total_cmp(&q.0));
        let rays: Vec<f64> = rel.iter().map(|(d, _)| base_direction + d).collect();
        let ray_roots: Vec<Vec<(usize, usize)>> = rel.into_iter().map(|(_, r)| r).collect();
        let l = rays.len() / 2;

        // Φ₊: roots on d₁..d_l. rank[i] counts the positive roots α_ji.
        let mut rank = vec![0usize; n];
        for roots in &ray_roots[..l] {
            for &(_, j) in roots {
                rank[j] += 1;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| rank[i]);
        let ordering = LieContext::with_order(order)?;
        for (k, roots) in ray_roots.iter().enumerate() {
            for &(i, j) in roots {
                if ordering.is_positive(i, j) != (k < l) {
                    return Err(Error::InvalidConfig("rays do not induce a positive system".into()));
                }
            }
        }
        Ok(Self { a0: a0_pairs, base_direction, rays, ray_roots, l, ordering })
    }

    pub fn a0(&self) -> Vec<C64> {
        self.a0.iter().map(|&(re, im)| C64::new(re, im)).collect()
    }

    pub fn sector_count(&self) -> usize {
        self.rays.len().max(1)
    }

    /// Sect₀ as (lower edge, upper edge).
    pub fn sect0(&self) -> (f64, f64) {
        match self.rays.len() {
            0 => (self.base_direction - PI, self.base_direction + PI),
            m => (self.rays[m - 1] - TAU, self.rays[0]),
        }
    }

    /// Bisector of Sect_k expressed on the branch arg z ∈ (d₁ − 2π, d₁).
    pub fn bisector(&self, k: usize) -> f64 {
        let m = self.rays.len();
        if m == 0 {
            return self.base_direction;
        }
        if k == 0 {
            let (lo, hi) = self.sect0();
            return 0.5 * (lo + hi);
        }
        assert!(k < m, "sector index out of range");
        0.5 * (self.rays[k - 1] + self.rays[k]) - TAU
    }

    /// Edges of Sect_k on the same branch as [`SectorLayout::bisector`].
    pub fn sector_edges(&self, k: usize) -> (f64, f64) {
        let m = self.rays.len();
        if m == 0 || k == 0 {
            return self.sect0();
        }
        assert!(k < m, "sector index out of range");
        (self.rays[k - 1] - TAU, self.rays[k] - TAU)
    }

    /// Branch angle of log z on Sect₀: the cut sits on d₁.
    pub fn log_branch(&self) -> f64 {
        self.sect0().1
    }

    pub fn positive_roots(&self) -> Vec<(usize, usize)> {
        self.ordering.positive_roots()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gl2_upper_half_plane() {
        let lay = SectorLayout::new(&[c(1.0, 0.0), c(-1.0, 0.0)], PI / 2.0).unwrap();
        assert_eq!(lay.rays.len(), 2);
        assert!((lay.rays[0] - PI).abs() < 1e-15);
        assert!((lay.rays[1] - TAU).abs() < 1e-15);
        let (lo, hi) = lay.sect0();
        assert!(lo.abs() < 1e-15 && (hi - PI).abs() < 1e-15);
        // a1 − a0 = −2 lies on d₁ = π
        assert_eq!(lay.positive_roots(), vec![(1, 0)]);
    }

    #[test]
    fn imaginary_a0() {
        let lay = SectorLayout::new(&[c(0.0, 1.0), c(0.0, -1.0)], 0.0).unwrap();
        let mut angs: Vec<f64> = lay.rays.iter().map(|a| wrap(*a)).collect();
        angs.sort_by(f64::total_cmp);
        assert!((angs[0] - PI / 2.0).abs() < 1e-15 && (angs[1] - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn gl3_six_rays() {
        let lay = SectorLayout::new(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)], 0.75 * PI).unwrap();
        assert_eq!(lay.rays.len(), 6);
        assert_eq!(lay.l, 3);
        assert_eq!(lay.positive_roots().len(), 3);
        assert!((lay.bisector(3) + 0.25 * PI).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(SectorLayout::new(&[c(1.0, 0.0), c(1.0, 0.0)], 0.3), Err(Error::DegenerateA0 { .. })));
        assert!(matches!(SectorLayout::new(&[c(1.0, 0.0), c(-1.0, 0.0)], 0.0), Err(Error::BaseOnRay { .. })));
    }
}
