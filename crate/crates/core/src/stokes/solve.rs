use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::delta_projection;
use crate::linalg::{diag, diag_of, expm, eye, inv, max_abs};
use crate::ode::{integrate_path, integrate_segment, OdeStats, OdeTolerances};
use crate::poisson::GStarTriple;
use crate::stokes::series::{formal_h_series, frobenius_hinf, FormalSeries};
use crate::stokes::{IrregularConnection, SectorLayout};
use crate::{Mat, C64};

/// Off-structure entries of S± above this signal a layout or branch bug.
pub const TRIANGULARITY_LIMIT: f64 = 1e-6;
pub const MEMBERSHIP_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub ode: OdeTolerances,
    /// Cap on the truncation order of the asymptotic seed at 0.
    pub series_cap: usize,
    /// Fixed seed order; the cap is used when absent.
    pub seed_order: Option<usize>,
    /// Size of the first omitted seed terms.
    pub seed_tol: f64,
    pub frobenius_order: usize,
    pub tail_tol: f64,
    /// |z_m| of the matching point on the bisector of Sect₀.
    pub match_radius: f64,
    /// Chords per arc when transporting frames between sectors.
    pub arc_segments: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ode: OdeTolerances::default(),
            series_cap: 40,
            seed_order: None,
            seed_tol: 1e-15,
            frobenius_order: 80,
            tail_tol: 1e-17,
            match_radius: 1.0,
            arc_segments: 16,
        }
    }
}

fn min_gap(a0: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..a0.len() {
        for j in i + 1..a0.len() {
            m = m.min((a0[i] - a0[j]).norm());
        }
    }
    if m.is_finite() {
        m
    } else {
        1.0
    }
}

fn exp_factor(conn: &IrregularConnection, radius: f64, theta: f64) -> Mat {
    let z = C64::from_polar(radius, theta);
    let logz = C64::new(radius.ln(), theta);
    let d = diag_of(&conn.x);
    let v: Vec<C64> = conn.a0.iter().zip(&d).map(|(a, di)| (-a / z + di * logz).exp()).collect();
    diag(&v)
}

fn h_rhs(conn: &IrregularConnection) -> impl Fn(C64, &Mat) -> Mat + '_ {
    let a0 = conn.a0_matrix();
    let d = delta_projection(&conn.x);
    move |z: C64, h: &Mat| {
        let lin = &a0 * h - h * &a0 + (&conn.x * h - h * &d) * z;
        lin / (z * z)
    }
}

fn f_rhs(conn: &IrregularConnection) -> impl Fn(C64, &Mat) -> Mat + '_ {
    let a0 = conn.a0_matrix();
    move |z: C64, f: &Mat| (&a0 / (z * z) + &conn.x / z) * f
}

/// H at z₀ = r₀e^{iθ} from the truncated asymptotic series.
fn seed(conn: &IrregularConnection, theta: f64, opts: &SolverOptions) -> Result<(Mat, f64)> {
    let m = min_gap(&conn.a0);
    let order = opts.seed_order.unwrap_or(opts.series_cap).max(1);
    let full = formal_h_series(conn, order + 2);
    // least-term bound: terms decrease up to order while r ≤ m/order
    let mut r = m / order as f64;
    let r_min = r / 10.0;
    loop {
        let z0 = C64::from_polar(r, theta);
        let tail = full.term_size(order + 1, z0) + full.term_size(order + 2, z0);
        if tail <= opts.seed_tol {
            let truncated = FormalSeries { pole: full.pole, coeffs: full.coeffs[..=order].to_vec() };
            return Ok((truncated.eval(z0), r));
        }
        r *= 0.8;
        if r < r_min {
            return Err(Error::SeedAccuracy { term: tail });
        }
    }
}

/// Largest tolerated size of the seed corrections removed by the two-ray
/// factorization; beyond this the cancellation would eat the accuracy.
pub const SEED_CORRECTION_LIMIT: f64 = 1e6;

/// Canonical solution on Sect_k at radius r on its bisector.
///
/// A seed on a single ray θ converges to the Borel sum of the formal solution
/// in direction θ, which agrees with F_k only up to columns that are
/// recessive along θ: Y_θ = F_k·(1 + N_θ) with (N_θ)_ij ≠ 0 only when
/// Re((a_i − a_j)e^{−iθ}) > 0. Seeding on θ = bisector − π/2 and on θ + π,
/// both inside the supersector, gives two such matrices with opposite
/// dominance orders, so Y_θ⁻¹Y_{θ+π} = (1 + N_θ)⁻¹(1 + N_{θ+π}) is an LU
/// factorization in the order of Re(a_i e^{−iθ}), and F_k = Y_θ·L.
pub fn canonical_frame(
    conn: &IrregularConnection,
    layout: &SectorLayout,
    sector: usize,
    radius: f64,
    opts: &SolverOptions,
) -> Result<(Mat, OdeStats)> {
    let n = conn.n();
    let bis = layout.bisector(sector);
    let ef = exp_factor(conn, radius, bis);
    if n < 2 || layout.rays.is_empty() {
        let (h, stats) = seeded_h(conn, bis, radius, bis, opts)?;
        return Ok((h * ef, stats));
    }
    let th = bis - FRAC_PI_2;
    let (ha, mut stats) = seeded_h(conn, th, radius, bis, opts)?;
    let (hb, s) = seeded_h(conn, th + PI, radius, bis, opts)?;
    stats += s;
    let ya = ha * &ef;
    let yb = hb * &ef;
    let t = inv(&ya)? * &yb;
    // ascending Re(a_i e^{−iθ}): the corrections of Y_θ become strictly lower
    let w = C64::from_polar(1.0, -th);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| (conn.a0[i] * w).re.total_cmp(&(conn.a0[j] * w).re));
    let tp = Mat::from_fn(n, n, |i, j| t[(order[i], order[j])]);
    let lower = unit_lower_factor(&tp)?;
    let correction = max_abs(&lower);
    if correction > SEED_CORRECTION_LIMIT {
        return Err(Error::SeedAccuracy { term: correction });
    }
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(order[i], order[j])] = lower[(i, j)];
        }
    }
    Ok((ya * l, stats))
}

/// L of the Doolittle factorization A = L·U, without pivoting.
fn unit_lower_factor(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let mut u = a.clone();
    let mut l = eye(n);
    for k in 0..n {
        let p = u[(k, k)];
        if p.norm() < 1e-12 {
            return Err(Error::SeedAccuracy { term: p.norm() });
        }
        for i in k + 1..n {
            let f = u[(i, k)] / p;
            l[(i, k)] = f;
            for j in k..n {
                let v = u[(k, j)];
                u[(i, j)] -= f * v;
            }
        }
    }
    Ok(l)
}

/// H seeded on the ray θ, carried to radius r and along the circle to `target`.
pub fn seeded_h(conn: &IrregularConnection, theta: f64, radius: f64, target: f64, opts: &SolverOptions) -> Result<(Mat, OdeStats)> {
    let (h0, r0) = seed(conn, theta, opts)?;
    let (mut h, mut stats) = if radius > r0 {
        integrate_segment(h_rhs(conn), &h0, C64::from_polar(r0, theta), C64::from_polar(radius, theta), &opts.ode)?
    } else {
        (h0, OdeStats::default())
    };
    if theta != target {
        let (moved, s) = integrate_path(h_rhs(conn), &h, &arc_points(radius, theta, target, opts.arc_segments), &opts.ode)?;
        stats += s;
        h = moved;
    }
    Ok((h, stats))
}

/// F_k(z) for z = re^{iθ} with θ measured on the branch arg ∈ (d₁ − 2π, d₁).
pub fn eval_canonical_f(
    conn: &IrregularConnection,
    layout: &SectorLayout,
    sector: usize,
    radius: f64,
    theta: f64,
    opts: &SolverOptions,
) -> Result<Mat> {
    let bis = layout.bisector(sector);
    let (f, _) = canonical_frame(conn, layout, sector, radius, opts)?;
    if theta == bis {
        return Ok(f);
    }
    Ok(integrate_path(f_rhs(conn), &f, &arc_points(radius, bis, theta, opts.arc_segments), &opts.ode)?.0)
}

fn arc_points(radius: f64, from: f64, to: f64, segments: usize) -> Vec<C64> {
    let m = segments.max(1);
    (0..=m).map(|k| C64::from_polar(radius, from + (to - from) * k as f64 / m as f64)).collect()
}

/// F_∞ = H_∞ z^x at re^{iθ}, from the convergent series at R₀ ≥ r followed by
/// radial transport inward.
pub fn eval_f_infinity(conn: &IrregularConnection, radius: f64, theta: f64, opts: &SolverOptions) -> Result<Mat> {
    let series = frobenius_hinf(conn, opts.frobenius_order)?;
    let k = series.order();
    let mut r0 = radius;
    while series.term_size(k, C64::from_polar(r0, theta)) > opts.tail_tol {
        r0 *= 1.25;
        if r0 > 1e6 {
            return Err(Error::SeedAccuracy { term: series.term_size(k, C64::from_polar(r0, theta)) });
        }
    }
    eval_f_infinity_via(conn, &series, r0, radius, theta, opts)
}

/// Series at |z| = `from`, then the ODE to |z| = `to` along the ray θ.
pub fn eval_f_infinity_via(
    conn: &IrregularConnection,
    series: &FormalSeries,
    from: f64,
    to: f64,
    theta: f64,
    opts: &SolverOptions,
) -> Result<Mat> {
    let z = C64::from_polar(from, theta);
    let logz = C64::new(from.ln(), theta);
    let f0 = series.eval(z) * expm(&(&conn.x * logz));
    if from == to {
        return Ok(f0);
    }
    Ok(integrate_segment(f_rhs(conn), &f0, z, C64::from_polar(to, theta), &opts.ode)?.0)
}

/// C = F₀(z_m)⁻¹ F_∞(z_m) on the bisector of Sect₀.
pub fn connection_matrix(conn: &IrregularConnection, layout: &SectorLayout, opts: &SolverOptions) -> Result<Mat> {
    let th = layout.bisector(0);
    let r = opts.match_radius;
    let (f0, _) = canonical_frame(conn, layout, 0, r, opts)?;
    let finf = eval_f_infinity(conn, r, th, opts)?;
    Ok(inv(&f0)? * finf)
}

/// (S₊, S₋): F₀ = F_l S₊ e^{2πiδ} after continuing F₀ across d₁..d_l, and
/// F_l = F₀ S₋ after continuing F_l across d_{l+1}..d_{2l}.
pub fn stokes_matrices(conn: &IrregularConnection, layout: &SectorLayout, opts: &SolverOptions) -> Result<(Mat, Mat)> {
    let n = conn.n();
    if layout.rays.is_empty() {
        return Ok((eye(n), eye(n)));
    }
    let (f0, _) = canonical_frame(conn, layout, 0, 1.0, opts)?;
    stokes_from_frame(conn, layout, &f0, opts)
}

fn stokes_from_frame(conn: &IrregularConnection, layout: &SectorLayout, f0: &Mat, opts: &SolverOptions) -> Result<(Mat, Mat)> {
    let th0 = layout.bisector(0);
    let thl = layout.bisector(layout.l);
    let (fl, _) = canonical_frame(conn, layout, layout.l, 1.0, opts)?;
    let rhs = f_rhs(conn);
    let fl_cont = integrate_path(&rhs, &fl, &arc_points(1.0, thl, th0, opts.arc_segments), &opts.ode)?.0;
    let s_minus = inv(f0)? * fl_cont;
    let f0_cont = integrate_path(&rhs, f0, &arc_points(1.0, th0, thl + TAU, opts.arc_segments), &opts.ode)?.0;
    let e = expm(&(delta_projection(&conn.x) * C64::new(0.0, -TAU)));
    let s_plus = inv(&fl)? * f0_cont * e;
    Ok((s_plus, s_minus))
}

#[derive(Debug, Clone)]
pub struct MonodromyData {
    pub x: Mat,
    pub c: Mat,
    pub s_plus: Mat,
    pub s_minus: Mat,
    pub delta: Mat,
    pub layout: SectorLayout,
    pub tolerances: OdeTolerances,
    /// Largest entry of S± outside the unipotent pattern of the layout ordering.
    pub off_structure: f64,
}

/// Deviation of S₊ from U₊ and of S₋ from U₋ for the layout ordering.
pub fn off_structure(layout: &SectorLayout, s_plus: &Mat, s_minus: &Mat) -> f64 {
    let n = s_plus.nrows();
    let ord = &layout.ordering;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst.max((s_plus[(i, i)] - 1.0).norm()).max((s_minus[(i, i)] - 1.0).norm());
        for j in 0..n {
            if i == j {
                continue;
            }
            if ord.is_positive(i, j) {
                worst = worst.max(s_minus[(i, j)].norm());
            } else {
                worst = worst.max(s_plus[(i, j)].norm());
            }
        }
    }
    worst
}

pub fn monodromy(conn: &IrregularConnection, layout: &SectorLayout, opts: &SolverOptions) -> Result<MonodromyData> {
    let n = conn.n();
    let th0 = layout.bisector(0);
    let (f0, _) = canonical_frame(conn, layout, 0, 1.0, opts)?;
    let c = if opts.match_radius == 1.0 {
        let finf = eval_f_infinity(conn, 1.0, th0, opts)?;
        inv(&f0)? * finf
    } else {
        connection_matrix(conn, layout, opts)?
    };
    let (s_plus, s_minus) =
        if layout.rays.is_empty() { (eye(n), eye(n)) } else { stokes_from_frame(conn, layout, &f0, opts)? };
    let off = off_structure(layout, &s_plus, &s_minus);
    if off > TRIANGULARITY_LIMIT {
        return Err(Error::TriangularityViolation { magnitude: off });
    }
    Ok(MonodromyData {
        x: conn.x.clone(),
        c,
        s_plus,
        s_minus,
        delta: delta_projection(&conn.x),
        layout: layout.clone(),
        tolerances: opts.ode,
        off_structure: off,
    })
}

/// ‖C e^{2πix} C⁻¹ − S₋S₊e^{2πiδ}‖: the full loop around 0 seen from ∞ and
/// from the Stokes sectors.
pub fn monodromy_relation_residual(data: &MonodromyData) -> Result<f64> {
    let two_pi_i = C64::new(0.0, TAU);
    let lhs = &data.c * expm(&(&data.x * two_pi_i)) * inv(&data.c)?;
    let rhs = &data.s_minus * &data.s_plus * expm(&(&data.delta * two_pi_i));
    Ok(max_abs(&(lhs - rhs)))
}

/// ‖C⁻¹e^{2πiδ}C − S₋S₊e^{2πiδ}‖, the relation with δ in place of x on the
/// left. Reported for comparison; it does not vanish for generic x.
pub fn literal_relation_residual(data: &MonodromyData) -> Result<f64> {
    let two_pi_i = C64::new(0.0, TAU);
    let e = expm(&(&data.delta * two_pi_i));
    let lhs = inv(&data.c)? * &e * &data.c;
    let rhs = &data.s_minus * &data.s_plus * e;
    Ok(max_abs(&(lhs - rhs)))
}

/// μ(x) = (e^{−πiδ}S₋⁻¹, e^{−πiδ}S₊e^{2πiδ}, δ).
pub fn stokes_map(data: &MonodromyData) -> Result<GStarTriple> {
    let pi_i = C64::new(0.0, PI);
    let em = expm(&(&data.delta * -pi_i));
    let e2 = expm(&(&data.delta * (pi_i * 2.0)));
    let triple = GStarTriple {
        ctx: data.layout.ordering.clone(),
        b_minus: &em * inv(&data.s_minus)?,
        b_plus: &em * &data.s_plus * e2,
        lambda: data.delta.clone(),
    };
    let residual = triple.membership_residual();
    if residual > MEMBERSHIP_LIMIT {
        return Err(Error::MembershipViolation { residual });
    }
    Ok(triple)
}
