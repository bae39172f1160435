//! The individual verification runs. Samples are drawn sequentially from the
//! check's own stream and then evaluated in parallel; results keep sample order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::report::{CheckReport, Metric, SampleRecord};
use crate::experiments::sampling::Sampler;
use crate::fd::FdScheme;
use crate::lie::LieContext;
use crate::linalg::{self, diag, elem, eye, inv, max_abs, vec_rm};
use crate::poisson::{
    am_coords, map_i_inverse, map_v, mixed_bracket_residual, monodromy_reduction_forms, orbit_reduction_identity,
    poisson_map_residual, pushforward_residual, jacobi_residual, AmTerms, Groupoid, Kks, MonodromyTangent, PiAm,
    Shifted, Sts,
};
use crate::rmatrix::{cdybe_residual, gauge_lhs, gauge_residual, r_am, AlekseevMeinrenken, ConstantR, ConstantMap, FnMap, GValuedMap};
use crate::stokes::{
    connection_matrix, eval_f_infinity_via, frobenius_hinf, monodromy, monodromy_relation_residual, stokes_map,
    C2piField, IrregularConnection, SectorLayout, SolverOptions,
};
use crate::tensor::casimir;
use crate::{Mat, C64};

/// Residues fed to the principal logarithm are kept below this entry size.
pub const LOG_SAFE_XNORM: f64 = 0.2;
/// Size of the Lie algebra elements exponentiated into sample group elements.
pub const GROUP_SPREAD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Collapse,
    Monodromy,
    DualPath,
    Gauge,
    FirstOrder,
    GaugePanel,
    Cdybe,
    Jacobi,
    StokesPoisson,
    OrbitReduction,
    MonodromyReduction,
    Groupoid,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Collapse,
        CheckKind::Monodromy,
        CheckKind::DualPath,
        CheckKind::Gauge,
        CheckKind::FirstOrder,
        CheckKind::GaugePanel,
        CheckKind::Cdybe,
        CheckKind::Jacobi,
        CheckKind::StokesPoisson,
        CheckKind::OrbitReduction,
        CheckKind::MonodromyReduction,
        CheckKind::Groupoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Collapse => "collapse",
            CheckKind::Monodromy => "monodromy",
            CheckKind::DualPath => "dual-path",
            CheckKind::Gauge => "gauge",
            CheckKind::FirstOrder => "first-order",
            CheckKind::GaugePanel => "gauge-panel",
            CheckKind::Cdybe => "cdybe",
            CheckKind::Jacobi => "jacobi",
            CheckKind::StokesPoisson => "stokes-poisson",
            CheckKind::OrbitReduction => "orbit-reduction",
            CheckKind::MonodromyReduction => "monodromy-reduction",
            CheckKind::Groupoid => "groupoid",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn stream(self) -> u64 {
        Self::ALL.iter().position(|&k| k == self).unwrap_or(0) as u64 + 1
    }
}

/// Everything a check needs, built once per run.
pub struct Setup {
    pub config: ExperimentConfig,
    pub a0: Vec<C64>,
    pub layout: SectorLayout,
    /// Positive system of r₀, induced by the layout.
    pub ctx: LieContext,
    pub opts: SolverOptions,
    pub field: C2piField,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let a0 = config.a0();
        let layout = config.layout()?;
        let opts = config.solver_options();
        let field = C2piField::new(&a0, layout.clone(), opts)?;
        Ok(Self { config: config.clone(), ctx: layout.ordering.clone(), a0, layout, opts, field })
    }

    fn n(&self) -> usize {
        self.a0.len()
    }

    fn sampler(&self, kind: CheckKind) -> Sampler {
        Sampler::new(self.config.seed, kind.stream())
    }

    fn scheme(&self) -> FdScheme {
        FdScheme::new(self.config.fd_step)
    }

    pub fn run(&self, kind: CheckKind) -> CheckReport {
        match kind {
            CheckKind::Collapse => self.collapse(),
            CheckKind::Monodromy => self.monodromy(),
            CheckKind::DualPath => self.dual_path(),
            CheckKind::Gauge => self.gauge(),
            CheckKind::FirstOrder => self.first_order(),
            CheckKind::GaugePanel => self.gauge_panel(),
            CheckKind::Cdybe => self.cdybe(),
            CheckKind::Jacobi => self.jacobi(),
            CheckKind::StokesPoisson => self.stokes_poisson(),
            CheckKind::OrbitReduction => self.orbit_reduction(),
            CheckKind::MonodromyReduction => self.monodromy_reduction(),
            CheckKind::Groupoid => self.groupoid(),
        }
    }
}

fn flat(ms: &[&Mat]) -> Vec<[f64; 2]> {
    ms.iter().flat_map(|m| vec_rm(m).iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect()
}

fn evaluate<T, F>(inputs: &[T], point: impl Fn(&T) -> Vec<[f64; 2]>, f: F) -> Vec<SampleRecord>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Metric>> + Sync,
{
    let results: Vec<Result<Vec<Metric>>> = inputs.par_iter().map(&f).collect();
    results
        .into_iter()
        .zip(inputs)
        .enumerate()
        .map(|(index, (r, t))| match r {
            Ok(metrics) => SampleRecord { index, point: point(t), metrics, error: None },
            Err(e) => SampleRecord { index, point: point(t), metrics: Vec::new(), error: Some(e.to_string()) },
        })
        .collect()
}

fn dev_from_identity(m: &Mat) -> f64 {
    max_abs(&(m - eye(m.nrows())))
}

/// Relative distance, scaled by max(1, ‖b‖).
fn rel(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

fn c64_rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

impl Setup {
    fn collapse(&self) -> CheckReport {
        let mut s = self.sampler(CheckKind::Collapse);
        let xs: Vec<Mat> = (0..self.config.samples).map(|_| s.diagonal(self.n(), self.config.xnorm)).collect();
        let tol = self.config.tolerances.collapse;
        let samples = evaluate(&xs, |x| flat(&[x]), |x| {
            let d = monodromy(&IrregularConnection::new(&self.a0, x.clone())?, &self.layout, &self.opts)?;
            Ok(vec![
                Metric::max("c_minus_identity", dev_from_identity(&d.c), tol),
                Metric::max("s_plus_minus_identity", dev_from_identity(&d.s_plus), tol),
                Metric::max("s_minus_minus_identity", dev_from_identity(&d.s_minus), tol),
            ])
        });
        CheckReport::new("collapse", "diagonal residue: C = S± = 1", samples, vec![])
    }

    fn monodromy(&self) -> CheckReport {
        let mut s = self.sampler(CheckKind::Monodromy);
        let xs: Vec<Mat> = (0..self.config.samples).map(|_| s.matrix(self.n(), self.config.xnorm)).collect();
        let t = self.config.tolerances;
        let samples = evaluate(&xs, |x| flat(&[x]), |x| {
            let d = monodromy(&IrregularConnection::new(&self.a0, x.clone())?, &self.layout, &self.opts)?;
            Ok(vec![
                Metric::max("relation", monodromy_relation_residual(&d)?, t.relation),
                Metric::max("off_structure", d.off_structure, t.off_structure),
            ])
        });
        CheckReport::new("monodromy", "C e^{2πix} C⁻¹ = S₋S₊e^{2πiδ}, S± unipotent in the layout order", samples, vec![])
    }

    fn dual_path(&self) -> CheckReport {
        let mut s = self.sampler(CheckKind::DualPath);
        let xs: Vec<Mat> = (0..self.config.samples).map(|_| s.matrix(self.n(), self.config.xnorm)).collect();
        let t = self.config.tolerances;
        let theta = self.layout.bisector(0);
        let samples = evaluate(&xs, |x| flat(&[x]), |x| {
            let conn = IrregularConnection::new(&self.a0, x.clone())?;
            let series = frobenius_hinf(&conn, self.opts.frobenius_order)?;
            let k = series.order();
            let mut r0: f64 = 1.0;
            while series.term_size(k, C64::from_polar(r0, theta)) > self.opts.tail_tol {
                r0 *= 1.25;
                if r0 > 1e6 {
                    return Err(Error::SeedAccuracy { term: series.term_size(k, C64::from_polar(r0, theta)) });
                }
            }
            let direct = eval_f_infinity_via(&conn, &series, r0, r0, theta, &self.opts)?;
            let transported = eval_f_infinity_via(&conn, &series, 4.0 * r0, r0, theta, &self.opts)?;

            let c_ref = connection_matrix(&conn, &self.layout, &self.opts)?;
            let moved = |r: f64| connection_matrix(&conn, &self.layout, &SolverOptions { match_radius: r, ..self.opts });
            let reseeded = |k: usize| connection_matrix(&conn, &self.layout, &SolverOptions { seed_order: Some(k), ..self.opts });
            let radius_dev = rel(&moved(0.75)?, &c_ref).max(rel(&moved(1.5)?, &c_ref));
            let cap = self.opts.series_cap;
            let order_dev = rel(&reseeded(cap * 3 / 4)?, &c_ref).max(rel(&reseeded(cap / 2)?, &c_ref));
            Ok(vec![
                Metric::max("frobenius_vs_ode", rel(&direct, &transported), t.dual_path),
                Metric::max("match_radius", radius_dev, t.robustness),
                Metric::max("seed_order", order_dev, t.robustness),
            ])
        });
        CheckReport::new("dual-path", "F_∞ by series alone vs series + ODE; C under matching radius and seed order changes", samples, vec![])
            .with_note("match radii 0.75 and 1.5 against 1.0; seed orders cap/2 and 3cap/4 against cap")
    }

    fn gauge(&self) -> CheckReport {
        let mut s = self.sampler(CheckKind::Gauge);
        let xs: Vec<Mat> = (0..self.config.samples).map(|_| s.matrix(self.n(), self.config.xnorm)).collect();
        let t = self.config.tolerances;
        let samples = evaluate(&xs, |x| flat(&[x]), |x| {
            let g = gauge_residual(&self.ctx, &self.field, x, self.scheme())?;
            let plain = gauge_residual(&self.ctx, &self.field, x, FdScheme::plain(self.config.ratio_step))?;
            Ok(vec![
                Metric::max("residual", g.residual, t.gauge),
                Metric::info("residual_half_step", g.residual_half),
                Metric::info("plain_residual", plain.residual),
                Metric::range("plain_halving_ratio", plain.ratio, t.gauge_ratio_min, t.gauge_ratio_max),
            ])
        });
        CheckReport::new("gauge", "r₀ gauge-transformed by C_{2πi} equals r_AM", samples, vec![])
            .with_note("residual uses Richardson at fd_step; the halving ratio uses plain central differences at ratio_step")
    }

    fn first_order(&self) -> CheckReport {
        let zero = linalg::zeros(self.n());
        let tol = self.config.tolerances.first_order;
        let samples = evaluate(std::slice::from_ref(&zero), |x| flat(&[x]), |x| {
            let lhs = gauge_lhs(&self.ctx, &self.field, x, self.scheme())?.lhs;
            Ok(vec![Metric::max("identity_at_zero", lhs.max_abs(), tol)])
        });
        CheckReport::new("first-order", "Σ ∂C_{2πi}(0)⊗e_a − flip + r₀ = 0", samples, vec![])
    }

    fn gauge_panel(&self) -> CheckReport {
        let n = self.n();
        let mut s = self.sampler(CheckKind::GaugePanel);
        let lambda0 = s.vector(n, self.config.xnorm);
        let pts: Vec<(Mat, Vec<C64>)> =
            (0..self.config.samples).map(|_| (s.group(n, GROUP_SPREAD), s.vector(n, self.config.xnorm))).collect();
        let t = self.config.tolerances;
        let scheme = self.scheme();
        let identity = ConstantMap(eye(n));
        let corrupted = FnMap {
            n,
            f: |x: &Mat| {
                let bump = if n > 1 { eye(n) + elem(n, 0, 1) * (x[(1, 0)] * 0.5) } else { eye(n) };
                Ok(self.field.eval(x)? * bump)
            },
        };
        let candidates: [(&str, &dyn GValuedMap); 3] = [("c2pi", &self.field), ("identity", &identity), ("corrupted", &corrupted)];

        let kappa = match pushforward_residual(&self.ctx, &self.field, &eye(n), &lambda0, C64::new(1.0, 0.0), scheme) {
            Ok(p) => p.local_kappa,
            Err(e) => {
                return CheckReport::new("gauge-panel", "", vec![], vec![Metric::flag("calibration", false)]).with_note(e.to_string())
            }
        };
        let samples = evaluate(&pts, |(h, l)| flat(&[h, &diag(l)]), |(h, lambda)| {
            let x = h * diag(lambda) * inv(h)?;
            let target = r_am(&self.ctx, &x)?;
            let mut out = Vec::new();
            for (name, g) in candidates {
                let pf = pushforward_residual(&self.ctx, g, h, lambda, kappa, scheme)?.residual;
                let gr = (gauge_lhs(&self.ctx, g, &x, scheme)?.lhs - target.clone()).max_abs();
                if name == "c2pi" {
                    out.push(Metric::max("c2pi_pushforward", pf, t.pushforward));
                    out.push(Metric::max("c2pi_gauge", gr, t.gauge));
                } else {
                    out.push(Metric::info(&format!("{name}_pushforward"), pf));
                    out.push(Metric::info(&format!("{name}_gauge"), gr));
                }
                out.push(Metric::flag(&format!("{name}_agree"), (pf <= t.pushforward) == (gr <= t.gauge)));
            }
            Ok(out)
        });
        let summary = vec![Metric::info("kappa_re", kappa.re), Metric::info("kappa_im", kappa.im)];
        CheckReport::new("gauge-panel", "pushforward and gauge residuals classify {C_{2πi}, 1, corrupted C} alike", samples, summary)
            .with_note("kappa calibrated once with C_{2πi} at h = 1, then frozen; corrupted C is C(x)(1 + ½x₁₀e₀₁)")
    }

    fn cdybe(&self) -> CheckReport {
        let mut s = self.sampler(CheckKind::Cdybe);
        let xs: Vec<Mat> = (0..self.config.samples).map(|_| s.matrix(self.n(), self.config.xnorm)).collect();
        let t = self.config.tolerances;
        let r = AlekseevMeinrenken::with_half_casimir(self.ctx.clone());
        let control = ConstantR(casimir(&self.ctx) * 0.5);
        let samples = evaluate(&xs, |x| flat(&[x]), |x| {
            Ok(vec![
                Metric::max("r_am_plus_half_t", cdybe_residual(&r, x, self.scheme())?.max_abs(), t.cdybe),
                Metric::min("control_half_t", cdybe_residual(&control, x, self.scheme())?.max_abs(), t.cdybe_control),
            ])
        });
        CheckReport::new("cdybe", "r_AM + t/2 solves the CDYBE; t/2 alone does not", samples, vec![])
    }

    fn jacobi(&self) -> CheckReport {
        let n = self.n();
        let m = n * n;
        let mut s = self.sampler(CheckKind::Jacobi);
        let pts: Vec<(Mat, Mat)> =
            (0..self.config.samples).map(|_| (s.group(n, GROUP_SPREAD), s.matrix(n, self.config.xnorm))).collect();
        let t = self.config.tolerances;
        let sts = Sts { ctx: self.ctx.clone() };
        let mut shift = Mat::zeros(m, m);
        if m > 1 {
            shift[(0, 1)] = C64::new(0.5, 0.0);
            shift[(1, 0)] = C64::new(-0.5, 0.0);
        }
        let mutated = Shifted { inner: &sts, shift };
        let am = PiAm::new(self.ctx.clone());
        let am_no_r0 = PiAm { ctx: self.ctx.clone(), terms: AmTerms { r0: false, ..AmTerms::ALL } };
        let samples = evaluate(&pts, |(h, x)| flat(&[h, x]), |(h, x)| {
            let zx: Vec<C64> = vec_rm(x).iter().copied().collect();
            let zam = am_coords(h, x);
            let sc = self.scheme();
            Ok(vec![
                Metric::max("sts", jacobi_residual(&sts, &zx, sc)?, t.jacobi),
                Metric::max("pi_am", jacobi_residual(&am, &zam, sc)?, t.jacobi),
                Metric::min("control_sts_shifted", jacobi_residual(&mutated, &zx, sc)?, t.jacobi_control),
                Metric::min("control_pi_am_without_r0", jacobi_residual(&am_no_r0, &zam, sc)?, t.jacobi_control),
            ])
        });
        CheckReport::new("jacobi", "Jacobi identity for π_STS and π_AM, with mutation controls", samples, vec![])
            .with_note("controls: π_STS plus the constant ½(∂₀∧∂₁), and π_AM with the r₀ term dropped")
    }

    fn stokes_poisson(&self) -> CheckReport {
        let n = self.n();
        let norm = self.config.xnorm.min(LOG_SAFE_XNORM);
        let mut s = self.sampler(CheckKind::StokesPoisson);
        let x_cal = s.diagonal(n, norm);
        let xs: Vec<Mat> = (0..self.config.samples).map(|_| s.matrix(n, norm)).collect();
        let tol = self.config.tolerances.stokes_poisson;
        let nu = |z: &[C64]| -> Result<Vec<C64>> {
            let conn = IrregularConnection::new(&self.a0, linalg::unvec_rm(z, n))?;
            let d = monodromy(&conn, &self.layout, &self.opts)?;
            Ok(vec_rm(&map_i_inverse(&stokes_map(&d)?)?).iter().copied().collect())
        };
        let src = Kks { n };
        let dst = Sts { ctx: self.ctx.clone() };
        let scheme = self.scheme();
        let coords = |x: &Mat| -> Vec<C64> { vec_rm(x).iter().copied().collect() };
        let cal = match poisson_map_residual(&nu, &src, &dst, &coords(&x_cal), C64::new(1.0, 0.0), scheme) {
            Ok(r) => r,
            Err(e) => {
                return CheckReport::new("stokes-poisson", "", vec![], vec![Metric::flag("calibration", false)]).with_note(e.to_string())
            }
        };
        let kappa = cal.local_kappa;
        let samples = evaluate(&xs, |x| flat(&[x]), |x| {
            let r = poisson_map_residual(&nu, &src, &dst, &coords(x), kappa, scheme)?;
            Ok(vec![Metric::max("residual", r.residual, tol), Metric::info("local_kappa_deviation", c64_rel(r.local_kappa, kappa))])
        });
        let expected = C64::new(0.0, -std::f64::consts::TAU);
        let summary = vec![
            Metric::info("kappa_re", kappa.re),
            Metric::info("kappa_im", kappa.im),
            Metric::info("kappa_minus_expected", (kappa - expected).norm()),
        ];
        CheckReport::new("stokes-poisson", "ν = log(b₋⁻¹b₊) of the Stokes map pushes π_KKS to κ·π_STS", samples, summary)
            .with_note(format!("kappa calibrated at a diagonal residue; expected -2πi; residues bounded by {norm}"))
    }

    fn orbit_reduction(&self) -> CheckReport {
        let n = self.n();
        let mut s = self.sampler(CheckKind::OrbitReduction);
        #[allow(clippy::type_complexity)]
        let pts: Vec<(Mat, Mat, Mat, Mat, Mat, Mat, Mat)> = (0..self.config.samples)
            .map(|_| {
                let g1 = s.group(n, GROUP_SPREAD);
                let d = s.diagonal(n, self.config.xnorm);
                let x1 = inv(&g1).unwrap_or_else(|_| eye(n)) * d * &g1;
                let g2 = s.group(n, GROUP_SPREAD);
                (g1, x1, g2, s.matrix(n, 0.5), s.diagonal(n, 0.5), s.matrix(n, 0.5), s.diagonal(n, 0.5))
            })
            .collect();
        let tol = self.config.tolerances.orbit_reduction;
        let samples = evaluate(&pts, |p| flat(&[&p.0, &p.1, &p.2, &p.3, &p.4, &p.5, &p.6]), |(g1, x1, g2, x_1, r_1, x_2, r_2)| {
            let v = orbit_reduction_identity(&self.a0, g1, x1, g2, (x_1, r_1), (x_2, r_2))?;
            Ok(vec![
                Metric::max("restricted_vs_pulled_back", (v.restricted - v.pulled_back).norm(), tol),
                Metric::max("pulled_back_vs_closed_form", (v.pulled_back - v.closed_form).norm(), tol),
                Metric::max("residue_shortcut_vs_closed_form", (v.residue_shortcut - v.closed_form).norm(), tol),
            ])
        });
        CheckReport::new("orbit-reduction", "ι*ω_Σ = ω restricted to μ⁻¹(0) on Õ₁ × Õ₂", samples, vec![]).with_note(
            "restricted evaluates the extended-orbit form on the full tangent, including its [A, X] part; \
             it differs from the closed form by 2<x1, Ad_{g2^-1}[X1, X2]>",
        )
    }

    fn monodromy_reduction(&self) -> CheckReport {
        let n = self.n();
        let mut s = self.sampler(CheckKind::MonodromyReduction);
        let pts: Vec<(Mat, Vec<C64>, Mat, MonodromyTangent, MonodromyTangent)> = (0..self.config.samples)
            .map(|_| {
                let h = s.group(n, GROUP_SPREAD);
                let lambda = s.vector(n, LOG_SAFE_XNORM);
                let c = s.group(n, GROUP_SPREAD);
                let mut tangent =
                    || MonodromyTangent { dh: s.matrix(n, 0.5), dlambda: s.vector(n, 0.5), dc: s.matrix(n, 0.5) };
                let (t1, t2) = (tangent(), tangent());
                (h, lambda, c, t1, t2)
            })
            .collect();
        let tol = self.config.tolerances.monodromy_reduction;
        let samples = evaluate(&pts, |p| flat(&[&p.0, &diag(&p.1), &p.2]), |(h, lambda, c, t1, t2)| {
            let v = monodromy_reduction_forms(&self.ctx, h, lambda, c, t1, t2)?;
            Ok(vec![Metric::max("fused_vs_chart", c64_rel(v.fused, v.chart), tol), Metric::max("moment", v.moment_residual, tol)])
        });
        CheckReport::new("monodromy-reduction", "reduced fusion form on C̃₁ ⊛ C̃₂ agrees with the Σ' chart form", samples, vec![])
    }

    fn groupoid(&self) -> CheckReport {
        let n = self.n();
        let norm = self.config.xnorm.min(LOG_SAFE_XNORM);
        let mut s = self.sampler(CheckKind::Groupoid);
        let pts: Vec<(Mat, Mat)> = (0..self.config.samples).map(|_| (s.group(n, GROUP_SPREAD), s.matrix(n, norm))).collect();
        let t = self.config.tolerances;
        let gr = Groupoid::new(&self.field);
        let samples = evaluate(&pts, |(h, x)| flat(&[h, x]), |(h, x)| {
            let e = gr.epsilon(x)?;
            Ok(vec![
                Metric::flag("alpha_of_unit", gr.alpha(&e) == *x),
                Metric::max("mixed_bracket", mixed_bracket_residual(&self.ctx, h, x)?, t.mixed_bracket),
                Metric::max("map_v_identity", map_v(&self.ctx, &self.field, h, x)?.identity_residual, t.map_v),
            ])
        });
        CheckReport::new("groupoid", "α∘ε = id, {α*f, β*g} = 0, and the defining identity of v", samples, vec![])
    }
}
