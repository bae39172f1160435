//! Experiment driver: configuration, seeded sampling, the verification runs
//! and their reports.

mod checks;
mod config;
mod plot;
mod report;
mod sampling;

use std::time::Instant;

use serde::Serialize;

pub use checks::{CheckKind, Setup, GROUP_SPREAD, LOG_SAFE_XNORM};
pub use config::{ExperimentConfig, ReportFormat, Tolerances};
pub use plot::plot_rays;
pub use report::{Bound, CheckReport, EnvStamp, Metric, Report, RunOutput, SampleRecord, Timings};
pub use sampling::Sampler;

use crate::error::{Error, Result};

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Run the given checks in order. Samples within a check run on the worker pool.
pub fn run_checks(config: &ExperimentConfig, kinds: &[CheckKind]) -> Result<RunOutput> {
    let start = Instant::now();
    let setup = Setup::new(config)?;
    let pool = pool(config.workers)?;
    let mut timings = Timings::default();
    let mut checks = Vec::with_capacity(kinds.len());
    pool.install(|| {
        for &k in kinds {
            let t = Instant::now();
            checks.push(setup.run(k));
            timings.checks.push((k.name().to_string(), t.elapsed().as_secs_f64()));
        }
    });
    timings.total_seconds = start.elapsed().as_secs_f64();
    let report = Report::new(EnvStamp::current(pool.current_num_threads()), config.clone(), checks);
    Ok(RunOutput { report, timings })
}

pub fn run_suite(config: &ExperimentConfig) -> Result<RunOutput> {
    run_checks(config, &CheckKind::ALL)
}

/// Rays, sectors and the positive system, for display.
#[derive(Debug, Clone, Serialize)]
pub struct LayoutSummary {
    pub a0: Vec<[f64; 2]>,
    pub base_direction: f64,
    pub rays: Vec<RayInfo>,
    /// l: the number of rays in each half-turn.
    pub half: usize,
    pub sect0: (f64, f64),
    pub bisectors: Vec<f64>,
    /// Branch cut of log z, along d₁.
    pub branch_cut: Option<f64>,
    /// Index order in which the positive roots are upper triangular.
    pub ordering: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayInfo {
    pub label: String,
    pub angle: f64,
    pub roots: Vec<(usize, usize)>,
    pub positive: bool,
}

pub fn layout_summary(config: &ExperimentConfig) -> Result<LayoutSummary> {
    config.validate()?;
    let lay = config.layout()?;
    let rays = lay
        .rays
        .iter()
        .zip(&lay.ray_roots)
        .enumerate()
        .map(|(k, (&angle, roots))| RayInfo { label: format!("d{}", k + 1), angle, roots: roots.clone(), positive: k < lay.l })
        .collect();
    Ok(LayoutSummary {
        a0: lay.a0.iter().map(|&(re, im)| [re, im]).collect(),
        base_direction: lay.base_direction,
        rays,
        half: lay.l,
        sect0: lay.sect0(),
        bisectors: (0..lay.sector_count()).map(|k| lay.bisector(k)).collect(),
        branch_cut: lay.rays.first().copied(),
        ordering: lay.ordering.order().to_vec(),
    })
}
