use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stokes_core::experiments::{layout_summary, plot_rays, run_checks, CheckKind, ExperimentConfig, ReportFormat, RunOutput};

#[derive(Parser, Debug)]
#[command(name = "stokes", version, about = "Numerical checks for Stokes data, dynamical r-matrices and their Poisson structures")]
#[command(after_help = "Tolerances are overridden with --tol.<name> <value>, e.g. --tol.gauge 1e-6.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Stokes rays, sectors and the induced positive system
    Rays,
    /// Collapse on diagonal residues, monodromy relation, triangularity, dual paths at infinity
    Monodromy,
    /// Gauge transformation equation, first-order identity, gauge/pushforward panel
    GaugeCheck,
    /// Dynamical Yang-Baxter equation for r_AM + t/2
    CdybeCheck,
    /// Jacobi identities and the Poisson property of the Stokes map
    PoissonCheck,
    /// Orbit and monodromy reduction identities
    ReductionCheck,
    /// Groupoid conditions and the map v
    GroupoidCheck,
    /// Every check
    Suite,
}

impl Command {
    fn checks(self) -> &'static [CheckKind] {
        use CheckKind::*;
        match self {
            Command::Rays => &[],
            Command::Monodromy => &[Collapse, Monodromy, DualPath],
            Command::GaugeCheck => &[Gauge, FirstOrder, GaugePanel],
            Command::CdybeCheck => &[Cdybe],
            Command::PoissonCheck => &[Jacobi, StokesPoisson],
            Command::ReductionCheck => &[OrbitReduction, MonodromyReduction],
            Command::GroupoidCheck => &[Groupoid],
            Command::Suite => &CheckKind::ALL,
        }
    }
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// key = value config file, applied before everything else
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// JSON object merged over the config file
    #[arg(long, global = true, value_name = "JSON")]
    json: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated complex entries of A0, e.g. "0,1,1+1i"
    #[arg(long, global = true, allow_hyphen_values = true)]
    a0: Option<String>,
    /// Base direction in radians
    #[arg(long, global = true, allow_hyphen_values = true)]
    base_dir: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    xnorm: Option<f64>,
    #[arg(long, global = true)]
    ode_rtol: Option<f64>,
    #[arg(long, global = true)]
    ode_atol: Option<f64>,
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    #[arg(long, global = true)]
    series_order: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report destination; stdout when absent
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write an SVG of the Stokes rays
    #[arg(long, global = true, value_name = "PATH")]
    plot: Option<PathBuf>,
}

/// Pull `--tol.<name> v` and `--tol.<name>=v` out of argv; clap cannot declare
/// a dynamic flag family.
fn split_tolerances(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(spec) = a.strip_prefix("--tol.") else {
            rest.push(a);
            continue;
        };
        match spec.split_once('=') {
            Some((k, v)) => tols.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| format!("--tol.{spec} needs a value"))?;
                tols.push((spec.to_string(), v));
            }
        }
    }
    Ok((rest, tols))
}

fn build_config(opts: &Opts, tols: &[(String, String)]) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::default();
    let e = |e: stokes_core::Error| e.to_string();
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path).map_err(|err| format!("{}: {err}", path.display()))?;
        cfg.parse_kv(&text).map_err(e)?;
    }
    if let Some(j) = &opts.json {
        cfg.apply_json(j).map_err(e)?;
    }
    let mut kv: Vec<(&str, String)> = Vec::new();
    let mut put = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            kv.push((k, v));
        }
    };
    put("n", opts.n.map(|v| v.to_string()));
    put("a0", opts.a0.clone());
    put("base_dir", opts.base_dir.map(|v| v.to_string()));
    put("samples", opts.samples.map(|v| v.to_string()));
    put("seed", opts.seed.map(|v| v.to_string()));
    put("xnorm", opts.xnorm.map(|v| v.to_string()));
    put("ode_rtol", opts.ode_rtol.map(|v| v.to_string()));
    put("ode_atol", opts.ode_atol.map(|v| v.to_string()));
    put("fd_step", opts.fd_step.map(|v| v.to_string()));
    put("series_order", opts.series_order.map(|v| v.to_string()));
    put("workers", opts.workers.map(|v| v.to_string()));
    put("format", opts.format.clone());
    for (k, v) in kv {
        cfg.set(k, &v).map_err(e)?;
    }
    if opts.out.is_some() {
        cfg.out = opts.out.clone();
    }
    if opts.plot.is_some() {
        cfg.plot = opts.plot.clone();
    }
    // an explicit A0 fixes n unless n was also given
    if opts.a0.is_some() && opts.n.is_none() {
        cfg.n = cfg.a0().len();
    }
    for (k, v) in tols {
        cfg.set(&format!("tol.{k}"), v).map_err(e)?;
    }
    cfg.validate().map_err(e)?;
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                _ => Ok(()),
            }
        }
    }
}

fn write_plot(cfg: &ExperimentConfig) -> Result<(), String> {
    if let Some(p) = &cfg.plot {
        let lay = cfg.layout().map_err(|e| e.to_string())?;
        fs::write(p, plot_rays(&lay)).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn summarize(run: &RunOutput) {
    for c in &run.report.checks {
        let failed = c.samples.iter().filter(|s| !s.passed()).count();
        eprintln!(
            "{:<5} {:<20} {}/{} samples{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.samples.len() - failed,
            c.samples.len(),
            c.notes.first().map(|n| format!("  ({n})")).unwrap_or_default()
        );
    }
    eprintln!("total {:.2}s", run.timings.total_seconds);
}

fn execute(command: Command, cfg: &ExperimentConfig) -> Result<bool, String> {
    write_plot(cfg)?;
    if let Command::Rays = command {
        let summary = layout_summary(cfg).map_err(|e| e.to_string())?;
        let text = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
        emit(&text, cfg.out.as_deref())?;
        return Ok(true);
    }
    let run = run_checks(cfg, command.checks()).map_err(|e| e.to_string())?;
    let text = match cfg.format {
        ReportFormat::Json => run.to_json(),
        ReportFormat::Csv => run.report.to_csv(),
    }
    .map_err(|e| e.to_string())?;
    emit(text.trim_end(), cfg.out.as_deref())?;
    summarize(&run);
    Ok(run.report.passed)
}

fn main() -> ExitCode {
    let (args, tols) = match split_tolerances(std::env::args().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let result = build_config(&cli.opts, &tols).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
