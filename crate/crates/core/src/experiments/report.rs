//! Report types. Everything under [`Report`] is a pure function of the
//! configuration; wall-clock data lives in [`Timings`] beside it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Bound {
    /// value ≤ tolerance
    Max { tolerance: f64 },
    /// value ≥ tolerance (negative controls)
    Min { tolerance: f64 },
    Range { min: f64, max: f64 },
    /// value must equal 1 (boolean checks and exact identities)
    Exact,
    /// reported, never gating
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(flatten)]
    pub bound: Bound,
    pub pass: bool,
}

impl Metric {
    fn new(name: &str, value: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::Max { tolerance } => value <= tolerance,
            Bound::Min { tolerance } => value >= tolerance,
            Bound::Range { min, max } => value >= min && value <= max,
            Bound::Exact => value == 1.0,
            Bound::Info => true,
        };
        Self { name: name.into(), value, bound, pass }
    }

    pub fn max(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Bound::Max { tolerance })
    }

    pub fn min(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Bound::Min { tolerance })
    }

    pub fn range(name: &str, value: f64, min: f64, max: f64) -> Self {
        Self::new(name, value, Bound::Range { min, max })
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Bound::Exact)
    }

    pub fn info(name: &str, value: f64) -> Self {
        Self::new(name, value, Bound::Info)
    }

    pub fn tolerance_text(&self) -> String {
        match self.bound {
            Bound::Max { tolerance } => format!("<= {tolerance:e}"),
            Bound::Min { tolerance } => format!(">= {tolerance:e}"),
            Bound::Range { min, max } => format!("in [{min}, {max}]"),
            Bound::Exact => "== 1".into(),
            Bound::Info => "info".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    /// The sampled point, flattened as [re, im] pairs.
    pub point: Vec<[f64; 2]>,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
}

impl SampleRecord {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.metrics.iter().all(|m| m.pass)
    }

    /// Largest value of a named metric, if present.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub description: String,
    pub mandatory: bool,
    pub samples: Vec<SampleRecord>,
    /// Check-level quantities: calibration constants, classifications.
    pub summary: Vec<Metric>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(name: &str, description: &str, samples: Vec<SampleRecord>, summary: Vec<Metric>) -> Self {
        let passed = samples.iter().all(|s| s.passed()) && summary.iter().all(|m| m.pass);
        Self { name: name.into(), description: description.into(), mandatory: true, samples, summary, notes: Vec::new(), passed }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Worst value of a metric over samples, by its bound direction.
    pub fn worst(&self, name: &str) -> Option<f64> {
        let vals: Vec<(f64, Bound)> = self
            .samples
            .iter()
            .flat_map(|s| s.metrics.iter())
            .chain(self.summary.iter())
            .filter(|m| m.name == name)
            .map(|m| (m.value, m.bound))
            .collect();
        let (_, bound) = *vals.first()?;
        let it = vals.iter().map(|v| v.0);
        Some(match bound {
            Bound::Min { .. } => it.fold(f64::INFINITY, f64::min),
            Bound::Range { min, max } => {
                let mid = 0.5 * (min + max);
                vals.iter().map(|v| v.0).fold(mid, |w, v| if (v - mid).abs() > (w - mid).abs() || v.is_nan() { v } else { w })
            }
            _ => it.fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) }),
        })
    }

    /// All metrics with this name pass in every sample.
    pub fn metric_passed(&self, name: &str) -> bool {
        self.samples.iter().all(|s| s.error.is_none())
            && self.samples.iter().flat_map(|s| s.metrics.iter()).chain(self.summary.iter()).filter(|m| m.name == name).all(|m| m.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvStamp {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub workers: usize,
}

impl EnvStamp {
    pub fn current(workers: usize) -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub environment: EnvStamp,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

impl Report {
    pub fn new(environment: EnvStamp, config: ExperimentConfig, checks: Vec<CheckReport>) -> Self {
        let passed = checks.iter().filter(|c| c.mandatory).all(|c| c.passed);
        Self { environment, config, checks, passed }
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// One row per (check, sample, metric); summary metrics use sample = "summary".
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidConfig(e.to_string());
        w.write_record(["check", "sample", "metric", "value", "bound", "pass", "error"]).map_err(io)?;
        for c in &self.checks {
            for s in &c.samples {
                let err = s.error.clone().unwrap_or_default();
                if s.metrics.is_empty() {
                    w.write_record([c.name.as_str(), &s.index.to_string(), "", "", "", "false", &err]).map_err(io)?;
                }
                for m in &s.metrics {
                    w.write_record([
                        c.name.as_str(),
                        &s.index.to_string(),
                        &m.name,
                        &format!("{:e}", m.value),
                        &m.tolerance_text(),
                        &m.pass.to_string(),
                        &err,
                    ])
                    .map_err(io)?;
                }
            }
            for m in &c.summary {
                w.write_record([c.name.as_str(), "summary", &m.name, &format!("{:e}", m.value), &m.tolerance_text(), &m.pass.to_string(), ""])
                    .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Timings {
    pub checks: Vec<(String, f64)>,
    pub total_seconds: f64,
}

/// A report and the wall-clock times it took.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub report: Report,
    pub timings: Timings,
}

impl RunOutput {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}
