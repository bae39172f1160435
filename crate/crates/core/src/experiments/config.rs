//! Run configuration: flat `key = value` text, optionally overridden by JSON.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::OdeTolerances;
use crate::serial::parse_c64;
use crate::stokes::{check_regular, SectorLayout, SolverOptions};
use crate::C64;

/// Pass/fail thresholds, addressable by field name (`tol.<name>`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// ‖C − 1‖, ‖S± − 1‖ for diagonal x.
    pub collapse: f64,
    pub relation: f64,
    pub off_structure: f64,
    pub gauge: f64,
    pub gauge_ratio_min: f64,
    pub gauge_ratio_max: f64,
    /// The gauge equation at x = 0.
    pub first_order: f64,
    pub cdybe: f64,
    /// Lower bound for the negative controls of the CDYBE check.
    pub cdybe_control: f64,
    pub jacobi: f64,
    pub jacobi_control: f64,
    pub orbit_reduction: f64,
    pub monodromy_reduction: f64,
    pub dual_path: f64,
    pub robustness: f64,
    /// Pass threshold for pushforward_residual in the candidate panel.
    pub pushforward: f64,
    pub stokes_poisson: f64,
    pub mixed_bracket: f64,
    pub map_v: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            collapse: 1e-9,
            relation: 1e-7,
            off_structure: 1e-8,
            gauge: 1e-5,
            gauge_ratio_min: 3.0,
            gauge_ratio_max: 5.0,
            first_order: 1e-6,
            cdybe: 1e-8,
            cdybe_control: 1e-2,
            jacobi: 1e-6,
            jacobi_control: 1e-2,
            orbit_reduction: 1e-10,
            monodromy_reduction: 1e-8,
            dual_path: 1e-9,
            robustness: 1e-9,
            pushforward: 1e-4,
            stokes_poisson: 1e-4,
            mixed_bracket: 1e-8,
            map_v: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn names() -> Vec<String> {
        match serde_json::to_value(Tolerances::default()) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidConfig(format!("tolerance {name} must be positive, got {value}")));
        }
        let mut v = serde_json::to_value(*self).map_err(json_err)?;
        match v.get_mut(name) {
            Some(slot) => *slot = serde_json::json!(value),
            None => return Err(Error::InvalidConfig(format!("unknown tolerance {name}"))),
        }
        *self = serde_json::from_value(v).map_err(json_err)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Entries of A0 as [re, im]; the preset for `n` when absent.
    pub a0: Option<Vec<[f64; 2]>>,
    pub base_direction: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Bound on the largest entry modulus of sampled residues.
    pub xnorm: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub fd_step: f64,
    /// Plain central-difference step for the step-halving ratio of the gauge check.
    pub ratio_step: f64,
    /// Cap on the order of the asymptotic seed at 0.
    pub series_order: Option<usize>,
    pub tolerances: Tolerances,
    /// Worker threads; available parallelism when absent.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub plot: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2,
            a0: None,
            base_direction: None,
            samples: 5,
            seed: 20240607,
            xnorm: 0.5,
            ode_rtol: 1e-12,
            ode_atol: 1e-14,
            fd_step: 1e-4,
            ratio_step: 1e-2,
            series_order: None,
            tolerances: Tolerances::default(),
            workers: None,
            out: None,
            format: ReportFormat::Json,
            plot: None,
        }
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::InvalidConfig(e.to_string())
}

/// The standard test types: diag(1, −1) and diag(0, 1, 1+i).
fn preset(n: usize) -> (Vec<C64>, f64) {
    match n {
        2 => (vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)], FRAC_PI_2),
        3 => (vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 1.0)], 0.1),
        // distinct points on a slanted line; rays avoid 0.1
        _ => ((0..n).map(|k| C64::new(k as f64, 0.37 * k as f64)).collect(), 0.1),
    }
}

impl ExperimentConfig {
    pub fn for_n(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    pub fn a0(&self) -> Vec<C64> {
        match &self.a0 {
            Some(v) => v.iter().map(|p| C64::new(p[0], p[1])).collect(),
            None => preset(self.n).0,
        }
    }

    pub fn base_direction(&self) -> f64 {
        self.base_direction.unwrap_or_else(|| if self.a0.is_some() { 0.1 } else { preset(self.n).1 })
    }

    pub fn layout(&self) -> Result<SectorLayout> {
        SectorLayout::new(&self.a0(), self.base_direction())
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions { ode: OdeTolerances { rtol: self.ode_rtol, atol: self.ode_atol, ..OdeTolerances::default() }, ..SolverOptions::default() };
        if let Some(k) = self.series_order {
            o.series_cap = k;
        }
        o
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        let a0 = self.a0();
        if a0.len() != self.n {
            return Err(Error::InvalidConfig(format!("A0 has {} entries but n = {}", a0.len(), self.n)));
        }
        check_regular(&a0)?;
        self.layout()?;
        for (name, v) in [
            ("xnorm", self.xnorm),
            ("ode_rtol", self.ode_rtol),
            ("ode_atol", self.ode_atol),
            ("fd_step", self.fd_step),
            ("ratio_step", self.ratio_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        // round-trip through set() keeps every tolerance positive
        let mut t = Tolerances::default();
        for name in Tolerances::names() {
            let v = serde_json::to_value(self.tolerances).map_err(json_err)?[&name].as_f64().unwrap_or(f64::NAN);
            t.set(&name, v)?;
        }
        if self.tolerances.gauge_ratio_min >= self.tolerances.gauge_ratio_max {
            return Err(Error::InvalidConfig("gauge_ratio_min must be below gauge_ratio_max".into()));
        }
        Ok(())
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |what: &str| Error::InvalidConfig(format!("cannot parse {what} from {value:?}"));
        let float = |what: &str| value.parse::<f64>().map_err(|_| bad(what));
        let int = |what: &str| value.parse::<usize>().map_err(|_| bad(what));
        let opt_path = || if value.is_empty() { None } else { Some(PathBuf::from(value)) };
        if let Some(name) = key.strip_prefix("tol.") {
            return self.tolerances.set(name, float(name)?);
        }
        match key.as_str() {
            "n" => self.n = int("n")?,
            "a0" => {
                let parsed: Option<Vec<C64>> = value.split(',').map(parse_c64).collect();
                let v = parsed.ok_or_else(|| bad("a0"))?;
                self.a0 = Some(v.iter().map(|z| [z.re, z.im]).collect());
            }
            "base_dir" | "base_direction" => self.base_direction = Some(float("base_direction")?),
            "samples" => self.samples = int("samples")?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "xnorm" => self.xnorm = float("xnorm")?,
            "ode_rtol" => self.ode_rtol = float("ode_rtol")?,
            "ode_atol" => self.ode_atol = float("ode_atol")?,
            "fd_step" => self.fd_step = float("fd_step")?,
            "ratio_step" => self.ratio_step = float("ratio_step")?,
            "series_order" => self.series_order = Some(int("series_order")?),
            "workers" => self.workers = Some(int("workers")?),
            "out" => self.out = opt_path(),
            "plot" => self.plot = opt_path(),
            "format" => {
                self.format = match value {
                    "json" => ReportFormat::Json,
                    "csv" => ReportFormat::Csv,
                    _ => return Err(bad("format")),
                }
            }
            _ => return Err(Error::InvalidConfig(format!("unknown key {key}"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Merge a JSON object over the current settings; nested objects merge by key.
    pub fn apply_json(&mut self, text: &str) -> Result<()> {
        let patch: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        if !patch.is_object() {
            return Err(Error::InvalidConfig("JSON override must be an object".into()));
        }
        let mut base = serde_json::to_value(&*self).map_err(json_err)?;
        merge(&mut base, patch);
        *self = serde_json::from_value(base).map_err(json_err)?;
        Ok(())
    }
}

fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for n in 1..=4 {
            ExperimentConfig::for_n(n).validate().unwrap();
        }
    }

    #[test]
    fn kv_then_json() {
        let mut c = ExperimentConfig::default();
        c.parse_kv("# comment\nn = 3\nseed=7\ntol.gauge = 2e-5\na0 = 0, 1, 1+i\n").unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.seed, 7);
        assert_eq!(c.tolerances.gauge, 2e-5);
        assert_eq!(c.a0().len(), 3);
        c.apply_json(r#"{"samples": 11, "tolerances": {"relation": 1e-6}}"#).unwrap();
        assert_eq!(c.samples, 11);
        assert_eq!(c.tolerances.relation, 1e-6);
        assert_eq!(c.tolerances.gauge, 2e-5);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = ExperimentConfig::default();
        assert!(c.set("tol.nonsense", "1").is_err());
        assert!(c.set("tol.gauge", "-1").is_err());
        assert!(c.set("bogus", "1").is_err());
        assert!(c.apply_json(r#"{"bogus": 1}"#).is_err());
        c.set("a0", "1, 1").unwrap();
        assert!(c.validate().is_err());
    }
}
