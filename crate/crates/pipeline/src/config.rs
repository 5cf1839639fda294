//! Experiment configuration, region configuration and their validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use icecontour::geometry::{LineLayout, Point};
use icecontour::mixture::EmConfig;
use icecontour::model::ModelConfig;
use icecontour::verify::Weighting;
use serde::{Deserialize, Serialize};

use crate::scenario::SyntheticScenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mcf,
    McfBinary,
    Contour,
    ContourBinary,
    Climatology,
    ClimatologyBinary,
    Ensemble,
    EnsembleBinary,
    Persistence,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Mcf,
        Method::McfBinary,
        Method::Contour,
        Method::ContourBinary,
        Method::Climatology,
        Method::ClimatologyBinary,
        Method::Ensemble,
        Method::EnsembleBinary,
        Method::Persistence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mcf => "mcf",
            Method::McfBinary => "mcf-binary",
            Method::Contour => "contour",
            Method::ContourBinary => "contour-binary",
            Method::Climatology => "climatology",
            Method::ClimatologyBinary => "climatology-binary",
            Method::Ensemble => "ensemble",
            Method::EnsembleBinary => "ensemble-binary",
            Method::Persistence => "persistence",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(
            self,
            Method::McfBinary | Method::ContourBinary | Method::ClimatologyBinary | Method::EnsembleBinary | Method::Persistence
        )
    }

    /// Whether the method needs contour-model output.
    pub fn needs_contours(self) -> bool {
        matches!(self, Method::Mcf | Method::McfBinary | Method::Contour | Method::ContourBinary)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}; expected one of {}", Method::ALL.map(Method::name).join(", ")))
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(s: &str) -> Result<Vec<Method>, String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(Method::from_str).collect()
}

/// Parses `A..B` (inclusive) into a window range.
pub fn parse_window_sweep(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("window sweep {s:?} is not of the form A..B"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad window start {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad window end {b:?}"))?;
    if a == 0 || b < a {
        return Err(format!("window sweep {s:?} must satisfy 1 <= A <= B"));
    }
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum LayoutConfig {
    Radial {
        /// Centre in km.
        center: [f64; 2],
        n_lines: usize,
    },
    Coastal {
        /// Direction of growth off the coast, degrees.
        angle_deg: f64,
        n_lines: usize,
        #[serde(default)]
        anchors: Option<Vec<[f64; 2]>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub id: u32,
    pub layout: LayoutConfig,
    /// Lines that may be held fixed when constant over the training years.
    #[serde(default)]
    pub fixable: Vec<usize>,
}

impl RegionConfig {
    pub fn line_layout(&self) -> LineLayout<f64> {
        match &self.layout {
            LayoutConfig::Radial { center, n_lines } => {
                LineLayout::Radial { center: Point::new(center[0], center[1]), n_lines: *n_lines }
            }
            LayoutConfig::Coastal { angle_deg, n_lines, anchors } => LineLayout::Coastal {
                angle: angle_deg.to_radians(),
                n_lines: *n_lines,
                anchors: anchors.as_ref().map(|a| a.iter().map(|p| Point::new(p[0], p[1])).collect()),
            },
        }
    }
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_regions() -> PathBuf {
    PathBuf::from("regions.json")
}
fn default_p() -> usize {
    10
}
fn default_window() -> usize {
    3
}
fn default_samples() -> usize {
    100
}
fn default_tuning() -> f64 {
    icecontour::shift::DEFAULT_HUBER_TUNING
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_bins() -> usize {
    10
}
fn default_weighting() -> Weighting {
    Weighting::Equal
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Input directory, relative to the config file.
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    /// Output directory, relative to the config file.
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Region file, relative to `data_dir`.
    #[serde(default = "default_regions")]
    pub regions: PathBuf,
    pub months: Vec<u8>,
    /// Lead times in months; half-month values (0.5, 1.5, ...).
    pub leads: Vec<f64>,
    /// Years to issue mixture forecasts for.
    pub forecast_years: Vec<i32>,
    /// First year of observations and ensembles used for training.
    pub first_year: i32,
    /// Training years for climatology and the contour model.
    #[serde(default = "default_p")]
    pub climatology_years: usize,
    /// Training years for the mixture weight.
    #[serde(default = "default_window")]
    pub weight_window: usize,
    /// Contours generated per forecast.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Endpoints this close to land or the region edge are snapped onto it, km.
    #[serde(default)]
    pub snap_km: f64,
    #[serde(default = "default_tuning")]
    pub huber_tuning: f64,
    /// First year of the damped-persistence training series; `first_year`
    /// when absent.
    #[serde(default)]
    pub persistence_start: Option<i32>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub em: EmConfig,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub reliability_bins: usize,
    #[serde(default = "default_weighting")]
    pub reliability_weighting: Weighting,
    /// Write MCMC traces next to each posterior summary.
    #[serde(default)]
    pub export_traces: bool,
    /// Parameters for `simulate`.
    #[serde(default)]
    pub scenario: Option<SyntheticScenario>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }

    /// Initialization month for a target month and lead: the last full month
    /// observed before the forecast is issued.
    pub fn init_month(month: u8, lead: f64) -> u8 {
        let back = (lead + 0.5).round() as i32;
        ((i32::from(month) - 1 - back).rem_euclid(12) + 1) as u8
    }

    /// Earliest year that needs a contour-model forecast for the configured
    /// forecast years and a weight window of `window` years.
    pub fn first_contour_year(&self, window: usize) -> Option<i32> {
        self.forecast_years.iter().min().map(|t| t - window as i32)
    }

    pub fn persistence_start(&self) -> i32 {
        self.persistence_start.unwrap_or(self.first_year)
    }

    /// Every violated constraint of the configuration itself.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.months.is_empty() {
            v.push("months is empty".into());
        }
        for m in &self.months {
            if !(1..=12).contains(m) {
                v.push(format!("month {m} outside 1..=12"));
            }
        }
        if self.leads.is_empty() {
            v.push("leads is empty".into());
        }
        for l in &self.leads {
            if !(*l >= 0.5 && *l < 12.0 && (l - 0.5).fract() == 0.0) {
                v.push(format!("lead {l} must be one of 0.5, 1.5, ..., 11.5"));
            }
        }
        if self.forecast_years.is_empty() {
            v.push("forecast_years is empty".into());
        }
        if self.climatology_years == 0 {
            v.push("climatology_years must be at least 1".into());
        }
        if self.climatology_years < 2 && self.methods.iter().any(|m| m.needs_contours()) {
            v.push("the contour model needs climatology_years >= 2".into());
        }
        if self.weight_window == 0 {
            v.push("weight_window must be at least 1".into());
        }
        if self.samples == 0 {
            v.push("samples must be at least 1".into());
        }
        if !(self.snap_km >= 0.0) {
            v.push(format!("snap_km {} must be non-negative", self.snap_km));
        }
        if !(self.huber_tuning > 0.0) {
            v.push(format!("huber_tuning {} must be positive", self.huber_tuning));
        }
        if self.methods.is_empty() {
            v.push("methods is empty".into());
        }
        if self.reliability_bins < 2 {
            v.push("reliability_bins must be at least 2".into());
        }
        if !(self.em.w0 > 0.0 && self.em.w0 < 1.0) {
            v.push(format!("em.w0 {} must lie in (0, 1)", self.em.w0));
        }
        if !(self.em.clamp > 0.0 && self.em.clamp < 0.5) {
            v.push(format!("em.clamp {} must lie in (0, 0.5)", self.em.clamp));
        }
        if !(self.em.tol > 0.0) || self.em.max_iter == 0 {
            v.push("em.tol must be positive and em.max_iter at least 1".into());
        }
        v.extend(self.model.violations().into_iter().map(|s| format!("model: {s}")));
        if let Some(first) = self.first_contour_year(self.weight_window) {
            // the shift trend needs three years before the earliest contour year
            let need = first - (self.climatology_years as i32).max(3);
            if need < self.first_year {
                v.push(format!(
                    "forecast year {} needs training data from {need}, before first_year {}",
                    first + self.weight_window as i32,
                    self.first_year
                ));
            }
        }
        if self.methods.contains(&Method::Persistence) {
            if let Some(&t) = self.forecast_years.iter().min() {
                if t - self.persistence_start() < 4 {
                    v.push(format!("persistence needs at least three training years before {t}"));
                }
            }
        }
        if let Some(s) = &self.scenario {
            v.extend(s.violations().into_iter().map(|x| format!("scenario: {x}")));
        }
        v
    }
}

/// Lead formatted for paths: `lead0.5`.
pub fn lead_dir(lead: f64) -> String {
    format!("lead{lead}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentConfig {
        serde_json::from_str(r#"{"months": [9], "leads": [0.5], "forecast_years": [2015], "first_year": 2000}"#).unwrap()
    }

    #[test]
    fn defaults() {
        let c = minimal();
        assert_eq!(c.climatology_years, 10);
        assert_eq!(c.weight_window, 3);
        assert_eq!(c.methods.len(), 9);
        assert!(c.violations().is_empty(), "{:?}", c.violations());
    }

    #[test]
    fn lists_every_violation() {
        let mut c = minimal();
        c.months = vec![13];
        c.leads = vec![0.7];
        c.samples = 0;
        c.model.burn_in = c.model.iterations;
        let v = c.violations();
        assert!(v.len() >= 4, "{v:?}");
        assert!(v.iter().any(|s| s.starts_with("model:")));
    }

    #[test]
    fn init_month_wraps() {
        assert_eq!(ExperimentConfig::init_month(9, 0.5), 8);
        assert_eq!(ExperimentConfig::init_month(9, 2.5), 6);
        assert_eq!(ExperimentConfig::init_month(1, 0.5), 12);
        assert_eq!(ExperimentConfig::init_month(2, 3.5), 10);
    }

    #[test]
    fn method_names() {
        assert_eq!(parse_methods("mcf, persistence").unwrap(), vec![Method::Mcf, Method::Persistence]);
        assert!(parse_methods("mcf,bogus").is_err());
        for m in Method::ALL {
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }

    #[test]
    fn window_sweep_syntax() {
        assert_eq!(parse_window_sweep("1..7").unwrap(), (1, 7));
        assert!(parse_window_sweep("3..2").is_err());
        assert!(parse_window_sweep("0..2").is_err());
        assert!(parse_window_sweep("5").is_err());
    }

    #[test]
    fn region_layout_forms() {
        let r: RegionConfig =
            serde_json::from_str(r#"{"id": 2, "layout": {"coastal": {"angle_deg": 90, "n_lines": 5}}}"#).unwrap();
        assert!(matches!(r.line_layout(), LineLayout::Coastal { n_lines: 5, anchors: None, .. }));
    }
}
