//! Bias correction of the ensemble-mean contour by per-line trend shifting.
//!
//! For each line the observed and ensemble ice-edge lengths are fitted with
//! robust linear trends over the training years; the current ensemble length
//! is moved by the gap between the two trends at the forecast year.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RegionGeometry;
use crate::scalar::Scalar;
use crate::stats::huber_fit;

pub const DEFAULT_HUBER_TUNING: f64 = 1.345;

/// Per-year, per-line observed and ensemble lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSeries<F> {
    pub years: Vec<i32>,
    /// `obs[year][line]`.
    pub obs: Vec<Vec<F>>,
    /// `ens[year][line]`.
    pub ens: Vec<Vec<F>>,
}

impl<F: Scalar> LengthSeries<F> {
    pub fn new(years: Vec<i32>, obs: Vec<Vec<F>>, ens: Vec<Vec<F>>) -> Result<Self> {
        if years.len() != obs.len() || years.len() != ens.len() {
            return Err(Error::structural("years, observed and ensemble rows differ in count"));
        }
        let n = obs.first().map_or(0, Vec::len);
        if obs.iter().chain(&ens).any(|r| r.len() != n) {
            return Err(Error::structural("rows disagree on the number of lines"));
        }
        if years.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("years must be strictly increasing"));
        }
        Ok(LengthSeries { years, obs, ens })
    }

    pub fn n_lines(&self) -> usize {
        self.obs.first().map_or(0, Vec::len)
    }

    /// Years between the first one present and `before - 1` with no row.
    pub fn gaps_before(&self, before: i32) -> Vec<i32> {
        let Some(&first) = self.years.first() else { return Vec::new() };
        (first..before).filter(|y| self.years.binary_search(y).is_err()).collect()
    }
}

/// Trend pairs `(level, slope)` for one line, with the level taken at the
/// forecast year rather than year zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineTrends<F> {
    pub obs: (F, F),
    pub ens: (F, F),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedForecast<F> {
    pub year: i32,
    /// `||y^CS_i||`, clamped to each line's length.
    pub lengths: Vec<F>,
    /// `None` for lines passed through unshifted.
    pub trends: Vec<Option<LineTrends<F>>>,
}

impl<F: Scalar> ShiftedForecast<F> {
    /// Per-line shift applied to the ensemble length before clamping.
    pub fn raw_shift(&self, i: usize) -> F {
        match self.trends[i] {
            Some(t) => t.obs.0 - t.ens.0,
            None => F::zero(),
        }
    }
}

/// Shifts `ens_now` using trends fitted on every training year before
/// `year`. Lines flagged in `passthrough` keep their ensemble length.
pub fn contour_shift<F: Scalar>(
    series: &LengthSeries<F>,
    geom: &RegionGeometry<F>,
    ens_now: &[F],
    year: i32,
    passthrough: &[bool],
    tuning: F,
) -> Result<ShiftedForecast<F>> {
    let n = geom.n_lines();
    if ens_now.len() != n || passthrough.len() != n || series.n_lines() != n {
        return Err(Error::structural(format!(
            "line counts differ: geometry {n}, ensemble {}, flags {}, series {}",
            ens_now.len(),
            passthrough.len(),
            series.n_lines()
        )));
    }
    let gaps = series.gaps_before(year);
    if !gaps.is_empty() {
        return Err(Error::MissingYears(gaps));
    }
    let rows: Vec<usize> = (0..series.years.len()).filter(|&k| series.years[k] < year).collect();
    let x: Vec<F> = rows.iter().map(|&k| F::lit(f64::from(series.years[k] - year))).collect();
    let mut lengths = Vec::with_capacity(n);
    let mut trends = Vec::with_capacity(n);
    for i in 0..n {
        let max = geom.line(i).length();
        if passthrough[i] {
            lengths.push(ens_now[i].max(F::zero()).min(max));
            trends.push(None);
            continue;
        }
        let yo: Vec<F> = rows.iter().map(|&k| series.obs[k][i]).collect();
        let ye: Vec<F> = rows.iter().map(|&k| series.ens[k][i]).collect();
        let obs = huber_fit(&x, &yo, tuning)?;
        let ens = huber_fit(&x, &ye, tuning)?;
        lengths.push((ens_now[i] + obs.0 - ens.0).max(F::zero()).min(max));
        trends.push(Some(LineTrends { obs, ens }));
    }
    Ok(ShiftedForecast { year, lengths, trends })
}

#[derive(Debug, Serialize, Deserialize)]
struct LengthRow {
    region: u32,
    line: usize,
    year: i32,
    obs_length: f64,
    ens_length: f64,
}

/// Writes `region,line,year,obs_length,ens_length` rows.
pub fn write_length_table<F: Scalar>(path: &Path, region: u32, series: &LengthSeries<F>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (k, &year) in series.years.iter().enumerate() {
        for line in 0..series.n_lines() {
            w.serialize(LengthRow {
                region,
                line,
                year,
                obs_length: series.obs[k][line].as_f64(),
                ens_length: series.ens[k][line].as_f64(),
            })?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

/// Reads a length table back, keeping only rows for `region`.
pub fn read_length_table<F: Scalar>(path: &Path, region: u32) -> Result<LengthSeries<F>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut by_year: BTreeMap<i32, BTreeMap<usize, (f64, f64)>> = BTreeMap::new();
    for row in r.deserialize() {
        let row: LengthRow = row?;
        if row.region == region {
            by_year.entry(row.year).or_default().insert(row.line, (row.obs_length, row.ens_length));
        }
    }
    let mut years = Vec::new();
    let (mut obs, mut ens) = (Vec::new(), Vec::new());
    for (year, lines) in by_year {
        if lines.keys().copied().ne(0..lines.len()) {
            return Err(Error::Format {
                path: path.display().to_string(),
                reason: format!("year {year} does not list lines 0..n contiguously"),
            });
        }
        years.push(year);
        obs.push(lines.values().map(|v| F::lit(v.0)).collect());
        ens.push(lines.values().map(|v| F::lit(v.1)).collect());
    }
    LengthSeries::new(years, obs, ens)
}
