//! Area-weighted Brier scores, reliability-diagram bins and score tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AreaWeights, BinaryField, ProbabilityField};
use crate::io::write_atomic;
use crate::scalar::Scalar;

fn check_pair<F: Scalar>(f: &ProbabilityField<F>, o: &BinaryField, w: &AreaWeights<F>) -> Result<()> {
    f.grid.ensure_same(&o.grid, "forecast and observation")?;
    if w.len() != o.len() {
        return Err(Error::structural(format!("weights cover {} cells, fields {}", w.len(), o.len())));
    }
    Ok(())
}

fn scored_pairs<'a, F: Scalar>(
    f: &'a ProbabilityField<F>,
    o: &'a BinaryField,
    w: &'a AreaWeights<F>,
) -> impl Iterator<Item = Result<(F, bool, F)>> + 'a {
    w.scored().map(move |(s, a)| match (f.values[s], o.values[s]) {
        (Some(p), Some(g)) => Ok((p, g, a)),
        _ => Err(Error::structural(format!("cell {s} is weighted but unscored in an input"))),
    })
}

/// `sum_s a_s (f_s - o_s)^2` for one year.
pub fn brier<F: Scalar>(forecast: &ProbabilityField<F>, obs: &BinaryField, weights: &AreaWeights<F>) -> Result<F> {
    check_pair(forecast, obs, weights)?;
    let mut total = F::zero();
    for item in scored_pairs(forecast, obs, weights) {
        let (p, g, a) = item?;
        let o = if g { F::one() } else { F::zero() };
        total += a * (p - o) * (p - o);
    }
    Ok(total)
}

/// Brier score of a binary forecast.
pub fn brier_binary<F: Scalar>(forecast: &BinaryField, obs: &BinaryField, weights: &AreaWeights<F>) -> Result<F> {
    brier(&forecast.to_probability(), obs, weights)
}

/// Mean of the single-year scores over the `T` pairs.
pub fn brier_mean<F: Scalar>(pairs: &[(&ProbabilityField<F>, &BinaryField)], weights: &AreaWeights<F>) -> Result<F> {
    if pairs.is_empty() {
        return Err(Error::domain("no forecast/observation pairs"));
    }
    let mut total = F::zero();
    for (f, o) in pairs {
        total += brier(f, o, weights)?;
    }
    Ok(total / F::from_usize_lossy(pairs.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Area,
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub weight: f64,
    pub mean_forecast: Option<f64>,
    pub observed_freq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBins {
    pub weighting: Weighting,
    pub bins: Vec<ReliabilityBin>,
}

/// Bin of `p` among `b` equal bins with right-inclusive edges; bin 0 is
/// `[0, 1/b]`.
pub fn bin_index(p: f64, b: usize) -> usize {
    let edge = |k: usize| k as f64 / b as f64;
    let mut k = ((p * b as f64).ceil() as usize).saturating_sub(1).min(b - 1);
    while k > 0 && p <= edge(k) {
        k -= 1;
    }
    while k + 1 < b && p > edge(k + 1) {
        k += 1;
    }
    k
}

/// Pools every scored cell of every pair into `b` probability bins.
pub fn reliability<F: Scalar>(
    pairs: &[(&ProbabilityField<F>, &BinaryField)],
    weights: &AreaWeights<F>,
    b: usize,
    weighting: Weighting,
) -> Result<ReliabilityBins> {
    if b < 2 {
        return Err(Error::domain("reliability needs at least 2 bins"));
    }
    let mut count = vec![0usize; b];
    let mut wsum = vec![0.0f64; b];
    let mut fsum = vec![0.0f64; b];
    let mut osum = vec![0.0f64; b];
    for (f, o) in pairs {
        check_pair(f, o, weights)?;
        for item in scored_pairs(f, o, weights) {
            let (p, g, a) = item?;
            let p = p.as_f64();
            let a = match weighting {
                Weighting::Area => a.as_f64(),
                Weighting::Equal => 1.0,
            };
            let k = bin_index(p, b);
            count[k] += 1;
            wsum[k] += a;
            fsum[k] += a * p;
            if g {
                osum[k] += a;
            }
        }
    }
    let bins = (0..b)
        .map(|k| {
            let filled = count[k] > 0 && wsum[k] > 0.0;
            ReliabilityBin {
                lo: k as f64 / b as f64,
                hi: (k + 1) as f64 / b as f64,
                count: count[k],
                weight: wsum[k],
                mean_forecast: filled.then(|| fsum[k] / wsum[k]),
                observed_freq: filled.then(|| osum[k] / wsum[k]),
            }
        })
        .collect();
    Ok(ReliabilityBins { weighting, bins })
}

impl ReliabilityBins {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.bins.iter().filter_map(|b| Some((b.mean_forecast?, b.observed_freq?, b.weight)))
    }

    /// Largest `|observed - forecast|` over non-empty bins.
    pub fn max_deviation(&self) -> f64 {
        self.points().map(|(f, o, _)| (o - f).abs()).fold(0.0, f64::max)
    }

    /// Weighted least-squares slope of observed frequency on mean forecast.
    pub fn slope(&self) -> Option<f64> {
        let pts: Vec<_> = self.points().collect();
        let sw: f64 = pts.iter().map(|p| p.2).sum();
        let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
        let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
        let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lo", "hi", "count", "weight", "mean_forecast", "observed_freq"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.bins {
            w.write_record([
                b.lo.to_string(),
                b.hi.to_string(),
                b.count.to_string(),
                b.weight.to_string(),
                opt(b.mean_forecast),
                opt(b.observed_freq),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_atomic(path, &bytes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Season {
    #[serde(rename = "DJF")]
    Djf,
    #[serde(rename = "MAM")]
    Mam,
    #[serde(rename = "JJA")]
    Jja,
    #[serde(rename = "SON")]
    Son,
}

impl Season {
    pub fn of(month: u8) -> Season {
        match month {
            12 | 1 | 2 => Season::Djf,
            3..=5 => Season::Mam,
            6..=8 => Season::Jja,
            _ => Season::Son,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Season::Djf => "DJF",
            Season::Mam => "MAM",
            Season::Jja => "JJA",
            Season::Son => "SON",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub method: String,
    pub month: u8,
    pub lead: f64,
    pub year: i32,
    pub brier: f64,
}

/// Mean Brier score for one group of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub method: String,
    pub group: String,
    pub lead: Option<f64>,
    pub n: usize,
    pub mean_brier: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn push(&mut self, method: &str, month: u8, lead: f64, year: i32, brier: f64) {
        self.rows.push(ScoreRow { method: method.into(), month, lead, year, brier });
    }

    pub fn methods(&self) -> Vec<String> {
        let mut m: Vec<String> = Vec::new();
        for r in &self.rows {
            if !m.contains(&r.method) {
                m.push(r.method.clone());
            }
        }
        m
    }

    fn summarize(&self, key: impl Fn(&ScoreRow) -> (String, Option<u64>)) -> Vec<ScoreSummary> {
        let order = self.methods();
        let mut groups: BTreeMap<(usize, String, Option<u64>), (usize, f64)> = BTreeMap::new();
        for r in &self.rows {
            let m = order.iter().position(|x| *x == r.method).expect("method listed");
            let (g, lead) = key(r);
            let e = groups.entry((m, g, lead)).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += r.brier;
        }
        groups
            .into_iter()
            .map(|((m, group, lead), (n, sum))| ScoreSummary {
                method: order[m].clone(),
                group,
                lead: lead.map(f64::from_bits),
                n,
                mean_brier: sum / n as f64,
            })
            .collect()
    }

    /// Mean over years for each method, month and lead.
    pub fn by_month(&self) -> Vec<ScoreSummary> {
        self.summarize(|r| (format!("{:02}", r.month), Some(r.lead.to_bits())))
    }

    /// Mean over years and the season's months for each method and lead.
    pub fn by_season(&self) -> Vec<ScoreSummary> {
        self.summarize(|r| (Season::of(r.month).label().to_string(), Some(r.lead.to_bits())))
    }

    /// Mean over every row of each method.
    pub fn overall(&self) -> Vec<ScoreSummary> {
        self.summarize(|_| ("all".to_string(), None))
    }

    pub fn mean_for(&self, method: &str) -> Option<f64> {
        self.overall().into_iter().find(|s| s.method == method).map(|s| s.mean_brier)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_rows(path, &self.rows)
    }

    pub fn read_csv(path: &Path) -> Result<ScoreTable> {
        let mut r = csv::Reader::from_path(path)?;
        Ok(ScoreTable { rows: r.deserialize().collect::<std::result::Result<_, _>>()? })
    }
}

pub fn write_summaries(path: &Path, rows: &[ScoreSummary]) -> Result<()> {
    write_rows(path, rows)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Mean Brier score of one method for one weight-training window length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub window: usize,
    pub method: String,
    pub mean_brier: f64,
}

pub fn write_window_sweep(path: &Path, rows: &[WindowRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Reliability diagram as a standalone SVG: one polyline per curve against
/// the diagonal.
pub fn reliability_svg(curves: &[(&str, &ReliabilityBins)]) -> String {
    const SIZE: f64 = 400.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
    let map = |x: f64, y: f64| (PAD + x * SIZE, PAD + (1.0 - y) * SIZE);
    let mut s = String::new();
    let full = SIZE + 2.0 * PAD;
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#);
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#);
    let (x0, y0) = map(0.0, 0.0);
    let (x1, y1) = map(1.0, 1.0);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="gray" stroke-dasharray="4 4"/>"#);
    for (k, (name, bins)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = bins
            .points()
            .map(|(f, o, _)| {
                let (x, y) = map(f, o);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        let ly = PAD + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}" font-size="12">{name}</text>"#, PAD + 8.0);
    }
    s.push_str("</svg>\n");
    s
}
