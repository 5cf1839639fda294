use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Chains, ContourPosterior};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    iteration: usize,
    value: f64,
    /// 1 for burn-in iterations.
    burn_in: u8,
}

fn write_trace<F: Scalar>(path: &Path, values: impl Iterator<Item = F>, burn_in: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (iteration, v) in values.enumerate() {
        w.serialize(TraceRow { iteration, value: v.as_f64(), burn_in: u8::from(iteration < burn_in) })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

fn read_trace(path: &Path) -> Result<(Vec<f64>, usize)> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    let mut burn = 0;
    for (k, row) in r.deserialize().enumerate() {
        let row: TraceRow = row?;
        if row.iteration != k {
            return Err(Error::Format { path: path.display().to_string(), reason: format!("row {k} has iteration {}", row.iteration) });
        }
        burn += usize::from(row.burn_in);
        values.push(row.value);
    }
    Ok((values, burn))
}

/// Writes one CSV per parameter into `dir`: `mu_{line}.csv`,
/// `sigma_{line}.csv`, `kappa.csv` and `log_target.csv`, each with columns
/// `iteration,value,burn_in`.
pub fn export_traces<F: Scalar>(post: &ContourPosterior<F>, dir: &Path) -> Result<()> {
    let ch = post
        .chains
        .as_ref()
        .ok_or_else(|| Error::domain("posterior has no stored chains (constant region or chains not kept)"))?;
    std::fs::create_dir_all(dir)?;
    for (a, &line) in ch.lines.iter().enumerate() {
        write_trace(&dir.join(format!("mu_{line}.csv")), ch.mu[a].iter().copied(), ch.burn_in)?;
        write_trace(&dir.join(format!("sigma_{line}.csv")), ch.sigma[a].iter().copied(), ch.burn_in)?;
    }
    write_trace(&dir.join("kappa.csv"), ch.kappa.iter().copied(), ch.burn_in)?;
    write_trace(&dir.join("log_target.csv"), ch.log_target.iter().copied(), ch.burn_in)
}

/// Reads traces written by [`export_traces`].
pub fn import_traces<F: Scalar>(dir: &Path) -> Result<Chains<F>> {
    let (kappa, burn_in) = read_trace(&dir.join("kappa.csv"))?;
    let (log_target, _) = read_trace(&dir.join("log_target.csv"))?;
    let mut lines: Vec<usize> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix("mu_")?.strip_suffix(".csv")?.parse().ok()
        })
        .collect();
    lines.sort_unstable();
    let mut mu = Vec::with_capacity(lines.len());
    let mut sigma = Vec::with_capacity(lines.len());
    for &line in &lines {
        for (name, out) in [("mu", &mut mu), ("sigma", &mut sigma)] {
            let path = dir.join(format!("{name}_{line}.csv"));
            let (v, b) = read_trace(&path)?;
            if v.len() != kappa.len() || b != burn_in {
                return Err(Error::Format { path: path.display().to_string(), reason: "length or burn-in differs from kappa.csv".into() });
            }
            out.push(v.into_iter().map(F::lit).collect());
        }
    }
    Ok(Chains { burn_in, lines, mu, sigma, kappa: kappa.into_iter().map(F::lit).collect(), log_target })
}

/// Posterior summary as pretty JSON: means, spreads, acceptance rates,
/// fixed-line registry, configuration and seed.
pub fn write_summary<F: Scalar>(post: &ContourPosterior<F>, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(post)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_summary<F: Scalar>(path: &Path) -> Result<ContourPosterior<F>> {
    let text = std::fs::read(path)?;
    Ok(serde_json::from_slice(&text)?)
}
