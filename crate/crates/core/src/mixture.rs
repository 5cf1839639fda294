//! Two-component mixture of the contour-model probability and climatology,
//! with the weight fitted by EM on past forecast/observation pairs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ensemble_probability, AreaWeights, BinaryField, Field, ProbabilityField};
use crate::io::write_atomic;
use crate::scalar::Scalar;

/// Per-cell frequency of ice over the training years.
pub fn climatology<F: Scalar>(fields: &[BinaryField]) -> Result<ProbabilityField<F>> {
    ensemble_probability(fields)
}

/// Probability a component with ice probability `p` gave to the outcome.
pub fn component_probability<F: Scalar>(observed: bool, p: F) -> F {
    if observed {
        p
    } else {
        F::one() - p
    }
}

/// One scored cell-year: the outcome, the probability each component gave
/// to it, and the cell's area weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingTriple<F> {
    pub observed: bool,
    pub gp: F,
    pub gc: F,
    pub area: F,
}

/// Triples for one training year from the two component forecasts.
pub fn training_triples<F: Scalar>(
    obs: &BinaryField,
    contour: &ProbabilityField<F>,
    clim: &ProbabilityField<F>,
    weights: &AreaWeights<F>,
) -> Result<Vec<TrainingTriple<F>>> {
    obs.ensure_compatible(contour, "training_triples")?;
    obs.ensure_compatible(clim, "training_triples")?;
    if weights.len() != obs.len() {
        return Err(Error::structural("weights do not match the field size"));
    }
    weights
        .scored()
        .map(|(s, area)| match (obs.values[s], contour.values[s], clim.values[s]) {
            (Some(o), Some(p), Some(c)) => Ok(TrainingTriple {
                observed: o,
                gp: component_probability(o, p),
                gc: component_probability(o, c),
                area,
            }),
            _ => Err(Error::structural(format!("cell {s} is scored but missing a value"))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmConfig {
    pub w0: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Component probabilities are clamped to `[clamp, 1 - clamp]`.
    pub clamp: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig { w0: 0.5, tol: 1e-8, max_iter: 10_000, clamp: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeight {
    pub w: f64,
    /// Triples that entered the fit (equal-probability pairs are dropped).
    pub n_triples: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Objective before the first step and after each step.
    pub log_likelihood: Vec<f64>,
}

/// `sum a log(w gp + (1 - w) gc)`, the objective the weighted M-step ascends.
pub fn mixture_log_likelihood<F: Scalar>(triples: &[TrainingTriple<F>], w: f64) -> f64 {
    triples
        .iter()
        .map(|t| {
            let (gp, gc) = (t.gp.as_f64(), t.gc.as_f64());
            t.area.as_f64() * (w * gp + (1.0 - w) * gc).ln()
        })
        .sum()
}

fn prepared<F: Scalar>(triples: &[TrainingTriple<F>], clamp: f64) -> Vec<TrainingTriple<F>> {
    let (lo, hi) = (F::lit(clamp), F::lit(1.0 - clamp));
    triples
        .iter()
        .map(|t| TrainingTriple { gp: t.gp.max(lo).min(hi), gc: t.gc.max(lo).min(hi), ..*t })
        .filter(|t| t.gp != t.gc && t.area > F::zero())
        .collect()
}

/// EM estimate of the contour-model weight.
///
/// E-step: `z = w gp / (w gp + (1 - w) gc)`; M-step: `w = sum a z / sum a`,
/// over triples whose components differ after clamping. Stops when `w` moves
/// less than `tol` or after `max_iter` steps.
pub fn fit_weight<F: Scalar>(triples: &[TrainingTriple<F>], cfg: &EmConfig) -> Result<MixtureWeight> {
    if !(cfg.w0 > 0.0 && cfg.w0 < 1.0) {
        return Err(Error::domain(format!("initial weight {} outside (0, 1)", cfg.w0)));
    }
    if !(cfg.clamp > 0.0 && cfg.clamp < 0.5) || !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::domain("EM needs 0 < clamp < 0.5, tol > 0 and max_iter >= 1"));
    }
    let used = prepared(triples, cfg.clamp);
    if used.is_empty() {
        return Err(Error::WeightUndefined);
    }
    let total: f64 = used.iter().map(|t| t.area.as_f64()).sum();
    let mut w = cfg.w0;
    let mut ll = vec![mixture_log_likelihood(&used, w)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let num: f64 = used
            .iter()
            .map(|t| {
                let (gp, gc) = (t.gp.as_f64(), t.gc.as_f64());
                t.area.as_f64() * (w * gp) / (w * gp + (1.0 - w) * gc)
            })
            .sum();
        let next = num / total;
        iterations += 1;
        let step = (next - w).abs();
        w = next;
        ll.push(mixture_log_likelihood(&used, w));
        if step < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(MixtureWeight { w, n_triples: used.len(), iterations, converged, log_likelihood: ll })
}

/// `w gp + (1 - w) gc` cellwise.
pub fn mcf_probability<F: Scalar>(gp: &ProbabilityField<F>, gc: &ProbabilityField<F>, w: F) -> Result<ProbabilityField<F>> {
    gp.ensure_compatible(gc, "mcf_probability")?;
    if !(w >= F::zero() && w <= F::one()) {
        return Err(Error::domain(format!("weight {w} outside [0, 1]")));
    }
    let values = gp
        .values
        .iter()
        .zip(&gc.values)
        .map(|(p, c)| match (p, c) {
            (Some(p), Some(c)) => Some(w * *p + (F::one() - w) * *c),
            _ => None,
        })
        .collect();
    Ok(Field { grid: gp.grid.clone(), stamp: gp.stamp, values })
}

/// Ice wherever the probability is at least one half.
pub fn mcf_binary<F: Scalar>(p: &ProbabilityField<F>) -> BinaryField {
    p.map(|v| v >= F::lit(0.5))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub year: i32,
    pub month: u8,
    pub lead: f64,
    pub w: f64,
    pub n_triples: usize,
    pub iterations: usize,
    pub log_likelihood: f64,
}

pub fn write_weight_table(path: &Path, rows: &[WeightRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_weight_table(path: &Path) -> Result<Vec<WeightRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<WeightRow>, _>>()?)
}
