//! Bayesian contour model.
//!
//! Per-line logit proportions are multivariate normal with mean `mu` and
//! covariance `Sigma_ij = sigma_i sigma_j exp(-d_ij / kappa)`, where `d` is
//! the index distance (coastal) or the minor-arc angle (radial). `mu` has a
//! normal prior centred on the bias-corrected ensemble mean; `sigma` and
//! `kappa` have uniform priors. The posterior is sampled with single-site
//! Metropolis updates.

mod generate;
mod sampler;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeometryKind, RegionGeometry};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::shift::ShiftedForecast;
use crate::stats::{logit, logit_clamped, sigma_for_mass};

pub use generate::{contour_probability, generate_contours, mean_contour, sample_proportions};
pub use sampler::{fit_posterior, Chains, ContourPosterior};
pub use trace::{export_traces, import_traces, read_summary, write_summary};

/// Sampler and prior settings. Kept in `f64`; it is configuration, not a
/// model quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub eps: f64,
    /// Half-width of the prior interval for each `mu_i`, on the proportion scale.
    pub prior_half_width: f64,
    /// Prior mass placed inside that interval.
    pub prior_mass: f64,
    pub sigma_lower: f64,
    /// Lower proportion used for the `sigma` upper bound; `eps` when absent.
    pub delta1: Option<f64>,
    /// Upper proportion used for the `sigma` upper bound; `1 - eps` when absent.
    pub delta2: Option<f64>,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    pub iterations: usize,
    pub burn_in: usize,
    /// Acceptance rate the proposal scales adapt toward during burn-in.
    pub target_acceptance: f64,
    /// Keep full chains (needed for trace export); means are kept regardless.
    pub store_chains: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            eps: 0.01,
            prior_half_width: 0.125,
            prior_mass: 0.99,
            sigma_lower: 0.01,
            delta1: None,
            delta2: None,
            kappa_lower: 0.05,
            kappa_upper: 20.0,
            iterations: 55_000,
            burn_in: 5_000,
            target_acceptance: 0.3,
            store_chains: true,
        }
    }
}

impl ModelConfig {
    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.eps > 0.0 && self.eps < 0.5) {
            v.push(format!("eps {} must lie in (0, 0.5)", self.eps));
        }
        if !(self.prior_half_width > 0.0 && self.prior_half_width < 1.0) {
            v.push(format!("prior_half_width {} must lie in (0, 1)", self.prior_half_width));
        }
        if !(self.prior_mass > 0.0 && self.prior_mass < 1.0) {
            v.push(format!("prior_mass {} must lie in (0, 1)", self.prior_mass));
        }
        let (d1, d2) = (self.delta1(), self.delta2());
        if !(d1 > 0.0 && d2 < 1.0 && d1 < d2) {
            v.push(format!("delta1 {d1} and delta2 {d2} must satisfy 0 < delta1 < delta2 < 1"));
        }
        if !(self.sigma_lower > 0.0) {
            v.push(format!("sigma_lower {} must be positive", self.sigma_lower));
        } else if v.is_empty() && self.sigma_upper() <= self.sigma_lower {
            v.push(format!("sigma bounds ({}, {}) are empty", self.sigma_lower, self.sigma_upper()));
        }
        if !(self.kappa_lower > 0.0 && self.kappa_lower < self.kappa_upper) {
            v.push(format!("kappa bounds ({}, {}) must be positive and increasing", self.kappa_lower, self.kappa_upper));
        }
        if self.iterations == 0 || self.burn_in >= self.iterations {
            v.push(format!("burn_in {} must be below iterations {}", self.burn_in, self.iterations));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            v.push(format!("target_acceptance {} must lie in (0, 1)", self.target_acceptance));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(v.join("; ")))
        }
    }

    pub fn delta1(&self) -> f64 {
        self.delta1.unwrap_or(self.eps)
    }

    pub fn delta2(&self) -> f64 {
        self.delta2.unwrap_or(1.0 - self.eps)
    }

    /// Upper bound of the uniform `sigma` prior: the standard deviation with
    /// `prior_mass` inside `(logit delta1, logit delta2)`.
    pub fn sigma_upper(&self) -> f64 {
        sigma_for_mass(logit(self.delta1()), logit(self.delta2()), self.prior_mass).unwrap_or(f64::NAN)
    }
}

/// Prior hyperparameters, one entry per line of the region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec<F> {
    pub mu0: Vec<F>,
    /// Diagonal of `Lambda_0`, as variances.
    pub lambda0: Vec<F>,
    pub sigma_bounds: (F, F),
    pub kappa_bounds: (F, F),
}

impl<F: Scalar> PriorSpec<F> {
    pub fn n_lines(&self) -> usize {
        self.mu0.len()
    }
}

/// Prior from per-line shifted-ensemble proportions `pi^CS`.
pub fn prior_from_proportions<F: Scalar>(pis: &[F], cfg: &ModelConfig) -> Result<PriorSpec<F>> {
    cfg.validate()?;
    let eps = F::lit(cfg.eps);
    let h = F::lit(cfg.prior_half_width);
    let mass = F::lit(cfg.prior_mass);
    let mut mu0 = Vec::with_capacity(pis.len());
    let mut lambda0 = Vec::with_capacity(pis.len());
    for &p in pis {
        if !(p >= F::zero() && p <= F::one()) {
            return Err(Error::domain(format!("proportion {p} outside [0, 1]")));
        }
        mu0.push(logit_clamped(p, eps));
        let lo = logit((p - h).max(eps));
        let hi = logit((p + h).min(F::one() - eps));
        let sd = sigma_for_mass(lo, hi, mass)?;
        lambda0.push(sd * sd);
    }
    Ok(PriorSpec {
        mu0,
        lambda0,
        sigma_bounds: (F::lit(cfg.sigma_lower), F::lit(cfg.sigma_upper())),
        kappa_bounds: (F::lit(cfg.kappa_lower), F::lit(cfg.kappa_upper)),
    })
}

/// Prior centred on the Contour-Shifted ensemble mean.
pub fn build_prior<F: Scalar>(
    shifted: &ShiftedForecast<F>,
    geom: &RegionGeometry<F>,
    cfg: &ModelConfig,
) -> Result<PriorSpec<F>> {
    if shifted.lengths.len() != geom.n_lines() {
        return Err(Error::structural(format!(
            "{} shifted lengths for {} lines",
            shifted.lengths.len(),
            geom.n_lines()
        )));
    }
    let pis: Vec<F> = geom.lines.iter().zip(&shifted.lengths).map(|(l, &y)| l.proportion_from_length(y)).collect();
    prior_from_proportions(&pis, cfg)
}

/// Per-line state of a contour: proportion, logit value, fixed flag, length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineState<F> {
    pub pi: F,
    pub logit: F,
    pub fixed: bool,
    pub length: F,
}

/// Line states for observed proportions on one geometry.
pub fn line_states<F: Scalar>(
    geom: &RegionGeometry<F>,
    pis: &[F],
    fixed: &[Option<bool>],
    eps: F,
) -> Result<Vec<LineState<F>>> {
    geom.lines
        .iter()
        .zip(pis)
        .zip(fixed)
        .map(|((line, &pi), f)| {
            Ok(LineState { pi, logit: logit_clamped(pi, eps), fixed: f.is_some(), length: line.length_from_proportion(pi)? })
        })
        .collect()
}

/// Distance between lines used by the covariance kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "angles")]
pub enum Kernel<F> {
    /// `|i - j|` on line indices.
    Index,
    /// Minor-arc angle between line directions.
    Angular(Vec<F>),
}

impl<F: Scalar> Kernel<F> {
    pub fn for_geometry(geom: &RegionGeometry<F>) -> Self {
        match geom.kind {
            GeometryKind::Coastal => Kernel::Index,
            GeometryKind::Radial => Kernel::Angular(geom.angles()),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> F {
        match self {
            Kernel::Index => F::from_usize_lossy(i.abs_diff(j)),
            Kernel::Angular(a) => angular_distance(a[i], a[j]),
        }
    }

    /// Correlation matrix `exp(-d / kappa)` over the given lines.
    pub fn correlation(&self, lines: &[usize], kappa: F) -> Matrix<F> {
        let m = lines.len();
        let mut c = Matrix::zeros(m);
        for a in 0..m {
            c.set(a, a, F::one());
            for b in 0..a {
                let v = (-self.distance(lines[a], lines[b]) / kappa).exp();
                c.set(a, b, v);
                c.set(b, a, v);
            }
        }
        c
    }
}

/// Smaller angle between two directions, in `[0, pi]`.
pub fn angular_distance<F: Scalar>(a: F, b: F) -> F {
    let d = (a - b).abs() % F::TAU();
    d.min(F::TAU() - d)
}

/// `Sigma(sigma, kappa)` over every line of the geometry.
pub fn build_covariance<F: Scalar>(sigma: &[F], kappa: F, geom: &RegionGeometry<F>) -> Result<Matrix<F>> {
    if sigma.len() != geom.n_lines() {
        return Err(Error::structural(format!("{} sigmas for {} lines", sigma.len(), geom.n_lines())));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > F::zero())) {
        return Err(Error::domain(format!("sigma {s} must be positive")));
    }
    if !(kappa > F::zero()) {
        return Err(Error::domain(format!("kappa {kappa} must be positive")));
    }
    let lines: Vec<usize> = (0..sigma.len()).collect();
    let c = Kernel::for_geometry(geom).correlation(&lines, kappa);
    Ok(Matrix::from_fn(sigma.len(), |i, j| sigma[i] * sigma[j] * c.get(i, j)))
}

/// Lines held at 0 or 1 instead of modelled.
///
/// A line is fixed when its proportion is the same exact 0 or 1 in every
/// training year and it either belongs to the unbroken run of such lines at
/// the start or end of a coastal line system, or is listed in `fixable`.
/// Returns the fixed value per line.
pub fn detect_fixed_lines<F: Scalar>(props: &[Vec<F>], kind: GeometryKind, fixable: &[usize]) -> Vec<Option<bool>> {
    let n = props.first().map_or(0, Vec::len);
    let constant = |i: usize| -> Option<bool> {
        if props.iter().all(|r| r[i] == F::zero()) {
            Some(false)
        } else if props.iter().all(|r| r[i] == F::one()) {
            Some(true)
        } else {
            None
        }
    };
    let mut fixed = vec![None; n];
    if props.is_empty() {
        return fixed;
    }
    if kind == GeometryKind::Coastal {
        for i in 0..n {
            match constant(i) {
                Some(v) => fixed[i] = Some(v),
                None => break,
            }
        }
        for i in (0..n).rev() {
            match constant(i) {
                Some(v) => fixed[i] = Some(v),
                None => break,
            }
        }
    }
    for &i in fixable {
        if i < n {
            if let Some(v) = constant(i) {
                fixed[i] = Some(v);
            }
        }
    }
    fixed
}
