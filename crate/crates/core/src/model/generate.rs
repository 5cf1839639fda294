use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::ContourPosterior;
use crate::error::{Error, Result};
use crate::geometry::{contour_from_lengths, rasterize, snap_to_boundary, Contour, RegionGeometry};
use crate::grid::{CellMask, Field, ProbabilityField, Scope, Stamp};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;
use crate::stats::ilogit;

fn covariance_factor<F: Scalar>(post: &ContourPosterior<F>) -> Result<Cholesky<F>> {
    let c = post.kernel.correlation(&post.free, post.kappa_mean);
    let s = &post.sigma_mean;
    let cov = Matrix::from_fn(post.free.len(), |a, b| s[a] * s[b] * c.get(a, b));
    Cholesky::with_jitter(&cov, F::lit(1e-10)).ok_or_else(|| Error::Fit {
        region: post.region,
        reason: "posterior-mean covariance is not positive definite".into(),
    })
}

fn expand<F: Scalar>(post: &ContourPosterior<F>, free_logits: &[F]) -> Vec<F> {
    let mut out: Vec<F> = post.fixed.iter().map(|f| if *f == Some(true) { F::one() } else { F::zero() }).collect();
    for (a, &i) in post.free.iter().enumerate() {
        out[i] = ilogit(free_logits[a]);
    }
    out
}

fn draw<F: Scalar>(post: &ContourPosterior<F>, chol: Option<&Cholesky<F>>, seed: u64, index: usize) -> Vec<F> {
    let Some(chol) = chol else { return expand(post, &[]) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let z: Vec<F> = (0..post.free.len()).map(|_| F::lit(rng.sample::<f64, _>(StandardNormal))).collect();
    let dev = chol.mul_lower(&z);
    let logits: Vec<F> = post.mu_mean.iter().zip(&dev).map(|(&m, &d)| m + d).collect();
    expand(post, &logits)
}

/// Per-line proportions of `count` draws from `N(mu_hat, Sigma(sigma_hat,
/// kappa_hat))` mapped through the inverse logit, fixed lines reinstated.
/// Draw `k` uses its own generator stream, so results do not depend on
/// scheduling.
pub fn sample_proportions<F: Scalar>(post: &ContourPosterior<F>, count: usize, seed: u64) -> Result<Vec<Vec<F>>> {
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let chol = if post.is_constant() { None } else { Some(covariance_factor(post)?) };
    Ok((0..count).into_par_iter().map(|k| draw(post, chol.as_ref(), seed, k)).collect())
}

fn contour_for<F: Scalar>(geom: &RegionGeometry<F>, pis: &[F], snap: F) -> Result<Contour<F>> {
    let lengths =
        pis.iter().enumerate().map(|(i, &p)| geom.line(i).length_from_proportion(p)).collect::<Result<Vec<F>>>()?;
    let lengths = snap_to_boundary(geom, &lengths, snap);
    contour_from_lengths(geom, &lengths)
}

/// `count` repaired contours drawn from the posterior.
pub fn generate_contours<F: Scalar>(
    post: &ContourPosterior<F>,
    geom: &RegionGeometry<F>,
    count: usize,
    seed: u64,
    snap: F,
) -> Result<Vec<Contour<F>>> {
    if geom.n_lines() != post.n_lines {
        return Err(Error::structural(format!("posterior has {} lines, geometry {}", post.n_lines, geom.n_lines())));
    }
    let draws = sample_proportions(post, count, seed)?;
    draws
        .par_iter()
        .enumerate()
        .map(|(index, pis)| contour_for(geom, pis, snap).map_err(|e| Error::Sample { index, source: Box::new(e) }))
        .collect()
}

/// Contour at the posterior mean `mu_hat`.
pub fn mean_contour<F: Scalar>(post: &ContourPosterior<F>, geom: &RegionGeometry<F>, snap: F) -> Result<Contour<F>> {
    let pis = expand(post, &post.mu_mean);
    contour_for(geom, &pis, snap)
}

/// Fraction of contours whose rasterization covers each in-scope ocean
/// cell; other ocean cells are 0 and land is unscored.
pub fn contour_probability<F: Scalar>(
    contours: &[Contour<F>],
    mask: &CellMask,
    scope: Scope,
) -> Result<ProbabilityField<F>> {
    if contours.is_empty() {
        return Err(Error::domain("need at least one contour"));
    }
    let counts = contours
        .par_iter()
        .map(|c| rasterize(c, mask, scope).values.iter().map(|v| usize::from(*v == Some(true))).collect::<Vec<_>>())
        .reduce(
            || vec![0usize; mask.grid().len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let total = F::from_usize_lossy(contours.len());
    let values = (0..mask.grid().len())
        .map(|i| mask.is_ocean(i).then(|| F::from_usize_lossy(counts[i]) / total))
        .collect();
    Ok(Field { grid: mask.grid().clone(), stamp: Stamp::default(), values })
}
