//! Acceptance checks, one pass/fail line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Context, Result};
use icecontour::geometry::{
    build_region_geometry, contour_from_lengths, discretization_error, proportion_from_field, rasterize, GeometryKind,
    Line, LineLayout, Point, RegionGeometry, Span,
};
use icecontour::grid::{area_weights, CellLabel, CellMask, Field, GridSpec, Scope, Stamp};
use icecontour::linalg::Cholesky;
use icecontour::mixture::{component_probability, fit_weight, EmConfig, TrainingTriple};
use icecontour::model::{build_covariance, fit_posterior, ModelConfig, PriorSpec};
use icecontour::reference::{fit_persistence, predict_persistence, ICE_THRESHOLD};
use icecontour::shift::{contour_shift, LengthSeries};
use icecontour::stats::sigma_for_mass;
use icecontour::verify::brier;
use icecontour::BinaryField;
use icecontour_pipeline::config::{ExperimentConfig, Method};
use icecontour_pipeline::scenario::{LandBlob, SyntheticScenario};
use icecontour_pipeline::{run, Command, Options};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome>;

fn verdict(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, Check); 10] = [
        (1, "prior sd closed form", c1_closed_form),
        (2, "geometry oracle and round trip", c2_geometry),
        (3, "discretization error", c3_discretization),
        (4, "MCMC correctness", c4_mcmc),
        (5, "EM weight", c5_em),
        (6, "verification identities", c6_verification),
        (7, "calibration on an over-confident biased ensemble", c7_calibration),
        (8, "contour shifting", c8_shift),
        (9, "damped persistence", c9_persistence),
        (10, "end-to-end determinism", c10_determinism),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {n:>2} {}: {name}; {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

// 1 -------------------------------------------------------------------------

fn c1_closed_form() -> Result<Outcome> {
    let z = Normal::new(0.0, 1.0)?.inverse_cdf(0.995);
    let s: f64 = sigma_for_mass(-1.0, 1.0, 0.99)?;
    let oracle = 1.0 / z;
    let cfg = ModelConfig { delta1: Some(0.01), delta2: Some(0.99), ..Default::default() };
    let beta = cfg.sigma_upper();
    let beta_oracle = 99f64.ln() / z;
    let pass = (s - 0.388227).abs() <= 1e-5
        && (s - oracle).abs() <= 1e-9
        && (beta - 1.78394).abs() <= 1e-4
        && (beta - beta_oracle).abs() <= 1e-9;
    verdict(pass, format!("sigma={s:.7} (oracle {oracle:.7}, tol 1e-5), beta={beta:.6} (oracle {beta_oracle:.6}, tol 1e-4)"))
}

// 2 -------------------------------------------------------------------------

fn c2_geometry() -> Result<Outcome> {
    let line = Line::from_spans(Point::new(0.0, 0.0), 0.0, vec![Span { start: 0.0, end: 4.0 }, Span { start: 6.0, end: 12.0 }])?;
    let hand = line.length_from_proportion(0.5)?;
    let mut worst = 0.0f64;
    let mut lines = 0usize;
    for k in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
        let blobs = (0..rng.random_range(0..4))
            .map(|_| {
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let d = rng.random_range(90.0..180.0);
                LandBlob { center: [205.0 + d * a.cos(), 205.0 + d * a.sin()], radius_km: rng.random_range(15.0..45.0) }
            })
            .collect();
        let scn = SyntheticScenario { nrows: 40, ncols: 40, cell_km: 10.0, n_lines: 30, land: blobs, ..Default::default() };
        let mask = scn.mask();
        let geom = build_region_geometry(&mask, 0, &scn.region_config().line_layout())?;
        let phases: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let amps: Vec<f64> = (1..=4).map(|j| normal(&mut rng) * 0.6 / j as f64).collect();
        let base = rng.random_range(-0.5..0.8);
        let lengths: Vec<f64> = geom
            .angles()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let x = base + (1..=4).map(|j| amps[j - 1] * (j as f64 * a + phases[j - 1]).cos()).sum::<f64>();
                geom.line(i).length_from_proportion(1.0 / (1.0 + (-x).exp()))
            })
            .collect::<icecontour::Result<_>>()?;
        let field0 = rasterize(&contour_from_lengths(&geom, &lengths)?, &mask, Scope::Region(0));
        let pi1 = proportion_from_field(&geom, &field0)?;
        let l1: Vec<f64> = pi1.iter().enumerate().map(|(i, &p)| geom.line(i).length_from_proportion(p)).collect::<icecontour::Result<_>>()?;
        let field1 = rasterize(&contour_from_lengths(&geom, &l1)?, &mask, Scope::Region(0));
        let pi2 = proportion_from_field(&geom, &field1)?;
        for i in 0..geom.n_lines() {
            let l = geom.line(i);
            let step = l.pieces().iter().map(|p| p.end - p.start).fold(0.0, f64::max);
            worst = worst.max((pi2[i] - pi1[i]).abs() * l.ocean_length() / step);
            lines += 1;
        }
    }
    verdict(
        hand == 7.0 && worst <= 1.0 + 1e-9,
        format!("hand instance length {hand}; worst coverage change {worst:.3} sampling steps over {lines} lines (limit 1)"),
    )
}

// 3 -------------------------------------------------------------------------

fn c3_discretization() -> Result<Outcome> {
    let n = 120;
    let cell = 25.0;
    let grid = GridSpec::square(n, n, cell)?;
    let c = n as f64 * cell / 2.0;
    let labels: Vec<CellLabel> = (0..grid.len())
        .map(|i| {
            let [x, y] = grid.center(i);
            if (x - c).hypot(y - c) <= 55.0 * cell {
                CellLabel::Ocean
            } else {
                CellLabel::Land
            }
        })
        .collect();
    let regions = labels.iter().map(|l| (*l == CellLabel::Ocean).then_some(0)).collect();
    let mask = CellMask::new(grid.clone(), labels, regions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fields: Vec<BinaryField> = (0..20)
        .map(|_| {
            let terms: Vec<(f64, f64)> =
                (1..=6).map(|k| (normal(&mut rng) * 0.15 / k as f64, rng.random_range(0.0..std::f64::consts::TAU))).collect();
            let r0 = 40.0 * cell * rng.random_range(0.85..1.15);
            Field::from_mask(&mask, Stamp::default(), |i| {
                let [x, y] = grid.center(i);
                let a = (y - c).atan2(x - c);
                let r = r0 * terms.iter().enumerate().map(|(k, (amp, ph))| amp * ((k + 1) as f64 * a + ph).cos()).sum::<f64>().exp();
                (x - c).hypot(y - c) <= r
            })
        })
        .collect();
    let counts = [45usize, 90, 180, 360];
    let geoms = counts
        .iter()
        .map(|&k| build_region_geometry(&mask, 0, &LineLayout::Radial { center: Point::new(c, c), n_lines: k }))
        .collect::<icecontour::Result<Vec<_>>>()?;
    let errs = discretization_error(&fields, &mask, &geoms)?;
    let at90 = errs[1];
    let nonincreasing = errs.windows(2).all(|w| w[1] <= w[0] + 0.002);
    let shown: Vec<String> = counts.iter().zip(&errs).map(|(k, e)| format!("N={k}: {:.2}%", 100.0 * e)).collect();
    verdict(at90 <= 0.03 && nonincreasing, format!("{} (limit 3% at N=90, noise 0.2%)", shown.join(", ")))
}

// 4 -------------------------------------------------------------------------

fn index_geometry(n: usize) -> Result<RegionGeometry<f64>> {
    let lines = (0..n)
        .map(|i| Line::from_spans(Point::new(i as f64, 0.0), std::f64::consts::FRAC_PI_2, vec![Span { start: 0.0, end: 10.0 }]))
        .collect::<icecontour::Result<_>>()?;
    Ok(RegionGeometry::new(0, GeometryKind::Coastal, lines, 1.0)?)
}

fn draw_years(mu: &[f64], sigma: &[f64], kappa: f64, geom: &RegionGeometry<f64>, p: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let chol = Cholesky::new(&build_covariance(sigma, kappa, geom)?).ok_or_else(|| anyhow!("covariance not positive definite"))?;
    Ok((0..p)
        .map(|_| {
            let z: Vec<f64> = (0..mu.len()).map(|_| normal(rng)).collect();
            chol.mul_lower(&z).iter().zip(mu).map(|(a, b)| a + b).collect()
        })
        .collect())
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> =
        a.iter().enumerate().map(|(i, r)| r.iter().copied().chain((0..n).map(|j| f64::from(u8::from(i == j)))).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).expect("nonempty");
        m.swap(col, piv);
        let d = m[col][col];
        m[col].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                m[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn c4_mcmc() -> Result<Outcome> {
    let n = 40;
    let p = 40;
    let geom = index_geometry(n)?;
    let cfg = ModelConfig { store_chains: false, ..Default::default() };
    let sig_hi = cfg.sigma_upper();
    let results = (0..20u64)
        .into_par_iter()
        .map(|rep| -> Result<(usize, usize)> {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + rep);
            let mu0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let lambda0 = vec![0.25; n];
            let mu: Vec<f64> = mu0.iter().map(|m| m + 0.5 * normal(&mut rng)).collect();
            let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..1.0)).collect();
            let kappa = rng.random_range(1.0..5.0);
            let tilde = draw_years(&mu, &sigma, kappa, &geom, p, &mut rng)?;
            let prior = PriorSpec { mu0, lambda0, sigma_bounds: (cfg.sigma_lower, sig_hi), kappa_bounds: (cfg.kappa_lower, cfg.kappa_upper) };
            let post = fit_posterior(&tilde, &vec![None; n], &prior, &geom, &cfg, 4000 + rep)?;
            let within = |m: f64, sd: f64, truth: f64| usize::from((m - truth).abs() <= 3.0 * sd);
            let mut hit = within(post.kappa_mean, post.kappa_sd, kappa);
            for i in 0..n {
                hit += within(post.mu_mean[i], post.mu_sd[i], mu[i]);
                hit += within(post.sigma_mean[i], post.sigma_sd[i], sigma[i]);
            }
            Ok((hit, 2 * n + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    let (hit, total) = results.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let coverage = hit as f64 / total as f64;

    // conjugate case: sigma and kappa pinned by narrow supports, so mu is
    // normal with precision P C^-1 + Lambda0^-1
    let m = 3;
    let g3 = index_geometry(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let sigma = vec![0.6, 0.8, 0.5];
    let kappa = 1.5;
    let mu0 = vec![0.2, -0.3, 0.5];
    let lambda0 = vec![0.09, 0.16, 0.04];
    let tilde = draw_years(&[0.4, -0.1, 0.9], &sigma, kappa, &g3, 6, &mut rng)?;
    let cfg3 = ModelConfig { iterations: 105_000, burn_in: 5_000, store_chains: true, ..Default::default() };
    let mut worst_z = 0.0f64;
    let mut worst_sd = 0.0f64;
    // joint conjugate case over three correlated lines with known sigma and kappa
    let cinv = invert(&(0..m).map(|a| (0..m).map(|b| sigma[a] * sigma[b] * (-(a.abs_diff(b) as f64) / kappa).exp()).collect()).collect::<Vec<_>>());
    let p3 = tilde.len() as f64;
    let prec: Vec<Vec<f64>> = (0..m)
        .map(|a| (0..m).map(|b| p3 * cinv[a][b] + if a == b { 1.0 / lambda0[a] } else { 0.0 }).collect())
        .collect();
    let cov = invert(&prec);
    let sums: Vec<f64> = (0..m).map(|a| tilde.iter().map(|r| r[a]).sum()).collect();
    let rhs: Vec<f64> = (0..m).map(|a| (0..m).map(|b| cinv[a][b] * sums[b]).sum::<f64>() + mu0[a] / lambda0[a]).collect();
    let joint_mean: Vec<f64> = (0..m).map(|a| (0..m).map(|b| cov[a][b] * rhs[b]).sum()).collect();
    let joint = joint_conjugate(&tilde, &sigma, kappa, &mu0, &lambda0, &g3, &cfg3)?;
    for a in 0..m {
        worst_z = worst_z.max((joint.0[a] - joint_mean[a]).abs() / joint.2[a]);
        worst_sd = worst_sd.max((joint.1[a] / cov[a][a].sqrt() - 1.0).abs());
    }
    verdict(
        coverage >= 0.95 && worst_z <= 4.0 && worst_sd <= 0.1,
        format!(
            "coverage {:.1}% of {total} parameters (limit 95%); conjugate worst |mean error| {worst_z:.2} MC SE (limit 4), worst sd ratio error {:.1}% (limit 10%)",
            100.0 * coverage,
            100.0 * worst_sd
        ),
    )
}

/// Standard error of a chain mean by non-overlapping batch means.
fn batch_se(chain: &[f64], batches: usize) -> f64 {
    let len = chain.len() / batches;
    let means: Vec<f64> = (0..batches).map(|b| chain[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Samples `mu` with `sigma` and `kappa` held fixed. Supports are shared by
/// all lines, so each line is rescaled to unit sigma first.
fn joint_conjugate(
    tilde: &[Vec<f64>],
    sigma: &[f64],
    kappa: f64,
    mu0: &[f64],
    lambda0: &[f64],
    geom: &RegionGeometry<f64>,
    cfg: &ModelConfig,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    // divide line a by sigma_a: unit sigma for every line, prior rescaled
    let rows: Vec<Vec<f64>> = tilde.iter().map(|r| r.iter().zip(sigma).map(|(x, s)| x / s).collect()).collect();
    let pin = 1e-7;
    let prior = PriorSpec {
        mu0: mu0.iter().zip(sigma).map(|(m, s)| m / s).collect(),
        lambda0: lambda0.iter().zip(sigma).map(|(l, s)| l / (s * s)).collect(),
        sigma_bounds: (1.0 - pin, 1.0 + pin),
        kappa_bounds: (kappa * (1.0 - pin), kappa * (1.0 + pin)),
    };
    let post = fit_posterior(&rows, &vec![None; sigma.len()], &prior, geom, cfg, 77)?;
    let chains = post.chains.as_ref().context("chains kept")?;
    let mean = post.mu_mean.iter().zip(sigma).map(|(m, s)| m * s).collect();
    let sd = post.mu_sd.iter().zip(sigma).map(|(d, s)| d * s).collect();
    let se = chains.mu.iter().zip(sigma).map(|(c, s)| batch_se(&c[cfg.burn_in..], 50) * s).collect();
    Ok((mean, sd, se))
}

// 5 -------------------------------------------------------------------------

fn oracle_ll(t: &[TrainingTriple<f64>], w: f64) -> f64 {
    t.iter().map(|x| x.area * (w * x.gp + (1.0 - w) * x.gc).ln()).sum()
}

fn c5_em() -> Result<Outcome> {
    let em = EmConfig::default();
    let mut worst_drop = 0.0f64;
    let mut worst_grid = 0.0f64;
    for k in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + k);
        let n = rng.random_range(5..400);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let triples: Vec<TrainingTriple<f64>> = raw
            .iter()
            .map(|a| {
                let o = rng.random_bool(0.5);
                TrainingTriple {
                    observed: o,
                    gp: component_probability(o, rng.random_range(0.01..0.99)),
                    gc: component_probability(o, rng.random_range(0.01..0.99)),
                    area: a / total,
                }
            })
            .collect();
        let fit = fit_weight(&triples, &em)?;
        for w in fit.log_likelihood.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        let best = (0..=1000).map(|j| j as f64 / 1000.0).max_by(|a, b| oracle_ll(&triples, *a).total_cmp(&oracle_ll(&triples, *b))).expect("grid");
        worst_grid = worst_grid.max((fit.w - best).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let n = 10_000;
    let synth: Vec<TrainingTriple<f64>> = (0..n)
        .map(|_| {
            let (pp, pc): (f64, f64) = (rng.random(), rng.random());
            let from_contour = rng.random_bool(0.7);
            let o = rng.random_bool(if from_contour { pp } else { pc });
            TrainingTriple { observed: o, gp: component_probability(o, pp), gc: component_probability(o, pc), area: 1.0 / n as f64 }
        })
        .collect();
    let w = fit_weight(&synth, &em)?.w;
    verdict(
        worst_drop <= 1e-12 && worst_grid <= 1e-3 + 1e-12 && (w - 0.7).abs() <= 0.05,
        format!(
            "worst log-likelihood decrease {worst_drop:.1e} (slack 1e-12); worst |w - grid argmax| {worst_grid:.4} (limit 0.001); w*=0.7 recovered as {w:.4} (limit 0.05)"
        ),
    )
}

// 6 -------------------------------------------------------------------------

fn c6_verification() -> Result<Outcome> {
    let mut worst_half = 0.0f64;
    let mut worst_comp = 0.0f64;
    let mut worst_sum = 0.0f64;
    for k in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + k);
        let grid = GridSpec::square(16, 16, 25.0)?;
        let labels: Vec<CellLabel> =
            (0..grid.len()).map(|_| if rng.random_bool(0.15) { CellLabel::Land } else { CellLabel::Ocean }).collect();
        let regions = labels.iter().map(|l| (*l == CellLabel::Ocean).then_some(0)).collect();
        let areas: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(200.0..800.0)).collect();
        let mask = CellMask::with_areas(grid.clone(), labels, regions, areas.clone())?;
        let weights = area_weights::<f64>(&mask, Scope::Global)?;
        let obs: BinaryField = Field::from_mask(&mask, Stamp::default(), |_| rng.random_bool(0.4));
        let f: Field<f64> = Field::from_mask(&mask, Stamp::default(), |_| rng.random::<f64>());
        let half: Field<f64> = Field::from_mask(&mask, Stamp::default(), |_| 0.5);
        worst_half = worst_half.max((brier(&half, &obs, &weights)? - 0.25).abs());
        let b = brier(&f, &obs, &weights)?;
        worst_comp = worst_comp.max((brier(&f.map(|v| 1.0 - v), &obs.map(|o| !o), &weights)? - b).abs());
        let (mut num, mut den) = (0.0, 0.0);
        for r in 0..16 {
            for c in 0..16 {
                let i = grid.index(r, c);
                if let (Some(p), Some(o)) = (f.values[i], obs.values[i]) {
                    num += areas[i] * (p - f64::from(u8::from(o))).powi(2);
                    den += areas[i];
                }
            }
        }
        worst_sum = worst_sum.max((b - num / den).abs());
    }
    verdict(
        worst_half <= 1e-15 && worst_comp <= 1e-15 && worst_sum <= 1e-14,
        format!("|brier(0.5) - 0.25| {worst_half:.1e}; complement {worst_comp:.1e}; double sum {worst_sum:.1e} (limit 1e-14)"),
    )
}

// 7 -------------------------------------------------------------------------

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_rows(path: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().context("empty csv")?.split(',').collect();
    Ok(lines.map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(str::to_string)).collect()).collect())
}

fn max_deviation(path: &Path) -> Result<f64> {
    let mut worst = 0.0f64;
    for r in read_rows(path)? {
        if r["count"] != "0" {
            let f: f64 = r["mean_forecast"].parse()?;
            let o: f64 = r["observed_freq"].parse()?;
            worst = worst.max((o - f).abs());
        }
    }
    Ok(worst)
}

fn write_config(dir: &Path, cfg: &serde_json::Value) -> Result<PathBuf> {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_vec_pretty(cfg)?)?;
    Ok(path)
}

fn c7_calibration() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let cfg = serde_json::json!({
        "months": [3, 6, 9, 12],
        "leads": [0.5],
        "forecast_years": [2012, 2013, 2014, 2015, 2016],
        "first_year": 2004,
        "climatology_years": 5,
        "weight_window": 3,
        "samples": 100,
        "seed": 7,
        "methods": ["mcf", "contour", "climatology", "ensemble"],
        "model": { "iterations": 10000, "burn_in": 2000, "store_chains": false },
        "scenario": { "first_year": 2004, "last_year": 2016, "ens_dispersion": 0.5, "ens_bias_km": 40.0 }
    });
    let path = write_config(dir.path(), &cfg)?;
    run(Command::All, &Options { config: path, ..Default::default() })?;
    let eval = dir.path().join("out/evaluate");
    let dev_mcf = max_deviation(&eval.join("reliability_mcf.csv"))?;
    let dev_ens = max_deviation(&eval.join("reliability_ensemble.csv"))?;
    let mut mean = BTreeMap::new();
    for r in read_rows(&eval.join("overall.csv"))? {
        mean.insert(r["method"].clone(), r["mean_brier"].parse::<f64>()?);
    }
    let get = |m: Method| mean.get(m.name()).copied().ok_or_else(|| anyhow!("no score for {m}"));
    let (mcf, contour, clim, ens) = (get(Method::Mcf)?, get(Method::Contour)?, get(Method::Climatology)?, get(Method::Ensemble)?);
    let bound = contour.min(clim) + 0.005;
    verdict(
        dev_mcf < dev_ens && mcf <= bound,
        format!(
            "max reliability deviation mcf {dev_mcf:.3} vs ensemble {dev_ens:.3}; mean Brier mcf {mcf:.4}, contour {contour:.4}, climatology {clim:.4}, ensemble {ens:.4} (bound {bound:.4})"
        ),
    )
}

// 8 -------------------------------------------------------------------------

fn c8_shift() -> Result<Outcome> {
    let scn = SyntheticScenario { nrows: 60, ncols: 60, land: Vec::new(), n_lines: 24, ..Default::default() };
    let mask = scn.mask();
    let geom = build_region_geometry(&mask, 0, &scn.region_config().line_layout())?;
    let n = geom.n_lines();
    let years: Vec<i32> = (1990..2010).collect();
    let target = 2010;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base: Vec<f64> = (0..n).map(|_| rng.random_range(350.0..450.0)).collect();
    let slope: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..2.0)).collect();
    let truth = |y: i32, i: usize| base[i] + slope[i] * f64::from(y - 1990);
    let mut obs = Vec::new();
    let mut ens = Vec::new();
    let mut same = Vec::new();
    for &y in &years {
        // the ensemble tracks the year-to-year variability with a small error of its own
        let shared: Vec<f64> = (0..n).map(|_| 15.0 * normal(&mut rng)).collect();
        let o: Vec<f64> = (0..n).map(|i| truth(y, i) + shared[i]).collect();
        ens.push(o.iter().map(|v| v + 10.0 + 0.5 * normal(&mut rng)).collect::<Vec<_>>());
        same.push(o.clone());
        obs.push(o);
    }
    let now: Vec<f64> = (0..n).map(|i| truth(target, i) + 10.0 + 20.0 * normal(&mut rng)).collect();
    let passthrough = vec![false; n];
    let biased = contour_shift(&LengthSeries::new(years.clone(), obs.clone(), ens)?, &geom, &now, target, &passthrough, 1.345)?;
    let err = (0..n).map(|i| (biased.lengths[i] - (now[i] - 10.0)).abs()).fold(0.0, f64::max);
    let unbiased = contour_shift(&LengthSeries::new(years, obs, same)?, &geom, &now, target, &passthrough, 1.345)?;
    let zero = (0..n).map(|i| unbiased.raw_shift(i).abs()).fold(0.0, f64::max);
    verdict(
        err <= 1.0 && zero <= 1e-9,
        format!("worst error of the +10 km correction {err:.3} km (limit 1 km); worst shift without bias {zero:.1e} km"),
    )
}

// 9 -------------------------------------------------------------------------

fn c9_persistence() -> Result<Outcome> {
    let grid = GridSpec::square(8, 8, 25.0)?;
    let mask = CellMask::all_ocean(grid.clone(), 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cells = grid.len();
    // per cell: init trend, target trend, sign of the coupling
    let params: Vec<(f64, f64, f64, f64, f64)> = (0..cells)
        .map(|_| {
            (
                rng.random_range(0.3..0.7),
                rng.random_range(-0.01..0.01),
                rng.random_range(0.05..0.9),
                rng.random_range(-0.01..0.01),
                if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            )
        })
        .collect();
    let (m, i) = (9u8, 7u8);
    let years: Vec<i32> = (2000..=2015).collect();
    let anomalies: Vec<Vec<f64>> = years.iter().map(|_| (0..cells).map(|_| 0.04 * normal(&mut rng)).collect()).collect();
    let init_at = |k: usize| -> Field<f64> {
        Field::from_mask(&mask, Stamp::new(years[k], i, None), |s| params[s].0 + params[s].1 * f64::from(years[k] - 2000) + anomalies[k][s])
    };
    let target_at = |k: usize| -> Field<f64> {
        Field::from_mask(&mask, Stamp::new(years[k], m, None), |s| {
            let (_, _, lm, sm, sign) = params[s];
            lm + sm * f64::from(years[k] - 2000) + sign * anomalies[k][s]
        })
    };
    let last = years.len() - 1;
    let target: Vec<_> = (0..last).map(|k| (years[k], target_at(k))).collect();
    let init: Vec<_> = (0..last).map(|k| (years[k], init_at(k))).collect();
    let fit = fit_persistence(&target, &init, m, i)?;
    let pred = predict_persistence(&fit, &init_at(last), years[last])?;
    let truth = target_at(last);
    let margin = truth.values.iter().flatten().map(|v| (v - ICE_THRESHOLD).abs()).fold(f64::INFINITY, f64::min);
    let mismatched = (0..cells).filter(|&s| pred.values[s] != truth.values[s].map(|v| v >= ICE_THRESHOLD)).count();
    let rho_ok = fit.cells.iter().zip(&params).all(|(c, p)| c.as_ref().is_some_and(|c| (c.rho - p.4).abs() <= 1e-9));

    let flat: Vec<_> = (0..last).map(|k| (years[k], Field::from_mask(&mask, Stamp::default(), |_| 0.6))).collect();
    let constant = fit_persistence(&target, &flat, m, i)?;
    let zero_rho = constant.cells.iter().all(|c| c.as_ref().is_some_and(|c| c.rho == 0.0));
    verdict(
        mismatched == 0 && rho_ok && zero_rho,
        format!(
            "{mismatched} of {cells} cells differ from the model truth (closest value {margin:.3} from the threshold); fitted rho = +-1: {rho_ok}; constant series gives rho 0: {zero_rho}"
        ),
    )
}

// 10 ------------------------------------------------------------------------

fn files(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d)? {
            let p = e?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root)?.to_path_buf(), std::fs::read(&p)?);
            }
        }
    }
    Ok(out)
}

fn c10_determinism() -> Result<Outcome> {
    let bundled = workspace_root().join("configs/synthetic-small.json");
    let mut cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(&bundled)?)?;
    ExperimentConfig::load(&bundled)?;
    cfg["data_dir"] = "data".into();
    cfg["out_dir"] = "out".into();
    let mut trees = Vec::new();
    let mut slowest = Duration::ZERO;
    for jobs in [None, Some(2)] {
        let dir = tempfile::tempdir()?;
        let path = write_config(dir.path(), &cfg)?;
        let t = Instant::now();
        run(Command::All, &Options { config: path, jobs, ..Default::default() })?;
        slowest = slowest.max(t.elapsed());
        trees.push(files(dir.path())?);
    }
    ensure!(!trees[0].is_empty(), "no outputs written");
    let differing: Vec<&PathBuf> = trees[0].iter().filter(|(k, v)| trees[1].get(*k) != Some(v)).map(|(k, _)| k).collect();
    let same_set = trees[0].len() == trees[1].len();
    verdict(
        differing.is_empty() && same_set && slowest < Duration::from_secs(300),
        format!(
            "{} files, {} differ between default and 2-thread runs; slowest run {:.1}s (limit 300s)",
            trees[0].len(),
            differing.len(),
            slowest.as_secs_f64()
        ),
    )
}
