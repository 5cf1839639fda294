//! Synthetic sea-ice scenario: a radial ice pack drawn from the contour
//! model, with an imperfect ensemble forecast system around it.
//!
//! Truth logit proportions for year `y`, month `m` are
//! `mu_m + trend (y - first) + z`, where the anomaly `z ~ N(0, Sigma)` is
//! carried from month to month with coupling `phi`. An ensemble forecast
//! sees the signal `s = zeta^2 z + zeta sqrt(1 - zeta^2) e`, so that
//! `z - s ~ N(0, (1 - zeta^2) Sigma)` independently of `s`; members scatter
//! around `s` with spread `dispersion` times that error. With dispersion 1
//! the members and the truth are exchangeable.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use icecontour::geometry::{build_region_geometry, contour_from_lengths, rasterize, RegionGeometry};
use icecontour::grid::{CellLabel, CellMask, ConcentrationField, Field, GridSpec, Scope, Stamp};
use icecontour::io::{write_atomic, write_binary, write_float, write_mask, Kind};
use icecontour::linalg::{Cholesky, Matrix};
use icecontour::model::Kernel;
use icecontour::stats::ilogit;
use icecontour::BinaryField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, LayoutConfig, RegionConfig};
use crate::layout::DataLayout;
use crate::seeds::{derive, Stage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandBlob {
    /// Centre in km.
    pub center: [f64; 2],
    pub radius_km: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticScenario {
    pub nrows: usize,
    pub ncols: usize,
    pub cell_km: f64,
    pub first_year: i32,
    pub last_year: i32,
    pub n_lines: usize,
    pub land: Vec<LandBlob>,
    /// Annual-mean ice proportion along a line.
    pub mean_proportion: f64,
    /// Seasonal swing of the proportion, largest in March, smallest in September.
    pub seasonal_amplitude: f64,
    /// Logit-scale amplitude of the pack's non-circular shape.
    pub shape_amplitude: f64,
    /// Logit change per year.
    pub trend: f64,
    pub sigma: f64,
    /// Kernel range, radians.
    pub kappa: f64,
    /// Month-to-month anomaly coupling.
    pub month_coupling: f64,
    pub members: usize,
    /// Added to every member's edge length, km.
    pub ens_bias_km: f64,
    /// Member spread relative to the calibrated spread.
    pub ens_dispersion: f64,
    /// Fraction of the anomaly the ensemble captures at lead 0.5.
    pub ens_skill: f64,
    /// E-folding lead, months, of the captured fraction.
    pub skill_decay_months: f64,
    /// Expected open-water holes per observed field.
    pub polynya_rate: f64,
    /// Overrides the run seed when set.
    pub seed: Option<u64>,
}

impl Default for SyntheticScenario {
    fn default() -> Self {
        SyntheticScenario {
            nrows: 32,
            ncols: 32,
            cell_km: 25.0,
            first_year: 2005,
            last_year: 2016,
            n_lines: 24,
            land: vec![LandBlob { center: [640.0, 640.0], radius_km: 90.0 }],
            mean_proportion: 0.5,
            seasonal_amplitude: 0.15,
            shape_amplitude: 0.35,
            trend: -0.03,
            sigma: 0.35,
            kappa: 0.6,
            month_coupling: 0.8,
            members: 25,
            ens_bias_km: 0.0,
            ens_dispersion: 1.0,
            ens_skill: 0.7,
            skill_decay_months: 6.0,
            polynya_rate: 0.3,
            seed: None,
        }
    }
}

impl SyntheticScenario {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.nrows < 8 || self.ncols < 8 {
            v.push("grid must be at least 8 x 8".into());
        }
        if !(self.cell_km > 0.0) {
            v.push("cell_km must be positive".into());
        }
        if self.last_year < self.first_year {
            v.push("last_year before first_year".into());
        }
        if self.n_lines < 3 {
            v.push("n_lines must be at least 3".into());
        }
        let swing = self.seasonal_amplitude.abs();
        if !(self.mean_proportion - swing > 0.0 && self.mean_proportion + swing < 1.0) {
            v.push("mean_proportion +- seasonal_amplitude must stay inside (0, 1)".into());
        }
        if !(self.sigma > 0.0) || !(self.kappa > 0.0) {
            v.push("sigma and kappa must be positive".into());
        }
        if !(0.0..1.0).contains(&self.month_coupling) {
            v.push("month_coupling must lie in [0, 1)".into());
        }
        if self.members == 0 {
            v.push("members must be at least 1".into());
        }
        if !(self.ens_dispersion >= 0.0) {
            v.push("ens_dispersion must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.ens_skill) {
            v.push("ens_skill must lie in [0, 1]".into());
        }
        if !(self.skill_decay_months > 0.0) {
            v.push("skill_decay_months must be positive".into());
        }
        if !(self.polynya_rate >= 0.0) {
            v.push("polynya_rate must be non-negative".into());
        }
        let center = self.center();
        for b in &self.land {
            if (b.center[0] - center[0]).hypot(b.center[1] - center[1]) <= b.radius_km + self.cell_km {
                v.push(format!("land blob at {:?} covers the pack centre", b.center));
            }
        }
        v
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::square(self.nrows, self.ncols, self.cell_km).expect("validated grid")
    }

    /// Pack centre in km, at the middle of the centre cell.
    pub fn center(&self) -> [f64; 2] {
        [(self.ncols / 2) as f64 * self.cell_km + self.cell_km / 2.0, (self.nrows / 2) as f64 * self.cell_km + self.cell_km / 2.0]
    }

    pub fn mask(&self) -> CellMask {
        let grid = self.grid();
        let labels: Vec<CellLabel> = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.center(i);
                let land = self.land.iter().any(|b| (x - b.center[0]).hypot(y - b.center[1]) <= b.radius_km);
                if land {
                    CellLabel::Land
                } else {
                    CellLabel::Ocean
                }
            })
            .collect();
        let regions = labels.iter().map(|l| (*l == CellLabel::Ocean).then_some(0)).collect();
        CellMask::new(grid, labels, regions).expect("consistent mask")
    }

    pub fn region_config(&self) -> RegionConfig {
        RegionConfig { id: 0, layout: LayoutConfig::Radial { center: self.center(), n_lines: self.n_lines }, fixable: Vec::new() }
    }

    /// Mean logit proportion per line for a month.
    pub fn mu(&self, month: u8, angles: &[f64]) -> Vec<f64> {
        let season = (std::f64::consts::TAU * (f64::from(month) - 3.0) / 12.0).cos();
        let p = self.mean_proportion + self.seasonal_amplitude * season;
        let base = (p / (1.0 - p)).ln();
        angles
            .iter()
            .map(|a| base + self.shape_amplitude * ((a - 0.7).cos() + 0.4 * (2.0 * a + 0.3).sin()))
            .collect()
    }

    pub fn skill(&self, lead: f64) -> f64 {
        self.ens_skill * (-(lead - 0.5) / self.skill_decay_months).exp()
    }
}

/// Ground truth written next to the simulated data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: SyntheticScenario,
    pub seed: u64,
    pub angles: Vec<f64>,
    /// Mean logit proportion per line for each configured month.
    pub mu: BTreeMap<u8, Vec<f64>>,
    pub truth: Vec<LengthRecord>,
    pub ensemble_mean: Vec<LengthRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRecord {
    pub year: i32,
    pub month: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead: Option<f64>,
    /// Edge length per line, km.
    pub lengths: Vec<f64>,
    /// Logit proportion per line.
    pub logits: Vec<f64>,
}

struct Sampler {
    chol: Cholesky<f64>,
}

impl Sampler {
    fn new(scn: &SyntheticScenario, angles: &[f64]) -> Self {
        let lines: Vec<usize> = (0..angles.len()).collect();
        let c = Kernel::Angular(angles.to_vec()).correlation(&lines, scn.kappa);
        let cov = Matrix::from_fn(angles.len(), |i, j| scn.sigma * scn.sigma * c.get(i, j));
        Sampler { chol: Cholesky::with_jitter(&cov, 1e-10).expect("kernel covariance is positive definite") }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.chol.factor().n()).map(|_| rng.sample(StandardNormal)).collect();
        self.chol.mul_lower(&z)
    }
}

fn lengths_for(geom: &RegionGeometry<f64>, logits: &[f64], bias_km: f64) -> Vec<f64> {
    geom.lines
        .iter()
        .zip(logits)
        .map(|(line, &x)| {
            let len = line.length_from_proportion(ilogit(x)).expect("proportion in range");
            (len + bias_km).clamp(0.0, line.length())
        })
        .collect()
}

fn field_for(geom: &RegionGeometry<f64>, mask: &CellMask, lengths: &[f64], stamp: Stamp) -> anyhow::Result<BinaryField> {
    let contour = contour_from_lengths(geom, lengths)?;
    Ok(rasterize(&contour, mask, Scope::Region(geom.region)).with_stamp(stamp))
}

fn add_polynyas(field: &mut BinaryField, rate: f64, rng: &mut ChaCha8Rng) {
    let g = field.grid.clone();
    let ice: Vec<usize> = (0..field.len()).filter(|&i| field.values[i] == Some(true)).collect();
    if ice.is_empty() || rate <= 0.0 {
        return;
    }
    // Poisson count by inversion
    let (mut k, mut p, limit) = (0usize, 1.0f64, (-rate).exp());
    loop {
        p *= rng.random::<f64>();
        if p <= limit {
            break;
        }
        k += 1;
    }
    for _ in 0..k {
        let c = ice[rng.random_range(0..ice.len())];
        let (r, col) = g.row_col(c);
        let size = rng.random_range(1..=2usize);
        for dr in 0..size {
            for dc in 0..size {
                let (rr, cc) = (r + dr, col + dc);
                if rr < g.nrows && cc < g.ncols {
                    let i = g.index(rr, cc);
                    if field.values[i] == Some(true) {
                        field.values[i] = Some(false);
                    }
                }
            }
        }
    }
}

/// Concentration consistent with the binary field at the 0.15 threshold:
/// ice cells get `0.15 + 0.85 f`, open water `0.14 f`, where `f` is the ice
/// fraction among ocean cells in the surrounding 5 x 5 block.
pub fn concentration_from(field: &BinaryField) -> ConcentrationField<f64> {
    let g = &field.grid;
    let values = (0..field.len())
        .map(|i| {
            let own = field.values[i]?;
            let (r, c) = g.row_col(i);
            let (mut ice, mut all) = (0usize, 0usize);
            for rr in r.saturating_sub(2)..(r + 3).min(g.nrows) {
                for cc in c.saturating_sub(2)..(c + 3).min(g.ncols) {
                    if let Some(v) = field.values[g.index(rr, cc)] {
                        all += 1;
                        ice += usize::from(v);
                    }
                }
            }
            let f = ice as f64 / all as f64;
            Some(if own { 0.15 + 0.85 * f } else { 0.14 * f })
        })
        .collect();
    Field { grid: g.clone(), stamp: field.stamp, values }
}

/// Writes mask, regions, observations, concentrations, ensembles and the
/// ground-truth manifest for the scenario into `data`.
pub fn simulate(scn: &SyntheticScenario, cfg: &ExperimentConfig, data: &DataLayout, seed: u64) -> anyhow::Result<Manifest> {
    let problems = scn.violations();
    if !problems.is_empty() {
        anyhow::bail!("invalid scenario: {}", problems.join("; "));
    }
    let seed = scn.seed.unwrap_or(seed);
    std::fs::create_dir_all(&data.root).with_context(|| format!("cannot create {}", data.root.display()))?;
    let mask = scn.mask();
    let region = scn.region_config();
    let geom = build_region_geometry(&mask, 0, &region.line_layout())?;
    let angles = geom.angles();
    let sampler = Sampler::new(scn, &angles);
    let mu: BTreeMap<u8, Vec<f64>> = (1..=12).map(|m| (m, scn.mu(m, &angles))).collect();

    // truth anomalies, chained through every month of every year
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, Stage::Simulate, &[0]));
    let phi = scn.month_coupling;
    let mut z = sampler.draw(&mut rng);
    let mut anomalies: BTreeMap<(i32, u8), Vec<f64>> = BTreeMap::new();
    for y in scn.first_year..=scn.last_year {
        for m in 1..=12u8 {
            let e = sampler.draw(&mut rng);
            z = z.iter().zip(&e).map(|(a, b)| phi * a + (1.0 - phi * phi).sqrt() * b).collect();
            anomalies.insert((y, m), z.clone());
        }
    }
    let truth_logits = |y: i32, m: u8| -> Vec<f64> {
        let t = scn.trend * f64::from(y - scn.first_year);
        mu[&m].iter().zip(&anomalies[&(y, m)]).map(|(a, b)| a + t + b).collect()
    };

    write_mask(&data.mask(), &mask)?;
    let regions_json = serde_json::to_vec_pretty(&vec![region])?;
    write_atomic(&data.root.join(&cfg.regions), &regions_json)?;

    let jobs: Vec<(i32, u8)> = anomalies.keys().copied().collect();
    jobs.par_iter().try_for_each(|&(y, m)| -> anyhow::Result<()> {
        let logits = truth_logits(y, m);
        let lengths = lengths_for(&geom, &logits, 0.0);
        let mut field = field_for(&geom, &mask, &lengths, Stamp::new(y, m, None))?;
        let mut prng = ChaCha8Rng::seed_from_u64(derive(seed, Stage::Simulate, &[2, i64::from(y), i64::from(m)]));
        add_polynyas(&mut field, scn.polynya_rate, &mut prng);
        write_binary(&data.obs(y, m), &field)?;
        write_float(&data.conc(y, m), Kind::Concentration, &concentration_from(&field))?;
        Ok(())
    })?;

    let mut ens_jobs = Vec::new();
    for y in scn.first_year..=scn.last_year {
        for &m in &cfg.months {
            for &lead in &cfg.leads {
                ens_jobs.push((y, m, lead));
            }
        }
    }
    let ensemble_mean = ens_jobs
        .par_iter()
        .map(|&(y, m, lead)| -> anyhow::Result<LengthRecord> {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive(seed, Stage::Simulate, &[1, i64::from(y), i64::from(m), (lead * 2.0) as i64]));
            let zeta = scn.skill(lead);
            let spread = (1.0 - zeta * zeta).sqrt();
            let e = sampler.draw(&mut rng);
            let t = scn.trend * f64::from(y - scn.first_year);
            let signal: Vec<f64> = mu[&m]
                .iter()
                .zip(&anomalies[&(y, m)])
                .zip(&e)
                .map(|((a, z), e)| a + t + zeta * zeta * z + zeta * spread * e)
                .collect();
            let mut sum = vec![0.0; geom.n_lines()];
            for k in 0..scn.members {
                let u = sampler.draw(&mut rng);
                let member: Vec<f64> = signal.iter().zip(&u).map(|(s, u)| s + scn.ens_dispersion * spread * u).collect();
                let lengths = lengths_for(&geom, &member, scn.ens_bias_km);
                sum.iter_mut().zip(&lengths).for_each(|(a, b)| *a += b);
                let field = field_for(&geom, &mask, &lengths, Stamp::new(y, m, Some(lead)))?;
                write_binary(&data.member(y, m, lead, k), &field)?;
            }
            let n = scn.members as f64;
            Ok(LengthRecord { year: y, month: m, lead: Some(lead), lengths: sum.iter().map(|s| s / n).collect(), logits: signal })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let truth = cfg
        .months
        .iter()
        .flat_map(|&m| (scn.first_year..=scn.last_year).map(move |y| (y, m)))
        .map(|(y, m)| {
            let logits = truth_logits(y, m);
            LengthRecord { year: y, month: m, lead: None, lengths: lengths_for(&geom, &logits, 0.0), logits }
        })
        .collect();
    let manifest = Manifest {
        scenario: scn.clone(),
        seed,
        angles,
        mu: cfg.months.iter().map(|m| (*m, mu[m].clone())).collect(),
        truth,
        ensemble_mean,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(&data.manifest(), &bytes)?;
    Ok(manifest)
}

/// Reads a manifest written by [`simulate`].
pub fn read_manifest(path: &Path) -> anyhow::Result<Manifest> {
    let text = std::fs::read(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
    Ok(serde_json::from_slice(&text)?)
}
