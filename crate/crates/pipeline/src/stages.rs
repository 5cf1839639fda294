//! Pipeline stages. Each stage reads documented files, writes its own
//! outputs atomically, and is deterministic for a given seed.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use icecontour::geometry::{build_region_geometry, proportion_from_field, RegionGeometry};
use icecontour::grid::{area_weights, ensemble_probability, AreaWeights, CellMask, Field, Scope, Stamp};
use icecontour::io::{read_binary, read_float, read_mask, write_atomic, write_binary, write_float, Kind};
use icecontour::mixture::{climatology, fit_weight, mcf_binary, mcf_probability, training_triples, write_weight_table, MixtureWeight, WeightRow};
use icecontour::model::{
    build_prior, contour_probability, detect_fixed_lines, export_traces, fit_posterior, generate_contours, read_summary,
    write_summary, ContourPosterior,
};
use icecontour::reference::{climatology_binary, ensemble_binary, fit_persistence, init_year, predict_persistence};
use icecontour::shift::{contour_shift, write_length_table, LengthSeries, ShiftedForecast};
use icecontour::stats::logit_clamped;
use icecontour::verify::{
    brier, reliability, reliability_svg, write_summaries, write_window_sweep, ReliabilityBins, ScoreTable, WindowRow,
};
use icecontour::{BinaryField, ConcentrationField, ProbabilityField};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, RegionConfig};
use crate::layout::{DataLayout, OutLayout, StageDir};
use crate::seeds::{self, Stage};

/// Mask, regions and traced geometry shared by every stage.
pub struct Inputs {
    pub mask: CellMask,
    pub regions: Vec<RegionConfig>,
    pub geoms: Vec<RegionGeometry<f64>>,
    pub weights: AreaWeights<f64>,
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig, data: &DataLayout) -> Result<Inputs> {
        let mask_path = data.mask();
        let mask = read_mask(&mask_path).with_context(|| format!("cannot read mask {}", mask_path.display()))?;
        let regions_path = data.root.join(&cfg.regions);
        let text = std::fs::read_to_string(&regions_path)
            .with_context(|| format!("cannot read region config {}", regions_path.display()))?;
        let regions: Vec<RegionConfig> = serde_json::from_str(&text)
            .with_context(|| format!("invalid region config {}", regions_path.display()))?;
        if regions.is_empty() {
            bail!("region config {} lists no regions", regions_path.display());
        }
        let geoms = regions
            .iter()
            .map(|r| build_region_geometry(&mask, r.id, &r.line_layout()))
            .collect::<icecontour::Result<Vec<_>>>()?;
        let weights = area_weights(&mask, Scope::Global)?;
        Ok(Inputs { mask, regions, geoms, weights })
    }
}

/// A run: configuration plus resolved directories and CLI overrides.
pub struct Run {
    pub cfg: ExperimentConfig,
    pub data: DataLayout,
    pub out: OutLayout,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub window_sweep: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Job {
    pub year: i32,
    pub month: u8,
    pub lead: f64,
}

fn read_obs(data: &DataLayout, year: i32, month: u8) -> Result<BinaryField> {
    let p = data.obs(year, month);
    read_binary(&p).with_context(|| format!("missing or invalid observation {}", p.display()))
}

fn read_conc(data: &DataLayout, year: i32, month: u8) -> Result<ConcentrationField> {
    let p = data.conc(year, month);
    read_float(&p, Kind::Concentration).with_context(|| format!("missing or invalid concentration {}", p.display()))
}

fn read_members(data: &DataLayout, year: i32, month: u8, lead: f64) -> Result<Vec<BinaryField>> {
    let paths = data.members(year, month, lead);
    if paths.is_empty() {
        bail!("no ensemble members in {}", data.ens_dir(year, month, lead).display());
    }
    paths
        .iter()
        .map(|p| read_binary(p).with_context(|| format!("invalid ensemble member {}", p.display())))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).with_context(|| format!("missing {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("invalid {}", path.display()))
}

fn lengths_of(geom: &RegionGeometry<f64>, field: &BinaryField) -> Result<Vec<f64>> {
    let pis = proportion_from_field(geom, field)?;
    Ok(pis.iter().enumerate().map(|(i, &p)| geom.line(i).length_from_proportion(p)).collect::<icecontour::Result<_>>()?)
}

fn ensemble_mean_lengths(geom: &RegionGeometry<f64>, members: &[BinaryField]) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; geom.n_lines()];
    for m in members {
        for (a, b) in sum.iter_mut().zip(lengths_of(geom, m)?) {
            *a += b;
        }
    }
    Ok(sum.into_iter().map(|s| s / members.len() as f64).collect())
}

#[derive(Serialize, Deserialize)]
struct WeightRecord {
    year: i32,
    month: u8,
    lead: f64,
    window: usize,
    w: f64,
    /// True when every training pair was degenerate and 0.5 was used.
    fallback: bool,
    fit: Option<MixtureWeight>,
}

impl Run {
    pub fn max_window(&self) -> usize {
        self.window_sweep.map_or(self.cfg.weight_window, |(_, b)| b.max(self.cfg.weight_window))
    }

    fn needs_contours(&self) -> bool {
        self.methods.iter().any(|m| m.needs_contours()) || self.window_sweep.is_some()
    }

    /// Forecast tuples for the configured months, leads and years.
    pub fn forecast_jobs(&self) -> Vec<Job> {
        let mut out = Vec::new();
        for &year in &self.cfg.forecast_years {
            for &month in &self.cfg.months {
                for &lead in &self.cfg.leads {
                    out.push(Job { year, month, lead });
                }
            }
        }
        out
    }

    /// Tuples needing a contour-model forecast: each forecast year and the
    /// weight-training years before it.
    pub fn contour_jobs(&self) -> Vec<Job> {
        let w = self.max_window() as i32;
        let years: BTreeSet<i32> = self.cfg.forecast_years.iter().flat_map(|&t| t - w..=t).collect();
        let mut out = Vec::new();
        for &year in &years {
            for &month in &self.cfg.months {
                for &lead in &self.cfg.leads {
                    out.push(Job { year, month, lead });
                }
            }
        }
        out
    }

    fn shift_path(&self, job: Job, region: u32) -> PathBuf {
        self.out.job(StageDir::Shift, job.year, job.month, job.lead).join(format!("region{region}.json"))
    }

    fn posterior_path(&self, job: Job, region: u32) -> PathBuf {
        self.out.job(StageDir::Contour, job.year, job.month, job.lead).join(format!("region{region}.json"))
    }

    fn contour_prob_path(&self, job: Job) -> PathBuf {
        self.out.job(StageDir::Generate, job.year, job.month, job.lead).join("contour_probability.json")
    }

    fn weight_path(&self, job: Job) -> PathBuf {
        self.out.job(StageDir::Weights, job.year, job.month, job.lead).join("weight.json")
    }

    fn forecast_path(&self, job: Job, method: Method) -> PathBuf {
        self.out.job(StageDir::Forecast, job.year, job.month, job.lead).join(format!("{}.json", method.name()))
    }

    /// Climatology from the `P` observed years before `year`.
    pub fn climatology(&self, year: i32, month: u8) -> Result<ProbabilityField> {
        Ok(climatology(&self.climatology_history(year, month)?)?)
    }

    fn climatology_history(&self, year: i32, month: u8) -> Result<Vec<BinaryField>> {
        let p = self.cfg.climatology_years as i32;
        (year - p..year).map(|y| read_obs(&self.data, y, month)).collect()
    }

    pub fn fit_shift(&self, inputs: &Inputs) -> Result<()> {
        if !self.needs_contours() {
            return Ok(());
        }
        let jobs: Vec<(Job, usize)> =
            self.contour_jobs().into_iter().flat_map(|j| (0..inputs.geoms.len()).map(move |r| (j, r))).collect();
        jobs.par_iter().try_for_each(|&(job, r)| -> Result<()> {
            let geom = &inputs.geoms[r];
            let years: Vec<i32> = (self.cfg.first_year..job.year).collect();
            let mut obs = Vec::with_capacity(years.len());
            let mut ens = Vec::with_capacity(years.len());
            let mut props = Vec::with_capacity(years.len());
            for &y in &years {
                let o = read_obs(&self.data, y, job.month)?;
                props.push(proportion_from_field(geom, &o)?);
                obs.push(lengths_of(geom, &o)?);
                ens.push(ensemble_mean_lengths(geom, &read_members(&self.data, y, job.month, job.lead)?)?);
            }
            let series = LengthSeries::new(years, obs, ens)?;
            let now = ensemble_mean_lengths(geom, &read_members(&self.data, job.year, job.month, job.lead)?)?;
            let passthrough: Vec<bool> = detect_fixed_lines(&props, geom.kind, &inputs.regions[r].fixable)
                .iter()
                .map(Option::is_some)
                .collect();
            let shifted = contour_shift(&series, geom, &now, job.year, &passthrough, self.cfg.huber_tuning)?;
            let path = self.shift_path(job, geom.region);
            write_json(&path, &shifted)?;
            write_length_table(&path.with_file_name(format!("region{}_lengths.csv", geom.region)), geom.region, &series)?;
            Ok(())
        })?;
        info!("fit-shift: {} region forecasts", jobs.len());
        Ok(())
    }

    pub fn fit_contour(&self, inputs: &Inputs) -> Result<()> {
        if !self.needs_contours() {
            return Ok(());
        }
        let jobs: Vec<(Job, usize)> =
            self.contour_jobs().into_iter().flat_map(|j| (0..inputs.geoms.len()).map(move |r| (j, r))).collect();
        let mut model = self.cfg.model.clone();
        model.store_chains = self.cfg.export_traces;
        jobs.par_iter().try_for_each(|&(job, r)| -> Result<()> {
            let geom = &inputs.geoms[r];
            let shifted: ShiftedForecast<f64> = read_json(&self.shift_path(job, geom.region))?;
            let prior = build_prior(&shifted, geom, &model)?;
            let history = self.climatology_history(job.year, job.month)?;
            let props = history.iter().map(|o| proportion_from_field(geom, o)).collect::<icecontour::Result<Vec<_>>>()?;
            let fixed = detect_fixed_lines(&props, geom.kind, &inputs.regions[r].fixable);
            let tilde: Vec<Vec<f64>> =
                props.iter().map(|row| row.iter().map(|&p| logit_clamped(p, model.eps)).collect()).collect();
            let seed = seeds::job(self.seed, Stage::FitContour, geom.region, job.year, job.month, job.lead);
            let post = fit_posterior(&tilde, &fixed, &prior, geom, &model, seed)?;
            let path = self.posterior_path(job, geom.region);
            write_summary(&post, &path)?;
            if self.cfg.export_traces && !post.is_constant() {
                export_traces(&post, &path.with_file_name(format!("region{}_traces", geom.region)))?;
            }
            Ok(())
        })?;
        info!("fit-contour: {} posteriors", jobs.len());
        Ok(())
    }

    pub fn generate(&self, inputs: &Inputs) -> Result<()> {
        if !self.needs_contours() {
            return Ok(());
        }
        let jobs = self.contour_jobs();
        jobs.par_iter().try_for_each(|&job| -> Result<()> {
            let mut per_region = Vec::with_capacity(inputs.geoms.len());
            for geom in &inputs.geoms {
                let post: ContourPosterior<f64> = read_summary(&self.posterior_path(job, geom.region))
                    .with_context(|| format!("missing posterior {}", self.posterior_path(job, geom.region).display()))?;
                let seed = seeds::job(self.seed, Stage::Generate, geom.region, job.year, job.month, job.lead);
                let contours = generate_contours(&post, geom, self.cfg.samples, seed, self.cfg.snap_km)?;
                per_region.push((geom.region, contour_probability(&contours, &inputs.mask, Scope::Region(geom.region))?));
            }
            let clim = self.climatology(job.year, job.month)?;
            let mask = &inputs.mask;
            let values = (0..mask.grid().len())
                .map(|i| {
                    if !mask.is_ocean(i) {
                        return None;
                    }
                    match mask.region(i).and_then(|r| per_region.iter().find(|(id, _)| *id == r)) {
                        Some((_, f)) => f.values[i],
                        None => clim.values[i],
                    }
                })
                .collect();
            let field = Field { grid: mask.grid().clone(), stamp: Stamp::new(job.year, job.month, Some(job.lead)), values };
            write_float(&self.contour_prob_path(job), Kind::Probability, &field)?;
            Ok(())
        })?;
        info!("generate: {} probability fields", jobs.len());
        Ok(())
    }

    fn read_contour_prob(&self, job: Job) -> Result<ProbabilityField> {
        let p = self.contour_prob_path(job);
        read_float(&p, Kind::Probability).with_context(|| format!("missing contour probability {}", p.display()))
    }

    /// EM weight for `job` from the `window` years before it.
    fn weight_for(&self, inputs: &Inputs, job: Job, window: usize) -> Result<WeightRecord> {
        let mut triples = Vec::new();
        for y in job.year - window as i32..job.year {
            let past = Job { year: y, ..job };
            let obs = read_obs(&self.data, y, job.month)?;
            let gp = self.read_contour_prob(past)?;
            let gc = self.climatology(y, job.month)?;
            triples.extend(training_triples(&obs, &gp, &gc, &inputs.weights)?);
        }
        let (w, fallback, fit) = match fit_weight(&triples, &self.cfg.em) {
            Ok(fit) => (fit.w, false, Some(fit)),
            Err(icecontour::Error::WeightUndefined) => {
                warn!("weight undefined for {job:?} (window {window}); using 0.5");
                (0.5, true, None)
            }
            Err(e) => return Err(e.into()),
        };
        Ok(WeightRecord { year: job.year, month: job.month, lead: job.lead, window, w, fallback, fit })
    }

    pub fn fit_weights(&self, inputs: &Inputs) -> Result<()> {
        if !self.methods.iter().any(|m| matches!(m, Method::Mcf | Method::McfBinary)) {
            return Ok(());
        }
        let jobs = self.forecast_jobs();
        let records = jobs
            .par_iter()
            .map(|&job| self.weight_for(inputs, job, self.cfg.weight_window))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(records.len());
        for (job, rec) in jobs.iter().zip(&records) {
            write_json(&self.weight_path(*job), rec)?;
            rows.push(WeightRow {
                year: rec.year,
                month: rec.month,
                lead: rec.lead,
                w: rec.w,
                n_triples: rec.fit.as_ref().map_or(0, |f| f.n_triples),
                iterations: rec.fit.as_ref().map_or(0, |f| f.iterations),
                log_likelihood: rec.fit.as_ref().and_then(|f| f.log_likelihood.last().copied()).unwrap_or(f64::NAN),
            });
        }
        write_weight_table(&self.out.stage(StageDir::Weights).join("weights.csv"), &rows)?;
        info!("fit-weights: {} weights", rows.len());
        Ok(())
    }

    fn persistence(&self, job: Job) -> Result<(BinaryField, icecontour::PersistenceFit)> {
        let i = ExperimentConfig::init_month(job.month, job.lead);
        let start = self.cfg.persistence_start();
        let first = if init_year(job.month, i, start) < start { start + 1 } else { start };
        let mut target = Vec::new();
        let mut init = Vec::new();
        for y in first..job.year {
            target.push((y, read_conc(&self.data, y, job.month)?));
            let yi = init_year(job.month, i, y);
            init.push((yi, read_conc(&self.data, yi, i)?));
        }
        let fit = fit_persistence(&target, &init, job.month, i)?;
        let now = read_conc(&self.data, init_year(job.month, i, job.year), i)?;
        Ok((predict_persistence(&fit, &now, job.year)?, fit))
    }

    pub fn forecast(&self) -> Result<()> {
        let jobs = self.forecast_jobs();
        jobs.par_iter().try_for_each(|&job| -> Result<()> {
            let stamp = Stamp::new(job.year, job.month, Some(job.lead));
            let dir = self.out.job(StageDir::Forecast, job.year, job.month, job.lead);
            let clim = self.climatology(job.year, job.month)?;
            let contour = if self.methods.iter().any(|m| m.needs_contours()) { Some(self.read_contour_prob(job)?) } else { None };
            let members = if self.methods.iter().any(|m| matches!(m, Method::Ensemble | Method::EnsembleBinary)) {
                read_members(&self.data, job.year, job.month, job.lead)?
            } else {
                Vec::new()
            };
            for &method in &self.methods {
                let path = self.forecast_path(job, method);
                match method {
                    Method::Mcf | Method::McfBinary => {
                        let rec: WeightRecord = read_json(&self.weight_path(job))?;
                        let gp = contour.as_ref().expect("contour probability loaded");
                        let p = mcf_probability(gp, &clim, rec.w)?.with_stamp(stamp);
                        if method == Method::Mcf {
                            write_float(&path, Kind::Probability, &p)?;
                        } else {
                            write_binary(&path, &mcf_binary(&p))?;
                        }
                    }
                    Method::Contour => {
                        write_float(&path, Kind::Probability, contour.as_ref().expect("contour probability loaded"))?
                    }
                    Method::ContourBinary => {
                        write_binary(&path, &mcf_binary(contour.as_ref().expect("contour probability loaded")))?
                    }
                    Method::Climatology => write_float(&path, Kind::Probability, &clim.clone().with_stamp(stamp))?,
                    Method::ClimatologyBinary => {
                        let b = climatology_binary(&self.climatology_history(job.year, job.month)?)?;
                        write_binary(&path, &b.with_stamp(stamp))?
                    }
                    Method::Ensemble => {
                        let p: ProbabilityField = ensemble_probability(&members)?;
                        write_float(&path, Kind::Probability, &p.with_stamp(stamp))?
                    }
                    Method::EnsembleBinary => write_binary(&path, &ensemble_binary(&members)?.with_stamp(stamp))?,
                    Method::Persistence => {
                        let (b, fit) = self.persistence(job)?;
                        write_binary(&path, &b.with_stamp(stamp))?;
                        for (name, field) in fit.coefficient_fields() {
                            write_float(&dir.join("persistence_fit").join(format!("{name}.json")), Kind::Real, &field)?;
                        }
                    }
                }
            }
            Ok(())
        })?;
        info!("forecast: {} tuples x {} methods", jobs.len(), self.methods.len());
        Ok(())
    }

    fn read_forecast(&self, job: Job, method: Method) -> Result<ProbabilityField> {
        let path = self.forecast_path(job, method);
        if method.is_binary() {
            Ok(read_binary(&path).with_context(|| format!("missing forecast {}", path.display()))?.to_probability())
        } else {
            read_float(&path, Kind::Probability).with_context(|| format!("missing forecast {}", path.display()))
        }
    }

    /// Scores every method on every tuple. Tuples with missing inputs are
    /// listed in `gaps.csv` and reported as an error after every table has
    /// been written.
    pub fn evaluate(&self, inputs: &Inputs) -> Result<ScoreTable> {
        let dir = self.out.stage(StageDir::Evaluate);
        let jobs = self.forecast_jobs();
        let mut table = ScoreTable::default();
        let mut gaps: Vec<String> = Vec::new();
        let mut pooled: Vec<(Method, Vec<(ProbabilityField, BinaryField)>)> = self.methods.iter().map(|m| (*m, Vec::new())).collect();
        for &job in &jobs {
            let obs = match read_obs(&self.data, job.year, job.month) {
                Ok(o) => o,
                Err(e) => {
                    gaps.push(format!("{},{},{},obs,{:#}", job.year, job.month, job.lead, e));
                    continue;
                }
            };
            for (method, pairs) in pooled.iter_mut() {
                match self.read_forecast(job, *method) {
                    Ok(f) => {
                        table.push(method.name(), job.month, job.lead, job.year, brier(&f, &obs, &inputs.weights)?);
                        pairs.push((f, obs.clone()));
                    }
                    Err(e) => gaps.push(format!("{},{},{},{},{:#}", job.year, job.month, job.lead, method, e)),
                }
            }
        }
        std::fs::create_dir_all(&dir)?;
        table.write_csv(&dir.join("scores.csv"))?;
        write_summaries(&dir.join("by_month.csv"), &table.by_month())?;
        write_summaries(&dir.join("by_season.csv"), &table.by_season())?;
        write_summaries(&dir.join("overall.csv"), &table.overall())?;
        let mut curves: Vec<(String, ReliabilityBins)> = Vec::new();
        for (method, pairs) in &pooled {
            if pairs.is_empty() {
                continue;
            }
            let refs: Vec<_> = pairs.iter().map(|(f, o)| (f, o)).collect();
            let bins = reliability(&refs, &inputs.weights, self.cfg.reliability_bins, self.cfg.reliability_weighting)?;
            bins.write_csv(&dir.join(format!("reliability_{}.csv", method.name())))?;
            curves.push((method.name().to_string(), bins));
        }
        let probabilistic: Vec<(&str, &ReliabilityBins)> = curves
            .iter()
            .filter(|(n, _)| n.parse::<Method>().is_ok_and(|m| !m.is_binary()))
            .map(|(n, b)| (n.as_str(), b))
            .collect();
        write_atomic(&dir.join("reliability.svg"), reliability_svg(&probabilistic).as_bytes())?;
        if let Some((a, b)) = self.window_sweep {
            let rows = self.window_sweep_rows(inputs, a, b)?;
            write_window_sweep(&dir.join("window_sweep.csv"), &rows)?;
        }
        let mut gap_text = String::from("year,month,lead,input,reason\n");
        for g in &gaps {
            gap_text.push_str(&g.replace('\n', " "));
            gap_text.push('\n');
        }
        write_atomic(&dir.join("gaps.csv"), gap_text.as_bytes())?;
        info!("evaluate: {} score rows, {} gaps", table.rows.len(), gaps.len());
        if !gaps.is_empty() {
            return Err(anyhow!("{} inputs missing for evaluation; see {}", gaps.len(), dir.join("gaps.csv").display()));
        }
        Ok(table)
    }

    /// Mean Brier score of the mixture forecasts for each training window.
    pub fn window_sweep_rows(&self, inputs: &Inputs, a: usize, b: usize) -> Result<Vec<WindowRow>> {
        let jobs = self.forecast_jobs();
        let mut rows = Vec::new();
        for window in a..=b {
            let scores = jobs
                .par_iter()
                .map(|&job| -> Result<(f64, f64)> {
                    let rec = self.weight_for(inputs, job, window)?;
                    let gp = self.read_contour_prob(job)?;
                    let gc = self.climatology(job.year, job.month)?;
                    let obs = read_obs(&self.data, job.year, job.month)?;
                    let p = mcf_probability(&gp, &gc, rec.w)?;
                    let pb = mcf_binary(&p).to_probability();
                    Ok((brier(&p, &obs, &inputs.weights)?, brier(&pb, &obs, &inputs.weights)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let n = scores.len() as f64;
            rows.push(WindowRow { window, method: Method::Mcf.name().into(), mean_brier: scores.iter().map(|s| s.0).sum::<f64>() / n });
            rows.push(WindowRow {
                window,
                method: Method::McfBinary.name().into(),
                mean_brier: scores.iter().map(|s| s.1).sum::<f64>() / n,
            });
        }
        Ok(rows)
    }

    /// Top-level record of what the run covered.
    pub fn write_manifest(&self, stages: &[&str]) -> Result<()> {
        #[derive(Serialize)]
        struct RunManifest<'a> {
            seed: u64,
            stages: &'a [&'a str],
            methods: Vec<&'static str>,
            months: &'a [u8],
            leads: &'a [f64],
            forecast_years: &'a [i32],
            contour_years: Vec<i32>,
            window_sweep: Option<(usize, usize)>,
        }
        let contour_years: BTreeSet<i32> = self.contour_jobs().iter().map(|j| j.year).collect();
        write_json(
            &self.out.manifest(),
            &RunManifest {
                seed: self.seed,
                stages,
                methods: self.methods.iter().map(|m| m.name()).collect(),
                months: &self.cfg.months,
                leads: &self.cfg.leads,
                forecast_years: &self.cfg.forecast_years,
                contour_years: contour_years.into_iter().collect(),
                window_sweep: self.window_sweep,
            },
        )
    }
}
