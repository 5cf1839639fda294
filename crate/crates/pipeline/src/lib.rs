//! Orchestration for contour-model sea ice forecasting experiments: the
//! synthetic scenario generator, the staged pipeline and the `icecontour`
//! command line.

pub mod config;
pub mod layout;
pub mod scenario;
pub mod seeds;
pub mod stages;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use config::{ExperimentConfig, Method};
use layout::{DataLayout, OutLayout};
use stages::{Inputs, Run};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    FitShift,
    FitContour,
    Generate,
    FitWeights,
    Forecast,
    Evaluate,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::FitShift => "fit-shift",
            Command::FitContour => "fit-contour",
            Command::Generate => "generate",
            Command::FitWeights => "fit-weights",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::All => "all",
        }
    }
}

/// Command-line overrides of the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub methods: Option<Vec<Method>>,
    pub window_sweep: Option<(usize, usize)>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads and validates the configuration and applies the overrides.
pub fn prepare(opts: &Options) -> Result<Run> {
    let mut cfg = ExperimentConfig::load(&opts.config)?;
    if let Some(m) = &opts.methods {
        cfg.methods = m.clone();
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let mut problems = cfg.violations();
    if let Some((_, b)) = opts.window_sweep {
        if let Some(first) = cfg.first_contour_year(b) {
            let need = first - (cfg.climatology_years as i32).max(3);
            if need < cfg.first_year {
                problems.push(format!("window sweep up to {b} needs training data from {need}, before first_year {}", cfg.first_year));
            }
        }
    }
    if !problems.is_empty() {
        bail!("invalid config {}: {}", opts.config.display(), problems.join("; "));
    }
    let base = opts.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let data = DataLayout::new(resolve(&base, &cfg.data_dir));
    let out = OutLayout::new(match &opts.out {
        Some(o) => o.clone(),
        None => resolve(&base, &cfg.out_dir),
    });
    Ok(Run { seed: cfg.seed, methods: cfg.methods.clone(), window_sweep: opts.window_sweep, cfg, data, out })
}

/// Runs one command, or every stage in order for [`Command::All`].
pub fn run(cmd: Command, opts: &Options) -> Result<()> {
    let run = prepare(opts)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().context("cannot start worker threads")?;
    pool.install(|| execute(cmd, &run))
}

fn execute(cmd: Command, run: &Run) -> Result<()> {
    let stages: Vec<Command> = match cmd {
        Command::All => {
            let mut v = Vec::new();
            if run.cfg.scenario.is_some() {
                v.push(Command::Simulate);
            }
            v.extend([
                Command::FitShift,
                Command::FitContour,
                Command::Generate,
                Command::FitWeights,
                Command::Forecast,
                Command::Evaluate,
            ]);
            v
        }
        c => vec![c],
    };
    let mut inputs: Option<Inputs> = None;
    for &stage in &stages {
        log::info!("stage {}", stage.name());
        if stage == Command::Simulate {
            let scn = run.cfg.scenario.as_ref().context("simulate needs a scenario section in the config")?;
            scenario::simulate(scn, &run.cfg, &run.data, run.seed)?;
            inputs = None;
            continue;
        }
        if inputs.is_none() {
            inputs = Some(Inputs::load(&run.cfg, &run.data)?);
        }
        let inp = inputs.as_ref().expect("inputs loaded");
        match stage {
            Command::FitShift => run.fit_shift(inp)?,
            Command::FitContour => run.fit_contour(inp)?,
            Command::Generate => run.generate(inp)?,
            Command::FitWeights => run.fit_weights(inp)?,
            Command::Forecast => run.forecast()?,
            Command::Evaluate => {
                run.evaluate(inp)?;
            }
            Command::Simulate | Command::All => unreachable!(),
        }
    }
    let names: Vec<&str> = stages.iter().map(|s| s.name()).collect();
    run.write_manifest(&names)
}
