use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use icecontour_pipeline::config::{parse_methods, parse_window_sweep, Method};
use icecontour_pipeline::{run, Command, Options};

#[derive(Parser)]
#[command(name = "icecontour", version, about = "Contour-model sea ice edge forecasting experiments")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base random seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated forecast methods.
    #[arg(long, global = true, value_parser = parse_methods)]
    methods: Option<Vec<Method>>,
    /// Also score the mixture for every weight window in A..B.
    #[arg(long, global = true, value_parser = parse_window_sweep)]
    window_sweep: Option<(usize, usize)>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Write a synthetic data set from the config's scenario.
    Simulate,
    /// Fit length trends and shift the ensemble-mean contour.
    FitShift,
    /// Fit the contour model posterior.
    FitContour,
    /// Sample contours and form contour-model probabilities.
    Generate,
    /// Fit mixture weights by EM.
    FitWeights,
    /// Write forecasts for every method.
    Forecast,
    /// Score forecasts and draw reliability diagrams.
    Evaluate,
    /// Run every stage in order.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::FitShift => Command::FitShift,
            Cmd::FitContour => Command::FitContour,
            Cmd::Generate => Command::Generate,
            Cmd::FitWeights => Command::FitWeights,
            Cmd::Forecast => Command::Forecast,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::All => Command::All,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ICECONTOUR_LOG", "info")).init();
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let Some(config) = cli.config else {
        report(command, &anyhow::anyhow!("--config is required"));
        return ExitCode::from(2);
    };
    let opts = Options {
        config,
        seed: cli.seed,
        jobs: cli.jobs,
        out: cli.out,
        methods: cli.methods,
        window_sweep: cli.window_sweep,
    };
    match run(command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(command, &e);
            ExitCode::FAILURE
        }
    }
}

fn report(command: Command, e: &anyhow::Error) {
    let report = serde_json::json!({
        "command": command.name(),
        "error": e.to_string(),
        "causes": e.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    eprintln!("{report}");
}
