use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spikefilt::cli::{run, ExperimentConfig, Kind, Settings, OUT_ENV};
use spikefilt::Rule;

#[derive(Parser)]
#[command(name = "spikefilt", version, about = "Supervised spike-timing learning experiments for a deterministic LIF neuron")]
struct Cli {
    #[command(subcommand)]
    kind: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Current, PSP and reset kernels plus an example membrane trace
    Kernels,
    /// Learning windows, single-synapse phase portraits and the minimum target lag
    Dynamics,
    /// One pattern mapped to a multi-spike target
    Mapping,
    /// Final distance against learning rate
    RateSweep,
    /// Per-epoch classification curves
    Classify,
    /// Memory capacity over pattern counts
    Capacity,
    /// Classification with several target spikes per class
    MultiSpike,
    /// Clamped versus intrinsic update discrepancy and its bound
    VerifyAppendix,
}

impl From<Command> for Kind {
    fn from(c: Command) -> Kind {
        match c {
            Command::Kernels => Kind::Kernels,
            Command::Dynamics => Kind::Dynamics,
            Command::Mapping => Kind::Mapping,
            Command::RateSweep => Kind::RateSweep,
            Command::Classify => Kind::Classify,
            Command::Capacity => Kind::Capacity,
            Command::MultiSpike => Kind::MultiSpike,
            Command::VerifyAppendix => Kind::VerifyAppendix,
        }
    }
}

#[derive(Args)]
struct Opts {
    /// TOML file of settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, env = OUT_ENV, default_value = "results")]
    out: PathBuf,
    /// Train only this rule (default: both)
    #[arg(long, global = true)]
    rule: Option<Rule>,
    #[arg(long, global = true)]
    n_inputs: Option<usize>,
    /// Pattern counts, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    patterns: Option<Vec<usize>>,
    #[arg(long, global = true)]
    classes: Option<usize>,
    /// Target spike counts, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    target_spikes: Option<Vec<usize>>,
    /// Timing precisions in ms, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    precision_ms: Option<Vec<f64>>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Learning rate, or a comma separated grid for rate-sweep
    #[arg(long, global = true, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Simulation step in ms
    #[arg(long, global = true)]
    dt: Option<f64>,
}

impl Opts {
    fn settings(&self) -> Settings {
        Settings {
            seed: self.seed,
            runs: self.runs,
            jobs: self.jobs,
            rule: self.rule,
            n_inputs: self.n_inputs,
            patterns: self.patterns.clone(),
            classes: self.classes,
            target_spikes: self.target_spikes.clone(),
            precision_ms: self.precision_ms.clone(),
            epochs: self.epochs,
            eta: self.eta.clone(),
            dt: self.dt,
            ..Settings::default()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| {
        let file = match &cli.opts.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let config = ExperimentConfig::resolve(cli.kind.into(), file.overlay(cli.opts.settings()), cli.opts.out.clone())?;
        run(&config)
    })();
    match result {
        Ok(m) => {
            println!("{}: wrote {} files to {}", m.kind.name(), m.files.len() + 1, m.config.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
