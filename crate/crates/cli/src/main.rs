use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qrom_cli::config::ExperimentConfig;
use qrom_cli::{list_experiments, run_experiment, run_table, CliError, CliResult};

#[derive(Parser)]
#[command(name = "qrom", version, about = "Experiments on non-uniform security games in the quantum random oracle model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered experiments.
    List,
    /// Run one experiment and write its CSV and JSON sidecar.
    Run {
        /// Experiment name; optional when the config names one.
        experiment: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads for per-oracle parallelism.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate one closed-form bound and print it as CSV.
    Bound(BoundArgs),
}

#[derive(Args)]
struct BoundArgs {
    /// owf, prg, salt_general, salt_decision, classical_general, main_general or main_decision.
    #[arg(long, default_value = "owf")]
    which: String,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    t_samp: Option<f64>,
    #[arg(long)]
    t_verify: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::List => print!("{}", list_experiments()),
        Command::Run { experiment, config, seed, out, threads } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::named(experiment.as_deref().unwrap_or_default()),
            };
            if let Some(name) = experiment {
                cfg.experiment = name;
            }
            if cfg.experiment.is_empty() {
                return Err(CliError::Config("no experiment named; see `qrom list`".into()));
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
            }
            let out = cfg.out.clone().filter(|_| config.is_some()).unwrap_or(out);
            let (csv, json) = run_experiment(&cfg, &out)?;
            eprintln!("wrote {} and {}", csv.display(), json.display());
        }
        Command::Bound(b) => {
            let mut cfg = ExperimentConfig::named("bound-calculator");
            let p = &mut cfg.params;
            p.which = Some(vec![b.which]);
            (p.s, p.t, p.n, p.m, p.k, p.nu) = (b.s, b.t, b.n, b.m, b.k, b.nu);
            (p.t_samp, p.t_verify, p.c) = (b.t_samp, b.t_verify, Some(b.c));
            let table = run_table(&cfg)?;
            qrom_cli::output::write_csv(std::io::stdout().lock(), &table, &cfg.hash())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
