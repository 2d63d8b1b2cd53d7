//! Thin command-line front end over the library.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use unlearn_lab::guarantees::{format_params_table, BoundConstants, UnlearningParams};
use unlearn_lab::harness::{run_experiment, summary_json, write_csv, ExperimentConfig, Scenario};
use unlearn_lab::privacy::{render_budget_trace, simulate_budget_trace};

#[derive(Parser)]
#[command(
    name = "unlearn-lab",
    version,
    about = "Simulation lab for sharded machine unlearning under adaptive deletions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the adaptive-guarantee calculators. All logarithms are natural.
    Params(ParamsArgs),
    /// Compute the privacy-budget capacity and simulate a per-round trace.
    Budget(BudgetArgs),
    /// Run a nonadaptive baseline experiment from a config file.
    Simulate(RunArgs),
    /// Run an adaptive attack experiment from a config file.
    Attack(RunArgs),
}

#[derive(Args)]
struct ParamsArgs {
    /// Total DP epsilon of the publishing channel, in (0, 1/2].
    #[arg(long)]
    epsilon: f64,
    /// Total DP delta, in (0, epsilon).
    #[arg(long)]
    delta: f64,
    /// Independent seed draws (the shard count).
    #[arg(long)]
    m: u32,
    /// Multiplier on the eps' leading term (unspecified theory constant).
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// Multiplier on the m*sqrt(delta/eps) slack terms.
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    /// Nonadaptive base alpha.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Nonadaptive base beta.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Nonadaptive base gamma.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Per-query exponential-mechanism epsilon.
    #[arg(long)]
    eps_prime: f64,
    /// Comma-separated queries served per round, e.g. 3,0,2.
    #[arg(long, value_delimiter = ',')]
    queries: Vec<u64>,
    /// Write the CSV trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON, snake_case fields).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// CSV output path; the summary JSON lands next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the config's confidence level.
    #[arg(long)]
    ci_level: Option<f64>,
    /// Override the interval method.
    #[arg(long, value_parser = ["wilson", "clopper-pearson"])]
    ci_method: Option<String>,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Params(args) => {
            let base = UnlearningParams::new(args.alpha, args.beta, args.gamma)?;
            let constants = BoundConstants::new(args.c1, args.c2)?;
            print!(
                "{}",
                format_params_table(base, args.epsilon, args.delta, args.m, constants)?
            );
        }
        Command::Budget(args) => {
            let rows =
                simulate_budget_trace(args.epsilon, args.delta, args.eps_prime, &args.queries)?;
            let csv = render_budget_trace(&rows);
            match args.out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Simulate(args) => run_config(args, true)?,
        Command::Attack(args) => run_config(args, false)?,
    }
    Ok(())
}

fn run_config(args: RunArgs, baseline: bool) -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(level) = args.ci_level {
        config.ci_level = level;
    }
    if let Some(method) = args.ci_method {
        config.ci_method = method.parse()?;
    }
    if let Some(out) = args.out {
        config.out = Some(out.display().to_string());
    }
    let is_baseline = matches!(config.scenario, Scenario::NonAdaptiveBaseline);
    if baseline && !is_baseline {
        return Err("simulate runs the non_adaptive_baseline scenario; use `attack` for adaptive scenarios".into());
    }
    if !baseline && is_baseline {
        return Err("attack runs adaptive scenarios; use `simulate` for the baseline".into());
    }

    let experiment = run_experiment(&config)?;
    let csv = write_csv(&experiment.results);
    let summary = summary_json(&experiment.summary);
    if let Some(out) = &config.out {
        let path = PathBuf::from(out);
        std::fs::write(&path, &csv)?;
        std::fs::write(path.with_extension("summary.json"), &summary)?;
    }
    print!("{summary}");
    Ok(())
}
