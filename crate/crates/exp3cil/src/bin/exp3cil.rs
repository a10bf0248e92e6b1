//! Experiment runner CLI.
//!
//! `run` executes a configured experiment matrix and writes `summary.json`,
//! `phases.csv`, and `trace.csv`; `compare` merges several summaries into a
//! methods-by-settings table. Log verbosity comes from `EXP3CIL_LOG`
//! (error | info | debug).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exp3cil::harness::{self, Overrides};

#[derive(Parser)]
#[command(name = "exp3cil", version, about = "Online hyperparameter optimization for class-incremental learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix described by a config file.
    Run(RunArgs),
    /// Combine run summaries into a comparison table.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML config file.
    #[arg(long)]
    config: PathBuf,

    /// Override the run mode: online | fixed | grid-search | ablation.
    #[arg(long)]
    mode: Option<String>,

    /// Override the data-receiving setting: tfh | tfs | both.
    #[arg(long)]
    setting: Option<String>,

    /// Override the seed list, comma-separated (e.g. 1,2,3).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Parallel worker slots for (setting, seed) cells.
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory for summary.json / phases.csv / trace.csv.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Fixed-mode logit-KD weight.
    #[arg(long)]
    beta: Option<f64>,

    /// Fixed-mode feature-KD weight.
    #[arg(long)]
    gamma: Option<f64>,

    /// Fixed-mode learning rate.
    #[arg(long)]
    lambda: Option<f64>,

    /// Fixed-mode classifier type: 0 = FC, 1 = NCM.
    #[arg(long)]
    delta: Option<u8>,

    /// Ablation subset: beta_gamma | beta_gamma_delta | beta_gamma_delta_lambda.
    #[arg(long)]
    ablate: Option<String>,

    /// Write per-phase model/policy/result checkpoints under the out dir.
    #[arg(long)]
    checkpoints: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// summary.json files to compare.
    #[arg(required = true)]
    summaries: Vec<PathBuf>,

    /// Output directory for comparison.json / comparison.csv / curves.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> exp3cil::Result<()> {
    let file = harness::FileConfig::load(&args.config)?;
    let overrides = Overrides {
        mode: args.mode,
        setting: args.setting,
        seeds: args.seeds,
        workers: args.workers,
        out: args.out.map(|p| p.display().to_string()),
        beta: args.beta,
        gamma: args.gamma,
        lambda: args.lambda,
        delta: args.delta,
        ablate: args.ablate,
        checkpoints: args.checkpoints,
    };
    let config = harness::resolve(&file, &overrides)?;
    let artifacts = harness::execute(&config)?;
    let out_dir = config
        .out
        .clone()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    harness::write_outputs(&artifacts, &out_dir)?;

    println!(
        "method {} finished in {:.1}s; outputs in {}",
        artifacts.summary.method,
        artifacts.summary.elapsed_seconds,
        out_dir.display()
    );
    for (setting, stats) in &artifacts.summary.settings {
        println!(
            "  {}: average accuracy {:.4} +- {:.4} over {} seed(s)",
            setting,
            stats.mean_average_accuracy,
            stats.std_average_accuracy,
            stats.per_seed.len()
        );
    }
    if let Some(avg) = artifacts.summary.average {
        println!("  tfh/tfs average: {:.4} +- {:.4}", avg.mean, avg.std);
    }
    if let Some(gs) = &artifacts.summary.grid_search {
        println!(
            "  grid search best: index {} {}",
            gs.best_index,
            harness::fixed_method_label(&gs.best_action)
        );
    }
    Ok(())
}

fn compare(args: CompareArgs) -> exp3cil::Result<()> {
    let summaries = args
        .summaries
        .iter()
        .map(|p| harness::load_summary(p))
        .collect::<exp3cil::Result<Vec<_>>>()?;
    let report = harness::compare_report(&summaries)?;
    print!("{}", report.table_csv()?);
    if let Some(out) = args.out {
        report.write_to(&out)?;
        println!("comparison written to {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter_or("EXP3CIL_LOG", "error")
            .write_style("EXP3CIL_LOG_STYLE"),
    )
    .init();

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
