use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mmwpt_cli::run::{self, Mode, RunRequest, StrategyChoice};

/// Energy-coverage calculator for clustered millimeter-wave
/// wireless-power networks: closed-form coverage, Monte Carlo simulation,
/// cross-validation, and parameter sweeps.
#[derive(Parser)]
#[command(name = "mmwpt", version)]
struct Args {
    /// What to compute.
    #[arg(long, value_enum, default_value_t = Mode::Validate)]
    mode: Mode,

    /// Flat key=value configuration file; omitted keys use the built-in
    /// reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set nb=64 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Sweep axis: nb, gamma_th_dbm, mean_pb_count, sigma_u or sigma_b
    /// (suffix .typical to touch only the reference user's tier).
    #[arg(long)]
    sweep: Option<String>,

    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,

    /// Association strategy to evaluate.
    #[arg(long, value_enum, default_value_t = StrategyChoice::Both)]
    strategy: StrategyChoice,

    /// Monte Carlo trials per point; 0 turns simulation off in sweep mode.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,

    /// Base RNG seed; each trial derives its own substream.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// JSON report path (rows plus resolved config and diagnostics).
    #[arg(long)]
    json: Option<PathBuf>,

    /// SVG plot path (sweep mode only).
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn format_cell(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let request = RunRequest {
        mode: args.mode,
        config_path: args.config,
        overrides: args.overrides,
        sweep_param: args.sweep,
        sweep_values: args.values,
        strategy: args.strategy,
        trials: args.trials,
        seed: args.seed,
        out_csv: args.out,
        out_json: args.json,
        out_svg: args.svg,
    };
    match run::run(&request) {
        Ok(outcome) => {
            println!("sweep_value strategy analytic_p mc_p abs_gap");
            for row in &outcome.rows {
                println!(
                    "{:>11} {:>8} {:>10} {:>8} {:>7}",
                    row.sweep_value
                        .map_or_else(|| "-".to_string(), |v| format!("{v}")),
                    row.strategy,
                    format_cell(row.analytic_p),
                    format_cell(row.mc_p),
                    format_cell(row.abs_gap),
                );
            }
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
