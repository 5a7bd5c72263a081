//! Thin CLI over the library: world generation, experiment runs, and SPL
//! summaries from result CSVs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use con_sim::eval::{
    parse_config, rows_from_csv, run_experiment, summarize_rows, write_curve_report, Method,
};
use con_sim::world::{generate_world, save_world, Scenario, WorldGenParams};

#[derive(Parser)]
#[command(name = "con-sim", about = "Object-goal navigation simulator with inter-agent knowledge transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a world and write it in the CONWORLD text format.
    GenWorld(GenWorldArgs),
    /// Run an experiment described by a config file and write a result CSV.
    Run(RunArgs),
    /// Print per-curve SPL summaries from a result CSV.
    Spl(SplArgs),
    /// Print the default config file with all documented keys.
    DefaultConfig,
}

#[derive(Args)]
struct GenWorldArgs {
    /// Generation seed.
    #[arg(long)]
    seed: u64,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// Width in cells.
    #[arg(long, default_value_t = 64)]
    width: usize,
    /// Height in cells.
    #[arg(long, default_value_t = 64)]
    height: usize,
    /// Number of target objects to place.
    #[arg(long, default_value_t = 100)]
    targets: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
    /// Restrict the run to one method.
    #[arg(long)]
    method: Option<String>,
    /// Restrict the run to one localization failure rate.
    #[arg(long)]
    pe: Option<f64>,
    /// Restrict the run to one scenario.
    #[arg(long)]
    scenario: Option<String>,
}

#[derive(Args)]
struct SplArgs {
    /// Result CSV produced by `con-sim run`.
    #[arg(long = "in")]
    input: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::GenWorld(args) => {
            let params = WorldGenParams {
                width: args.width,
                height: args.height,
                target_count: args.targets,
                ..WorldGenParams::default()
            };
            let world = generate_world(args.seed, &params).map_err(|e| e.to_string())?;
            std::fs::write(&args.out, save_world(&world)).map_err(|e| e.to_string())?;
            println!(
                "wrote {} ({}x{} cells, {} free, {} targets)",
                args.out.display(),
                params.width,
                params.height,
                world.free_cell_count(),
                world.targets().len(),
            );
            Ok(())
        }
        Command::Run(args) => {
            let text = std::fs::read_to_string(&args.config).map_err(|e| e.to_string())?;
            let mut config = parse_config(&text).map_err(|e| e.to_string())?;
            if let Some(method) = &args.method {
                let m = Method::parse(method)
                    .ok_or_else(|| format!("unknown method {method:?}"))?;
                config.methods = vec![m];
            }
            if let Some(pe) = args.pe {
                if !(0.0..=1.0).contains(&pe) {
                    return Err(format!("pe {pe} outside [0, 1]"));
                }
                config.pe_values = vec![pe];
            }
            if let Some(scenario) = &args.scenario {
                let s = Scenario::parse(scenario)
                    .ok_or_else(|| format!("unknown scenario {scenario:?}"))?;
                config.scenarios = vec![s];
            }
            let summary = run_experiment(&config).map_err(|e| e.to_string())?;
            std::fs::write(&args.out, summary.to_csv()).map_err(|e| e.to_string())?;
            print!("{}", write_curve_report(&summary.curves));
            println!(
                "wrote {} ({} episodes, {} skipped)",
                args.out.display(),
                summary.rows.len(),
                summary.skipped,
            );
            Ok(())
        }
        Command::Spl(args) => {
            let text = std::fs::read_to_string(&args.input).map_err(|e| e.to_string())?;
            let rows = rows_from_csv(&text).map_err(|e| e.to_string())?;
            if rows.is_empty() {
                return Err("no data rows in the CSV".into());
            }
            let curves = summarize_rows(&rows);
            print!("{}", write_curve_report(&curves));
            Ok(())
        }
        Command::DefaultConfig => {
            print!("{}", con_sim::eval::default_config_text());
            Ok(())
        }
    }
}
