mod config;
mod error;
mod generate;
mod output;
mod plot;
mod run;
mod stats;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{metadata_for, read_results, write_atomic, write_csv, RANKS_FILE};

/// Benchmark runner for multi-source online transfer learning on drifting streams.
#[derive(Debug, Parser)]
#[command(name = "melanie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the configured synthetic scenario's streams as CSV plus a manifest.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory [default: experiment.out, else ./results]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every approach and grid point; writes results.csv, grid_summary.csv and metadata.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the base seed of the replications (run r uses seed + r).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads [default: all cores]
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Friedman ranks and Nemenyi critical difference from a results CSV.
    Stats {
        results: PathBuf,
        /// Output directory [default: next to the results]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rank every grid point instead of only each approach's best one.
        #[arg(long)]
        all_grid_points: bool,
    },
    /// One accuracy-over-time SVG per scenario from a results CSV.
    Plot {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    config::load(path).map_err(|error| CliError::Config {
        path: path.to_path_buf(),
        error,
    })
}

fn out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("results"))
}

fn results_dir(flag: Option<PathBuf>, results: &Path) -> PathBuf {
    flag.unwrap_or_else(|| results.parent().unwrap_or(Path::new(".")).to_path_buf())
}

/// Metric named by the run metadata; running accuracy when there is none.
fn uses_window(results: &Path) -> Result<bool, CliError> {
    Ok(metadata_for(results)?.is_some_and(|m| m.metric == "window"))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { config, out, seed } => {
            let cfg = load_config(&config)?;
            let dir = out_dir(out, &cfg);
            let manifest = generate::generate(&cfg, &config, seed, &dir)?;
            for path in generate::written_files(&manifest, &dir) {
                println!("{}", path.display());
            }
        }
        Command::Run { config, out, seed, jobs } => {
            let cfg = load_config(&config)?;
            let dir = out_dir(out, &cfg);
            let meta = run::run(&cfg, seed, jobs, &dir)?;
            for a in &meta.approaches {
                println!(
                    "{:<40} mean accuracy {:.4} over {} run(s){}",
                    a.label,
                    a.mean_accuracy,
                    a.runs,
                    if a.best { "  (best grid point)" } else { "" }
                );
            }
            println!("results written to {}", dir.display());
        }
        Command::Stats {
            results,
            out,
            all_grid_points,
        } => {
            let series = read_results(&results)?;
            let meta = metadata_for(&results)?;
            let keep: Option<BTreeSet<String>> = match (&meta, all_grid_points) {
                (Some(m), false) => Some(m.approaches.iter().filter(|a| a.best).map(|a| a.label.clone()).collect()),
                _ => None,
            };
            let window = uses_window(&results)?;
            let mut rows = Vec::new();
            for s in &series {
                rows.extend(stats::rank_scenario(s, window, keep.as_ref())?);
            }
            let path = results_dir(out, &results).join(RANKS_FILE);
            write_csv(&path, &rows)?;
            for r in &rows {
                println!(
                    "{:<20} {:<40} rank {}{}",
                    r.scenario,
                    r.approach,
                    r.mean_rank,
                    if r.bold { " *" } else { "" }
                );
            }
            println!("ranks written to {}", path.display());
        }
        Command::Plot { results, out } => {
            let series = read_results(&results)?;
            let meta = metadata_for(&results)?;
            let window = uses_window(&results)?;
            let dir = results_dir(out, &results);
            for s in &series {
                let drift = meta
                    .as_ref()
                    .filter(|m| m.scenario.name == s.scenario)
                    .map(|m| m.scenario.drift_points.clone())
                    .unwrap_or_default();
                let curves: Vec<(String, Vec<f64>)> =
                    s.approaches.iter().map(|a| (a.approach.clone(), a.mean(window))).collect();
                let y_label = if window { "windowed accuracy" } else { "prequential accuracy" };
                let svg = plot::render_svg(&s.scenario, y_label, &curves, &drift);
                let path = dir.join(format!("{}.svg", s.scenario));
                write_atomic(&path, |w| w.write_all(svg.as_bytes()))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("melanie: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
