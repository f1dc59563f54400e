use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use vsearch_cli::{gen_scenario, plot, summary, ExperimentSpec, RunOptions, TraceFile};
use vsearch_core::ScenarioParams;

#[derive(Parser)]
#[command(name = "vsearch", version, about = "Multi-agent active target search benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed × strategy × team size of an experiment spec.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory; defaults to the spec's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Record wall-clock plan times in the summary.
        #[arg(long)]
        timing: bool,
        /// Keep every lookahead plan in the traces.
        #[arg(long)]
        plan_trace: bool,
    },
    /// Render a trace (or, for `scalability`, a summary CSV) as SVG.
    Plot {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
        /// Partition round to draw; the last recorded one by default.
        #[arg(long)]
        round: Option<usize>,
    },
    /// Write a scenario file and its prior map as CSV.
    GenScenario {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        width: usize,
        #[arg(long, default_value_t = 100)]
        height: usize,
        #[arg(long, default_value_t = 1.0)]
        cell_size: f64,
        #[arg(long, default_value_t = 20)]
        targets: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Trajectories,
    Partition,
    Timeline,
    Scalability,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            spec,
            out,
            jobs,
            timing,
            plan_trace,
        } => {
            let spec = ExperimentSpec::load(&spec)?;
            let Some(out) = out.or_else(|| spec.output_dir.clone()) else {
                bail!("no output directory: pass --out or set `output_dir` in the spec");
            };
            let report = vsearch_cli::run_experiment(
                &spec,
                &out,
                RunOptions {
                    jobs,
                    timing,
                    plan_trace,
                },
            )?;
            println!(
                "{} runs ({} failed) -> {}",
                report.rows.len(),
                report.failed(),
                report.summary_path.display()
            );
        }
        Command::Plot {
            trace,
            kind,
            out,
            round,
        } => {
            let svg = match kind {
                PlotKind::Scalability => {
                    let f = fs::File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
                    let rows = summary::read(f).with_context(|| format!("parsing summary {}", trace.display()))?;
                    plot::scalability(&rows)?
                }
                kind => {
                    let t = TraceFile::load(&trace)?.trace;
                    match kind {
                        PlotKind::Trajectories => plot::trajectories(&t)?,
                        PlotKind::Partition => plot::partition(&t, round)?,
                        _ => plot::timeline(&t)?,
                    }
                }
            };
            fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::GenScenario {
            seed,
            out,
            width,
            height,
            cell_size,
            targets,
        } => {
            let params = ScenarioParams::new(seed, width, height, cell_size, targets);
            let csv = gen_scenario(&params, &out)?;
            println!("{} + {}", out.display(), csv.display());
        }
    }
    Ok(())
}
