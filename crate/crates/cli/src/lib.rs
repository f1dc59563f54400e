//! Batch benchmark front-end for vsearch: experiment specs, the flat CSV
//! summary, per-run JSON traces and SVG plots.

pub mod plot;
pub mod spec;
pub mod summary;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use vsearch_core::sim::{run_batch, RunTrace};
use vsearch_core::world::generate_scenario_with;
use vsearch_core::{RunMetrics, ScenarioParams, SimConfig};

pub use spec::ExperimentSpec;
pub use summary::SummaryRow;

/// Contents of one `traces/*.json` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub seed: u64,
    pub config_index: usize,
    pub config: SimConfig,
    pub metrics: RunMetrics,
    pub trace: RunTrace,
}

impl TraceFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            anyhow::anyhow!("trace {}: field `{field}`: {}", path.display(), e.into_inner())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub jobs: usize,
    /// Fill the wall-clock plan time column (makes the CSV non-reproducible).
    pub timing: bool,
    /// Keep every lookahead plan in the traces.
    pub plan_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            timing: false,
            plan_trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
    pub trace_paths: Vec<PathBuf>,
}

impl RunReport {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.error.is_empty()).count()
    }
}

pub fn trace_file_name(seed: u64, config_index: usize, config: &SimConfig) -> String {
    let name = config.name().to_string().replace('+', "-");
    format!("seed{seed}_cfg{config_index}_{name}_n{}.json", config.n_agents)
}

/// Runs every seed × config of the spec and writes `summary.csv` plus one
/// trace per successful run under `out/traces/`.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path, opts: RunOptions) -> anyhow::Result<RunReport> {
    let scenario = spec.scenario_params()?;
    let mut configs = spec.configs()?;
    for c in &mut configs {
        c.record_plans = opts.plan_trace;
    }
    let trace_dir = out.join("traces");
    fs::create_dir_all(&trace_dir).with_context(|| format!("creating {}", trace_dir.display()))?;

    let batch = run_batch(&scenario, &spec.seeds, &configs, opts.jobs)?;
    let mut rows = Vec::with_capacity(batch.len());
    let mut trace_paths = Vec::new();
    for row in batch {
        let config = &configs[row.config_index];
        rows.push(SummaryRow::from_batch(&row, config, opts.timing));
        if let (Ok(metrics), Some(trace)) = (row.result, row.trace) {
            let mut metrics = metrics;
            if !opts.timing {
                metrics.plan_compute_times.clear();
            }
            let file = TraceFile {
                seed: row.seed,
                config_index: row.config_index,
                config: config.clone(),
                metrics,
                trace,
            };
            let path = trace_dir.join(trace_file_name(row.seed, row.config_index, config));
            fs::write(&path, serde_json::to_vec(&file)?).with_context(|| format!("writing {}", path.display()))?;
            trace_paths.push(path);
        }
    }
    let summary_path = out.join("summary.csv");
    let f = fs::File::create(&summary_path).with_context(|| format!("creating {}", summary_path.display()))?;
    summary::write(f, &rows)?;
    Ok(RunReport {
        rows,
        summary_path,
        trace_paths,
    })
}

/// Writes the scenario params as JSON to `out` and the generated prior as a
/// CSV grid next to it (`<stem>.prior.csv`). Returns the CSV path.
pub fn gen_scenario(params: &ScenarioParams, out: &Path) -> anyhow::Result<PathBuf> {
    let scenario = generate_scenario_with(params)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(out, serde_json::to_string_pretty(params)? + "\n")
        .with_context(|| format!("writing {}", out.display()))?;
    let stem = out
        .file_stem()
        .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    let csv_path = out.with_file_name(format!("{stem}.prior.csv"));
    fs::write(&csv_path, scenario.map.to_csv()).with_context(|| format!("writing {}", csv_path.display()))?;
    Ok(csv_path)
}
