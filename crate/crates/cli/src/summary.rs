//! One flat CSV row per run.
//!
//! Columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `seed` | scenario seed |
//! | `config_index` | position of the (strategy, n_agents) pair in the spec's expansion |
//! | `strategy` | strategy name as accepted by specs |
//! | `n_agents` | team size |
//! | `success` | every target found |
//! | `found` / `total_targets` | targets found / present |
//! | `termination` | `all_found`, `map_exhausted`, `stalled`, `max_rounds`, or `error` |
//! | `rounds` | rounds executed |
//! | `working_time_s` | longest per-agent flight time |
//! | `sim_time_s` | simulated wall time including waits at round barriers |
//! | `total_path_m` / `max_path_m` | summed and largest per-agent path length |
//! | `path_lengths_m` | per-agent path lengths joined with `;` |
//! | `half_found_path_m` | team path length when half the targets were found (empty if never) |
//! | `mean_plan_cells` | mean planner ray cells visited per agent-round |
//! | `mean_plan_time_s` | mean wall-clock planning time per agent-round; empty unless timing was requested |
//! | `error` | failure message for a failed run, else empty |
//!
//! Floats are written in shortest round-trip form, so every value parses
//! back to the identical `f64`.

use std::io;

use serde::{Deserialize, Serialize};
use vsearch_core::sim::{BatchRow, Termination};
use vsearch_core::SimConfig;

pub const COLUMNS: [&str; 18] = [
    "seed",
    "config_index",
    "strategy",
    "n_agents",
    "success",
    "found",
    "total_targets",
    "termination",
    "rounds",
    "working_time_s",
    "sim_time_s",
    "total_path_m",
    "max_path_m",
    "path_lengths_m",
    "half_found_path_m",
    "mean_plan_cells",
    "mean_plan_time_s",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub config_index: usize,
    pub strategy: String,
    pub n_agents: usize,
    pub success: bool,
    pub found: usize,
    pub total_targets: usize,
    pub termination: String,
    pub rounds: usize,
    pub working_time_s: f64,
    pub sim_time_s: f64,
    pub total_path_m: f64,
    pub max_path_m: f64,
    pub path_lengths_m: String,
    pub half_found_path_m: Option<f64>,
    pub mean_plan_cells: f64,
    pub mean_plan_time_s: Option<f64>,
    pub error: String,
}

impl SummaryRow {
    pub fn from_batch(row: &BatchRow, config: &SimConfig, timing: bool) -> Self {
        let mut out = SummaryRow {
            seed: row.seed,
            config_index: row.config_index,
            strategy: config.name().to_string(),
            n_agents: config.n_agents,
            success: false,
            found: 0,
            total_targets: 0,
            termination: "error".into(),
            rounds: 0,
            working_time_s: 0.0,
            sim_time_s: 0.0,
            total_path_m: 0.0,
            max_path_m: 0.0,
            path_lengths_m: String::new(),
            half_found_path_m: None,
            mean_plan_cells: 0.0,
            mean_plan_time_s: None,
            error: String::new(),
        };
        match &row.result {
            Ok(m) => {
                out.success = m.success;
                out.found = m.found_count;
                out.total_targets = m.total_targets;
                out.termination = termination_name(m.termination).into();
                out.rounds = m.rounds_executed;
                out.working_time_s = m.working_time;
                out.sim_time_s = m.sim_time;
                out.total_path_m = m.total_path_length();
                out.max_path_m = m.max_path_length();
                out.path_lengths_m = m
                    .path_lengths
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                out.half_found_path_m = m.path_length_at_fraction(0.5);
                out.mean_plan_cells = m.mean_plan_cells();
                out.mean_plan_time_s = timing.then(|| m.mean_plan_time());
            }
            Err(e) => out.error = e.clone(),
        }
        out
    }

    pub fn path_lengths(&self) -> Vec<f64> {
        self.path_lengths_m
            .split(';')
            .filter(|s| !s.is_empty())
            .filter_map(|s| s.parse().ok())
            .collect()
    }
}

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::AllFound => "all_found",
        Termination::MapExhausted => "map_exhausted",
        Termination::Stalled => "stalled",
        Termination::MaxRounds => "max_rounds",
    }
}

pub fn write<W: io::Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read<R: io::Read>(input: R) -> csv::Result<Vec<SummaryRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
