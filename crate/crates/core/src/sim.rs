//! Synchronous round loop: partition, per-agent goal selection, trajectory
//! execution, discovery and depletion.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SearchError};
use crate::geom::{GridDims, Vec2};
use crate::partition::{partition, strips, VoronoiLabeling};
use crate::planner::{LookaheadPlan, PlannerParams};
use crate::rays::RegionMask;
use crate::strategies::{next_goal, Strategy, StrategyKind, StrategyName};
use crate::trajectory::{arc_length, generate_feasible, AgentState, KinoLimits, QuinticTrajectory};
use crate::world::{
    deplete, detects, generate_scenario_with, update_found, ProbabilityMap, ScenarioParams, SensorModel, TargetSet,
};

/// Shortest duration tried for any trajectory.
pub const MIN_SEGMENT_DURATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_agents: usize,
    pub strategy: Strategy,
    pub use_voronoi: bool,
    pub planner: PlannerParams,
    pub sensor: SensorModel,
    pub limits: KinoLimits,
    pub max_rounds: usize,
    pub rng_seed: u64,
    pub record_trace: bool,
    pub record_plans: bool,
}

impl SimConfig {
    pub fn new(name: StrategyName, n_agents: usize) -> Self {
        SimConfig {
            n_agents,
            strategy: Strategy::new(name.kind),
            use_voronoi: name.use_voronoi,
            planner: PlannerParams::default(),
            sensor: SensorModel::default(),
            limits: KinoLimits::default(),
            max_rounds: 5000,
            rng_seed: 0,
            record_trace: false,
            record_plans: false,
        }
    }

    pub fn name(&self) -> StrategyName {
        StrategyName {
            kind: self.strategy.kind,
            use_voronoi: self.use_voronoi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(invalid("n_agents", "must be at least 1"));
        }
        if self.max_rounds < 1 {
            return Err(invalid("max_rounds", "must be at least 1"));
        }
        self.strategy.validate()?;
        self.planner.validate()?;
        self.limits.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    AllFound,
    MapExhausted,
    /// No agent had a goal left.
    Stalled,
    MaxRounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoundEvent {
    pub time: f64,
    pub found: usize,
    /// Team path length flown up to `time`.
    pub path_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub path_lengths: Vec<f64>,
    pub flight_times: Vec<f64>,
    pub working_time: f64,
    pub sim_time: f64,
    pub found_timeline: Vec<FoundEvent>,
    /// Mean wall-clock seconds one agent spent choosing its goal and
    /// trajectory, per round.
    pub plan_compute_times: Vec<f64>,
    /// Mean planner cells visited per agent, per round.
    pub plan_cells_visited: Vec<f64>,
    pub rounds_executed: usize,
    pub found_count: usize,
    pub total_targets: usize,
    pub success: bool,
    pub termination: Termination,
}

impl RunMetrics {
    pub fn max_path_length(&self) -> f64 {
        self.path_lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_path_length(&self) -> f64 {
        self.path_lengths.iter().sum()
    }

    pub fn mean_plan_time(&self) -> f64 {
        mean(&self.plan_compute_times)
    }

    pub fn mean_plan_cells(&self) -> f64 {
        mean(&self.plan_cells_visited)
    }

    /// Team path length when at least `fraction` of the targets had been found.
    pub fn path_length_at_fraction(&self, fraction: f64) -> Option<f64> {
        let needed = (fraction * self.total_targets as f64).ceil() as usize;
        if needed == 0 {
            return Some(0.0);
        }
        self.found_timeline
            .iter()
            .find(|e| e.found >= needed)
            .map(|e| e.path_length)
    }

    /// Relative spread of per-agent path lengths, `(max − min) / max`.
    pub fn path_imbalance(&self) -> f64 {
        let max = self.max_path_length();
        let min = self.path_lengths.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            0.0
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub round: usize,
    pub start_time: f64,
    pub trajectory: QuinticTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub round: usize,
    pub agent: usize,
    pub plan: LookaheadPlan,
}

/// Everything needed to replay and plot one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub strategy: String,
    pub n_agents: usize,
    pub dims: GridDims,
    pub prior: Vec<f64>,
    pub targets: Vec<Vec2>,
    pub initial_positions: Vec<Vec2>,
    pub segments: Vec<Vec<TrajectorySegment>>,
    /// Generator positions of the partition used in each round, if any.
    pub partitions: Vec<Option<Vec<Vec2>>>,
    pub found_timeline: Vec<FoundEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<PlanRecord>,
}

pub fn initial_positions(n: usize, dims: &GridDims, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = dims.extent();
    (0..n)
        .map(|_| Vec2::new(rng.gen_range(0.0..e.x), rng.gen_range(0.0..e.y)))
        .collect()
}

pub fn run(map: &ProbabilityMap, targets: &TargetSet, config: &SimConfig) -> Result<RunMetrics> {
    run_inner(map, targets, config, false).map(|(m, _)| m)
}

pub fn run_traced(map: &ProbabilityMap, targets: &TargetSet, config: &SimConfig) -> Result<(RunMetrics, RunTrace)> {
    run_inner(map, targets, config, true).map(|(m, t)| (m, t.expect("trace requested")))
}

struct Executed {
    agent: usize,
    trajectory: QuinticTrajectory,
    /// (time in round, position, cumulative chord length)
    samples: Vec<(f64, Vec2, f64)>,
}

fn run_inner(
    prior: &ProbabilityMap,
    targets: &TargetSet,
    config: &SimConfig,
    want_trace: bool,
) -> Result<(RunMetrics, Option<RunTrace>)> {
    config.validate()?;
    let dims = *prior.dims();
    let n = config.n_agents;
    let mut map = prior.clone();
    let mut targets = targets.clone();
    let mut states: Vec<AgentState> = initial_positions(n, &dims, config.rng_seed)
        .into_iter()
        .map(AgentState::at_rest)
        .collect();
    let interval = config.sensor.sweep_interval(dims.cell_size);
    let speed_bound = config.limits.v_max * 1.05;

    let mut trace = want_trace.then(|| RunTrace {
        strategy: config.name().to_string(),
        n_agents: n,
        dims,
        prior: prior.values().to_vec(),
        targets: targets.positions().to_vec(),
        initial_positions: states.iter().map(|s| s.position).collect(),
        segments: vec![Vec::new(); n],
        partitions: Vec::new(),
        found_timeline: Vec::new(),
        plans: Vec::new(),
    });

    let mut m = RunMetrics {
        path_lengths: vec![0.0; n],
        flight_times: vec![0.0; n],
        working_time: 0.0,
        sim_time: 0.0,
        found_timeline: Vec::new(),
        plan_compute_times: Vec::new(),
        plan_cells_visited: Vec::new(),
        rounds_executed: 0,
        found_count: 0,
        total_targets: targets.total(),
        success: false,
        termination: Termination::MaxRounds,
    };

    let static_strips = if n > 1 && !config.use_voronoi && config.strategy.kind == StrategyKind::ZigZag {
        Some(strips(n, &dims)?)
    } else {
        None
    };

    // sensors are live at the start positions
    let start: Vec<Vec2> = states.iter().map(|s| s.position).collect();
    for _ in update_found(&mut targets, &start, &config.sensor, &dims) {
        m.found_timeline.push(FoundEvent {
            time: 0.0,
            found: targets.found_count(),
            path_length: 0.0,
        });
    }
    deplete(&mut map, &start, &config.sensor);

    for round in 0..config.max_rounds {
        if targets.all_found() {
            m.termination = Termination::AllFound;
            break;
        }
        if map.is_exhausted() {
            m.termination = Termination::MapExhausted;
            break;
        }
        let positions: Vec<Vec2> = states.iter().map(|s| s.position).collect();
        let voronoi: Option<VoronoiLabeling> = if n > 1 && config.use_voronoi {
            Some(partition(&positions, &map)?)
        } else {
            None
        };
        let labeling = voronoi.as_ref().or(static_strips.as_ref());

        let mut executed = Vec::new();
        let mut plan_secs = 0.0;
        let mut plan_cells = 0u64;
        for (agent, state) in states.iter().enumerate() {
            let wrap = |e: SearchError| SearchError::Round {
                round,
                agent,
                source: Box::new(e),
            };
            let mask = labeling.map(|l| RegionMask::new(l, agent));
            let clock = Instant::now();
            let decision =
                next_goal(&config.strategy, state, &map, mask, &config.planner, &config.sensor).map_err(wrap)?;
            let trajectory = match decision.goal {
                Some(goal) => {
                    let min_duration = (state.position.distance(goal) / config.limits.v_max).max(MIN_SEGMENT_DURATION);
                    Some(generate_feasible(state, goal, min_duration, &config.limits).map_err(wrap)?)
                }
                None => None,
            };
            plan_secs += clock.elapsed().as_secs_f64();
            plan_cells += decision.stats.cells_visited;
            if let (Some(t), Some(plan)) = (trace.as_mut(), decision.plan) {
                if config.record_plans {
                    t.plans.push(PlanRecord { round, agent, plan });
                }
            }
            if let Some(trajectory) = trajectory {
                let mut chord = 0.0;
                let mut last = state.position;
                let samples = trajectory
                    .sweep_samples(interval, speed_bound)
                    .into_iter()
                    .map(|(t, p)| {
                        chord += p.distance(last);
                        last = p;
                        (t, p, chord)
                    })
                    .collect();
                executed.push(Executed {
                    agent,
                    trajectory,
                    samples,
                });
            }
        }
        m.plan_compute_times.push(plan_secs / n as f64);
        m.plan_cells_visited.push(plan_cells as f64 / n as f64);

        if executed.is_empty() {
            m.termination = Termination::Stalled;
            break;
        }
        if let Some(t) = trace.as_mut() {
            t.partitions.push(labeling.map(|l| l.generator_positions().to_vec()));
        }

        // discovery times, then depletion with every sweep of the round
        let mut discoveries: Vec<(f64, usize)> = Vec::new();
        for i in 0..targets.total() {
            if targets.is_found(i) {
                continue;
            }
            let target = targets.positions()[i];
            let first = executed
                .iter()
                .filter_map(|e| {
                    e.samples
                        .iter()
                        .find(|s| detects(s.1, target, &config.sensor, &dims))
                        .map(|s| s.0)
                })
                .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
            if let Some(t) = first {
                discoveries.push((t, i));
            }
        }
        discoveries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let path_before: f64 = m.path_lengths.iter().sum();
        for (t, i) in discoveries {
            targets.mark_found(i);
            let flown: f64 = executed
                .iter()
                .map(|e| e.samples.iter().take_while(|s| s.0 <= t).last().map_or(0.0, |s| s.2))
                .sum();
            m.found_timeline.push(FoundEvent {
                time: m.sim_time + t,
                found: targets.found_count(),
                path_length: path_before + flown,
            });
        }
        let swept: Vec<Vec2> = executed.iter().flat_map(|e| e.samples.iter().map(|s| s.1)).collect();
        deplete(&mut map, &swept, &config.sensor);

        let mut round_time: f64 = 0.0;
        for e in executed {
            let tau = e.trajectory.duration();
            round_time = round_time.max(tau);
            m.path_lengths[e.agent] += arc_length(&e.trajectory);
            m.flight_times[e.agent] += tau;
            states[e.agent] = AgentState::at_rest(dims.clamp(e.trajectory.end_position()));
            if let Some(t) = trace.as_mut() {
                t.segments[e.agent].push(TrajectorySegment {
                    round,
                    start_time: m.sim_time,
                    trajectory: e.trajectory,
                });
            }
        }
        m.sim_time += round_time;
        m.rounds_executed = round + 1;
    }
    if m.termination == Termination::MaxRounds && targets.all_found() {
        m.termination = Termination::AllFound;
    }
    m.found_count = targets.found_count();
    m.success = targets.all_found();
    m.working_time = m.flight_times.iter().copied().fold(0.0, f64::max);
    if let Some(t) = trace.as_mut() {
        t.found_timeline = m.found_timeline.clone();
    }
    Ok((m, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub seed: u64,
    pub config_index: usize,
    pub result: std::result::Result<RunMetrics, String>,
    pub trace: Option<RunTrace>,
}

/// Placement seed of a batch row; shared by every config on one scenario.
pub fn placement_seed(scenario_seed: u64, config_seed: u64) -> u64 {
    scenario_seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ config_seed
}

/// Runs every (seed, config) pair. Rows come back ordered by seed, then
/// config; a failing run is recorded in its row and does not stop the batch.
pub fn run_batch(
    scenario: &ScenarioParams,
    seeds: &[u64],
    configs: &[SimConfig],
    jobs: usize,
) -> Result<Vec<BatchRow>> {
    if seeds.is_empty() || configs.is_empty() {
        return Err(invalid("batch", "need at least one seed and one config"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid("jobs", e.to_string()))?;
    let rows = pool.install(|| {
        seeds
            .par_iter()
            .flat_map_iter(|&seed| {
                let generated = generate_scenario_with(&scenario.with_seed(seed));
                (0..configs.len())
                    .map(|ci| {
                        let result = generated.as_ref().map_err(|e| e.to_string()).and_then(|s| {
                            let cfg = SimConfig {
                                rng_seed: placement_seed(seed, configs[ci].rng_seed),
                                ..configs[ci].clone()
                            };
                            if cfg.record_trace {
                                run_traced(&s.map, &s.targets, &cfg)
                                    .map(|(m, t)| (m, Some(t)))
                                    .map_err(|e| e.to_string())
                            } else {
                                run(&s.map, &s.targets, &cfg)
                                    .map(|m| (m, None))
                                    .map_err(|e| e.to_string())
                            }
                        });
                        let (result, trace) = match result {
                            Ok((m, t)) => (Ok(m), t),
                            Err(e) => (Err(e), None),
                        };
                        BatchRow {
                            seed,
                            config_index: ci,
                            result,
                            trace,
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}
