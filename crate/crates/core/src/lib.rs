//! Multi-agent active target search over a probabilistic grid prior.
//!
//! Agents split the workspace into Voronoi regions, look ahead along
//! ray-guided actions to pick a local goal (falling back to the region's
//! global maximum), and fly there on kinodynamically feasible quintic
//! trajectories while their sensors deplete the map and discover targets.

pub mod error;
pub mod geom;
pub mod partition;
pub mod planner;
pub mod rays;
pub mod sim;
pub mod strategies;
pub mod trajectory;
pub mod world;

pub use error::{Result, SearchError};
pub use geom::{GridDims, Vec2};
pub use partition::{global_maxima, partition, VoronoiLabeling};
pub use planner::{plan_lookahead, LookaheadPlan, PlannerParams};
pub use rays::{cast_ray, compute_fan, top_directions, RayFan, RegionMask};
pub use sim::{run, run_batch, RunMetrics, SimConfig};
pub use strategies::{next_goal, Strategy, StrategyKind, StrategyName};
pub use trajectory::{generate_feasible, solve_quintic, AgentState, KinoLimits, QuinticTrajectory};
pub use world::{generate_scenario, ProbabilityMap, ScenarioParams, SensorModel, TargetSet};
