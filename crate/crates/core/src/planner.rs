//! Depth-N lookahead over ray-guided actions.
//!
//! At every tree node the agent casts a fan of rays, keeps the `n_actions`
//! directions with the highest gain and forward-simulates one step of
//! uniformly accelerated motion towards each. A step's reward is the map mass
//! on the cells its segment crosses, where cells already credited earlier on
//! the same branch count nothing. Transitions are deterministic, so the
//! optimal policy is found by exhaustive backward induction over the tree.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SearchError};
use crate::geom::{visit_supercover, GridDims, Vec2};
use crate::rays::{compute_fan_counted, ray_angle, top_direction_indices, RegionMask};
use crate::trajectory::{AgentState, KinoLimits};
use crate::world::ProbabilityMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    pub n_steps: usize,
    pub step_time: f64,
    pub n_rays: usize,
    pub n_actions: usize,
    pub discount: f64,
    pub limits: KinoLimits,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            n_steps: 5,
            step_time: 1.5,
            n_rays: 36,
            n_actions: 3,
            discount: 0.95,
            limits: KinoLimits::default(),
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        if !(self.step_time > 0.0 && self.step_time.is_finite()) {
            return Err(invalid("step_time", "must be positive and finite"));
        }
        if self.n_rays < 2 {
            return Err(invalid("n_rays", "must be at least 2"));
        }
        if self.n_actions < 1 || self.n_actions > self.n_rays {
            return Err(invalid("n_actions", "must lie in 1..=n_rays"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(invalid("discount", "must lie in (0, 1]"));
        }
        self.limits.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookaheadPlan {
    pub waypoints: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub actions: Vec<f64>,
    pub action_indices: Vec<usize>,
    pub rewards: Vec<f64>,
    pub total_reward: f64,
    pub terminal: Vec2,
}

/// Work done while planning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlanStats {
    pub nodes: u64,
    pub cells_visited: u64,
}

pub fn terminal_velocity(angle: f64, v_max: f64) -> Vec2 {
    Vec2::new(v_max * angle.cos(), v_max * angle.sin())
}

/// One step of uniformly accelerated motion towards `angle`:
/// `p' = p + T·(v + v_s)/2`, clamped to the workspace, with `v' = v_s`.
pub fn step_simulate(
    position: Vec2,
    velocity: Vec2,
    angle: f64,
    params: &PlannerParams,
    dims: &GridDims,
) -> (Vec2, Vec2) {
    let v_next = terminal_velocity(angle, params.limits.v_max);
    let p_next = position + (velocity + v_next) * (0.5 * params.step_time);
    (dims.clamp(p_next), v_next)
}

/// Mass on the cells crossed by `from → to` that are not yet in `visited`
/// (and, with a mask, belong to the agent). Credited cells are appended to
/// `visited`.
pub fn action_reward(
    from: Vec2,
    to: Vec2,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    visited: &mut Vec<usize>,
) -> f64 {
    let mut count = 0;
    action_reward_counted(from, to, map, mask, visited, &mut count)
}

fn action_reward_counted(
    from: Vec2,
    to: Vec2,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    visited: &mut Vec<usize>,
    cells_visited: &mut u64,
) -> f64 {
    let start = visited.len();
    let mut reward = 0.0;
    visit_supercover(from, to, map.dims(), |idx| {
        *cells_visited += 1;
        if mask.is_some_and(|m| !m.owns(idx)) || visited[..start].contains(&idx) {
            return ControlFlow::Continue(());
        }
        reward += map.value(idx);
        visited.push(idx);
        ControlFlow::Continue(())
    });
    reward
}

struct Branch {
    indices: Vec<usize>,
    waypoints: Vec<Vec2>,
    velocities: Vec<Vec2>,
    rewards: Vec<f64>,
}

struct Best {
    value: f64,
    indices: Vec<usize>,
    waypoints: Vec<Vec2>,
    velocities: Vec<Vec2>,
    rewards: Vec<f64>,
}

struct Search<'a> {
    map: &'a ProbabilityMap,
    mask: Option<RegionMask<'a>>,
    params: &'a PlannerParams,
    stats: PlanStats,
    best: Option<Best>,
}

impl Search<'_> {
    fn offer(&mut self, value: f64, branch: &Branch) {
        let better = match &self.best {
            None => true,
            Some(b) => value > b.value || (value == b.value && branch.indices < b.indices),
        };
        if better {
            self.best = Some(Best {
                value,
                indices: branch.indices.clone(),
                waypoints: branch.waypoints.clone(),
                velocities: branch.velocities.clone(),
                rewards: branch.rewards.clone(),
            });
        }
    }

    fn expand(&mut self, depth: usize, value: f64, branch: &mut Branch, visited: &mut Vec<usize>) -> Result<()> {
        self.stats.nodes += 1;
        if depth == self.params.n_steps {
            self.offer(value, branch);
            return Ok(());
        }
        let pos = *branch.waypoints.last().expect("branch has a root");
        let vel = *branch.velocities.last().expect("branch has a root");
        let fan = compute_fan_counted(
            pos,
            self.params.n_rays,
            self.map,
            self.mask,
            &mut self.stats.cells_visited,
        )?;
        let dirs = top_direction_indices(&fan, self.params.n_actions);
        if dirs.is_empty() {
            self.offer(value, branch);
            return Ok(());
        }
        let weight = self.params.discount.powi(depth as i32);
        for j in dirs {
            let angle = ray_angle(j, self.params.n_rays);
            let (p_next, v_next) = step_simulate(pos, vel, angle, self.params, self.map.dims());
            let mark = visited.len();
            let r = action_reward_counted(pos, p_next, self.map, self.mask, visited, &mut self.stats.cells_visited);
            branch.indices.push(j);
            branch.waypoints.push(p_next);
            branch.velocities.push(v_next);
            branch.rewards.push(r);
            self.expand(depth + 1, value + weight * r, branch, visited)?;
            branch.indices.pop();
            branch.waypoints.pop();
            branch.velocities.pop();
            branch.rewards.pop();
            visited.truncate(mark);
        }
        Ok(())
    }
}

/// Best discounted action sequence from `state`, or `None` when there is
/// nothing to gain within the horizon.
pub fn plan_lookahead(
    state: &AgentState,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    params: &PlannerParams,
) -> Result<Option<LookaheadPlan>> {
    plan_lookahead_counted(state, map, mask, params).map(|(plan, _)| plan)
}

pub fn plan_lookahead_counted(
    state: &AgentState,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    params: &PlannerParams,
) -> Result<(Option<LookaheadPlan>, PlanStats)> {
    params.validate()?;
    if !map.dims().contains(state.position) {
        return Err(SearchError::OutsideWorkspace {
            x: state.position.x,
            y: state.position.y,
        });
    }
    let mut search = Search {
        map,
        mask,
        params,
        stats: PlanStats::default(),
        best: None,
    };
    let mut branch = Branch {
        indices: Vec::with_capacity(params.n_steps),
        waypoints: vec![state.position],
        velocities: vec![state.velocity],
        rewards: Vec::with_capacity(params.n_steps),
    };
    search.expand(0, 0.0, &mut branch, &mut Vec::new())?;
    let stats = search.stats;
    let plan = search.best.filter(|b| !b.indices.is_empty() && b.value > 0.0).map(|b| {
        let terminal = *b.waypoints.last().expect("non-empty");
        LookaheadPlan {
            actions: b.indices.iter().map(|&j| ray_angle(j, params.n_rays)).collect(),
            action_indices: b.indices,
            total_reward: b.value,
            terminal,
            waypoints: b.waypoints,
            velocities: b.velocities,
            rewards: b.rewards,
        }
    });
    Ok((plan, stats))
}
