//! Quintic rest-at-goal trajectories, their effort and feasibility search.
//!
//! Each axis is `J(t) = Σ λ_k t^k, k = 0..5` over `[0, τ]`. The six
//! coefficients are pinned by the start position, velocity and acceleration
//! and by a stop at the goal (zero terminal velocity and acceleration).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SearchError};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

impl AgentState {
    pub fn at_rest(position: Vec2) -> Self {
        AgentState {
            position,
            velocity: Vec2::ZERO,
            acceleration: Vec2::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinoLimits {
    pub v_max: f64,
    pub a_max: f64,
}

impl KinoLimits {
    pub fn new(v_max: f64, a_max: f64) -> Result<Self> {
        let l = KinoLimits { v_max, a_max };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(invalid("v_max", "must be positive and finite"));
        }
        if !(self.a_max > 0.0 && self.a_max.is_finite()) {
            return Err(invalid("a_max", "must be positive and finite"));
        }
        Ok(())
    }
}

impl Default for KinoLimits {
    fn default() -> Self {
        KinoLimits { v_max: 2.0, a_max: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticTrajectory {
    pub coeffs_x: [f64; 6],
    pub coeffs_y: [f64; 6],
    pub duration_s: f64,
}

fn poly(c: &[f64; 6], t: f64) -> (f64, f64, f64) {
    let p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
    let v = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
    let a = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
    (p, v, a)
}

fn axis_coeffs(p0: f64, v0: f64, a0: f64, goal: f64, tau: f64) -> [f64; 6] {
    let h = goal - p0;
    let t2 = tau * tau;
    let t3 = t2 * tau;
    [
        p0,
        v0,
        0.5 * a0,
        (20.0 * h - 12.0 * v0 * tau - 3.0 * a0 * t2) / (2.0 * t3),
        (-30.0 * h + 16.0 * v0 * tau + 3.0 * a0 * t2) / (2.0 * t3 * tau),
        (12.0 * h - 6.0 * v0 * tau - a0 * t2) / (2.0 * t3 * t2),
    ]
}

impl QuinticTrajectory {
    pub fn duration(&self) -> f64 {
        self.duration_s
    }

    /// Position, velocity and acceleration at `t ∈ [0, τ]`.
    pub fn eval(&self, t: f64) -> Result<(Vec2, Vec2, Vec2)> {
        if !(t >= 0.0 && t <= self.duration_s) {
            return Err(SearchError::TimeOutOfRange {
                t,
                duration: self.duration_s,
            });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let (px, vx, ax) = poly(&self.coeffs_x, t);
        let (py, vy, ay) = poly(&self.coeffs_y, t);
        (Vec2::new(px, py), Vec2::new(vx, vy), Vec2::new(ax, ay))
    }

    pub fn start_position(&self) -> Vec2 {
        Vec2::new(self.coeffs_x[0], self.coeffs_y[0])
    }

    pub fn end_position(&self) -> Vec2 {
        self.eval_unchecked(self.duration_s).0
    }

    /// Largest sampled speed and acceleration magnitude over `n + 1` uniform samples.
    pub fn sampled_peaks(&self, n: usize) -> (f64, f64) {
        (0..=n).fold((0.0f64, 0.0f64), |(vm, am), i| {
            let (_, v, a) = self.eval_unchecked(self.duration_s * i as f64 / n as f64);
            (vm.max(v.norm()), am.max(a.norm()))
        })
    }

    pub fn satisfies(&self, limits: &KinoLimits, n: usize) -> bool {
        (0..=n).all(|i| {
            let (_, v, a) = self.eval_unchecked(self.duration_s * i as f64 / n as f64);
            v.norm() <= limits.v_max && a.norm() <= limits.a_max
        })
    }

    /// Time-stamped positions spaced at most `interval` apart in arc length,
    /// given that speed never exceeds `speed_bound`.
    pub fn sweep_samples(&self, interval: f64, speed_bound: f64) -> Vec<(f64, Vec2)> {
        let n = ((self.duration_s * speed_bound / interval).ceil() as usize).max(1);
        (0..=n)
            .map(|i| {
                let t = self.duration_s * i as f64 / n as f64;
                (t, self.eval_unchecked(t).0)
            })
            .collect()
    }
}

/// The unique per-axis quintic from `start` to a stop at `goal` in `duration`.
pub fn solve_quintic(start: &AgentState, goal: Vec2, duration: f64) -> Result<QuinticTrajectory> {
    if !(start.position.is_finite()
        && start.velocity.is_finite()
        && start.acceleration.is_finite()
        && goal.is_finite()
        && duration.is_finite())
    {
        return Err(SearchError::NonFinite("quintic boundary conditions"));
    }
    if duration <= 0.0 {
        return Err(invalid("duration", "must be positive"));
    }
    Ok(QuinticTrajectory {
        coeffs_x: axis_coeffs(
            start.position.x,
            start.velocity.x,
            start.acceleration.x,
            goal.x,
            duration,
        ),
        coeffs_y: axis_coeffs(
            start.position.y,
            start.velocity.y,
            start.acceleration.y,
            goal.y,
            duration,
        ),
        duration_s: duration,
    })
}

fn axis_energy(c: &[f64; 6], tau: f64) -> f64 {
    // J'' = Σ a_i t^i with a = (2λ2, 6λ3, 12λ4, 20λ5)
    let a = [2.0 * c[2], 6.0 * c[3], 12.0 * c[4], 20.0 * c[5]];
    let mut e = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let k = (i + j + 1) as i32;
            e += a[i] * a[j] * tau.powi(k) / k as f64;
        }
    }
    e
}

/// `∫₀^τ ‖J″(t)‖² dt`, exact from the coefficients.
pub fn trajectory_energy(traj: &QuinticTrajectory) -> f64 {
    axis_energy(&traj.coeffs_x, traj.duration_s) + axis_energy(&traj.coeffs_y, traj.duration_s)
}

/// Path length `∫‖J′‖ dt` by composite Simpson over 1 000 intervals.
pub fn arc_length(traj: &QuinticTrajectory) -> f64 {
    arc_length_with(traj, 1000)
}

pub fn arc_length_with(traj: &QuinticTrajectory, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = traj.duration_s / n as f64;
    let speed = |i: usize| traj.eval_unchecked(h * i as f64).1.norm();
    let mut s = speed(0) + speed(n);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * speed(i);
    }
    s * h / 3.0
}

pub const DURATION_GROWTH: f64 = 1.2;
pub const MAX_LADDER_STEPS: i32 = 40;
pub const FEASIBILITY_SAMPLES: usize = 100;

/// Smallest duration `min_duration · 1.2^k, k ≤ 40`, whose trajectory keeps
/// speed and acceleration within limits at 101 uniform samples.
pub fn generate_feasible(
    start: &AgentState,
    goal: Vec2,
    min_duration: f64,
    limits: &KinoLimits,
) -> Result<QuinticTrajectory> {
    if !(min_duration > 0.0 && min_duration.is_finite()) {
        return Err(invalid("min_duration", "must be positive and finite"));
    }
    limits.validate()?;
    for k in 0..=MAX_LADDER_STEPS {
        let tau = min_duration * DURATION_GROWTH.powi(k);
        let traj = solve_quintic(start, goal, tau)?;
        if traj.satisfies(limits, FEASIBILITY_SAMPLES) {
            return Ok(traj);
        }
    }
    Err(SearchError::Infeasible {
        max_duration: min_duration * DURATION_GROWTH.powi(MAX_LADDER_STEPS),
        gx: goal.x,
        gy: goal.y,
    })
}
