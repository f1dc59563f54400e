//! Goal selection: the lookahead strategy and the comparison baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SearchError};
use crate::geom::{GridDims, Vec2};
use crate::partition::region_argmax;
use crate::planner::{plan_lookahead_counted, LookaheadPlan, PlanStats, PlannerParams};
use crate::rays::RegionMask;
use crate::trajectory::AgentState;
use crate::world::{ProbabilityMap, SensorModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    ZigZag,
    GlobalMaxima,
    LocalMaxima,
    HeuristicLocalMaxima,
    Proposed,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::ZigZag,
        StrategyKind::GlobalMaxima,
        StrategyKind::LocalMaxima,
        StrategyKind::HeuristicLocalMaxima,
        StrategyKind::Proposed,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            StrategyKind::ZigZag => "zigzag",
            StrategyKind::GlobalMaxima => "gm",
            StrategyKind::LocalMaxima => "lm",
            StrategyKind::HeuristicLocalMaxima => "hlm",
            StrategyKind::Proposed => "proposed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub local_radius: f64,
    pub radius_growth: f64,
}

impl Strategy {
    pub fn new(kind: StrategyKind) -> Self {
        Strategy {
            kind,
            local_radius: 10.0,
            radius_growth: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.local_radius > 0.0 && self.local_radius.is_finite()) {
            return Err(invalid("local_radius", "must be positive and finite"));
        }
        if !(self.radius_growth > 1.0 && self.radius_growth.is_finite()) {
            return Err(invalid("radius_growth", "must be finite and greater than 1"));
        }
        Ok(())
    }
}

/// Strategy name as used on the command line and in CSV output. A
/// `voronoi+` prefix asks for per-agent Voronoi regions; the proposed method
/// always partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrategyName {
    pub kind: StrategyKind,
    pub use_voronoi: bool,
}

impl StrategyName {
    pub const VALID: [&'static str; 10] = [
        "zigzag",
        "gm",
        "lm",
        "hlm",
        "proposed",
        "voronoi+zigzag",
        "voronoi+gm",
        "voronoi+lm",
        "voronoi+hlm",
        "voronoi+proposed",
    ];
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.use_voronoi && self.kind != StrategyKind::Proposed {
            write!(f, "voronoi+")?;
        }
        f.write_str(self.kind.short_name())
    }
}

impl FromStr for StrategyName {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (use_voronoi, base) = match lower.strip_prefix("voronoi+") {
            Some(rest) => (true, rest),
            None => (false, lower.as_str()),
        };
        let kind = StrategyKind::ALL
            .into_iter()
            .find(|k| k.short_name() == base)
            .ok_or_else(|| {
                invalid(
                    "strategy",
                    format!(
                        "unknown strategy `{s}`; valid names: {}",
                        StrategyName::VALID.join(", ")
                    ),
                )
            })?;
        Ok(StrategyName {
            kind,
            use_voronoi: use_voronoi || kind == StrategyKind::Proposed,
        })
    }
}

/// Result of one goal selection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Decision {
    pub goal: Option<Vec2>,
    /// Local search found nothing within its starting radius.
    pub stuck: bool,
    pub plan: Option<LookaheadPlan>,
    pub stats: PlanStats,
}

impl Decision {
    fn goal(goal: Option<Vec2>) -> Self {
        Decision {
            goal,
            ..Decision::default()
        }
    }
}

fn owns(mask: Option<RegionMask<'_>>, idx: usize) -> bool {
    mask.is_none_or(|m| m.owns(idx))
}

/// Highest-value positive cell of the region whose center is within
/// `radius` of `p` (row-major first on ties).
fn local_argmax(p: Vec2, radius: f64, map: &ProbabilityMap, mask: Option<RegionMask<'_>>) -> Option<usize> {
    let dims = map.dims();
    let s = dims.cell_size;
    let lo = |v: f64| ((v - radius) / s - 0.5).ceil().max(0.0) as usize;
    let hi = |v: f64, n: usize| (((v + radius) / s - 0.5).floor().max(-1.0) + 1.0).min(n as f64) as usize;
    let mut best: Option<(usize, f64)> = None;
    for r in lo(p.y)..hi(p.y, dims.height) {
        for c in lo(p.x)..hi(p.x, dims.width) {
            let idx = dims.index(c, r);
            let v = map.value(idx);
            if v <= 0.0 || !owns(mask, idx) || dims.center(idx).distance(p) > radius {
                continue;
            }
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((idx, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

fn region_reach(p: Vec2, dims: &GridDims) -> f64 {
    let e = dims.extent();
    [Vec2::ZERO, Vec2::new(e.x, 0.0), Vec2::new(0.0, e.y), e]
        .into_iter()
        .map(|c| c.distance(p))
        .fold(0.0, f64::max)
}

pub fn next_goal(
    strategy: &Strategy,
    state: &AgentState,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    planner: &PlannerParams,
    sensor: &SensorModel,
) -> Result<Decision> {
    let dims = map.dims();
    if region_argmax(map, mask).is_none() {
        return Ok(Decision::default());
    }
    let center = |idx: usize| dims.center(idx);
    match strategy.kind {
        StrategyKind::ZigZag => Ok(Decision::goal(zigzag_goal(state.position, map, mask, sensor))),
        StrategyKind::GlobalMaxima => Ok(Decision::goal(region_argmax(map, mask).map(center))),
        StrategyKind::LocalMaxima => {
            let goal = local_argmax(state.position, strategy.local_radius, map, mask).map(center);
            Ok(Decision {
                stuck: goal.is_none(),
                ..Decision::goal(goal)
            })
        }
        StrategyKind::HeuristicLocalMaxima => {
            let reach = region_reach(state.position, dims);
            let mut radius = strategy.local_radius;
            let mut stuck = false;
            loop {
                if let Some(idx) = local_argmax(state.position, radius, map, mask) {
                    return Ok(Decision {
                        stuck,
                        ..Decision::goal(Some(center(idx)))
                    });
                }
                if radius > reach {
                    return Ok(Decision {
                        stuck: true,
                        ..Decision::default()
                    });
                }
                stuck = true;
                radius *= strategy.radius_growth;
            }
        }
        StrategyKind::Proposed => {
            let (plan, stats) = plan_lookahead_counted(state, map, mask, planner)?;
            // the simulated steps may run past the region border; fly to the
            // last waypoint still inside it
            let goal = plan
                .as_ref()
                .and_then(|p| {
                    p.waypoints[1..]
                        .iter()
                        .rev()
                        .find(|w| owns(mask, dims.cell_of(**w)))
                        .copied()
                })
                .or_else(|| region_argmax(map, mask).map(center));
            Ok(Decision {
                goal,
                stuck: false,
                plan,
                stats,
            })
        }
    }
}

/// One boustrophedon lane: flown from `entry` to `exit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub entry: Vec2,
    pub exit: Vec2,
    /// Rows covered by this lane's band, with the region's column extent per row.
    rows: Vec<(usize, usize, usize)>,
}

impl Lane {
    fn mass(&self, map: &ProbabilityMap, mask: Option<RegionMask<'_>>) -> f64 {
        let dims = map.dims();
        self.rows
            .iter()
            .flat_map(|&(r, c0, c1)| (c0..=c1).map(move |c| dims.index(c, r)))
            .filter(|&idx| owns(mask, idx))
            .map(|idx| map.value(idx))
            .sum()
    }

    fn contains(&self, p: Vec2) -> bool {
        const TOL: f64 = 1e-6;
        (p.y - self.entry.y).abs() <= TOL
            && p.x >= self.entry.x.min(self.exit.x) - TOL
            && p.x <= self.entry.x.max(self.exit.x) + TOL
    }
}

/// Lanes parallel to x, `2·half_side` apart, in serpentine order. Each lane is
/// clipped to the column extent of the region rows in its band.
pub fn zigzag_lanes(dims: &GridDims, mask: Option<RegionMask<'_>>, sensor: &SensorModel) -> Vec<Lane> {
    let s = dims.cell_size;
    let extents: Vec<Option<(usize, usize)>> = (0..dims.height)
        .map(|r| {
            let mut cols = (0..dims.width).filter(|&c| owns(mask, dims.index(c, r)));
            let first = cols.next()?;
            Some((first, cols.next_back().unwrap_or(first)))
        })
        .collect();
    let Some(r_min) = extents.iter().position(Option::is_some) else {
        return Vec::new();
    };
    let r_max = extents.iter().rposition(Option::is_some).expect("some row");
    let band = sensor.side();
    let y0 = r_min as f64 * s;
    let n_bands = (((r_max + 1) as f64 * s - y0) / band - 1e-9).ceil().max(1.0) as usize;
    let mut bands: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n_bands];
    for (r, ext) in extents.iter().enumerate() {
        if let Some((c0, c1)) = *ext {
            let k = ((((r as f64 + 0.5) * s - y0) / band).floor() as usize).min(n_bands - 1);
            bands[k].push((r, c0, c1));
        }
    }
    let mut lanes = Vec::new();
    for rows in bands.into_iter().filter(|b| !b.is_empty()) {
        let y_lo = (rows[0].0 as f64 + 0.5) * s;
        let y_hi = (rows[rows.len() - 1].0 as f64 + 0.5) * s;
        let y = 0.5 * (y_lo + y_hi);
        let c0 = rows.iter().map(|r| r.1).min().expect("non-empty");
        let c1 = rows.iter().map(|r| r.2).max().expect("non-empty");
        let (xa, xb) = ((c0 as f64 + 0.5) * s, (c1 as f64 + 0.5) * s);
        let (entry, exit) = if lanes.len() % 2 == 0 {
            (Vec2::new(xa, y), Vec2::new(xb, y))
        } else {
            (Vec2::new(xb, y), Vec2::new(xa, y))
        };
        lanes.push(Lane { entry, exit, rows });
    }
    lanes
}

pub fn zigzag_waypoints(dims: &GridDims, mask: Option<RegionMask<'_>>, sensor: &SensorModel) -> Vec<Vec2> {
    zigzag_lanes(dims, mask, sensor)
        .into_iter()
        .flat_map(|l| [l.entry, l.exit])
        .collect()
}

/// Next point of the sweep: the first lane that still holds mass is entered
/// at its entry point and then flown to its exit.
fn zigzag_goal(
    position: Vec2,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    sensor: &SensorModel,
) -> Option<Vec2> {
    let lanes = zigzag_lanes(map.dims(), mask, sensor);
    let lane = lanes.iter().find(|l| l.mass(map, mask) > 0.0)?;
    if lane.contains(position) && position.distance(lane.exit) > 1e-6 {
        Some(lane.exit)
    } else {
        Some(lane.entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition_dims;

    fn dims(w: usize, h: usize) -> GridDims {
        GridDims {
            width: w,
            height: h,
            cell_size: 1.0,
        }
    }

    fn single_cell_map(d: GridDims, col: usize, row: usize) -> ProbabilityMap {
        let mut v = vec![0.0; d.len()];
        v[d.index(col, row)] = 1.0;
        ProbabilityMap::new(d, v).unwrap()
    }

    #[test]
    fn names_round_trip_and_reject_unknown() {
        for name in StrategyName::VALID {
            let parsed: StrategyName = name.parse().unwrap();
            let shown = parsed.to_string();
            let expect = if name == "voronoi+proposed" { "proposed" } else { name };
            assert_eq!(shown, expect);
        }
        let err = "spiral".parse::<StrategyName>().unwrap_err().to_string();
        assert!(err.contains("voronoi+hlm"), "{err}");
    }

    #[test]
    fn depleted_region_yields_no_goal() {
        let map = ProbabilityMap::uniform(dims(10, 10), 0.0).unwrap();
        let state = AgentState::at_rest(Vec2::new(5.0, 5.0));
        for kind in StrategyKind::ALL {
            let d = next_goal(
                &Strategy::new(kind),
                &state,
                &map,
                None,
                &PlannerParams::default(),
                &SensorModel::default(),
            )
            .unwrap();
            assert_eq!(d.goal, None, "{kind:?}");
        }
    }

    #[test]
    fn lm_gets_stuck_and_hlm_grows() {
        let d = dims(60, 10);
        let map = single_cell_map(d, 25, 5);
        let state = AgentState::at_rest(Vec2::new(5.5, 5.5));
        let lm = Strategy::new(StrategyKind::LocalMaxima);
        let out = next_goal(
            &lm,
            &state,
            &map,
            None,
            &PlannerParams::default(),
            &SensorModel::default(),
        )
        .unwrap();
        assert_eq!(out.goal, None);
        assert!(out.stuck);
        let hlm = Strategy::new(StrategyKind::HeuristicLocalMaxima);
        let out = next_goal(
            &hlm,
            &state,
            &map,
            None,
            &PlannerParams::default(),
            &SensorModel::default(),
        )
        .unwrap();
        assert_eq!(out.goal, Some(Vec2::new(25.5, 5.5)));
        assert!(out.stuck);
    }

    #[test]
    fn gm_picks_region_maximum() {
        let d = dims(20, 10);
        let mut v = vec![0.1; d.len()];
        v[d.index(2, 2)] = 0.9;
        v[d.index(17, 7)] = 0.5;
        let map = ProbabilityMap::new(d, v).unwrap();
        let labels = partition_dims(&[Vec2::new(3.0, 5.0), Vec2::new(16.0, 5.0)], &d).unwrap();
        let gm = Strategy::new(StrategyKind::GlobalMaxima);
        let state = AgentState::at_rest(Vec2::new(16.0, 5.0));
        let out = next_goal(
            &gm,
            &state,
            &map,
            Some(RegionMask::new(&labels, 1)),
            &PlannerParams::default(),
            &SensorModel::default(),
        )
        .unwrap();
        assert_eq!(out.goal, Some(Vec2::new(17.5, 7.5)));
    }

    #[test]
    fn lane_counts() {
        let sensor = SensorModel::new(2.5).unwrap();
        assert_eq!(zigzag_lanes(&dims(30, 50), None, &sensor).len(), 10);
        assert_eq!(zigzag_lanes(&dims(30, 5), None, &sensor).len(), 1);
        assert_eq!(zigzag_lanes(&dims(30, 7), None, &sensor).len(), 2);
    }

    #[test]
    fn zigzag_is_serpentine() {
        let w = zigzag_waypoints(&dims(20, 10), None, &SensorModel::new(2.5).unwrap());
        assert_eq!(
            w,
            vec![
                Vec2::new(0.5, 2.5),
                Vec2::new(19.5, 2.5),
                Vec2::new(19.5, 7.5),
                Vec2::new(0.5, 7.5)
            ]
        );
    }

    #[test]
    fn zigzag_enters_then_flies_lane() {
        let d = dims(20, 10);
        let map = ProbabilityMap::uniform(d, 0.01).unwrap();
        let zz = Strategy::new(StrategyKind::ZigZag);
        let sensor = SensorModel::new(2.5).unwrap();
        let p = PlannerParams::default();
        let out = next_goal(&zz, &AgentState::at_rest(Vec2::new(9.0, 9.0)), &map, None, &p, &sensor).unwrap();
        assert_eq!(out.goal, Some(Vec2::new(0.5, 2.5)));
        let out = next_goal(&zz, &AgentState::at_rest(Vec2::new(0.5, 2.5)), &map, None, &p, &sensor).unwrap();
        assert_eq!(out.goal, Some(Vec2::new(19.5, 2.5)));
    }
}
