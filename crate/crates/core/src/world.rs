//! Workspace grid, probability prior, targets, sensor footprint and depletion.

use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SearchError};
use crate::geom::{GridDims, Vec2};

/// Nonnegative value per cell over the workspace. Depletion only ever lowers
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMap {
    dims: GridDims,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(dims: GridDims, values: Vec<f64>) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 {
            return Err(invalid("dims", "width and height must be at least 1"));
        }
        if !(dims.cell_size > 0.0 && dims.cell_size.is_finite()) {
            return Err(invalid("cell_size", "must be positive and finite"));
        }
        if values.len() != dims.len() {
            return Err(invalid(
                "values",
                format!("expected {} values, got {}", dims.len(), values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(
                "values",
                format!("cell value {v} is not a finite nonnegative number"),
            ));
        }
        Ok(ProbabilityMap { dims, values })
    }

    pub fn uniform(dims: GridDims, value: f64) -> Result<Self> {
        Self::new(dims, vec![value; dims.len()])
    }

    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn cell_size(&self) -> f64 {
        self.dims.cell_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_exhausted(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Multiplies every value by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        ProbabilityMap {
            dims: self.dims,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub(crate) fn zero(&mut self, idx: usize) {
        self.values[idx] = 0.0;
    }

    /// Row-major CSV, row 0 (smallest y) first.
    pub fn to_csv(&self) -> String {
        grid_csv(self.dims.width, &self.values)
    }
}

pub(crate) fn grid_csv<T: std::fmt::Display>(width: usize, values: &[T]) -> String {
    let mut out = String::new();
    for row in values.chunks(width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Square sensor footprint centred on the agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    half_side: f64,
}

impl SensorModel {
    pub fn new(half_side: f64) -> Result<Self> {
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(invalid("half_side", "must be positive and finite"));
        }
        Ok(SensorModel { half_side })
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    /// Spacing between sweep samples. Consecutive footprints overlap by all
    /// but this much, so a skipped cell can only be a sliver at the edge.
    pub fn sweep_interval(&self, cell_size: f64) -> f64 {
        cell_size.min(self.half_side) / 2.0
    }
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel { half_side: 2.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    positions: Vec<Vec2>,
    found: Vec<bool>,
    found_count: usize,
}

impl TargetSet {
    pub fn new(positions: Vec<Vec2>) -> Self {
        let n = positions.len();
        TargetSet {
            positions,
            found: vec![false; n],
            found_count: 0,
        }
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn total(&self) -> usize {
        self.positions.len()
    }

    pub fn found_count(&self) -> usize {
        self.found_count
    }

    pub fn is_found(&self, i: usize) -> bool {
        self.found[i]
    }

    pub fn all_found(&self) -> bool {
        self.found_count == self.positions.len()
    }

    /// Marks target `i` found. Returns false if it already was.
    pub fn mark_found(&mut self, i: usize) -> bool {
        if self.found[i] {
            return false;
        }
        self.found[i] = true;
        self.found_count += 1;
        true
    }
}

/// Parameters of the elevation → occurrence-rate mapping
/// `λ(e) = exp(a − b·|e − e_star|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    pub a: f64,
    pub b: f64,
    pub e_star: f64,
}

impl RateParams {
    pub fn rate(&self, elevation: f64) -> f64 {
        (self.a - self.b * (elevation - self.e_star).abs()).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.e_star.is_finite()) {
            return Err(invalid("rate_params", "a and e_star must be finite"));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(invalid("rate_params.b", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

impl Default for RateParams {
    fn default() -> Self {
        RateParams {
            a: 0.0,
            b: 5.5,
            e_star: 1.5,
        }
    }
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub seed: u64,
    pub width_cells: usize,
    pub height_cells: usize,
    pub cell_size_m: f64,
    pub n_targets: usize,
    #[serde(default)]
    pub rate_params: RateParams,
}

impl ScenarioParams {
    pub fn new(seed: u64, width_cells: usize, height_cells: usize, cell_size_m: f64, n_targets: usize) -> Self {
        ScenarioParams {
            seed,
            width_cells,
            height_cells,
            cell_size_m,
            n_targets,
            rate_params: RateParams::default(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ScenarioParams { seed, ..self.clone() }
    }

    pub fn dims(&self) -> GridDims {
        GridDims {
            width: self.width_cells,
            height: self.height_cells,
            cell_size: self.cell_size_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElevationScenario {
    pub dims: GridDims,
    pub elevation: Vec<f64>,
    pub rng_seed: u64,
    pub target_count: usize,
    pub rate_params: RateParams,
}

impl ElevationScenario {
    /// Per-cell occurrence rate λ.
    pub fn rate_field(&self) -> Vec<f64> {
        self.elevation.iter().map(|&e| self.rate_params.rate(e)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub map: ProbabilityMap,
    pub targets: TargetSet,
    pub elevation: ElevationScenario,
}

pub fn generate_scenario(seed: u64, width: usize, height: usize, cell_size: f64, n_targets: usize) -> Result<Scenario> {
    generate_scenario_with(&ScenarioParams::new(seed, width, height, cell_size, n_targets))
}

/// Synthesizes a smooth elevation field from 4–8 seeded raised-cosine bumps,
/// then derives the prior and the ground-truth targets from it.
pub fn generate_scenario_with(params: &ScenarioParams) -> Result<Scenario> {
    let dims = params.dims();
    validate_dims(&dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let extent = dims.extent();
    let span = extent.x.min(extent.y);
    let n_bumps = rng.gen_range(4..=8);
    let bumps: Vec<(Vec2, f64, f64)> = (0..n_bumps)
        .map(|_| {
            let center = Vec2::new(rng.gen_range(0.0..extent.x), rng.gen_range(0.0..extent.y));
            let radius = rng.gen_range(0.15..0.45) * span;
            let amplitude = rng.gen_range(1.0..3.0);
            (center, radius, amplitude)
        })
        .collect();
    let elevation = (0..dims.len())
        .map(|idx| {
            let p = dims.center(idx);
            bumps
                .iter()
                .map(|&(c, r, amp)| {
                    let u = (p.distance(c) / r).min(1.0);
                    amp * 0.5 * (1.0 + (std::f64::consts::PI * u).cos())
                })
                .sum()
        })
        .collect();
    // targets draw from a stream independent of the terrain draws
    scenario_from_elevation(
        dims,
        elevation,
        params.rate_params,
        params.seed ^ 0x9E37_79B9_7F4A_7C15,
        params.n_targets,
    )
}

/// Builds the normalized prior and samples `n_targets` distinct cells with
/// probability proportional to λ, placing each target uniformly inside its cell.
pub fn scenario_from_elevation(
    dims: GridDims,
    elevation: Vec<f64>,
    rate_params: RateParams,
    seed: u64,
    n_targets: usize,
) -> Result<Scenario> {
    validate_dims(&dims)?;
    rate_params.validate()?;
    if elevation.len() != dims.len() {
        return Err(invalid("elevation", "grid size does not match dimensions"));
    }
    if n_targets == 0 {
        return Err(invalid("n_targets", "must be at least 1"));
    }
    if n_targets > dims.len() {
        return Err(SearchError::TooManyTargets {
            requested: n_targets,
            cells: dims.len(),
        });
    }
    let scenario = ElevationScenario {
        dims,
        elevation,
        rng_seed: seed,
        target_count: n_targets,
        rate_params,
    };
    let rates = scenario.rate_field();
    let total: f64 = rates.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(invalid("rate_params", "rate field has no finite positive mass"));
    }
    let map = ProbabilityMap::new(dims, rates.iter().map(|r| r / total).collect())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = sample_weighted(&mut rng, dims.len(), |i| rates[i], n_targets)
        .map_err(|e| invalid("rate_params", e.to_string()))?;
    let positions = cells
        .into_iter()
        .map(|idx| {
            let (c, r) = dims.col_row(idx);
            let s = dims.cell_size;
            Vec2::new((c as f64 + rng.gen::<f64>()) * s, (r as f64 + rng.gen::<f64>()) * s)
        })
        .collect();
    Ok(Scenario {
        map,
        targets: TargetSet::new(positions),
        elevation: scenario,
    })
}

fn validate_dims(dims: &GridDims) -> Result<()> {
    if dims.width == 0 || dims.height == 0 {
        return Err(invalid("dims", "width and height must be at least 1"));
    }
    if !(dims.cell_size > 0.0 && dims.cell_size.is_finite()) {
        return Err(invalid("cell_size_m", "must be positive and finite"));
    }
    Ok(())
}

/// Cells whose centers lie within the closed sensor square around `position`,
/// clipped to the map.
pub fn sensed_cells(position: Vec2, sensor: &SensorModel, map: &ProbabilityMap) -> Vec<usize> {
    let dims = map.dims();
    let Some((c0, c1, r0, r1)) = dims.centers_within(position, sensor.half_side()) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity((c1 - c0 + 1) * (r1 - r0 + 1));
    for r in r0..=r1 {
        for c in c0..=c1 {
            out.push(dims.index(c, r));
        }
    }
    out
}

/// True when `target` is detected from `position`: the sensor resolves the
/// map per cell, so a target is seen exactly when its cell is sensed.
pub fn detects(position: Vec2, target: Vec2, sensor: &SensorModel, dims: &GridDims) -> bool {
    let center = dims.center(dims.cell_of(target));
    let h = sensor.half_side() + crate::geom::TOUCH_EPS * dims.cell_size;
    (center.x - position.x).abs() <= h && (center.y - position.y).abs() <= h
}

/// Flags every unfound target detected from any swept position. Returns the
/// indices that changed from unfound to found.
pub fn update_found(targets: &mut TargetSet, swept: &[Vec2], sensor: &SensorModel, dims: &GridDims) -> Vec<usize> {
    let mut newly = Vec::new();
    for i in 0..targets.total() {
        if targets.is_found(i) {
            continue;
        }
        let t = targets.positions[i];
        if swept.iter().any(|&p| detects(p, t, sensor, dims)) {
            targets.mark_found(i);
            newly.push(i);
        }
    }
    newly
}

/// Zeroes every cell sensed from any swept position; other cells keep their value.
pub fn deplete(map: &mut ProbabilityMap, swept: &[Vec2], sensor: &SensorModel) {
    let dims = *map.dims();
    for &p in swept {
        if let Some((c0, c1, r0, r1)) = dims.centers_within(p, sensor.half_side()) {
            for r in r0..=r1 {
                for c in c0..=c1 {
                    map.zero(dims.index(c, r));
                }
            }
        }
    }
}

/// Evenly spaced points on the segment `a → b`, endpoints included, spaced by
/// at most `interval`.
pub fn sample_segment(a: Vec2, b: Vec2, interval: f64) -> Vec<Vec2> {
    let n = ((a.distance(b) / interval).ceil() as usize).max(1);
    (0..=n).map(|i| a + (b - a) * (i as f64 / n as f64)).collect()
}
