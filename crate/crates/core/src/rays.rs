//! Uniform ray fans around an agent and their normalized information gain.
//!
//! Each ray starts at the agent and runs to the map border, or, when a region
//! mask is supplied, up to (not including) the first cell labeled to another
//! agent. A ray's raw value is the plain sum of the cells it crosses.

use std::f64::consts::TAU;
use std::ops::ControlFlow;

use crate::error::{Result, SearchError};
use crate::geom::{visit_supercover, GridDims, Vec2};
use crate::partition::VoronoiLabeling;
use crate::world::ProbabilityMap;

/// Restricts rays to the cells labeled to `agent`.
#[derive(Debug, Clone, Copy)]
pub struct RegionMask<'a> {
    pub labeling: &'a VoronoiLabeling,
    pub agent: usize,
}

impl<'a> RegionMask<'a> {
    pub fn new(labeling: &'a VoronoiLabeling, agent: usize) -> Self {
        RegionMask { labeling, agent }
    }

    pub fn owns(&self, idx: usize) -> bool {
        self.labeling.label(idx) == self.agent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayFan {
    pub origin: Vec2,
    pub angles: Vec<f64>,
    pub raw_sums: Vec<f64>,
    pub gains: Vec<f64>,
}

impl RayFan {
    pub fn n_rays(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.iter().all(|&g| g == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayCast {
    pub cells: Vec<usize>,
    pub raw_sum: f64,
}

pub fn ray_angle(j: usize, n_rays: usize) -> f64 {
    TAU * j as f64 / n_rays as f64
}

/// End point of the ray from `origin` along `angle` on the workspace border.
fn border_hit(origin: Vec2, angle: f64, dims: &GridDims) -> Vec2 {
    let dir = Vec2::from_angle(angle);
    let ext = dims.extent();
    let reach = |o: f64, d: f64, hi: f64| {
        if d > 0.0 {
            (hi - o) / d
        } else if d < 0.0 {
            -o / d
        } else {
            f64::INFINITY
        }
    };
    let t = reach(origin.x, dir.x, ext.x).min(reach(origin.y, dir.y, ext.y));
    dims.clamp(origin + dir * t)
}

pub fn cast_ray(origin: Vec2, angle: f64, map: &ProbabilityMap, mask: Option<RegionMask<'_>>) -> Result<RayCast> {
    let mut cast = RayCast {
        cells: Vec::new(),
        raw_sum: 0.0,
    };
    cast_ray_with(origin, angle, map, mask, |idx, v| {
        cast.cells.push(idx);
        cast.raw_sum += v;
    })?;
    Ok(cast)
}

/// Walks the ray, handing each credited cell and its value to `visit`.
/// Returns the raw sum.
pub(crate) fn cast_ray_with<F>(
    origin: Vec2,
    angle: f64,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    mut visit: F,
) -> Result<f64>
where
    F: FnMut(usize, f64),
{
    let dims = map.dims();
    if !dims.contains(origin) {
        return Err(SearchError::OutsideWorkspace {
            x: origin.x,
            y: origin.y,
        });
    }
    let end = border_hit(origin, angle, dims);
    let mut sum = 0.0;
    visit_supercover(origin, end, dims, |idx| {
        if let Some(m) = mask {
            if !m.owns(idx) {
                return ControlFlow::Break(());
            }
        }
        let v = map.value(idx);
        sum += v;
        visit(idx, v);
        ControlFlow::Continue(())
    });
    Ok(sum)
}

pub fn compute_fan(origin: Vec2, n_rays: usize, map: &ProbabilityMap, mask: Option<RegionMask<'_>>) -> Result<RayFan> {
    let mut visited = 0u64;
    compute_fan_counted(origin, n_rays, map, mask, &mut visited)
}

pub(crate) fn compute_fan_counted(
    origin: Vec2,
    n_rays: usize,
    map: &ProbabilityMap,
    mask: Option<RegionMask<'_>>,
    cells_visited: &mut u64,
) -> Result<RayFan> {
    if n_rays < 2 {
        return Err(crate::error::invalid("n_rays", "need at least 2 rays"));
    }
    let angles: Vec<f64> = (0..n_rays).map(|j| ray_angle(j, n_rays)).collect();
    let mut raw_sums = Vec::with_capacity(n_rays);
    for &angle in &angles {
        let mut count = 0u64;
        raw_sums.push(cast_ray_with(origin, angle, map, mask, |_, _| count += 1)?);
        *cells_visited += count;
    }
    let total: f64 = raw_sums.iter().sum();
    let gains = if total > 0.0 {
        raw_sums.iter().map(|s| s / total).collect()
    } else {
        vec![0.0; n_rays]
    };
    Ok(RayFan {
        origin,
        angles,
        raw_sums,
        gains,
    })
}

/// Indices of the `n_a` rays with the largest gain, best first; equal gains
/// keep the smaller angle first. Empty when every gain is zero.
pub fn top_direction_indices(fan: &RayFan, n_a: usize) -> Vec<usize> {
    if fan.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..fan.n_rays()).collect();
    order.sort_by(|&i, &j| fan.gains[j].total_cmp(&fan.gains[i]).then(i.cmp(&j)));
    order.truncate(n_a.min(fan.n_rays()));
    order
}

pub fn top_directions(fan: &RayFan, n_a: usize) -> Vec<f64> {
    top_direction_indices(fan, n_a)
        .into_iter()
        .map(|j| fan.angles[j])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::GridDims;

    fn dims(w: usize, h: usize) -> GridDims {
        GridDims {
            width: w,
            height: h,
            cell_size: 1.0,
        }
    }

    fn fan_with_gains(gains: &[f64]) -> RayFan {
        let n = gains.len();
        RayFan {
            origin: Vec2::ZERO,
            angles: (0..n).map(|j| ray_angle(j, n)).collect(),
            raw_sums: gains.to_vec(),
            gains: gains.to_vec(),
        }
    }

    #[test]
    fn axis_ray_sums_uniform_cells() {
        let map = ProbabilityMap::uniform(dims(12, 5), 0.25).unwrap();
        let cast = cast_ray(Vec2::new(0.5, 2.5), 0.0, &map, None).unwrap();
        assert_eq!(cast.cells.len(), 12);
        assert!((cast.raw_sum - 0.25 * 12.0).abs() < 1e-12);
    }

    #[test]
    fn origin_outside_rejected() {
        let map = ProbabilityMap::uniform(dims(4, 4), 1.0).unwrap();
        assert!(matches!(
            cast_ray(Vec2::new(-1.0, 2.0), 0.0, &map, None),
            Err(SearchError::OutsideWorkspace { .. })
        ));
    }

    #[test]
    fn mask_of_origin_cell_only_yields_one_cell() {
        let d = dims(5, 5);
        let map = ProbabilityMap::uniform(d, 1.0).unwrap();
        let mut labels = vec![1usize; 25];
        labels[d.index(2, 2)] = 0;
        let labeling = VoronoiLabeling::from_labels(d, labels, vec![Vec2::new(2.5, 2.5), Vec2::ZERO]).unwrap();
        for j in 0..8 {
            let cast = cast_ray(
                Vec2::new(2.5, 2.5),
                ray_angle(j, 8),
                &map,
                Some(RegionMask::new(&labeling, 0)),
            )
            .unwrap();
            assert_eq!(cast.cells, vec![d.index(2, 2)]);
        }
    }

    #[test]
    fn uniform_map_four_rays_equal_gains() {
        let map = ProbabilityMap::uniform(dims(9, 9), 1.0).unwrap();
        let fan = compute_fan(Vec2::new(4.5, 4.5), 4, &map, None).unwrap();
        for g in &fan.gains {
            assert!((g - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn all_mass_on_ray_zero() {
        let d = dims(10, 10);
        let mut values = vec![0.0; 100];
        for c in 6..10 {
            values[d.index(c, 4)] = 1.0;
        }
        let map = ProbabilityMap::new(d, values).unwrap();
        let fan = compute_fan(Vec2::new(4.5, 4.5), 8, &map, None).unwrap();
        assert_eq!(fan.gains[0], 1.0);
        assert!(fan.gains[1..].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn depleted_map_gives_zero_fan() {
        let map = ProbabilityMap::uniform(dims(6, 6), 0.0).unwrap();
        let fan = compute_fan(Vec2::new(3.0, 3.0), 36, &map, None).unwrap();
        assert!(fan.is_empty());
        assert!(top_directions(&fan, 3).is_empty());
    }

    #[test]
    fn top_directions_order_and_ties() {
        let fan = fan_with_gains(&[0.5, 0.3, 0.2]);
        assert_eq!(top_direction_indices(&fan, 2), vec![0, 1]);
        let flat = fan_with_gains(&[0.125; 8]);
        assert_eq!(top_direction_indices(&flat, 3), vec![0, 1, 2]);
        assert_eq!(top_directions(&flat, 3), vec![0.0, ray_angle(1, 8), ray_angle(2, 8)]);
    }
}
