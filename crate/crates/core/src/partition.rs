//! Grid Voronoi partition of the workspace among agents.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::{GridDims, Vec2};
use crate::rays::RegionMask;
use crate::world::{grid_csv, ProbabilityMap};

/// One agent index per cell, aligned with the probability map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiLabeling {
    dims: GridDims,
    labels: Vec<usize>,
    generators: Vec<Vec2>,
}

impl VoronoiLabeling {
    pub fn from_labels(dims: GridDims, labels: Vec<usize>, generators: Vec<Vec2>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(invalid("labels", "grid size mismatch"));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= generators.len()) {
            return Err(invalid("labels", format!("label {l} has no generator")));
        }
        Ok(VoronoiLabeling {
            dims,
            labels,
            generators,
        })
    }

    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> usize {
        self.labels[idx]
    }

    pub fn n_agents(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_positions(&self) -> &[Vec2] {
        &self.generators
    }

    pub fn cells_of(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == agent)
            .map(|(i, _)| i)
    }

    pub fn to_csv(&self) -> String {
        grid_csv(self.dims.width, &self.labels)
    }
}

/// Labels every cell with the generator nearest to its center; equal
/// distances go to the smaller agent index.
pub fn partition(positions: &[Vec2], map: &ProbabilityMap) -> Result<VoronoiLabeling> {
    partition_dims(positions, map.dims())
}

pub fn partition_dims(positions: &[Vec2], dims: &GridDims) -> Result<VoronoiLabeling> {
    if positions.is_empty() {
        return Err(invalid("positions", "at least one agent position is required"));
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(invalid("positions", "non-finite agent position"));
    }
    let labels = (0..dims.len())
        .map(|idx| {
            let c = dims.center(idx);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, &p) in positions.iter().enumerate() {
                let d = (c - p).dot(c - p);
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    Ok(VoronoiLabeling {
        dims: *dims,
        labels,
        generators: positions.to_vec(),
    })
}

/// Static equal-width vertical strips: the Voronoi diagram of `n` generators
/// spaced evenly along the horizontal midline.
pub fn strips(n: usize, dims: &GridDims) -> Result<VoronoiLabeling> {
    let ext = dims.extent();
    let gens: Vec<Vec2> = (0..n)
        .map(|k| Vec2::new((k as f64 + 0.5) * ext.x / n as f64, 0.5 * ext.y))
        .collect();
    partition_dims(&gens, dims)
}

/// Row-major first cell of maximum value among the cells in the region;
/// `None` when every such cell is zero.
pub fn region_argmax(map: &ProbabilityMap, mask: Option<RegionMask<'_>>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, &v) in map.values().iter().enumerate() {
        if v <= 0.0 || mask.is_some_and(|m| !m.owns(idx)) {
            continue;
        }
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((idx, v));
        }
    }
    best.map(|(idx, _)| idx)
}

/// Center of the agent's highest-value cell.
pub fn global_maxima(labeling: &VoronoiLabeling, agent: usize, map: &ProbabilityMap) -> Option<Vec2> {
    region_argmax(map, Some(RegionMask::new(labeling, agent))).map(|idx| map.dims().center(idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(w: usize, h: usize) -> GridDims {
        GridDims {
            width: w,
            height: h,
            cell_size: 1.0,
        }
    }

    #[test]
    fn single_agent_owns_everything() {
        let l = partition_dims(&[Vec2::new(3.0, 1.0)], &dims(8, 6)).unwrap();
        assert!(l.labels().iter().all(|&x| x == 0));
    }

    #[test]
    fn mirror_agents_split_at_midline() {
        let d = dims(9, 4);
        let l = partition_dims(&[Vec2::new(1.5, 2.0), Vec2::new(7.5, 2.0)], &d).unwrap();
        for idx in 0..d.len() {
            let (c, _) = d.col_row(idx);
            let expect = if c <= 4 { 0 } else { 1 };
            assert_eq!(l.label(idx), expect, "cell col {c}");
        }
    }

    #[test]
    fn coincident_agents_go_to_lower_index() {
        let p = Vec2::new(2.0, 2.0);
        let l = partition_dims(&[p, p], &dims(4, 4)).unwrap();
        assert!(l.labels().iter().all(|&x| x == 0));
    }

    #[test]
    fn empty_positions_rejected() {
        assert!(partition_dims(&[], &dims(4, 4)).is_err());
    }

    #[test]
    fn maxima_depleted_and_single_cell() {
        let d = dims(6, 6);
        let l = partition_dims(&[Vec2::new(1.0, 3.0), Vec2::new(5.0, 3.0)], &d).unwrap();
        let mut map = ProbabilityMap::uniform(d, 0.0).unwrap();
        assert_eq!(global_maxima(&l, 0, &map), None);
        map = ProbabilityMap::new(d, {
            let mut v = vec![0.0; 36];
            v[d.index(1, 4)] = 0.3;
            v
        })
        .unwrap();
        assert_eq!(global_maxima(&l, 0, &map), Some(Vec2::new(1.5, 4.5)));
        assert_eq!(global_maxima(&l, 1, &map), None);
    }

    #[test]
    fn strips_are_vertical_bands() {
        let d = dims(12, 5);
        let l = strips(3, &d).unwrap();
        for idx in 0..d.len() {
            assert_eq!(l.label(idx), d.col_row(idx).0 / 4);
        }
    }
}
