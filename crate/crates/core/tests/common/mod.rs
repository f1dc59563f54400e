#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsearch_core::geom::TOUCH_EPS;
use vsearch_core::{GridDims, ProbabilityMap, Vec2};

pub fn dims(w: usize, h: usize) -> GridDims {
    GridDims {
        width: w,
        height: h,
        cell_size: 1.0,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_map(d: GridDims, seed: u64) -> ProbabilityMap {
    let mut r = rng(seed);
    let values = (0..d.len()).map(|_| r.gen_range(0.0..1.0)).collect();
    ProbabilityMap::new(d, values).unwrap()
}

pub fn random_point(r: &mut ChaCha8Rng, d: &GridDims) -> Vec2 {
    let e = d.extent();
    Vec2::new(r.gen_range(0.0..e.x), r.gen_range(0.0..e.y))
}

/// Parameter interval over which segment `a + t(b − a)`, t ∈ [0, 1], lies in
/// the closed cell square grown by the touch slack (Liang–Barsky clip).
pub fn clip(a: Vec2, b: Vec2, d: &GridDims, idx: usize) -> Option<(f64, f64)> {
    let (c, r) = d.col_row(idx);
    let s = d.cell_size;
    let lo = Vec2::new(c as f64 * s - TOUCH_EPS, r as f64 * s - TOUCH_EPS);
    let hi = Vec2::new((c + 1) as f64 * s + TOUCH_EPS, (r + 1) as f64 * s + TOUCH_EPS);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q, l, h) in [(a.x, b.x - a.x, lo.x, hi.x), (a.y, b.y - a.y, lo.y, hi.y)] {
        if q == 0.0 {
            if p < l || p > h {
                return None;
            }
        } else {
            let (u, v) = ((l - p) / q, (h - p) / q);
            t0 = t0.max(u.min(v));
            t1 = t1.min(u.max(v));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Every cell the segment touches, by testing all cells.
pub fn brute_cells(a: Vec2, b: Vec2, d: &GridDims) -> Vec<usize> {
    (0..d.len()).filter(|&i| clip(a, b, d, i).is_some()).collect()
}

/// Whether the center of cell `idx` lies in the closed square of half side
/// `half` around `p`.
pub fn center_in_square(d: &GridDims, idx: usize, p: Vec2, half: f64) -> bool {
    let c = d.center(idx);
    (c.x - p.x).abs() <= half + TOUCH_EPS && (c.y - p.y).abs() <= half + TOUCH_EPS
}
