//! Planar vectors and grid geometry shared by the map, ray and planner modules.

use std::ops::ControlFlow;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Slack used when deciding whether a segment touches a cell's closed square.
pub const TOUCH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Shape of a uniform grid anchored at the origin. Cell `(col, row)` covers
/// `[col·s, (col+1)·s) × [row·s, (row+1)·s)`; indices are row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
}

impl GridDims {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> Vec2 {
        Vec2::new(self.width as f64 * self.cell_size, self.height as f64 * self.cell_size)
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn col_row(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    pub fn center(&self, idx: usize) -> Vec2 {
        let (c, r) = self.col_row(idx);
        Vec2::new((c as f64 + 0.5) * self.cell_size, (r as f64 + 0.5) * self.cell_size)
    }

    /// Closed workspace rectangle test.
    pub fn contains(&self, p: Vec2) -> bool {
        let e = self.extent();
        p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= e.x && p.y <= e.y
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        let e = self.extent();
        Vec2::new(p.x.clamp(0.0, e.x), p.y.clamp(0.0, e.y))
    }

    /// Cell holding `p`; points on the far border map to the last cell.
    pub fn cell_of(&self, p: Vec2) -> usize {
        let c = ((p.x / self.cell_size).floor().max(0.0) as usize).min(self.width - 1);
        let r = ((p.y / self.cell_size).floor().max(0.0) as usize).min(self.height - 1);
        self.index(c, r)
    }

    /// Inclusive column/row span of cells whose centers lie in the closed
    /// axis-aligned square of half side `half` around `p`. `None` when the
    /// square misses every center.
    pub fn centers_within(&self, p: Vec2, half: f64) -> Option<(usize, usize, usize, usize)> {
        let s = self.cell_size;
        let span = |lo: f64, hi: f64, n: usize| -> Option<(usize, usize)> {
            // center k at (k + 0.5)s lies in [lo, hi]
            let first = ((lo / s) - 0.5 - TOUCH_EPS).ceil().max(0.0);
            let last = ((hi / s) - 0.5 + TOUCH_EPS).floor();
            if last < 0.0 || first > last || first >= n as f64 {
                return None;
            }
            Some((first as usize, (last as usize).min(n - 1)))
        };
        let (c0, c1) = span(p.x - half, p.x + half, self.width)?;
        let (r0, r1) = span(p.y - half, p.y + half, self.height)?;
        Some((c0, c1, r0, r1))
    }
}

/// Visits every cell whose closed square (grown by [`TOUCH_EPS`]) meets the
/// closed segment `a → b`, in travel order: columns along the x direction of
/// travel, rows within a column along the y direction. Cells outside the grid
/// are skipped. The visitor may stop the walk early.
pub fn visit_supercover<F>(a: Vec2, b: Vec2, dims: &GridDims, mut visit: F)
where
    F: FnMut(usize) -> ControlFlow<()>,
{
    let s = dims.cell_size;
    let eps = TOUCH_EPS;
    let d = b - a;
    let (x_lo, x_hi) = (a.x.min(b.x), a.x.max(b.x));
    let col_first = ((x_lo - eps) / s).floor() as i64 - 1;
    let col_last = ((x_hi + eps) / s).floor() as i64 + 1;
    let col_first = col_first.max(0);
    let col_last = col_last.min(dims.width as i64 - 1);
    if col_first > col_last {
        return;
    }
    for k in 0..=(col_last - col_first) {
        let col = if d.x >= 0.0 { col_first + k } else { col_last - k };
        let slab_lo = col as f64 * s - eps;
        let slab_hi = (col + 1) as f64 * s + eps;
        let (t0, t1) = if d.x == 0.0 {
            if a.x < slab_lo || a.x > slab_hi {
                continue;
            }
            (0.0, 1.0)
        } else {
            let ta = (slab_lo - a.x) / d.x;
            let tb = (slab_hi - a.x) / d.x;
            (ta.min(tb).max(0.0), ta.max(tb).min(1.0))
        };
        if t0 > t1 {
            continue;
        }
        let ya = a.y + t0 * d.y;
        let yb = a.y + t1 * d.y;
        let (y_lo, y_hi) = (ya.min(yb), ya.max(yb));
        let row_first = (((y_lo - eps) / s).floor() as i64 - 1).max(0);
        let row_last = (((y_hi + eps) / s).floor() as i64 + 1).min(dims.height as i64 - 1);
        if row_first > row_last {
            continue;
        }
        let touches = |row: i64| {
            let lo = row as f64 * s - eps;
            let hi = (row + 1) as f64 * s + eps;
            lo <= y_hi && hi >= y_lo
        };
        for k in 0..=(row_last - row_first) {
            let row = if d.y >= 0.0 { row_first + k } else { row_last - k };
            if !touches(row) {
                continue;
            }
            if visit(dims.index(col as usize, row as usize)).is_break() {
                return;
            }
        }
    }
}

/// All cells touched by the segment, in travel order.
pub fn supercover(a: Vec2, b: Vec2, dims: &GridDims) -> Vec<usize> {
    let mut out = Vec::new();
    visit_supercover(a, b, dims, |idx| {
        out.push(idx);
        ControlFlow::Continue(())
    });
    out
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
    fn horizontal_segment_through_centers() {
        let g = dims(10, 10);
        let cells = supercover(Vec2::new(0.5, 3.5), Vec2::new(5.5, 3.5), &g);
        let expect: Vec<usize> = (0..=5).map(|c| g.index(c, 3)).collect();
        assert_eq!(cells, expect);
    }

    #[test]
    fn reversed_segment_reverses_columns() {
        let g = dims(10, 10);
        let fwd = supercover(Vec2::new(0.5, 3.5), Vec2::new(5.5, 3.5), &g);
        let mut back = supercover(Vec2::new(5.5, 3.5), Vec2::new(0.5, 3.5), &g);
        back.reverse();
        assert_eq!(fwd, back);
    }

    #[test]
    fn segment_on_grid_line_touches_both_rows() {
        let g = dims(4, 4);
        let cells = supercover(Vec2::new(0.5, 2.0), Vec2::new(0.7, 2.0), &g);
        assert_eq!(cells, vec![g.index(0, 1), g.index(0, 2)]);
    }

    #[test]
    fn point_segment_is_its_cell() {
        let g = dims(4, 4);
        assert_eq!(supercover(Vec2::new(1.5, 1.5), Vec2::new(1.5, 1.5), &g), vec![5]);
    }

    #[test]
    fn centers_within_clips_at_corner() {
        let g = dims(11, 11);
        let (c0, c1, r0, r1) = g.centers_within(Vec2::ZERO, 2.5).unwrap();
        assert_eq!((c0, c1, r0, r1), (0, 2, 0, 2));
    }

    #[test]
    fn cell_of_far_border() {
        let g = dims(4, 3);
        assert_eq!(g.cell_of(Vec2::new(4.0, 3.0)), g.index(3, 2));
    }
}
