// SPDX-License-Identifier: Apache-2.0

//! Integer rectilinear geometry in database units (DBU).
//!
//! Grid cells use half-open intervals `[lo, hi)` on both axes. The far edge of
//! the last row/column is closed so that points lying exactly on the grid
//! boundary still map to a cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("empty pin set")]
    EmptyPinSet,
    #[error("segment ({xs},{ys})->({xe},{ye}) lies outside the grid")]
    OutOfGrid { xs: i64, ys: i64, xe: i64, ye: i64 },
    #[error("segment ({xs},{ys})->({xe},{ye}) is not axis-aligned")]
    Diagonal { xs: i64, ys: i64, xe: i64, ye: i64 },
    #[error("invalid rectangle: lo ({0},{1}) exceeds hi ({2},{3})")]
    InvalidRect(i64, i64, i64, i64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: Point) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn new(lo: Point, hi: Point) -> Result<Self, GeomError> {
        if lo.x > hi.x || lo.y > hi.y {
            return Err(GeomError::InvalidRect(lo.x, lo.y, hi.x, hi.y));
        }
        Ok(Self { lo, hi })
    }

    /// Builds the rectangle spanned by two arbitrary corners.
    pub fn from_corners(a: Point, b: Point) -> Self {
        Self {
            lo: Point::new(a.x.min(b.x), a.y.min(b.y)),
            hi: Point::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    /// Bounding box of a point set; `None` when empty.
    pub fn bounding(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect { lo: first, hi: first };
        for p in it {
            r.lo.x = r.lo.x.min(p.x);
            r.lo.y = r.lo.y.min(p.y);
            r.hi.x = r.hi.x.max(p.x);
            r.hi.y = r.hi.y.max(p.y);
        }
        Some(r)
    }

    pub fn width(&self) -> i64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> i64 {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> i128 {
        self.width() as i128 * self.height() as i128
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.lo) && self.contains(other.hi)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let lo = Point::new(self.lo.x.max(other.lo.x), self.lo.y.max(other.lo.y));
        let hi = Point::new(self.hi.x.min(other.hi.x), self.hi.y.min(other.hi.y));
        (lo.x <= hi.x && lo.y <= hi.y).then_some(Rect { lo, hi })
    }
}

/// A metal wire `(xs, ys, xe, ye, layer)`; serialized as that 5-tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 5]", into = "[i64; 5]")]
pub struct WireSegment {
    pub xs: i64,
    pub ys: i64,
    pub xe: i64,
    pub ye: i64,
    pub layer: u32,
}

impl WireSegment {
    pub fn new(xs: i64, ys: i64, xe: i64, ye: i64, layer: u32) -> Result<Self, GeomError> {
        if xs != xe && ys != ye {
            return Err(GeomError::Diagonal { xs, ys, xe, ye });
        }
        Ok(Self { xs, ys, xe, ye, layer })
    }

    pub fn start(&self) -> Point {
        Point::new(self.xs, self.ys)
    }

    pub fn end(&self) -> Point {
        Point::new(self.xe, self.ye)
    }

    pub fn length(&self) -> i64 {
        (self.xe - self.xs).abs() + (self.ye - self.ys).abs()
    }

    pub fn is_horizontal(&self) -> bool {
        self.ys == self.ye && self.xs != self.xe
    }

    pub fn bbox(&self) -> Rect {
        Rect::from_corners(self.start(), self.end())
    }

    /// Part of the segment inside the closed rectangle, if any.
    pub fn clip(&self, r: &Rect) -> Option<WireSegment> {
        let b = self.bbox().intersection(r)?;
        let (mut s, mut e) = (b.lo, b.hi);
        // keep the original orientation
        if self.xs > self.xe || self.ys > self.ye {
            std::mem::swap(&mut s, &mut e);
        }
        Some(WireSegment { xs: s.x, ys: s.y, xe: e.x, ye: e.y, layer: self.layer })
    }
}

impl TryFrom<[i64; 5]> for WireSegment {
    type Error = String;

    fn try_from(v: [i64; 5]) -> Result<Self, Self::Error> {
        let layer = u32::try_from(v[4]).map_err(|_| format!("invalid layer {}", v[4]))?;
        WireSegment::new(v[0], v[1], v[2], v[3], layer).map_err(|e| e.to_string())
    }
}

impl From<WireSegment> for [i64; 5] {
    fn from(w: WireSegment) -> Self {
        [w.xs, w.ys, w.xe, w.ye, w.layer as i64]
    }
}

/// An inter-layer via `(xc, yc, layer_bot, layer_top)`; serialized as that 4-tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[i64; 4]")]
pub struct ViaInstance {
    pub xc: i64,
    pub yc: i64,
    pub layer_bot: u32,
    pub layer_top: u32,
}

impl ViaInstance {
    pub fn at(&self) -> Point {
        Point::new(self.xc, self.yc)
    }
}

impl TryFrom<[i64; 4]> for ViaInstance {
    type Error = String;

    fn try_from(v: [i64; 4]) -> Result<Self, Self::Error> {
        let bot = u32::try_from(v[2]).map_err(|_| format!("invalid layer {}", v[2]))?;
        let top = u32::try_from(v[3]).map_err(|_| format!("invalid layer {}", v[3]))?;
        if bot >= top {
            return Err(format!("via bottom layer {bot} not below top layer {top}"));
        }
        Ok(ViaInstance { xc: v[0], yc: v[1], layer_bot: bot, layer_top: top })
    }
}

impl From<ViaInstance> for [i64; 4] {
    fn from(v: ViaInstance) -> Self {
        [v.xc, v.yc, v.layer_bot as i64, v.layer_top as i64]
    }
}

/// Uniform grid of `nx * ny` cells, indexed row-major (`iy * nx + ix`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcellGrid {
    pub origin: Point,
    pub cell_w: i64,
    pub cell_h: i64,
    pub nx: usize,
    pub ny: usize,
    /// Far corner of the covered area; the last row/column is partial when
    /// the extent is not a multiple of the cell size.
    pub extent: Point,
}

impl GcellGrid {
    /// Grid of `cell_w x cell_h` cells covering `area` exactly.
    pub fn covering(area: Rect, cell_w: i64, cell_h: i64) -> Result<Self, GeomError> {
        if cell_w <= 0 || cell_h <= 0 {
            return Err(GeomError::InvalidGrid(format!("cell size {cell_w}x{cell_h}")));
        }
        let nx = ((area.width() + cell_w - 1) / cell_w).max(1) as usize;
        let ny = ((area.height() + cell_h - 1) / cell_h).max(1) as usize;
        Ok(Self { origin: area.lo, cell_w, cell_h, nx, ny, extent: area.hi })
    }

    /// Grid with `nx x ny` cells over `area`; cell sizes are rounded up.
    pub fn with_counts(area: Rect, nx: usize, ny: usize) -> Result<Self, GeomError> {
        if nx == 0 || ny == 0 {
            return Err(GeomError::InvalidGrid(format!("{nx}x{ny} cells")));
        }
        let cw = ((area.width() + nx as i64 - 1) / nx as i64).max(1);
        let ch = ((area.height() + ny as i64 - 1) / ny as i64).max(1);
        let mut g = Self::covering(area, cw, ch)?;
        g.nx = nx;
        g.ny = ny;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self) -> Rect {
        Rect { lo: self.origin, hi: self.extent }
    }

    pub fn has_partial_cells(&self) -> bool {
        (self.extent.x - self.origin.x) % self.cell_w != 0
            || (self.extent.y - self.origin.y) % self.cell_h != 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    fn col_of(&self, x: i64) -> Option<usize> {
        if x < self.origin.x || x > self.extent.x {
            return None;
        }
        Some((((x - self.origin.x) / self.cell_w) as usize).min(self.nx - 1))
    }

    fn row_of(&self, y: i64) -> Option<usize> {
        if y < self.origin.y || y > self.extent.y {
            return None;
        }
        Some((((y - self.origin.y) / self.cell_h) as usize).min(self.ny - 1))
    }

    /// Cell `(ix, iy)` containing `p`.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        Some((self.col_of(p.x)?, self.row_of(p.y)?))
    }

    /// Range of cells touched by a closed rectangle (clamped to the grid).
    pub fn cell_span(&self, r: &Rect) -> Option<(usize, usize, usize, usize)> {
        let clipped = r.intersection(&self.area())?;
        let (x0, y0) = self.cell_of(clipped.lo)?;
        let (x1, y1) = self.cell_of(clipped.hi)?;
        Some((x0, y0, x1, y1))
    }

    /// Boundary of a cell, clipped to the grid extent.
    pub fn cell_rect(&self, ix: usize, iy: usize) -> Rect {
        let lo = Point::new(
            self.origin.x + ix as i64 * self.cell_w,
            self.origin.y + iy as i64 * self.cell_h,
        );
        let hi = Point::new(
            (lo.x + self.cell_w).min(self.extent.x).max(lo.x),
            (lo.y + self.cell_h).min(self.extent.y).max(lo.y),
        );
        Rect { lo, hi }
    }

    /// Same area with cells `factor` times larger on each axis.
    pub fn coarsened(&self, factor: u32) -> Result<Self, GeomError> {
        let f = factor.max(1) as i64;
        Self::covering(self.area(), self.cell_w * f, self.cell_h * f)
    }
}

/// Row-major scalar map on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { nx, ny, values: vec![0.0; nx * ny] }
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: f64) {
        self.values[iy * self.nx + ix] = v;
    }
}

/// Half-perimeter of the bounding box of `points`.
pub fn hpwl(points: &[Point]) -> Result<i64, GeomError> {
    let bbox = Rect::bounding(points.iter().copied()).ok_or(GeomError::EmptyPinSet)?;
    Ok(bbox.width() + bbox.height())
}

/// Overlap area of two rectangles, zero when disjoint.
pub fn overlap_area(a: &Rect, b: &Rect) -> i128 {
    let w = (a.hi.x.min(b.hi.x) - a.lo.x.max(b.lo.x)).max(0) as i128;
    let h = (a.hi.y.min(b.hi.y) - a.lo.y.max(b.lo.y)).max(0) as i128;
    w * h
}

/// Splits a segment into `(cell index, overlap length)` pairs in ascending cell order.
///
/// Overlap lengths sum to the segment length. A zero-length segment yields the
/// cell containing its point with length 0.
pub fn rasterize_segment(seg: &WireSegment, grid: &GcellGrid) -> Result<Vec<(usize, i64)>, GeomError> {
    let out_of_grid =
        || GeomError::OutOfGrid { xs: seg.xs, ys: seg.ys, xe: seg.xe, ye: seg.ye };
    if seg.xs != seg.xe && seg.ys != seg.ye {
        return Err(GeomError::Diagonal { xs: seg.xs, ys: seg.ys, xe: seg.xe, ye: seg.ye });
    }
    let (cs, rs) = grid.cell_of(seg.start()).ok_or_else(out_of_grid)?;
    let (ce, re) = grid.cell_of(seg.end()).ok_or_else(out_of_grid)?;
    if seg.length() == 0 {
        return Ok(vec![(grid.index(cs, rs), 0)]);
    }
    let mut out = Vec::new();
    if seg.ys == seg.ye {
        let (lo, hi) = (seg.xs.min(seg.xe), seg.xs.max(seg.xe));
        for ix in cs.min(ce)..=cs.max(ce) {
            let cell_lo = grid.origin.x + ix as i64 * grid.cell_w;
            let cell_hi = cell_lo + grid.cell_w;
            let len = hi.min(cell_hi) - lo.max(cell_lo);
            if len > 0 {
                out.push((grid.index(ix, rs), len));
            }
        }
    } else {
        let (lo, hi) = (seg.ys.min(seg.ye), seg.ys.max(seg.ye));
        for iy in rs.min(re)..=rs.max(re) {
            let cell_lo = grid.origin.y + iy as i64 * grid.cell_h;
            let cell_hi = cell_lo + grid.cell_h;
            let len = hi.min(cell_hi) - lo.max(cell_lo);
            if len > 0 {
                out.push((grid.index(cs, iy), len));
            }
        }
    }
    Ok(out)
}
