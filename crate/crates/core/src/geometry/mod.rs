//! Set representations: interval unions, pixel grids, analytic shapes and
//! the Koch snowflake, together with rasterization and signed distances.

mod distance;
mod grid;
mod interval;
mod koch;
mod shape;

pub use distance::{band, grid_distance_field, signed_distance, tubular_set};
pub use grid::{rasterize, rasterize_with_budget, GridSet, Lattice, DEFAULT_CELL_BUDGET};
pub use interval::{counterexample_set, make_interval_set, IntervalSet};
pub use koch::{koch_snowflake, KochApproximation};
pub use shape::AnalyticShape;
pub use shape::{
    arcs_measure, circle_segment_angles, complement_arcs, intersect_arcs, polygon_pieces,
    vertices_bbox, Arcs, Piece,
};

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2 { x: a[0], y: a[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn unit(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn polar(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
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
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle `[min.x, max.x] x [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn expand(&self, m: f64) -> Rect {
        Rect::new(self.min - Vec2::new(m, m), self.max + Vec2::new(m, m))
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(
            Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        )
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
    }
}

/// Any planar set accepted by the 2D routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanarSet {
    Grid(GridSet),
    Shape(AnalyticShape),
    Koch(KochApproximation),
}

impl PlanarSet {
    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            PlanarSet::Grid(g) => g.contains(p),
            PlanarSet::Shape(s) => s.contains(p),
            PlanarSet::Koch(k) => k.contains(p),
        }
    }

    /// Bounding box, `None` for unbounded sets.
    pub fn bbox(&self) -> Option<Rect> {
        match self {
            PlanarSet::Grid(g) => g.occupied_bbox(),
            PlanarSet::Shape(s) => s.bbox(),
            PlanarSet::Koch(k) => Some(k.bbox()),
        }
    }

    /// Boundary polygon for polygonal sets.
    pub fn polygon(&self) -> Option<&[Vec2]> {
        match self {
            PlanarSet::Shape(AnalyticShape::Polygon { vertices }) => Some(vertices),
            PlanarSet::Koch(k) => Some(&k.boundary),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            PlanarSet::Grid(g) => g.count() == 0,
            _ => false,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            PlanarSet::Grid(g) => g.measure(),
            PlanarSet::Shape(s) => s.area(),
            PlanarSet::Koch(k) => k.area(),
        }
    }

    /// Copy scaled by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> PlanarSet {
        match self {
            PlanarSet::Grid(g) => PlanarSet::Grid(g.scaled(lambda)),
            PlanarSet::Shape(s) => PlanarSet::Shape(s.scaled(lambda)),
            PlanarSet::Koch(k) => PlanarSet::Koch(k.scaled(lambda)),
        }
    }

    /// Copy translated by `v`.
    pub fn translated(&self, v: Vec2) -> PlanarSet {
        match self {
            PlanarSet::Grid(g) => PlanarSet::Grid(g.translated(v)),
            PlanarSet::Shape(s) => PlanarSet::Shape(s.translated(v)),
            PlanarSet::Koch(k) => PlanarSet::Koch(k.translated(v)),
        }
    }
}

impl From<GridSet> for PlanarSet {
    fn from(g: GridSet) -> Self {
        PlanarSet::Grid(g)
    }
}

impl From<AnalyticShape> for PlanarSet {
    fn from(s: AnalyticShape) -> Self {
        PlanarSet::Shape(s)
    }
}

impl From<KochApproximation> for PlanarSet {
    fn from(k: KochApproximation) -> Self {
        PlanarSet::Koch(k)
    }
}

/// Signed area of a closed polygon (positive when counterclockwise).
pub fn polygon_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    let mut a = 0.0;
    for i in 0..n {
        a += v[i].cross(v[(i + 1) % n]);
    }
    0.5 * a
}

/// Even-odd point in polygon test.
pub fn point_in_polygon(v: &[Vec2], p: Vec2) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let l2 = d.norm2();
    let t = if l2 > 0.0 {
        ((p - a).dot(d) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * t).dist(p)
}
