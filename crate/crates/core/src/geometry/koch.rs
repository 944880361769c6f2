use serde::{Deserialize, Serialize};

use super::shape::vertices_bbox;
use super::{point_in_polygon, polygon_area, Rect, Vec2};

/// Koch snowflake after `generation` refinement steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KochApproximation {
    pub generation: usize,
    pub side: f64,
    /// Base triangle first, then the triangles attached at each generation,
    /// all counterclockwise.
    pub triangles: Vec<[Vec2; 3]>,
    /// Generation index of each entry of `triangles` (0 for the base).
    pub triangle_generation: Vec<usize>,
    /// Boundary polygon, counterclockwise, `3 * 4^generation` vertices.
    pub boundary: Vec<Vec2>,
}

fn ccw(t: [Vec2; 3]) -> [Vec2; 3] {
    if (t[1] - t[0]).cross(t[2] - t[0]) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

/// Snowflake with base equilateral triangle of side `side`, barycenter at
/// the origin and one vertex on the positive vertical axis.
pub fn koch_snowflake(k: usize, side: f64) -> KochApproximation {
    let r = side / 3f64.sqrt();
    let mut boundary = vec![
        Vec2::new(0.0, r),
        Vec2::new(-0.5 * side, -0.5 * r),
        Vec2::new(0.5 * side, -0.5 * r),
    ];
    let mut triangles = vec![[boundary[0], boundary[1], boundary[2]]];
    let mut triangle_generation = vec![0];
    let h = 0.5 * 3f64.sqrt();
    for j in 1..=k {
        let n = boundary.len();
        let mut next = Vec::with_capacity(4 * n);
        for i in 0..n {
            let p = boundary[i];
            let q = boundary[(i + 1) % n];
            let d = q - p;
            let outward = Vec2::new(d.y, -d.x);
            let p1 = p + d * (1.0 / 3.0);
            let p3 = p + d * (2.0 / 3.0);
            let apex = (p + q) * 0.5 + outward * (h / 3.0);
            next.extend_from_slice(&[p, p1, apex, p3]);
            triangles.push(ccw([p1, p3, apex]));
            triangle_generation.push(j);
        }
        boundary = next;
    }
    KochApproximation {
        generation: k,
        side,
        triangles,
        triangle_generation,
        boundary,
    }
}

impl KochApproximation {
    pub fn area(&self) -> f64 {
        polygon_area(&self.boundary)
    }

    /// Closed-form area: base triangle plus `3 * 4^(j-1)` triangles of side `side / 3^j`.
    pub fn area_closed_form(&self) -> f64 {
        let tri = |a: f64| 3f64.sqrt() / 4.0 * a * a;
        let mut total = tri(self.side);
        for j in 1..=self.generation {
            total += 3.0 * 4f64.powi(j as i32 - 1) * tri(self.side / 3f64.powi(j as i32));
        }
        total
    }

    pub fn count_in_generation(&self, j: usize) -> usize {
        self.triangle_generation.iter().filter(|g| **g == j).count()
    }

    pub fn bbox(&self) -> Rect {
        vertices_bbox(&self.boundary)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.bbox().contains(p) && point_in_polygon(&self.boundary, p)
    }

    pub fn perimeter(&self) -> f64 {
        self.side * 3.0 * (4.0f64 / 3.0).powi(self.generation as i32)
    }

    pub fn scaled(&self, k: f64) -> KochApproximation {
        self.map(|p| p * k, self.side * k)
    }

    pub fn translated(&self, v: Vec2) -> KochApproximation {
        self.map(|p| p + v, self.side)
    }

    fn map<F: Fn(Vec2) -> Vec2>(&self, f: F, side: f64) -> KochApproximation {
        KochApproximation {
            generation: self.generation,
            side,
            triangles: self
                .triangles
                .iter()
                .map(|t| [f(t[0]), f(t[1]), f(t[2])])
                .collect(),
            triangle_generation: self.triangle_generation.clone(),
            boundary: self.boundary.iter().map(|p| f(*p)).collect(),
        }
    }
}
