use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{point_in_polygon, polygon_area, segment_distance, Rect, Vec2};
use crate::error::{Error, Result};

/// Analytic planar sets.
///
/// `Subgraph` is `{y : y.y < u(y.x)}` with `u` tabulated at `samples.len()`
/// equispaced abscissae on `[-radius, radius]` and interpolated by cubic
/// Hermite pieces; beyond `|y.x| > radius` the graph is continued by the
/// constant end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticShape {
    Ball { center: Vec2, radius: f64 },
    HalfSpace { normal: Vec2, offset: f64 },
    Subgraph { radius: f64, samples: Vec<f64> },
    Polygon { vertices: Vec<Vec2> },
}

/// Piece of a boundary curve traversed with the set on the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment {
        a: Vec2,
        b: Vec2,
    },
    /// Counterclockwise arc from angle `t0` to `t1 > t0`.
    Arc {
        center: Vec2,
        radius: f64,
        t0: f64,
        t1: f64,
    },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => a.dist(b),
            Piece::Arc { radius, t0, t1, .. } => radius * (t1 - t0),
        }
    }

    /// Point at arclength fraction `u` in [0, 1].
    pub fn point(&self, u: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => a + (b - a) * u,
            Piece::Arc {
                center,
                radius,
                t0,
                t1,
            } => center + Vec2::polar(t0 + (t1 - t0) * u) * radius,
        }
    }

    /// Outward unit normal at fraction `u`.
    pub fn normal(&self, u: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => {
                let t = (b - a).unit();
                Vec2::new(t.y, -t.x)
            }
            Piece::Arc { t0, t1, .. } => Vec2::polar(t0 + (t1 - t0) * u),
        }
    }
}

/// Sorted angular intervals `(a, b)` with `b > a`, all inside `[base, base + 2pi]`.
pub type Arcs = Vec<(f64, f64)>;

fn full_arc() -> Arcs {
    vec![(-PI, PI)]
}

/// Arc `[center - half, center + half]` normalized into `[-pi, pi]`.
fn centered_arc(center: f64, half: f64) -> Arcs {
    if half >= PI {
        return full_arc();
    }
    if half <= 0.0 {
        return Vec::new();
    }
    let mut a = center - half;
    a = (a + PI).rem_euclid(TAU) - PI;
    let b = a + 2.0 * half;
    if b <= PI {
        vec![(a, b)]
    } else {
        vec![(-PI, b - TAU), (a, PI)]
    }
}

/// Intersection of two normalized arc lists.
pub fn intersect_arcs(x: &Arcs, y: &Arcs) -> Arcs {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        let l = x[i].0.max(y[j].0);
        let r = x[i].1.min(y[j].1);
        if l < r {
            out.push((l, r));
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Complement of a normalized arc list in `[-pi, pi]`.
pub fn complement_arcs(x: &Arcs) -> Arcs {
    let mut out = Vec::new();
    let mut cur = -PI;
    for &(a, b) in x {
        if a > cur {
            out.push((cur, a));
        }
        cur = b;
    }
    if cur < PI {
        out.push((cur, PI));
    }
    out
}

pub fn arcs_measure(x: &Arcs) -> f64 {
    x.iter().map(|(a, b)| b - a).sum()
}

/// Sorts arcs and merges neighbours.
fn normalize_arcs(mut v: Arcs) -> Arcs {
    v.retain(|(a, b)| b > a);
    v.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out: Arcs = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Arcs where `inside(theta)` holds, given sorted candidate crossing angles.
fn arcs_from_crossings<F: Fn(f64) -> bool>(mut cuts: Vec<f64>, inside: F) -> Arcs {
    cuts.push(-PI);
    cuts.push(PI);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        if w[1] - w[0] > 0.0 && inside(0.5 * (w[0] + w[1])) {
            out.push((w[0], w[1]));
        }
    }
    normalize_arcs(out)
}

impl AnalyticShape {
    pub fn ball(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        Ok(AnalyticShape::Ball { center, radius })
    }

    /// `{x : x . normal <= offset}`; a non-unit normal is normalized along with the offset.
    pub fn half_space(normal: Vec2, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain("half-space normal must be nonzero".into()));
        }
        Ok(AnalyticShape::HalfSpace {
            normal: normal * (1.0 / n),
            offset: offset / n,
        })
    }

    /// Simple polygon; clockwise input is reversed.
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        let mut v = vertices;
        if v.len() >= 2 && v.first() == v.last() {
            v.pop();
        }
        if v.len() < 3 {
            return Err(Error::DegenerateSet(
                "polygon needs at least three vertices".into(),
            ));
        }
        let a = polygon_area(&v);
        if !(a.abs() > 0.0) {
            return Err(Error::DegenerateSet("polygon has zero area".into()));
        }
        if a < 0.0 {
            v.reverse();
        }
        if v.len() <= 4096 && !is_simple(&v) {
            return Err(Error::DegenerateSet("polygon is not simple".into()));
        }
        Ok(AnalyticShape::Polygon { vertices: v })
    }

    /// Subgraph of tabulated `u`; requires an odd number of samples so that
    /// the origin is a node, with `u(0) = 0` and `u'(0) = 0`.
    pub fn subgraph(radius: f64, samples: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        if samples.len() < 5 || samples.len().is_multiple_of(2) {
            return Err(Error::Domain(
                "subgraph needs an odd number (>= 5) of samples".into(),
            ));
        }
        let s = AnalyticShape::Subgraph { radius, samples };
        let tol = 1e-9 * (1.0 + s.graph_sup());
        if s.graph(0.0).abs() > tol
            || s.graph_slope(0.0).abs() > 1e-6 * (1.0 + s.graph_sup() / radius)
        {
            return Err(Error::Domain(
                "subgraph needs u(0) = 0 and u'(0) = 0".into(),
            ));
        }
        Ok(s)
    }

    /// Subgraph sampled from a function.
    pub fn subgraph_from_fn<F: Fn(f64) -> f64>(radius: f64, n: usize, f: F) -> Result<Self> {
        let n = if n.is_multiple_of(2) { n + 1 } else { n };
        let samples = (0..n)
            .map(|k| f(-radius + 2.0 * radius * k as f64 / (n - 1) as f64))
            .collect();
        AnalyticShape::subgraph(radius, samples)
    }

    fn graph_sup(&self) -> f64 {
        match self {
            AnalyticShape::Subgraph { samples, .. } => {
                samples.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
            _ => 0.0,
        }
    }

    fn sample_slopes(&self) -> (f64, &[f64]) {
        match self {
            AnalyticShape::Subgraph { radius, samples } => {
                (2.0 * radius / (samples.len() - 1) as f64, samples)
            }
            _ => unreachable!("not a subgraph"),
        }
    }

    fn node_slope(step: f64, u: &[f64], k: usize) -> f64 {
        let n = u.len();
        if k == 0 {
            (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * step)
        } else if k == n - 1 {
            (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * step)
        } else {
            (u[k + 1] - u[k - 1]) / (2.0 * step)
        }
    }

    /// Interpolated graph value; constant continuation outside the table.
    pub fn graph(&self, t: f64) -> f64 {
        let AnalyticShape::Subgraph { radius, .. } = self else {
            return 0.0;
        };
        let (step, u) = self.sample_slopes();
        let tc = t.clamp(-radius, *radius);
        let pos = (tc + radius) / step;
        let k = (pos.floor() as usize).min(u.len() - 2);
        let x = pos - k as f64;
        let (p0, p1) = (u[k], u[k + 1]);
        let (m0, m1) = (
            Self::node_slope(step, u, k) * step,
            Self::node_slope(step, u, k + 1) * step,
        );
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * p0
            + (x3 - 2.0 * x2 + x) * m0
            + (-2.0 * x3 + 3.0 * x2) * p1
            + (x3 - x2) * m1
    }

    /// Derivative of the interpolated graph (zero outside the table).
    pub fn graph_slope(&self, t: f64) -> f64 {
        let AnalyticShape::Subgraph { radius, .. } = self else {
            return 0.0;
        };
        if t.abs() > *radius {
            return 0.0;
        }
        let (step, u) = self.sample_slopes();
        let pos = (t + radius) / step;
        let k = (pos.floor() as usize).min(u.len() - 2);
        let x = pos - k as f64;
        let (p0, p1) = (u[k], u[k + 1]);
        let (m0, m1) = (
            Self::node_slope(step, u, k) * step,
            Self::node_slope(step, u, k + 1) * step,
        );
        let x2 = x * x;
        ((6.0 * x2 - 6.0 * x) * p0
            + (3.0 * x2 - 4.0 * x + 1.0) * m0
            + (-6.0 * x2 + 6.0 * x) * p1
            + (3.0 * x2 - 2.0 * x) * m1)
            / step
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            AnalyticShape::Ball { center, radius } => p.dist(*center) < *radius,
            AnalyticShape::HalfSpace { normal, offset } => p.dot(*normal) < *offset,
            AnalyticShape::Subgraph { .. } => p.y < self.graph(p.x),
            AnalyticShape::Polygon { vertices } => point_in_polygon(vertices, p),
        }
    }

    pub fn bbox(&self) -> Option<Rect> {
        match self {
            AnalyticShape::Ball { center, radius } => Some(Rect::new(
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
            )),
            AnalyticShape::Polygon { vertices } => Some(vertices_bbox(vertices)),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bbox().is_some()
    }

    pub fn area(&self) -> f64 {
        match self {
            AnalyticShape::Ball { radius, .. } => PI * radius * radius,
            AnalyticShape::Polygon { vertices } => polygon_area(vertices),
            _ => f64::INFINITY,
        }
    }

    pub fn scaled(&self, k: f64) -> AnalyticShape {
        match self {
            AnalyticShape::Ball { center, radius } => AnalyticShape::Ball {
                center: *center * k,
                radius: radius * k,
            },
            AnalyticShape::HalfSpace { normal, offset } => AnalyticShape::HalfSpace {
                normal: *normal,
                offset: offset * k,
            },
            AnalyticShape::Subgraph { radius, samples } => AnalyticShape::Subgraph {
                radius: radius * k,
                samples: samples.iter().map(|v| v * k).collect(),
            },
            AnalyticShape::Polygon { vertices } => AnalyticShape::Polygon {
                vertices: vertices.iter().map(|v| *v * k).collect(),
            },
        }
    }

    /// Translation. Subgraphs are anchored at the origin, so only the
    /// vertical component of `t` applies to them.
    pub fn translated(&self, t: Vec2) -> AnalyticShape {
        match self {
            AnalyticShape::Ball { center, radius } => AnalyticShape::Ball {
                center: *center + t,
                radius: *radius,
            },
            AnalyticShape::HalfSpace { normal, offset } => AnalyticShape::HalfSpace {
                normal: *normal,
                offset: offset + normal.dot(t),
            },
            AnalyticShape::Subgraph { radius, samples } => AnalyticShape::Subgraph {
                radius: *radius,
                samples: samples.iter().map(|v| v + t.y).collect(),
            },
            AnalyticShape::Polygon { vertices } => AnalyticShape::Polygon {
                vertices: vertices.iter().map(|v| *v + t).collect(),
            },
        }
    }

    /// Boundary pieces of bounded shapes, traversed counterclockwise.
    pub fn boundary_pieces(&self) -> Option<Vec<Piece>> {
        match self {
            AnalyticShape::Ball { center, radius } => Some(vec![Piece::Arc {
                center: *center,
                radius: *radius,
                t0: -PI,
                t1: PI,
            }]),
            AnalyticShape::Polygon { vertices } => Some(polygon_pieces(vertices)),
            _ => None,
        }
    }

    /// Exact signed distance to the boundary, negative inside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            AnalyticShape::Ball { center, radius } => p.dist(*center) - radius,
            AnalyticShape::HalfSpace { normal, offset } => p.dot(*normal) - offset,
            AnalyticShape::Polygon { vertices } => {
                let n = vertices.len();
                let d = (0..n)
                    .map(|i| segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min);
                if point_in_polygon(vertices, p) {
                    -d
                } else {
                    d
                }
            }
            AnalyticShape::Subgraph { .. } => {
                let d = self.graph_distance(p);
                if self.contains(p) {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Distance from `p` to the graph of `u`.
    fn graph_distance(&self, p: Vec2) -> f64 {
        let AnalyticShape::Subgraph { radius, samples } = self else {
            unreachable!()
        };
        let vert = (p.y - self.graph(p.x)).abs();
        let reach = vert;
        let lo = p.x - reach;
        let hi = p.x + reach;
        let m = (samples.len() * 8).max(512);
        let f = |t: f64| Vec2::new(t, self.graph(t)).dist(p);
        let mut best_t = p.x;
        let mut best = vert;
        for k in 0..=m {
            let t = lo + (hi - lo) * k as f64 / m as f64;
            let d = f(t);
            if d < best {
                best = d;
                best_t = t;
            }
        }
        // golden-section refinement around the best sample
        let step = (hi - lo) / m as f64;
        let (mut a, mut b) = (best_t - step, best_t + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let _ = radius;
        best.min(f(0.5 * (a + b)))
    }

    /// Angular intervals of the circle `|y - x| = r` lying inside the shape.
    pub fn circle_arcs(&self, x: Vec2, r: f64) -> Arcs {
        match self {
            AnalyticShape::Ball { center, radius } => {
                let d = x.dist(*center);
                if d + r <= *radius {
                    return full_arc();
                }
                if r >= d + radius || r <= d - radius {
                    return Vec::new();
                }
                let c = ((r * r + d * d - radius * radius) / (2.0 * r * d)).clamp(-1.0, 1.0);
                centered_arc((*center - x).angle(), c.acos())
            }
            AnalyticShape::HalfSpace { normal, offset } => {
                let q = (offset - x.dot(*normal)) / r;
                if q >= 1.0 {
                    full_arc()
                } else if q <= -1.0 {
                    Vec::new()
                } else {
                    centered_arc((-*normal).angle(), (-q).acos())
                }
            }
            AnalyticShape::Polygon { vertices } => {
                let n = vertices.len();
                let mut cuts = Vec::new();
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    circle_segment_angles(x, r, a, b, &mut cuts);
                }
                arcs_from_crossings(cuts, |t| point_in_polygon(vertices, x + Vec2::polar(t) * r))
            }
            AnalyticShape::Subgraph { .. } => {
                let g = |t: f64| {
                    let p = x + Vec2::polar(t) * r;
                    p.y - self.graph(p.x)
                };
                let m = 720;
                let mut cuts = Vec::new();
                let mut t_prev = -PI;
                let mut g_prev = g(t_prev);
                for k in 1..=m {
                    let t = -PI + TAU * k as f64 / m as f64;
                    let gv = g(t);
                    if (gv < 0.0) != (g_prev < 0.0) {
                        let (mut a, mut b) = (t_prev, t);
                        for _ in 0..60 {
                            let c = 0.5 * (a + b);
                            if (g(c) < 0.0) == (g_prev < 0.0) {
                                a = c;
                            } else {
                                b = c;
                            }
                        }
                        cuts.push(0.5 * (a + b));
                    }
                    t_prev = t;
                    g_prev = gv;
                }
                arcs_from_crossings(cuts, |t| g(t) < 0.0)
            }
        }
    }

    /// Parameter intervals `t >= 0` where `x + t * dir` lies in the shape
    /// (`dir` a unit vector). The last interval may end at infinity.
    pub fn ray_intervals(&self, x: Vec2, dir: Vec2) -> Vec<(f64, f64)> {
        match self {
            AnalyticShape::Ball { center, radius } => {
                let m = x - *center;
                let b = m.dot(dir);
                let c = m.norm2() - radius * radius;
                let disc = b * b - c;
                if disc <= 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                let t0 = -b - sq;
                let t1 = -b + sq;
                if t1 <= 0.0 {
                    Vec::new()
                } else {
                    vec![(t0.max(0.0), t1)]
                }
            }
            AnalyticShape::HalfSpace { normal, offset } => {
                let g0 = x.dot(*normal) - offset;
                let dg = dir.dot(*normal);
                if dg == 0.0 {
                    return if g0 < 0.0 {
                        vec![(0.0, f64::INFINITY)]
                    } else {
                        Vec::new()
                    };
                }
                let tc = -g0 / dg;
                if dg > 0.0 {
                    if tc > 0.0 {
                        vec![(0.0, tc)]
                    } else {
                        Vec::new()
                    }
                } else if tc > 0.0 {
                    vec![(tc, f64::INFINITY)]
                } else {
                    vec![(0.0, f64::INFINITY)]
                }
            }
            AnalyticShape::Polygon { vertices } => {
                let n = vertices.len();
                let mut ts = vec![0.0];
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let e = b - a;
                    let den = dir.cross(e);
                    if den == 0.0 {
                        continue;
                    }
                    let w = a - x;
                    let t = w.cross(e) / den;
                    let u = w.cross(dir) / den;
                    if t > 0.0 && (0.0..=1.0).contains(&u) {
                        ts.push(t);
                    }
                }
                ts.sort_by(|a, b| a.total_cmp(b));
                ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                let mut out = Vec::new();
                for w in ts.windows(2) {
                    if w[1] > w[0] && point_in_polygon(vertices, x + dir * (0.5 * (w[0] + w[1]))) {
                        out.push((w[0], w[1]));
                    }
                }
                merge_ray_intervals(out)
            }
            AnalyticShape::Subgraph { radius, .. } => {
                // numeric crossings while |x1| <= radius, constant graph beyond
                let f = |t: f64| {
                    let p = x + dir * t;
                    p.y - self.graph(p.x)
                };
                let mut t_end = 0.0;
                if dir.x != 0.0 {
                    let ta = (-radius - x.x) / dir.x;
                    let tb = (radius - x.x) / dir.x;
                    t_end = ta.max(tb).max(0.0);
                }
                let mut cuts = vec![0.0];
                let m = 2048;
                let mut tp = 0.0;
                let mut fp = f(0.0);
                for k in 1..=m {
                    let t = t_end * k as f64 / m as f64;
                    let fv = f(t);
                    if (fv < 0.0) != (fp < 0.0) {
                        let (mut a, mut b) = (tp, t);
                        for _ in 0..60 {
                            let c = 0.5 * (a + b);
                            if (f(c) < 0.0) == (fp < 0.0) {
                                a = c;
                            } else {
                                b = c;
                            }
                        }
                        cuts.push(0.5 * (a + b));
                    }
                    tp = t;
                    fp = fv;
                }
                cuts.push(t_end);
                // remainder: the graph is constant beyond t_end
                let level = self.graph(x.x + dir.x * t_end + dir.x.signum() * radius * 4.0);
                let mut tail: Vec<(f64, f64)> = AnalyticShape::HalfSpace {
                    normal: Vec2::new(0.0, 1.0),
                    offset: level,
                }
                .ray_intervals(x, dir)
                .into_iter()
                .filter_map(|(a, b)| {
                    if b > t_end {
                        Some((a.max(t_end), b))
                    } else {
                        None
                    }
                })
                .collect();
                cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                let mut out = Vec::new();
                for w in cuts.windows(2) {
                    if w[1] > w[0] && f(0.5 * (w[0] + w[1])) < 0.0 {
                        out.push((w[0], w[1]));
                    }
                }
                out.append(&mut tail);
                merge_ray_intervals(out)
            }
        }
    }

    /// Boundary length inside `omega`; `None` means the whole plane.
    pub fn boundary_length(
        &self,
        omega: Option<&dyn Fn(Vec2) -> bool>,
        window: Option<Rect>,
    ) -> f64 {
        let pieces: Vec<Piece> = match self {
            AnalyticShape::Ball { .. } | AnalyticShape::Polygon { .. } => {
                self.boundary_pieces().unwrap()
            }
            AnalyticShape::HalfSpace { normal, offset } => {
                let Some(w) = window else {
                    return f64::INFINITY;
                };
                let p0 = *normal * *offset;
                let t = normal.perp();
                let reach = w.diameter() + w.center().dist(p0);
                let c = p0 + t * t.dot(w.center() - p0);
                vec![Piece::Segment {
                    a: c - t * reach,
                    b: c + t * reach,
                }]
            }
            AnalyticShape::Subgraph { .. } => {
                let Some(w) = window else {
                    return f64::INFINITY;
                };
                let m = 4096;
                (0..m)
                    .map(|k| {
                        let x0 = w.min.x + w.width() * k as f64 / m as f64;
                        let x1 = w.min.x + w.width() * (k + 1) as f64 / m as f64;
                        Piece::Segment {
                            a: Vec2::new(x0, self.graph(x0)),
                            b: Vec2::new(x1, self.graph(x1)),
                        }
                    })
                    .collect()
            }
        };
        pieces.iter().map(|p| piece_length_inside(p, omega)).sum()
    }
}

fn piece_length_inside(p: &Piece, omega: Option<&dyn Fn(Vec2) -> bool>) -> f64 {
    let Some(inside) = omega else {
        return p.length();
    };
    let m = 2048;
    let mut total = 0.0;
    let mut prev_u = 0.0;
    let mut prev_in = inside(p.point(0.0));
    let mut start = if prev_in { Some(0.0) } else { None };
    for k in 1..=m {
        let u = k as f64 / m as f64;
        let now = inside(p.point(u));
        if now != prev_in {
            let (mut a, mut b) = (prev_u, u);
            for _ in 0..50 {
                let c = 0.5 * (a + b);
                if inside(p.point(c)) == prev_in {
                    a = c;
                } else {
                    b = c;
                }
            }
            let cut = 0.5 * (a + b);
            if now {
                start = Some(cut);
            } else if let Some(s0) = start.take() {
                total += cut - s0;
            }
        }
        prev_u = u;
        prev_in = now;
    }
    if let Some(s0) = start {
        total += 1.0 - s0;
    }
    total * p.length()
}

fn merge_ray_intervals(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 + 1e-14 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Angles at which the circle `|y - x| = r` meets the segment `[a, b]`.
pub fn circle_segment_angles(x: Vec2, r: f64, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
    let d = b - a;
    let f = a - x;
    let qa = d.norm2();
    let qb = 2.0 * f.dot(d);
    let qc = f.norm2() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for u in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
        if (0.0..=1.0).contains(&u) {
            out.push((a + d * u - x).angle());
        }
    }
}

pub fn polygon_pieces(v: &[Vec2]) -> Vec<Piece> {
    let n = v.len();
    (0..n)
        .map(|i| Piece::Segment {
            a: v[i],
            b: v[(i + 1) % n],
        })
        .collect()
}

pub fn vertices_bbox(v: &[Vec2]) -> Rect {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in v {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    Rect::new(lo, hi)
}

fn segments_cross(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = (q2 - q1).cross(p1 - q1);
    let d2 = (q2 - q1).cross(p2 - q1);
    let d3 = (p2 - p1).cross(q1 - p1);
    let d4 = (p2 - p1).cross(q2 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn is_simple(v: &[Vec2]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_arcs_measure() {
        let b = AnalyticShape::ball(Vec2::new(0.0, 0.0), 1.0).unwrap();
        let x = Vec2::new(1.0, 0.0);
        for r in [0.1, 0.5, 1.0, 1.9] {
            let m = arcs_measure(&b.circle_arcs(x, r));
            let exact = 2.0 * (r / 2.0f64).acos();
            assert!((m - exact).abs() < 1e-12, "r={r}: {m} vs {exact}");
        }
        assert!(b.circle_arcs(x, 2.5).is_empty());
    }

    #[test]
    fn polygon_arcs_match_ball_like_square() {
        let sq = AnalyticShape::polygon(vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ])
        .unwrap();
        // circle centered at the middle of the right edge, radius 0.5: half circle inside
        let m = arcs_measure(&sq.circle_arcs(Vec2::new(1.0, 0.0), 0.5));
        assert!((m - PI).abs() < 1e-12);
        // center of the square, radius sqrt(2) * 0.99: four arcs around the diagonals
        let r = 1.2;
        let m = arcs_measure(&sq.circle_arcs(Vec2::new(0.0, 0.0), r));
        let exact = TAU - 8.0 * (1.0 / r).acos();
        assert!((m - exact).abs() < 1e-12);
    }

    #[test]
    fn half_space_arcs_and_rays() {
        let hs = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0).unwrap();
        let a = hs.circle_arcs(Vec2::new(0.0, 0.0), 1.0);
        assert!((arcs_measure(&a) - PI).abs() < 1e-14);
        assert_eq!(
            hs.ray_intervals(Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)),
            vec![(1.0, f64::INFINITY)]
        );
        let b = AnalyticShape::ball(Vec2::new(3.0, 0.0), 1.0).unwrap();
        assert_eq!(
            b.ray_intervals(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)),
            vec![(2.0, 4.0)]
        );
    }

    #[test]
    fn subgraph_interpolates_quadratics_exactly() {
        let s = AnalyticShape::subgraph_from_fn(1.0, 41, |t| 0.05 * t * t).unwrap();
        for t in [-0.93, -0.31, 0.0, 0.123, 0.77] {
            assert!((s.graph(t) - 0.05 * t * t).abs() < 1e-14);
            assert!((s.graph_slope(t) - 0.1 * t).abs() < 1e-12);
        }
        assert!(AnalyticShape::subgraph_from_fn(1.0, 41, |t| t).is_err());
    }

    #[test]
    fn polygon_validation() {
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(AnalyticShape::polygon(bow).is_err());
        let cw = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0),
        ];
        let AnalyticShape::Polygon { vertices } = AnalyticShape::polygon(cw).unwrap() else {
            panic!()
        };
        assert!(polygon_area(&vertices) > 0.0);
    }

    #[test]
    fn boundary_length_inside_region() {
        let b = AnalyticShape::ball(Vec2::new(0.0, 0.0), 1.0).unwrap();
        assert!((b.boundary_length(None, None) - TAU).abs() < 1e-12);
        let upper = |p: Vec2| p.y > 0.0;
        let l = b.boundary_length(Some(&upper), None);
        assert!((l - PI).abs() < 1e-9, "{l}");
    }
}
