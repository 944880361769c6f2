//! Potentials `int_{R \ W} |x - y|^(-2-s) dy` of regions outside a
//! rectangular window `W`, integrated in polar coordinates around `x`: the
//! radial integral is exact, the angular one adaptive.

use std::f64::consts::PI;

use crate::geometry::circle_segment_angles;
use crate::geometry::{AnalyticShape, Rect, Vec2};
use crate::quad::{adaptive_breaks, Estimate, Tol};

/// What lies beyond the window.
#[derive(Debug, Clone, Copy)]
pub enum FarRegion<'a> {
    Nothing,
    Everything,
    Inside(&'a AnalyticShape),
    Outside(&'a AnalyticShape),
}

impl FarRegion<'_> {
    pub fn is_nothing(&self) -> bool {
        matches!(self, FarRegion::Nothing)
    }
}

/// Distance from `x` (inside `w`) to the boundary of `w` along `dir`.
pub fn exit_distance(x: Vec2, dir: Vec2, w: &Rect) -> f64 {
    let mut t = f64::INFINITY;
    if dir.x > 0.0 {
        t = t.min((w.max.x - x.x) / dir.x);
    } else if dir.x < 0.0 {
        t = t.min((w.min.x - x.x) / dir.x);
    }
    if dir.y > 0.0 {
        t = t.min((w.max.y - x.y) / dir.y);
    } else if dir.y < 0.0 {
        t = t.min((w.min.y - x.y) / dir.y);
    }
    t.max(0.0)
}

fn radial(intervals: &[(f64, f64)], t0: f64, s: f64) -> f64 {
    let mut acc = 0.0;
    for &(a, b) in intervals {
        let a = a.max(t0);
        if b <= a {
            continue;
        }
        let tail = if b.is_finite() { b.powf(-s) } else { 0.0 };
        acc += a.powf(-s) - tail;
    }
    acc / s
}

fn complement_on_half_line(v: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut cur = 0.0;
    for &(a, b) in v {
        if a > cur {
            out.push((cur, a));
        }
        cur = b;
    }
    if cur < f64::INFINITY {
        out.push((cur, f64::INFINITY));
    }
    out
}

/// Radial integral along one ray, beyond the window.
pub fn ray_potential(x: Vec2, theta: f64, w: &Rect, region: &FarRegion, s: f64) -> f64 {
    let dir = Vec2::polar(theta);
    let t0 = exit_distance(x, dir, w);
    match region {
        FarRegion::Nothing => 0.0,
        FarRegion::Everything => t0.powf(-s) / s,
        FarRegion::Inside(shape) => radial(&shape.ray_intervals(x, dir), t0, s),
        FarRegion::Outside(shape) => radial(
            &complement_on_half_line(&shape.ray_intervals(x, dir)),
            t0,
            s,
        ),
    }
}

fn angle_breaks(x: Vec2, w: &Rect, region: &FarRegion) -> Vec<f64> {
    let mut angles: Vec<f64> = w.corners().iter().map(|c| (*c - x).angle()).collect();
    let shape = match region {
        FarRegion::Inside(s) | FarRegion::Outside(s) => Some(*s),
        _ => None,
    };
    let corners = w.corners();
    let edges: Vec<(Vec2, Vec2)> = (0..4).map(|k| (corners[k], corners[(k + 1) % 4])).collect();
    match shape {
        Some(AnalyticShape::HalfSpace { normal, offset }) => {
            let t = normal.perp();
            angles.push(t.angle());
            angles.push((-t).angle());
            let p0 = *normal * *offset;
            for (a, b) in &edges {
                let d = *b - *a;
                let den = d.dot(*normal);
                if den != 0.0 {
                    let u = (p0 - *a).dot(*normal) / den;
                    if (0.0..=1.0).contains(&u) {
                        angles.push((*a + d * u - x).angle());
                    }
                }
            }
        }
        Some(AnalyticShape::Ball { center, radius }) => {
            let d = x.dist(*center);
            if d > *radius {
                let base = (*center - x).angle();
                let half = (radius / d).asin();
                angles.push(base - half);
                angles.push(base + half);
            }
            let mut cuts = Vec::new();
            for (a, b) in &edges {
                circle_segment_angles(*center, *radius, *a, *b, &mut cuts);
            }
            for t in cuts {
                angles.push((*center + Vec2::polar(t) * *radius - x).angle());
            }
        }
        Some(AnalyticShape::Polygon { vertices }) if vertices.len() <= 256 => {
            for v in vertices {
                angles.push((*v - x).angle());
            }
        }
        _ => {}
    }
    let mut out: Vec<f64> = angles
        .into_iter()
        .map(|a| {
            if a < -PI {
                a + 2.0 * PI
            } else if a > PI {
                a - 2.0 * PI
            } else {
                a
            }
        })
        .collect();
    out.push(-PI);
    out.push(PI);
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    out
}

/// Potential at `x` of the part of `region` outside the window `w`.
pub fn far_potential(x: Vec2, w: &Rect, region: &FarRegion, s: f64, tol: Tol) -> Estimate {
    if region.is_nothing() {
        return Estimate::default();
    }
    let breaks = angle_breaks(x, w, region);
    adaptive_breaks(|t| ray_potential(x, t, w, region, s), &breaks, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn everything_outside_a_square_from_its_center() {
        // int over the complement of [-1,1]^2 of |y|^(-2-s), by symmetric octants
        let s = 0.5;
        let w = Rect::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0));
        let e = far_potential(
            Vec2::default(),
            &w,
            &FarRegion::Everything,
            s,
            Tol::default(),
        );
        let oct =
            crate::quad::adaptive(|t: f64| t.cos().powf(s) / s, 0.0, PI / 4.0, Tol::default());
        assert!((e.value - 8.0 * oct.value).abs() < 1e-9);
    }

    #[test]
    fn half_plane_potential_matches_beta_formula() {
        // potential of {y < -d} at the origin equals B(1/2, (1+s)/2) d^-s / s
        let s = 0.3;
        let d = 2.0;
        let hs = AnalyticShape::half_space(Vec2::new(0.0, 1.0), -d).unwrap();
        let w = Rect::new(Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5));
        let e = far_potential(
            Vec2::default(),
            &w,
            &FarRegion::Inside(&hs),
            s,
            Tol::default(),
        );
        let beta = statrs::function::beta::beta(0.5, 0.5 * (1.0 + s));
        let exact = beta * d.powf(-s) / s;
        assert!(
            (e.value - exact).abs() < 1e-9 * exact,
            "{} {exact}",
            e.value
        );
    }
}
