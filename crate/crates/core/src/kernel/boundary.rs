//! Boundary route for sets bounded by segments and circular arcs.
//!
//! For disjoint `A`, `B` with piecewise smooth boundaries,
//! `L_s(A, B) = -(1/s^2) int_{dA} int_{dB} nu_A . nu_B |x - y|^(-s)`, and the
//! same double integral over `dE x dE` (with a plus sign) gives `P_s(E)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::QuadratureSpec;
use crate::geometry::{
    point_in_polygon, polygon_pieces, segment_distance, AnalyticShape, Piece, PlanarSet, Vec2,
};
use crate::quad::{adaptive, gauss_legendre, power_left, tanh_sinh, Estimate, Tol};
use crate::reduce::pairwise;

const MAX_DEPTH: u32 = 40;

/// Boundary pieces of a bounded ball, polygon or snowflake.
pub fn pieces_of(set: &PlanarSet) -> Option<Vec<Piece>> {
    match set {
        PlanarSet::Shape(s) => s.boundary_pieces(),
        PlanarSet::Koch(k) => Some(polygon_pieces(&k.boundary)),
        PlanarSet::Grid(_) => None,
    }
}

fn segment_segment(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    let r = b - a;
    let q = d - c;
    let den = r.cross(q);
    if den != 0.0 {
        let t = (c - a).cross(q) / den;
        let u = (c - a).cross(r) / den;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return 0.0;
        }
    }
    segment_distance(a, c, d)
        .min(segment_distance(b, c, d))
        .min(segment_distance(c, a, b))
        .min(segment_distance(d, a, b))
}

fn far_point_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    p.dist(a).max(p.dist(b))
}

/// Distance between two pieces; arcs are treated as their full circles,
/// which can only understate it.
fn piece_distance(p: &Piece, q: &Piece) -> f64 {
    match (*p, *q) {
        (Piece::Segment { a, b }, Piece::Segment { a: c, b: d }) => segment_segment(a, b, c, d),
        (Piece::Segment { a, b }, Piece::Arc { center, radius, .. })
        | (Piece::Arc { center, radius, .. }, Piece::Segment { a, b }) => {
            let near = segment_distance(center, a, b);
            let far = far_point_distance(center, a, b);
            (near - radius).max(radius - far).max(0.0)
        }
        (
            Piece::Arc {
                center: c1,
                radius: r1,
                ..
            },
            Piece::Arc {
                center: c2,
                radius: r2,
                ..
            },
        ) => {
            let d = c1.dist(c2);
            if d >= r1 + r2 {
                d - r1 - r2
            } else if d <= (r1 - r2).abs() {
                (r1 - r2).abs() - d
            } else {
                0.0
            }
        }
    }
}

fn piece_box(p: &Piece) -> (Vec2, Vec2) {
    match *p {
        Piece::Segment { a, b } => (
            Vec2::new(a.x.min(b.x), a.y.min(b.y)),
            Vec2::new(a.x.max(b.x), a.y.max(b.y)),
        ),
        Piece::Arc { center, radius, .. } => (
            center - Vec2::new(radius, radius),
            center + Vec2::new(radius, radius),
        ),
    }
}

/// Minimum distance between two boundaries.
pub fn boundary_distance(pa: &[Piece], pb: &[Piece]) -> f64 {
    let boxes_b: Vec<(Vec2, Vec2)> = pb.iter().map(piece_box).collect();
    pa.par_iter()
        .map(|p| {
            let (lo, hi) = piece_box(p);
            let mut best = f64::INFINITY;
            for (q, (qlo, qhi)) in pb.iter().zip(&boxes_b) {
                let gx = (qlo.x - hi.x).max(lo.x - qhi.x).max(0.0);
                let gy = (qlo.y - hi.y).max(lo.y - qhi.y).max(0.0);
                if gx.hypot(gy) >= best {
                    continue;
                }
                best = best.min(piece_distance(p, q));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn shape_contains(set: &PlanarSet, p: Vec2) -> bool {
    match set {
        PlanarSet::Shape(AnalyticShape::Polygon { vertices }) => point_in_polygon(vertices, p),
        PlanarSet::Koch(k) => point_in_polygon(&k.boundary, p),
        _ => set.contains(p),
    }
}

/// True when two boundary-described sets are at positive distance.
pub fn disjoint_bounded(a: &PlanarSet, b: &PlanarSet) -> bool {
    let (Some(pa), Some(pb)) = (pieces_of(a), pieces_of(b)) else {
        return false;
    };
    if let (Some(ra), Some(rb)) = (a.bbox(), b.bbox()) {
        let gap = (rb.min.x - ra.max.x)
            .max(ra.min.x - rb.max.x)
            .max(rb.min.y - ra.max.y)
            .max(ra.min.y - rb.max.y);
        if gap > 0.0 {
            return true;
        }
    }
    if boundary_distance(&pa, &pb) <= 0.0 {
        return false;
    }
    !shape_contains(b, pa[0].point(0.0)) && !shape_contains(a, pb[0].point(0.0))
}

/// True when one set strictly contains the boundary of the other, so that
/// their interiors certainly meet.
pub fn interiors_overlap(a: &PlanarSet, b: &PlanarSet) -> bool {
    let (Some(pa), Some(pb)) = (pieces_of(a), pieces_of(b)) else {
        return false;
    };
    if boundary_distance(&pa, &pb) <= 0.0 {
        return false;
    }
    shape_contains(b, pa[0].point(0.0)) || shape_contains(a, pb[0].point(0.0))
}

/// True when `inner` lies in the interior of `outer`.
pub fn strictly_inside(inner: &PlanarSet, outer: &PlanarSet) -> bool {
    let (Some(pa), Some(pb)) = (pieces_of(inner), pieces_of(outer)) else {
        return false;
    };
    boundary_distance(&pa, &pb) > 0.0
        && shape_contains(outer, pa[0].point(0.0))
        && !shape_contains(inner, pb[0].point(0.0))
}

fn split(p: &Piece) -> (Piece, Piece) {
    match *p {
        Piece::Segment { a, b } => {
            let m = (a + b) * 0.5;
            (Piece::Segment { a, b: m }, Piece::Segment { a: m, b })
        }
        Piece::Arc {
            center,
            radius,
            t0,
            t1,
        } => {
            let m = 0.5 * (t0 + t1);
            (
                Piece::Arc {
                    center,
                    radius,
                    t0,
                    t1: m,
                },
                Piece::Arc {
                    center,
                    radius,
                    t0: m,
                    t1,
                },
            )
        }
    }
}

/// Bounding circle of a piece whose arcs span at most pi.
fn bounding(p: &Piece) -> (Vec2, f64) {
    match *p {
        Piece::Segment { a, b } => ((a + b) * 0.5, 0.5 * a.dist(b)),
        Piece::Arc { radius, t0, t1, .. } => {
            (p.point(0.5), 2.0 * radius * (0.25 * (t1 - t0)).sin())
        }
    }
}

/// Arcs spanning more than `max_span` are cut into equal parts.
fn refine_arcs(pieces: &[Piece], max_span: f64) -> Vec<Piece> {
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        match *p {
            Piece::Arc {
                center,
                radius,
                t0,
                t1,
            } if t1 - t0 > max_span => {
                let k = ((t1 - t0) / max_span).ceil() as usize;
                for i in 0..k {
                    let a = t0 + (t1 - t0) * i as f64 / k as f64;
                    let b = t0 + (t1 - t0) * (i + 1) as f64 / k as f64;
                    out.push(Piece::Arc {
                        center,
                        radius,
                        t0: a,
                        t1: b,
                    });
                }
            }
            _ => out.push(*p),
        }
    }
    out
}

fn tensor(p: &Piece, q: &Piece, s: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let (lp, lq) = (p.length(), q.length());
    let mut acc = 0.0;
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        let u = 0.5 * (xi + 1.0);
        let (x, nx) = (p.point(u), p.normal(u));
        let mut inner = 0.0;
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            let v = 0.5 * (yj + 1.0);
            let (y, ny) = (q.point(v), q.normal(v));
            inner += wj * nx.dot(ny) * (x - y).norm2().powf(-0.5 * s);
        }
        acc += wi * inner;
    }
    0.25 * acc * lp * lq
}

/// `int_p int_q nu . nu |x - y|^(-s)` for pieces at positive distance.
fn disjoint_pair(p: &Piece, q: &Piece, s: f64, depth: u32) -> f64 {
    let (cp, rp) = bounding(p);
    let (cq, rq) = bounding(q);
    let d = cp.dist(cq) - rp - rq;
    let l = p.length().max(q.length());
    let ratio = if d > 0.0 { l / d } else { f64::INFINITY };
    let n = if ratio < 0.1 {
        3
    } else if ratio < 0.25 {
        4
    } else if ratio < 1.0 {
        8
    } else if ratio < 2.0 || depth >= MAX_DEPTH {
        16
    } else {
        0
    };
    if n > 0 {
        return tensor(p, q, s, n);
    }
    if p.length() >= q.length() {
        let (a, b) = split(p);
        disjoint_pair(&a, q, s, depth + 1) + disjoint_pair(&b, q, s, depth + 1)
    } else {
        let (a, b) = split(q);
        disjoint_pair(p, &a, s, depth + 1) + disjoint_pair(p, &b, s, depth + 1)
    }
}

/// Self term of a straight segment.
fn self_segment(len: f64, s: f64) -> f64 {
    2.0 * len.powf(2.0 - s) / ((1.0 - s) * (2.0 - s))
}

/// Self term of an arc of radius `r` spanning `phi`.
fn self_arc(r: f64, phi: f64, s: f64, tol: Tol) -> Estimate {
    let g = |t: f64| 2.0 * (phi - t) * t.cos();
    let half = 0.5 * phi;
    // near t = 0 the kernel behaves like t^-s
    let chord = |t: f64| {
        if t < 1e-4 {
            1.0 - t * t / 24.0
        } else {
            2.0 * (0.5 * t).sin() / t
        }
    };
    let left = power_left(|t, _| g(t) * chord(t).powf(-s), 0.0, half, s, tol);
    let right = tanh_sinh(
        |t, _, _| g(t) * (2.0 * (0.5 * t).sin()).powf(-s),
        half,
        phi,
        tol,
    );
    (left + right) * r.powf(2.0 - s)
}

/// Two segments meeting at a common endpoint: `u1`, `u2` point away from
/// the corner and `cos_n` is the product of their normals.
fn corner_pair(l1: f64, l2: f64, u1: Vec2, u2: Vec2, cos_n: f64, s: f64, tol: Tol) -> Estimate {
    let c = u1.dot(u2);
    let f = |q: f64| (1.0 + q * q - 2.0 * q * c).max(0.0).powf(-0.5 * s);
    let a = adaptive(|w| f(w * l2 / l1), 0.0, 1.0, tol) * (l2 / l1 * l1.powf(2.0 - s) / (2.0 - s));
    let b = adaptive(|w| f(w * l1 / l2), 0.0, 1.0, tol) * (l1 / l2 * l2.powf(2.0 - s) / (2.0 - s));
    (a + b) * cos_n
}

fn shared_corner(p: &Piece, q: &Piece) -> Option<(Vec2, Vec2, Vec2)> {
    let (Piece::Segment { a, b }, Piece::Segment { a: c, b: d }) = (*p, *q) else {
        return None;
    };
    if b == c {
        Some((b, a, d))
    } else if a == d {
        Some((a, b, c))
    } else {
        None
    }
}

fn sum_estimates(v: Vec<Estimate>) -> Estimate {
    let vals: Vec<f64> = v.iter().map(|e| e.value).collect();
    let errs: Vec<f64> = v.iter().map(|e| e.error).collect();
    Estimate::new(pairwise(&vals), pairwise(&errs))
}

fn with_rounding(raw: Vec<f64>, extra: Estimate) -> Estimate {
    let mag = pairwise(&raw.iter().map(|x| x.abs()).collect::<Vec<_>>());
    Estimate::new(pairwise(&raw) + extra.value, 1e-9 * mag + extra.error)
}

/// `int_{dA} int_{dB} nu_A . nu_B |x - y|^(-s)` for boundaries at positive
/// distance.
pub fn cross_integral(pa: &[Piece], pb: &[Piece], s: f64) -> Estimate {
    let pa = refine_arcs(pa, PI / 8.0);
    let pb = refine_arcs(pb, PI / 8.0);
    let raw: Vec<f64> = pa
        .par_iter()
        .map(|p| {
            pairwise(
                &pb.iter()
                    .map(|q| disjoint_pair(p, q, s, 0))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    with_rounding(raw, Estimate::default())
}

/// `int_{dE} int_{dE} nu . nu |x - y|^(-s)` for a closed curve made of
/// segments or of full-circle arcs.
pub fn self_integral(pieces: &[Piece], s: f64, tol: Tol) -> Estimate {
    let singular: Vec<Estimate> = pieces
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let own = match *p {
                Piece::Segment { .. } => Estimate::exact(self_segment(p.length(), s)),
                Piece::Arc { radius, t0, t1, .. } => self_arc(radius, t1 - t0, s, tol),
            };
            let mut out = own;
            // each adjacent pair counted in both orders
            let next = &pieces[(i + 1) % pieces.len()];
            if pieces.len() > 1 {
                if let Some((corner, e1, e2)) = shared_corner(p, next) {
                    let cos_n = p.normal(0.5).dot(next.normal(0.5));
                    let c = corner_pair(
                        corner.dist(e1),
                        corner.dist(e2),
                        (e1 - corner).unit(),
                        (e2 - corner).unit(),
                        cos_n,
                        s,
                        tol,
                    );
                    out = out + c * 2.0;
                }
            }
            out
        })
        .collect();
    let singular = sum_estimates(singular);
    let m = pieces.len();
    let adjacent = |i: usize, j: usize| m > 1 && ((i + 1) % m == j || (j + 1) % m == i);
    let raw: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in (i + 1)..m {
                if adjacent(i, j) {
                    continue;
                }
                row.push(2.0 * disjoint_pair(&pieces[i], &pieces[j], s, 0));
            }
            pairwise(&row)
        })
        .collect();
    with_rounding(raw, singular)
}

/// `L_s(A, B)` for disjoint sets.
pub fn interaction(pa: &[Piece], pb: &[Piece], s: f64, _quad: &QuadratureSpec) -> Estimate {
    cross_integral(pa, pb, s) * (-1.0 / (s * s))
}

/// `P_s(E)` of a set bounded by the given closed curve.
pub fn perimeter(pieces: &[Piece], s: f64, quad: &QuadratureSpec) -> Estimate {
    let tol = Tol::new(quad.abs_tol * 1e-4, 1e-12);
    self_integral(pieces, s, tol) * (1.0 / (s * s))
}

/// `L_s(A, complement of Omega)` for `A` strictly inside `Omega`.
pub fn interaction_with_complement(pa: &[Piece], pomega: &[Piece], s: f64) -> Estimate {
    cross_integral(pa, pomega, s) * (1.0 / (s * s))
}
