//! Box-counting dimension of boundaries, the dimension `Dim_F` read off from
//! where `P_s^L` stops converging, and the snowflake lower-bound series.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    koch_snowflake, AnalyticShape, GridSet, IntervalSet, KochApproximation, PlanarSet, Vec2,
};
use crate::kernel::{FracParams, QuadratureSpec, Region};
use crate::perimeter::s_perimeter;
use crate::quad::gauss_legendre;
use crate::reduce::pairwise;

/// Ratio assumed between consecutive increment ratios when extrapolating a
/// ladder; calibrated on the snowflake, where `r_k - r_inf` halves per step.
pub const LADDER_Q: f64 = 0.5;

/// Top generation of the snowflake ladder.
pub const KOCH_LADDER_TOP: usize = 5;

/// `2 - log 4 / log 3`, the threshold of the snowflake.
pub fn koch_threshold() -> f64 {
    2.0 - 4f64.ln() / 3f64.ln()
}

/// Boundary curves to be covered by boxes.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Polylines, each given by its vertices in order.
    Polylines(Vec<Vec<Vec2>>),
    /// Interface between set and complement cells of a grid.
    Grid(GridSet),
}

impl Boundary {
    /// Closed boundary polygon of a snowflake approximation.
    pub fn koch(k: &KochApproximation) -> Boundary {
        let mut v = k.boundary.clone();
        v.push(v[0]);
        Boundary::Polylines(vec![v])
    }

    fn segments(&self) -> Vec<(Vec2, Vec2)> {
        match self {
            Boundary::Polylines(lines) => lines
                .iter()
                .flat_map(|l| l.windows(2).map(|w| (w[0], w[1])))
                .collect(),
            Boundary::Grid(g) => g.interface_edges(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRow {
    pub delta: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountTrace {
    pub rows: Vec<BoxCountRow>,
}

impl BoxCountTrace {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                .expect("csv is utf-8"),
        )
    }
}

/// Index of the half-open box containing coordinate `u` (in box units);
/// values within rounding of a grid line snap onto it.
fn box_index(u: f64) -> i64 {
    let r = u.round();
    if (u - r).abs() < 1e-9 {
        r as i64
    } else {
        u.floor() as i64
    }
}

/// Half-open boxes `[i d, (i+1) d) x [j d, (j+1) d)`, relative to `anchor`,
/// met by the segment `p q`.
fn segment_boxes(p: Vec2, q: Vec2, anchor: Vec2, d: f64, out: &mut HashSet<(i64, i64)>) {
    let (u0, v0) = ((p.x - anchor.x) / d, (p.y - anchor.y) / d);
    let (u1, v1) = ((q.x - anchor.x) / d, (q.y - anchor.y) / d);
    let mut ts = vec![0.0, 1.0];
    for (a, b) in [(u0, u1), (v0, v1)] {
        if a != b {
            let (lo, hi) = (a.min(b).ceil() as i64, a.max(b).floor() as i64);
            for k in lo..=hi {
                let t = (k as f64 - a) / (b - a);
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let at = |t: f64| (box_index(u0 + t * (u1 - u0)), box_index(v0 + t * (v1 - v0)));
    for w in ts.windows(2) {
        out.insert(at(w[0]));
        if w[1] > w[0] {
            let m = 0.5 * (w[0] + w[1]);
            out.insert((
                ((u0 + m * (u1 - u0)).floor()) as i64,
                ((v0 + m * (v1 - v0)).floor()) as i64,
            ));
        }
    }
    out.insert(at(1.0));
}

/// Number of boxes of side `delta` meeting the boundary, on a grid anchored
/// at the lower-left corner of the boundary's bounding box.
pub fn box_count(boundary: &Boundary, deltas: &[f64]) -> Result<BoxCountTrace> {
    let segs = boundary.segments();
    if segs.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    if deltas.iter().any(|d| !(*d > 0.0 && d.is_finite()))
        || deltas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Domain(
            "box sides must be positive and strictly decreasing".into(),
        ));
    }
    let mut anchor = Vec2::new(f64::INFINITY, f64::INFINITY);
    for (p, q) in &segs {
        anchor = Vec2::new(anchor.x.min(p.x).min(q.x), anchor.y.min(p.y).min(q.y));
    }
    let rows = deltas
        .par_iter()
        .map(|&d| {
            let mut boxes = HashSet::new();
            for (p, q) in &segs {
                segment_boxes(*p, *q, anchor, d, &mut boxes);
            }
            BoxCountRow {
                delta: d,
                count: boxes.len() as u64,
            }
        })
        .collect();
    Ok(BoxCountTrace { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub stderr: f64,
    /// `(delta_max, delta_min)` for box counts; the bracketing pair of `s`
    /// values for `Dim_F`.
    pub fit_range: (f64, f64),
}

/// Least-squares slope of `log N` against `-log delta`.
pub fn dimension_fit(trace: &BoxCountTrace) -> Result<DimensionEstimate> {
    let m = trace.rows.len();
    if m < 4 {
        return Err(Error::InsufficientRows { needed: 4, got: m });
    }
    let xs: Vec<f64> = trace.rows.iter().map(|r| -r.delta.ln()).collect();
    let ys: Vec<f64> = trace
        .rows
        .iter()
        .map(|r| (r.count.max(1) as f64).ln())
        .collect();
    let mf = m as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / mf, ys.iter().sum::<f64>() / mf);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = (sse / (mf - 2.0) / sxx).sqrt();
    let dmax = trace.rows.iter().map(|r| r.delta).fold(0.0, f64::max);
    let dmin = trace
        .rows
        .iter()
        .map(|r| r.delta)
        .fold(f64::INFINITY, f64::min);
    Ok(DimensionEstimate {
        value: slope.clamp(0.0, 2.0),
        stderr,
        fit_range: (dmax, dmin),
    })
}

/// One `s` of a `Dim_F` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub s: f64,
    /// `P_s^L` along the ladder, coarse to fine.
    pub values: Vec<f64>,
    /// Ratios of consecutive increments.
    pub ratios: Vec<f64>,
    /// Limit of the ratios, extrapolated with [`LADDER_Q`].
    pub limit_ratio: f64,
    pub divergent: bool,
}

fn inscribed_polygon(center: Vec2, radius: f64, m: usize) -> Result<PlanarSet> {
    let v = (0..m)
        .map(|j| center + Vec2::polar(TAU * j as f64 / m as f64) * radius)
        .collect();
    Ok(PlanarSet::Shape(AnalyticShape::polygon(v)?))
}

/// Keep the `m` longest intervals.
fn longest_intervals(e: &IntervalSet, m: usize) -> Result<IntervalSet> {
    let mut iv = e.intervals().to_vec();
    iv.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)));
    iv.truncate(m);
    crate::geometry::make_interval_set(&iv)
}

/// Approximations of `e` refining towards it, each with the quadrature to
/// evaluate it. Snowflakes climb the generations up to
/// [`KOCH_LADDER_TOP`], balls use inscribed polygons with `8 * 2^j` sides,
/// interval sets keep their `2^j` longest pieces, and other planar shapes
/// are rasterized at doubling resolutions.
fn ladder(e: &Region, quad: &QuadratureSpec) -> Result<Vec<(Region, QuadratureSpec)>> {
    let same = |r: Region| (r, quad.clone());
    Ok(match e {
        Region::Plane(PlanarSet::Koch(k)) => (0..=KOCH_LADDER_TOP)
            .map(|g| same(Region::Plane(PlanarSet::Koch(koch_snowflake(g, k.side)))))
            .collect(),
        Region::Plane(PlanarSet::Shape(AnalyticShape::Ball { center, radius })) => (0..6)
            .map(|j| inscribed_polygon(*center, *radius, 8 << j).map(|p| same(Region::Plane(p))))
            .collect::<Result<_>>()?,
        Region::Plane(PlanarSet::Shape(AnalyticShape::Polygon { .. })) => {
            (0..4).map(|_| same(e.clone())).collect()
        }
        Region::Plane(PlanarSet::Shape(_)) => (0..4)
            .map(|j| {
                let mut q = quad.clone();
                q.resolution = 16 << j;
                // the rasterization error is what the ladder measures
                q.abs_tol = f64::MAX;
                q.rel_tol = f64::MAX;
                (e.clone(), q)
            })
            .collect(),
        Region::Plane(PlanarSet::Grid(_)) => {
            return Err(Error::Unsupported("a grid has no refinement ladder".into()))
        }
        Region::Line(iv) => {
            let top = (iv.len().max(1) as f64).log2().ceil() as usize;
            (0..=top.max(3))
                .map(|j| longest_intervals(iv, 1 << j).map(|x| same(Region::Line(x))))
                .collect::<Result<_>>()?
        }
    })
}

fn classify(s: f64, values: Vec<f64>) -> LadderRow {
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let ratios: Vec<f64> = inc
        .windows(2)
        .map(|w| {
            if w[0].abs() > 1e-12 * scale {
                w[1] / w[0]
            } else {
                0.0
            }
        })
        .collect();
    let n = ratios.len();
    let settled = inc.last().is_none_or(|d| d.abs() <= 1e-12 * scale);
    let limit_ratio = if settled || n == 0 {
        0.0
    } else if n == 1 {
        ratios[0]
    } else {
        (ratios[n - 1] - LADDER_Q * ratios[n - 2]) / (1.0 - LADDER_Q)
    };
    // growth needs increments of one sign
    let growing = inc.iter().all(|d| *d > 0.0) || inc.iter().all(|d| *d < 0.0);
    LadderRow {
        s,
        values,
        ratios,
        limit_ratio,
        divergent: !settled && growing && limit_ratio >= 1.0,
    }
}

/// `P_s^L(E, Omega)` along a refinement ladder of `E` for every `s`.
pub fn dim_f_scan(
    e: &Region,
    omega_set: &Region,
    s_list: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<LadderRow>> {
    let n = match e {
        Region::Line(_) => 1,
        Region::Plane(_) => 2,
    };
    if s_list.is_empty()
        || s_list.iter().any(|s| !(*s > 0.0 && *s < 1.0))
        || s_list.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Domain(
            "s values must lie in (0, 1) and increase".into(),
        ));
    }
    let steps = ladder(e, quad)?;
    if steps.len() < 4 {
        return Err(Error::InsufficientRows {
            needed: 4,
            got: steps.len(),
        });
    }
    s_list
        .par_iter()
        .map(|&s| {
            let params = FracParams::new(n, s)?;
            let values = steps
                .iter()
                .map(|(r, q)| s_perimeter(r, omega_set, params, q).map(|b| b.local))
                .collect::<Result<Vec<f64>>>()?;
            Ok(classify(s, values))
        })
        .collect()
}

/// `Dim_F` from a classified scan: `n` minus the largest convergent `s`
/// below the first divergent one, with half the gap as error. A scan with
/// no divergent `s` returns `n - 1`, the value for sets of finite perimeter,
/// with the distance from the last `s` to 1 as error.
pub fn dim_f_from_scan(rows: &[LadderRow], n: usize) -> Result<DimensionEstimate> {
    let nf = n as f64;
    let Some(first_div) = rows.iter().position(|r| r.divergent) else {
        let s_max = rows.last().map(|r| r.s).ok_or(Error::Inconclusive)?;
        return Ok(DimensionEstimate {
            value: nf - 1.0,
            stderr: 1.0 - s_max,
            fit_range: (s_max, 1.0),
        });
    };
    if first_div == 0 || rows[first_div..].iter().any(|r| !r.divergent) {
        return Err(Error::Inconclusive);
    }
    let (sc, sd) = (rows[first_div - 1].s, rows[first_div].s);
    Ok(DimensionEstimate {
        value: nf - sc,
        stderr: 0.5 * (sd - sc),
        fit_range: (sc, sd),
    })
}

/// `Dim_F(E, Omega) = n - sup{s : P_s^L(E, Omega) < infinity}` estimated on
/// the given `s` values.
pub fn dim_f_estimate(
    e: &Region,
    omega_set: &Region,
    s_list: &[f64],
    quad: &QuadratureSpec,
) -> Result<DimensionEstimate> {
    let rows = dim_f_scan(e, omega_set, s_list, quad)?;
    let n = if matches!(e, Region::Line(_)) { 1 } else { 2 };
    dim_f_from_scan(&rows, n)
}

/// Lower-bound series for `P_s` of the snowflake.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KochSeries {
    pub s: f64,
    /// `4 / 3^(2-s)`.
    pub ratio: f64,
    /// `L_s(T, B_1((0, 15)))` for the unit triangle `T`.
    pub interaction: f64,
    /// Partial sums for `K = 0, 1, ...`.
    pub partial_sums: Vec<f64>,
}

/// Unit equilateral triangle with barycenter at the origin and a vertex on
/// the positive vertical axis.
pub fn unit_triangle() -> [Vec2; 3] {
    let k = koch_snowflake(0, 1.0);
    [k.boundary[0], k.boundary[1], k.boundary[2]]
}

/// `int_T int_B |x - y|^(-2-s)` by tensor Gauss rules: the triangle as a
/// collapsed square, the disk in polar coordinates. Only meant for sets far
/// apart compared with their size.
fn far_interaction(t: [Vec2; 3], center: Vec2, radius: f64, s: f64) -> f64 {
    let g = gauss_legendre(12);
    let unit: Vec<(f64, f64)> = g
        .nodes
        .iter()
        .zip(&g.weights)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let area2 = (t[1] - t[0]).cross(t[2] - t[0]).abs();
    let mut tri = Vec::new();
    for &(u, wu) in &unit {
        for &(v, wv) in &unit {
            // (u, v) -> t0 + u (t1 - t0) + u v (t2 - t1), Jacobian 2|T| u
            let p = t[0] + (t[1] - t[0]) * u + (t[2] - t[1]) * (u * v);
            tri.push((p, wu * wv * area2 * u));
        }
    }
    let m = 32;
    let mut disk = Vec::new();
    for &(r, wr) in &unit {
        for k in 0..m {
            let th = TAU * (k as f64 + 0.5) / m as f64;
            disk.push((
                center + Vec2::polar(th) * (radius * r),
                wr * radius * radius * r * TAU / m as f64,
            ));
        }
    }
    let rows: Vec<f64> = tri
        .par_iter()
        .map(|&(x, wx)| {
            wx * pairwise(
                &disk
                    .iter()
                    .map(|&(y, wy)| wy * x.dist(y).powf(-2.0 - s))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    pairwise(&rows)
}

/// Partial sums of `(3 / 3^(2-s)) L_s(T, B_1((0, 15))) sum_{k<=K} (4 / 3^(2-s))^k`.
pub fn koch_series_bound(s: f64, k_max: usize) -> Result<KochSeries> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} must lie in (0, 1)")));
    }
    let ratio = 4.0 * 3f64.powf(s - 2.0);
    let interaction = far_interaction(unit_triangle(), Vec2::new(0.0, 15.0), 1.0, s);
    let lead = 3.0 * 3f64.powf(s - 2.0) * interaction;
    let mut partial_sums = Vec::with_capacity(k_max + 1);
    let (mut acc, mut term) = (0.0, 1.0);
    for _ in 0..=k_max {
        acc += term;
        partial_sums.push(lead * acc);
        term *= ratio;
    }
    Ok(KochSeries {
        s,
        ratio,
        interaction,
        partial_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_boundary_at_half() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 0.0),
        ];
        let t = box_count(&Boundary::Polylines(vec![sq]), &[0.5]).unwrap();
        assert_eq!(t.rows[0].count, 8);
    }

    #[test]
    fn segment_counts() {
        let seg = Boundary::Polylines(vec![vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]]);
        for m in [3usize, 7, 10] {
            let c = box_count(&seg, &[1.0 / m as f64]).unwrap().rows[0].count as usize;
            assert!(c == m || c == m + 1, "{m} {c}");
        }
    }

    #[test]
    fn threshold_ratio_is_one() {
        let r = koch_series_bound(koch_threshold(), 3).unwrap().ratio;
        assert!((r - 1.0).abs() < 1e-12);
    }
}
