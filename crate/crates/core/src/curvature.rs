//! Fractional mean curvature `I_s[E](x) = PV int (chi_E - chi_{E^c})(y) |x - y|^(-2-s) dy`
//! in the plane.
//!
//! Around a boundary point the integral is written radially,
//! `I^rho = int_rho^inf A(r) r^(-1-s) dr` with `A(r) = 2 Theta_E(x, r) - 2 pi`
//! and `Theta_E(x, r)` the angle of the circle `|y - x| = r` inside `E`.
//! For boundaries that are `C^2` at `x`, `A(r) = O(r)` and the limit
//! `rho -> 0` is an ordinary integral.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    arcs_measure, intersect_arcs, AnalyticShape, Arcs, GridSet, PlanarSet, Vec2,
};
use crate::kernel::boundary;
use crate::kernel::far::{far_potential, FarRegion};
use crate::kernel::{omega, FracParams, QuadratureSpec};
use crate::perimeter::{AsymptoticRow, AsymptoticTable};
use crate::quad::{adaptive, adaptive_breaks, gauss, power_left, Estimate, Tol};
use crate::reduce::pairwise;

/// Principal value with its truncation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureResult {
    /// Limit `rho -> 0`.
    pub value: f64,
    pub error: f64,
    /// `(rho, I^rho)` for decreasing `rho`.
    pub pv_trace: Vec<(f64, f64)>,
    /// Largest increment between successive trace entries over the last
    /// three radii.
    pub cauchy_gap: f64,
}

const DEFAULT_LEVELS: usize = 8;

fn on_boundary(e: &AnalyticShape, x: Vec2) -> Result<()> {
    let d = match e {
        AnalyticShape::Subgraph { .. } => x.y - e.graph(x.x),
        _ => e.signed_distance(x),
    };
    let scale = 1.0 + x.norm() + e.bbox().map_or(0.0, |b| b.diameter());
    if d.abs() > 1e-9 * scale {
        return Err(Error::NotOnBoundary {
            x: x.x,
            y: x.y,
            distance: d,
        });
    }
    Ok(())
}

/// Scale below which the boundary near `x` looks like its tangent.
fn local_feature_size(e: &AnalyticShape, x: Vec2) -> Result<f64> {
    Ok(match e {
        AnalyticShape::Ball { radius, .. } => *radius,
        AnalyticShape::HalfSpace { .. } => 1.0,
        AnalyticShape::Subgraph { radius, .. } => 0.5 * radius,
        AnalyticShape::Polygon { vertices } => {
            let d = vertices
                .iter()
                .map(|v| v.dist(x))
                .fold(f64::INFINITY, f64::min);
            let size = vertices_diameter(vertices);
            if d <= 1e-12 * size {
                return Err(Error::NoCancellation {
                    ratio: f64::INFINITY,
                });
            }
            d
        }
    })
}

fn vertices_diameter(v: &[Vec2]) -> f64 {
    crate::geometry::vertices_bbox(v).diameter()
}

/// Angular windows of the square `|y - x|_inf < half` on the circle of radius `r`.
fn square_arcs(r: f64, half: f64) -> Arcs {
    if r <= half {
        return vec![(-PI, PI)];
    }
    if r >= half * 2f64.sqrt() {
        return Vec::new();
    }
    let b = (half / r).acos();
    let a = (half / r).asin();
    vec![(-PI + b, -PI + a), (-a, -b), (b, a), (PI - a, PI - b)]
}

/// `A(r)`, optionally restricted to the square of half-width `clip`.
fn angular_excess(e: &AnalyticShape, x: Vec2, r: f64, clip: Option<f64>) -> f64 {
    let inside = e.circle_arcs(x, r);
    match clip {
        None => 2.0 * arcs_measure(&inside) - 2.0 * PI,
        Some(h) => {
            let k = square_arcs(r, h);
            2.0 * arcs_measure(&intersect_arcs(&inside, &k)) - arcs_measure(&k)
        }
    }
}

/// Radii where `A` has kinks, plus the radius beyond which it is constant
/// (if any).
fn radial_breaks(e: &AnalyticShape, x: Vec2) -> (Vec<f64>, Option<f64>) {
    match e {
        AnalyticShape::Ball { center, radius } => {
            let d = x.dist(*center);
            let v = vec![(d - radius).abs(), d + radius];
            (v, Some(d + radius))
        }
        AnalyticShape::Polygon { vertices } => {
            let v: Vec<f64> = vertices.iter().map(|p| p.dist(x)).collect();
            let far = v.iter().cloned().fold(0.0, f64::max);
            (v, Some(far))
        }
        AnalyticShape::Subgraph { radius, .. } => {
            (vec![(x.x + radius).abs(), (x.x - radius).abs()], None)
        }
        AnalyticShape::HalfSpace { .. } => (Vec::new(), None),
    }
}

fn resolve_radii(quad: &QuadratureSpec, r_loc: f64) -> Vec<f64> {
    if quad.pv_radii.is_empty() {
        (1..=DEFAULT_LEVELS)
            .map(|j| r_loc * 0.5f64.powi(j as i32))
            .collect()
    } else {
        quad.pv_radii.clone()
    }
}

/// Radial PV integral with an optional square clip.
fn radial_pv(
    e: &AnalyticShape,
    x: Vec2,
    s: f64,
    quad: &QuadratureSpec,
    clip: Option<f64>,
) -> Result<CurvatureResult> {
    quad.validate()?;
    on_boundary(e, x)?;
    let r_loc = match clip {
        Some(h) => local_feature_size(e, x)?.min(h),
        None => local_feature_size(e, x)?,
    };
    let radii = resolve_radii(quad, r_loc);
    let rho_min = *radii.last().unwrap();
    let tol = Tol::new(quad.abs_tol * 1e-3, (quad.rel_tol * 1e-3).max(1e-12));
    let a = |r: f64| angular_excess(e, x, r, clip);

    // outer radius and what lies beyond it
    let (mut kinks, const_beyond) = radial_breaks(e, x);
    let (r_out, tail) = match clip {
        Some(h) => {
            kinks.push(h);
            kinks.push(h * 2f64.sqrt());
            (h * 2f64.sqrt(), Some(0.0))
        }
        None => match const_beyond {
            Some(r) => (
                r.max(radii[0]),
                Some(-2.0 * PI * r.max(radii[0]).powf(-s) / s),
            ),
            None => (kinks.iter().cloned().fold(radii[0], f64::max) * 2.0, None),
        },
    };

    // panels between successive trace radii, then out to r_out
    let mut nodes: Vec<f64> = radii.iter().cloned().chain([r_out]).collect();
    nodes.sort_by(|p, q| q.total_cmp(p));
    nodes.dedup();
    let mut panels: Vec<Estimate> = Vec::with_capacity(nodes.len());
    for w in nodes.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        let mut br: Vec<f64> = vec![lo];
        br.extend(kinks.iter().cloned().filter(|k| *k > lo && *k < hi));
        br.push(hi);
        br.sort_by(|p, q| p.total_cmp(q));
        panels.push(adaptive_breaks(|r| a(r) * r.powf(-1.0 - s), &br, tol));
    }
    let outer = match tail {
        Some(v) => Estimate::exact(v),
        // int_R^inf A(r) r^(-1-s) dr = (1/s) int_0^{R^-s} A(u^(-1/s)) du
        None => {
            adaptive(
                |u| if u <= 0.0 { 0.0 } else { a(u.powf(-1.0 / s)) },
                0.0,
                r_out.powf(-s),
                tol,
            ) * (1.0 / s)
        }
    };
    // A(r) / r loses all digits for tiny r; it tends to a constant there
    let r_floor = 1e-4 * rho_min;
    let inner = power_left(
        |r, _| {
            let r = r.max(r_floor);
            a(r) / r
        },
        0.0,
        rho_min,
        s,
        tol,
    );

    // nodes[0] = r_out, the rest are the trace radii in decreasing order
    let mut acc = outer;
    let mut trace = Vec::with_capacity(radii.len());
    let mut k = 0;
    for (i, p) in panels.iter().enumerate() {
        acc = acc + *p;
        let rho = nodes[i + 1];
        while k < radii.len() && radii[k] >= rho {
            if radii[k] == rho {
                trace.push((rho, acc.value));
            }
            k += 1;
        }
    }
    let total = acc + inner;
    let gaps: Vec<f64> = trace.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let tail_gaps = &gaps[gaps.len().saturating_sub(3)..];
    let cauchy_gap = tail_gaps.iter().cloned().fold(0.0, f64::max);
    if gaps.len() >= 2 {
        let (first, last) = (gaps[0], *gaps.last().unwrap());
        let floor = 1e-12 * (1.0 + total.value.abs());
        if last > floor && last >= first {
            return Err(Error::NoCancellation {
                ratio: last / first.max(f64::MIN_POSITIVE),
            });
        }
    }
    Ok(CurvatureResult {
        value: total.value,
        error: total.error,
        pv_trace: trace,
        cauchy_gap,
    })
}

/// `I_s[E](x)` for `x` on the boundary. Half-spaces take the exact
/// cancellation path and return zero.
pub fn fmc_pv(
    e: &AnalyticShape,
    x: Vec2,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<CurvatureResult> {
    if params.n != 2 {
        return Err(Error::Domain("curvature is implemented for n = 2".into()));
    }
    if let AnalyticShape::HalfSpace { .. } = e {
        quad.validate()?;
        on_boundary(e, x)?;
        let radii = resolve_radii(quad, 1.0);
        return Ok(CurvatureResult {
            value: 0.0,
            error: 0.0,
            pv_trace: radii.into_iter().map(|r| (r, 0.0)).collect(),
            cauchy_gap: 0.0,
        });
    }
    radial_pv(e, x, params.s, quad, None)
}

/// Same integral by radial quadrature for every shape, half-spaces included.
pub fn fmc_pv_quadrature(
    e: &AnalyticShape,
    x: Vec2,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<CurvatureResult> {
    if params.n != 2 {
        return Err(Error::Domain("curvature is implemented for n = 2".into()));
    }
    radial_pv(e, x, params.s, quad, None)
}

/// Principal value restricted to the square `|y - x|_inf < half`.
pub fn fmc_pv_cylinder(
    e: &AnalyticShape,
    x: Vec2,
    half: f64,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<CurvatureResult> {
    if !(half > 0.0) {
        return Err(Error::Domain(format!(
            "cylinder half-width {half} must be positive"
        )));
    }
    radial_pv(e, x, params.s, quad, Some(half))
}

/// Estimated Hoelder exponent of `u'` from oscillations at dyadic scales.
fn holder_exponent(e: &AnalyticShape) -> f64 {
    let AnalyticShape::Subgraph { radius, samples } = e else {
        return 1.0;
    };
    let m = samples.len();
    let step = 2.0 * radius / (m - 1) as f64;
    let slopes: Vec<f64> = (0..m)
        .map(|k| e.graph_slope(-radius + step * k as f64))
        .collect();
    let osc = |lag: usize| -> f64 {
        (0..m - lag)
            .map(|k| (slopes[k + lag] - slopes[k]).abs())
            .fold(0.0, f64::max)
    };
    let mut pts = Vec::new();
    let mut lag = 1;
    while lag < m / 4 {
        let o = osc(lag);
        if o > 1e-12 {
            pts.push(((lag as f64 * step).ln(), o.ln()));
        }
        lag *= 2;
    }
    if pts.len() < 2 {
        return 1.0;
    }
    // smallest slope between neighbouring scales
    pts.windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// `2 int_{|y'| < r} (int_0^{u(y')/|y'|} (1 + t^2)^(-(2+s)/2) dt) |y'|^(-1-s) dy'`
/// for a tabulated graph on `[-r, r]`.
pub fn fmc_graph_local(u: &AnalyticShape, params: FracParams) -> Result<f64> {
    let AnalyticShape::Subgraph { radius, .. } = u else {
        return Err(Error::Domain(
            "the graph formula needs a tabulated subgraph".into(),
        ));
    };
    if params.n != 2 {
        return Err(Error::Domain(
            "the graph formula is implemented for n = 2".into(),
        ));
    }
    let s = params.s;
    let alpha = holder_exponent(u);
    if alpha <= s {
        return Err(Error::Regularity { alpha, s });
    }
    // with t = tan(theta) the inner integrand is cos(theta)^s
    let inner = |q: f64| {
        let th = q.atan();
        gauss(|t| t.cos().powf(s), 0.0, th, 32)
    };
    let tol = Tol::new(1e-14, 1e-11);
    // smooth in d with a finite limit; the floor keeps graph(y) / d from underflowing
    let floor = 1e-9 * radius;
    let g = |y: f64, d: f64| {
        let d = d.max(floor);
        2.0 * inner(u.graph(y.signum() * d) / d) / d
    };
    let right = power_left(g, 0.0, *radius, s, tol);
    let left = power_left(|y, d| g(-y, d), 0.0, *radius, s, tol);
    Ok((right + left).value)
}

/// `(1 - s) I_s[E](x)` over `s_list` with target `omega_1 |H|`, `H` the
/// curvature of the boundary at `x`.
pub fn fmc_asymptotic_scan(
    e: &AnalyticShape,
    x: Vec2,
    s_list: &[f64],
    quad: &QuadratureSpec,
) -> Result<AsymptoticTable> {
    for w in s_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain("s values must be strictly increasing".into()));
        }
    }
    let h = match e {
        AnalyticShape::Ball { radius, .. } => 1.0 / radius,
        AnalyticShape::HalfSpace { .. } | AnalyticShape::Polygon { .. } => 0.0,
        AnalyticShape::Subgraph { .. } => {
            let d = 1e-4;
            let u2 = (e.graph(x.x + d) - 2.0 * e.graph(x.x) + e.graph(x.x - d)) / (d * d);
            let u1 = e.graph_slope(x.x);
            u2 / (1.0 + u1 * u1).powf(1.5)
        }
    };
    let target = omega(1.0) * h.abs();
    let rows: Result<Vec<AsymptoticRow>> = s_list
        .par_iter()
        .map(|&s| {
            let c = fmc_pv(e, x, FracParams::new(2, s)?, quad)?;
            Ok(AsymptoticRow {
                s,
                scaled_value: (1.0 - s) * c.value,
                target,
                error: (1.0 - s) * c.error,
            })
        })
        .collect();
    Ok(AsymptoticTable { rows: rows? })
}

// ---------------------------------------------------------------------------
// grid residual

/// Residual of a grid set at one interface edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    /// Edge midpoint.
    pub x: Vec2,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    pub max_abs: f64,
    pub entries: Vec<ResidualEntry>,
}

const EDGE_TABLE: i64 = 24;

/// `V(a, b) = int |y|^(-2-s) dy` over the unit cell centred at `(a, b + 1/2)`
/// with the unit disk removed.
struct EdgeKernel {
    s: f64,
    table: Vec<f64>,
}

fn edge_entry(a: i64, b: i64, s: f64) -> f64 {
    let p = 2.0 + s;
    let tol = Tol::new(1e-15, 1e-12);
    let (x0, x1) = (a as f64 - 0.5, a as f64 + 0.5);
    let (y0, y1) = (b as f64, b as f64 + 1.0);
    let inner = |x: f64| {
        let w = (1.0 - x * x).max(0.0).sqrt();
        let lo = y0.max(w);
        if lo >= y1 {
            return 0.0;
        }
        adaptive(|y| (x * x + y * y).powf(-0.5 * p), lo, y1, tol).value
    };
    let mut br = vec![x0, x1];
    for k in [-1.0, 1.0] {
        if k > x0 && k < x1 {
            br.push(k);
        }
    }
    br.sort_by(|p, q| p.total_cmp(q));
    adaptive_breaks(inner, &br, tol).value
}

impl EdgeKernel {
    fn get(s: f64) -> Arc<EdgeKernel> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<EdgeKernel>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(k) = cache.lock().unwrap().get(&s.to_bits()) {
            return k.clone();
        }
        let n = (EDGE_TABLE + 1) as usize;
        let table: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| edge_entry((k % n) as i64, (k / n) as i64, s))
            .collect();
        let k = Arc::new(EdgeKernel { s, table });
        cache
            .lock()
            .unwrap()
            .entry(s.to_bits())
            .or_insert(k)
            .clone()
    }

    /// Cell at offset `(a, b)`: centre `(a, b + 1/2)` relative to the midpoint.
    fn v(&self, a: i64, b: i64) -> f64 {
        let a = a.abs();
        let b = if b < 0 { -1 - b } else { b };
        if a <= EDGE_TABLE && b <= EDGE_TABLE {
            return self.table[(b * (EDGE_TABLE + 1) + a) as usize];
        }
        let p = 2.0 + self.s;
        let (x, y) = (a as f64, b as f64 + 0.5);
        let r2 = x * x + y * y;
        r2.powf(-0.5 * p) * (1.0 + p * p / (24.0 * r2))
    }
}

/// `I_s^{rho = h}` of a grid set at the midpoints of its interface edges
/// inside `omega` (everywhere if `None`). Outside the grid frame the set is
/// `exterior` when given and empty otherwise.
pub fn euler_lagrange_residual(
    e: &GridSet,
    omega_set: Option<&PlanarSet>,
    exterior: Option<&AnalyticShape>,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<ElResidual> {
    if params.n != 2 {
        return Err(Error::Domain(
            "the grid residual is implemented for n = 2".into(),
        ));
    }
    quad.validate()?;
    let s = params.s;
    let h = e.h;
    let kern = EdgeKernel::get(s);
    let frame = e.frame();
    let (w, ht) = (e.width as i64, e.height as i64);
    // midpoint as cell (i, j) below/left and orientation
    let mut edges: Vec<(i64, i64, bool)> = Vec::new();
    for j in -1..ht {
        for i in -1..w {
            let here = e.get_signed(i, j);
            if here != e.get_signed(i + 1, j) {
                edges.push((i, j, false));
            }
            if here != e.get_signed(i, j + 1) {
                edges.push((i, j, true));
            }
        }
    }
    let midpoint = |(i, j, horiz): (i64, i64, bool)| {
        let c = e.lattice().center(i, j);
        if horiz {
            c + Vec2::new(0.0, 0.5 * h)
        } else {
            c + Vec2::new(0.5 * h, 0.0)
        }
    };
    let edges: Vec<(i64, i64, bool)> = edges
        .into_iter()
        .filter(|ed| omega_set.is_none_or(|o| o.contains(midpoint(*ed))))
        .collect();
    if edges.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let tol = Tol::new(1e-13, 1e-9);
    let beyond = match exterior {
        Some(sh) => FarRegion::Inside(sh),
        None => FarRegion::Nothing,
    };
    let entries: Vec<ResidualEntry> = edges
        .par_iter()
        .map(|&(i, j, horiz)| {
            let mut terms = Vec::with_capacity((w * ht) as usize);
            for cj in 0..ht {
                for ci in 0..w {
                    let sign = if e.get(ci as usize, cj as usize) {
                        1.0
                    } else {
                        -1.0
                    };
                    let v = if horiz {
                        kern.v(ci - i, cj - j - 1)
                    } else {
                        kern.v(cj - j, ci - i - 1)
                    };
                    terms.push(sign * v);
                }
            }
            let x = midpoint((i, j, horiz));
            let near = pairwise(&terms) * h.powf(-s);
            let all = far_potential(x, &frame, &FarRegion::Everything, s, tol).value;
            let ins = if beyond.is_nothing() {
                0.0
            } else {
                far_potential(x, &frame, &beyond, s, tol).value
            };
            ResidualEntry {
                x,
                value: near + 2.0 * ins - all,
            }
        })
        .collect();
    let max_abs = entries.iter().fold(0.0f64, |m, r| m.max(r.value.abs()));
    Ok(ElResidual { max_abs, entries })
}

// ---------------------------------------------------------------------------
// first variation

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstVariation {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

const BALL_SIDES: usize = 1024;
const BALL_NODES: usize = 32;

/// Boundary samples used to carry a shape through a deformation.
fn boundary_polygon(e: &AnalyticShape) -> Result<Vec<Vec2>> {
    match e {
        AnalyticShape::Ball { center, radius } => Ok((0..BALL_SIDES)
            .map(|k| *center + Vec2::polar(2.0 * PI * k as f64 / BALL_SIDES as f64) * *radius)
            .collect()),
        AnalyticShape::Polygon { vertices } => {
            let per = (256 / vertices.len()).max(1);
            let n = vertices.len();
            let mut out = Vec::with_capacity(n * per);
            for i in 0..n {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                for k in 0..per {
                    out.push(a + (b - a) * (k as f64 / per as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(
            "first variation needs a ball or a polygon".into(),
        )),
    }
}

fn deformed_perimeter(
    base: &[Vec2],
    field: &(dyn Fn(Vec2) -> Vec2 + Sync),
    t: f64,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let moved: Vec<Vec2> = base.iter().map(|p| *p + field(*p) * t).collect();
    let poly = AnalyticShape::polygon(moved)?;
    let pieces = poly.boundary_pieces().expect("polygons have pieces");
    Ok(boundary::perimeter(&pieces, s, quad).value)
}

/// Compares the derivative of `t -> P_s(E + t phi)` at `t = 0` (centred
/// differences over `t_list`, extrapolated in `t^2`) with
/// `-int_{dE} I_s[E] nu . phi`.
pub fn first_variation_check(
    e: &AnalyticShape,
    field: &(dyn Fn(Vec2) -> Vec2 + Sync),
    s: f64,
    t_list: &[f64],
    quad: &QuadratureSpec,
) -> Result<FirstVariation> {
    let params = FracParams::new(2, s)?;
    if t_list.is_empty() || t_list.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("t values must be positive".into()));
    }
    let base = boundary_polygon(e)?;
    let diffs: Result<Vec<(f64, f64)>> = t_list
        .par_iter()
        .map(|&t| {
            let plus = deformed_perimeter(&base, field, t, s, quad)?;
            let minus = deformed_perimeter(&base, field, -t, s, quad)?;
            Ok((t, (plus - minus) / (2.0 * t)))
        })
        .collect();
    let mut diffs = diffs?;
    diffs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let lhs = if diffs.len() >= 2 {
        let (t1, d1) = diffs[diffs.len() - 2];
        let (t2, d2) = diffs[diffs.len() - 1];
        (t1 * t1 * d2 - t2 * t2 * d1) / (t1 * t1 - t2 * t2)
    } else {
        diffs[0].1
    };

    // boundary nodes, weights and outward normals
    let nodes: Vec<(Vec2, f64, Vec2)> = match e {
        AnalyticShape::Ball { center, radius } => (0..BALL_NODES)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + 0.5) / BALL_NODES as f64;
                let nu = Vec2::polar(th);
                (
                    *center + nu * *radius,
                    2.0 * PI * radius / BALL_NODES as f64,
                    nu,
                )
            })
            .collect(),
        AnalyticShape::Polygon { vertices } => {
            let rule = crate::quad::gauss_legendre(8);
            let n = vertices.len();
            let mut v = Vec::new();
            for i in 0..n {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let t = (b - a).unit();
                let nu = Vec2::new(t.y, -t.x);
                for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
                    v.push((a + (b - a) * (0.5 * (xi + 1.0)), 0.5 * wi * a.dist(b), nu));
                }
            }
            v
        }
        _ => unreachable!(),
    };
    let terms: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|(x, w, nu)| {
            let dot = nu.dot(field(*x));
            if dot == 0.0 {
                return Ok(0.0);
            }
            Ok(fmc_pv(e, *x, params, quad)?.value * dot * w)
        })
        .collect();
    let rhs = -pairwise(&terms?);
    Ok(FirstVariation {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

// ---------------------------------------------------------------------------
// continuity under graph perturbations

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub k: usize,
    /// `|I_s[E_k](0) - I_s[E](0)|`.
    pub gap: f64,
    /// Discrete `C^{1,alpha}` distance of the graphs on `|y'| <= 1`.
    pub c1a_distance: f64,
    /// `|(E_k sym.diff. E) \ K_1|`.
    pub tail: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityTrace {
    pub alpha: f64,
    /// Constant fitted on the first perturbation.
    pub constant: f64,
    pub rows: Vec<ContinuityRow>,
    /// Every row satisfies `gap <= bound`.
    pub holds: bool,
}

fn c1a_distance(u: &AnalyticShape, v: &AnalyticShape, alpha: f64) -> f64 {
    let m = 401;
    let ys: Vec<f64> = (0..m)
        .map(|k| -1.0 + 2.0 * k as f64 / (m - 1) as f64)
        .collect();
    let d: Vec<f64> = ys.iter().map(|y| u.graph(*y) - v.graph(*y)).collect();
    let dp: Vec<f64> = ys
        .iter()
        .map(|y| u.graph_slope(*y) - v.graph_slope(*y))
        .collect();
    let sup = d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let sup_p = dp.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut hold = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            hold = hold.max((dp[j] - dp[i]).abs() / (ys[j] - ys[i]).powf(alpha));
        }
    }
    sup + sup_p + hold
}

fn outside_cylinder(u: &AnalyticShape, v: &AnalyticShape) -> f64 {
    let (ru, rv) = match (u, v) {
        (AnalyticShape::Subgraph { radius: a, .. }, AnalyticShape::Subgraph { radius: b, .. }) => {
            (*a, *b)
        }
        _ => return f64::NAN,
    };
    let reach = ru.max(rv);
    let far = (u.graph(reach) - v.graph(reach)).abs() + (u.graph(-reach) - v.graph(-reach)).abs();
    if far > 0.0 {
        return f64::INFINITY;
    }
    let clip_len = |a: f64, b: f64, inside: bool| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let within = (hi.min(1.0) - lo.max(-1.0)).max(0.0);
        if inside {
            (hi - lo) - within
        } else {
            hi - lo
        }
    };
    let f = |y: f64| clip_len(u.graph(y), v.graph(y), y.abs() < 1.0);
    let mut br = vec![-reach, reach];
    if reach > 1.0 {
        br.extend([-1.0, 1.0]);
    }
    br.sort_by(|a, b| a.total_cmp(b));
    adaptive_breaks(f, &br, Tol::new(1e-14, 1e-10)).value
}

/// Tracks `I_s` at the origin along graph perturbations `u_k` of `u` and
/// compares with `C ||u - u_k||_{C^{1,alpha}} + |(E_k sym.diff. E) \ K_1|`.
pub fn curvature_continuity_check(
    u: &AnalyticShape,
    u_seq: &[AnalyticShape],
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<ContinuityTrace> {
    if u_seq.is_empty() {
        return Err(Error::Domain("empty perturbation sequence".into()));
    }
    let alpha = 0.5 * (1.0 + params.s);
    let origin = Vec2::default();
    let base = fmc_pv(u, origin, params, quad)?.value;
    let raw: Result<Vec<(f64, f64, f64)>> = u_seq
        .par_iter()
        .map(|uk| {
            let v = fmc_pv(uk, origin, params, quad)?.value;
            Ok((
                (v - base).abs(),
                c1a_distance(u, uk, alpha),
                outside_cylinder(u, uk),
            ))
        })
        .collect();
    let raw = raw?;
    let (g0, d0, t0) = raw[0];
    let constant = if d0 > 0.0 {
        ((g0 - t0) / d0).max(0.0)
    } else {
        0.0
    };
    let rows: Vec<ContinuityRow> = raw
        .iter()
        .enumerate()
        .map(|(k, &(gap, dist, tail))| ContinuityRow {
            k: k + 1,
            gap,
            c1a_distance: dist,
            tail,
            bound: constant * dist + tail,
        })
        .collect();
    let slack = 1e-9 * (1.0 + base.abs());
    let holds = rows.iter().all(|r| r.gap <= r.bound + slack);
    Ok(ContinuityTrace {
        alpha,
        constant,
        rows,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: f64) -> FracParams {
        FracParams::new(2, s).unwrap()
    }

    #[test]
    fn unit_ball_value() {
        let b = AnalyticShape::ball(Vec2::default(), 1.0).unwrap();
        let c = fmc_pv(&b, Vec2::new(1.0, 0.0), p(0.5), &QuadratureSpec::default()).unwrap();
        assert!((c.value + 14.8325974).abs() < 1e-6, "{c:?}");
        assert_eq!(c.pv_trace.len(), 8);
    }

    #[test]
    fn half_space_paths() {
        let hs = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0).unwrap();
        let q = QuadratureSpec::default();
        assert_eq!(
            fmc_pv(&hs, Vec2::new(0.3, 0.0), p(0.5), &q).unwrap().value,
            0.0
        );
        let g = fmc_pv_quadrature(&hs, Vec2::new(0.3, 0.0), p(0.5), &q).unwrap();
        assert!(g.value.abs() <= g.error.max(1e-12), "{g:?}");
    }

    #[test]
    fn off_boundary_rejected() {
        let b = AnalyticShape::ball(Vec2::default(), 1.0).unwrap();
        assert!(matches!(
            fmc_pv(&b, Vec2::new(0.5, 0.0), p(0.5), &QuadratureSpec::default()),
            Err(Error::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn square_arcs_measure() {
        // circle of radius 1.2 against the square of half-width 1
        let m = arcs_measure(&square_arcs(1.2, 1.0));
        let b = (1.0f64 / 1.2).acos();
        let a = (1.0f64 / 1.2).asin();
        assert!((m - 4.0 * (a - b)).abs() < 1e-15);
    }
}
