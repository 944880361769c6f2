//! Fractional perimeter `P_s(E, Omega)` split into its local and nonlocal
//! parts, the classical perimeter, and `s -> 1` scans.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_pieces, AnalyticShape, IntervalSet, Lattice, PlanarSet, Rect, Vec2};
use crate::kernel::boundary::{self, pieces_of, strictly_inside};
use crate::kernel::cells::CellKernel;
use crate::kernel::far::FarRegion;
use crate::kernel::window::{choose_lattice, cross_sum, far_sum, membership, Window};
use crate::kernel::{
    interval_interaction, omega, sphere_measure, FracParams, QuadratureSpec, Region,
};
use crate::quad::{Estimate, Tol};

/// `P_s(E, Omega) = local + nonlocal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SPerimeterBreakdown {
    pub local: f64,
    pub nonlocal: f64,
    pub total: f64,
    pub error: f64,
}

impl SPerimeterBreakdown {
    fn from_parts(local: Estimate, nonlocal: Estimate) -> Self {
        SPerimeterBreakdown {
            local: local.value,
            nonlocal: nonlocal.value,
            total: local.value + nonlocal.value,
            error: local.error + nonlocal.error,
        }
    }

    fn zero() -> Self {
        SPerimeterBreakdown {
            local: 0.0,
            nonlocal: 0.0,
            total: 0.0,
            error: 0.0,
        }
    }
}

/// Which part of the perimeter a scan follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Total,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub s: f64,
    pub scaled_value: f64,
    pub target: f64,
    pub error: f64,
}

/// Rows of `(s, (1 - s) value, omega_{n-1} P(E, Omega))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTable {
    pub rows: Vec<AsymptoticRow>,
}

impl AsymptoticTable {
    /// CSV with header `s,scaled_value,target,error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Default `s` values for scans.
pub const DEFAULT_SCAN: [f64; 6] = [0.5, 0.7, 0.9, 0.95, 0.99, 0.999];

fn check_tol(b: SPerimeterBreakdown, quad: &QuadratureSpec) -> Result<SPerimeterBreakdown> {
    let target = quad.abs_tol.max(quad.rel_tol * b.total.abs());
    if !b.total.is_finite() || b.error > target {
        return Err(Error::ToleranceNotMet {
            best: b.total,
            achieved: b.error,
        });
    }
    Ok(b)
}

/// `P_s(E, Omega)` for bounded `Omega`.
pub fn s_perimeter(
    e: &Region,
    omega_set: &Region,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<SPerimeterBreakdown> {
    quad.validate()?;
    match (e, omega_set) {
        (Region::Line(e), Region::Line(o)) => {
            if params.n != 1 {
                return Err(Error::Domain("interval sets need n = 1".into()));
            }
            perimeter_1d(e, o, params.s)
        }
        (Region::Plane(e), Region::Plane(o)) => {
            if params.n != 2 {
                return Err(Error::Domain("planar sets need n = 2".into()));
            }
            let b = perimeter_2d(e, o, params.s, quad)?;
            check_tol(b, quad)
        }
        _ => Err(Error::Domain("sets live in different dimensions".into())),
    }
}

fn perimeter_1d(e: &IntervalSet, o: &IntervalSet, s: f64) -> Result<SPerimeterBreakdown> {
    if !o.is_bounded() {
        return Err(Error::Domain("the reference set must be bounded".into()));
    }
    let ce = e.complement();
    let co = o.complement();
    let (a1, a2) = (e.intersect(o), ce.intersect(o));
    let (b1, b2) = (e.intersect(&co), ce.intersect(&co));
    let local = interval_interaction(&a1, &a2, s)?;
    let nonlocal = interval_interaction(&a1, &b2, s)? + interval_interaction(&b1, &a2, s)?;
    Ok(SPerimeterBreakdown {
        local,
        nonlocal,
        total: local + nonlocal,
        error: 0.0,
    })
}

/// Exact `P_s(E)` of a bounded union of intervals.
pub fn s_perimeter_global_1d(e: &IntervalSet, s: f64) -> Result<f64> {
    if !e.is_bounded() {
        return Err(Error::Domain("the set must be bounded".into()));
    }
    interval_interaction(e, &e.complement(), s)
}

/// Piecewise boundary of polygons, balls and snowflakes.
fn curve(set: &PlanarSet) -> Option<Vec<crate::geometry::Piece>> {
    pieces_of(set)
}

/// `P_s(E)` in the whole plane for sets with a segment/arc boundary.
pub fn s_perimeter_global_2d(e: &PlanarSet, s: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    let Some(p) = curve(e) else {
        return Err(Error::Unsupported(
            "global perimeter needs a ball, polygon or snowflake".into(),
        ));
    };
    Ok(boundary::perimeter(&p, s, quad))
}

fn perimeter_2d(
    e: &PlanarSet,
    o: &PlanarSet,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<SPerimeterBreakdown> {
    if o.bbox().is_none() {
        return Err(Error::Domain("the reference set must be bounded".into()));
    }
    if e.is_empty() || o.is_empty() {
        return Ok(SPerimeterBreakdown::zero());
    }
    if let (Some(pe), Some(po)) = (curve(e), curve(o)) {
        if strictly_inside(e, o) {
            let total = boundary::perimeter(&pe, s, quad);
            let nl = boundary::interaction_with_complement(&pe, &po, s);
            let local = Estimate::new(total.value - nl.value, total.error + nl.error);
            return Ok(SPerimeterBreakdown::from_parts(local, nl));
        }
        if boundary::disjoint_bounded(e, o) {
            let nl = boundary::interaction(&pe, &po, s, quad);
            return Ok(SPerimeterBreakdown::from_parts(Estimate::default(), nl));
        }
        if strictly_inside(o, e) {
            let nl = boundary::interaction_with_complement(&po, &pe, s);
            return Ok(SPerimeterBreakdown::from_parts(Estimate::default(), nl));
        }
    }
    grid_perimeter(e, o, s, quad)
}

fn far_in(set: &PlanarSet) -> FarRegion<'_> {
    match set {
        PlanarSet::Shape(s) => FarRegion::Inside(s),
        _ => FarRegion::Nothing,
    }
}

fn far_out(set: &PlanarSet) -> FarRegion<'_> {
    match set {
        PlanarSet::Shape(s) => FarRegion::Outside(s),
        _ => FarRegion::Everything,
    }
}

/// Window for the grid route: the reference set plus a margin, enlarged to
/// cover sets that have no analytic far field.
fn grid_window(e: &PlanarSet, o: &PlanarSet, quad: &QuadratureSpec) -> Result<(Rect, Rect)> {
    let ro = o
        .bbox()
        .ok_or_else(|| Error::Domain("the reference set must be bounded".into()))?;
    let margin = quad.tail_radius.unwrap_or(0.25 * ro.diameter());
    let mut rect = ro.expand(margin);
    if !matches!(e, PlanarSet::Shape(_)) {
        if let Some(b) = e.bbox() {
            rect = rect.union(&b);
        }
    }
    Ok((ro, rect))
}

fn grid_perimeter_on(
    e: &PlanarSet,
    o: &PlanarSet,
    s: f64,
    lat: Lattice,
    rect: &Rect,
) -> Result<(Estimate, Estimate)> {
    let w = Window::covering(lat, rect);
    let me = membership(e, &w)?;
    let mo = membership(o, &w)?;
    let (mut a1, mut a2, mut b1, mut b2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..w.len() {
        let c = w.cell(k);
        match (me[k], mo[k]) {
            (true, true) => a1.push(c),
            (false, true) => a2.push(c),
            (true, false) => b1.push(c),
            (false, false) => b2.push(c),
        }
    }
    let kern = CellKernel::get(s);
    let scale = lat.h.powf(2.0 - s);
    let local = cross_sum(&a1, &a2, &kern) * scale;
    let near_nl = (cross_sum(&a1, &b2, &kern) + cross_sum(&b1, &a2, &kern)) * scale;
    let wr = w.rect();
    let tol = Tol::new(1e-13, 1e-9);
    let centers = |c: &[(i64, i64)]| {
        c.iter()
            .map(|&(i, j)| lat.center(i, j))
            .collect::<Vec<Vec2>>()
    };
    let far = far_sum(&centers(&a1), &wr, &far_out(e), s, lat.h, tol)
        + far_sum(&centers(&a2), &wr, &far_in(e), s, lat.h, tol);
    Ok((
        Estimate::new(local, 1e-9 * local),
        Estimate::new(near_nl, 1e-9 * near_nl) + far,
    ))
}

fn grid_perimeter(
    e: &PlanarSet,
    o: &PlanarSet,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<SPerimeterBreakdown> {
    let (ro, rect) = grid_window(e, o, quad)?;
    let (lat, from_grid) = choose_lattice(&[e, o], &ro, quad.resolution)?;
    let (local, nl) = grid_perimeter_on(e, o, s, lat, &rect)?;
    let exact_sets = from_grid && [e, o].iter().all(|x| matches!(x, PlanarSet::Grid(_)));
    if exact_sets {
        return Ok(SPerimeterBreakdown::from_parts(local, nl));
    }
    let coarse = Lattice::new(lat.origin, 2.0 * lat.h);
    let (cl, cn) = grid_perimeter_on(e, o, s, coarse, &rect)?;
    let local = Estimate::new(
        local.value,
        local.error + 2.0 * (local.value - cl.value).abs(),
    );
    let nl = Estimate::new(nl.value, nl.error + 2.0 * (nl.value - cn.value).abs());
    Ok(SPerimeterBreakdown::from_parts(local, nl))
}

/// Classical perimeter `P(E, Omega)`; `None` means the whole space.
pub fn classical_perimeter(e: &Region, omega_set: Option<&Region>) -> Result<f64> {
    match (e, omega_set) {
        (Region::Line(e), o) => {
            let o = match o {
                None => None,
                Some(Region::Line(o)) => Some(o),
                Some(_) => return Err(Error::Domain("sets live in different dimensions".into())),
            };
            let mut ends: Vec<f64> = Vec::new();
            for &(a, b) in e.intervals() {
                ends.extend([a, b].into_iter().filter(|x| x.is_finite()));
            }
            Ok(ends
                .iter()
                .filter(|x| o.is_none_or(|o| o.contains(**x)))
                .count() as f64)
        }
        (Region::Plane(e), o) => {
            let o = match o {
                None => None,
                Some(Region::Plane(o)) => Some(o),
                Some(_) => return Err(Error::Domain("sets live in different dimensions".into())),
            };
            let inside = |p: Vec2| o.is_none_or(|o| o.contains(p));
            let window = o.and_then(|o| o.bbox());
            Ok(match e {
                PlanarSet::Grid(g) => g.interface_length(inside),
                PlanarSet::Shape(sh) => {
                    sh.boundary_length(if o.is_some() { Some(&inside) } else { None }, window)
                }
                PlanarSet::Koch(k) => {
                    let poly = AnalyticShape::Polygon {
                        vertices: k.boundary.clone(),
                    };
                    if o.is_none() {
                        polygon_pieces(&k.boundary).iter().map(|p| p.length()).sum()
                    } else {
                        poly.boundary_length(Some(&inside), window)
                    }
                }
            })
        }
    }
}

/// `(1 - s)` times the total or local perimeter over `s_list`, against the
/// target `omega_{n-1} P(E, Omega)`. Without `Omega` the global perimeter is
/// used, which needs a bounded interval set or a segment/arc boundary.
pub fn asymptotic_scan(
    e: &Region,
    omega_set: Option<&Region>,
    s_list: &[f64],
    mode: ScanMode,
    quad: &QuadratureSpec,
) -> Result<AsymptoticTable> {
    if s_list.is_empty() {
        return Err(Error::Domain("empty s list".into()));
    }
    for w in s_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain("s values must be strictly increasing".into()));
        }
    }
    let n = match e {
        Region::Line(_) => 1,
        Region::Plane(_) => 2,
    };
    for &s in s_list {
        FracParams::new(n, s)?;
    }
    let target = omega((n - 1) as f64) * classical_perimeter(e, omega_set)?;
    let rows: Result<Vec<AsymptoticRow>> = s_list
        .par_iter()
        .map(|&s| {
            let params = FracParams { n, s };
            let est = match omega_set {
                Some(o) => {
                    let b = s_perimeter(e, o, params, quad)?;
                    match mode {
                        ScanMode::Total => Estimate::new(b.total, b.error),
                        ScanMode::Local => Estimate::new(b.local, b.error),
                    }
                }
                None => match e {
                    Region::Line(i) => Estimate::exact(s_perimeter_global_1d(i, s)?),
                    Region::Plane(p) => s_perimeter_global_2d(p, s, quad)?,
                },
            };
            Ok(AsymptoticRow {
                s,
                scaled_value: (1.0 - s) * est.value,
                target,
                error: (1.0 - s) * est.error,
            })
        })
        .collect();
    Ok(AsymptoticTable { rows: rows? })
}

/// Right-hand side `2 P^L_s(E, T) + 4 (n omega_n / s) |Omega| rho^(-s)` with
/// `T` the set of points within `rho` of the boundary of `Omega`.
pub fn nonlocal_band_bound(
    e: &Region,
    omega_set: &Region,
    rho: f64,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("band width {rho} must be positive")));
    }
    let s = params.s;
    let tail = 4.0 * sphere_measure(params.n) / s * rho.powf(-s);
    match (e, omega_set) {
        (Region::Line(e), Region::Line(o)) => {
            if !o.is_bounded() || o.is_empty() {
                return Err(Error::Domain("the reference set must be bounded".into()));
            }
            if o.intervals().iter().any(|&(a, b)| b - a <= 2.0 * rho) {
                return Err(Error::DegenerateSet(
                    "band swallows a component of the reference set".into(),
                ));
            }
            let mut pieces = Vec::new();
            for x in o.endpoints() {
                pieces.push((x - rho, x + rho));
            }
            let t = crate::geometry::make_interval_set(&pieces)?;
            let local = interval_interaction(&e.intersect(&t), &e.complement().intersect(&t), s)?;
            Ok(2.0 * local + tail * o.measure())
        }
        (Region::Plane(e), Region::Plane(o)) => {
            let ro = o
                .bbox()
                .ok_or_else(|| Error::Domain("the reference set must be bounded".into()))?;
            let (lat, _) = choose_lattice(&[e, o], &ro, quad.resolution)?;
            let w = Window::covering(lat, &ro.expand(rho + 2.0 * lat.h));
            let sd: Vec<f64> = (0..w.len())
                .into_par_iter()
                .map(|k| crate::geometry::signed_distance(o, w.center(k)))
                .collect::<Result<_>>()?;
            if !sd.iter().any(|d| *d < -rho) {
                return Err(Error::DegenerateSet(
                    "band swallows the reference set".into(),
                ));
            }
            let me = membership(e, &w)?;
            let (mut inside, mut outside) = (Vec::new(), Vec::new());
            for k in 0..w.len() {
                if sd[k].abs() < rho {
                    if me[k] {
                        inside.push(w.cell(k));
                    } else {
                        outside.push(w.cell(k));
                    }
                }
            }
            let kern = CellKernel::get(s);
            let local = cross_sum(&inside, &outside, &kern) * lat.h.powf(2.0 - s);
            Ok(2.0 * local + tail * o.area())
        }
        _ => Err(Error::Domain("sets live in different dimensions".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_interval_set;

    fn iv(v: &[(f64, f64)]) -> Region {
        Region::Line(make_interval_set(v).unwrap())
    }

    #[test]
    fn unit_interval_global() {
        let e = make_interval_set(&[(0.0, 1.0)]).unwrap();
        assert!((s_perimeter_global_1d(&e, 0.5).unwrap() - 8.0).abs() < 1e-12);
        let e2 = make_interval_set(&[(0.0, 2.0)]).unwrap();
        assert!((s_perimeter_global_1d(&e2, 0.5).unwrap() - 8.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn local_split_in_1d() {
        // E inside Omega: local + nonlocal is the global perimeter
        let p = FracParams::new(1, 0.4).unwrap();
        let b = s_perimeter(
            &iv(&[(0.0, 1.0)]),
            &iv(&[(-1.0, 3.0)]),
            p,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let g = s_perimeter_global_1d(&make_interval_set(&[(0.0, 1.0)]).unwrap(), 0.4).unwrap();
        assert!((b.total - g).abs() < 1e-12 * g);
        assert!(b.local > 0.0 && b.nonlocal > 0.0);
    }

    #[test]
    fn classical_counts() {
        assert_eq!(classical_perimeter(&iv(&[(0.0, 1.0)]), None).unwrap(), 2.0);
        let b: PlanarSet = AnalyticShape::ball(Vec2::default(), 1.0).unwrap().into();
        let v = classical_perimeter(&Region::Plane(b), None).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn nested_disks_use_global_value() {
        let s = 0.5;
        let e: PlanarSet = AnalyticShape::ball(Vec2::default(), 1.0).unwrap().into();
        let o: PlanarSet = AnalyticShape::ball(Vec2::default(), 2.0).unwrap().into();
        let b = s_perimeter(
            &Region::Plane(e),
            &Region::Plane(o),
            FracParams::new(2, s).unwrap(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((b.total - 62.1306388).abs() < 1e-6);
        assert!(b.local > 0.0 && b.nonlocal > 0.0 && b.nonlocal < b.local);
    }
}
