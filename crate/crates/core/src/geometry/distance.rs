use super::{segment_distance, AnalyticShape, GridSet, Lattice, PlanarSet, Rect, Vec2};
use crate::error::{Error, Result};

/// Signed distance to the boundary, negative inside. Grid boundaries are the
/// cell-interface polylines.
pub fn signed_distance(set: &PlanarSet, x: Vec2) -> Result<f64> {
    match set {
        PlanarSet::Shape(s) => Ok(s.signed_distance(x)),
        PlanarSet::Koch(k) => {
            let p = AnalyticShape::Polygon {
                vertices: k.boundary.clone(),
            };
            Ok(p.signed_distance(x))
        }
        PlanarSet::Grid(g) => {
            if g.count() == 0 {
                return Err(Error::DegenerateSet("grid set is empty".into()));
            }
            let d = g
                .interface_edges()
                .iter()
                .map(|(a, b)| segment_distance(x, *a, *b))
                .fold(f64::INFINITY, f64::min);
            Ok(if g.contains(x) { -d } else { d })
        }
    }
}

/// Approximate signed distance of every cell center of `g`, measured to the
/// interface polyline. Two raster passes propagate the nearest interface
/// edge between neighbouring cells.
pub fn grid_distance_field(g: &GridSet) -> Vec<f64> {
    let edges = g.interface_edges();
    let (w, h) = (g.width as i64, g.height as i64);
    let mut near: Vec<Option<usize>> = vec![None; g.width * g.height];
    let mut dist = vec![f64::INFINITY; g.width * g.height];
    let lat = g.lattice();
    // seed every cell touching an interface edge
    for (k, (a, b)) in edges.iter().enumerate() {
        let m = (*a + *b) * 0.5;
        let (i0, j0) = lat.cell_of(m - Vec2::new(0.25 * g.h, 0.25 * g.h));
        for (i, j) in [(i0, j0), (i0 + 1, j0), (i0, j0 + 1), (i0 + 1, j0 + 1)] {
            if i < 0 || j < 0 || i >= w || j >= h {
                continue;
            }
            let idx = (j * w + i) as usize;
            let d = segment_distance(lat.center(i, j), *a, *b);
            if d < dist[idx] {
                dist[idx] = d;
                near[idx] = Some(k);
            }
        }
    }
    let relax =
        |i: i64, j: i64, di: i64, dj: i64, near: &mut Vec<Option<usize>>, dist: &mut Vec<f64>| {
            let (ni, nj) = (i + di, j + dj);
            if ni < 0 || nj < 0 || ni >= w || nj >= h {
                return;
            }
            let Some(e) = near[(nj * w + ni) as usize] else {
                return;
            };
            let idx = (j * w + i) as usize;
            let (a, b) = edges[e];
            let d = segment_distance(lat.center(i, j), a, b);
            if d < dist[idx] {
                dist[idx] = d;
                near[idx] = Some(e);
            }
        };
    for _ in 0..2 {
        for j in 0..h {
            for i in 0..w {
                for (di, dj) in [(-1, 0), (0, -1), (-1, -1), (1, -1)] {
                    relax(i, j, di, dj, &mut near, &mut dist);
                }
            }
        }
        for j in (0..h).rev() {
            for i in (0..w).rev() {
                for (di, dj) in [(1, 0), (0, 1), (1, 1), (-1, 1)] {
                    relax(i, j, di, dj, &mut near, &mut dist);
                }
            }
        }
    }
    for j in 0..g.height {
        for i in 0..g.width {
            if g.get(i, j) {
                dist[j * g.width + i] *= -1.0;
            }
        }
    }
    dist
}

/// `{signed_distance < rho}`.
pub fn tubular_set(set: &PlanarSet, rho: f64) -> Result<PlanarSet> {
    match set {
        PlanarSet::Shape(AnalyticShape::Ball { center, radius }) => {
            let r = radius + rho;
            if r <= 0.0 {
                return Err(Error::DegenerateSet(format!(
                    "ball of radius {radius} vanishes at rho = {rho}"
                )));
            }
            Ok(AnalyticShape::Ball {
                center: *center,
                radius: r,
            }
            .into())
        }
        PlanarSet::Shape(AnalyticShape::HalfSpace { normal, offset }) => {
            Ok(AnalyticShape::HalfSpace {
                normal: *normal,
                offset: offset + rho,
            }
            .into())
        }
        PlanarSet::Shape(AnalyticShape::Subgraph { .. }) => Err(Error::Unsupported(
            "tubular neighbourhoods of subgraphs".into(),
        )),
        PlanarSet::Shape(AnalyticShape::Polygon { .. }) | PlanarSet::Koch(_) => {
            let bb = set.bbox().expect("bounded");
            let h = bb.width().max(bb.height()) / 512.0;
            let frame = bb.expand(rho.max(0.0) + 2.0 * h);
            let w = (frame.width() / h).ceil() as usize;
            let ht = (frame.height() / h).ceil() as usize;
            let mut out = GridSet::new(w, ht, frame.min, h)?;
            for j in 0..out.height {
                for i in 0..out.width {
                    let c = out.center(i, j);
                    out.set(i, j, signed_distance(set, c)? < rho);
                }
            }
            finish_grid(out)
        }
        PlanarSet::Grid(g) => {
            let pad = if rho > 0.0 {
                (rho / g.h).ceil() as usize + 1
            } else {
                0
            };
            let origin = g.origin - Vec2::new(pad as f64 * g.h, pad as f64 * g.h);
            let mut big = GridSet::new(g.width + 2 * pad, g.height + 2 * pad, origin, g.h)?;
            for j in 0..g.height {
                for i in 0..g.width {
                    big.set(i + pad, j + pad, g.get(i, j));
                }
            }
            if big.count() == 0 {
                return Err(Error::DegenerateSet("grid set is empty".into()));
            }
            let field = grid_distance_field(&big);
            let mut out = GridSet::new(big.width, big.height, origin, g.h)?;
            for (k, d) in field.iter().enumerate() {
                if *d < rho {
                    out.set(k % big.width, k / big.width, true);
                }
            }
            finish_grid(out)
        }
    }
}

fn finish_grid(g: GridSet) -> Result<PlanarSet> {
    let c = g.count();
    if c == 0 || c == g.width * g.height {
        return Err(Error::DegenerateSet(
            "tubular set is empty or fills its frame".into(),
        ));
    }
    Ok(PlanarSet::Grid(g))
}

/// Cells of `lattice` inside `window` whose centers lie within distance
/// `rho` of the boundary of `set`.
pub fn band(set: &PlanarSet, rho: f64, lattice: Lattice, window: &Rect) -> Result<GridSet> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("band width {rho} must be positive")));
    }
    let (i0, j0, i1, j1) = lattice.cover(window);
    let origin = lattice.origin + Vec2::new(i0 as f64 * lattice.h, j0 as f64 * lattice.h);
    let mut out = GridSet::new((i1 - i0) as usize, (j1 - j0) as usize, origin, lattice.h)?;
    for j in 0..out.height {
        for i in 0..out.width {
            let d = signed_distance(set, out.center(i, j))?;
            if d.abs() < rho {
                out.set(i, j, true);
            }
        }
    }
    if out.count() == 0 {
        return Err(Error::DegenerateSet("band contains no cells".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize;

    #[test]
    fn analytic_signed_distances() {
        let hs: PlanarSet = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0)
            .unwrap()
            .into();
        assert_eq!(signed_distance(&hs, Vec2::new(3.0, -2.0)).unwrap(), -2.0);
        let b: PlanarSet = AnalyticShape::ball(Vec2::default(), 1.0).unwrap().into();
        assert_eq!(signed_distance(&b, Vec2::new(2.0, 0.0)).unwrap(), 1.0);
        assert_eq!(signed_distance(&b, Vec2::default()).unwrap(), -1.0);
    }

    #[test]
    fn tubular_balls_and_half_spaces() {
        let b: PlanarSet = AnalyticShape::ball(Vec2::default(), 1.0).unwrap().into();
        assert_eq!(
            tubular_set(&b, 0.5).unwrap(),
            AnalyticShape::ball(Vec2::default(), 1.5).unwrap().into()
        );
        assert_eq!(
            tubular_set(&b, -0.5).unwrap(),
            AnalyticShape::ball(Vec2::default(), 0.5).unwrap().into()
        );
        assert!(tubular_set(&b, -1.5).is_err());
        let hs: PlanarSet = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0)
            .unwrap()
            .into();
        let PlanarSet::Shape(AnalyticShape::HalfSpace { offset, .. }) =
            tubular_set(&hs, 0.2).unwrap()
        else {
            panic!()
        };
        assert!((offset - 0.2).abs() < 1e-15);
    }

    #[test]
    fn grid_distance_field_close_to_exact() {
        let b: PlanarSet = AnalyticShape::ball(Vec2::default(), 1.0).unwrap().into();
        let frame = Rect::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0));
        let g = rasterize(&b, &frame, 0.05).unwrap();
        let field = grid_distance_field(&g);
        let gs = PlanarSet::Grid(g.clone());
        for k in (0..field.len()).step_by(97) {
            let c = g.center(k % g.width, k / g.width);
            let exact = signed_distance(&gs, c).unwrap();
            assert!(
                (field[k] - exact).abs() <= g.h * 2f64.sqrt(),
                "{} vs {exact}",
                field[k]
            );
        }
    }

    #[test]
    fn grid_tubular_grows() {
        let b: PlanarSet = AnalyticShape::ball(Vec2::default(), 1.0).unwrap().into();
        let frame = Rect::new(Vec2::new(-1.2, -1.2), Vec2::new(1.2, 1.2));
        let g = rasterize(&b, &frame, 0.02).unwrap();
        let PlanarSet::Grid(t) = tubular_set(&PlanarSet::Grid(g), 0.5).unwrap() else {
            panic!()
        };
        let area = t.measure();
        let exact = std::f64::consts::PI * 1.5 * 1.5;
        assert!((area - exact).abs() / exact < 0.03, "{area}");
    }
}
