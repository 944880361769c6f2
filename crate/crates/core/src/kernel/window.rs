//! Grid route: a rectangular window of lattice cells resolved by the cell
//! table, everything beyond it closed by the polar far field.

use rayon::prelude::*;

use super::cells::CellKernel;
use super::far::{far_potential, FarRegion};
use super::QuadratureSpec;
use crate::error::{Error, Result};
use crate::geometry::{GridSet, Lattice, PlanarSet, Rect, Vec2};
use crate::quad::{Estimate, Tol};
use crate::reduce::pairwise;

/// Index box `[i0, i0 + nx) x [j0, j0 + ny)` of a lattice.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub lat: Lattice,
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn covering(lat: Lattice, r: &Rect) -> Window {
        let (i0, j0, i1, j1) = lat.cover(r);
        Window {
            lat,
            i0,
            j0,
            nx: (i1 - i0) as usize,
            ny: (j1 - j0) as usize,
        }
    }

    pub fn rect(&self) -> Rect {
        let h = self.lat.h;
        let min = self.lat.origin + Vec2::new(self.i0 as f64 * h, self.j0 as f64 * h);
        Rect::new(min, min + Vec2::new(self.nx as f64 * h, self.ny as f64 * h))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice indices of the `k`-th cell (row-major).
    pub fn cell(&self, k: usize) -> (i64, i64) {
        (
            self.i0 + (k % self.nx) as i64,
            self.j0 + (k / self.nx) as i64,
        )
    }

    pub fn center(&self, k: usize) -> Vec2 {
        let (i, j) = self.cell(k);
        self.lat.center(i, j)
    }
}

/// Lattice to use for a set of inputs: the one of any grid among them
/// (all grids must agree), otherwise `region` split into `resolution` cells.
pub fn choose_lattice(
    sets: &[&PlanarSet],
    region: &Rect,
    resolution: usize,
) -> Result<(Lattice, bool)> {
    let mut found: Option<Lattice> = None;
    for s in sets {
        if let PlanarSet::Grid(g) = s {
            let l = g.lattice();
            match found {
                None => found = Some(l),
                Some(f) => {
                    if f.offset_of(&l).is_none() {
                        return Err(Error::LatticeMismatch);
                    }
                }
            }
        }
    }
    if let Some(l) = found {
        return Ok((l, true));
    }
    let h = region.width().max(region.height()) / resolution as f64;
    Ok((Lattice::new(region.min, h), false))
}

/// Membership of every window cell in `set` (center rule for analytic sets).
pub fn membership(set: &PlanarSet, w: &Window) -> Result<Vec<bool>> {
    match set {
        PlanarSet::Grid(g) => {
            let (di, dj) = w
                .lat
                .offset_of(&g.lattice())
                .ok_or(Error::LatticeMismatch)?;
            Ok((0..w.len())
                .map(|k| {
                    let (i, j) = w.cell(k);
                    g.get_signed(i - di, j - dj)
                })
                .collect())
        }
        _ => Ok((0..w.len())
            .into_par_iter()
            .map(|k| set.contains(w.center(k)))
            .collect()),
    }
}

/// Part of `set` beyond a window that covers all its bounded pieces.
pub fn far_inside(set: &PlanarSet) -> FarRegion<'_> {
    match set {
        PlanarSet::Shape(s) if !s.is_bounded() => FarRegion::Inside(s),
        _ => FarRegion::Nothing,
    }
}

/// Part of the complement of `set` beyond the window.
pub fn far_outside(set: &PlanarSet) -> FarRegion<'_> {
    match set {
        PlanarSet::Shape(s) if !s.is_bounded() => FarRegion::Outside(s),
        _ => FarRegion::Everything,
    }
}

/// `sum_{a in A} sum_{b in B} W(b - a)` over lattice index lists.
pub fn cross_sum(a: &[(i64, i64)], b: &[(i64, i64)], k: &CellKernel) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let chunk = 64;
    let parts: Vec<f64> = a
        .par_chunks(chunk)
        .map(|ch| {
            let mut vals = Vec::with_capacity(ch.len());
            for &(ai, aj) in ch {
                let mut acc = Vec::with_capacity(b.len());
                for &(bi, bj) in b {
                    acc.push(k.w(bi - ai, bj - aj));
                }
                vals.push(pairwise(&acc));
            }
            pairwise(&vals)
        })
        .collect();
    pairwise(&parts)
}

/// Sum of far-field potentials over cell centers, with a bias estimate for
/// replacing cell averages by center values.
pub fn far_sum(cells: &[Vec2], w: &Rect, region: &FarRegion, s: f64, h: f64, tol: Tol) -> Estimate {
    if region.is_nothing() || cells.is_empty() {
        return Estimate::default();
    }
    let p = 2.0 + s;
    let vals: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|x| {
            let e = far_potential(*x, w, region, s, tol);
            let dmin = (x.x - w.min.x)
                .min(w.max.x - x.x)
                .min(x.y - w.min.y)
                .min(w.max.y - x.y)
                .max(0.5 * h);
            let bias = e.value.abs() * p * p / 24.0 * (h / dmin).powi(2);
            (e.value, e.error + bias)
        })
        .collect();
    let v: Vec<f64> = vals.iter().map(|t| t.0).collect();
    let e: Vec<f64> = vals.iter().map(|t| t.1).collect();
    Estimate::new(pairwise(&v) * h * h, pairwise(&e) * h * h)
}

fn bounded_union(sets: &[&PlanarSet]) -> Option<Rect> {
    let mut r: Option<Rect> = None;
    for s in sets {
        if let Some(b) = s.bbox() {
            r = Some(match r {
                None => b,
                Some(x) => x.union(&b),
            });
        }
    }
    r
}

fn interaction_on(
    a: &PlanarSet,
    b: &PlanarSet,
    s: f64,
    lat: Lattice,
    rect: &Rect,
    tol: Tol,
) -> Result<Estimate> {
    let w = Window::covering(lat, rect);
    let ma = membership(a, &w)?;
    let mb = membership(b, &w)?;
    let both = ma.iter().zip(&mb).filter(|(x, y)| **x && **y).count();
    if both > 0 {
        return Err(Error::Overlap {
            measure: both as f64 * lat.h * lat.h,
        });
    }
    let ca: Vec<(i64, i64)> = (0..w.len()).filter(|k| ma[*k]).map(|k| w.cell(k)).collect();
    let cb: Vec<(i64, i64)> = (0..w.len()).filter(|k| mb[*k]).map(|k| w.cell(k)).collect();
    let kern = CellKernel::get(s);
    let near = cross_sum(&ca, &cb, &kern) * lat.h.powf(2.0 - s);
    let wr = w.rect();
    let centers = |c: &[(i64, i64)]| c.iter().map(|&(i, j)| lat.center(i, j)).collect::<Vec<_>>();
    let far_b = far_sum(&centers(&ca), &wr, &far_inside(b), s, lat.h, tol);
    let far_a = far_sum(&centers(&cb), &wr, &far_inside(a), s, lat.h, tol);
    Ok(Estimate::new(near, 1e-9 * near.abs()) + far_a + far_b)
}

/// `L_s(A, B)` by the grid route. Analytic sets are rasterized at the
/// chosen lattice and again at twice the cell size; the difference is
/// reported as discretization error.
pub fn grid_interaction(
    a: &PlanarSet,
    b: &PlanarSet,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let Some(region) = bounded_union(&[a, b]) else {
        return Err(Error::Domain("at least one set must be bounded".into()));
    };
    let unbounded = |x: &PlanarSet| x.bbox().is_none();
    if unbounded(a) && unbounded(b) {
        return Err(Error::Domain("at least one set must be bounded".into()));
    }
    let (lat, from_grid) = choose_lattice(&[a, b], &region, quad.resolution)?;
    let margin = quad.tail_radius.unwrap_or(0.25 * region.diameter());
    let rect = region.expand(margin);
    let tol = Tol::new(quad.abs_tol * 1e-3, 1e-9);
    let fine = interaction_on(a, b, s, lat, &rect, tol)?;
    if from_grid {
        return Ok(fine);
    }
    let coarse = interaction_on(a, b, s, Lattice::new(lat.origin, 2.0 * lat.h), &rect, tol)?;
    Ok(Estimate::new(
        fine.value,
        fine.error + 2.0 * (fine.value - coarse.value).abs(),
    ))
}

/// Grid cells of `g` as lattice indices.
pub fn grid_cells(g: &GridSet) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(g.count());
    for j in 0..g.height {
        for i in 0..g.width {
            if g.get(i, j) {
                out.push((i as i64, j as i64));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_table_sums_to_square_perimeter() {
        // sum over all offsets of W equals P_s of the unit square
        let s = 0.5;
        let k = CellKernel::get(s);
        let r = 200i64;
        let mut vals = Vec::new();
        for dx in -r..=r {
            for dy in -r..=r {
                vals.push(k.w(dx, dy));
            }
        }
        let inner = pairwise(&vals);
        // remainder beyond the covered square, seen from the cell center
        let rf = r as f64;
        let w = Rect::new(Vec2::new(-rf, -rf), Vec2::new(rf + 1.0, rf + 1.0));
        let tail = far_potential(
            Vec2::new(0.5, 0.5),
            &w,
            &FarRegion::Everything,
            s,
            Tol::default(),
        )
        .value;
        let total = inner + tail;
        let reference = 27.2119;
        assert!((total - reference).abs() < 2e-3, "{total}");
    }
}
