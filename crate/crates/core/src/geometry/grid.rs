use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{PlanarSet, Rect, Vec2};
use crate::error::{Error, Result};

/// Default cap on the number of cells a rasterization may allocate.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 24;

/// Square lattice: cell `(i, j)` is `origin + h * ([i, i+1] x [j, j+1])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub origin: Vec2,
    pub h: f64,
}

impl Lattice {
    pub fn new(origin: Vec2, h: f64) -> Self {
        Lattice { origin, h }
    }

    pub fn center(&self, i: i64, j: i64) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.h,
            self.origin.y + (j as f64 + 0.5) * self.h,
        )
    }

    /// Cell containing `p` (half-open cells).
    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.h).floor() as i64,
            ((p.y - self.origin.y) / self.h).floor() as i64,
        )
    }

    /// Integer offset of `other`'s origin in units of `h`, if the lattices coincide.
    pub fn offset_of(&self, other: &Lattice) -> Option<(i64, i64)> {
        if ((self.h - other.h) / self.h).abs() > 1e-12 {
            return None;
        }
        let dx = (other.origin.x - self.origin.x) / self.h;
        let dy = (other.origin.y - self.origin.y) / self.h;
        let (rx, ry) = (dx.round(), dy.round());
        if (dx - rx).abs() > 1e-7 || (dy - ry).abs() > 1e-7 {
            return None;
        }
        Some((rx as i64, ry as i64))
    }

    /// Smallest index box `[i0, i1) x [j0, j1)` covering `r`.
    pub fn cover(&self, r: &Rect) -> (i64, i64, i64, i64) {
        let eps = 1e-9;
        let i0 = ((r.min.x - self.origin.x) / self.h + eps).floor() as i64;
        let j0 = ((r.min.y - self.origin.y) / self.h + eps).floor() as i64;
        let i1 = ((r.max.x - self.origin.x) / self.h - eps).ceil() as i64;
        let j1 = ((r.max.y - self.origin.y) / self.h - eps).ceil() as i64;
        (i0, j0, i1.max(i0 + 1), j1.max(j0 + 1))
    }
}

/// Binary pixel set on a `width x height` frame. Row 0 is the bottom row.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    pub width: usize,
    pub height: usize,
    pub origin: Vec2,
    pub h: f64,
    bits: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    width: usize,
    height: usize,
    origin: Vec2,
    h: f64,
    bits: String,
}

impl Serialize for GridSet {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr {
            width: self.width,
            height: self.height,
            origin: self.origin,
            h: self.h,
            bits: B64.encode(self.packed_bits()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for GridSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = GridRepr::deserialize(de)?;
        let bytes = B64.decode(r.bits.as_bytes()).map_err(D::Error::custom)?;
        GridSet::from_packed(r.width, r.height, r.origin, r.h, &bytes).map_err(D::Error::custom)
    }
}

impl GridSet {
    /// Empty grid.
    pub fn new(width: usize, height: usize, origin: Vec2, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("cell size h = {h} must be positive")));
        }
        Ok(GridSet {
            width,
            height,
            origin,
            h,
            bits: vec![false; width * height],
        })
    }

    pub fn from_bits(
        width: usize,
        height: usize,
        origin: Vec2,
        h: f64,
        bits: Vec<bool>,
    ) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::SizeMismatch {
                expected: width * height,
                got: bits.len(),
            });
        }
        let mut g = GridSet::new(width, height, origin, h)?;
        g.bits = bits;
        Ok(g)
    }

    /// Decodes row-major, LSB-first packed bits.
    pub fn from_packed(
        width: usize,
        height: usize,
        origin: Vec2,
        h: f64,
        bytes: &[u8],
    ) -> Result<Self> {
        let n = width * height;
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::SizeMismatch {
                expected: n.div_ceil(8),
                got: bytes.len(),
            });
        }
        let bits = (0..n).map(|k| bytes[k / 8] >> (k % 8) & 1 == 1).collect();
        GridSet::from_bits(width, height, origin, h, bits)
    }

    pub fn packed_bits(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (k, &b) in self.bits.iter().enumerate() {
            if b {
                out[k / 8] |= 1 << (k % 8);
            }
        }
        out
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.origin, self.h)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.index(i, j)]
    }

    /// Bit at signed indices; cells outside the frame are unset.
    pub fn get_signed(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.width
            && (j as usize) < self.height
            && self.get(i as usize, j as usize)
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let k = self.index(i, j);
        self.bits[k] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn measure(&self) -> f64 {
        self.h * self.h * self.count() as f64
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        self.lattice().center(i as i64, j as i64)
    }

    pub fn frame(&self) -> Rect {
        Rect::new(
            self.origin,
            self.origin + Vec2::new(self.width as f64 * self.h, self.height as f64 * self.h),
        )
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (i, j) = self.lattice().cell_of(p);
        self.get_signed(i, j)
    }

    /// Bounding box of the set cells.
    pub fn occupied_bbox(&self) -> Option<Rect> {
        let mut lo = (usize::MAX, usize::MAX);
        let mut hi = (0, 0);
        for j in 0..self.height {
            for i in 0..self.width {
                if self.get(i, j) {
                    lo = (lo.0.min(i), lo.1.min(j));
                    hi = (hi.0.max(i + 1), hi.1.max(j + 1));
                }
            }
        }
        if lo.0 == usize::MAX {
            return None;
        }
        let l = self.lattice();
        Some(Rect::new(
            l.origin + Vec2::new(lo.0 as f64 * l.h, lo.1 as f64 * l.h),
            l.origin + Vec2::new(hi.0 as f64 * l.h, hi.1 as f64 * l.h),
        ))
    }

    /// Complement within the frame.
    pub fn complement(&self) -> GridSet {
        let mut g = self.clone();
        for b in &mut g.bits {
            *b = !*b;
        }
        g
    }

    pub fn scaled(&self, lambda: f64) -> GridSet {
        let mut g = self.clone();
        g.origin = self.origin * lambda;
        g.h = self.h * lambda;
        g
    }

    pub fn translated(&self, v: Vec2) -> GridSet {
        let mut g = self.clone();
        g.origin = self.origin + v;
        g
    }

    /// Cell-interface segments between set and unset cells (cells outside
    /// the frame count as unset).
    pub fn interface_edges(&self) -> Vec<(Vec2, Vec2)> {
        let l = self.lattice();
        let corner = |i: i64, j: i64| l.origin + Vec2::new(i as f64 * l.h, j as f64 * l.h);
        let mut out = Vec::new();
        for j in -1..self.height as i64 {
            for i in -1..self.width as i64 {
                let here = self.get_signed(i, j);
                if here != self.get_signed(i + 1, j) {
                    out.push((corner(i + 1, j), corner(i + 1, j + 1)));
                }
                if here != self.get_signed(i, j + 1) {
                    out.push((corner(i, j + 1), corner(i + 1, j + 1)));
                }
            }
        }
        out
    }

    /// Total staircase length of the interface whose midpoints satisfy `inside`.
    pub fn interface_length<F: Fn(Vec2) -> bool>(&self, inside: F) -> f64 {
        self.interface_edges()
            .iter()
            .filter(|(a, b)| inside((*a + *b) * 0.5))
            .count() as f64
            * self.h
    }

    /// Binary portable graymap (P5), set cells black, top row first.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        for j in (0..self.height).rev() {
            for i in 0..self.width {
                out.push(if self.get(i, j) { 0 } else { 255 });
            }
        }
        out
    }
}

/// Center-rule rasterization of `shape` over `bbox` with cell size `h`.
pub fn rasterize(shape: &PlanarSet, bbox: &Rect, h: f64) -> Result<GridSet> {
    rasterize_with_budget(shape, bbox, h, DEFAULT_CELL_BUDGET)
}

pub fn rasterize_with_budget(
    shape: &PlanarSet,
    bbox: &Rect,
    h: f64,
    budget: usize,
) -> Result<GridSet> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("cell size h = {h} must be positive")));
    }
    if bbox.is_degenerate() {
        return Err(Error::Domain("bounding box is degenerate".into()));
    }
    let w = (bbox.width() / h - 1e-9).ceil().max(1.0);
    let ht = (bbox.height() / h - 1e-9).ceil().max(1.0);
    if w * ht > budget as f64 {
        return Err(Error::Resolution {
            cells: (w * ht).min(usize::MAX as f64) as usize,
            budget,
        });
    }
    let (w, ht) = (w as usize, ht as usize);
    let mut g = GridSet::new(w, ht, bbox.min, h)?;
    for j in 0..ht {
        for i in 0..w {
            if shape.contains(g.center(i, j)) {
                g.set(i, j, true);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnalyticShape;

    fn square() -> Rect {
        Rect::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0))
    }

    #[test]
    fn half_plane_center_rule() {
        let hs = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0).unwrap();
        let g = rasterize(&hs.into(), &square(), 0.5).unwrap();
        assert_eq!((g.width, g.height), (4, 4));
        for j in 0..4 {
            for i in 0..4 {
                assert_eq!(g.get(i, j), j < 2);
            }
        }
    }

    #[test]
    fn small_ball_misses_all_centers() {
        let b = AnalyticShape::ball(Vec2::new(0.0, 0.0), 0.4).unwrap();
        let g = rasterize(&b.into(), &square(), 1.0).unwrap();
        assert_eq!(g.count(), 0);
    }

    #[test]
    fn budget_enforced() {
        let b = AnalyticShape::ball(Vec2::new(0.0, 0.0), 0.4).unwrap();
        let r = rasterize_with_budget(&b.into(), &square(), 0.01, 100);
        assert!(matches!(r, Err(Error::Resolution { .. })));
    }

    #[test]
    fn json_roundtrip_and_bit_order() {
        let mut g = GridSet::new(3, 3, Vec2::new(0.5, -1.0), 0.25).unwrap();
        g.set(0, 0, true);
        g.set(2, 2, true);
        assert_eq!(g.packed_bits(), vec![0b0000_0001, 0b0000_0001]);
        let s = serde_json::to_string(&g).unwrap();
        let back: GridSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn staircase_perimeter_of_square() {
        let mut g = GridSet::new(6, 6, Vec2::new(0.0, 0.0), 0.25).unwrap();
        for j in 1..5 {
            for i in 1..5 {
                g.set(i, j, true);
            }
        }
        assert!((g.interface_length(|_| true) - 4.0).abs() < 1e-12);
    }
}
