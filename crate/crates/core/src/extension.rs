//! Extension of traces to the upper half-space by Poisson averaging, the
//! `z^a`-weighted Dirichlet energy, the monotonicity functional `Phi_E(r)`
//! and the fractional Laplacian (direct and spectral).

use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{AnalyticShape, GridSet, IntervalSet, PlanarSet, Rect, Vec2};
use crate::kernel::far::exit_distance;
use crate::kernel::{sphere_measure, FracParams, QuadratureSpec};
use crate::quad::{adaptive, adaptive_breaks, gauss_legendre, power_left, Tol};
use crate::reduce::pairwise;

/// `c_1` such that `c_1 z^s / (|x|^2 + z^2)^((n+s)/2)` has unit mass in `x`.
pub fn poisson_constant(n: usize, s: f64) -> f64 {
    2.0 / (sphere_measure(n) * beta(0.5 * n as f64, 0.5 * s))
}

/// Mass of the one-dimensional kernel slice on `(t z, inf)`.
fn upper_mass_1d(t: f64, s: f64) -> f64 {
    if t >= 0.0 {
        0.5 * beta_reg(0.5 * s, 0.5, 1.0 / (1.0 + t * t))
    } else {
        1.0 - upper_mass_1d(-t, s)
    }
}

/// Values of the trace outside the sampled window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Constant(f64),
    /// One dimension: values left and right of the window.
    Sides {
        left: f64,
        right: f64,
    },
    /// Two dimensions: `+1` inside the shape, `-1` outside.
    Shape(AnalyticShape),
}

/// Samples of a trace on a uniform grid; sample `(i, j)` sits at
/// `origin + h (i, j)` and represents the cell of side `h` around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub h: f64,
    pub values: Vec<f64>,
    pub tail: Tail,
}

impl Trace {
    pub fn line(x0: f64, h: f64, values: Vec<f64>, tail: Tail) -> Result<Trace> {
        let t = Trace {
            n: 1,
            nx: values.len(),
            ny: 1,
            origin: [x0, 0.0],
            h,
            values,
            tail,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn plane(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
        tail: Tail,
    ) -> Result<Trace> {
        let t = Trace {
            n: 2,
            nx,
            ny,
            origin: [origin.x, origin.y],
            h,
            values,
            tail,
        };
        t.validate()?;
        Ok(t)
    }

    /// `chi_E - chi_{E^c}` sampled at cell centres of a grid.
    pub fn from_grid(g: &GridSet, tail: Tail) -> Result<Trace> {
        let c = g.center(0, 0);
        let values = g
            .bits()
            .iter()
            .map(|b| if *b { 1.0 } else { -1.0 })
            .collect();
        Trace::plane(c, g.h, g.width, g.height, values, tail)
    }

    /// `chi_E - chi_{E^c}` of a set of intervals on `x0 + h k`, `k < count`.
    pub fn from_intervals(e: &IntervalSet, x0: f64, h: f64, count: usize) -> Result<Trace> {
        let sign = |x: f64| if e.contains(x) { 1.0 } else { -1.0 };
        let values = (0..count).map(|k| sign(x0 + h * k as f64)).collect();
        let tail = Tail::Sides {
            left: sign(f64::MIN / 2.0),
            right: sign(f64::MAX / 2.0),
        };
        Trace::line(x0, h, values, tail)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) || self.nx == 0 || self.ny == 0 {
            return Err(Error::Domain(
                "trace needs a positive spacing and at least one sample".into(),
            ));
        }
        if self.values.len() != self.nx * self.ny {
            return Err(Error::SizeMismatch {
                expected: self.nx * self.ny,
                got: self.values.len(),
            });
        }
        let tail_ok = match &self.tail {
            Tail::Constant(c) => c.is_finite(),
            Tail::Sides { left, right } => left.is_finite() && right.is_finite(),
            Tail::Shape(_) => true,
        };
        if !tail_ok || self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::UnboundedTrace);
        }
        match (&self.tail, self.n) {
            (Tail::Sides { .. }, 1) | (Tail::Shape(_), 2) | (Tail::Constant(_), 1 | 2) => Ok(()),
            _ => Err(Error::Domain(
                "tail does not match the trace dimension".into(),
            )),
        }
    }

    fn window(&self) -> Rect {
        let h = self.h;
        let min = Vec2::new(self.origin[0] - 0.5 * h, self.origin[1] - 0.5 * h);
        Rect::new(min, min + Vec2::new(self.nx as f64 * h, self.ny as f64 * h))
    }

    fn range(&self) -> (f64, f64) {
        let mut lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = self
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let tails: Vec<f64> = match &self.tail {
            Tail::Constant(c) => vec![*c],
            Tail::Sides { left, right } => vec![*left, *right],
            Tail::Shape(_) => vec![-1.0, 1.0],
        };
        for t in tails {
            lo = lo.min(t);
            hi = hi.max(t);
        }
        (lo, hi)
    }
}

/// Geometric levels `z_j = (h/4) 1.25^j`, the last one clipped to `z_max`.
pub fn z_levels(h: f64, z_max: f64) -> Vec<f64> {
    let mut z = vec![0.25 * h];
    while *z.last().unwrap() < z_max {
        let next = z.last().unwrap() * 1.25;
        z.push(next.min(z_max));
    }
    z
}

/// Extension samples on the trace grid at each `z` level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionField {
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub h: f64,
    pub z: Vec<f64>,
    pub a: f64,
    pub trace: Vec<f64>,
    /// Level-major: `values[k * nx * ny + j * nx + i]`.
    #[serde(skip)]
    pub values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    n: usize,
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    h: f64,
    z: Vec<f64>,
    a: f64,
}

impl ExtensionField {
    pub fn value(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[k * self.nx * self.ny + j * self.nx + i]
    }

    pub fn sample(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        )
    }

    /// One JSON header line followed by the trace and the level values as
    /// little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            n: self.n,
            nx: self.nx,
            ny: self.ny,
            origin: self.origin,
            h: self.h,
            z: self.z.clone(),
            a: self.a,
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for v in self.trace.iter().chain(&self.values) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let hd: Header = serde_json::from_str(&line)?;
        let m = hd.nx * hd.ny;
        let mut buf = vec![0u8; 8 * m * (1 + hd.z.len())];
        r.read_exact(&mut buf)?;
        let vals: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(ExtensionField {
            n: hd.n,
            nx: hd.nx,
            ny: hd.ny,
            origin: hd.origin,
            h: hd.h,
            z: hd.z,
            a: hd.a,
            trace: vals[..m].to_vec(),
            values: vals[m..].to_vec(),
        })
    }
}

/// `u~(., z) = P(., z) * u` on every level. The tail is integrated exactly
/// against the kernel; in two dimensions the in-window weights are
/// rescaled per sample so that every slice has unit mass.
pub fn poisson_extend(
    trace: &Trace,
    z_levels: &[f64],
    params: FracParams,
) -> Result<ExtensionField> {
    trace.validate()?;
    if params.n != trace.n {
        return Err(Error::Domain(format!(
            "trace dimension {} does not match n = {}",
            trace.n, params.n
        )));
    }
    if z_levels.is_empty()
        || z_levels[0] <= 0.0
        || z_levels.windows(2).any(|w| w[1] <= w[0])
        || z_levels.iter().any(|z| !z.is_finite())
    {
        return Err(Error::Domain(
            "z levels must be positive and strictly increasing".into(),
        ));
    }
    let s = params.s;
    let levels: Result<Vec<Vec<f64>>> = z_levels
        .par_iter()
        .map(|&z| {
            if trace.n == 1 {
                Ok(level_1d(trace, z, s))
            } else {
                level_2d(trace, z, s)
            }
        })
        .collect();
    let levels = levels?;
    let (lo, hi) = trace.range();
    // the averages are convex combinations; clip rounding overshoot
    let values = levels
        .into_iter()
        .flatten()
        .map(|v| v.clamp(lo, hi))
        .collect();
    Ok(ExtensionField {
        n: trace.n,
        nx: trace.nx,
        ny: trace.ny,
        origin: trace.origin,
        h: trace.h,
        z: z_levels.to_vec(),
        a: 1.0 - s,
        trace: trace.values.clone(),
        values,
    })
}

fn level_1d(t: &Trace, z: f64, s: f64) -> Vec<f64> {
    let (nx, h, x0) = (t.nx, t.h, t.origin[0]);
    // mass of the cell at offset d (in samples)
    let mass = |d: i64| -> f64 {
        let (lo, hi) = ((d as f64 - 0.5) * h / z, (d as f64 + 0.5) * h / z);
        if lo >= 0.0 {
            upper_mass_1d(lo, s) - upper_mass_1d(hi, s)
        } else if hi <= 0.0 {
            upper_mass_1d(-hi, s) - upper_mass_1d(-lo, s)
        } else {
            1.0 - upper_mass_1d(hi, s) - upper_mass_1d(-lo, s)
        }
    };
    let w: Vec<f64> = (-(nx as i64 - 1)..nx as i64).map(mass).collect();
    let (left, right) = match t.tail {
        Tail::Constant(c) => (c, c),
        Tail::Sides { left, right } => (left, right),
        Tail::Shape(_) => unreachable!("validated"),
    };
    let (wl, wr) = (x0 - 0.5 * h, x0 + (nx as f64 - 0.5) * h);
    (0..nx)
        .map(|i| {
            let x = x0 + i as f64 * h;
            let mut acc: Vec<f64> = (0..nx).map(|k| t.values[k] * w[k + nx - 1 - i]).collect();
            acc.push(left * upper_mass_1d((x - wl) / z, s));
            acc.push(right * upper_mass_1d((wr - x) / z, s));
            pairwise(&acc)
        })
        .collect()
}

/// Cell mass of the 2D kernel slice at integer offset `(di, dj)`.
fn cell_mass_2d(di: i64, dj: i64, h: f64, z: f64, s: f64, c1: f64) -> f64 {
    let q = 0.5 * (2.0 + s);
    let p = |x: f64, y: f64| c1 * z.powf(s) * (x * x + y * y + z * z).powf(-q);
    let (cx, cy) = (di as f64 * h, dj as f64 * h);
    let r2 = cx * cx + cy * cy;
    if di.abs().max(dj.abs()) <= 2 || r2 < (6.0 * z).powi(2) {
        let tol = Tol::new(1e-15, 1e-10);
        return adaptive(
            |x| adaptive(|y| p(x, y), cy - 0.5 * h, cy + 0.5 * h, tol).value,
            cx - 0.5 * h,
            cx + 0.5 * h,
            tol,
        )
        .value;
    }
    // midpoint with the Laplacian correction h^2/24
    let b = r2 + z * z;
    let lap = -4.0 * q * b.powf(-q - 1.0) + 4.0 * q * (q + 1.0) * r2 * b.powf(-q - 2.0);
    h * h * c1 * z.powf(s) * (b.powf(-q) + h * h / 24.0 * lap)
}

/// Circular convolution of an `nx x ny` array with a kernel indexed by
/// offsets in `(-nx, nx) x (-ny, ny)`, evaluated on the original grid.
fn convolve(u: &[f64], nx: usize, ny: usize, kern: &dyn Fn(i64, i64) -> f64) -> Vec<f64> {
    let (mx, my) = (2 * nx - 1, 2 * ny - 1);
    let mut planner = FftPlanner::<f64>::new();
    let (fx, fy) = (planner.plan_fft_forward(mx), planner.plan_fft_forward(my));
    let (ix, iy) = (planner.plan_fft_inverse(mx), planner.plan_fft_inverse(my));
    let fft2 =
        |data: &mut Vec<Complex<f64>>, row: &dyn rustfft::Fft<f64>, col: &dyn rustfft::Fft<f64>| {
            for r in data.chunks_exact_mut(mx) {
                row.process(r);
            }
            let mut tmp = vec![Complex::default(); my];
            for c in 0..mx {
                for r in 0..my {
                    tmp[r] = data[r * mx + c];
                }
                col.process(&mut tmp);
                for r in 0..my {
                    data[r * mx + c] = tmp[r];
                }
            }
        };
    let mut a = vec![Complex::default(); mx * my];
    for j in 0..ny {
        for i in 0..nx {
            a[j * mx + i] = Complex::new(u[j * nx + i], 0.0);
        }
    }
    let mut k = vec![Complex::default(); mx * my];
    for dj in -(ny as i64 - 1)..ny as i64 {
        for di in -(nx as i64 - 1)..nx as i64 {
            let (r, c) = (
                dj.rem_euclid(my as i64) as usize,
                di.rem_euclid(mx as i64) as usize,
            );
            k[r * mx + c] = Complex::new(kern(di, dj), 0.0);
        }
    }
    fft2(&mut a, fx.as_ref(), fy.as_ref());
    fft2(&mut k, fx.as_ref(), fy.as_ref());
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= y;
    }
    fft2(&mut a, ix.as_ref(), iy.as_ref());
    let norm = (mx * my) as f64;
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            out[j * nx + i] = a[j * mx + i].re / norm;
        }
    }
    out
}

/// Kernel mass outside the window seen from `x`, and the part of it inside
/// `shape` (when given).
fn outside_mass(
    x: Vec2,
    w: &Rect,
    shape: Option<&AnalyticShape>,
    z: f64,
    s: f64,
    c1: f64,
) -> (f64, f64) {
    let f = |r: f64| c1 * z.powf(s) * (r * r + z * z).powf(-0.5 * s) / s;
    let mut breaks: Vec<f64> = w.corners().iter().map(|c| (*c - x).angle()).collect();
    breaks.push(-PI);
    breaks.push(PI);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tol = Tol::new(1e-14, 1e-10);
    let all = adaptive_breaks(|t| f(exit_distance(x, Vec2::polar(t), w)), &breaks, tol).value;
    let inside = match shape {
        None => 0.0,
        Some(sh) => {
            adaptive_breaks(
                |t| {
                    let d = Vec2::polar(t);
                    let r0 = exit_distance(x, d, w);
                    sh.ray_intervals(x, d)
                        .into_iter()
                        .filter(|iv| iv.1 > r0)
                        .map(|(a, b)| f(a.max(r0)) - if b.is_finite() { f(b) } else { 0.0 })
                        .sum()
                },
                &breaks,
                tol,
            )
            .value
        }
    };
    (all, inside)
}

fn level_2d(t: &Trace, z: f64, s: f64) -> Result<Vec<f64>> {
    let (nx, ny, h) = (t.nx, t.ny, t.h);
    let c1 = poisson_constant(2, s);
    let mut table = vec![0.0; (2 * nx - 1) * (2 * ny - 1)];
    for dj in -(ny as i64 - 1)..ny as i64 {
        for di in -(nx as i64 - 1)..nx as i64 {
            let idx = (dj + ny as i64 - 1) as usize * (2 * nx - 1) + (di + nx as i64 - 1) as usize;
            table[idx] = cell_mass_2d(di, dj, h, z, s, c1);
        }
    }
    let kern = |di: i64, dj: i64| {
        table[(dj + ny as i64 - 1) as usize * (2 * nx - 1) + (di + nx as i64 - 1) as usize]
    };
    // the kernel is even, so correlation and convolution coincide
    let conv_u = convolve(&t.values, nx, ny, &kern);
    let conv_1 = convolve(&vec![1.0; nx * ny], nx, ny, &kern);
    let w = t.window();
    let shape = match &t.tail {
        Tail::Shape(sh) => Some(sh),
        _ => None,
    };
    let out: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let x = Vec2::new(
                t.origin[0] + (k % nx) as f64 * h,
                t.origin[1] + (k / nx) as f64 * h,
            );
            let (m_out, m_in) = outside_mass(x, &w, shape, z, s, c1);
            let tail = match &t.tail {
                Tail::Constant(c) => c * m_out,
                Tail::Shape(_) => 2.0 * m_in - m_out,
                Tail::Sides { .. } => unreachable!("validated"),
            };
            (1.0 - m_out) * conv_u[k] / conv_1[k] + tail
        })
        .collect();
    Ok(out)
}

/// `int_{B_r^+} |grad u~|^2 z^a` over the half-ball centred at the origin.
///
/// Gradients are central differences on the samples and the levels; the
/// slab `[0, z_1]` carries the gradient of the lowest level with the weight
/// integrated exactly.
pub fn weighted_energy(field: &ExtensionField, r: f64) -> Result<f64> {
    let (nx, ny, h, a) = (field.nx, field.ny, field.h, field.a);
    let nz = field.z.len();
    if nz < 2 || r > *field.z.last().unwrap() {
        return Err(Error::RegionOutOfDomain { radius: r });
    }
    let covered = |o: f64, m: usize| o + h <= -r && o + (m as f64 - 2.0) * h >= r;
    if !covered(field.origin[0], nx) || (field.n == 2 && !covered(field.origin[1], ny)) {
        return Err(Error::RegionOutOfDomain { radius: r });
    }
    let zs = &field.z;
    let grad2 = |k: usize, i: usize, j: usize| -> f64 {
        let v = |kk: usize, ii: usize, jj: usize| field.value(kk, ii, jj);
        let gx = (v(k, i + 1, j) - v(k, i - 1, j)) / (2.0 * h);
        let gy = if field.n == 2 {
            (v(k, i, j + 1) - v(k, i, j - 1)) / (2.0 * h)
        } else {
            0.0
        };
        let gz = if k == 0 {
            (v(1, i, j) - v(0, i, j)) / (zs[1] - zs[0])
        } else if k + 1 == nz {
            (v(k, i, j) - v(k - 1, i, j)) / (zs[k] - zs[k - 1])
        } else {
            // three-point derivative on a nonuniform stencil
            let (d0, d1) = (zs[k] - zs[k - 1], zs[k + 1] - zs[k]);
            (v(k + 1, i, j) * d0 * d0 - v(k - 1, i, j) * d1 * d1 + v(k, i, j) * (d1 * d1 - d0 * d0))
                / (d0 * d1 * (d0 + d1))
        };
        gx * gx + gy * gy + gz * gz
    };
    let cells: Vec<(usize, usize)> = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect();
    let area = if field.n == 2 { h * h } else { h };
    let parts: Vec<f64> = cells
        .par_iter()
        .filter_map(|&(i, j)| {
            let p = field.sample(i, j);
            let rho2 = if field.n == 2 { p.norm2() } else { p.x * p.x };
            if rho2 >= r * r || i == 0 || i + 1 == nx || (field.n == 2 && (j == 0 || j + 1 == ny)) {
                return None;
            }
            let inside = |z: f64| rho2 + z * z < r * r;
            let f: Vec<f64> = (0..nz)
                .map(|k| {
                    if inside(zs[k]) {
                        grad2(k, i, j) * zs[k].powf(a)
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut acc = vec![grad2(0, i, j) * zs[0].powf(1.0 + a) / (1.0 + a)];
            for k in 0..nz - 1 {
                acc.push(0.5 * (zs[k + 1] - zs[k]) * (f[k] + f[k + 1]));
            }
            Some(pairwise(&acc) * area)
        })
        .collect();
    Ok(pairwise(&parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiRow {
    pub r: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityTrace {
    pub rows: Vec<PhiRow>,
}

impl MonotonicityTrace {
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

    /// `(max - min) / mean` of the values.
    pub fn spread(&self) -> f64 {
        let v: Vec<f64> = self.rows.iter().map(|r| r.phi).collect();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / (v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Every step satisfies `phi_{j+1} >= (1 - slack) phi_j`.
    pub fn nondecreasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].phi >= (1.0 - slack) * w[0].phi)
    }
}

/// Radii where the angular profile of `e` around `x` has kinks.
fn kink_radii(e: &AnalyticShape, x: Vec2) -> Vec<f64> {
    match e {
        AnalyticShape::Ball { center, radius } => {
            let d = x.dist(*center);
            vec![(d - radius).abs(), d + radius]
        }
        AnalyticShape::HalfSpace { .. } => vec![e.signed_distance(x).abs()],
        AnalyticShape::Polygon { vertices } => {
            let n = vertices.len();
            let mut v: Vec<f64> = vertices.iter().map(|p| p.dist(x)).collect();
            for i in 0..n {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let t = (x - a).dot(b - a) / (b - a).norm2();
                if t > 0.0 && t < 1.0 {
                    v.push((a + (b - a) * t).dist(x));
                }
            }
            v
        }
        AnalyticShape::Subgraph { .. } => Vec::new(),
    }
}

/// Orders of the nested rules behind the analytic route of [`phi_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellRule {
    /// Gauss points per radial panel of the Poisson integrals.
    pub radial_order: usize,
    /// Growth factor between radial panels away from kinks.
    pub radial_ratio: f64,
    /// Gauss points per direction on the Duffy triangles around the points
    /// where the equator meets the boundary.
    pub corner_order: usize,
    /// Gauss points per direction on the remaining panels of the sphere.
    pub smooth_order: usize,
    /// Gauss points per radius panel.
    pub r_order: usize,
}

impl Default for ShellRule {
    fn default() -> Self {
        ShellRule {
            radial_order: 6,
            radial_ratio: 4.0,
            corner_order: 8,
            smooth_order: 6,
            r_order: 6,
        }
    }
}

/// Exact extension of `chi_E - chi_{E^c}` for an analytic planar set.
struct ShapeExtension<'a> {
    e: &'a AnalyticShape,
    s: f64,
    c1: f64,
    rule: ShellRule,
}

impl ShapeExtension<'_> {
    /// `grad u~` at `(x, z)`, with `rho = z t` along circles around `x`.
    fn grad(&self, x: Vec2, z: f64) -> [f64; 3] {
        let s = self.s;
        let q = 0.5 * (2.0 + s);
        let theta0 = if self.e.contains(x) { TAU } else { 0.0 };
        let profile = |t: f64| -> (f64, f64, f64) {
            let arcs = self.e.circle_arcs(x, z * t);
            let mut th = 0.0;
            let (mut mx, mut my) = (0.0, 0.0);
            for (a, b) in arcs {
                th += b - a;
                mx += b.sin() - a.sin();
                my += a.cos() - b.cos();
            }
            (th, mx, my)
        };
        let mut pts: Vec<f64> = vec![0.0];
        let kinks: Vec<f64> = kink_radii(self.e, x)
            .into_iter()
            .map(|r| r / z)
            .filter(|r| *r > 0.0)
            .collect();
        let top = 1e4 * (1.0 + kinks.iter().cloned().fold(0.0, f64::max));
        for &b in &kinks {
            pts.push(b);
            for k in 1..=5 {
                let d = b * 0.5f64.powi(k);
                pts.push(b - d);
                pts.push(b + d);
            }
        }
        let mut g = 0.125;
        while g < top {
            pts.push(g);
            g *= self.rule.radial_ratio;
        }
        pts.push(top);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        let rule = gauss_legendre(self.rule.radial_order);
        let (mut sx, mut sy, mut sz) = (Vec::new(), Vec::new(), Vec::new());
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (c, hl) = (0.5 * (a + b), 0.5 * (b - a));
            for (node, wt) in rule.nodes.iter().zip(&rule.weights) {
                let t = c + hl * node;
                let (th, mx, my) = profile(t);
                let u = 1.0 + t * t;
                let kx = t * t * u.powf(-q - 1.0);
                let kz = t * (s * u.powf(-q) - (2.0 + s) * u.powf(-q - 1.0));
                sx.push(wt * hl * kx * mx);
                sy.push(wt * hl * kx * my);
                sz.push(wt * hl * kz * (th - theta0));
            }
        }
        let (th, mx, my) = profile(top);
        let tx = top.powf(-1.0 - s) / (1.0 + s);
        sx.push(mx * tx);
        sy.push(my * tx);
        sz.push((th - theta0) * top * top * (1.0 + top * top).powf(-q));
        let fx = 2.0 * self.c1 * (2.0 + s) / z;
        let fz = 2.0 * self.c1 / z;
        [fx * pairwise(&sx), fx * pairwise(&sy), fz * pairwise(&sz)]
    }

    /// Integral of `|grad u~|^2 z^a` over the hemisphere of radius `big_r`
    /// (surface measure, without the `R^2` factor).
    ///
    /// Coordinates are the azimuth and `w = z / R`. Where the equator meets
    /// the boundary the integrand blows up like `rho^(a-2)`; those corners are
    /// split into two triangles with polar (Duffy) coordinates and power maps.
    fn shell(&self, big_r: f64) -> f64 {
        let s = self.s;
        let a = 1.0 - s;
        let mut phis: Vec<f64> = Vec::new();
        for (lo, hi) in self.e.circle_arcs(Vec2::default(), big_r) {
            for t in [lo, hi] {
                let t = (t + PI).rem_euclid(TAU) - PI;
                phis.push(t);
            }
        }
        phis.sort_by(f64::total_cmp);
        phis.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        if phis.len() > 1 && (phis[0] + TAU - phis[phis.len() - 1]).abs() < 1e-12 {
            phis.pop();
        }
        let smooth = gauss_legendre(self.rule.smooth_order);
        let corner = gauss_legendre(self.rule.corner_order);
        let panel = |lo: f64, hi: f64, max_len: f64| -> Vec<(f64, f64)> {
            let m = ((hi - lo) / max_len).ceil().max(1.0) as usize;
            let step = (hi - lo) / m as f64;
            let mut out = Vec::new();
            for k in 0..m {
                let (c, hl) = (lo + (k as f64 + 0.5) * step, 0.5 * step);
                for (node, wt) in smooth.nodes.iter().zip(&smooth.weights) {
                    out.push((c + hl * node, wt * hl));
                }
            }
            out
        };
        // w = v^(1/s) turns the w^(s-1) behaviour at the equator smooth
        let vnodes: Vec<(f64, f64)> = panel(0.0, 1.0, 0.5)
            .into_iter()
            .map(|(v, wt)| (v.powf(1.0 / s), wt * v.powf(1.0 / s - 1.0) / s))
            .collect();
        // (phi, w, weight)
        let mut nodes: Vec<(f64, f64, f64)> = Vec::new();
        let band = |lo: f64, hi: f64, nodes: &mut Vec<(f64, f64, f64)>| {
            for (phi, wp) in panel(lo, hi, 0.5) {
                for &(w, ww) in &vnodes {
                    nodes.push((phi, w, wp * ww));
                }
            }
        };
        if phis.is_empty() {
            band(-PI, PI, &mut nodes);
        } else {
            let m = phis.len();
            let gap = (0..m)
                .map(|k| {
                    if k + 1 < m {
                        phis[k + 1] - phis[k]
                    } else {
                        phis[0] + TAU - phis[k]
                    }
                })
                .fold(f64::INFINITY, f64::min);
            let d = (0.3 * gap).min(0.25);
            for k in 0..m {
                let next = if k + 1 < m {
                    phis[k + 1]
                } else {
                    phis[0] + TAU
                };
                band(phis[k] + d, next - d, &mut nodes);
            }
            let unit: Vec<(f64, f64)> = corner
                .nodes
                .iter()
                .zip(&corner.weights)
                .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
                .collect();
            for &p in &phis {
                for side in [-1.0, 1.0] {
                    for &(u, wu) in &unit {
                        // rho = d xi with xi = u^(1/a)
                        let xi = u.powf(1.0 / a);
                        let jr = d * d * xi * u.powf(1.0 / a - 1.0) / a * wu;
                        for &(v, wv) in &unit {
                            // below the diagonal: w = d xi eta with eta = v^(1/s)
                            let eta = v.powf(1.0 / s);
                            let je = v.powf(1.0 / s - 1.0) / s;
                            nodes.push((p + side * d * xi, d * xi * eta, jr * je * wv));
                            // above it: phi offset = d xi v
                            nodes.push((p + side * d * xi * v, d * xi, jr * wv));
                        }
                    }
                    for (off, wp) in panel(0.0, d, 0.5) {
                        for (w, ww) in panel(d, 1.0, 0.5) {
                            nodes.push((p + side * off, w, wp * ww));
                        }
                    }
                }
            }
        }
        let vals: Vec<f64> = nodes
            .par_iter()
            .map(|&(phi, w, wt)| {
                let z = big_r * w;
                let x = Vec2::polar(phi) * (big_r * (1.0 - w * w).max(0.0).sqrt());
                let g = self.grad(x, z);
                wt * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) * z.powf(a)
            })
            .collect();
        pairwise(&vals)
    }

    /// `int_{B_r^+} |grad u~|^2 z^a` for every `r` in the increasing list.
    fn energies(&self, r_list: &[f64]) -> Vec<f64> {
        let a = 1.0 - self.s;
        let rule = gauss_legendre(self.rule.r_order);
        let r1 = r_list[0];
        // R^2 shell(R) ~ R^a near 0: R = r1 u^(1/(1+a)) makes it smooth
        let p = 1.0 / (1.0 + a);
        let first: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(node, wt)| {
                let u = 0.5 * (node + 1.0);
                let rr = r1 * u.powf(p);
                0.5 * wt * r1 * p * u.powf(p - 1.0) * rr * rr * self.shell(rr)
            })
            .collect();
        let mut total = pairwise(&first);
        let mut out = vec![total];
        for w in r_list.windows(2) {
            let (c, hl) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            let seg: Vec<f64> = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(node, wt)| {
                    let rr = c + hl * node;
                    wt * hl * rr * rr * self.shell(rr)
                })
                .collect();
            total += pairwise(&seg);
            out.push(total);
        }
        out
    }
}

fn check_r_list(r_list: &[f64]) -> Result<()> {
    if r_list.is_empty() || r_list[0] <= 0.0 || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `Phi_E(r) = r^-(n+a-1) int_{B_r^+} |grad u~|^2 z^a` for `u = chi_E - chi_{E^c}`.
///
/// Analytic sets use exact polar integrals for the gradient and graded
/// shell cubature; grids go through [`poisson_extend`] and
/// [`weighted_energy`] with `-1` outside the frame.
pub fn phi_trace(
    e: &PlanarSet,
    r_list: &[f64],
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<MonotonicityTrace> {
    phi_trace_with(e, r_list, params, quad, ShellRule::default())
}

/// [`phi_trace`] with explicit cubature orders for analytic sets.
pub fn phi_trace_with(
    e: &PlanarSet,
    r_list: &[f64],
    params: FracParams,
    quad: &QuadratureSpec,
    rule: ShellRule,
) -> Result<MonotonicityTrace> {
    quad.validate()?;
    check_r_list(r_list)?;
    if params.n != 2 {
        return Err(Error::Unsupported(
            "the monotonicity functional is implemented for n = 2".into(),
        ));
    }
    let s = params.s;
    let expo = 2.0 - s;
    let energies = match e {
        PlanarSet::Shape(sh) => {
            if sh.signed_distance(Vec2::default()).abs() > 1e-9 {
                return Err(Error::OriginNotOnBoundary);
            }
            let ext = ShapeExtension {
                e: sh,
                s,
                c1: poisson_constant(2, s),
                rule,
            };
            ext.energies(r_list)
        }
        PlanarSet::Grid(g) => {
            if !grid_origin_on_boundary(g) {
                return Err(Error::OriginNotOnBoundary);
            }
            let trace = Trace::from_grid(g, Tail::Constant(-1.0))?;
            let zs = z_levels(g.h, *r_list.last().unwrap());
            let field = poisson_extend(&trace, &zs, params)?;
            r_list
                .iter()
                .map(|r| weighted_energy(&field, *r))
                .collect::<Result<Vec<f64>>>()?
        }
        PlanarSet::Koch(_) => {
            return Err(Error::Unsupported(
                "the monotonicity functional needs an analytic set or a grid".into(),
            ))
        }
    };
    Ok(MonotonicityTrace {
        rows: r_list
            .iter()
            .zip(energies)
            .map(|(r, en)| PhiRow {
                r: *r,
                phi: en / r.powf(expo),
            })
            .collect(),
    })
}

fn grid_origin_on_boundary(g: &GridSet) -> bool {
    let lat = g.lattice();
    let p = Vec2::default();
    let (i, j) = lat.cell_of(p);
    let mut seen = [false, false];
    for di in -1..=1 {
        for dj in -1..=1 {
            let c = lat.center(i + di, j + dj);
            if (c.x - p.x).abs() <= g.h && (c.y - p.y).abs() <= g.h {
                seen[g.get_signed(i + di, j + dj) as usize] = true;
            }
        }
    }
    seen[0] && seen[1]
}

/// The bound `C` for `Phi`: twice the half-plane value at the same `s`.
pub fn phi_bound_constant(params: FracParams, quad: &QuadratureSpec) -> Result<f64> {
    let hp = AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0)?;
    let t = phi_trace(&PlanarSet::Shape(hp), &[1.0], params, quad)?;
    Ok(2.0 * t.rows[0].phi)
}

/// `max Phi <= C` with `C` from [`phi_bound_constant`].
pub fn phi_bound_check(trace: &MonotonicityTrace, params: FracParams) -> Result<bool> {
    let c = phi_bound_constant(params, &QuadratureSpec::default())?;
    Ok(trace.rows.iter().all(|r| r.phi <= c))
}

/// Uniform samples `values[k]` at `x0 + k h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn from_fn<F: Fn(f64) -> f64>(x0: f64, h: f64, count: usize, f: F) -> Samples {
        Samples {
            x0,
            h,
            values: (0..count).map(|k| f(x0 + k as f64 * h)).collect(),
        }
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Natural cubic spline through the samples.
struct Spline<'a> {
    s: &'a Samples,
    m: Vec<f64>,
}

impl<'a> Spline<'a> {
    fn new(s: &'a Samples) -> Self {
        let n = s.values.len();
        let y = &s.values;
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            let h2 = s.h * s.h;
            for i in 0..k {
                let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / h2;
                let denom = if i == 0 { 4.0 } else { 4.0 - c[i - 1] };
                c[i] = 1.0 / denom;
                d[i] = (rhs - if i == 0 { 0.0 } else { d[i - 1] }) / denom;
            }
            for i in (0..k).rev() {
                m[i + 1] = d[i] - if i + 1 < k { c[i] * m[i + 2] } else { 0.0 };
            }
        }
        Spline { s, m }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.s.values.len();
        let t = (x - self.s.x0) / self.s.h;
        if t < 0.0 || t > (n - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).min(n - 2);
        let u = t - i as f64;
        let (y0, y1, m0, m1) = (
            self.s.values[i],
            self.s.values[i + 1],
            self.m[i],
            self.m[i + 1],
        );
        let h2 = self.s.h * self.s.h;
        (1.0 - u) * y0
            + u * y1
            + h2 / 6.0 * (((1.0 - u).powi(3) - (1.0 - u)) * m0 + (u.powi(3) - u) * m1)
    }

    fn second(&self, x: f64) -> f64 {
        let n = self.s.values.len();
        let t = ((x - self.s.x0) / self.s.h).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let u = t - i as f64;
        (1.0 - u) * self.m[i] + u * self.m[i + 1]
    }
}

fn check_decay(u: &Samples) -> Result<()> {
    let m = u.max_abs();
    let edge = u.values[0].abs().max(u.values.last().unwrap().abs());
    if edge > 1e-8 * m {
        return Err(Error::AliasWarning { ratio: edge / m });
    }
    Ok(())
}

/// Relative disagreement of second differences at spacings `h` and `2h`
/// near sample `i`.
fn roughness(u: &Samples, i: usize) -> f64 {
    let v = &u.values;
    let n = v.len();
    let h2 = u.h * u.h;
    let (mut diff, mut size) = (0.0f64, 0.0f64);
    for k in i.saturating_sub(3).max(2)..=(i + 3).min(n - 3) {
        let d1 = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2;
        let d2 = (v[k + 2] - 2.0 * v[k] + v[k - 2]) / (4.0 * h2);
        diff = diff.max((d1 - d2).abs());
        size = size.max(d1.abs()).max(d2.abs());
    }
    diff / size.max(1e-12 * u.max_abs() / h2).max(f64::MIN_POSITIVE)
}

/// `(-Delta)^s u(x) = -(C(1,s)/2) int (u(x+y) + u(x-y) - 2u(x)) |y|^(-1-2s) dy`
/// on samples that decay to zero inside the window.
pub fn frac_laplacian_direct(u: &Samples, x: f64, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    FracParams::new(1, s)?;
    let n = u.values.len();
    if n < 8 {
        return Err(Error::Domain("need at least 8 samples".into()));
    }
    let (lo, hi) = (u.x0, u.x(n - 1));
    if !(x > lo && x < hi) {
        return Err(Error::Domain(format!("x = {x} outside the sampled window")));
    }
    check_decay(u)?;
    let i = (((x - lo) / u.h).round() as usize).clamp(2, n - 3);
    let rough = roughness(u, i);
    if rough > 0.05 {
        return Err(Error::Roughness(rough));
    }
    let sp = Spline::new(u);
    let ux = sp.eval(x);
    let y0 = 2.0 * u.h;
    let near = sp.second(x) * y0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let reach = (x - lo).max(hi - x);
    let mut breaks = vec![y0];
    let mut b = y0;
    while b < reach {
        b = (b * 2.0).min(reach);
        breaks.push(b);
    }
    let tol = Tol::new(quad.abs_tol * 1e-3, (quad.rel_tol * 1e-2).max(1e-12));
    let mid = adaptive_breaks(
        |y| (sp.eval(x + y) + sp.eval(x - y) - 2.0 * ux) * y.powf(-1.0 - 2.0 * s),
        &breaks,
        tol,
    )
    .value;
    let far = -2.0 * ux * reach.powf(-2.0 * s) / (2.0 * s);
    Ok(-c_constant(1, s) * (near + mid + far))
}

/// Spectral `(-Delta)^s u`: multiply the periodic transform by `|xi|^(2s)`.
/// Unless `periodic` is set the samples must vanish at the window edges.
pub fn frac_laplacian_fourier(u: &Samples, s: f64, periodic: bool) -> Result<Samples> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("s = {s} must lie in (0, 1]")));
    }
    let n = u.values.len();
    if n < 2 {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    if !periodic {
        check_decay(u)?;
    }
    // zero padding pushes the periodic images away; the symbol's kink at 0
    // otherwise costs (2 pi / L)^(1 + 2s) in the inverse transform
    let m = if periodic {
        n
    } else {
        (16 * n).next_power_of_two()
    };
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = u.values.iter().map(|v| Complex::new(*v, 0.0)).collect();
    buf.resize(m, Complex::new(0.0, 0.0));
    planner.plan_fft_forward(m).process(&mut buf);
    let len = m as f64 * u.h;
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= m / 2 {
            k as f64
        } else {
            k as f64 - m as f64
        };
        let xi = TAU * kk / len;
        *c *= xi.abs().powf(2.0 * s);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    Ok(Samples {
        x0: u.x0,
        h: u.h,
        values: buf[..n].iter().map(|c| c.re / m as f64).collect(),
    })
}

/// `C(n, s) = (int (1 - cos z_1) / |z|^(n+2s) dz)^-1`.
///
/// The transverse directions integrate out in closed form, leaving
/// `int_R (1 - cos t) |t|^(-1-2s) dt`, split at `|t| = 1`.
pub fn c_constant(n: usize, s: f64) -> f64 {
    let tol = Tol::new(1e-15, 1e-13);
    // (1 - cos t) / t^2 stays accurate near 0 as 2 sin^2(t/2) / t^2
    let g = |t: f64, _d: f64| {
        if t == 0.0 {
            0.5
        } else {
            2.0 * (0.5 * t).sin().powi(2) / (t * t)
        }
    };
    let inner = power_left(g, 0.0, 1.0, 2.0 * s - 1.0, tol).value;
    let p = 1.0 + 2.0 * s;
    let periods = 200;
    let z = TAU * periods as f64;
    let breaks: Vec<f64> = std::iter::once(1.0)
        .chain((1..=2 * periods).map(|k| k as f64 * PI))
        .collect();
    let osc = adaptive_breaks(|t| t.cos() * t.powf(-p), &breaks, tol).value;
    // integration by parts at a multiple of 2 pi
    let tail = p * z.powf(-p - 1.0) - p * (p + 1.0) * (p + 2.0) * z.powf(-p - 3.0);
    let one_d = 2.0 * (inner + 1.0 / (2.0 * s) - osc - tail);
    let nn = n as f64;
    let transverse = if n == 1 {
        1.0
    } else {
        PI.powf(0.5 * (nn - 1.0)) * gamma(0.5 + s) / gamma(0.5 * (nn + 2.0 * s))
    };
    1.0 / (transverse * one_d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_slices_have_unit_mass() {
        for s in [0.3, 0.7] {
            let t = Trace::line(0.0, 0.1, vec![1.0; 21], Tail::Constant(1.0)).unwrap();
            let f = poisson_extend(&t, &[0.05, 0.5, 3.0], FracParams::new(1, s).unwrap()).unwrap();
            assert!(f.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn one_dimensional_sign_is_odd() {
        let vals: Vec<f64> = (0..41)
            .map(|k| {
                if k < 20 {
                    -1.0
                } else if k > 20 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let t = Trace::line(
            -2.0,
            0.1,
            vals,
            Tail::Sides {
                left: -1.0,
                right: 1.0,
            },
        )
        .unwrap();
        let f = poisson_extend(&t, &z_levels(0.1, 2.0), FracParams::new(1, 0.5).unwrap()).unwrap();
        for k in 0..f.z.len() {
            assert!(f.value(k, 20, 0).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_constant_trace_stays_constant() {
        let t = Trace::plane(
            Vec2::new(-1.0, -1.0),
            0.25,
            9,
            9,
            vec![0.5; 81],
            Tail::Constant(0.5),
        )
        .unwrap();
        let f = poisson_extend(&t, &[0.1, 0.6], FracParams::new(2, 0.5).unwrap()).unwrap();
        assert!(
            f.values.iter().all(|v| (v - 0.5).abs() < 1e-9),
            "{:?}",
            &f.values[..9]
        );
    }

    #[test]
    fn spectral_cosine_mode() {
        let n = 64;
        let h = TAU / n as f64;
        let u = Samples::from_fn(0.0, h, n, |x| (3.0 * x).cos());
        assert!(matches!(
            frac_laplacian_fourier(&u, 0.5, false),
            Err(Error::AliasWarning { .. })
        ));
        let v = frac_laplacian_fourier(&u, 0.5, true).unwrap();
        for (a, b) in v.values.iter().zip(&u.values) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_gap_to_minus_second_derivative_is_linear_in_one_minus_s() {
        // -u''(0) = 2 for exp(-x^2); 1e-6 at s = 0.9999 is out of reach, the
        // gap is about (1 - s) times a fixed constant
        let u = Samples::from_fn(-12.0, 0.01, 2401, |x| (-x * x).exp());
        let slopes: Vec<f64> = [0.99, 0.999, 0.9999]
            .iter()
            .map(|&s| {
                (frac_laplacian_fourier(&u, s, false).unwrap().values[1200] - 2.0).abs() / (1.0 - s)
            })
            .collect();
        for w in slopes.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.05, "{slopes:?}");
        }
    }

    #[test]
    fn c_constant_matches_gamma_formula() {
        for n in [1usize, 2] {
            for s in [0.25, 0.5, 0.75] {
                let nn = n as f64;
                let want =
                    s * 4f64.powf(s) * gamma(0.5 * nn + s) / (PI.powf(0.5 * nn) * gamma(1.0 - s));
                let got = c_constant(n, s);
                assert!(
                    (got / want - 1.0).abs() < 1e-8,
                    "n={n} s={s}: {got} vs {want}"
                );
            }
        }
    }
}
