//! Discrete minimization of `J(E) = P_s(E, Omega)` over lattice cells with
//! prescribed data outside `Omega`.
//!
//! With `x_i` the occupation of free cell `i`,
//! `J = sum_i [x_i b1_i + (1 - x_i) b0_i] + sum_{i<j} W_ij [x_i != x_j]`
//! where `b1_i` is the interaction of cell `i` with the exterior complement
//! and `b0_i` the one with the exterior set.

use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AnalyticShape, GridSet, Rect, Vec2};
use crate::kernel::cells::CellKernel;
use crate::kernel::far::{far_potential, FarRegion};
use crate::kernel::{FracParams, QuadratureSpec};
use crate::quad::Tol;
use crate::reduce::pairwise;

/// Largest free-cell count accepted by the exhaustive search.
pub const BRUTE_FORCE_MAX: usize = 24;
/// Memory cap for the kernel matrix.
pub const MATRIX_BUDGET_BYTES: usize = 2 << 30;

mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(
            &v.iter()
                .map(|b| if *b { '1' } else { '0' })
                .collect::<String>(),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let raw = String::deserialize(d)?;
        raw.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("invalid bit {c:?}"))),
            })
            .collect()
    }
}

/// Grid frame, free cells and fixed exterior data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizationProblem {
    pub width: usize,
    pub height: usize,
    pub origin: Vec2,
    pub h: f64,
    /// Row-major, row 0 at the bottom.
    #[serde(with = "bitstring")]
    pub free_mask: Vec<bool>,
    /// Set cells outside the free region; same frame.
    pub exterior: GridSet,
    /// The exterior set beyond the frame: a half-space or nothing.
    pub tail: Option<AnalyticShape>,
    pub params: FracParams,
    #[serde(default)]
    pub quad: QuadratureSpec,
    #[serde(skip)]
    model: OnceLock<Arc<EnergyModel>>,
}

impl PartialEq for MinimizationProblem {
    fn eq(&self, o: &Self) -> bool {
        self.width == o.width
            && self.height == o.height
            && self.origin == o.origin
            && self.h == o.h
            && self.free_mask == o.free_mask
            && self.exterior == o.exterior
            && self.tail == o.tail
            && self.params == o.params
            && self.quad == o.quad
    }
}

impl MinimizationProblem {
    pub fn new(
        free_mask: Vec<bool>,
        exterior: GridSet,
        tail: Option<AnalyticShape>,
        params: FracParams,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        let p = MinimizationProblem {
            width: exterior.width,
            height: exterior.height,
            origin: exterior.origin,
            h: exterior.h,
            free_mask,
            exterior,
            tail,
            params,
            quad,
            model: OnceLock::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.width * self.height;
        if self.free_mask.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: self.free_mask.len(),
            });
        }
        if self.exterior.width != self.width
            || self.exterior.height != self.height
            || self.exterior.origin != self.origin
            || self.exterior.h != self.h
        {
            return Err(Error::LatticeMismatch);
        }
        if self.params.n != 2 {
            return Err(Error::Domain("grid problems need n = 2".into()));
        }
        FracParams::new(2, self.params.s)?;
        if self
            .free_mask
            .iter()
            .zip(self.exterior.bits())
            .any(|(f, e)| *f && *e)
        {
            return Err(Error::Domain(
                "exterior data overlaps the free region".into(),
            ));
        }
        match &self.tail {
            None | Some(AnalyticShape::HalfSpace { .. }) => {}
            Some(_) => {
                return Err(Error::Unsupported(
                    "exterior tails must be half-spaces".into(),
                ))
            }
        }
        Ok(())
    }

    /// Free cells as `(i, j)`, in row-major order.
    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        (0..self.width * self.height)
            .filter(|k| self.free_mask[*k])
            .map(|k| (k % self.width, k / self.width))
            .collect()
    }

    pub fn free_count(&self) -> usize {
        self.free_mask.iter().filter(|b| **b).count()
    }

    pub fn frame(&self) -> Rect {
        self.exterior.frame()
    }

    /// Full grid with the free cells filled from `config`.
    pub fn assemble(&self, config: &[bool]) -> Result<GridSet> {
        self.check_len(config)?;
        let mut g = self.exterior.clone();
        for (k, (i, j)) in self.free_cells().into_iter().enumerate() {
            g.set(i, j, config[k]);
        }
        Ok(g)
    }

    fn check_len(&self, config: &[bool]) -> Result<()> {
        let n = self.free_count();
        if config.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: config.len(),
            });
        }
        Ok(())
    }

    /// Problem with exterior data (and tail) complemented.
    pub fn complemented(&self) -> Result<Self> {
        let mut ext = self.exterior.complement();
        for k in 0..self.width * self.height {
            if self.free_mask[k] {
                let (i, j) = (k % self.width, k / self.width);
                ext.set(i, j, false);
            }
        }
        let tail = match &self.tail {
            Some(AnalyticShape::HalfSpace { normal, offset }) => {
                Some(AnalyticShape::half_space(-*normal, -offset)?)
            }
            Some(_) => unreachable!("validated"),
            None => {
                return Err(Error::Unsupported(
                    "the complement of an empty tail is not a half-space".into(),
                ))
            }
        };
        MinimizationProblem::new(
            self.free_mask.clone(),
            ext,
            tail,
            self.params,
            self.quad.clone(),
        )
    }

    /// Precomputed energy model, built on first use.
    pub fn model(&self) -> Result<Arc<EnergyModel>> {
        if let Some(m) = self.model.get() {
            return Ok(m.clone());
        }
        let m = Arc::new(EnergyModel::build(self)?);
        Ok(self.model.get_or_init(|| m).clone())
    }
}

/// Kernel matrix over free cells plus exterior fields.
#[derive(Debug)]
pub struct EnergyModel {
    pub n: usize,
    w: Vec<f64>,
    b0: Vec<f64>,
    b1: Vec<f64>,
    row: Vec<f64>,
    /// Typical energy scale, used for tolerances.
    pub scale: f64,
}

impl EnergyModel {
    fn build(p: &MinimizationProblem) -> Result<EnergyModel> {
        p.validate()?;
        let free = p.free_cells();
        let n = free.len();
        let bytes = n * n * std::mem::size_of::<f64>();
        if bytes > MATRIX_BUDGET_BYTES {
            return Err(Error::MemoryBudget {
                bytes,
                budget: MATRIX_BUDGET_BYTES,
            });
        }
        let s = p.params.s;
        let kern = CellKernel::get(s);
        let scale = p.h.powf(2.0 - s);
        let w: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (free[k / n], free[k % n]);
                if k / n == k % n {
                    0.0
                } else {
                    kern.w(b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64) * scale
                }
            })
            .collect();
        let row: Vec<f64> = (0..n).map(|i| pairwise(&w[i * n..(i + 1) * n])).collect();
        let frame = p.frame();
        let tol = Tol::new(1e-14, 1e-10);
        let (inside, outside) = match &p.tail {
            Some(t) => (FarRegion::Inside(t), FarRegion::Outside(t)),
            None => (FarRegion::Nothing, FarRegion::Everything),
        };
        let ext: Vec<(usize, usize, bool)> = (0..p.width * p.height)
            .filter(|k| !p.free_mask[*k])
            .map(|k| {
                let (i, j) = (k % p.width, k / p.width);
                (i, j, p.exterior.get(i, j))
            })
            .collect();
        let fields: Vec<(f64, f64)> = free
            .par_iter()
            .map(|&(i, j)| {
                let (mut to_set, mut to_unset) = (Vec::new(), Vec::new());
                for &(ei, ej, set) in &ext {
                    let v = kern.w(ei as i64 - i as i64, ej as i64 - j as i64);
                    if set {
                        to_set.push(v);
                    } else {
                        to_unset.push(v);
                    }
                }
                let x = p.exterior.center(i, j);
                let area = p.h * p.h;
                let far_set = if inside.is_nothing() {
                    0.0
                } else {
                    far_potential(x, &frame, &inside, s, tol).value * area
                };
                let far_unset = far_potential(x, &frame, &outside, s, tol).value * area;
                (
                    pairwise(&to_set) * scale + far_set,
                    pairwise(&to_unset) * scale + far_unset,
                )
            })
            .collect();
        let b0: Vec<f64> = fields.iter().map(|f| f.0).collect();
        let b1: Vec<f64> = fields.iter().map(|f| f.1).collect();
        let scale = pairwise(&row) + pairwise(&b0) + pairwise(&b1);
        Ok(EnergyModel {
            n,
            w,
            b0,
            b1,
            row,
            scale: scale.max(f64::MIN_POSITIVE),
        })
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let n = self.n;
        let terms: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut cut = Vec::new();
                for j in (i + 1)..n {
                    if x[i] != x[j] {
                        cut.push(self.w[i * n + j]);
                    }
                }
                pairwise(&cut) + if x[i] { self.b1[i] } else { self.b0[i] }
            })
            .collect();
        pairwise(&terms)
    }

    /// `sum_j W_ij x_j`.
    fn occupied_field(&self, x: &[bool], i: usize) -> f64 {
        let n = self.n;
        let v: Vec<f64> = (0..n)
            .filter(|j| x[*j])
            .map(|j| self.w[i * n + j])
            .collect();
        pairwise(&v)
    }

    fn delta_with(&self, set: bool, i: usize, field: f64) -> f64 {
        let up = self.b1[i] - self.b0[i] + self.row[i] - 2.0 * field;
        if set {
            -up
        } else {
            up
        }
    }

    pub fn delta(&self, x: &[bool], i: usize) -> f64 {
        self.delta_with(x[i], i, self.occupied_field(x, i))
    }

    fn fields(&self, x: &[bool]) -> Vec<f64> {
        (0..self.n).map(|i| self.occupied_field(x, i)).collect()
    }

    fn apply(&self, t: &mut [f64], i: usize, now_set: bool) {
        let n = self.n;
        let sign = if now_set { 1.0 } else { -1.0 };
        for (j, tj) in t.iter_mut().enumerate() {
            *tj += sign * self.w[j * n + i];
        }
    }
}

/// `J_Omega(E)` for the configuration of free cells.
pub fn energy(problem: &MinimizationProblem, config: &[bool]) -> Result<f64> {
    problem.check_len(config)?;
    Ok(problem.model()?.energy(config))
}

/// `J(flip(config, cell)) - J(config)`; `cell` indexes the full grid
/// (row-major).
pub fn energy_delta_flip(
    problem: &MinimizationProblem,
    config: &[bool],
    cell: usize,
) -> Result<f64> {
    problem.check_len(config)?;
    if cell >= problem.free_mask.len() || !problem.free_mask[cell] {
        return Err(Error::CellNotFree(cell));
    }
    let idx = problem.free_mask[..cell].iter().filter(|b| **b).count();
    Ok(problem.model()?.delta(config, idx))
}

/// Grid index of the `k`-th free cell.
pub fn free_cell_index(problem: &MinimizationProblem, k: usize) -> Option<usize> {
    problem
        .free_mask
        .iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .nth(k)
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Brute,
    Anneal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerReport {
    #[serde(with = "bitstring")]
    pub configuration: Vec<bool>,
    pub energy: f64,
    pub iterations: u64,
    pub accepted_flips: u64,
    pub seed: u64,
    pub method: Method,
}

/// Lexicographic order on bit arrays, `false < true`, first cell first.
fn lex_less(a: &[bool], b: &[bool]) -> bool {
    a < b
}

fn bits_of(code: u64, n: usize) -> Vec<bool> {
    (0..n).map(|k| code >> k & 1 == 1).collect()
}

/// Exhaustive search over all `2^k` configurations.
pub fn brute_force_minimize(problem: &MinimizationProblem) -> Result<MinimizerReport> {
    let n = problem.free_count();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            cells: n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let model = problem.model()?;
    if n == 0 {
        return Ok(MinimizerReport {
            configuration: Vec::new(),
            energy: model.energy(&[]),
            iterations: 1,
            accepted_flips: 0,
            seed: 0,
            method: Method::Brute,
        });
    }
    let band = 1e-9 * model.scale;
    // the top `p` bits are fixed per chunk; the rest are walked in Gray order
    let p = n.min(6);
    let low = n - p;
    let chunks: Vec<Vec<(f64, u64)>> = (0..1u64 << p)
        .into_par_iter()
        .map(|hi| {
            let start = hi << low;
            let mut x = bits_of(start, n);
            let mut t = model.fields(&x);
            let mut e = model.energy(&x);
            let mut best = e;
            let mut keep: Vec<(f64, u64)> = vec![(e, start)];
            let mut code = start;
            for g in 1u64..(1u64 << low) {
                let i = g.trailing_zeros() as usize;
                let d = model.delta_with(x[i], i, t[i]);
                x[i] = !x[i];
                model.apply(&mut t, i, x[i]);
                e += d;
                code ^= 1 << i;
                if e <= best + band {
                    if e < best {
                        best = e;
                        keep.retain(|(v, _)| *v <= best + band);
                    }
                    keep.push((e, code));
                }
            }
            keep
        })
        .collect();
    let mut cands: Vec<(f64, u64)> = chunks.into_iter().flatten().collect();
    let best = cands.iter().fold(f64::INFINITY, |m, c| m.min(c.0));
    cands.retain(|c| c.0 <= best + band);
    // exact energies for the survivors, then lexicographic tie-break
    let mut scored: Vec<(f64, Vec<bool>)> = cands
        .iter()
        .map(|(_, c)| {
            let x = bits_of(*c, n);
            (model.energy(&x), x)
        })
        .collect();
    let emin = scored.iter().fold(f64::INFINITY, |m, c| m.min(c.0));
    let tie = 1e-11 * model.scale;
    scored.retain(|c| c.0 <= emin + tie);
    let (energy, configuration) = scored
        .into_iter()
        .reduce(|a, b| if lex_less(&b.1, &a.1) { b } else { a })
        .expect("at least one candidate");
    Ok(MinimizerReport {
        configuration,
        energy,
        iterations: 1u64 << n,
        accepted_flips: 0,
        seed: 0,
        method: Method::Brute,
    })
}

/// Annealing schedule; `t0 = None` uses the mean absolute flip delta of a
/// random configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t0: Option<f64>,
    pub alpha: f64,
    pub sweeps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            t0: None,
            alpha: 0.95,
            sweeps: 200,
        }
    }
}

/// Simulated annealing over single-cell flips followed by descent until no
/// flip lowers the energy.
pub fn local_search_minimize(
    problem: &MinimizationProblem,
    schedule: Schedule,
    seed: u64,
) -> Result<MinimizerReport> {
    if let Some(t) = schedule.t0 {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!(
                "initial temperature {t} must be non-negative"
            )));
        }
    }
    if !(schedule.alpha > 0.0 && schedule.alpha < 1.0) {
        return Err(Error::Domain(format!(
            "cooling factor {} must lie in (0, 1)",
            schedule.alpha
        )));
    }
    let model = problem.model()?;
    let n = model.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let mut t = model.fields(&x);
    if n == 0 {
        return Ok(MinimizerReport {
            configuration: x,
            energy: model.energy(&[]),
            iterations: 0,
            accepted_flips: 0,
            seed,
            method: Method::Anneal,
        });
    }
    let mut temp = match schedule.t0 {
        Some(v) => v,
        None => {
            (0..n)
                .map(|i| model.delta_with(x[i], i, t[i]).abs())
                .sum::<f64>()
                / n as f64
        }
    };
    let (mut iterations, mut accepted) = (0u64, 0u64);
    let mut order: Vec<usize> = (0..n).collect();
    if temp > 0.0 {
        for _ in 0..schedule.sweeps {
            order.shuffle(&mut rng);
            for &i in &order {
                iterations += 1;
                let d = model.delta_with(x[i], i, t[i]);
                let u: f64 = rng.random();
                if d <= 0.0 || u < (-d / temp).exp() {
                    x[i] = !x[i];
                    model.apply(&mut t, i, x[i]);
                    accepted += 1;
                }
            }
            temp *= schedule.alpha;
        }
    }
    // descent: strict improvements only, cells in index order
    let eps = 1e-12 * model.scale;
    loop {
        let mut improved = false;
        for i in 0..n {
            iterations += 1;
            let d = model.delta_with(x[i], i, t[i]);
            if d < -eps {
                x[i] = !x[i];
                model.apply(&mut t, i, x[i]);
                accepted += 1;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let energy = model.energy(&x);
    Ok(MinimizerReport {
        configuration: x,
        energy,
        iterations,
        accepted_flips: accepted,
        seed,
        method: Method::Anneal,
    })
}

/// Outcome of the singleton sub/supersolution tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub is_subsolution: bool,
    pub is_supersolution: bool,
    pub sub_violations: usize,
    pub super_violations: usize,
}

/// For every free cell `A`: if `A` is unset, `L_s(A, E) - L_s(A, (E u A)^c) <= 0`;
/// if set, `L_s(A, E \ A) - L_s(A, E^c) >= 0`.
pub fn variational_check(
    problem: &MinimizationProblem,
    config: &[bool],
) -> Result<VariationalReport> {
    problem.check_len(config)?;
    let model = problem.model()?;
    let eps = 1e-12 * model.scale;
    let (mut sub, mut sup) = (0, 0);
    for i in 0..model.n {
        // the flip delta equals the negated test quantity for unset cells
        // and the test quantity itself for set cells
        let d = model.delta(config, i);
        if d < -eps {
            if config[i] {
                sub += 1;
            } else {
                sup += 1;
            }
        }
    }
    Ok(VariationalReport {
        is_subsolution: sub == 0,
        is_supersolution: sup == 0,
        sub_violations: sub,
        super_violations: sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub r: f64,
    /// `min |E n B_r(x)| / r^2` over admissible boundary cells.
    pub inside: f64,
    /// `min |E^c n B_r(x)| / r^2`.
    pub outside: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
}

impl DensityReport {
    /// Largest ratio between the per-radius minima, over both sides.
    pub fn spread(&self) -> f64 {
        let f = |sel: fn(&DensityRow) -> f64| {
            let lo = self.rows.iter().map(sel).fold(f64::INFINITY, f64::min);
            let hi = self.rows.iter().map(sel).fold(0.0, f64::max);
            hi / lo
        };
        f(|r| r.inside).max(f(|r| r.outside))
    }

    pub fn min_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.inside.min(r.outside))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Density ratios at free boundary cells (a free cell with a 4-neighbour of
/// the other phase), counting cell centres in balls that fit in the frame.
pub fn density_report(
    problem: &MinimizationProblem,
    config: &[bool],
    radii: &[f64],
) -> Result<DensityReport> {
    let g = problem.assemble(config)?;
    let (w, ht) = (g.width as i64, g.height as i64);
    let h = g.h;
    let frame = g.frame();
    let boundary: Vec<(i64, i64)> = problem
        .free_cells()
        .into_iter()
        .map(|(i, j)| (i as i64, j as i64))
        .filter(|&(i, j)| {
            let me = g.get_signed(i, j);
            [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(di, dj)| {
                let (a, b) = (i + di, j + dj);
                a >= 0 && b >= 0 && a < w && b < ht && g.get_signed(a, b) != me
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let (mut lo_in, mut lo_out, mut count) = (f64::INFINITY, f64::INFINITY, 0);
        let reach = (r / h).ceil() as i64;
        for &(i, j) in &boundary {
            let x = g.lattice().center(i, j);
            if x.x - r < frame.min.x
                || x.x + r > frame.max.x
                || x.y - r < frame.min.y
                || x.y + r > frame.max.y
            {
                continue;
            }
            let (mut inn, mut out) = (0usize, 0usize);
            for dj in -reach..=reach {
                for di in -reach..=reach {
                    if ((di * di + dj * dj) as f64) * h * h > r * r {
                        continue;
                    }
                    if g.get_signed(i + di, j + dj) {
                        inn += 1;
                    } else {
                        out += 1;
                    }
                }
            }
            let a = h * h / (r * r);
            lo_in = lo_in.min(inn as f64 * a);
            lo_out = lo_out.min(out as f64 * a);
            count += 1;
        }
        if count == 0 {
            return Err(Error::NoInteriorBalls);
        }
        rows.push(DensityRow {
            r,
            inside: lo_in,
            outside: lo_out,
            points: count,
        });
    }
    Ok(DensityReport { rows })
}

/// Builds a problem whose exterior contains `{y <= a}` and lies inside
/// `{y <= b}`; cells with centres in `a < y <= b` outside the free region
/// are set when `fill(x)` says so. Beyond the frame the data is `{y <= a}`.
pub fn strip_problem<F: Fn(Vec2) -> bool>(
    frame: (usize, usize, Vec2, f64),
    free: &Rect,
    a: f64,
    b: f64,
    fill: F,
    params: FracParams,
    quad: QuadratureSpec,
) -> Result<MinimizationProblem> {
    if !(a <= b) {
        return Err(Error::Domain("strip needs a <= b".into()));
    }
    let (w, ht, origin, h) = frame;
    let mut ext = GridSet::new(w, ht, origin, h)?;
    let mut mask = vec![false; w * ht];
    for j in 0..ht {
        for i in 0..w {
            let c = ext.center(i, j);
            if free.contains(c) {
                mask[j * w + i] = true;
            } else if c.y <= a || (c.y <= b && fill(c)) {
                ext.set(i, j, true);
            }
        }
    }
    let tail = AnalyticShape::half_space(Vec2::new(0.0, 1.0), a)?;
    MinimizationProblem::new(mask, ext, Some(tail), params, quad)
}

/// Minimizes a strip problem (exhaustively when small, otherwise the best of
/// `seeds` annealing runs) and checks that the free cells satisfy
/// `{y <= a} n Omega subset E subset {y <= b}` up to one cell.
pub fn strip_comparison_test(
    problem: &MinimizationProblem,
    a: f64,
    b: f64,
    seeds: &[u64],
) -> Result<bool> {
    let report = if problem.free_count() <= BRUTE_FORCE_MAX {
        brute_force_minimize(problem)?
    } else {
        let runs: Result<Vec<MinimizerReport>> = seeds
            .par_iter()
            .map(|s| local_search_minimize(problem, Schedule::default(), *s))
            .collect();
        runs?
            .into_iter()
            .reduce(|x, y| {
                if y.energy < x.energy
                    || (y.energy == x.energy && lex_less(&y.configuration, &x.configuration))
                {
                    y
                } else {
                    x
                }
            })
            .ok_or_else(|| Error::Domain("no seeds given".into()))?
    };
    Ok(strip_holds(problem, &report.configuration, a, b))
}

/// Strip bounds with one cell of slack.
pub fn strip_holds(problem: &MinimizationProblem, config: &[bool], a: f64, b: f64) -> bool {
    let h = problem.h;
    problem
        .free_cells()
        .iter()
        .zip(config)
        .all(|(&(i, j), &set)| {
            let y = problem.exterior.center(i, j).y;
            if set {
                y <= b + h
            } else {
                y > a - h
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(free: &[(usize, usize)], ext: &[(usize, usize)], s: f64) -> MinimizationProblem {
        let (w, ht) = (6, 6);
        let mut g = GridSet::new(w, ht, Vec2::default(), 0.25).unwrap();
        for &(i, j) in ext {
            g.set(i, j, true);
        }
        let mut mask = vec![false; w * ht];
        for &(i, j) in free {
            mask[j * w + i] = true;
        }
        MinimizationProblem::new(
            mask,
            g,
            None,
            FracParams::new(2, s).unwrap(),
            QuadratureSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn empty_everything_has_zero_energy() {
        let p = small(&[(2, 2), (3, 2)], &[], 0.5);
        assert_eq!(energy(&p, &[false, false]).unwrap(), 0.0);
    }

    #[test]
    fn single_cell_prefers_empty() {
        let p = small(&[(2, 2)], &[], 0.5);
        let r = brute_force_minimize(&p).unwrap();
        assert_eq!(r.configuration, vec![false]);
        assert!(energy(&p, &[true]).unwrap() > 0.0);
    }

    #[test]
    fn deltas_match_recomputation() {
        let p = small(
            &[(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2)],
            &[(0, 0), (1, 0), (2, 0), (5, 5)],
            0.4,
        );
        let x = vec![true, false, true, true, false, false];
        for k in 0..6 {
            let cell = free_cell_index(&p, k).unwrap();
            let d = energy_delta_flip(&p, &x, cell).unwrap();
            let mut y = x.clone();
            y[k] = !y[k];
            let full = energy(&p, &y).unwrap() - energy(&p, &x).unwrap();
            assert!(
                (d - full).abs() < 1e-9 * (1.0 + energy(&p, &x).unwrap()),
                "{d} {full}"
            );
        }
        assert!(matches!(
            energy_delta_flip(&p, &x, 0),
            Err(Error::CellNotFree(0))
        ));
    }
}
