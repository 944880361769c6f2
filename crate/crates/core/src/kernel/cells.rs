//! Interaction of unit lattice cells, `W(dx, dy) = L_s(Q, Q + (dx, dy))`
//! with `Q = [0, 1]^2`. A cell pair of side `h` interacts with
//! `h^(2-s) W(dx, dy)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::quad::{gauss_legendre, power_left, power_right, tanh_sinh, Tol};

/// Offsets with `max(|dx|, |dy|)` up to this bound are tabulated.
pub const TABLE_RADIUS: i64 = 40;
/// Offsets up to this bound use the boundary-integral formula.
const NEAR_RADIUS: i64 = 2;

/// Tabulated cell-pair interaction for a fixed `s`.
#[derive(Debug)]
pub struct CellKernel {
    pub s: f64,
    table: Vec<f64>,
}

fn tri_index(a: i64, b: i64) -> usize {
    (a * (a + 1) / 2 + b) as usize
}

/// `G(dx, e) = int_{-1}^{1} (1 - |w|) ((w + dx)^2 + e^2)^(-s/2) dw`.
fn g_edge(dx: f64, e: f64, s: f64, tol: Tol) -> f64 {
    let f = |w: f64| (1.0 - w.abs()) * ((w + dx) * (w + dx) + e * e).powf(-0.5 * s);
    let sing = -dx;
    let mut breaks = vec![-1.0, 0.0, 1.0];
    if e == 0.0 && sing > -1.0 && sing < 1.0 && sing != 0.0 {
        breaks.push(sing);
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if e == 0.0 && a == sing {
            total += power_left(|x, _| 1.0 - x.abs(), a, b, s, tol).value;
        } else if e == 0.0 && b == sing {
            total += power_right(|x, _| 1.0 - x.abs(), a, b, s, tol).value;
        } else {
            total += tanh_sinh(|x, _, _| f(x), a, b, tol).value;
        }
    }
    total
}

/// Near-field entry by the boundary double-integral identity; only pairs
/// of parallel edges contribute.
fn near_entry(dx: i64, dy: i64, s: f64) -> f64 {
    let tol = Tol::new(1e-15, 1e-13);
    let mut acc = 0.0;
    for (sa, ya) in [(-1.0, 0.0), (1.0, 1.0)] {
        for (sb, yb) in [(-1.0, dy as f64), (1.0, dy as f64 + 1.0)] {
            acc += sa * sb * g_edge(dx as f64, ya - yb, s, tol);
        }
    }
    for (sa, xa) in [(-1.0, 0.0), (1.0, 1.0)] {
        for (sb, xb) in [(-1.0, dx as f64), (1.0, dx as f64 + 1.0)] {
            acc += sa * sb * g_edge(dy as f64, xa - xb, s, tol);
        }
    }
    -acc / (s * s)
}

/// Mid-field entry: `int (1-|w1|)(1-|w2|) |d + w|^(-2-s) dw` by Gauss rules
/// on the four quadrants where the weight is smooth.
fn mid_entry(dx: i64, dy: i64, s: f64) -> f64 {
    let r = (dx.abs().max(dy.abs())) as f64;
    let n = if r <= 4.0 {
        24
    } else if r <= 10.0 {
        14
    } else {
        8
    };
    let rule = gauss_legendre(n);
    let p = 2.0 + s;
    let mut acc = 0.0;
    for (qx0, qx1) in [(-1.0, 0.0), (0.0, 1.0)] {
        for (qy0, qy1) in [(-1.0, 0.0), (0.0, 1.0)] {
            for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
                let w1 = qx0 + 0.5 * (xi + 1.0) * (qx1 - qx0);
                let fx = (1.0 - f64::abs(w1)) * 0.5 * wi;
                for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
                    let w2 = qy0 + 0.5 * (yj + 1.0) * (qy1 - qy0);
                    let fy = (1.0 - f64::abs(w2)) * 0.5 * wj;
                    let (ux, uy) = (dx as f64 + w1, dy as f64 + w2);
                    acc += fx * fy * (ux * ux + uy * uy).powf(-0.5 * p);
                }
            }
        }
    }
    acc
}

/// Far-field expansion `r^-p (1 + p^2 / (12 r^2) + c4 / r^4)` of the
/// cell-averaged kernel.
pub fn far_entry(dx: f64, dy: f64, s: f64) -> f64 {
    let p = 2.0 + s;
    let r2 = dx * dx + dy * dy;
    // fourth-order term from the triangle-weight moments E[w^4] = 1/15, E[w^2] = 1/6
    let c4 = fourth_order(dx, dy, p) / (r2 * r2);
    r2.powf(-0.5 * p) * (1.0 + p * p / (12.0 * r2) + c4)
}

/// Relative fourth-order correction times `r^4` for the kernel `r^-p`.
fn fourth_order(dx: f64, dy: f64, p: f64) -> f64 {
    // derivatives of r^-p: d^4/dx^4 etc. expressed through c = cos, q = sin
    let r = dx.hypot(dy);
    let (c, q) = (dx / r, dy / r);
    let d4x = p * (p + 2.0) * ((p + 4.0) * (p + 6.0) * c.powi(4) - 6.0 * (p + 4.0) * c * c + 3.0);
    let d4y = p * (p + 2.0) * ((p + 4.0) * (p + 6.0) * q.powi(4) - 6.0 * (p + 4.0) * q * q + 3.0);
    let d22 =
        p * (p + 2.0) * ((p + 4.0) * (p + 6.0) * c * c * q * q - (p + 4.0) * (c * c + q * q) + 1.0);
    // E[w^4]/24 = 1/360 per axis; cross term E[w1^2]E[w2^2]/4 = 1/144
    d4x / 360.0 + d4y / 360.0 + d22 / 144.0
}

impl CellKernel {
    fn build(s: f64) -> CellKernel {
        let n = tri_index(TABLE_RADIUS, TABLE_RADIUS) + 1;
        let mut table = vec![0.0; n];
        let entries: Vec<(i64, i64)> = (0..=TABLE_RADIUS)
            .flat_map(|a| (0..=a).map(move |b| (a, b)))
            .collect();
        use rayon::prelude::*;
        let vals: Vec<f64> = entries
            .par_iter()
            .map(|&(a, b)| {
                if a == 0 {
                    0.0
                } else if a <= NEAR_RADIUS {
                    near_entry(a, b, s)
                } else {
                    mid_entry(a, b, s)
                }
            })
            .collect();
        for ((a, b), v) in entries.into_iter().zip(vals) {
            table[tri_index(a, b)] = v;
        }
        CellKernel { s, table }
    }

    /// Shared kernel for `s`, built once per process.
    pub fn get(s: f64) -> Arc<CellKernel> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CellKernel>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(k) = cache.lock().unwrap().get(&s.to_bits()) {
            return k.clone();
        }
        let k = Arc::new(CellKernel::build(s));
        cache
            .lock()
            .unwrap()
            .entry(s.to_bits())
            .or_insert(k)
            .clone()
    }

    /// Unit-cell interaction at integer offset; zero for the cell itself.
    pub fn w(&self, dx: i64, dy: i64) -> f64 {
        let (a, b) = (dx.abs(), dy.abs());
        let (a, b) = if a >= b { (a, b) } else { (b, a) };
        if a <= TABLE_RADIUS {
            self.table[tri_index(a, b)]
        } else {
            far_entry(a as f64, b as f64, self.s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_and_mid_agree_where_both_apply() {
        let s = 0.5;
        for (dx, dy) in [(3, 0), (3, 2), (4, 4)] {
            let a = near_entry(dx, dy, s);
            let b = mid_entry(dx, dy, s);
            assert!((a - b).abs() < 1e-9 * a, "({dx},{dy}): {a} vs {b}");
        }
    }

    #[test]
    fn far_expansion_matches_table_edge() {
        for s in [0.3, 0.7] {
            for (dx, dy) in [(40, 0), (40, 17), (40, 40)] {
                let a = mid_entry(dx, dy, s);
                let b = far_entry(dx as f64, dy as f64, s);
                assert!((a - b).abs() < 1e-9 * a, "s={s} ({dx},{dy}) {a} {b}");
            }
        }
    }

    #[test]
    fn symmetric_lookup() {
        let k = CellKernel::get(0.4);
        assert_eq!(k.w(1, 2), k.w(-2, 1));
        assert_eq!(k.w(0, 0), 0.0);
        assert!(k.w(1, 0) > k.w(1, 1));
    }
}
