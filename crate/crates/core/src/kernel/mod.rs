//! The interaction functional `L_s(A, B) = iint_{A x B} |x - y|^{-(n+s)}`.
//!
//! One-dimensional inputs use closed forms. Bounded piecewise-smooth planar
//! sets are integrated through the boundary double-integral identity; grids
//! and unbounded sets go through cell-pair tables plus an analytic far field.

pub mod boundary;
pub mod cells;
pub mod far;
pub mod window;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{IntervalSet, PlanarSet};
use crate::quad::{power_right, tanh_sinh, Estimate, Tol};

/// Ambient dimension and fractional order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub n: usize,
    pub s: f64,
}

impl FracParams {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("s = {s} must lie in (0, 1)")));
        }
        if n != 1 && n != 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be 1 or 2")));
        }
        Ok(FracParams { n, s })
    }
}

/// Accuracy controls shared by the quadrature routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivision_depth: usize,
    /// Margin between the region of interest and the edge of the resolved
    /// window on grid routes; `None` picks a quarter of the region diameter.
    pub tail_radius: Option<f64>,
    /// Principal-value exclusion radii; empty selects `2^-j r_loc`, `j = 1..8`.
    pub pv_radii: Vec<f64>,
    /// Cells across the region of interest when an analytic set has to be
    /// rasterized.
    pub resolution: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            max_subdivision_depth: 12,
            tail_radius: None,
            pv_radii: Vec::new(),
            resolution: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if self.pv_radii.iter().any(|r| !(*r > 0.0))
            || self.pv_radii.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::Domain(
                "pv_radii must be positive and strictly decreasing".into(),
            ));
        }
        if self.resolution < 2 {
            return Err(Error::Domain("resolution must be at least 2".into()));
        }
        Ok(())
    }

    pub(crate) fn tol(&self) -> Tol {
        Tol {
            abs: self.abs_tol.min(1e-12),
            rel: self.rel_tol.min(1e-10),
            max_panels: 4000,
        }
    }
}

/// Volume of the unit ball in dimension `d`.
pub fn omega(d: f64) -> f64 {
    std::f64::consts::PI.powf(0.5 * d) / gamma(0.5 * d + 1.0)
}

/// Surface measure `n omega_n` of the unit sphere in dimension `n`.
pub fn sphere_measure(n: usize) -> f64 {
    n as f64 * omega(n as f64)
}

/// Upper bound `(n omega_n / s) |A| d^(-s)` for sets at distance `d`.
pub fn tail_bound(measure_a: f64, d: f64, params: FracParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("separation {d} must be positive")));
    }
    Ok(sphere_measure(params.n) / params.s * measure_a * d.powf(-params.s))
}

fn antiderivative(x: f64, s: f64) -> f64 {
    x.powf(1.0 - s) / (s * (1.0 - s))
}

/// Closed form of `int_a^b int_c^d (y - x)^(-1-s)` for `a < b <= c < d`.
pub fn interaction_1d_closed(a: f64, b: f64, c: f64, d: f64, s: f64) -> Result<f64> {
    if !(a < b && b <= c && c < d) {
        return Err(Error::Ordering { a, b, c, d });
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} must lie in (0, 1)")));
    }
    Ok(pair_1d(a, b, c, d, s))
}

/// Same formula for ordered pieces with possibly infinite outer endpoints.
pub(crate) fn pair_1d(a: f64, b: f64, c: f64, d: f64, s: f64) -> f64 {
    if a == f64::NEG_INFINITY && d == f64::INFINITY {
        return f64::INFINITY;
    }
    let f = |x: f64| antiderivative(x, s);
    // with an infinite outer endpoint the two far terms cancel in the limit
    let v = if a == f64::NEG_INFINITY {
        f(d - b) - f(c - b)
    } else if d == f64::INFINITY {
        f(c - a) - f(c - b)
    } else {
        f(c - a) + f(d - b) - f(c - b) - f(d - a)
    };
    v.max(0.0)
}

/// Interaction of two interval pieces lying on either side of each other.
fn piece_interaction(p: (f64, f64), q: (f64, f64), s: f64) -> f64 {
    if p.1 <= q.0 {
        pair_1d(p.0, p.1, q.0, q.1, s)
    } else {
        pair_1d(q.0, q.1, p.0, p.1, s)
    }
}

/// Exact `L_s(E, F)` for interval unions; half-lines are allowed.
pub fn interval_interaction(e: &IntervalSet, f: &IntervalSet, s: f64) -> Result<f64> {
    let ov = e.overlap(f);
    if ov > 0.0 {
        return Err(Error::Overlap { measure: ov });
    }
    let mut terms = Vec::with_capacity(e.len() * f.len());
    for &p in e.intervals() {
        for &q in f.intervals() {
            terms.push(piece_interaction(p, q, s));
        }
    }
    Ok(crate::reduce::pairwise(&terms))
}

/// Quadrature route for a pair of ordered 1D pieces: the integral over the
/// finite piece is numerical, the other variable is integrated in closed
/// form pointwise.
fn pair_1d_quad(p: (f64, f64), q: (f64, f64), s: f64, tol: Tol) -> Estimate {
    let (outer, other) = if p.0.is_finite() && p.1.is_finite() {
        (p, q)
    } else {
        (q, p)
    };
    if !(outer.0.is_finite() && outer.1.is_finite()) {
        return Estimate::exact(f64::INFINITY);
    }
    // orient so that `other` lies to the right of the outer piece
    let (a, b, c, d) = if outer.1 <= other.0 {
        (outer.0, outer.1, other.0, other.1)
    } else {
        (-outer.1, -outer.0, -other.1, -other.0)
    };
    let far = move |x: f64| if d.is_finite() { (d - x).powf(-s) } else { 0.0 };
    if c == b {
        // (c - x)^(-s) is singular at the shared endpoint
        let e1 = power_right(|_x, _dist| 1.0 / s, a, b, s, tol);
        let e2 = tanh_sinh(|x, _, _| far(x) / s, a, b, tol);
        e1 - e2
    } else {
        tanh_sinh(|x, _, db| ((db + (c - b)).powf(-s) - far(x)) / s, a, b, tol)
    }
}

/// A set in either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Line(IntervalSet),
    Plane(PlanarSet),
}

impl From<IntervalSet> for Region {
    fn from(v: IntervalSet) -> Self {
        Region::Line(v)
    }
}

impl From<PlanarSet> for Region {
    fn from(v: PlanarSet) -> Self {
        Region::Plane(v)
    }
}

/// Numerical `L_s(A, B)` with an absolute error estimate.
pub fn interaction_quad(
    a: &Region,
    b: &Region,
    params: FracParams,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    quad.validate()?;
    let est = match (a, b) {
        (Region::Line(e), Region::Line(f)) => {
            if params.n != 1 {
                return Err(Error::Domain("interval sets need n = 1".into()));
            }
            let ov = e.overlap(f);
            if ov > 0.0 {
                return Err(Error::Overlap { measure: ov });
            }
            let tol = quad.tol();
            let mut out = Estimate::default();
            for &p in e.intervals() {
                for &q in f.intervals() {
                    out = out + pair_1d_quad(p, q, params.s, tol);
                }
            }
            out
        }
        (Region::Plane(e), Region::Plane(f)) => {
            if params.n != 2 {
                return Err(Error::Domain("planar sets need n = 2".into()));
            }
            planar_interaction(e, f, params.s, quad)?
        }
        _ => return Err(Error::Domain("sets live in different dimensions".into())),
    };
    let target = quad.abs_tol.max(quad.rel_tol * est.value.abs());
    if !(est.value.is_finite()) || est.error > target {
        return Err(Error::ToleranceNotMet {
            best: est.value,
            achieved: est.error,
        });
    }
    Ok(est)
}

fn planar_interaction(
    a: &PlanarSet,
    b: &PlanarSet,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    if a.is_empty() || b.is_empty() {
        return Ok(Estimate::default());
    }
    if let (Some(pa), Some(pb)) = (boundary::pieces_of(a), boundary::pieces_of(b)) {
        if boundary::disjoint_bounded(a, b) {
            return Ok(boundary::interaction(&pa, &pb, s, quad));
        }
        if boundary::interiors_overlap(a, b) {
            return Err(Error::Overlap { measure: f64::NAN });
        }
    }
    window::grid_interaction(a, b, s, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let v = interaction_1d_closed(0.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((v - 4.0 * (2.0 - 2f64.sqrt())).abs() < 1e-14);
        let v = interaction_1d_closed(0.0, 1.0, 2.0, 3.0, 0.5).unwrap();
        assert!((v - 4.0 * (2.0 * 2f64.sqrt() - 1.0 - 3f64.sqrt())).abs() < 1e-14);
        assert!(matches!(
            interaction_1d_closed(0.0, 1.0, 0.5, 2.0, 0.5),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn half_line_pieces() {
        // (0,1) against (2, inf): [(2)^(1/2) - 1] / (s (1 - s)) at s = 1/2
        let v = pair_1d(0.0, 1.0, 2.0, f64::INFINITY, 0.5);
        assert!((v - 4.0 * (2f64.sqrt() - 1.0)).abs() < 1e-14);
        let w = pair_1d(f64::NEG_INFINITY, -1.0, 0.0, 1.0, 0.5);
        assert!((w - v).abs() < 1e-14);
        assert_eq!(
            pair_1d(f64::NEG_INFINITY, 0.0, 1.0, f64::INFINITY, 0.5),
            f64::INFINITY
        );
    }

    #[test]
    fn omega_values() {
        assert!((omega(0.0) - 1.0).abs() < 1e-14);
        assert!((omega(1.0) - 2.0).abs() < 1e-14);
        assert!((omega(2.0) - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn tail_bound_example() {
        let p = FracParams::new(1, 0.5).unwrap();
        assert!((tail_bound(1.0, 1.0, p).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(tail_bound(0.0, 1.0, p).unwrap(), 0.0);
        assert!(tail_bound(1.0, 0.0, p).is_err());
    }

    #[test]
    fn quadrature_route_matches_closed_form() {
        let tol = Tol::default();
        for s in [0.3, 0.5, 0.7, 0.95] {
            for (p, q) in [
                ((0.0, 1.0), (1.0, 2.0)),
                ((0.0, 1.0), (2.0, 3.0)),
                ((0.0, 1.0), (1.0, f64::INFINITY)),
            ] {
                let exact = pair_1d(p.0, p.1, q.0, q.1, s);
                let num = pair_1d_quad(p, q, s, tol);
                assert!(
                    (num.value - exact).abs() < 1e-9 * exact,
                    "s={s} {:?} {exact}",
                    num
                );
                let num = pair_1d_quad(q, p, s, tol);
                assert!((num.value - exact).abs() < 1e-9 * exact);
            }
        }
    }
}
