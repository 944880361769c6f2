use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite union of disjoint open intervals, sorted. Endpoints may be
/// infinite, which is how complements carry their two half-lines.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

/// Builds an interval set, merging overlapping or touching pieces.
pub fn make_interval_set(raw: &[(f64, f64)]) -> Result<IntervalSet> {
    for &(l, r) in raw {
        if l.is_nan() || r.is_nan() || l >= r {
            return Err(Error::NonPositiveInterval { left: l, right: r });
        }
    }
    let mut v = raw.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (l, r) in v {
        match out.last_mut() {
            Some(last) if l <= last.1 => last.1 = last.1.max(r),
            _ => out.push((l, r)),
        }
    }
    Ok(IntervalSet { intervals: out })
}

/// Union of `(a^(2k+1), a^(2k))` for `k = 1..=K`.
pub fn counterexample_set(a: f64, k: usize) -> Result<IntervalSet> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("a = {a} must lie in (0, 1)")));
    }
    if k == 0 {
        return Err(Error::Domain(
            "generation count K must be at least 1".into(),
        ));
    }
    let raw: Vec<(f64, f64)> = (1..=k)
        .map(|j| (a.powi(2 * j as i32 + 1), a.powi(2 * j as i32)))
        .filter(|(l, r)| l < r)
        .collect();
    make_interval_set(&raw)
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Single interval `(a, b)`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        make_interval_set(&[(a, b)])
    }

    /// The whole real line.
    pub fn full() -> Self {
        IntervalSet {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|(l, r)| l.is_finite() && r.is_finite())
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(l, r)| r - l).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(l, r)| l < x && x < r)
    }

    /// Finite endpoints, i.e. the jump points of the indicator.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|&(l, r)| [l, r])
            .filter(|x| x.is_finite())
            .collect()
    }

    /// Complement in the real line (up to the finitely many endpoints).
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cur = f64::NEG_INFINITY;
        for &(l, r) in &self.intervals {
            if l > cur {
                out.push((cur, l));
            }
            cur = r;
        }
        if cur < f64::INFINITY {
            out.push((cur, f64::INFINITY));
        }
        IntervalSet { intervals: out }
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a0, a1) = self.intervals[i];
            let (b0, b1) = other.intervals[j];
            let l = a0.max(b0);
            let r = a1.min(b1);
            if l < r {
                out.push((l, r));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        make_interval_set(&raw).expect("pieces of valid sets are valid")
    }

    pub fn translated(&self, t: f64) -> IntervalSet {
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .map(|&(l, r)| (l + t, r + t))
                .collect(),
        }
    }

    /// Scaling by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> IntervalSet {
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .map(|&(l, r)| (l * lambda, r * lambda))
                .collect(),
        }
    }

    /// Measure of the intersection with `other`.
    pub fn overlap(&self, other: &IntervalSet) -> f64 {
        self.intersect(other).measure()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_sort() {
        let s = make_interval_set(&[(0.0, 1.0), (0.5, 2.0)]).unwrap();
        assert_eq!(s.intervals(), &[(0.0, 2.0)]);
        let s = make_interval_set(&[(1.0, 2.0), (0.0, 0.5)]).unwrap();
        assert_eq!(s.intervals(), &[(0.0, 0.5), (1.0, 2.0)]);
        let s = make_interval_set(&[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(s.intervals(), &[(0.0, 2.0)]);
        assert!(matches!(
            make_interval_set(&[(1.0, 1.0)]),
            Err(Error::NonPositiveInterval { .. })
        ));
    }

    #[test]
    fn counterexample_generations() {
        let s = counterexample_set(0.5, 1).unwrap();
        assert_eq!(s.intervals(), &[(0.125, 0.25)]);
        let s = counterexample_set(0.5, 2).unwrap();
        assert_eq!(s.intervals(), &[(1.0 / 32.0, 1.0 / 16.0), (0.125, 0.25)]);
        assert!(counterexample_set(0.5, 0).is_err());
        assert!(counterexample_set(1.0, 3).is_err());
    }

    #[test]
    fn complement_has_half_lines() {
        let s = make_interval_set(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let c = s.complement();
        assert_eq!(
            c.intervals(),
            &[(f64::NEG_INFINITY, 0.0), (1.0, 2.0), (3.0, f64::INFINITY)]
        );
        assert_eq!(c.complement(), s);
        assert_eq!(IntervalSet::empty().complement(), IntervalSet::full());
    }

    #[test]
    fn set_algebra() {
        let a = make_interval_set(&[(0.0, 2.0)]).unwrap();
        let b = make_interval_set(&[(1.0, 3.0), (4.0, 5.0)]).unwrap();
        assert_eq!(a.intersect(&b).intervals(), &[(1.0, 2.0)]);
        assert_eq!(a.difference(&b).intervals(), &[(0.0, 1.0)]);
        assert_eq!(a.union(&b).measure(), 4.0);
    }
}
