//! Deterministic reductions. Parallel maps collect in index order and are
//! summed with a fixed pairwise tree, so results do not depend on the number
//! of worker threads.

use rayon::prelude::*;

/// Pairwise (cascade) sum with a fixed tree shape.
pub fn pairwise(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut acc = 0.0;
        for x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

/// Evaluates `f(0..n)` in parallel and sums the results deterministically.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let vals: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    pairwise(&vals)
}

/// Like [`par_sum`] for a pair of accumulators (value, error).
pub fn par_sum2<F>(n: usize, f: F) -> (f64, f64)
where
    F: Fn(usize) -> (f64, f64) + Sync + Send,
{
    let vals: Vec<(f64, f64)> = (0..n).into_par_iter().map(f).collect();
    let a: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let b: Vec<f64> = vals.iter().map(|v| v.1).collect();
    (pairwise(&a), pairwise(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_small_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise(&xs), 499500.0);
    }

    #[test]
    fn parallel_sum_is_reproducible() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = par_sum(10_000, f);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| par_sum(10_000, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
