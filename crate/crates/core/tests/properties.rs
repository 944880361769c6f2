mod common;

use nlperim::fractal::{box_count, dimension_fit, koch_series_bound, koch_threshold, Boundary};
use nlperim::geometry::{make_interval_set, IntervalSet, Vec2};
use nlperim::kernel::interval_interaction;
use nlperim::minimizer::{
    brute_force_minimize, energy, energy_delta_flip, free_cell_index, MinimizationProblem,
    MinimizerReport,
};
use nlperim::perimeter::s_perimeter_global_1d;
use proptest::prelude::*;

fn intervals() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((-5.0f64..5.0, 0.05f64..2.0), 1..5).prop_map(|v| {
        let raw: Vec<(f64, f64)> = v.into_iter().map(|(a, l)| (a, a + l)).collect();
        make_interval_set(&raw).unwrap()
    })
}

fn polyline() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..7)
        .prop_map(|v| v.into_iter().map(|(x, y)| Vec2::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn perimeter_scales_in_one_dimension(e in intervals(), lam in 0.2f64..5.0, s in 0.05f64..0.95) {
        let p = s_perimeter_global_1d(&e, s).unwrap();
        let q = s_perimeter_global_1d(&e.scaled(lam), s).unwrap();
        prop_assert!((q / (lam.powf(1.0 - s) * p) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interaction_is_symmetric_and_translation_invariant(e in intervals(), t in -3.0f64..3.0, s in 0.05f64..0.95) {
        let f = e.complement().intersect(&IntervalSet::interval(-20.0, 20.0).unwrap());
        let a = interval_interaction(&e, &f, s).unwrap();
        let b = interval_interaction(&f, &e, s).unwrap();
        let c = interval_interaction(&e.translated(t), &f.translated(t), s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        prop_assert!((a - c).abs() <= 1e-9 * a.abs());
    }

    #[test]
    fn box_counts_grow_as_boxes_shrink(line in polyline()) {
        let deltas: Vec<f64> = (1..=7).map(|k| 2f64.powi(-k)).collect();
        let t = box_count(&Boundary::Polylines(vec![line]), &deltas).unwrap();
        prop_assert!(t.rows.windows(2).all(|w| w[1].count >= w[0].count));
    }

    #[test]
    fn polylines_have_dimension_one(line in polyline()) {
        let len: f64 = line.windows(2).map(|w| w[0].dist(w[1])).sum();
        prop_assume!(len > 0.5);
        // a strand doubling back on itself separates into distinct boxes only
        // slowly, which steepens the slope over any finite range
        let sharp = line.windows(3).any(|w| (w[1] - w[0]).unit().dot((w[2] - w[1]).unit()) < -0.9);
        prop_assume!(!sharp);
        let deltas: Vec<f64> = (5..=10).map(|k| 3f64.powi(-k)).collect();
        let fit = dimension_fit(&box_count(&Boundary::Polylines(vec![line]), &deltas).unwrap()).unwrap();
        prop_assert!((fit.value - 1.0).abs() <= 0.05, "{fit:?}");
    }

    #[test]
    fn series_ratio_exceeds_one_past_the_threshold(s in 0.01f64..0.99) {
        prop_assume!((s - koch_threshold()).abs() > 1e-12);
        let r = koch_series_bound(s, 2).unwrap();
        prop_assert_eq!(r.ratio > 1.0, s > koch_threshold());
        prop_assert!(r.partial_sums.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn flip_delta_matches_energy_difference(seed in 0u64..200, bits in any::<u32>(), pick in any::<usize>()) {
        let (prob, _) = common::random_problem(seed);
        let n = prob.free_count();
        let config: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        let k = pick % n;
        let cell = free_cell_index(&prob, k).unwrap();
        let d = energy_delta_flip(&prob, &config, cell).unwrap();
        let mut flipped = config.clone();
        flipped[k] = !flipped[k];
        let direct = energy(&prob, &flipped).unwrap() - energy(&prob, &config).unwrap();
        let scale = prob.model().unwrap().scale;
        prop_assert!((d - direct).abs() <= 1e-10 * scale, "{d} vs {direct}");
    }

    #[test]
    fn brute_force_is_a_lower_bound(seed in 0u64..200, bits in any::<u32>()) {
        let (prob, _) = common::random_problem(seed);
        let n = prob.free_count();
        let config: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        let best = brute_force_minimize(&prob).unwrap();
        prop_assert!(best.energy <= energy(&prob, &config).unwrap() + 1e-12 * prob.model().unwrap().scale);
    }

    #[test]
    fn problems_and_reports_survive_json(seed in 0u64..200) {
        let (prob, _) = common::random_problem(seed);
        let back: MinimizationProblem = serde_json::from_str(&serde_json::to_string(&prob).unwrap()).unwrap();
        prop_assert_eq!(&back, &prob);
        let rep = brute_force_minimize(&prob).unwrap();
        let back: MinimizerReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        prop_assert_eq!(back, rep);
    }
}
