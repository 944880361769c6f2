//! The fifteen acceptance criteria, each reported on its own line.

mod common;

use std::f64::consts::PI;
use std::io::Write;

use nlperim::curvature::{
    first_variation_check, fmc_graph_local, fmc_pv, fmc_pv_cylinder, fmc_pv_quadrature,
};
use nlperim::extension::{frac_laplacian_direct, frac_laplacian_fourier, phi_trace, Samples};
use nlperim::fractal::{
    box_count, dim_f_from_scan, dim_f_scan, dimension_fit, koch_series_bound, koch_threshold,
    Boundary,
};
use nlperim::geometry::{
    counterexample_set, koch_snowflake, AnalyticShape, IntervalSet, PlanarSet, Vec2,
};
use nlperim::kernel::{
    interaction_1d_closed, interaction_quad, omega, FracParams, QuadratureSpec, Region,
};
use nlperim::minimizer::{
    brute_force_minimize, density_report, local_search_minimize, strip_comparison_test,
    variational_check, Schedule,
};
use nlperim::perimeter::{s_perimeter_global_1d, s_perimeter_global_2d};

type Outcome = (bool, String);

fn p2(s: f64) -> FracParams {
    FracParams::new(2, s).unwrap()
}

fn interval(a: f64, b: f64) -> IntervalSet {
    IntervalSet::interval(a, b).unwrap()
}

fn c1_one_dimensional() -> Outcome {
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for s in [0.3, 0.5, 0.7] {
        for (c, d) in [(1.0, 2.0), (2.0, 3.0)] {
            let est = interaction_quad(
                &Region::Line(interval(0.0, 1.0)),
                &Region::Line(interval(c, d)),
                FracParams::new(1, s).unwrap(),
                &q,
            )
            .unwrap();
            let exact = interaction_1d_closed(0.0, 1.0, c, d, s).unwrap();
            worst = worst.max((est.value / exact - 1.0).abs());
        }
    }
    (worst <= 1e-6, format!("worst relative gap {worst:.2e}"))
}

fn c2_asymptotic_constant() -> Outcome {
    let s = 0.999;
    let scaled = (1.0 - s) * s_perimeter_global_1d(&interval(0.0, 1.0), s).unwrap();
    let closed = 2.0 / s;
    let to_closed = (scaled - closed).abs();
    // omega_0 times the two endpoints
    let to_target = (scaled / (omega(0.0) * 2.0) - 1.0).abs();
    (
        to_closed <= 1e-9 && to_target <= 2e-3,
        format!(
            "(1-s)P_s = {scaled:.7}, |.-2/s| = {to_closed:.1e}, relative to 2: {to_target:.2e}"
        ),
    )
}

fn c3_counterexample() -> Outcome {
    let e = counterexample_set(0.5, 40).unwrap();
    let at = |s: f64| (1.0 - s) * s_perimeter_global_1d(&e, s).unwrap();
    let (lo, hi) = (at(0.9), at(0.999));
    (
        hi >= 5.0 * lo,
        format!(
            "(1-s)P_s: {lo:.4} at 0.9, {hi:.4} at 0.999, factor {:.3}",
            hi / lo
        ),
    )
}

fn c4_scaling() -> Outcome {
    let (s, lam) = (0.5, 2.0);
    let e = interval(-0.3, 0.9).union(&interval(1.4, 2.0));
    let p1 = s_perimeter_global_1d(&e, s).unwrap();
    let pl = s_perimeter_global_1d(&e.scaled(lam), s).unwrap();
    let gap1 = (pl / (lam.powf(1.0 - s) * p1) - 1.0).abs();
    let q = QuadratureSpec::default();
    let tri = AnalyticShape::polygon(vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.2),
        Vec2::new(0.3, 0.8),
    ])
    .unwrap();
    let disk = AnalyticShape::ball(Vec2::new(0.2, -0.1), 0.7).unwrap();
    let mut ok = gap1 <= 1e-12;
    let mut detail = format!("1D relative gap {gap1:.1e}");
    for sh in [tri, disk] {
        let a = s_perimeter_global_2d(&PlanarSet::Shape(sh.clone()), s, &q).unwrap();
        let b = s_perimeter_global_2d(&PlanarSet::Shape(sh.scaled(lam)), s, &q).unwrap();
        let f = lam.powf(2.0 - s);
        let gap = (b.value - f * a.value).abs();
        let bound = 3.0 * (b.error + f * a.error);
        ok &= gap <= bound;
        detail += &format!(", 2D gap {gap:.1e} vs 3 err {bound:.1e}");
    }
    (ok, detail)
}

fn c5_half_space() -> Outcome {
    let q = QuadratureSpec::default();
    let hs = AnalyticShape::half_space(Vec2::new(0.6, 0.8), 0.25).unwrap();
    let x = Vec2::new(0.6, 0.8) * 0.25 + Vec2::new(-0.8, 0.6) * 0.4;
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for s in [0.3, 0.5, 0.7] {
        let a = fmc_pv(&hs, x, p2(s), &q).unwrap();
        let g = fmc_pv_quadrature(&hs, x, p2(s), &q).unwrap();
        ok &= a.value.abs() <= 1e-6 && g.value.abs() <= g.error.max(1e-12);
        worst = (
            worst.0.max(a.value.abs()),
            worst.1.max(g.value.abs() / g.error.max(1e-300)),
        );
    }
    (
        ok,
        format!(
            "analytic |I| <= {:.1e}, generic |I| / error <= {:.2}",
            worst.0, worst.1
        ),
    )
}

fn c6_ball_asymptotics() -> Outcome {
    let s = 0.99;
    let b = AnalyticShape::ball(Vec2::default(), 1.0).unwrap();
    let i = fmc_pv(&b, Vec2::new(0.0, 1.0), p2(s), &QuadratureSpec::default()).unwrap();
    let scaled = (1.0 - s) * i.value.abs();
    let target = omega(1.0);
    let rel = (scaled / target - 1.0).abs();
    (
        rel <= 0.05,
        format!("(1-s)|I| = {scaled:.5}, target {target}, relative gap {rel:.3}"),
    )
}

fn c7_first_variation() -> Outcome {
    let s = 0.5;
    let q = QuadratureSpec::default();
    let b = AnalyticShape::ball(Vec2::default(), 1.0).unwrap();
    let p = s_perimeter_global_2d(&PlanarSet::Shape(b.clone()), s, &q)
        .unwrap()
        .value;
    let i = fmc_pv(&b, Vec2::new(1.0, 0.0), p2(s), &q).unwrap().value;
    let lhs = (2.0 - s) * p;
    let rel = (lhs + 2.0 * PI * i).abs() / lhs;
    // the same identity through deformed perimeters
    let fv = first_variation_check(&b, &|x| x, s, &[0.02, 0.01], &q).unwrap();
    let rel_fv = fv.gap / fv.rhs.abs();
    (rel <= 0.01 && rel_fv <= 0.01, format!("(2-s)P_s = {lhs:.5}, -2 pi I = {:.5}, relative gap {rel:.1e}; deformation route gap {rel_fv:.1e}", -2.0 * PI * i))
}

fn c8_graph_formula() -> Outcome {
    let s = 0.5;
    let u = AnalyticShape::subgraph_from_fn(1.0, 2001, |y| 0.05 * y * y).unwrap();
    let local = fmc_graph_local(&u, p2(s)).unwrap();
    let cyl = fmc_pv_cylinder(
        &u,
        Vec2::new(0.0, 0.0),
        1.0,
        p2(s),
        &QuadratureSpec::default(),
    )
    .unwrap();
    let rel = (local / cyl.value - 1.0).abs();
    (
        rel <= 0.01,
        format!(
            "graph formula {local:.6}, cylinder PV {:.6}, relative gap {rel:.1e}",
            cyl.value
        ),
    )
}

struct Corpus {
    matched: usize,
    single: usize,
    violations: usize,
    density_ok: bool,
    density_detail: String,
}

fn minimizer_corpus() -> Corpus {
    let seeds: Vec<u64> = (0..8).collect();
    let (mut matched, mut single, mut violations) = (0, 0, 0);
    let (mut density_ok, mut checked, mut skipped) = (true, 0, 0);
    let (mut worst_ratio, mut worst_spread) = (f64::INFINITY, 0.0f64);
    for k in 0..50 {
        let (prob, _) = common::random_problem(k);
        assert!(prob.free_count() <= 16);
        let brute = brute_force_minimize(&prob).unwrap();
        let scale = prob.model().unwrap().scale;
        let runs: Vec<f64> = seeds
            .iter()
            .map(|&sd| {
                local_search_minimize(&prob, Schedule::default(), sd)
                    .unwrap()
                    .energy
            })
            .collect();
        let best = runs.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * scale;
        if best <= brute.energy + tol {
            matched += 1;
        }
        if runs[0] <= brute.energy + tol {
            single += 1;
        }
        let v = variational_check(&prob, &brute.configuration).unwrap();
        violations += v.sub_violations + v.super_violations;
        let h = 1.0 / common::FRAME as f64;
        match density_report(&prob, &brute.configuration, &[3.0 * h, 5.0 * h, 8.0 * h]) {
            Ok(d) => {
                checked += 1;
                worst_ratio = worst_ratio.min(d.min_ratio());
                worst_spread = worst_spread.max(d.spread());
                density_ok &= d.min_ratio() >= 0.1 * omega(2.0) && d.spread() <= 2.0;
            }
            Err(nlperim::Error::NoInteriorBalls) => skipped += 1,
            Err(e) => panic!("{e}"),
        }
    }
    Corpus {
        matched,
        single,
        violations,
        density_ok: density_ok && checked > 0,
        density_detail: format!("{checked} minimizers checked, {skipped} without admissible balls, min ratio {:.3} omega_2, worst spread {worst_spread:.2}", worst_ratio / omega(2.0)),
    }
}

fn c11_strips() -> Outcome {
    let seeds: Vec<u64> = (0..8).collect();
    let mut held = 0;
    for k in 0..20 {
        let (prob, a, b) = common::random_strip(k);
        if strip_comparison_test(&prob, a, b, &seeds).unwrap() {
            held += 1;
        }
    }
    (held == 20, format!("{held}/20 minimizers inside the strip"))
}

fn c12_monotonicity() -> Outcome {
    let q = QuadratureSpec::default();
    let params = p2(0.5);
    let hp = PlanarSet::Shape(AnalyticShape::half_space(Vec2::new(0.0, 1.0), 0.0).unwrap());
    let r = [0.25, 0.5, 0.75, 1.0];
    let t = phi_trace(&hp, &r, params, &q).unwrap();
    let spread = t.spread();
    let r2: Vec<f64> = r.iter().map(|x| 2.0 * x).collect();
    let t2 = phi_trace(&hp.scaled(2.0), &r2, params, &q).unwrap();
    let scale_gap = t
        .rows
        .iter()
        .zip(&t2.rows)
        .map(|(a, b)| (a.phi - b.phi).abs() / a.phi)
        .fold(0.0, f64::max);
    // a scale check that does not hinge on the half-plane being a cone
    let ball = PlanarSet::Shape(AnalyticShape::ball(Vec2::new(0.0, -1.0), 1.0).unwrap());
    let rb = [0.25, 0.5];
    let tb = phi_trace(&ball, &rb, params, &q).unwrap();
    let tb2 = phi_trace(&ball.scaled(2.0), &[0.5, 1.0], params, &q).unwrap();
    let ball_gap = tb
        .rows
        .iter()
        .zip(&tb2.rows)
        .map(|(a, b)| (a.phi - b.phi).abs() / a.phi)
        .fold(0.0, f64::max);
    let ok = spread <= 0.03 && scale_gap <= 2.0 * spread.max(f64::EPSILON) && ball_gap <= 0.06;
    (ok, format!("half-plane spread {spread:.1e}, scaled gap {scale_gap:.1e}; ball scaled gap {ball_gap:.1e}"))
}

fn c13_laplacian() -> Outcome {
    let q = QuadratureSpec::default();
    let u = Samples::from_fn(-12.0, 0.01, 2401, |x| (-x * x).exp());
    let mut worst = 0.0f64;
    for s in [0.3, 0.5, 0.7] {
        let d = frac_laplacian_direct(&u, 0.0, s, &q).unwrap();
        let f = frac_laplacian_fourier(&u, s, false).unwrap().values[1200];
        worst = worst.max((d / f - 1.0).abs());
    }
    (worst <= 1e-3, format!("worst relative gap {worst:.2e}"))
}

fn c14_koch() -> Outcome {
    let target = 4f64.ln() / 3f64.ln();
    let k7 = koch_snowflake(7, 1.0);
    let deltas: Vec<f64> = (1..=6).map(|k| 3f64.powi(-k)).collect();
    let fit = dimension_fit(&box_count(&Boundary::koch(&k7), &deltas).unwrap()).unwrap();
    let q = QuadratureSpec::default();
    let omega_set = Region::Plane(PlanarSet::Shape(
        AnalyticShape::ball(Vec2::default(), 2.0).unwrap(),
    ));
    let s_list: Vec<f64> = (0..7).map(|j| 0.71 + 0.01 * j as f64).collect();
    let rows = dim_f_scan(
        &Region::Plane(PlanarSet::Koch(koch_snowflake(5, 1.0))),
        &omega_set,
        &s_list,
        &q,
    )
    .unwrap();
    let est = dim_f_from_scan(&rows, 2).unwrap();
    let flip = 0.5 * (est.fit_range.0 + est.fit_range.1);
    let th = koch_threshold();
    let at = |s: f64| koch_series_bound(s, 4).unwrap().ratio;
    let crosses = (at(th) - 1.0).abs() <= 1e-12 && at(th - 1e-9) < 1.0 && at(th + 1e-9) > 1.0;
    let ok = (fit.value - target).abs() <= 0.05 && (flip - th).abs() <= 0.05 && crosses;
    (ok, format!("box fit {:.4}, flip at s = {flip:.3} (threshold {th:.4}), Dim_F {:.3}, series ratio at threshold {:.15}", fit.value, est.value, at(th)))
}

#[test]
fn acceptance_criteria() {
    let corpus = minimizer_corpus();
    let results: Vec<(&str, Outcome)> = vec![
        ("1D exactness", c1_one_dimensional()),
        ("asymptotic constant", c2_asymptotic_constant()),
        ("counterexample divergence", c3_counterexample()),
        ("scaling law", c4_scaling()),
        ("half-space curvature", c5_half_space()),
        ("ball curvature asymptotics", c6_ball_asymptotics()),
        ("first variation", c7_first_variation()),
        ("graph formula", c8_graph_formula()),
        (
            "minimizer oracle",
            (
                corpus.matched == 50 && corpus.single >= 46,
                format!(
                    "best of seeds {}/50, single seed {}/50",
                    corpus.matched, corpus.single
                ),
            ),
        ),
        (
            "variational characterization",
            (
                corpus.violations == 0,
                format!("{} violations", corpus.violations),
            ),
        ),
        ("strip comparison", c11_strips()),
        ("monotonicity formula", c12_monotonicity()),
        ("fractional Laplacian duality", c13_laplacian()),
        ("Koch dimension", c14_koch()),
        (
            "density estimates",
            (corpus.density_ok, corpus.density_detail.clone()),
        ),
    ];
    let mut err = std::io::stderr().lock();
    let mut failed = Vec::new();
    for (k, (name, (ok, detail))) in results.iter().enumerate() {
        writeln!(
            err,
            "criterion {:>2} {:<30} {}  {detail}",
            k + 1,
            name,
            if *ok { "PASS" } else { "FAIL" }
        )
        .unwrap();
        if !ok {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
