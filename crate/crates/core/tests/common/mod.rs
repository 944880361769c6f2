#![allow(dead_code)]

use nlperim::geometry::{AnalyticShape, GridSet, Rect, Vec2};
use nlperim::kernel::{FracParams, QuadratureSpec};
use nlperim::minimizer::{strip_problem, MinimizationProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FRAME: usize = 24;

/// Exterior data families for the random corpus.
#[derive(Debug, Clone, Copy)]
pub enum Data {
    HalfPlane,
    Disk,
    Wedge,
    Noise,
}

/// Random problem with at most 16 free cells near the middle of a
/// `FRAME x FRAME` grid on the unit square.
pub fn random_problem(seed: u64) -> (MinimizationProblem, Data) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed);
    let h = 1.0 / FRAME as f64;
    let s = [0.3, 0.5, 0.7][rng.random_range(0..3)];
    let (fw, fh) = [(4, 4), (3, 5), (5, 3), (2, 8), (3, 4), (4, 3)][rng.random_range(0..6)];
    let i0 = FRAME / 2 - fw / 2 + rng.random_range(0..2);
    let j0 = FRAME / 2 - fh / 2 + rng.random_range(0..2);
    let mut mask = vec![false; FRAME * FRAME];
    for j in j0..j0 + fh {
        for i in i0..i0 + fw {
            mask[j * FRAME + i] = true;
        }
    }
    let c = Vec2::new(
        (i0 as f64 + fw as f64 / 2.0) * h,
        (j0 as f64 + fh as f64 / 2.0) * h,
    );
    let kind = [Data::HalfPlane, Data::Disk, Data::Wedge, Data::Noise][(seed % 4) as usize];
    let jitter = |rng: &mut ChaCha8Rng| {
        Vec2::new(
            rng.random_range(-2.0..2.0) * h,
            rng.random_range(-2.0..2.0) * h,
        )
    };
    let (inside, tail): (Box<dyn Fn(Vec2) -> bool>, Option<AnalyticShape>) = match kind {
        Data::HalfPlane => {
            let n = Vec2::polar(rng.random_range(0.0..std::f64::consts::TAU));
            let hs = AnalyticShape::half_space(n, (c + jitter(&mut rng)).dot(n)).unwrap();
            let t = hs.clone();
            (Box::new(move |p| t.contains(p)), Some(hs))
        }
        Data::Disk => {
            let r = rng.random_range(8.0..12.0) * h;
            let ctr = c + Vec2::polar(rng.random_range(0.0..std::f64::consts::TAU))
                * (rng.random_range(0.5..1.0) * r);
            (Box::new(move |p: Vec2| p.dist(ctr) < r), None)
        }
        Data::Wedge => {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let open = rng.random_range(0.6..2.4);
            let apex = c + jitter(&mut rng);
            let (n1, n2) = (Vec2::polar(a), Vec2::polar(a + std::f64::consts::PI - open));
            (
                Box::new(move |p: Vec2| (p - apex).dot(n1) < 0.0 && (p - apex).dot(n2) < 0.0),
                None,
            )
        }
        Data::Noise => {
            let bits: Vec<bool> = (0..FRAME * FRAME).map(|_| rng.random_bool(0.5)).collect();
            let near = move |p: Vec2| (p - c).x.abs() < 6.0 * h && (p - c).y.abs() < 6.0 * h;
            (
                Box::new(move |p: Vec2| {
                    let (i, j) = ((p.x / h) as usize, (p.y / h) as usize);
                    near(p) && bits[j * FRAME + i]
                }),
                None,
            )
        }
    };
    let mut ext = GridSet::new(FRAME, FRAME, Vec2::default(), h).unwrap();
    for j in 0..FRAME {
        for i in 0..FRAME {
            if !mask[j * FRAME + i] && inside(ext.center(i, j)) {
                ext.set(i, j, true);
            }
        }
    }
    let p = MinimizationProblem::new(
        mask,
        ext,
        tail,
        FracParams::new(2, s).unwrap(),
        QuadratureSpec::default(),
    )
    .unwrap();
    (p, kind)
}

/// Strip exterior problem with an 8x8 free block on a 24x24 grid.
pub fn random_strip(seed: u64) -> (MinimizationProblem, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5719_0000 + seed);
    let h = 1.0 / FRAME as f64;
    let s = [0.3, 0.5, 0.7][rng.random_range(0..3)];
    let a = (rng.random_range(9..12) as f64) * h;
    let b = a + (rng.random_range(1..5) as f64) * h;
    let free = Rect::new(Vec2::new(8.0 * h, 8.0 * h), Vec2::new(16.0 * h, 16.0 * h));
    let bits: Vec<bool> = (0..FRAME * FRAME).map(|_| rng.random_bool(0.5)).collect();
    let fill = move |p: Vec2| bits[((p.y / h) as usize) * FRAME + (p.x / h) as usize];
    let p = strip_problem(
        (FRAME, FRAME, Vec2::default(), h),
        &free,
        a,
        b,
        fill,
        FracParams::new(2, s).unwrap(),
        QuadratureSpec::default(),
    )
    .unwrap();
    (p, a, b)
}
