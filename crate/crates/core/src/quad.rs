//! One-dimensional quadrature rules shared by the 2D routines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate::new(self.value + o.value, self.error + o.error)
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate::new(self.value - o.value, self.error + o.error)
    }
}

impl std::ops::Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, k: f64) -> Estimate {
        Estimate::new(self.value * k, self.error * k.abs())
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const MAX_CACHED_RULE: usize = 128;

fn compute_gauss(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        // one more derivative evaluation at the converged node
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        if n > 1 {
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Cached Gauss-Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static CACHE: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=MAX_CACHED_RULE)
            .map(|k| compute_gauss(k.max(1)))
            .collect()
    });
    assert!(
        (1..=MAX_CACHED_RULE).contains(&n),
        "Gauss rule size {n} out of range"
    );
    &cache[n]
}

/// Fixed Gauss-Legendre integral over [a, b].
pub fn gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: (kronrod value, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Tolerances for adaptive routines.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-10,
            max_panels: 2000,
        }
    }
}

impl Tol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }

    fn met(&self, value: f64, err: f64) -> bool {
        err <= self.abs.max(self.rel * value.abs())
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss-Kronrod integration over consecutive breakpoints.
pub fn adaptive_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tol) -> Estimate {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            total += v;
            total_err += e;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value: v,
                err: e,
            });
        }
    }
    let mut panels = heap.len();
    while !tol.met(total, total_err) && panels < tol.max_panels {
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        heap.push(Panel {
            a: p.a,
            b: m,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            err: e2,
        });
        panels += 1;
    }
    // recompute sums from scratch to shed accumulated rounding
    let mut parts: Vec<Panel> = heap.into_vec();
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = crate::reduce::pairwise(&parts.iter().map(|p| p.value).collect::<Vec<_>>());
    let err = parts.iter().map(|p| p.err).sum::<f64>();
    Estimate::new(value, err)
}

/// Globally adaptive Gauss-Kronrod integration over [a, b].
pub fn adaptive<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> Estimate {
    adaptive_breaks(f, &[a, b], tol)
}

/// Tanh-sinh integration over [a, b]. The integrand receives
/// `(x, x - a, b - x)` with the two distances computed without cancellation,
/// so endpoint singularities can be evaluated accurately.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tol) -> Estimate {
    if b <= a {
        return Estimate::default();
    }

    let half = 0.5 * (b - a);
    let tmax = 4.0_f64;
    let mut eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        // 1 - tanh(u) for u >= 0 without cancellation
        let comp = (-u.abs()).exp() / cu;
        let (da, db) = if u >= 0.0 {
            (half * (2.0 - comp), half * comp)
        } else {
            (half * comp, half * (2.0 - comp))
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 { b - db } else { a + da };
        let v = f(x, da, db);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h * half;
    let mut err = f64::INFINITY;
    for _level in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h * half;
        err = (cur - prev).abs();
        prev = cur;
        if tol.met(cur, err) && _level >= 2 {
            // convergence of tanh-sinh is roughly quadratic in the level
            err = err * err / (prev.abs() + tol.abs).max(f64::MIN_POSITIVE);
            err = err.max(1e-16 * prev.abs());
            break;
        }
    }
    Estimate::new(prev, err)
}

/// Integral of `(x - a)^(-alpha) g(x)` over [a, b] for `alpha < 1` with `g` regular.
///
/// Uses `x = a + (b - a) v^(1/(1-alpha))`, after which the integrand in `v` is
/// bounded; `g` receives `(x, x - a)`.
pub fn power_left<G: FnMut(f64, f64) -> f64>(
    mut g: G,
    a: f64,
    b: f64,
    alpha: f64,
    tol: Tol,
) -> Estimate {
    if b <= a {
        return Estimate::default();
    }
    let len = b - a;
    let beta = 1.0 - alpha;
    let scale = len.powf(beta) / beta;
    let p = 1.0 / beta;
    let r = tanh_sinh(
        |_v, dv0, dv1| {
            let v = if dv0 < 0.5 { dv0 } else { 1.0 - dv1 };
            // for large p, v^p underflows over much of [0, 1]
            let dx = (len * v.powf(p)).max(f64::MIN_POSITIVE);
            g(a + dx, dx)
        },
        0.0,
        1.0,
        tol,
    );
    r * scale
}

/// Integral of `(b - x)^(-alpha) g(x)` over [a, b]; `g` receives `(x, b - x)`.
pub fn power_right<G: FnMut(f64, f64) -> f64>(
    mut g: G,
    a: f64,
    b: f64,
    alpha: f64,
    tol: Tol,
) -> Estimate {
    power_left(|_x, d| g(b - d, d), a, b, alpha, tol)
}
