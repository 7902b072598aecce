//! Gauss-Legendre quadrature building blocks.
//!
//! The covariance oracles integrate products of Bessel functions that
//! oscillate on the scale of half a wavelength `1 / (2 sqrt(E))`; panels are
//! therefore sized to the oscillation and refined by doubling until two
//! successive estimates agree. Node sets are computed once per order by
//! Newton iteration on the Legendre recurrence and cached globally.

use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_rule(n: usize) -> GaussRule {
    assert!(n >= 1);
    if n == 1 {
        return GaussRule { nodes: vec![0.0], weights: vec![2.0] };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..half + (n % 2) {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // cos of a decreasing angle: i = 0 is the largest root.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[half] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[half] = 2.0 / (d * d);
    }
    GaussRule { nodes, weights }
}

/// Cached Gauss-Legendre rule of order `n`.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` with `panels`
/// equal panels of order `g`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, g: usize, mut f: F) -> f64 {
    let rule = gauss_rule(g);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * f(mid + 0.5 * h * x);
        }
        total += acc;
    }
    total * 0.5 * h
}

/// Adaptive 1-D integral for oscillatory integrands. `initial_panels` should
/// resolve the half-wavelength scale; panel count doubles until successive
/// estimates differ by less than `target` (absolute), up to `max_rounds`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    initial_panels: usize,
    g: usize,
    target: f64,
    max_rounds: usize,
    context: &str,
    f: F,
) -> Result<(f64, f64)> {
    let mut panels = initial_panels.max(1);
    let mut prev = integrate_panels(a, b, panels, g, &f);
    for _ in 0..max_rounds {
        panels *= 2;
        let next = integrate_panels(a, b, panels, g, &f);
        let diff = (next - prev).abs();
        if diff <= target {
            return Ok((next, diff));
        }
        prev = next;
    }
    let next = integrate_panels(a, b, panels * 2, g, &f);
    let achieved = (next - prev).abs();
    if achieved <= target {
        return Ok((next, achieved));
    }
    Err(Error::Accuracy { context: context.to_string(), achieved, target })
}

/// Tensor-product panel integral of `f(x, y)` over a rectangle.
pub fn integrate_tensor<F: FnMut(f64, f64) -> f64>(
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    (px, py): (usize, usize),
    g: usize,
    mut f: F,
) -> f64 {
    let rule = gauss_rule(g);
    let hx = (bx - ax) / px as f64;
    let hy = (by - ay) / py as f64;
    let mut total = 0.0;
    for i in 0..px {
        let mx = ax + (i as f64 + 0.5) * hx;
        for j in 0..py {
            let my = ay + (j as f64 + 0.5) * hy;
            let mut acc = 0.0;
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let x = mx + 0.5 * hx * u;
                let mut row = 0.0;
                for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
                    row += wv * f(x, my + 0.5 * hy * v);
                }
                acc += wu * row;
            }
            total += acc;
        }
    }
    total * 0.25 * hx * hy
}

/// Adaptive version of [`integrate_tensor`] with panel doubling on both axes.
pub fn integrate_tensor_adaptive<F: Fn(f64, f64) -> f64>(
    x_range: (f64, f64),
    y_range: (f64, f64),
    initial: (usize, usize),
    g: usize,
    target: f64,
    max_rounds: usize,
    context: &str,
    f: F,
) -> Result<(f64, f64)> {
    let (mut px, mut py) = (initial.0.max(1), initial.1.max(1));
    let mut prev = integrate_tensor(x_range, y_range, (px, py), g, &f);
    for _ in 0..max_rounds {
        px *= 2;
        py *= 2;
        let next = integrate_tensor(x_range, y_range, (px, py), g, &f);
        let diff = (next - prev).abs();
        if diff <= target {
            return Ok((next, diff));
        }
        prev = next;
    }
    Err(Error::Accuracy {
        context: context.to_string(),
        achieved: (integrate_tensor(x_range, y_range, (px * 2, py * 2), g, &f) - prev).abs(),
        target,
    })
}

/// Prefix table of `int_0^x f` on panels of fixed width, for integrands
/// queried at many increasing upper limits. Queries cost one partial panel.
pub struct CumulativeIntegral<F: Fn(f64) -> f64> {
    f: F,
    panel: f64,
    g: usize,
    prefix: Vec<f64>,
}

impl<F: Fn(f64) -> f64> CumulativeIntegral<F> {
    pub fn new(f: F, x_max: f64, panel: f64, g: usize) -> Self {
        let n = (x_max / panel).ceil() as usize + 1;
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            acc += integrate_panels(k as f64 * panel, (k + 1) as f64 * panel, 1, g, &f);
            prefix.push(acc);
        }
        CumulativeIntegral { f, panel, g, prefix }
    }

    pub fn query(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        let k = ((x / self.panel) as usize).min(self.prefix.len() - 2);
        let base = k as f64 * self.panel;
        self.prefix[k] + integrate_panels(base, x, 1, self.g, &self.f)
    }
}
