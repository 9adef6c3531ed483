//! Quadrature helpers: Gauss-Legendre rules and a small adaptive integrator.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on (-1, 1), by Newton iteration on
/// P_n. Results are cached per order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    #[allow(clippy::type_complexity)]
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let computed = gauss_legendre_uncached(n);
    cache.lock().unwrap().insert(n, computed.clone());
    computed
}

fn gauss_legendre_uncached(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order Gauss-Legendre on [a, b].
pub fn integrate_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    for i in 0..n {
        sum += weights[i] * f(c + h * nodes[i]);
    }
    sum * h
}

/// Composite Gauss-Legendre with panels no wider than `max_panel`.
pub fn integrate_gl_composite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    n_per_panel: usize,
    max_panel: f64,
) -> f64 {
    let width = b - a;
    let panels = ((width / max_panel).ceil() as usize).max(1);
    let h = width / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        sum += integrate_gl(f, a + p as f64 * h, a + (p + 1) as f64 * h, n_per_panel);
    }
    sum
}

/// Adaptive bisection built on nested Gauss rules; tolerance is relative to
/// the accumulated magnitude. Suitable for integrands with integrable
/// endpoint or interior singularities.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let scale = integrate_gl(f, a, b, 15).abs().max(1e-300);
    let mut total = 0.0;
    adaptive_rec(f, a, b, rel_tol * scale, 0, &mut total);
    total
}

fn adaptive_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, depth: u32, acc: &mut f64) {
    let coarse = integrate_gl(f, a, b, 10);
    let mid = 0.5 * (a + b);
    let fine = integrate_gl(f, a, mid, 10) + integrate_gl(f, mid, b, 10);
    if (fine - coarse).abs() <= abs_tol || depth >= 48 {
        *acc += fine;
    } else {
        adaptive_rec(f, a, mid, abs_tol / 2.0, depth + 1, acc);
        adaptive_rec(f, mid, b, abs_tol / 2.0, depth + 1, acc);
    }
}
