//! Quadrature rules and small numeric helpers shared across modules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Smooth bump exp(-beta / (1 - s^2)) on |s| < 1, zero outside.
pub fn bump(s: f64, beta: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-beta / (1.0 - s * s)).exp()
    }
}

/// Smooth step rising from 0 at s <= 0 to 1 at s >= 1.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Uniform midpoint nodes of [lo, hi] split into m cells.
pub fn midpoints(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let h = (hi - lo) / m as f64;
    (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Trapezoid nodes and weights on [lo, hi] with m >= 2 nodes.
pub fn trapezoid(lo: f64, hi: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let m = m.max(2);
    let h = (hi - lo) / (m - 1) as f64;
    let nodes = (0..m).map(|i| lo + i as f64 * h).collect();
    let weights = (0..m)
        .map(|i| if i == 0 || i == m - 1 { 0.5 * h } else { h })
        .collect();
    (nodes, weights)
}
