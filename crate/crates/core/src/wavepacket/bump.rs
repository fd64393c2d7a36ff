use std::f64::consts::TAU;

use serde::Serialize;

use crate::quad::gauss_legendre;

const NODES: usize = 160;

/// η₀(x) = Π_j η₁(x_j) with η₁ = |g|²/‖ĝ‖², where ĝ(u) = exp(−β/(1−(u/a)²))
/// on |u| < a = 1/(2√n). Transforms use the convention
/// η̂(k) = ∫ η(y) e^{−2πiky} dy, so η̂₀ lives in the cube |k_j| ≤ 2a, inside
/// the unit ball, and ∫η₀ = η̂₀(0) = 1.
#[derive(Clone, Debug, Serialize)]
pub struct BumpProfile {
    pub dim: usize,
    pub half_width: f64,
    pub beta: f64,
    norm: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

impl BumpProfile {
    pub fn new(dim: usize, beta: f64) -> Self {
        let a = 0.5 / (dim as f64).sqrt();
        let (x, w) = gauss_legendre(NODES);
        let nodes: Vec<f64> = x.iter().map(|x| a * x).collect();
        let weights: Vec<f64> = w.iter().map(|w| a * w).collect();
        let mut p = BumpProfile { dim, half_width: a, beta, norm: 1.0, nodes, weights };
        p.norm = p.nodes.iter().zip(&p.weights).map(|(u, w)| w * p.ghat(*u).powi(2)).sum();
        p
    }

    pub fn ghat(&self, u: f64) -> f64 {
        let s = u / self.half_width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (-self.beta / (1.0 - s * s)).exp()
        }
    }

    /// Support radius of η̂₁.
    pub fn spectral_radius(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn eta_1d(&self, y: f64) -> f64 {
        let g: f64 = self.nodes.iter().zip(&self.weights).map(|(u, w)| w * self.ghat(*u) * (TAU * u * y).cos()).sum();
        g * g / self.norm
    }

    /// η̂₁(k) as the autocorrelation of ĝ divided by ‖ĝ‖².
    pub fn eta_hat_1d(&self, k: f64) -> f64 {
        let a = self.half_width;
        let k = k.abs();
        if k >= 2.0 * a {
            return 0.0;
        }
        let lo = k - a;
        let hi = a;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                let u = mid + half * x / a;
                w / a * self.ghat(u) * self.ghat(u - k)
            })
            .sum();
        s * half / self.norm
    }

    pub fn eta(&self, x: &[f64]) -> f64 {
        x.iter().map(|&y| self.eta_1d(y)).product()
    }

    pub fn eta_hat(&self, k: &[f64]) -> f64 {
        k.iter().map(|&y| self.eta_hat_1d(y)).product()
    }
}
