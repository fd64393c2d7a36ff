use rayon::prelude::*;
use serde::Serialize;

use crate::fit::log_log_slope;
use crate::geometry::SurfaceSpec;
use crate::quad::{midpoints, smooth_step};
use crate::{Error, Result};

/// Smooth window equal to 1 on the ball of radius (1 − rolloff)·radius and
/// vanishing outside the ball of radius `radius`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralWindow {
    pub center: Vec<f64>,
    pub radius: f64,
    pub rolloff: f64,
}

impl SpectralWindow {
    pub fn for_surface(s: &SurfaceSpec) -> Self {
        let d = s.domain();
        SpectralWindow { center: d.center().to_vec(), radius: d.radius(), rolloff: 0.1 }
    }

    pub fn value(&self, xi: &[f64]) -> f64 {
        let d = xi.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        smooth_step((self.radius - d) / (self.rolloff * self.radius))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelProbe {
    pub x: Vec<f64>,
    pub t: f64,
    pub distance: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub integral: f64,
    pub probes: Vec<KernelProbe>,
    /// −slope of log|K| against log|(x, t)| over the nonzero probes.
    pub exponent: f64,
}

fn tensor_points(center: &[f64], radius: f64, m: usize) -> (Vec<Vec<f64>>, f64) {
    let n = center.len();
    let axes: Vec<Vec<f64>> = center.iter().map(|c| midpoints(c - radius, c + radius, m)).collect();
    let h = 2.0 * radius / m as f64;
    let total = m.pow(n as u32);
    let pts = (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut p = vec![0.0; n];
            for a in (0..n).rev() {
                p[a] = axes[a][rem % m];
                rem /= m;
            }
            p
        })
        .collect();
    (pts, h.powi(n as i32))
}

/// |K(x, t)| for K = ∫ e^{−i(x·ξ + tφ₂(ξ))} η(ξ) dξ by midpoint quadrature on
/// a grid resolving both the window roll-off and the phase. Nonzero probes
/// with min_ξ |x + t∇φ₂(ξ)| < exclusion·|(x, t)| over supp η are rejected.
pub fn kernel_decay_probe(
    s2: &SurfaceSpec,
    eta: &SpectralWindow,
    probes: &[(Vec<f64>, f64)],
    exclusion: f64,
) -> Result<KernelReport> {
    let op = "energy::kernel_decay_probe";
    let n = s2.dim();
    if eta.center.len() != n || probes.iter().any(|(x, _)| x.len() != n) {
        return Err(Error::Input { op, detail: "dimension mismatch".into() });
    }
    let (support, _) = tensor_points(&eta.center, eta.radius, 48);
    let support: Vec<Vec<f64>> = support.into_iter().filter(|p| eta.value(p) > 0.0).collect();
    let grads: Vec<Vec<f64>> = support
        .iter()
        .map(|p| {
            let mut g = vec![0.0; n];
            s2.grad_into(p, &mut g);
            g
        })
        .collect();
    let gmax = grads.iter().map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let base = eta.rolloff * eta.radius / 16.0;
    let integral = {
        let m = (2.0 * eta.radius / base).ceil() as usize;
        let (pts, w) = tensor_points(&eta.center, eta.radius, m);
        pts.par_iter().map(|p| eta.value(p)).sum::<f64>() * w
    };
    let mut out = Vec::with_capacity(probes.len());
    for (x, t) in probes {
        let dist = (x.iter().map(|v| v * v).sum::<f64>() + t * t).sqrt();
        if dist > 0.0 {
            let g = grads
                .iter()
                .map(|g| x.iter().zip(g).map(|(a, b)| (a + t * b).powi(2)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min);
            if g < exclusion * dist {
                return Err(Error::Precondition {
                    op,
                    detail: format!("probe {x:?}, t = {t} lies in the excluded neighbourhood of CN(S₂)"),
                });
            }
        }
        let reach: f64 = x.iter().map(|v| v.abs()).sum::<f64>() + t.abs() * gmax + 1.0;
        let h = base.min(0.5 / reach);
        let m = (2.0 * eta.radius / h).ceil() as usize;
        let (pts, w) = tensor_points(&eta.center, eta.radius, m);
        let k: num_complex::Complex64 = pts
            .par_iter()
            .map(|p| {
                let e = eta.value(p);
                if e == 0.0 {
                    return num_complex::Complex64::new(0.0, 0.0);
                }
                let ph: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + t * s2.phi(p);
                num_complex::Complex64::from_polar(e, -ph)
            })
            .sum();
        out.push(KernelProbe { x: x.clone(), t: *t, distance: dist, value: k.norm() * w });
    }
    let (ds, vs): (Vec<f64>, Vec<f64>) =
        out.iter().filter(|p| p.distance > 0.0 && p.value > 0.0).map(|p| (p.distance, p.value)).unzip();
    let exponent = if ds.len() > 1 { -log_log_slope(&ds, &vs) } else { f64::NAN };
    Ok(KernelReport { integral, probes: out, exponent })
}
