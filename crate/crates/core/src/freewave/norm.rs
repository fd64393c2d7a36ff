use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wave::WaveState;
use crate::quad;
use crate::{Error, Result};

/// A space-time cube of side `side` centred at (x_Q, t_Q), optionally dilated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRegion {
    pub center: Vec<f64>,
    pub side: f64,
    #[serde(default = "one")]
    pub dilation: f64,
}

fn one() -> f64 {
    1.0
}

impl CubeRegion {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0) || center.len() < 2 {
            return Err(Error::Parameter { op: "freewave::cube", detail: "need side > 0 and n+1 ≥ 2 coordinates".into() });
        }
        Ok(CubeRegion { center, side, dilation: 1.0 })
    }

    /// αQ: same centre, side scaled by α.
    pub fn dilated(&self, alpha: f64) -> CubeRegion {
        CubeRegion { center: self.center.clone(), side: self.side, dilation: self.dilation * alpha }
    }

    pub fn effective_side(&self) -> f64 {
        self.side * self.dilation
    }

    pub fn space_dim(&self) -> usize {
        self.center.len() - 1
    }

    pub fn time_center(&self) -> f64 {
        self.center[self.center.len() - 1]
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.effective_side()
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + 0.5 * self.effective_side()
    }

    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        let n = self.space_dim();
        (0..n).all(|a| x[a] >= self.lower(a) && x[a] < self.upper(a)) && t >= self.lower(n) && t <= self.upper(n)
    }
}

/// Spatial grid nodes of `w`'s grid lying in [c − s/2, c + s/2) per axis.
pub(crate) fn cube_nodes(w: &WaveState, q: &CubeRegion) -> Vec<Vec<f64>> {
    let g = w.grid();
    (0..g.n)
        .map(|a| {
            let dx = g.dx();
            let lo = q.lower(a);
            let hi = q.upper(a);
            let j0 = ((lo - g.x_origin[a]) / dx - 1e-9).ceil().max(0.0) as usize;
            let mut v = Vec::new();
            let mut j = j0;
            while j < g.resolution {
                let x = g.x(a, j);
                if x >= hi - 1e-12 * dx {
                    break;
                }
                if x >= lo - 1e-12 * dx {
                    v.push(x);
                }
                j += 1;
            }
            v
        })
        .collect()
}

/// Rejects cubes the spatial window cannot resolve without wrap-around.
pub fn check_coverage(w1: &WaveState, w2: &WaveState, q: &CubeRegion) -> Result<()> {
    let op = "freewave::bilinear_lp_norm";
    let g = w1.grid();
    if !g.same_spatial(w2.grid()) {
        return Err(Error::Input { op, detail: "waves have different spatial grids".into() });
    }
    if q.space_dim() != g.n {
        return Err(Error::Input { op, detail: "cube dimension mismatch".into() });
    }
    let side = q.effective_side();
    let l = g.period();
    let mut need: f64 = 0.0;
    for w in [w1, w2] {
        let s = w.surface();
        need = need.max(2.0 * side * gradient_diameter(s)).max(side * (1.0 + 2.0 * s.max_gradient_norm(6)));
    }
    if l < need * (1.0 - 1e-12) {
        return Err(Error::Coverage { op, detail: format!("window {l:.4} shorter than required {need:.4}") });
    }
    for a in 0..g.n {
        let lo = g.x_origin[a];
        if q.lower(a) < lo - 1e-9 || q.upper(a) > lo + l + 1e-9 {
            return Err(Error::Coverage { op, detail: format!("cube leaves the spatial window on axis {a}") });
        }
    }
    Ok(())
}

/// diam ∇φ(D̃) over sample points.
pub fn gradient_diameter(s: &crate::geometry::SurfaceSpec) -> f64 {
    let pts = s.enlarged_domain().sample_points(6);
    let grads: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| {
            let mut g = vec![0.0; s.dim()];
            s.grad_into(p.as_slice(), &mut g);
            g
        })
        .collect();
    let mut d: f64 = 0.0;
    for a in &grads {
        for b in &grads {
            d = d.max(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
        }
    }
    d
}

/// (Σ_{nodes in Q} |φψ|^p Δxⁿ Δt)^{1/p} with uniform spatial nodes and a
/// trapezoid rule over `t_samples` time slices.
pub fn bilinear_lp_norm(w1: &WaveState, w2: &WaveState, q: &CubeRegion, p: f64, t_samples: usize) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Parameter { op: "freewave::bilinear_lp_norm", detail: "p must be positive".into() });
    }
    check_coverage(w1, w2, q)?;
    let n = q.space_dim();
    let (times, tw) = quad::trapezoid(q.lower(n), q.upper(n), t_samples);
    let axes = cube_nodes(w1, q);
    if axes.iter().any(|a| a.is_empty()) {
        return Ok(0.0);
    }
    let a = w1.trimmed();
    let b = w2.trimmed();
    if a.amplitudes().is_empty() || b.amplitudes().is_empty() {
        return Ok(0.0);
    }
    let dxn = w1.grid().dx().powi(n as i32);
    let ph_a = a.phases();
    let ph_b = b.phases();
    let slices: Vec<f64> = times
        .par_iter()
        .zip(tw.par_iter())
        .map(|(&t, &wt)| {
            let fa = slice_values(&a, &axes, t, &ph_a);
            let fb = slice_values(&b, &axes, t, &ph_b);
            let s: f64 = fa.iter().zip(&fb).map(|(u, v)| (u * v).norm().powf(p)).sum();
            s * dxn * wt
        })
        .collect();
    Ok(slices.iter().sum::<f64>().powf(1.0 / p))
}

fn slice_values(w: &WaveState, axes: &[Vec<f64>], t: f64, phases: &[f64]) -> Vec<Complex64> {
    w.eval_tensor_phased(axes, t, phases)
}
