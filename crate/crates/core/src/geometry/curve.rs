use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::shape::surface_point_unchecked;
use super::surface::SurfaceSpec;
use crate::{Error, Result};

/// Scan and refinement settings for intersection curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Scan grid points per axis over the bounding box of D₁.
    pub scan: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { scan: 64, tol: 1e-10, max_iter: 50 }
    }
}

/// Samples of C₁(h) = S₁ ∩ (h − S₂), projected to ξ-space, with frames.
#[derive(Debug, Clone)]
pub struct IntersectionCurve {
    pub h: DVector<f64>,
    pub empty: bool,
    pub samples: Vec<DVector<f64>>,
    /// Orthonormal ambient tangents of the curve, n − 1 per sample.
    pub tangents: Vec<Vec<DVector<f64>>>,
    /// Unit ambient conormal in T S₁ orthogonal to the curve.
    pub conormals: Vec<DVector<f64>>,
    /// Unit ξ-space tangents of the projected curve, n − 1 per sample.
    pub projected_tangents: Vec<Vec<DVector<f64>>>,
    /// Unit ∇φ₁(ξ) − ∇φ₂(h₀ − ξ).
    pub projected_normals: Vec<DVector<f64>>,
    /// Level-set residuals |φ₁(ξ) + φ₂(h₀ − ξ) − h_{n+1}|.
    pub residuals: Vec<f64>,
}

struct Level<'a> {
    s1: &'a SurfaceSpec,
    s2: &'a SurfaceSpec,
    h0: Vec<f64>,
    hl: f64,
}

impl Level<'_> {
    fn value(&self, xi: &[f64]) -> f64 {
        let y: Vec<f64> = self.h0.iter().zip(xi).map(|(a, b)| a - b).collect();
        self.s1.phi(xi) + self.s2.phi(&y) - self.hl
    }

    fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        let n = xi.len();
        let y: Vec<f64> = self.h0.iter().zip(xi).map(|(a, b)| a - b).collect();
        let mut g1 = vec![0.0; n];
        let mut g2 = vec![0.0; n];
        self.s1.grad_into(xi, &mut g1);
        self.s2.grad_into(&y, &mut g2);
        g1.iter().zip(&g2).map(|(a, b)| a - b).collect()
    }

    fn admissible(&self, xi: &[f64]) -> bool {
        let y: Vec<f64> = self.h0.iter().zip(xi).map(|(a, b)| a - b).collect();
        self.s1.domain().contains(xi) && self.s2.domain().contains(&y)
    }
}

pub fn solve_intersection_curve(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h: &DVector<f64>,
    n_samples: usize,
) -> Result<IntersectionCurve> {
    solve_intersection_curve_with(s1, s2, h, n_samples, &CurveOptions::default())
}

pub fn solve_intersection_curve_with(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h: &DVector<f64>,
    n_samples: usize,
    opts: &CurveOptions,
) -> Result<IntersectionCurve> {
    let n = s1.dim();
    if s2.dim() != n || h.len() != n + 1 {
        return Err(Error::Parameter {
            op: "geometry::solve_intersection_curve",
            detail: "surfaces and translation must share the dimension".into(),
        });
    }
    let level = Level { s1, s2, h0: h.as_slice()[..n].to_vec(), hl: h[n] };
    let (lo, hi) = s1.domain().bounding_box();
    let k = opts.scan.max(2);
    let total = k.pow(n as u32);
    let node = |idx: usize| -> Vec<f64> {
        let mut rem = idx;
        (0..n)
            .map(|a| {
                let i = rem % k;
                rem /= k;
                lo[a] + (hi[a] - lo[a]) * i as f64 / (k - 1) as f64
            })
            .collect()
    };
    let values: Vec<f64> = (0..total).map(|i| level.value(&node(i))).collect();
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for idx in 0..total {
        let f0 = values[idx];
        if !f0.is_finite() {
            continue;
        }
        if f0 == 0.0 {
            roots.push(node(idx));
            continue;
        }
        let mut stride = 1;
        let mut rem = idx;
        for _ in 0..n {
            let i = rem % k;
            rem /= k;
            if i + 1 < k {
                let f1 = values[idx + stride];
                if f1.is_finite() && f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
                    roots.push(bisect(&level, node(idx), node(idx + stride), f0));
                }
            }
            stride *= k;
        }
    }
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for r in roots {
        let p = polish(&level, r, opts)?;
        if !level.admissible(&p) {
            continue;
        }
        if kept.iter().any(|q| dist(q, &p) < 1e-9) {
            continue;
        }
        kept.push(p);
    }
    if n == 2 && !kept.is_empty() {
        let cx = kept.iter().map(|p| p[0]).sum::<f64>() / kept.len() as f64;
        let cy = kept.iter().map(|p| p[1]).sum::<f64>() / kept.len() as f64;
        kept.sort_by(|a, b| (a[1] - cy).atan2(a[0] - cx).total_cmp(&(b[1] - cy).atan2(b[0] - cx)));
    }
    if n_samples > 0 && kept.len() > n_samples {
        let m = kept.len();
        kept = (0..n_samples).map(|i| kept[i * m / n_samples].clone()).collect();
    }
    let mut curve = IntersectionCurve {
        h: h.clone(),
        empty: kept.is_empty(),
        samples: Vec::new(),
        tangents: Vec::new(),
        conormals: Vec::new(),
        projected_tangents: Vec::new(),
        projected_normals: Vec::new(),
        residuals: Vec::new(),
    };
    for p in kept {
        let xi = DVector::from_vec(p);
        let g = DVector::from_vec(level.gradient(xi.as_slice()));
        let nrm = &g / g.norm();
        let proj = complement(&[nrm.clone()], n);
        let sp = surface_point_unchecked(s1, &xi);
        let grad1 = s1.grad(&xi);
        let lifted: Vec<DVector<f64>> = proj
            .iter()
            .map(|w| {
                let mut v = DVector::zeros(n + 1);
                v.rows_mut(0, n).copy_from(w);
                v[n] = grad1.dot(w);
                v
            })
            .collect();
        let tangents = orthonormalize(&lifted);
        let conormal = sp
            .tangent_basis
            .iter()
            .map(|t| {
                let mut c = t.clone();
                for v in &tangents {
                    let d = v.dot(&c);
                    c.axpy(-d, v, 1.0);
                }
                c
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .map(|c| &c / c.norm())
            .unwrap_or_else(|| DVector::zeros(n + 1));
        curve.residuals.push(level.value(xi.as_slice()).abs());
        curve.samples.push(xi);
        curve.tangents.push(tangents);
        curve.conormals.push(conormal);
        curve.projected_tangents.push(proj);
        curve.projected_normals.push(nrm);
    }
    Ok(curve)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn bisect(level: &Level<'_>, mut a: Vec<f64>, mut b: Vec<f64>, mut fa: f64) -> Vec<f64> {
    for _ in 0..60 {
        let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let fm = level.value(&m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn polish(level: &Level<'_>, seed: Vec<f64>, opts: &CurveOptions) -> Result<Vec<f64>> {
    let mut x = seed.clone();
    for _ in 0..opts.max_iter {
        let f = level.value(&x);
        if f.abs() <= opts.tol {
            return Ok(x);
        }
        let g = level.gradient(&x);
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if !(gg > 0.0) || !f.is_finite() {
            break;
        }
        for (xa, ga) in x.iter_mut().zip(&g) {
            *xa -= f * ga / gg;
        }
    }
    if level.value(&x).abs() <= opts.tol {
        return Ok(x);
    }
    Err(Error::Solver { op: "geometry::solve_intersection_curve", seed })
}

/// Orthonormal basis of the complement of span(vs) in ℝᵈ.
pub(crate) fn complement(vs: &[DVector<f64>], d: usize) -> Vec<DVector<f64>> {
    let mut basis = orthonormalize(vs);
    let k = basis.len();
    let mut out = Vec::new();
    for j in 0..d {
        let mut e = DVector::zeros(d);
        e[j] = 1.0;
        for b in basis.iter() {
            let p = b.dot(&e);
            e.axpy(-p, b, 1.0);
        }
        for b in basis.iter() {
            let p = b.dot(&e);
            e.axpy(-p, b, 1.0);
        }
        let len = e.norm();
        if len > 1e-6 {
            e /= len;
            basis.push(e.clone());
            out.push(e);
        }
        if basis.len() == d {
            break;
        }
    }
    debug_assert_eq!(out.len(), d - k);
    out
}

/// Gram–Schmidt with reorthogonalization; drops near-dependent vectors.
pub(crate) fn orthonormalize(vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut u = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dot(&u);
                u.axpy(-p, b, 1.0);
            }
        }
        let len = u.norm();
        if len > 1e-10 * scale {
            basis.push(u / len);
        }
    }
    basis
}
