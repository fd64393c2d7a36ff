use nalgebra::{DVector, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{normal_cone_samples, SurfaceSpec};
use crate::{Error, Result};

/// r-neighbourhood S(r) of a two-dimensional cone in space-time (n = 2).
/// The cone is the piecewise-linear surface swept by lines through the
/// origin along consecutive generators; the apex ball of radius `apex` is
/// removed.
#[derive(Clone, Debug, Serialize)]
pub struct ThickenedSurface {
    generators: Vec<[f64; 3]>,
    segments: Vec<(usize, usize)>,
    pub thickness: f64,
    pub apex: f64,
}

impl ThickenedSurface {
    /// Generators need not be normalised. Consecutive generators closer than
    /// four times the median gap are joined; the last joins the first when
    /// that gap is also small.
    pub fn from_generators(dirs: &[DVector<f64>], thickness: f64) -> Result<Self> {
        let op = "energy::thickened_surface";
        if dirs.is_empty() {
            return Err(Error::Input { op, detail: "no generators".into() });
        }
        if dirs.iter().any(|d| d.len() != 3) {
            return Err(Error::Parameter { op, detail: "only n = 2 cones are supported".into() });
        }
        if !(thickness >= 0.0) {
            return Err(Error::Parameter { op, detail: "thickness must be nonnegative".into() });
        }
        let generators: Vec<[f64; 3]> = dirs
            .iter()
            .map(|d| {
                let n = d.norm();
                [d[0] / n, d[1] / n, d[2] / n]
            })
            .collect();
        let m = generators.len();
        let gap = |i: usize, j: usize| -> f64 {
            (0..3).map(|a| (generators[i][a] - generators[j][a]).powi(2)).sum::<f64>().sqrt()
        };
        let mut gaps: Vec<f64> = (1..m).map(|i| gap(i - 1, i)).collect();
        let mut segments = Vec::new();
        if m > 1 {
            gaps.sort_by(f64::total_cmp);
            let limit = 4.0 * gaps[gaps.len() / 2];
            for i in 1..m {
                if gap(i - 1, i) <= limit {
                    segments.push((i - 1, i));
                }
            }
            if m > 2 && gap(m - 1, 0) <= limit {
                segments.push((m - 1, 0));
            }
        }
        Ok(ThickenedSurface { generators, segments, thickness, apex: thickness })
    }

    /// The normal cone CN(C₁(h)) from unit normals of S₁ along C₁(h).
    pub fn normal_cone(s1: &SurfaceSpec, s2: &SurfaceSpec, h: &DVector<f64>, samples: usize, thickness: f64) -> Result<Self> {
        let dirs = normal_cone_samples(s1, s2, h, &[1.0], samples)?;
        Self::from_generators(&dirs, thickness)
    }

    pub fn with_thickness(&self, r: f64) -> Self {
        ThickenedSurface { thickness: r, apex: r, ..self.clone() }
    }

    pub fn generators(&self) -> &[[f64; 3]] {
        &self.generators
    }

    /// Euclidean distance in space-time from (x, t) to the cone.
    pub fn distance(&self, x: &[f64], t: f64) -> f64 {
        let p = Vector3::new(x[0], x[1], t);
        self.distance_within(&p, &self.all_segments(), -1.0)
    }

    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        let p = Vector3::new(x[0], x[1], t);
        p.norm() >= self.apex && self.distance_within(&p, &self.all_segments(), self.thickness) <= self.thickness
    }

    /// S_t(r) on the tensor grid `axes` (last axis fastest).
    pub fn slice_mask(&self, axes: &[Vec<f64>], t: f64) -> Vec<bool> {
        let (xs, ys) = (&axes[0], &axes[1]);
        let x0 = xs.iter().sum::<f64>() / xs.len() as f64;
        let y0 = ys.iter().sum::<f64>() / ys.len() as f64;
        let rx = xs.iter().fold(0.0f64, |m, v| m.max((v - x0).abs()));
        let ry = ys.iter().fold(0.0f64, |m, v| m.max((v - y0).abs()));
        let centre = Vector3::new(x0, y0, t);
        let radius = rx.hypot(ry) + self.thickness;
        let near: Vec<Piece> = self
            .all_segments()
            .into_iter()
            .filter(|s| s.distance(&centre, &self.generators) <= radius)
            .collect();
        let mut out = vec![false; xs.len() * ys.len()];
        if near.is_empty() {
            return out;
        }
        out.par_chunks_mut(ys.len()).zip(xs.par_iter()).for_each(|(row, &x)| {
            for (dst, &y) in row.iter_mut().zip(ys) {
                let p = Vector3::new(x, y, t);
                *dst = p.norm() >= self.apex && self.distance_within(&p, &near, self.thickness) <= self.thickness;
            }
        });
        out
    }

    fn all_segments(&self) -> Vec<Piece> {
        if self.segments.is_empty() {
            (0..self.generators.len()).map(Piece::Line).collect()
        } else {
            self.segments.iter().map(|&(a, b)| Piece::Sector(a, b)).collect()
        }
    }

    fn distance_within(&self, p: &Vector3<f64>, pieces: &[Piece], stop: f64) -> f64 {
        let mut best = f64::INFINITY;
        for s in pieces {
            best = best.min(s.distance(p, &self.generators));
            if best <= stop {
                break;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Line(usize),
    Sector(usize, usize),
}

fn vec3(g: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(g[0], g[1], g[2])
}

fn ray_distance(p: &Vector3<f64>, u: &Vector3<f64>) -> f64 {
    let s = p.dot(u).max(0.0);
    (p - u * s).norm()
}

/// Distance to the planar wedge {a u + b v : a, b ≥ 0}.
fn wedge_distance(p: &Vector3<f64>, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    let n = u.cross(v);
    let nn = n.norm();
    if nn < 1e-14 {
        return ray_distance(p, u).min(ray_distance(p, v));
    }
    let n = n / nn;
    let h = p.dot(&n);
    let q = p - n * h;
    let (uu, uv, vv) = (u.dot(u), u.dot(v), v.dot(v));
    let (qu, qv) = (q.dot(u), q.dot(v));
    let det = uu * vv - uv * uv;
    let a = (qu * vv - qv * uv) / det;
    let b = (qv * uu - qu * uv) / det;
    if a >= 0.0 && b >= 0.0 {
        h.abs()
    } else {
        ray_distance(p, u).min(ray_distance(p, v))
    }
}

impl Piece {
    fn distance(&self, p: &Vector3<f64>, g: &[[f64; 3]]) -> f64 {
        match *self {
            Piece::Line(i) => {
                let u = vec3(&g[i]);
                (p - u * p.dot(&u)).norm()
            }
            Piece::Sector(i, j) => {
                let (u, v) = (vec3(&g[i]), vec3(&g[j]));
                wedge_distance(p, &u, &v).min(wedge_distance(&-p, &u, &v))
            }
        }
    }
}
