use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::grid::FrequencyGrid;
use super::norm::CubeRegion;
use super::wave::{init_wave, WaveState};
use crate::geometry::{complement, Domain, SurfaceKind, SurfaceSpec};
use crate::quad::bump;
use crate::{Error, Result};

/// Tangential full width of a plate is `TANGENT_WIDTH`·R^{-1/2}.
pub const TANGENT_WIDTH: f64 = 1.0;
/// Conormal full width of a plate is `CONORMAL_WIDTH`/R.
pub const CONORMAL_WIDTH: f64 = 8.0;

/// A smooth frequency plate: a bump product in an orthonormal frame.
#[derive(Clone, Debug, Serialize)]
pub struct KnappPlate {
    pub center: Vec<f64>,
    pub conormal: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    pub tangent_width: f64,
    pub conormal_width: f64,
    pub amplitude: f64,
}

impl KnappPlate {
    pub fn density(&self, xi: &[f64]) -> Complex64 {
        let d: Vec<f64> = xi.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let dot = |v: &[f64]| v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        let mut v = bump(2.0 * dot(&self.conormal) / self.conormal_width, 1.0);
        for t in &self.tangents {
            if v == 0.0 {
                break;
            }
            v *= bump(2.0 * dot(t) / self.tangent_width, 1.0);
        }
        Complex64::new(self.amplitude * v, 0.0)
    }

    /// Radius of a ball containing the support.
    pub fn radius(&self) -> f64 {
        let k = self.tangents.len() as f64;
        0.5 * (self.conormal_width.powi(2) + k * self.tangent_width.powi(2)).sqrt()
    }
}

/// A focusing pair ready for a bilinear norm on the cube of side R at the
/// origin.
#[derive(Clone, Debug)]
pub struct KnappPair {
    pub scale: f64,
    pub plates: [KnappPlate; 2],
    pub waves: [WaveState; 2],
    pub cube: CubeRegion,
    pub t_samples: usize,
}

/// Unit-mass plates of size R^{-1/2} × R^{-1} at the domain centres, thin in
/// the direction ∇φ₁(c₁) − ∇φ₂(c₂) and long across it.
pub fn generate_knapp(s1: &SurfaceSpec, s2: &SurfaceSpec, r: f64) -> Result<KnappPair> {
    generate_knapp_in_window(s1, s2, r, None)
}

/// As `generate_knapp`, with the spatial period rounded up to a whole
/// multiple of `unit` when given.
pub fn generate_knapp_in_window(s1: &SurfaceSpec, s2: &SurfaceSpec, r: f64, unit: Option<f64>) -> Result<KnappPair> {
    let op = "freewave::generate_knapp";
    if !(r >= 4.0) {
        return Err(Error::Parameter { op, detail: format!("scale R = {r} below 4") });
    }
    let n = s1.dim();
    if s2.dim() != n {
        return Err(Error::Input { op, detail: "surfaces of different dimension".into() });
    }
    let c1 = s1.domain().center().to_vec();
    let c2 = s2.domain().center().to_vec();
    let g1 = s1.grad(&DVector::from_column_slice(&c1));
    let g2 = s2.grad(&DVector::from_column_slice(&c2));
    let mut normal = g1 - g2;
    if normal.norm() < 1e-12 {
        normal = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    }
    let normal = normal.normalize();
    let tangents: Vec<Vec<f64>> = complement(std::slice::from_ref(&normal), n).iter().map(|v| v.as_slice().to_vec()).collect();
    let make = |c: Vec<f64>| KnappPlate {
        center: c,
        conormal: normal.as_slice().to_vec(),
        tangents: tangents.clone(),
        tangent_width: TANGENT_WIDTH / r.sqrt(),
        conormal_width: CONORMAL_WIDTH / r,
        amplitude: 1.0,
    };
    let plates = [make(c1), make(c2)];
    let rho = plates[0].radius();
    let local1 = Arc::new(s1.with_domain(Domain::ball(&plates[0].center, rho), 2.0 * rho)?);
    let local2 = Arc::new(s2.with_domain(Domain::ball(&plates[1].center, rho), 2.0 * rho)?);
    let vmax = local1.max_gradient_norm(6).max(local2.max_gradient_norm(6));
    let mut period = r * (4.0f64).max(1.5 + 2.0 * vmax);
    if let Some(u) = unit {
        period = (period / u - 1e-9).ceil() * u;
    }
    let spacing = std::f64::consts::TAU / period;
    let min_res = (8.0 * r.sqrt()).ceil() as usize;
    let origin = vec![0.0; n];
    let grid1 = Arc::new(FrequencyGrid::covering(local1.enlarged_domain(), spacing, min_res, &origin)?);
    let res = grid1.resolution;
    let grid2 = FrequencyGrid::covering(local2.enlarged_domain(), spacing, min_res, &origin)?;
    let grid2 = Arc::new(if grid2.resolution < res {
        FrequencyGrid::centered(local2.enlarged_domain().center(), res, spacing, &origin)?
    } else {
        grid2
    });
    let grid1 = if grid2.resolution > res {
        Arc::new(FrequencyGrid::centered(local1.enlarged_domain().center(), grid2.resolution, spacing, &origin)?)
    } else {
        grid1
    };
    let mut plates = plates;
    let mut waves = Vec::with_capacity(2);
    for (plate, (s, g)) in plates.iter_mut().zip([(local1, grid1), (local2, grid2)]) {
        let w = init_wave(s.clone(), |xi| plate.density(xi), g.clone())?;
        let m = w.mass();
        if !(m > 0.0) {
            return Err(Error::Resolution { op, detail: "plate falls between grid nodes".into() });
        }
        plate.amplitude = m.sqrt().recip();
        waves.push(w.scaled(Complex64::new(plate.amplitude, 0.0)));
    }
    let t_samples = waves[0].grid().resolution;
    let mut center = vec![0.0; n + 1];
    center[n] = 0.0;
    let w2 = waves.pop().unwrap();
    let w1 = waves.pop().unwrap();
    Ok(KnappPair { scale: r, plates, waves: [w1, w2], cube: CubeRegion::new(center, r)?, t_samples })
}

/// Hyperbolic paraboloid pieces near (1,1) and (−1,−1), which share the
/// flat direction (1,1), with Knapp plates at scale R.
pub fn generate_lee_pair(r: f64) -> Result<(SurfaceSpec, SurfaceSpec, KnappPair)> {
    let s1 = SurfaceSpec::new(2, SurfaceKind::HyperbolicParaboloid, Domain::ball(&[1.0, 1.0], 0.2), 0.1)?;
    let s2 = SurfaceSpec::new(2, SurfaceKind::HyperbolicParaboloid, Domain::ball(&[-1.0, -1.0], 0.2), 0.1)?;
    let pair = generate_knapp(&s1, &s2, r)?;
    Ok((s1, s2, pair))
}

/// The standard transversal elliptic pair: |ξ|² near (±½, 0).
pub fn elliptic_pair() -> Result<(SurfaceSpec, SurfaceSpec)> {
    Ok((
        SurfaceSpec::new(2, SurfaceKind::EllipticParaboloid, Domain::ball(&[0.5, 0.0], 0.2), 0.1)?,
        SurfaceSpec::new(2, SurfaceKind::EllipticParaboloid, Domain::ball(&[-0.5, 0.0], 0.2), 0.1)?,
    ))
}
