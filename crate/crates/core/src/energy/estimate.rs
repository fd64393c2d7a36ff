use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::cone::ThickenedSurface;
use crate::fit::log_log_slope;
use crate::freewave::{FrequencyGrid, WaveState};
use crate::geometry::{check_lfw, Domain, SurfaceKind, SurfaceSpec, Verdict};
use crate::quad::{bump, midpoints};
use crate::{Error, Result};

/// Space-time box for the quadrature. The spatial centre moves with
/// velocity `drift`, so (x, t) is in the box iff |x − c_x − (t − c_t)·drift|∞
/// ≤ half[..n] and |t − c_t| ≤ half[n].
#[derive(Clone, Debug, Serialize)]
pub struct EnergyWindow {
    pub center: Vec<f64>,
    pub half: Vec<f64>,
    pub drift: Vec<f64>,
    pub spacing: f64,
}

impl EnergyWindow {
    pub fn fixed(center: Vec<f64>, half: Vec<f64>, spacing: f64) -> Self {
        let n = center.len() - 1;
        EnergyWindow { center, half, drift: vec![0.0; n], spacing }
    }

    fn nodes(&self, axis: usize) -> Vec<f64> {
        let m = ((2.0 * self.half[axis] / self.spacing).ceil() as usize).max(1);
        midpoints(-self.half[axis], self.half[axis], m)
    }

    fn cell_volume(&self) -> f64 {
        (0..self.center.len())
            .map(|a| {
                let m = ((2.0 * self.half[a] / self.spacing).ceil() as usize).max(1);
                2.0 * self.half[a] / m as f64
            })
            .product()
    }
}

/// ‖ψ‖_{L²(S(r) ∩ W)} by midpoint quadrature on the window W.
pub fn energy_in_neighborhood(psi: &WaveState, s: &ThickenedSurface, window: &EnergyWindow) -> Result<f64> {
    let op = "energy::energy_in_neighborhood";
    let n = psi.dim();
    if n != 2 || window.center.len() != 3 {
        return Err(Error::Parameter { op, detail: "energy estimates are implemented for n = 2".into() });
    }
    let period = psi.grid().period();
    if (0..n).any(|a| 2.0 * window.half[a] > period) {
        return Err(Error::Coverage { op, detail: format!("window wider than the spatial period {period}") });
    }
    let local: Vec<Vec<f64>> = (0..=n).map(|a| window.nodes(a)).collect();
    let ph = psi.phases();
    let total: f64 = local[n]
        .par_iter()
        .map(|&dt| {
            let t = window.center[n] + dt;
            let axes: Vec<Vec<f64>> = (0..n)
                .map(|a| {
                    let c = window.center[a] + dt * window.drift[a];
                    local[a].iter().map(|x| x + c).collect()
                })
                .collect();
            let mask = s.slice_mask(&axes, t);
            if !mask.iter().any(|&m| m) {
                return 0.0;
            }
            let vals = psi.eval_tensor_phased(&axes, t, &ph);
            vals.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v.norm_sqr()).sum::<f64>()
        })
        .sum();
    Ok((total * window.cell_volume()).sqrt())
}

/// Packets at scale r: spectral bump of radius width/r around `xi` on a
/// lattice with unit spatial step, passing through the anchor (x_P, t_P).
/// The window follows the packet for |t − t_P| ≤ duration·r².
#[derive(Clone, Debug, Serialize)]
pub struct PacketFamily {
    #[serde(skip)]
    pub surface: Arc<SurfaceSpec>,
    pub xi: Vec<f64>,
    pub anchor: Vec<f64>,
    pub width: f64,
    pub duration: f64,
    pub spacing: f64,
}

impl PacketFamily {
    pub fn at_scale(&self, r: f64) -> Result<(WaveState, EnergyWindow)> {
        let op = "energy::packet_family";
        let n = self.xi.len();
        if !(r > 0.0) {
            return Err(Error::Parameter { op, detail: "r must be positive".into() });
        }
        let rho = self.width / r;
        let span = self.duration * r * r;
        let half = 4.0 / rho + 4.0 * rho * span;
        let resolution = ((4.0 * half).ceil() as usize).next_power_of_two().max(64);
        let spacing = std::f64::consts::TAU / resolution as f64;
        let x_p = &self.anchor[..n];
        let grid = Arc::new(FrequencyGrid::centered(&self.xi, resolution, spacing, x_p)?);
        let k = (rho / spacing).ceil() as i64;
        let side = (2 * k + 1) as usize;
        let offset = vec![(resolution / 2) as i64 - k; n];
        let shape = vec![side; n];
        let mut amps = Vec::with_capacity(side.pow(n as u32));
        let d = self.surface.enlarged_domain();
        let mut xi = vec![0.0; n];
        for flat in 0..side.pow(n as u32) {
            let mut rem = flat;
            for a in (0..n).rev() {
                xi[a] = self.xi[a] + ((rem % side) as i64 - k) as f64 * spacing;
                rem /= side;
            }
            let dist = (0..n).map(|a| (xi[a] - self.xi[a]).powi(2)).sum::<f64>().sqrt();
            let b = bump(dist / rho, 1.0);
            if b > 0.0 && !d.contains(&xi) {
                return Err(Error::Margin { op });
            }
            let phase: f64 = (0..n).map(|a| x_p[a] * xi[a]).sum();
            amps.push(Complex64::from_polar(b, -phase));
        }
        let w = WaveState::from_parts(self.surface.clone(), grid, offset, shape, amps, self.anchor[n])?;
        let m = w.mass();
        let w = w.scaled(Complex64::new(1.0 / m.sqrt(), 0.0));
        let mut g = vec![0.0; n];
        self.surface.grad_into(&self.xi, &mut g);
        let mut hw = vec![half; n];
        hw.push(span);
        let window = EnergyWindow {
            center: self.anchor.clone(),
            half: hw,
            drift: g.iter().map(|v| -v).collect(),
            spacing: self.spacing * r,
        };
        Ok((w, window))
    }
}

/// A cone CN(C₁(h)) together with the ψ family used to probe it.
#[derive(Clone, Debug)]
pub struct EnergyConfiguration {
    pub name: &'static str,
    pub s1: SurfaceSpec,
    pub s2: SurfaceSpec,
    pub h: DVector<f64>,
    pub family: PacketFamily,
    pub samples: usize,
}

const ANCHOR_TIME: f64 = 4096.0;

fn paraboloid(center: [f64; 2]) -> Result<SurfaceSpec> {
    SurfaceSpec::new(2, SurfaceKind::EllipticParaboloid, Domain::ball(&center, 0.2), 0.1)
}

/// Paraboloid caps at (±1/2, 0), h = (0, 0, 1/2). The packet sits at the
/// centre of D₂ and crosses the cone at the generator through ζ = (1/2, 0).
pub fn transversal_configuration() -> Result<EnergyConfiguration> {
    let s1 = paraboloid([0.5, 0.0])?;
    let s2 = paraboloid([-0.5, 0.0])?;
    let family = PacketFamily {
        surface: Arc::new(s2.clone()),
        xi: vec![-0.5, 0.0],
        anchor: vec![-ANCHOR_TIME, 0.0, ANCHOR_TIME],
        width: 0.4,
        duration: 2.0,
        spacing: 0.25,
    };
    Ok(EnergyConfiguration {
        name: "transversal",
        s1,
        s2,
        h: DVector::from_vec(vec![0.0, 0.0, 0.5]),
        family,
        samples: 256,
    })
}

/// Both caps at (1/2, 0), h = (1, 0, 0.52): C₁(h) is the circle of radius
/// 0.1 about (1/2, 0). The packet at ξ = (0.6, 0) travels along the
/// generator N₁(0.6, 0), so LFW fails.
pub fn control_configuration() -> Result<EnergyConfiguration> {
    let s1 = paraboloid([0.5, 0.0])?;
    let s2 = paraboloid([0.5, 0.0])?;
    let family = PacketFamily {
        surface: Arc::new(s2.clone()),
        xi: vec![0.6, 0.0],
        anchor: vec![-1.2 * ANCHOR_TIME, 0.0, ANCHOR_TIME],
        width: 0.4,
        duration: 2.0,
        spacing: 0.25,
    };
    Ok(EnergyConfiguration {
        name: "control",
        s1,
        s2,
        h: DVector::from_vec(vec![1.0, 0.0, 0.52]),
        family,
        samples: 256,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub r: f64,
    pub energy: f64,
    pub mass: f64,
    /// Fit through this and all earlier points (NaN for the first).
    pub slope_running: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergySweep {
    pub configuration: String,
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub lfw_infimum: f64,
    pub lfw_passed: bool,
    pub warning: Option<String>,
}

/// Energy of the r-scale packet in S(r) for each r, and the fitted exponent.
pub fn energy_ratio_sweep(config: &EnergyConfiguration, rs: &[f64]) -> Result<EnergySweep> {
    let cone = ThickenedSurface::normal_cone(&config.s1, &config.s2, &config.h, config.samples, 0.0)?;
    let lfw = check_lfw(&config.s1, &config.s2, &config.h, 1e-3)?;
    let lfw_passed = lfw.verdict == Verdict::Pass;
    let warning = (!lfw_passed).then(|| format!("LFW fails (infimum {:.3e}); the energy estimate is not expected to hold", lfw.infimum));
    let mut points = Vec::with_capacity(rs.len());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &r in rs {
        let (psi, window) = config.family.at_scale(r)?;
        let energy = energy_in_neighborhood(&psi, &cone.with_thickness(r), &window)?;
        xs.push(r);
        ys.push(energy);
        let slope_running = if xs.len() > 1 { log_log_slope(&xs, &ys) } else { f64::NAN };
        points.push(SweepPoint { r, energy, mass: psi.mass(), slope_running });
    }
    let slope = if xs.len() > 1 { log_log_slope(&xs, &ys) } else { f64::NAN };
    Ok(EnergySweep { configuration: config.name.into(), points, slope, lfw_infimum: lfw.infimum, lfw_passed, warning })
}

pub fn write_sweep_csv<W: Write>(out: &mut W, sweep: &EnergySweep) -> std::io::Result<()> {
    writeln!(out, "r,energy,mass,slope_running")?;
    for p in &sweep.points {
        writeln!(out, "{},{:.12e},{:.12e},{:.6}", p.r, p.energy, p.mass, p.slope_running)?;
    }
    Ok(())
}
