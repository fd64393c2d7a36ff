use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use super::norm::{bilinear_lp_norm, CubeRegion};
use super::wave::WaveState;
use crate::fit::log_log_slope;
use crate::{Error, Result};

/// One scale of a scaling sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub r: f64,
    pub p: f64,
    pub ratio: f64,
    pub mass1: f64,
    pub mass2: f64,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub points: Vec<ScalingPoint>,
}

/// Data supplied by a generator at scale R.
pub struct ScaleData {
    pub w1: WaveState,
    pub w2: WaveState,
    pub cube: CubeRegion,
    pub t_samples: usize,
}

fn check_dyadic(rs: &[f64]) -> Result<()> {
    let op = "freewave::estimate_scaling_exponent";
    if rs.len() < 3 {
        return Err(Error::Parameter { op, detail: format!("need at least 3 scales, got {}", rs.len()) });
    }
    for r in rs {
        let e = r.log2();
        if !(*r > 0.0) || (e - e.round()).abs() > 1e-9 {
            return Err(Error::Parameter { op, detail: format!("scale {r} is not dyadic") });
        }
    }
    Ok(())
}

/// Least-squares slope of log(ratio) against log R for precomputed ratios.
pub fn fit_ratios(points: Vec<ScalingPoint>) -> Result<ScalingFit> {
    let rs: Vec<f64> = points.iter().map(|p| p.r).collect();
    check_dyadic(&rs)?;
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    if ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Inconclusive { op: "freewave::estimate_scaling_exponent", detail: "non-positive ratio".into() });
    }
    Ok(ScalingFit { slope: log_log_slope(&rs, &ratios), points })
}

/// Runs `generator` at every scale and fits the growth of
/// ‖φψ‖_{L^p(Q_R)} / (M(φ)M(ψ))^{1/2}. Runtimes are recorded only when
/// `timing` is set so that output is reproducible.
pub fn estimate_scaling_exponent<G>(generator: G, p: f64, rs: &[f64], timing: bool) -> Result<ScalingFit>
where
    G: Fn(f64) -> Result<ScaleData>,
{
    check_dyadic(rs)?;
    let mut points = Vec::with_capacity(rs.len());
    for &r in rs {
        let start = Instant::now();
        let d = generator(r)?;
        let m1 = d.w1.mass();
        let m2 = d.w2.mass();
        let norm = bilinear_lp_norm(&d.w1, &d.w2, &d.cube, p, d.t_samples)?;
        let ratio = norm / (m1 * m2).sqrt();
        let runtime_ms = if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        points.push(ScalingPoint { r, p, ratio, mass1: m1, mass2: m2, runtime_ms });
    }
    fit_ratios(points)
}

/// CSV with header `R,p,ratio,mass1,mass2,runtime_ms`.
pub fn write_scaling_csv<W: Write>(out: &mut W, points: &[ScalingPoint]) -> std::io::Result<()> {
    writeln!(out, "R,p,ratio,mass1,mass2,runtime_ms")?;
    for p in points {
        writeln!(out, "{},{},{:.12e},{:.12e},{:.12e},{:.3}", p.r, p.p, p.ratio, p.mass1, p.mass2, p.runtime_ms)?;
    }
    Ok(())
}
