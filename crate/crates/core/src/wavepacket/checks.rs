use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::decompose::PacketDecomposition;
use crate::fit::log_log_slope;
use crate::freewave::CubeRegion;
use crate::quad::midpoints;
use crate::{Error, Result};

/// ‖f − Σ_T f_T‖ / ‖f‖, zero for the zero wave.
pub fn reconstruction_residual(d: &PacketDecomposition) -> f64 {
    let m = d.source.mass();
    if m == 0.0 {
        return 0.0;
    }
    (d.sum().distance_sqr(&d.source) / m).sqrt()
}

/// max_T (margin(f) − margin(f_T)) · R^{1/2}. The support of f_T does not
/// depend on x_T, so one packet per frequency piece is inspected.
pub fn margin_shift_constant(d: &PacketDecomposition) -> f64 {
    let base = d.source.margin();
    let mut worst: f64 = 0.0;
    for p in 0..d.pieces.len() {
        if let Some(i) = d.tubes.iter().position(|t| t.piece == p) {
            worst = worst.max(base - d.packet(i).margin());
        }
    }
    worst * d.params.scale.sqrt()
}

/// Largest spectral diameter among the packets.
pub fn max_packet_diameter(d: &PacketDecomposition) -> f64 {
    (0..d.pieces.len())
        .filter_map(|p| d.tubes.iter().position(|t| t.piece == p))
        .map(|i| d.packet(i).support_diameter())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct FarTubeBin {
    pub distance: f64,
    pub sup: f64,
    pub tubes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FarTubeReport {
    pub worst_ratio: f64,
    pub exponent: f64,
    pub c_power: f64,
    pub bins: Vec<FarTubeBin>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FarTubeOptions {
    /// Midpoint nodes per axis of Q.
    pub nodes: usize,
    /// Number of dyadic bins starting at 4R.
    pub bins: usize,
    /// Exponent of the c^{-C} normalisation.
    pub c_power: f64,
}

impl Default for FarTubeOptions {
    fn default() -> Self {
        FarTubeOptions { nodes: 8, bins: 3, c_power: 2.0 }
    }
}

/// ‖f_T‖_{L^∞(Q)} for tubes in the innermost lattice shell of each distance
/// bin [4R, 8R), [8R, 16R), …, evaluated at `nodes`ⁿ⁺¹ nodes of Q. The
/// exponent is the negated log-log slope of the per-bin maxima.
pub fn far_tube_decay(d: &PacketDecomposition, q: &CubeRegion, opts: &FarTubeOptions) -> Result<FarTubeReport> {
    let (nodes, c_power) = (opts.nodes, opts.c_power);
    let op = "wavepacket::far_tube_decay";
    let m = d.source.mass();
    if m == 0.0 {
        return Ok(FarTubeReport { worst_ratio: 0.0, exponent: f64::INFINITY, c_power, bins: Vec::new() });
    }
    let n = q.space_dim();
    let scale = q.effective_side();
    let normalizer = d.params.c.powf(-c_power) * m.sqrt();
    let axes: Vec<Vec<f64>> = (0..n).map(|a| midpoints(q.lower(a), q.upper(a), nodes)).collect();
    let times = midpoints(q.lower(n), q.upper(n), nodes);
    let dist: Vec<f64> = d.tubes.iter().map(|t| t.distance_to(q)).collect();
    let mut bins = Vec::new();
    let mut worst: f64 = 0.0;
    let mut lo = 4.0 * scale;
    let far = dist.iter().cloned().fold(0.0, f64::max);
    for _ in 0..opts.bins {
        if lo > far {
            break;
        }
        let shell: Vec<usize> =
            (0..d.tubes.len()).filter(|&i| dist[i] >= lo && dist[i] < lo + d.params.width).collect();
        if !shell.is_empty() {
            let sups: Vec<(f64, f64)> = shell
                .par_iter()
                .map(|&i| {
                    let w = d.packet(i);
                    let vals = w.eval_tensor_times(&axes, &times);
                    let s = vals.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
                    (s, dist[i])
                })
                .collect();
            let mut sup: f64 = 0.0;
            let mut mean_d = 0.0;
            for (s, dd) in &sups {
                sup = sup.max(*s);
                mean_d += dd;
                worst = worst.max(s * dd.powi(d.params.decay as i32) / normalizer);
            }
            bins.push(FarTubeBin { distance: mean_d / sups.len() as f64, sup, tubes: sups.len() });
        }
        lo *= 2.0;
    }
    if bins.is_empty() {
        return Err(Error::Inconclusive { op, detail: "no tube at distance ≥ 4R from the cube".into() });
    }
    let exponent = if bins.len() >= 2 && bins.iter().all(|b| b.sup > 0.0) {
        let x: Vec<f64> = bins.iter().map(|b| b.distance).collect();
        let y: Vec<f64> = bins.iter().map(|b| b.sup).collect();
        -log_log_slope(&x, &y)
    } else {
        f64::NAN
    };
    Ok(FarTubeReport { worst_ratio: worst, exponent, c_power, bins })
}

#[derive(Clone, Debug, Serialize)]
pub struct QestReport {
    pub ratio: f64,
    pub c: f64,
    pub r: f64,
    pub terms: Vec<f64>,
}

/// Σ_T sup_q (1 + d_T(q)/(c⁻²r))^N ‖f_T‖²_{L²(q)} over the partition of Q
/// into cubes q of side r, relative to r·M(f). Each q carries `m_sub`
/// midpoint nodes per axis and d_T(q) is the tube offset at its centre.
pub fn qest_check(d: &PacketDecomposition, q: &CubeRegion, m_sub: usize) -> QestReport {
    let n = q.space_dim();
    let r = d.params.r;
    let mass = d.source.mass();
    let k = (q.effective_side() / r).round().max(1.0) as usize;
    let side = q.effective_side() / k as f64;
    let per = m_sub.max(1);
    let axes: Vec<Vec<f64>> = (0..n).map(|a| midpoints(q.lower(a), q.upper(a), k * per)).collect();
    let times = midpoints(q.lower(n), q.upper(n), k * per);
    let cell = (side / per as f64).powi(n as i32 + 1);
    let terms: Vec<f64> = (0..d.tubes.len())
        .into_par_iter()
        .map(|i| {
            let tube = &d.tubes[i];
            let w = d.packet(i);
            let vals = w.eval_tensor_times(&axes, &times);
            let m = k * per;
            let nq = k.pow(n as u32 + 1);
            let mut acc = vec![0.0; nq];
            for (ti, slice) in vals.iter().enumerate() {
                for (si, v) in slice.iter().enumerate() {
                    let mut rem = si;
                    let mut qi = ti / per;
                    let mut idx = vec![0usize; n];
                    for a in (0..n).rev() {
                        idx[a] = rem % m;
                        rem /= m;
                    }
                    for a in 0..n {
                        qi = qi * k + idx[a] / per;
                    }
                    acc[qi] += v.norm_sqr() * cell;
                }
            }
            let mut best: f64 = 0.0;
            let mut centre = vec![0.0; n];
            for (qi, e) in acc.iter().enumerate() {
                if *e == 0.0 {
                    continue;
                }
                let mut rem = qi;
                let mut cidx = vec![0usize; n + 1];
                for a in (0..=n).rev() {
                    cidx[a] = rem % k;
                    rem /= k;
                }
                for a in 0..n {
                    centre[a] = q.lower(a) + (cidx[a + 1] as f64 + 0.5) * side;
                }
                let t = q.lower(n) + (cidx[0] as f64 + 0.5) * side;
                let weight = (1.0 + tube.offset_norm(&centre, t) / tube.width).powi(tube.decay as i32);
                best = best.max(weight * e);
            }
            best
        })
        .collect();
    let total: f64 = terms.iter().sum();
    let ratio = if mass == 0.0 { 0.0 } else { total / (r * mass) };
    QestReport { ratio, c: d.params.c, r, terms }
}

/// (Σ_{q₀} M(Σ_T m_{q₀,T} f_T))^{1/2} / M(f)^{1/2} − 1, with the Gram matrix
/// of the packets; `m[q0][T]`.
pub fn mass_redistribution_check(d: &PacketDecomposition, m: &[Vec<f64>]) -> Result<f64> {
    let op = "wavepacket::mass_redistribution_check";
    let nt = d.tubes.len();
    if m.iter().any(|row| row.len() != nt) {
        return Err(Error::Input { op, detail: "coefficient rows must have one entry per tube".into() });
    }
    for t in 0..nt {
        let s: f64 = m.iter().map(|row| row[t]).sum();
        if (s - 1.0).abs() > 1e-12 || m.iter().any(|row| !(row[t] >= 0.0)) {
            return Err(Error::Input { op, detail: format!("column {t} sums to {s} or has negative entries") });
        }
    }
    let mass = d.source.mass();
    if mass == 0.0 {
        return Ok(0.0);
    }
    let g = d.gram()?;
    let total: f64 = m
        .par_iter()
        .map(|row| {
            let mut s = 0.0;
            for i in 0..nt {
                if row[i] == 0.0 {
                    continue;
                }
                let gi = &g[i * nt..(i + 1) * nt];
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..nt {
                    if row[j] != 0.0 {
                        acc += gi[j] * row[j];
                    }
                }
                s += row[i] * acc.re;
            }
            s
        })
        .sum();
    Ok((total / mass).sqrt() - 1.0)
}

/// C_fit = ((1 + Neg/M)^{1/2} − 1)/c with Neg = Σ_{T≠T'} max(0, −Re⟨f_T, f_T'⟩),
/// which bounds mass_redistribution_check for every admissible m.
pub fn fit_constant(d: &PacketDecomposition) -> Result<f64> {
    let mass = d.source.mass();
    if mass == 0.0 {
        return Ok(0.0);
    }
    let g = d.gram()?;
    let nt = d.tubes.len();
    let mut neg = 0.0;
    for i in 0..nt {
        for j in 0..nt {
            if i != j {
                neg += (-g[i * nt + j].re).max(0.0);
            }
        }
    }
    Ok(((1.0 + neg / mass).sqrt() - 1.0) / d.params.c)
}

/// max_T ‖|x − x_T + t∇φ(ξ_T)| f_T(t)‖₂ / (c⁻²r ‖f‖₂) on the spatial grid, with
/// offsets taken modulo the window.
pub fn commutator_constant(d: &PacketDecomposition, t: f64) -> f64 {
    let mass = d.source.mass();
    if mass == 0.0 {
        return 0.0;
    }
    let g = d.source.grid();
    let n = g.n;
    let period = g.period();
    let axes: Vec<Vec<f64>> = (0..n).map(|a| (0..g.resolution).map(|j| g.x(a, j)).collect()).collect();
    let dxn = g.dx().powi(n as i32);
    let worst = (0..d.tubes.len())
        .into_par_iter()
        .map(|i| {
            let tube = &d.tubes[i];
            let vals = d.packet(i).eval_tensor(&axes, t);
            let mut s = 0.0;
            for (si, v) in vals.iter().enumerate() {
                let mut rem = si;
                let mut r2 = 0.0;
                for a in (0..n).rev() {
                    let x = axes[a][rem % g.resolution];
                    rem /= g.resolution;
                    let mut off = x - tube.x[a] - tube.velocity[a] * t;
                    off -= period * (off / period).round();
                    r2 += off * off;
                }
                s += r2 * v.norm_sqr();
            }
            (s * dxn).sqrt()
        })
        .reduce(|| 0.0, f64::max);
    worst / (d.params.width * mass.sqrt())
}

/// CSV rows (x_T…, ξ_T…, mass, spectral diameter) for every tube.
pub fn write_inventory<W: Write>(out: &mut W, d: &PacketDecomposition) -> std::io::Result<()> {
    let n = d.source.dim();
    let mut head: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    head.extend((0..n).map(|a| format!("xi{a}")));
    head.push("mass".into());
    head.push("spectral_diameter".into());
    writeln!(out, "{}", head.join(","))?;
    let rows: Vec<(f64, f64)> = (0..d.tubes.len())
        .into_par_iter()
        .map(|i| {
            let w = d.packet(i);
            (w.mass(), w.support_diameter())
        })
        .collect();
    for (t, (m, diam)) in d.tubes.iter().zip(rows) {
        let mut cols: Vec<String> = t.x.iter().chain(&t.xi).map(|v| format!("{v}")).collect();
        cols.push(format!("{m:.12e}"));
        cols.push(format!("{diam:.6e}"));
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
