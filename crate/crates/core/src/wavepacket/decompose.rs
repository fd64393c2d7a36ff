use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::bump::BumpProfile;
use crate::freewave::{CubeRegion, WaveState};
use crate::quad::{bump, gauss_legendre};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Scales of a decomposition at scale R.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PacketParams {
    pub scale: f64,
    pub r: f64,
    pub c: f64,
    pub decay: u32,
    pub n_omega: usize,
    /// Spatial lattice spacing c⁻²r, also the tube width.
    pub width: f64,
    /// Number of spatial lattice points per window period.
    pub period_cells: usize,
    pub omega_radius: f64,
}

/// The dyadic r = 2^{-J}R in [R^{1/2}, 2R^{1/2}).
pub fn packet_radius(scale: f64) -> f64 {
    let j = (0.5 * scale.log2()).floor();
    scale / 2f64.powf(j)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tube {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub velocity: Vec<f64>,
    pub width: f64,
    pub decay: u32,
    pub piece: usize,
    pub cell: Vec<i64>,
}

impl Tube {
    /// |x − x_T + ∇φ(ξ_T)t|.
    pub fn offset_norm(&self, x: &[f64], t: f64) -> f64 {
        x.iter()
            .zip(&self.x)
            .zip(&self.velocity)
            .map(|((x, xt), v)| (x - xt - v * t).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// χ̃_T(x, t) = (1 + |x − x_T + ∇φ(ξ_T)t| / (c⁻²r))^{−N}.
    pub fn cutoff(&self, x: &[f64], t: f64) -> f64 {
        (1.0 + self.offset_norm(x, t) / self.width).powi(-(self.decay as i32))
    }

    /// Distance from the tube axis to the spatial slices of `q`, minimised
    /// over the time span of `q`.
    pub fn distance_to(&self, q: &CubeRegion) -> f64 {
        let n = q.space_dim();
        let (t0, t1) = (q.lower(n), q.upper(n));
        (0..=64)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / 64.0;
                (0..n)
                    .map(|a| {
                        let p = self.x[a] + self.velocity[a] * t;
                        (q.lower(a) - p).max(p - q.upper(a)).max(0.0).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Frequency pieces f̂·∫χ_{Ω(A_ξ)}dΩ of a wave and the tubes built from them.
/// Packets are synthesised on demand.
#[derive(Debug)]
pub struct PacketDecomposition {
    pub params: PacketParams,
    pub cube: CubeRegion,
    pub source: WaveState,
    pub lattice: Vec<Vec<f64>>,
    pub pieces: Vec<WaveState>,
    pub piece_lattice: Vec<usize>,
    pub tubes: Vec<Tube>,
    profile: BumpProfile,
    kernel_hat: Vec<f64>,
    omega_nodes: Vec<Vec<f64>>,
    omega_weights: Vec<f64>,
    gram: OnceLock<Vec<Complex64>>,
}

/// Splits `f` into packets f_T adapted to the cube `q` of side R.
pub fn decompose(f: &WaveState, q: &CubeRegion, c: f64, decay: u32, n_omega: usize) -> Result<PacketDecomposition> {
    let op = "wavepacket::decompose";
    let n = f.dim();
    let scale = q.effective_side();
    if q.space_dim() != n {
        return Err(Error::Input { op, detail: "cube dimension mismatch".into() });
    }
    if !(scale > 1.0) {
        return Err(Error::Parameter { op, detail: format!("scale R = {scale} must exceed 1") });
    }
    let lo = 0.5 * scale.powf(-0.25);
    if !(c >= lo * (1.0 - 1e-12) && c <= 0.25) {
        return Err(Error::Parameter { op, detail: format!("c = {c} outside [{lo:.4}, 0.25]") });
    }
    if n_omega == 0 {
        return Err(Error::Parameter { op, detail: "n_omega must be positive".into() });
    }
    let r = packet_radius(scale);
    let width = r / (c * c);
    let g = f.grid().clone();
    let ratio = g.period() / width;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio.round() < 1.0 {
        return Err(Error::Parameter {
            op,
            detail: format!("window {:.4} is not a whole multiple of the tube width {width:.4}", g.period()),
        });
    }
    let period_cells = ratio.round() as usize;
    if 1.0 / r < 2.0 * g.spacing {
        return Err(Error::Resolution { op, detail: format!("spacing {:.3e} does not resolve cells of side 1/{r}", g.spacing) });
    }
    let profile = BumpProfile::new(n, 6.0);
    let kmax = (profile.spectral_radius() * period_cells as f64).ceil() as usize;
    let kernel_hat: Vec<f64> =
        (0..=kmax).map(|k| profile.eta_hat_1d(k as f64 / period_cells as f64) / period_cells as f64).collect();

    let omega_radius = 0.5 / r;
    let (gx, gw) = gauss_legendre(n_omega);
    let mut omega_nodes = Vec::new();
    let mut omega_weights = Vec::new();
    for idx in 0..n_omega.pow(n as u32) {
        let mut rem = idx;
        let mut node = vec![0.0; n];
        let mut w = 1.0;
        for a in (0..n).rev() {
            let i = rem % n_omega;
            rem /= n_omega;
            node[a] = omega_radius * gx[i];
            w *= gw[i];
        }
        let norm = node.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = w * bump(norm / omega_radius, 1.0);
        if w > 0.0 {
            omega_nodes.push(node);
            omega_weights.push(w);
        }
    }
    if omega_weights.is_empty() {
        omega_nodes.push(vec![0.0; n]);
        omega_weights.push(1.0);
    }
    let total: f64 = omega_weights.iter().sum();
    omega_weights.iter_mut().for_each(|w| *w /= total);

    let surface = f.surface().clone();
    let dt = surface.enlarged_domain().clone();
    let (blo, bhi) = dt.bounding_box();
    let mlo: Vec<i64> = blo.iter().map(|v| (v * r).floor() as i64).collect();
    let mhi: Vec<i64> = bhi.iter().map(|v| (v * r).ceil() as i64).collect();
    let mut lattice = Vec::new();
    let mut m = mlo.clone();
    'outer: loop {
        let p: Vec<f64> = m.iter().map(|&k| k as f64 / r).collect();
        if dt.contains(&p) {
            lattice.push(p);
        }
        for a in (0..n).rev() {
            m[a] += 1;
            if m[a] <= mhi[a] {
                continue 'outer;
            }
            m[a] = mlo[a];
        }
        break;
    }
    if lattice.is_empty() {
        return Err(Error::Resolution { op, detail: "no lattice frequencies in the enlarged domain".into() });
    }

    let source = f.at_time(0.0).trimmed();
    let amps = source.amplitudes();
    let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lattice.len()];
    let mut xi = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    for (i, a) in amps.iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        source.xi_of(i, &mut xi);
        for (node, w) in omega_nodes.iter().zip(&omega_weights) {
            for k in 0..n {
                shifted[k] = xi[k] - node[k];
            }
            let cell = nearest(&lattice, &shifted);
            match weights[cell].last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => weights[cell].push((i, *w)),
            }
        }
    }

    let mut pieces = Vec::new();
    let mut piece_lattice = Vec::new();
    for (cell, list) in weights.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let mut data = vec![ZERO; amps.len()];
        for &(i, w) in list {
            data[i] = amps[i] * w;
        }
        let piece = WaveState::from_parts(
            surface.clone(),
            g.clone(),
            source.offset().to_vec(),
            source.shape().to_vec(),
            data,
            0.0,
        )?
        .trimmed();
        if piece.amplitudes().is_empty() {
            continue;
        }
        pieces.push(piece);
        piece_lattice.push(cell);
    }

    let x0: Vec<i64> = (0..n).map(|a| (g.x_origin[a] / width - 1e-9).ceil() as i64).collect();
    let mut tubes = Vec::new();
    let mut grad = vec![0.0; n];
    for (p, &cell) in piece_lattice.iter().enumerate() {
        let xi_t = lattice[cell].clone();
        surface.grad_into(&xi_t, &mut grad);
        for idx in 0..period_cells.pow(n as u32) {
            let mut rem = idx;
            let mut j = vec![0i64; n];
            for a in (0..n).rev() {
                j[a] = x0[a] + (rem % period_cells) as i64;
                rem /= period_cells;
            }
            tubes.push(Tube {
                x: j.iter().map(|&k| k as f64 * width).collect(),
                xi: xi_t.clone(),
                velocity: grad.iter().map(|v| -v).collect(),
                width,
                decay,
                piece: p,
                cell: j,
            });
        }
    }

    Ok(PacketDecomposition {
        params: PacketParams { scale, r, c, decay, n_omega, width, period_cells, omega_radius },
        cube: q.clone(),
        source,
        lattice,
        pieces,
        piece_lattice,
        tubes,
        profile,
        kernel_hat,
        omega_nodes,
        omega_weights,
        gram: OnceLock::new(),
    })
}

/// Index of the nearest lattice point, ties going to the lexicographically
/// smallest (the list is sorted).
fn nearest(lattice: &[Vec<f64>], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, l) in lattice.iter().enumerate() {
        let d: f64 = l.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best_d - 1e-14 {
            best = i;
            best_d = d;
        }
    }
    best
}

impl PacketDecomposition {
    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    pub fn omega(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.omega_nodes, &self.omega_weights)
    }

    /// Weight ∫χ_{Ω(A_ξ)}(ξ)dΩ of lattice cell `cell` at frequency ξ.
    pub fn cell_weight(&self, cell: usize, xi: &[f64]) -> f64 {
        let n = xi.len();
        let mut s = 0.0;
        let mut shifted = vec![0.0; n];
        for (node, w) in self.omega_nodes.iter().zip(&self.omega_weights) {
            for k in 0..n {
                shifted[k] = xi[k] - node[k];
            }
            if nearest(&self.lattice, &shifted) == cell {
                s += w;
            }
        }
        s
    }

    /// f_T at time 0: the piece of T convolved with the coefficients of
    /// η^{x_T} on the window.
    pub fn packet(&self, tube: usize) -> WaveState {
        let t = &self.tubes[tube];
        let piece = &self.pieces[t.piece];
        let g = piece.grid();
        let n = piece.dim();
        let kmax = self.kernel_hat.len() - 1;
        let kernels: Vec<Vec<Complex64>> = (0..n)
            .map(|a| {
                (0..=2 * kmax)
                    .map(|i| {
                        let k = i as f64 - kmax as f64;
                        let h = self.kernel_hat[(i as i64 - kmax as i64).unsigned_abs() as usize];
                        Complex64::from_polar(h, -k * g.spacing * t.x[a])
                    })
                    .collect()
            })
            .collect();
        let mut shape = piece.shape().to_vec();
        let mut data = piece.amplitudes().to_vec();
        for a in 0..n {
            let s = shape[a];
            let ns = s + 2 * kmax;
            let inner: usize = shape[a + 1..].iter().product();
            let outer: usize = shape[..a].iter().product();
            let mut next = vec![ZERO; outer * ns * inner];
            let ker = &kernels[a];
            for o in 0..outer {
                for k in 0..s {
                    let src = &data[(o * s + k) * inner..(o * s + k + 1) * inner];
                    if src.iter().all(|v| *v == ZERO) {
                        continue;
                    }
                    for (d, kv) in ker.iter().enumerate() {
                        let dst_row = o * ns + k + d;
                        let dst = &mut next[dst_row * inner..(dst_row + 1) * inner];
                        for (x, y) in dst.iter_mut().zip(src) {
                            *x += kv * y;
                        }
                    }
                }
            }
            data = next;
            shape[a] = ns;
        }
        let offset: Vec<i64> = piece.offset().iter().map(|o| o - kmax as i64).collect();
        WaveState::from_parts(piece.surface().clone(), g.clone(), offset, shape, data, 0.0).expect("consistent box")
    }

    /// All packets, computed in parallel.
    pub fn packets(&self) -> Vec<WaveState> {
        (0..self.tubes.len()).into_par_iter().map(|i| self.packet(i)).collect()
    }

    /// Σ_T f_T.
    pub fn sum(&self) -> WaveState {
        let parts: Vec<WaveState> = (0..self.pieces.len())
            .into_par_iter()
            .map(|p| {
                let ids: Vec<usize> = (0..self.tubes.len()).filter(|&i| self.tubes[i].piece == p).collect();
                let packets: Vec<WaveState> = ids.iter().map(|&i| self.packet(i)).collect();
                let terms: Vec<(Complex64, &WaveState)> = packets.iter().map(|w| (Complex64::new(1.0, 0.0), w)).collect();
                WaveState::combination(&terms).expect("same grid")
            })
            .collect();
        if parts.is_empty() {
            return self.source.scaled(ZERO);
        }
        let terms: Vec<(Complex64, &WaveState)> = parts.iter().map(|w| (Complex64::new(1.0, 0.0), w)).collect();
        WaveState::combination(&terms).expect("same grid")
    }

    /// Gram matrix ⟨f_T, f_T'⟩ at time 0, row-major over tubes.
    pub fn gram(&self) -> Result<&[Complex64]> {
        let m = self.tubes.len();
        if m > 8192 {
            return Err(Error::Parameter { op: "wavepacket::gram", detail: format!("{m} tubes exceed the dense Gram limit") });
        }
        if self.gram.get().is_none() {
            let packets = self.packets();
            let boxes: Vec<(Vec<i64>, Vec<i64>)> = packets
                .iter()
                .map(|w| {
                    let lo = w.offset().to_vec();
                    let hi = lo.iter().zip(w.shape()).map(|(o, s)| o + *s as i64).collect();
                    (lo, hi)
                })
                .collect();
            let rows: Vec<Vec<Complex64>> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let mut row = vec![ZERO; m];
                    for j in 0..m {
                        let overlap = (0..boxes[i].0.len())
                            .all(|a| boxes[i].0[a] < boxes[j].1[a] && boxes[j].0[a] < boxes[i].1[a]);
                        if overlap {
                            row[j] = packets[i].inner(&packets[j]);
                        }
                    }
                    row
                })
                .collect();
            let _ = self.gram.set(rows.concat());
        }
        Ok(self.gram.get().expect("set above"))
    }
}
