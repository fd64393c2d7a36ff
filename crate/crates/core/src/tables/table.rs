use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use super::partition::{interior, CubePartition, InteriorMask};
use crate::freewave::{CubeRegion, WaveState};
use crate::wavepacket::{decompose, PacketDecomposition};
use crate::{Error, Result};

/// Table of depth C₀ for φ relative to ψ on Q: Φ^{(q₀)} = Σ_T a_{q₀,T} φ_T with
/// a_{q₀,T} = m_{q₀,T}/m_T. Components are synthesised on demand.
#[derive(Debug)]
pub struct Table {
    pub partition: CubePartition,
    pub decomposition: PacketDecomposition,
    /// Raw m_{q₀,T}, row per child cube.
    pub raw: Vec<Vec<f64>>,
    /// Normalised a_{q₀,T}; columns sum to 1.
    pub coefficients: Vec<Vec<f64>>,
    pub degenerate: Vec<bool>,
    pub m_sub: usize,
    psi_mass: f64,
}

/// Quadrature nodes of Q: `m_sub` midpoints per child axis.
fn nodes(q: &CubeRegion, depth: u32, m_sub: usize) -> InteriorMask {
    interior(q, 0.0, depth, m_sub)
}

/// Σ_k |w_k|² at the nodes of `mask`, time slowest.
fn energy(waves: &[WaveState], mask: &InteriorMask) -> Vec<f64> {
    let n = mask.nodes.len() - 1;
    let axes = &mask.nodes[..n];
    let times = &mask.nodes[n];
    let mut e = vec![0.0; mask.len()];
    for w in waves {
        let vals = w.eval_tensor_times(axes, times);
        for (dst, v) in e.iter_mut().zip(vals.iter().flatten()) {
            *dst += v.norm_sqr();
        }
    }
    e
}

/// Worst pairwise cross term and the (q', q'') pair attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossTermMax {
    pub value: f64,
    pub pair: (usize, usize),
}

/// Builds the table with ψ given as one or more components. The frequency
/// cells ψ_{ξ₂} are the sharp Voronoi pieces of each component.
pub fn build_table(
    decomposition: PacketDecomposition,
    psi: &[WaveState],
    c0: u32,
    m_sub: usize,
) -> Result<Table> {
    let op = "tables::build_table";
    let q = decomposition.cube.clone();
    let partition = CubePartition::new(q.clone(), c0);
    let nq = partition.len();
    let mask = nodes(&q, c0, m_sub);
    let mut cells = Vec::new();
    let mut psi_mass = 0.0;
    for w in psi {
        psi_mass += w.mass();
        if w.mass() == 0.0 {
            continue;
        }
        let d = decompose(w, &q, decomposition.params.c, decomposition.params.decay, 1)
            .map_err(|e| Error::Precondition { op, detail: format!("ψ frequency cells unavailable: {e}") })?;
        cells.extend(d.pieces);
    }
    let e = energy(&cells, &mask);
    let n = q.space_dim();
    let per = partition.per_axis() * m_sub;
    let nt = decomposition.tubes.len();
    let raw_t: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|ti| {
            let tube = &decomposition.tubes[ti];
            let mut row = vec![0.0; nq];
            let mut x = vec![0.0; n];
            let mut cell = vec![0usize; n + 1];
            for (flat, ev) in e.iter().enumerate() {
                if *ev == 0.0 {
                    continue;
                }
                let mut rem = flat;
                for a in (0..n).rev() {
                    let i = rem % per;
                    x[a] = mask.nodes[a][i];
                    cell[a] = i / m_sub;
                    rem /= per;
                }
                let t = mask.nodes[n][rem];
                cell[n] = rem / m_sub;
                let chi = tube.cutoff(&x, t);
                row[partition.child_index(&cell)] += chi * chi * ev * mask.cell_volume;
            }
            row
        })
        .collect();
    let mut raw = vec![vec![0.0; nt]; nq];
    let mut coefficients = vec![vec![0.0; nt]; nq];
    let mut degenerate = vec![false; nt];
    let uniform = 1.0 / nq as f64;
    for t in 0..nt {
        let mt: f64 = raw_t[t].iter().sum();
        let degen = !(mt > 1e-14 * psi_mass);
        degenerate[t] = degen;
        for qi in 0..nq {
            raw[qi][t] = raw_t[t][qi];
            coefficients[qi][t] = if degen { uniform } else { raw_t[t][qi] / mt };
        }
    }
    Ok(Table { partition, decomposition, raw, coefficients, degenerate, m_sub, psi_mass })
}

/// Decomposes φ on Q (N = 10, three Ω nodes per axis) and builds the table.
pub fn build_table_from_waves(phi: &WaveState, psi: &[WaveState], q: &CubeRegion, c: f64, c0: u32) -> Result<Table> {
    let d = decompose(phi, q, c, 10, 3)?;
    build_table(d, psi, c0, 2)
}

impl Table {
    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|d| **d).count()
    }

    pub fn psi_mass(&self) -> f64 {
        self.psi_mass
    }

    /// Φ^{(q)} as a wave.
    pub fn component(&self, q: usize) -> WaveState {
        let d = &self.decomposition;
        let packets: Vec<(usize, WaveState)> = (0..d.tubes.len())
            .filter(|&t| self.coefficients[q][t] != 0.0)
            .map(|t| (t, d.packet(t)))
            .collect();
        if packets.is_empty() {
            return d.source.scaled(Complex64::new(0.0, 0.0));
        }
        let terms: Vec<(Complex64, &WaveState)> =
            packets.iter().map(|(t, w)| (Complex64::new(self.coefficients[q][*t], 0.0), w)).collect();
        WaveState::combination(&terms).expect("same grid")
    }

    /// Σ_q Φ^{(q)} = Σ_T (Σ_q a_{q,T}) φ_T.
    pub fn sum_components(&self) -> WaveState {
        let d = &self.decomposition;
        let packets = d.packets();
        let weights: Vec<f64> = (0..d.tubes.len()).map(|t| self.coefficients.iter().map(|row| row[t]).sum()).collect();
        let terms: Vec<(Complex64, &WaveState)> =
            packets.iter().zip(&weights).map(|(w, a)| (Complex64::new(*a, 0.0), w)).collect();
        if terms.is_empty() {
            return d.source.scaled(Complex64::new(0.0, 0.0));
        }
        WaveState::combination(&terms).expect("same grid")
    }

    /// ‖φ − Σ_q Φ^{(q)}‖ / ‖φ‖.
    pub fn reconstruction_residual(&self) -> f64 {
        let m = self.decomposition.source.mass();
        if m == 0.0 {
            return 0.0;
        }
        (self.sum_components().distance_sqr(&self.decomposition.source) / m).sqrt()
    }

    /// M(Φ) = Σ_q M(Φ^{(q)}) through the packet Gram matrix.
    pub fn mass(&self) -> Result<f64> {
        let g = self.decomposition.gram()?;
        let nt = self.decomposition.tubes.len();
        Ok(self
            .coefficients
            .par_iter()
            .map(|a| {
                let mut s = 0.0;
                for i in 0..nt {
                    if a[i] == 0.0 {
                        continue;
                    }
                    for j in 0..nt {
                        s += a[i] * a[j] * g[i * nt + j].re;
                    }
                }
                s
            })
            .sum())
    }

    /// Neg/(c·M(φ)), with Neg the summed negative off-diagonal Gram entries, so
    /// that M(Φ) ≤ (1 + c·C)M(φ) for every table.
    pub fn mass_fit_constant(&self) -> Result<f64> {
        let m = self.decomposition.source.mass();
        if m == 0.0 {
            return Ok(0.0);
        }
        let g = self.decomposition.gram()?;
        let nt = self.decomposition.tubes.len();
        let mut neg = 0.0;
        for i in 0..nt {
            for j in 0..nt {
                if i != j {
                    neg += (-g[i * nt + j].re).max(0.0);
                }
            }
        }
        Ok(neg / (self.decomposition.params.c * m))
    }

    /// ‖Φ^{(q')}ψ‖_{L²((1−c)q'')} / (M(φ)M(ψ))^{1/2} on `m` midpoints per axis
    /// of the shrunken cube.
    pub fn cross_term_norm(&self, psi: &WaveState, q1: usize, q2: usize, c: f64, m: usize) -> Result<f64> {
        let op = "tables::cross_term_norm";
        if q1 == q2 {
            return Err(Error::Usage { op, detail: "cross terms need distinct cubes".into() });
        }
        if q1 >= self.len() || q2 >= self.len() {
            return Err(Error::Input { op, detail: "cube index out of range".into() });
        }
        let norm = (self.decomposition.source.mass() * psi.mass()).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let target = self.partition.child(q2).dilated(1.0 - c);
        let mask = interior(&target, 0.0, 0, m);
        let n = target.space_dim();
        let phi = self.component(q1).eval_tensor_times(&mask.nodes[..n], &mask.nodes[n]);
        let psi = psi.eval_tensor_times(&mask.nodes[..n], &mask.nodes[n]);
        let s: f64 = phi.iter().flatten().zip(psi.iter().flatten()).map(|(a, b)| (a * b).norm_sqr()).sum();
        Ok((s * mask.cell_volume).sqrt() / norm)
    }

    /// (Σ_{q''} Σ_{q'≠q''} ‖Φ^{(q')}ψ‖²_{L²((1−c)q'')})^{1/2} / (M(φ)M(ψ))^{1/2},
    /// using the table's nodes weighted by their overlap with the interiors.
    pub fn cross_term_aggregate(&self, psi: &[WaveState], c: f64) -> f64 {
        let mphi = self.decomposition.source.mass();
        let mpsi: f64 = psi.iter().map(|w| w.mass()).sum();
        if mphi == 0.0 || mpsi == 0.0 {
            return 0.0;
        }
        let q = &self.decomposition.cube;
        let mask = interior(q, c, self.partition.depth, self.m_sub);
        let n = q.space_dim();
        let axes = &mask.nodes[..n];
        let times = &mask.nodes[n];
        let e = energy(psi, &mask);
        let d = &self.decomposition;
        let nt = d.tubes.len();
        let nq = self.len();
        let fields: Vec<Vec<Complex64>> = (0..nt)
            .into_par_iter()
            .map(|t| d.packet(t).eval_tensor_times(axes, times).concat())
            .collect();
        let mut b = vec![0.0; nt * nt];
        for row in &self.coefficients {
            for i in 0..nt {
                if row[i] == 0.0 {
                    continue;
                }
                for j in 0..nt {
                    b[i * nt + j] += row[i] * row[j];
                }
            }
        }
        let per = self.partition.per_axis() * self.m_sub;
        let m_sub = self.m_sub;
        let total: f64 = (0..mask.len())
            .into_par_iter()
            .map(|flat| {
                let w = mask.fraction(flat);
                if w == 0.0 || e[flat] == 0.0 {
                    return 0.0;
                }
                let v: Vec<Complex64> = fields.iter().map(|f| f[flat]).collect();
                let mut quad = 0.0;
                for i in 0..nt {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..nt {
                        acc += v[j] * b[i * nt + j];
                    }
                    quad += (v[i].conj() * acc).re;
                }
                let mut rem = flat;
                let mut cell = vec![0usize; n + 1];
                for a in (0..n).rev() {
                    cell[a] = (rem % per) / m_sub;
                    rem /= per;
                }
                cell[n] = rem / m_sub;
                let own = self.partition.child_index(&cell);
                debug_assert!(own < nq);
                let mut f = Complex64::new(0.0, 0.0);
                for i in 0..nt {
                    f += v[i] * self.coefficients[own][i];
                }
                (quad - f.norm_sqr()).max(0.0) * e[flat] * w
            })
            .sum();
        (total * mask.cell_volume / (mphi * mpsi)).sqrt()
    }

    /// Largest normalised pairwise cross term max_{q'≠q''} ‖Φ^{(q')}ψ‖_{L²((1−c)q'')}
    /// over the table's nodes.
    pub fn cross_term_max(&self, psi: &[WaveState], c: f64) -> CrossTermMax {
        let mphi = self.decomposition.source.mass();
        let mpsi: f64 = psi.iter().map(|w| w.mass()).sum();
        let nq = self.len();
        if mphi == 0.0 || mpsi == 0.0 {
            return CrossTermMax { value: 0.0, pair: (0, 1.min(nq - 1)) };
        }
        let q = &self.decomposition.cube;
        let mask = interior(q, c, self.partition.depth, self.m_sub);
        let n = q.space_dim();
        let axes = &mask.nodes[..n];
        let times = &mask.nodes[n];
        let e = energy(psi, &mask);
        let d = &self.decomposition;
        let nt = d.tubes.len();
        let fields: Vec<Vec<Complex64>> = (0..nt)
            .into_par_iter()
            .map(|t| d.packet(t).eval_tensor_times(axes, times).concat())
            .collect();
        let per = self.partition.per_axis() * self.m_sub;
        let mut owned = vec![Vec::new(); nq];
        for flat in 0..mask.len() {
            if e[flat] == 0.0 || mask.fraction(flat) == 0.0 {
                continue;
            }
            let mut rem = flat;
            let mut cell = vec![0usize; n + 1];
            for a in (0..n).rev() {
                cell[a] = (rem % per) / self.m_sub;
                rem /= per;
            }
            cell[n] = rem / self.m_sub;
            owned[self.partition.child_index(&cell)].push(flat);
        }
        let (value, pair) = (0..nq)
            .into_par_iter()
            .map(|q2| {
                let mut acc = vec![0.0; nq];
                for &flat in &owned[q2] {
                    let weight = e[flat] * mask.fraction(flat);
                    for (q1, a) in self.coefficients.iter().enumerate() {
                        if q1 == q2 {
                            continue;
                        }
                        let mut f = Complex64::new(0.0, 0.0);
                        for (ai, field) in a.iter().zip(&fields) {
                            f += field[flat] * *ai;
                        }
                        acc[q1] += f.norm_sqr() * weight;
                    }
                }
                let (q1, v) = acc
                    .iter()
                    .enumerate()
                    .filter(|(q1, _)| *q1 != q2)
                    .fold((0, -1.0), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
                (v, (q1, q2))
            })
            .reduce(|| (-1.0, (0, 0)), |a, b| if b.0 > a.0 { b } else { a });
        CrossTermMax { value: (value.max(0.0) * mask.cell_volume / (mphi * mpsi)).sqrt(), pair }
    }

    /// CSV rows (q₀ index, component mass, max coefficient, degenerate columns).
    pub fn write_summary<W: Write>(&self, out: &mut W) -> Result<()> {
        let io = |e: std::io::Error| Error::Input { op: "tables::summary", detail: e.to_string() };
        let g = self.decomposition.gram()?;
        let nt = self.decomposition.tubes.len();
        writeln!(out, "q0,component_mass,max_coefficient,degenerate_columns").map_err(io)?;
        let degen = self.degenerate_count();
        for (qi, a) in self.coefficients.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..nt {
                for j in 0..nt {
                    s += a[i] * a[j] * g[i * nt + j].re;
                }
            }
            let mx = a.iter().cloned().fold(0.0, f64::max);
            writeln!(out, "{qi},{s:.12e},{mx:.12e},{degen}").map_err(io)?;
        }
        Ok(())
    }
}
