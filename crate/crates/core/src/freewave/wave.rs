use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::fft;
use super::grid::FrequencyGrid;
use crate::geometry::SurfaceSpec;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Spectral samples φ̂(ξ, t) of a free wave on a box of the lattice
/// ξ₀ + Δξℤⁿ. The box may extend beyond the grid's Nⁿ window; only the
/// FFT path requires it to fit.
///
/// The physical field is φ(x, t) = (2π)^{-n/2} Σ_ξ φ̂(ξ, t) e^{ix·ξ} Δξⁿ, so
/// that Σ_x |φ|² Δxⁿ = Σ_ξ |φ̂|² Δξⁿ = M(φ) exactly on the dual grid.
#[derive(Clone, Debug)]
pub struct WaveState {
    grid: Arc<FrequencyGrid>,
    surface: Arc<SurfaceSpec>,
    offset: Vec<i64>,
    shape: Vec<usize>,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveState {
    pub fn zeros(surface: Arc<SurfaceSpec>, grid: Arc<FrequencyGrid>) -> Self {
        let n = grid.n;
        let shape = vec![grid.resolution; n];
        let len = grid.len();
        WaveState { grid, surface, offset: vec![0; n], shape, amplitudes: vec![ZERO; len], time: 0.0 }
    }

    /// A state on an explicit box with amplitudes given at time `time`.
    pub fn from_parts(
        surface: Arc<SurfaceSpec>,
        grid: Arc<FrequencyGrid>,
        offset: Vec<i64>,
        shape: Vec<usize>,
        amplitudes: Vec<Complex64>,
        time: f64,
    ) -> Result<Self> {
        if offset.len() != grid.n || shape.len() != grid.n || shape.iter().product::<usize>() != amplitudes.len() {
            return Err(Error::Input { op: "freewave::wave", detail: "box and amplitudes disagree".into() });
        }
        Ok(WaveState { grid, surface, offset, shape, amplitudes, time })
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }
    pub fn surface(&self) -> &Arc<SurfaceSpec> {
        &self.surface
    }
    pub fn offset(&self) -> &[i64] {
        &self.offset
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn dim(&self) -> usize {
        self.grid.n
    }

    /// Lattice index of the i-th stored amplitude.
    pub fn index_of(&self, mut i: usize, out: &mut [i64]) {
        for a in (0..self.shape.len()).rev() {
            out[a] = self.offset[a] + (i % self.shape[a]) as i64;
            i /= self.shape[a];
        }
    }

    /// Frequency of the i-th stored amplitude.
    pub fn xi_of(&self, i: usize, out: &mut [f64]) {
        let mut rem = i;
        for a in (0..self.shape.len()).rev() {
            let k = self.offset[a] + (rem % self.shape[a]) as i64;
            rem /= self.shape[a];
            out[a] = self.grid.xi(a, k);
        }
    }

    /// Amplitude at a lattice index, zero outside the box.
    pub fn amplitude_at(&self, idx: &[i64]) -> Complex64 {
        let mut flat = 0usize;
        for a in 0..self.shape.len() {
            let k = idx[a] - self.offset[a];
            if k < 0 || k >= self.shape[a] as i64 {
                return ZERO;
            }
            flat = flat * self.shape[a] + k as usize;
        }
        self.amplitudes[flat]
    }

    pub fn mass(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    /// Distance from the spectral support to the complement of D̃;
    /// +∞ for the zero state.
    pub fn margin(&self) -> f64 {
        let mut xi = vec![0.0; self.dim()];
        let d = self.surface.enlarged_domain();
        let mut m = f64::INFINITY;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                self.xi_of(i, &mut xi);
                m = m.min(d.depth(&xi));
            }
        }
        m
    }

    /// φ(ξ) on the stored box.
    pub fn phases(&self) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim()];
        (0..self.amplitudes.len())
            .map(|i| {
                self.xi_of(i, &mut xi);
                self.surface.phi(&xi)
            })
            .collect()
    }

    /// Free evolution by time `t`: amplitudes multiplied by e^{itφ(ξ)}.
    pub fn evolve(&self, t: f64) -> WaveState {
        if t == 0.0 {
            return self.clone();
        }
        let ph = self.phases();
        let amplitudes = self.amplitudes.iter().zip(&ph).map(|(a, p)| a * Complex64::from_polar(1.0, t * p)).collect();
        WaveState { amplitudes, time: self.time + t, ..self.clone_box() }
    }

    /// The same wave at absolute time `t`.
    pub fn at_time(&self, t: f64) -> WaveState {
        self.evolve(t - self.time)
    }

    fn clone_box(&self) -> WaveState {
        WaveState {
            grid: self.grid.clone(),
            surface: self.surface.clone(),
            offset: self.offset.clone(),
            shape: self.shape.clone(),
            amplitudes: Vec::new(),
            time: self.time,
        }
    }

    pub fn scaled(&self, c: Complex64) -> WaveState {
        WaveState { amplitudes: self.amplitudes.iter().map(|a| a * c).collect(), ..self.clone_box() }
    }

    /// Σ a_k conj(b_k) Δξⁿ, with `other` brought to this state's time.
    pub fn inner(&self, other: &WaveState) -> Complex64 {
        let other = if (other.time - self.time).abs() > 0.0 { other.at_time(self.time) } else { other.clone() };
        let n = self.dim();
        let mut idx = vec![0i64; n];
        let mut s = ZERO;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            self.index_of(i, &mut idx);
            s += a * other.amplitude_at(&idx).conj();
        }
        s * self.grid.cell()
    }

    /// Linear combination Σ c_i w_i on the union of the boxes, at the time
    /// of the first term.
    pub fn combination(terms: &[(Complex64, &WaveState)]) -> Result<WaveState> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Input { op: "freewave::combination", detail: "no terms".into() })?
            .1;
        let n = first.dim();
        let mut lo = first.offset.clone();
        let mut hi: Vec<i64> = (0..n).map(|a| first.offset[a] + first.shape[a] as i64).collect();
        for (_, w) in terms {
            if !Arc::ptr_eq(&w.grid, &first.grid) && *w.grid != *first.grid {
                return Err(Error::Input { op: "freewave::combination", detail: "waves live on different grids".into() });
            }
            for a in 0..n {
                lo[a] = lo[a].min(w.offset[a]);
                hi[a] = hi[a].max(w.offset[a] + w.shape[a] as i64);
            }
        }
        let shape: Vec<usize> = (0..n).map(|a| (hi[a] - lo[a]) as usize).collect();
        let mut out = vec![ZERO; shape.iter().product()];
        let mut idx = vec![0i64; n];
        for (c, w) in terms {
            if *c == ZERO {
                continue;
            }
            let w = if w.time != first.time { w.at_time(first.time) } else { (*w).clone() };
            for (i, a) in w.amplitudes.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                w.index_of(i, &mut idx);
                let mut flat = 0usize;
                for d in 0..n {
                    flat = flat * shape[d] + (idx[d] - lo[d]) as usize;
                }
                out[flat] += c * a;
            }
        }
        Ok(WaveState {
            grid: first.grid.clone(),
            surface: first.surface.clone(),
            offset: lo,
            shape,
            amplitudes: out,
            time: first.time,
        })
    }

    /// ‖self − other‖² on the lattice at the time of `self`.
    pub fn distance_sqr(&self, other: &WaveState) -> f64 {
        let d = WaveState::combination(&[(Complex64::new(1.0, 0.0), self), (Complex64::new(-1.0, 0.0), other)])
            .expect("same lattice");
        d.mass()
    }

    /// Expands the stored box to the full Nⁿ grid window.
    pub fn to_full_grid(&self) -> Result<WaveState> {
        let n = self.dim();
        let size = self.grid.resolution;
        let mut out = vec![ZERO; self.grid.len()];
        let mut idx = vec![0i64; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            self.index_of(i, &mut idx);
            let mut flat = 0usize;
            for &k in idx.iter() {
                if k < 0 || k >= size as i64 {
                    if *a == ZERO {
                        flat = usize::MAX;
                        break;
                    }
                    return Err(Error::Coverage {
                        op: "freewave::physical_field",
                        detail: "spectral support extends beyond the grid window".into(),
                    });
                }
                flat = flat * size + k as usize;
            }
            if flat != usize::MAX {
                out[flat] = *a;
            }
        }
        Ok(WaveState { offset: vec![0; n], shape: vec![size; n], amplitudes: out, ..self.clone_box() })
    }

    /// The field at time `t` on the full spatial grid, by inverse FFT.
    pub fn physical_field(&self, t: f64) -> Result<SpatialField> {
        let full = self.to_full_grid()?.at_time(t);
        let g = &*self.grid;
        let n = g.n;
        let size = g.resolution;
        let dx = g.dx();
        let mut data = full.amplitudes;
        let mut idx = vec![0usize; n];
        for (i, v) in data.iter_mut().enumerate() {
            unravel(i, size, &mut idx);
            let phase: f64 = (0..n).map(|a| g.x_origin[a] * idx[a] as f64 * g.spacing).sum();
            *v *= Complex64::from_polar(1.0, phase);
        }
        fft::inverse_nd(&mut data, n, size);
        let norm = (2.0 * PI).powf(-(n as f64) / 2.0) * g.cell();
        for (i, v) in data.iter_mut().enumerate() {
            unravel(i, size, &mut idx);
            let phase: f64 = (0..n).map(|a| (g.x_origin[a] + idx[a] as f64 * dx) * g.origin[a]).sum();
            *v *= Complex64::from_polar(norm, phase);
        }
        Ok(SpatialField { grid: self.grid.clone(), time: t, values: data })
    }

    /// The field at time `t` on the tensor product of per-axis point lists,
    /// row-major with the last axis fastest.
    pub fn eval_tensor(&self, axes: &[Vec<f64>], t: f64) -> Vec<Complex64> {
        let ph = self.phases();
        self.eval_tensor_phased(axes, t, &ph)
    }

    /// As `eval_tensor` for several times, sharing the phase evaluation.
    pub fn eval_tensor_times(&self, axes: &[Vec<f64>], times: &[f64]) -> Vec<Vec<Complex64>> {
        let ph = self.phases();
        times.iter().map(|&t| self.eval_tensor_phased(axes, t, &ph)).collect()
    }

    pub(crate) fn eval_tensor_phased(&self, axes: &[Vec<f64>], t: f64, ph: &[f64]) -> Vec<Complex64> {
        let n = self.dim();
        let dt = t - self.time;
        let mut data: Vec<Complex64> = if dt == 0.0 {
            self.amplitudes.clone()
        } else {
            self.amplitudes.iter().zip(ph).map(|(a, p)| a * Complex64::from_polar(1.0, dt * p)).collect()
        };
        let mut dims = self.shape.clone();
        for axis in (0..n).rev() {
            let m = axes[axis].len();
            let s = dims[axis];
            let inner: usize = dims[axis + 1..].iter().product();
            let outer: usize = dims[..axis].iter().product();
            let table: Vec<Complex64> = axes[axis]
                .iter()
                .flat_map(|&x| {
                    (0..s).map(move |k| (x, k))
                })
                .map(|(x, k)| Complex64::from_polar(1.0, x * self.grid.xi(axis, self.offset[axis] + k as i64)))
                .collect();
            let mut next = vec![ZERO; outer * m * inner];
            for o in 0..outer {
                for j in 0..m {
                    let row = &table[j * s..(j + 1) * s];
                    let dst = &mut next[(o * m + j) * inner..(o * m + j + 1) * inner];
                    for (k, e) in row.iter().enumerate() {
                        let src = &data[(o * s + k) * inner..(o * s + k + 1) * inner];
                        if src.iter().all(|v| *v == ZERO) {
                            continue;
                        }
                        for (d, v) in dst.iter_mut().zip(src) {
                            *d += e * v;
                        }
                    }
                }
            }
            data = next;
            dims[axis] = m;
        }
        let norm = (2.0 * PI).powf(-(n as f64) / 2.0) * self.grid.cell();
        data.iter_mut().for_each(|v| *v *= norm);
        data
    }

    /// The same wave on the smallest box containing its nonzero amplitudes.
    pub fn trimmed(&self) -> WaveState {
        let n = self.dim();
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        let mut idx = vec![0i64; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a != ZERO {
                self.index_of(i, &mut idx);
                for d in 0..n {
                    lo[d] = lo[d].min(idx[d]);
                    hi[d] = hi[d].max(idx[d] + 1);
                }
            }
        }
        if lo[0] == i64::MAX {
            return WaveState { offset: vec![0; n], shape: vec![0; n], ..self.clone_box() };
        }
        let shape: Vec<usize> = (0..n).map(|d| (hi[d] - lo[d]) as usize).collect();
        let mut out = Vec::with_capacity(shape.iter().product());
        let mut local = vec![0usize; n];
        let total: usize = shape.iter().product();
        for i in 0..total {
            let mut rem = i;
            for d in (0..n).rev() {
                local[d] = rem % shape[d];
                rem /= shape[d];
            }
            for d in 0..n {
                idx[d] = lo[d] + local[d] as i64;
            }
            out.push(self.amplitude_at(&idx));
        }
        WaveState { offset: lo, shape, amplitudes: out, ..self.clone_box() }
    }

    /// Spectral diameter of the support (Euclidean, in frequency units).
    pub fn support_diameter(&self) -> f64 {
        let n = self.dim();
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        let mut idx = vec![0i64; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a != ZERO {
                self.index_of(i, &mut idx);
                for d in 0..n {
                    lo[d] = lo[d].min(idx[d]);
                    hi[d] = hi[d].max(idx[d]);
                }
            }
        }
        if lo[0] == i64::MAX {
            return 0.0;
        }
        (0..n).map(|d| ((hi[d] - lo[d]) as f64 * self.grid.spacing).powi(2)).sum::<f64>().sqrt()
    }
}

fn unravel(mut i: usize, size: usize, out: &mut [usize]) {
    for a in (0..out.len()).rev() {
        out[a] = i % size;
        i /= size;
    }
}

/// A complex field on the spatial grid at a fixed time.
#[derive(Clone, Debug)]
pub struct SpatialField {
    pub grid: Arc<FrequencyGrid>,
    pub time: f64,
    pub values: Vec<Complex64>,
}

impl SpatialField {
    pub fn l2_norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx().powi(self.grid.n as i32)
    }

    /// Spatial coordinates of the i-th node.
    pub fn x_of(&self, i: usize, out: &mut [f64]) {
        let mut idx = vec![0usize; self.grid.n];
        unravel(i, self.grid.resolution, &mut idx);
        for a in 0..self.grid.n {
            out[a] = self.grid.x(a, idx[a]);
        }
    }
}

/// Free wave with amplitudes f(ξ)·√(1+|∇φ(ξ)|²); `f` must vanish outside D̃.
pub fn init_wave(
    surface: Arc<SurfaceSpec>,
    density: impl Fn(&[f64]) -> Complex64,
    grid: Arc<FrequencyGrid>,
) -> Result<WaveState> {
    let mut w = WaveState::zeros(surface.clone(), grid);
    let n = w.dim();
    let mut xi = vec![0.0; n];
    let mut g = vec![0.0; n];
    let d = surface.enlarged_domain().clone();
    for i in 0..w.amplitudes.len() {
        w.xi_of(i, &mut xi);
        let f = density(&xi);
        if f == ZERO {
            continue;
        }
        if !d.contains(&xi) {
            return Err(Error::Margin { op: "freewave::init_wave" });
        }
        surface.grad_into(&xi, &mut g);
        let jac = (1.0 + g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        w.amplitudes[i] = f * jac;
    }
    Ok(w)
}
