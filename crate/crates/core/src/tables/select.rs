use serde::Serialize;

use super::partition::CubePartition;
use crate::freewave::CubeRegion;
use crate::{Error, Result};

/// Samples of |f| on a uniform space-time grid. `axes[a]` lists node
/// coordinates (spatial axes first, time last); values are stored with time
/// slowest and the last spatial axis fastest.
#[derive(Clone, Debug)]
pub struct SampledField {
    pub axes: Vec<Vec<f64>>,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl SampledField {
    /// Uniform midpoint samples of `f(x, t)` on a cube.
    pub fn from_fn(region: &CubeRegion, per_axis: usize, f: impl Fn(&[f64], f64) -> f64) -> Self {
        let d = region.center.len();
        let n = d - 1;
        let spacing = region.effective_side() / per_axis as f64;
        let axes: Vec<Vec<f64>> = (0..d).map(|a| crate::quad::midpoints(region.lower(a), region.upper(a), per_axis)).collect();
        let total = per_axis.pow(d as u32);
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; n];
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..n).rev() {
                x[a] = axes[a][rem % per_axis];
                rem /= per_axis;
            }
            values.push(f(&x, axes[n][rem]).abs());
        }
        SampledField { axes, spacing, values }
    }

    fn dims(&self) -> Vec<usize> {
        let n = self.axes.len() - 1;
        let mut d = vec![self.axes[n].len()];
        d.extend(self.axes[..n].iter().map(|a| a.len()));
        d
    }
}

/// Inclusive prefix sums of |f|^p h^{n+1} over the (time, space...) array.
struct Prefix {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Prefix {
    fn new(f: &SampledField, p: f64) -> Self {
        let dims = f.dims();
        let d = dims.len();
        let pd: Vec<usize> = dims.iter().map(|k| k + 1).collect();
        let total: usize = pd.iter().product();
        let mut data = vec![0.0; total];
        let vol = f.spacing.powi(d as i32);
        let mut idx = vec![0usize; d];
        for (flat, v) in f.values.iter().enumerate() {
            let mut rem = flat;
            for a in (0..d).rev() {
                idx[a] = rem % dims[a] + 1;
                rem /= dims[a];
            }
            data[Self::flat(&pd, &idx)] = v.powf(p) * vol;
        }
        let mut stride = 1;
        for a in (0..d).rev() {
            for i in 0..total {
                if (i / stride) % pd[a] != 0 {
                    data[i] += data[i - stride];
                }
            }
            stride *= pd[a];
        }
        Prefix { dims: pd, data }
    }

    fn flat(dims: &[usize], idx: &[usize]) -> usize {
        idx.iter().zip(dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    /// Sum over the half-open index box [lo, hi).
    fn sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let d = lo.len();
        if (0..d).any(|a| hi[a] <= lo[a]) {
            return 0.0;
        }
        let mut s = 0.0;
        let mut idx = vec![0; d];
        for corner in 0..(1usize << d) {
            let mut sign = 1.0;
            for a in 0..d {
                if corner >> a & 1 == 1 {
                    idx[a] = lo[a];
                    sign = -sign;
                } else {
                    idx[a] = hi[a];
                }
            }
            s += sign * self.data[Self::flat(&self.dims, &idx)];
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectedCube {
    pub cube: CubeRegion,
    pub constant: f64,
    pub norm_small: f64,
    pub norm_interior: f64,
    pub candidates: usize,
}

/// Scans cubes Q of side 2R inside 4Q_R, `per_axis` candidate centres per
/// axis, for the one maximising ‖f‖_{L^p(I^{c,j}(Q))} relative to
/// ‖f‖_{L^p(Q_R)}. The reported constant C solves
/// ‖f‖_{L^p(Q_R)} = (1 + cC)‖f‖_{L^p(I^{c,j}(Q))}, clamped at 0.
pub fn select_parent_cube(
    f: &SampledField,
    q_r: &CubeRegion,
    c: f64,
    j: u32,
    p: f64,
    per_axis: usize,
) -> Result<SelectedCube> {
    let op = "tables::select_parent_cube";
    let d = q_r.center.len();
    let n = d - 1;
    let big = q_r.dilated(4.0);
    for a in 0..d {
        let ax = &f.axes[a];
        let (first, last) = (ax[0] - 0.5 * f.spacing, ax[ax.len() - 1] + 0.5 * f.spacing);
        if first > big.lower(a) + 1e-9 * f.spacing || last < big.upper(a) - 1e-9 * f.spacing {
            return Err(Error::Input { op, detail: format!("samples do not cover 4Q_R on axis {a}") });
        }
    }
    let prefix = Prefix::new(f, p);
    let index_range = |a: usize, lo: f64, hi: f64| -> (usize, usize) {
        let ax = &f.axes[a];
        let x0 = ax[0];
        let i0 = ((lo - x0) / f.spacing - 1e-9).ceil().max(0.0) as usize;
        let i1 = ((hi - x0) / f.spacing - 1e-9).ceil().max(0.0) as usize;
        (i0.min(ax.len()), i1.min(ax.len()))
    };
    let box_sum = |lo: &[f64], hi: &[f64]| -> f64 {
        let mut il = vec![0; d];
        let mut ih = vec![0; d];
        il[0] = index_range(n, lo[n], hi[n]).0;
        ih[0] = index_range(n, lo[n], hi[n]).1;
        for a in 0..n {
            let (x, y) = index_range(a, lo[a], hi[a]);
            il[a + 1] = x;
            ih[a + 1] = y;
        }
        prefix.sum(&il, &ih)
    };
    let lo_r: Vec<f64> = (0..d).map(|a| q_r.lower(a)).collect();
    let hi_r: Vec<f64> = (0..d).map(|a| q_r.upper(a)).collect();
    let small = box_sum(&lo_r, &hi_r);
    let side = q_r.effective_side();
    let offsets: Vec<f64> = (0..per_axis)
        .map(|i| if per_axis == 1 { 0.0 } else { -side + 2.0 * side * i as f64 / (per_axis - 1) as f64 })
        .collect();
    let total = per_axis.pow(d as u32);
    let mut best: Option<(f64, CubeRegion, f64)> = None;
    for cand in 0..total {
        let mut rem = cand;
        let mut center = q_r.center.clone();
        for a in (0..d).rev() {
            center[a] += offsets[rem % per_axis];
            rem /= per_axis;
        }
        let cube = CubeRegion { center, side: 2.0 * side, dilation: 1.0 };
        let part = CubePartition::new(cube.clone(), j);
        let mut acc = 0.0;
        for q in 0..part.len() {
            let child = part.child(q);
            let s = child.side * (1.0 - c);
            let lo: Vec<f64> = child.center.iter().map(|x| x - 0.5 * s).collect();
            let hi: Vec<f64> = child.center.iter().map(|x| x + 0.5 * s).collect();
            acc += box_sum(&lo, &hi);
        }
        if best.as_ref().is_none_or(|b| acc > b.0) {
            best = Some((acc, cube, acc));
        }
    }
    let (interior, cube, _) = best.expect("at least one candidate");
    let norm_small = small.powf(1.0 / p);
    let norm_interior = interior.powf(1.0 / p);
    let constant = if norm_small == 0.0 {
        0.0
    } else if norm_interior == 0.0 {
        f64::INFINITY
    } else if c > 0.0 {
        ((norm_small / norm_interior - 1.0) / c).max(0.0)
    } else if norm_small <= norm_interior * (1.0 + 1e-12) {
        0.0
    } else {
        f64::INFINITY
    };
    let bound = 2f64.powi(n as i32 + 2) * (n as f64 + 1.0);
    if constant > bound {
        return Err(Error::Search { op, best: constant });
    }
    Ok(SelectedCube { cube, constant, norm_small, norm_interior, candidates: total })
}
