use serde::{Deserialize, Serialize};

/// Tabulated graph values on a uniform grid, interpolated by a natural
/// tensor-product cubic spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedGraph {
    pub lo: Vec<f64>,
    pub spacing: Vec<f64>,
    pub counts: Vec<usize>,
    /// Row-major values, last axis fastest.
    pub values: Vec<f64>,
    #[serde(skip)]
    coeffs: Vec<f64>,
}

impl TabulatedGraph {
    pub fn new(lo: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>, values: Vec<f64>) -> Result<Self, String> {
        let mut g = TabulatedGraph { lo, spacing, counts, values, coeffs: Vec::new() };
        g.prepare()?;
        Ok(g)
    }

    /// Tabulates `f` on the given grid.
    pub fn from_fn(lo: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = counts.len();
        let total: usize = counts.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; n];
        for idx in 0..total {
            unravel(idx, &counts, |a, i| x[a] = lo[a] + spacing[a] * i as f64);
            values.push(f(&x));
        }
        Self::new(lo, spacing, counts, values).expect("consistent grid")
    }

    /// Validates the table and solves for spline coefficients.
    pub fn prepare(&mut self) -> Result<(), String> {
        let n = self.counts.len();
        if n == 0 || self.lo.len() != n || self.spacing.len() != n {
            return Err("graph: lo, spacing and counts must share the dimension".into());
        }
        if self.counts.iter().any(|&c| c < 4) {
            return Err("graph: at least 4 samples per axis are required".into());
        }
        if self.spacing.iter().any(|&h| !(h > 0.0)) {
            return Err("graph: spacing must be positive".into());
        }
        let total: usize = self.counts.iter().product();
        if self.values.len() != total {
            return Err(format!("graph: expected {total} values, got {}", self.values.len()));
        }
        let mut c = self.values.clone();
        for axis in 0..n {
            solve_axis(&mut c, &self.counts, axis);
        }
        self.coeffs = c;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Value, gradient and Hessian (row-major) at `xi`.
    pub fn eval(&self, xi: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64 {
        let n = self.dim();
        let mut base = vec![0usize; n];
        let mut w = vec![[[0.0; 4]; 3]; n];
        for a in 0..n {
            let t = (xi[a] - self.lo[a]) / self.spacing[a];
            let i = (t.floor() as isize).clamp(0, self.counts[a] as isize - 2) as usize;
            let u = t - i as f64;
            base[a] = i;
            let h = self.spacing[a];
            w[a][0] = [
                (1.0 - u).powi(3) / 6.0,
                (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0,
                (-3.0 * u * u * u + 3.0 * u * u + 3.0 * u + 1.0) / 6.0,
                u * u * u / 6.0,
            ];
            w[a][1] = [
                -(1.0 - u).powi(2) / 2.0 / h,
                (3.0 * u * u - 4.0 * u) / 2.0 / h,
                (-3.0 * u * u + 2.0 * u + 1.0) / 2.0 / h,
                u * u / 2.0 / h,
            ];
            w[a][2] = [
                (1.0 - u) / (h * h),
                (3.0 * u - 2.0) / (h * h),
                (-3.0 * u + 1.0) / (h * h),
                u / (h * h),
            ];
        }
        let want_g = grad.is_some();
        let want_h = hess.is_some();
        let mut val = 0.0;
        let mut g = vec![0.0; n];
        let mut hm = vec![0.0; n * n];
        let stencil = 4usize.pow(n as u32);
        let mut off = vec![0usize; n];
        for s in 0..stencil {
            let mut rem = s;
            for o in off.iter_mut() {
                *o = rem % 4;
                rem /= 4;
            }
            let c = self.coeff(&base, &off);
            if c == 0.0 {
                continue;
            }
            let mut p = c;
            for a in 0..n {
                p *= w[a][0][off[a]];
            }
            val += p;
            if want_g || want_h {
                for a in 0..n {
                    let mut q = c;
                    for b in 0..n {
                        q *= w[b][usize::from(a == b)][off[b]];
                    }
                    g[a] += q;
                }
            }
            if want_h {
                for a in 0..n {
                    for b in 0..n {
                        let mut q = c;
                        for k in 0..n {
                            let order = usize::from(k == a) + usize::from(k == b);
                            q *= w[k][order][off[k]];
                        }
                        hm[a * n + b] += q;
                    }
                }
            }
        }
        if let Some(out) = grad {
            out.copy_from_slice(&g);
        }
        if let Some(out) = hess {
            out.copy_from_slice(&hm);
        }
        val
    }

    /// Coefficient at base + off - 1 with natural end extension.
    fn coeff(&self, base: &[usize], off: &[usize]) -> f64 {
        let n = self.dim();
        let mut idx = vec![0isize; n];
        for a in 0..n {
            idx[a] = base[a] as isize + off[a] as isize - 1;
        }
        self.coeff_ext(&mut idx, 0)
    }

    fn coeff_ext(&self, idx: &mut [isize], axis: usize) -> f64 {
        if axis == idx.len() {
            let mut flat = 0usize;
            for (a, &i) in idx.iter().enumerate() {
                flat = flat * self.counts[a] + i as usize;
            }
            return self.coeffs[flat];
        }
        let m = self.counts[axis] as isize;
        let i = idx[axis];
        if i < 0 {
            idx[axis] = 0;
            let c0 = self.coeff_ext(idx, axis + 1);
            idx[axis] = 1;
            let c1 = self.coeff_ext(idx, axis + 1);
            idx[axis] = i;
            2.0 * c0 - c1
        } else if i >= m {
            idx[axis] = m - 1;
            let c0 = self.coeff_ext(idx, axis + 1);
            idx[axis] = m - 2;
            let c1 = self.coeff_ext(idx, axis + 1);
            idx[axis] = i;
            2.0 * c0 - c1
        } else {
            self.coeff_ext(idx, axis + 1)
        }
    }
}

fn unravel(mut idx: usize, counts: &[usize], mut f: impl FnMut(usize, usize)) {
    for a in (0..counts.len()).rev() {
        f(a, idx % counts[a]);
        idx /= counts[a];
    }
}

/// Natural cubic B-spline interpolation along one axis: c_0 = f_0,
/// c_{m-1} = f_{m-1}, and (c_{i-1} + 4 c_i + c_{i+1}) / 6 = f_i inside.
fn solve_axis(data: &mut [f64], counts: &[usize], axis: usize) {
    let m = counts[axis];
    let stride: usize = counts[axis + 1..].iter().product();
    let outer: usize = counts[..axis].iter().product();
    let mut line = vec![0.0; m];
    for o in 0..outer {
        for s in 0..stride {
            let at = |i: usize| o * m * stride + i * stride + s;
            for i in 0..m {
                line[i] = data[at(i)];
            }
            let sol = natural_solve(&line);
            for i in 0..m {
                data[at(i)] = sol[i];
            }
        }
    }
}

fn natural_solve(f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let mut c = vec![0.0; m];
    c[0] = f[0];
    c[m - 1] = f[m - 1];
    let k = m - 2;
    let mut diag = vec![4.0 / 6.0; k];
    let mut rhs: Vec<f64> = (1..m - 1).map(|i| f[i]).collect();
    rhs[0] -= c[0] / 6.0;
    rhs[k - 1] -= c[m - 1] / 6.0;
    let off = 1.0 / 6.0;
    for i in 1..k {
        let r = off / diag[i - 1];
        diag[i] -= r * off;
        rhs[i] -= r * rhs[i - 1];
    }
    c[k] = rhs[k - 1] / diag[k - 1];
    for i in (0..k - 1).rev() {
        c[i + 1] = (rhs[i] - off * c[i + 2]) / diag[i];
    }
    c
}
