use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::surface::SurfaceSpec;
use crate::{Error, Result};

/// A point ζ = (ξ, φ(ξ)) with its unit normal and an orthonormal tangent frame.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub xi: DVector<f64>,
    pub zeta: DVector<f64>,
    pub normal: DVector<f64>,
    pub tangent_basis: Vec<DVector<f64>>,
    /// Gram–Schmidt coefficients: t_a = Σ_j A[(j, a)] (e_j, ∂_jφ).
    pub frame_coeffs: DMatrix<f64>,
}

impl SurfacePoint {
    /// Ambient vector Σ c_a t_a for tangent coordinates c.
    pub fn embed(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.zeta.len());
        for (a, t) in self.tangent_basis.iter().enumerate() {
            v.axpy(c[a], t, 1.0);
        }
        v
    }

    /// Tangent coordinates of an ambient vector (orthogonal projection).
    pub fn coords(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.tangent_basis.len(), self.tangent_basis.iter().map(|t| t.dot(v)))
    }
}

/// The shape operator −dg in tangent-frame coordinates.
#[derive(Debug, Clone)]
pub struct ShapeOperator {
    pub base: SurfacePoint,
    pub matrix: DMatrix<f64>,
    /// Principal curvatures, descending.
    pub eigenvalues: DVector<f64>,
    /// Principal directions as columns, in tangent coordinates.
    pub eigenvectors: DMatrix<f64>,
}

impl ShapeOperator {
    /// S v for an ambient tangent vector, returned as an ambient vector.
    pub fn apply_ambient(&self, v: &DVector<f64>) -> DVector<f64> {
        self.base.embed(&(&self.matrix * self.base.coords(v)))
    }
}

/// Unit normal (−∇φ, 1)/|(−∇φ, 1)| without domain checks.
pub fn normal_at(s: &SurfaceSpec, xi: &[f64]) -> DVector<f64> {
    let n = s.dim();
    let mut g = vec![0.0; n];
    s.grad_into(xi, &mut g);
    let mut v = DVector::zeros(n + 1);
    for a in 0..n {
        v[a] = -g[a];
    }
    v[n] = 1.0;
    let w = v.norm();
    v / w
}

pub fn surface_point(s: &SurfaceSpec, xi: &DVector<f64>) -> Result<SurfacePoint> {
    s.check_domain(xi.as_slice())?;
    Ok(surface_point_unchecked(s, xi))
}

pub(crate) fn surface_point_unchecked(s: &SurfaceSpec, xi: &DVector<f64>) -> SurfacePoint {
    let n = s.dim();
    let g = s.grad(xi);
    let mut zeta = DVector::zeros(n + 1);
    zeta.rows_mut(0, n).copy_from(xi);
    zeta[n] = s.phi(xi.as_slice());
    let normal = normal_at(s, xi.as_slice());
    let frame: Vec<DVector<f64>> = (0..n)
        .map(|j| {
            let mut x = DVector::zeros(n + 1);
            x[j] = 1.0;
            x[n] = g[j];
            x
        })
        .collect();
    let mut coeffs = DMatrix::<f64>::zeros(n, n);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut c = DVector::<f64>::zeros(n);
        c[j] = 1.0;
        let mut v = frame[j].clone();
        for (a, t) in basis.iter().enumerate() {
            let p = t.dot(&frame[j]);
            v.axpy(-p, t, 1.0);
            c.axpy(-p, &coeffs.column(a).clone_owned(), 1.0);
        }
        let len = v.norm();
        v /= len;
        c /= len;
        coeffs.set_column(j, &c);
        basis.push(v);
    }
    SurfacePoint { xi: xi.clone(), zeta, normal, tangent_basis: basis, frame_coeffs: coeffs }
}

/// Exact Weingarten matrix AᵀHA/W in the orthonormal frame.
fn exact_matrix(s: &SurfaceSpec, p: &SurfacePoint) -> DMatrix<f64> {
    let n = s.dim();
    let w = 1.0 / p.normal[n];
    let h = s.hess(&p.xi);
    let a = &p.frame_coeffs;
    let m = a.transpose() * h * a / w;
    (&m + m.transpose()) * 0.5
}

/// Finite-difference Gauss-map differential in the same frame.
pub fn fd_shape_matrix(s: &SurfaceSpec, p: &SurfacePoint) -> DMatrix<f64> {
    let n = s.dim();
    let h = s.fd_step();
    let mut dn: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut q = p.xi.clone();
    for j in 0..n {
        q[j] = p.xi[j] + h;
        let np = normal_at(s, q.as_slice());
        q[j] = p.xi[j] - h;
        let nm = normal_at(s, q.as_slice());
        q[j] = p.xi[j];
        dn.push((np - nm) / (2.0 * h));
    }
    let a = &p.frame_coeffs;
    DMatrix::from_fn(n, n, |b, col| {
        -(0..n).map(|j| a[(j, col)] * p.tangent_basis[b].dot(&dn[j])).sum::<f64>()
    })
}

pub fn shape_operator(s: &SurfaceSpec, xi: &DVector<f64>) -> Result<ShapeOperator> {
    let base = surface_point(s, xi)?;
    let matrix = exact_matrix(s, &base);
    let fd = fd_shape_matrix(s, &base);
    let gap = (&fd - &matrix).abs().max();
    if !(gap <= 1e-5) {
        return Err(Error::Consistency { op: "geometry::shape_operator", gap });
    }
    Ok(decompose(base, matrix))
}

/// Shape operator without the finite-difference cross-check or domain check.
pub(crate) fn shape_operator_fast(s: &SurfaceSpec, xi: &DVector<f64>) -> ShapeOperator {
    let base = surface_point_unchecked(s, xi);
    let matrix = exact_matrix(s, &base);
    decompose(base, matrix)
}

fn decompose(base: SurfacePoint, matrix: DMatrix<f64>) -> ShapeOperator {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        eigenvectors.set_column(k, &eig.eigenvectors.column(i));
    }
    ShapeOperator { base, matrix, eigenvalues, eigenvectors }
}

/// II(v, v) = ⟨S v, v⟩ for v in tangent coordinates.
pub fn second_fundamental_form(s: &SurfaceSpec, xi: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let op = shape_operator(s, xi)?;
    Ok(v.dot(&(&op.matrix * v)))
}

/// |u ∧ v| = √(|u|²|v|² − ⟨u,v⟩²).
pub fn wedge_area(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let uu = u.dot(u);
    let vv = v.dot(v);
    let uv = u.dot(v);
    (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Volume of the parallelepiped spanned by three vectors, √det Gram.
pub fn parallelepiped_volume(u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    if u.len() < 3 {
        return Err(Error::Parameter {
            op: "geometry::parallelepiped_volume",
            detail: format!("ambient dimension {} < 3", u.len()),
        });
    }
    Ok(volume3(u, v, w))
}

pub(crate) fn volume3(u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let m = [u, v, w];
    let mut g = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            g[a][b] = m[a].dot(m[b]);
        }
    }
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    det.max(0.0).sqrt()
}
