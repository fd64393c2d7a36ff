use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::graph::TabulatedGraph;
use crate::{Error, Result};

/// Closed-form or tabulated graph functions τ = φ(ξ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceKind {
    /// |ξ|²
    EllipticParaboloid,
    /// ξ₁² + … + ξ_{n-1}² − ξ_n²
    HyperbolicParaboloid,
    /// |ξ|
    Cone,
    /// ⟨η, Hη⟩ / ρ with ξ = (η, ρ), ρ > 0
    GeneralizedCone { matrix: Vec<Vec<f64>> },
    /// Σ c_k ξ_k²
    Quadratic { coefficients: Vec<f64> },
    /// ξ₁^k + ξ₂² + … + ξ_n²
    MixedDegree { k: u32 },
    Graph(TabulatedGraph),
}

/// The exact catalog strings.
pub const CATALOG: [&str; 7] = [
    "elliptic-paraboloid",
    "hyperbolic-paraboloid",
    "cone",
    "generalized-cone",
    "quadratic",
    "mixed-degree",
    "graph",
];

/// Parameter schema of a catalog entry as (name, description) pairs.
pub fn catalog_parameters(name: &str) -> Option<Vec<(&'static str, &'static str)>> {
    Some(match name {
        "elliptic-paraboloid" | "hyperbolic-paraboloid" | "cone" => vec![],
        "generalized-cone" => vec![("matrix", "symmetric (n-1)x(n-1) matrix H; phi = <eta, H eta> / rho")],
        "quadratic" => vec![("coefficients", "n reals c_k; phi = sum c_k xi_k^2")],
        "mixed-degree" => vec![("k", "integer degree >= 2 of the first coordinate")],
        "graph" => vec![
            ("lo", "grid origin per axis"),
            ("spacing", "grid spacing per axis"),
            ("counts", "samples per axis (>= 4)"),
            ("values", "row-major samples of phi, last axis fastest"),
        ],
        _ => return None,
    })
}

/// A user-supplied scalar field with optional derivatives.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct CustomGraph {
    pub phi: ScalarFn,
    pub grad: Option<VectorFn>,
    /// Row-major Hessian.
    pub hess: Option<VectorFn>,
}

#[derive(Clone)]
enum Phi {
    Catalog(SurfaceKind),
    Custom(CustomGraph),
}

/// Serializable description of a surface piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDescriptor {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: SurfaceKind,
    pub domain: Domain,
    pub margin: f64,
}

/// A graph hypersurface over a domain D with margin-enlarged domain D̃.
#[derive(Clone)]
pub struct SurfaceSpec {
    dim: usize,
    phi: Phi,
    domain: Domain,
    enlarged: Domain,
    margin: f64,
}

impl fmt::Debug for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.phi {
            Phi::Catalog(k) => catalog_name(k).to_string(),
            Phi::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("SurfaceSpec")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .field("domain", &self.domain)
            .field("margin", &self.margin)
            .finish()
    }
}

pub fn catalog_name(kind: &SurfaceKind) -> &'static str {
    match kind {
        SurfaceKind::EllipticParaboloid => CATALOG[0],
        SurfaceKind::HyperbolicParaboloid => CATALOG[1],
        SurfaceKind::Cone => CATALOG[2],
        SurfaceKind::GeneralizedCone { .. } => CATALOG[3],
        SurfaceKind::Quadratic { .. } => CATALOG[4],
        SurfaceKind::MixedDegree { .. } => CATALOG[5],
        SurfaceKind::Graph(_) => CATALOG[6],
    }
}

const OP: &str = "geometry::surface";

impl SurfaceSpec {
    pub fn new(dim: usize, kind: SurfaceKind, domain: Domain, margin: f64) -> Result<Self> {
        let mut kind = kind;
        let bad = |detail: String| Error::Parameter { op: OP, detail };
        if dim == 0 {
            return Err(bad("dimension must be positive".into()));
        }
        if domain.dim() != dim {
            return Err(bad(format!("domain has dimension {} but surface has {dim}", domain.dim())));
        }
        match &domain {
            Domain::Ball { radius, .. } if !(*radius > 0.0) => return Err(bad("ball radius must be positive".into())),
            Domain::Box { half_widths, .. } if half_widths.len() != dim || half_widths.iter().any(|h| !(*h > 0.0)) => {
                return Err(bad("box half widths must be positive, one per axis".into()))
            }
            _ => {}
        }
        if !(margin > 0.0) {
            return Err(bad("margin must be positive".into()));
        }
        let enlarged = domain.enlarged(margin);
        match &mut kind {
            SurfaceKind::Cone => {
                if enlarged.contains(&vec![0.0; dim]) {
                    return Err(bad("cone domain must keep the apex outside the enlarged domain".into()));
                }
            }
            SurfaceKind::GeneralizedCone { matrix } => {
                if dim < 2 {
                    return Err(bad("generalized cone needs n >= 2".into()));
                }
                if matrix.len() != dim - 1 || matrix.iter().any(|r| r.len() != dim - 1) {
                    return Err(bad(format!("generalized cone matrix must be {0}x{0}", dim - 1)));
                }
                for i in 0..dim - 1 {
                    for j in 0..dim - 1 {
                        if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 {
                            return Err(bad("generalized cone matrix must be symmetric".into()));
                        }
                    }
                }
                let (lo, _) = enlarged.bounding_box();
                if lo[dim - 1] <= 0.0 {
                    return Err(bad("generalized cone domain must satisfy rho > 0 on the enlarged domain".into()));
                }
            }
            SurfaceKind::Quadratic { coefficients } => {
                if coefficients.len() != dim {
                    return Err(bad(format!("quadratic needs {dim} coefficients")));
                }
            }
            SurfaceKind::MixedDegree { k } => {
                if *k < 2 {
                    return Err(bad("mixed-degree k must be at least 2".into()));
                }
            }
            SurfaceKind::Graph(g) => {
                g.prepare().map_err(bad)?;
                if g.dim() != dim {
                    return Err(bad("graph table dimension mismatch".into()));
                }
                let (lo, hi) = enlarged.bounding_box();
                for a in 0..dim {
                    let top = g.lo[a] + g.spacing[a] * (g.counts[a] - 1) as f64;
                    if lo[a] < g.lo[a] - 1e-12 || hi[a] > top + 1e-12 {
                        return Err(bad("graph table must cover the enlarged domain".into()));
                    }
                }
            }
            _ => {}
        }
        Ok(SurfaceSpec { dim, phi: Phi::Catalog(kind), domain, enlarged, margin })
    }

    pub fn from_descriptor(d: &SurfaceDescriptor) -> Result<Self> {
        Self::new(d.dim, d.kind.clone(), d.domain.clone(), d.margin)
    }

    pub fn custom(dim: usize, graph: CustomGraph, domain: Domain, margin: f64) -> Result<Self> {
        let mut s = Self::new(dim, SurfaceKind::EllipticParaboloid, domain, margin)?;
        s.phi = Phi::Custom(graph);
        Ok(s)
    }

    pub fn descriptor(&self) -> Option<SurfaceDescriptor> {
        match &self.phi {
            Phi::Catalog(k) => Some(SurfaceDescriptor {
                dim: self.dim,
                kind: k.clone(),
                domain: self.domain.clone(),
                margin: self.margin,
            }),
            Phi::Custom(_) => None,
        }
    }

    /// The same graph over a different domain.
    pub fn with_domain(&self, domain: Domain, margin: f64) -> Result<Self> {
        let mut s = match &self.phi {
            Phi::Catalog(k) => Self::new(self.dim, k.clone(), domain, margin)?,
            Phi::Custom(_) => Self::new(self.dim, SurfaceKind::EllipticParaboloid, domain, margin)?,
        };
        s.phi = self.phi.clone();
        Ok(s)
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.phi {
            Phi::Catalog(k) => catalog_name(k),
            Phi::Custom(_) => "custom",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn enlarged_domain(&self) -> &Domain {
        &self.enlarged
    }
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Central finite-difference step.
    pub fn fd_step(&self) -> f64 {
        1e-5 * self.domain.radius()
    }

    pub fn check_domain(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::Domain { op: OP, detail: format!("expected {} coordinates", self.dim) });
        }
        if !self.enlarged.contains(xi) {
            return Err(Error::Domain { op: OP, detail: format!("{xi:?}") });
        }
        Ok(())
    }

    /// φ(ξ) without domain checks.
    pub fn phi(&self, xi: &[f64]) -> f64 {
        match &self.phi {
            Phi::Custom(c) => (c.phi)(xi),
            Phi::Catalog(k) => match k {
                SurfaceKind::EllipticParaboloid => xi.iter().map(|x| x * x).sum(),
                SurfaceKind::HyperbolicParaboloid => {
                    let n = xi.len();
                    xi[..n - 1].iter().map(|x| x * x).sum::<f64>() - xi[n - 1] * xi[n - 1]
                }
                SurfaceKind::Cone => xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
                SurfaceKind::GeneralizedCone { matrix } => {
                    let n = xi.len();
                    quad_form(matrix, &xi[..n - 1]) / xi[n - 1]
                }
                SurfaceKind::Quadratic { coefficients } => {
                    xi.iter().zip(coefficients).map(|(x, c)| c * x * x).sum()
                }
                SurfaceKind::MixedDegree { k } => {
                    xi[0].powi(*k as i32) + xi[1..].iter().map(|x| x * x).sum::<f64>()
                }
                SurfaceKind::Graph(g) => g.eval(xi, None, None),
            },
        }
    }

    /// ∇φ(ξ) written into `out`.
    pub fn grad_into(&self, xi: &[f64], out: &mut [f64]) {
        let n = xi.len();
        match &self.phi {
            Phi::Custom(c) => match &c.grad {
                Some(g) => g(xi, out),
                None => self.fd_grad(xi, out),
            },
            Phi::Catalog(k) => match k {
                SurfaceKind::EllipticParaboloid => {
                    for a in 0..n {
                        out[a] = 2.0 * xi[a];
                    }
                }
                SurfaceKind::HyperbolicParaboloid => {
                    for a in 0..n {
                        out[a] = 2.0 * xi[a];
                    }
                    out[n - 1] = -2.0 * xi[n - 1];
                }
                SurfaceKind::Cone => {
                    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                    for a in 0..n {
                        out[a] = xi[a] / r;
                    }
                }
                SurfaceKind::GeneralizedCone { matrix } => {
                    let rho = xi[n - 1];
                    let eta = &xi[..n - 1];
                    for a in 0..n - 1 {
                        out[a] = 2.0 * (0..n - 1).map(|b| matrix[a][b] * eta[b]).sum::<f64>() / rho;
                    }
                    out[n - 1] = -quad_form(matrix, eta) / (rho * rho);
                }
                SurfaceKind::Quadratic { coefficients } => {
                    for a in 0..n {
                        out[a] = 2.0 * coefficients[a] * xi[a];
                    }
                }
                SurfaceKind::MixedDegree { k } => {
                    out[0] = *k as f64 * xi[0].powi(*k as i32 - 1);
                    for a in 1..n {
                        out[a] = 2.0 * xi[a];
                    }
                }
                SurfaceKind::Graph(g) => {
                    g.eval(xi, Some(out), None);
                }
            },
        }
    }

    /// Row-major Hessian written into `out` (length n²).
    pub fn hess_into(&self, xi: &[f64], out: &mut [f64]) {
        let n = xi.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        match &self.phi {
            Phi::Custom(c) => match (&c.hess, &c.grad) {
                (Some(h), _) => h(xi, out),
                (None, Some(_)) => self.fd_hess_from_grad(xi, out),
                (None, None) => self.fd_hess_from_values(xi, out),
            },
            Phi::Catalog(k) => match k {
                SurfaceKind::EllipticParaboloid => {
                    for a in 0..n {
                        out[a * n + a] = 2.0;
                    }
                }
                SurfaceKind::HyperbolicParaboloid => {
                    for a in 0..n {
                        out[a * n + a] = 2.0;
                    }
                    out[n * n - 1] = -2.0;
                }
                SurfaceKind::Cone => {
                    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                    for a in 0..n {
                        for b in 0..n {
                            let d = if a == b { 1.0 } else { 0.0 };
                            out[a * n + b] = d / r - xi[a] * xi[b] / (r * r * r);
                        }
                    }
                }
                SurfaceKind::GeneralizedCone { matrix } => {
                    let m = n - 1;
                    let rho = xi[n - 1];
                    let eta = &xi[..m];
                    let he: Vec<f64> = (0..m).map(|a| (0..m).map(|b| matrix[a][b] * eta[b]).sum()).collect();
                    for a in 0..m {
                        for b in 0..m {
                            out[a * n + b] = 2.0 * matrix[a][b] / rho;
                        }
                        out[a * n + m] = -2.0 * he[a] / (rho * rho);
                        out[m * n + a] = out[a * n + m];
                    }
                    out[m * n + m] = 2.0 * quad_form(matrix, eta) / (rho * rho * rho);
                }
                SurfaceKind::Quadratic { coefficients } => {
                    for a in 0..n {
                        out[a * n + a] = 2.0 * coefficients[a];
                    }
                }
                SurfaceKind::MixedDegree { k } => {
                    let k = *k as f64;
                    out[0] = k * (k - 1.0) * xi[0].powi(k as i32 - 2);
                    for a in 1..n {
                        out[a * n + a] = 2.0;
                    }
                }
                SurfaceKind::Graph(g) => {
                    g.eval(xi, None, Some(out));
                }
            },
        }
    }

    pub fn grad(&self, xi: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        self.grad_into(xi.as_slice(), out.as_mut_slice());
        out
    }

    pub fn hess(&self, xi: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut buf = vec![0.0; n * n];
        self.hess_into(xi.as_slice(), &mut buf);
        DMatrix::from_row_slice(n, n, &buf)
    }

    /// Central-difference gradient of φ.
    pub fn fd_grad(&self, xi: &[f64], out: &mut [f64]) {
        let h = self.fd_step();
        let mut p = xi.to_vec();
        for a in 0..xi.len() {
            p[a] = xi[a] + h;
            let fp = self.phi(&p);
            p[a] = xi[a] - h;
            let fm = self.phi(&p);
            p[a] = xi[a];
            out[a] = (fp - fm) / (2.0 * h);
        }
    }

    fn fd_hess_from_grad(&self, xi: &[f64], out: &mut [f64]) {
        let n = xi.len();
        let h = self.fd_step();
        let mut p = xi.to_vec();
        let mut gp = vec![0.0; n];
        let mut gm = vec![0.0; n];
        for a in 0..n {
            p[a] = xi[a] + h;
            self.grad_into(&p, &mut gp);
            p[a] = xi[a] - h;
            self.grad_into(&p, &mut gm);
            p[a] = xi[a];
            for b in 0..n {
                out[b * n + a] = (gp[b] - gm[b]) / (2.0 * h);
            }
        }
        symmetrize(out, n);
    }

    /// Second differences of φ with a wider step, since values alone lose
    /// two orders of precision.
    fn fd_hess_from_values(&self, xi: &[f64], out: &mut [f64]) {
        let n = xi.len();
        let h = 1e-3 * self.domain.radius();
        let mut p = xi.to_vec();
        let f0 = self.phi(xi);
        for a in 0..n {
            for b in a..n {
                let v = if a == b {
                    p[a] = xi[a] + h;
                    let fp = self.phi(&p);
                    p[a] = xi[a] - h;
                    let fm = self.phi(&p);
                    p[a] = xi[a];
                    (fp - 2.0 * f0 + fm) / (h * h)
                } else {
                    let mut s = 0.0;
                    for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                        p[a] = xi[a] + sa * h;
                        p[b] = xi[b] + sb * h;
                        s += w * self.phi(&p);
                    }
                    p[a] = xi[a];
                    p[b] = xi[b];
                    s / (4.0 * h * h)
                };
                out[a * n + b] = v;
                out[b * n + a] = v;
            }
        }
    }

    /// Maximum of |∇φ| over sample points of D̃.
    pub fn max_gradient_norm(&self, k: usize) -> f64 {
        let mut g = vec![0.0; self.dim];
        self.enlarged
            .sample_points(k)
            .iter()
            .map(|p| {
                self.grad_into(p.as_slice(), &mut g);
                g.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn quad_form(m: &[Vec<f64>], x: &[f64]) -> f64 {
    let k = x.len();
    let mut s = 0.0;
    for a in 0..k {
        for b in 0..k {
            s += x[a] * m[a][b] * x[b];
        }
    }
    s
}

fn symmetrize(m: &mut [f64], n: usize) {
    for a in 0..n {
        for b in a + 1..n {
            let v = 0.5 * (m[a * n + b] + m[b * n + a]);
            m[a * n + b] = v;
            m[b * n + a] = v;
        }
    }
}
