use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::curve::{orthonormalize, solve_intersection_curve_with, CurveOptions, IntersectionCurve};
use super::shape::{normal_at, shape_operator_fast, volume3, wedge_area};
use super::surface::SurfaceSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    C1,
    #[serde(rename = "C2_global")]
    C2Global,
    #[serde(rename = "C2_local")]
    C2Local,
    C3,
    C3bb,
    CLee,
    #[serde(rename = "LFW")]
    Lfw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// The sample tuple achieving an infimum, sufficient to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    Normals { xi1: Vec<f64>, xi2: Vec<f64> },
    Global { side: usize, xi_a: Vec<f64>, xi_b: Vec<f64>, xi_s1: Vec<f64>, xi_s2: Vec<f64> },
    Local { side: usize, xi: Vec<f64>, v: Vec<f64>, n: Vec<f64> },
    Curvature { side: usize, xi: Vec<f64>, v: Vec<f64> },
    Hessian { side: usize, xi: Vec<f64>, w: Vec<f64>, n: Vec<f64> },
    Lee { side: usize, xi: Vec<f64>, n: Vec<f64> },
    Cone { xi1: Vec<f64>, tangents: Vec<Vec<f64>>, xi2: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub h_samples: usize,
    pub curves: usize,
    pub empty_curves: usize,
    pub curve_points: usize,
    pub surface_points: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub infimum: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub samples: SampleCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ConditionReport {
    fn new(condition: ConditionId, threshold: f64) -> Self {
        ConditionReport {
            condition,
            infimum: f64::INFINITY,
            threshold,
            verdict: Verdict::Fail,
            witness: None,
            samples: SampleCounts::default(),
            warnings: Vec::new(),
        }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        self.samples.evaluations += 1;
        if value < self.infimum {
            self.infimum = value;
            self.witness = Some(witness());
        }
    }

    fn finish(mut self) -> Self {
        if self.verdict != Verdict::NotApplicable {
            self.verdict = if self.infimum >= self.threshold { Verdict::Pass } else { Verdict::Fail };
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Sampling densities for the condition checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Points per axis for surface samples (C1 and LFW's ζ₂).
    pub surface_grid: usize,
    /// Points per axis for the auxiliary normals ζ̃₁, ζ̃₂ of the global C2 test.
    pub aux_grid: usize,
    pub curve_samples: usize,
    pub curve: CurveOptions,
    pub nvar_bound: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { surface_grid: 12, aux_grid: 4, curve_samples: 16, curve: CurveOptions::default(), nvar_bound: 0.2 }
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.1;

fn surfaces<'a>(s1: &'a SurfaceSpec, s2: &'a SurfaceSpec, side: usize) -> (&'a SurfaceSpec, &'a SurfaceSpec) {
    if side == 1 {
        (s1, s2)
    } else {
        (s2, s1)
    }
}

fn lift(s: &SurfaceSpec, xi: &DVector<f64>) -> DVector<f64> {
    let n = xi.len();
    let mut z = DVector::zeros(n + 1);
    z.rows_mut(0, n).copy_from(xi);
    z[n] = s.phi(xi.as_slice());
    z
}

fn vec_of(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Translations h = ζ₁ + ζ₂ built from `k` points per axis in each domain.
pub fn default_h_samples(s1: &SurfaceSpec, s2: &SurfaceSpec, k: usize) -> Vec<DVector<f64>> {
    let inner = |s: &SurfaceSpec| -> Vec<DVector<f64>> {
        let d = s.domain();
        let shrunk = match d {
            super::domain::Domain::Ball { center, radius } => super::domain::Domain::ball(center, 0.6 * radius),
            super::domain::Domain::Box { center, half_widths } => super::domain::Domain::Box {
                center: center.clone(),
                half_widths: half_widths.iter().map(|h| 0.6 * h).collect(),
            },
        };
        let mut pts = vec![vec_of(d.center())];
        let (lo, hi) = shrunk.bounding_box();
        let n = s.dim();
        let k = k.max(2);
        for idx in 0..k.pow(n as u32) {
            let mut rem = idx;
            let p = DVector::from_iterator(
                n,
                (0..n).map(|a| {
                    let i = rem % k;
                    rem /= k;
                    lo[a] + (hi[a] - lo[a]) * i as f64 / (k - 1) as f64
                }),
            );
            if shrunk.contains(p.as_slice()) && (&p - vec_of(d.center())).norm() > 1e-12 {
                pts.push(p);
            }
        }
        pts
    };
    let a = inner(s1);
    let b = inner(s2);
    let mut out = Vec::with_capacity(a.len() * b.len());
    for p in &a {
        for q in &b {
            out.push(lift(s1, p) + lift(s2, q));
        }
    }
    out
}

struct SideCurves {
    curves: Vec<(usize, IntersectionCurve)>,
    counts: SampleCounts,
}

fn side_curves(s1: &SurfaceSpec, s2: &SurfaceSpec, hs: &[DVector<f64>], opts: &CheckOptions) -> Result<SideCurves> {
    let mut curves = Vec::new();
    let mut counts = SampleCounts { h_samples: hs.len(), ..Default::default() };
    for h in hs {
        for side in [1, 2] {
            let (a, b) = surfaces(s1, s2, side);
            let c = solve_intersection_curve_with(a, b, h, opts.curve_samples, &opts.curve)?;
            counts.curves += 1;
            if c.empty {
                counts.empty_curves += 1;
            } else {
                counts.curve_points += c.samples.len();
                curves.push((side, c));
            }
        }
    }
    Ok(counts_checked(curves, counts)?)
}

fn counts_checked(curves: Vec<(usize, IntersectionCurve)>, counts: SampleCounts) -> Result<SideCurves> {
    if curves.is_empty() {
        return Err(Error::Inconclusive {
            op: "geometry::conditions",
            detail: format!("all {} curves are empty", counts.curves),
        });
    }
    Ok(SideCurves { curves, counts })
}

fn nvar_warnings(s1: &SurfaceSpec, s2: &SurfaceSpec, opts: &CheckOptions) -> Vec<String> {
    let mut out = Vec::new();
    for (i, s) in [(1, s1), (2, s2)] {
        let n0 = normal_at(s, s.domain().center());
        let spread = s
            .domain()
            .sample_points(opts.surface_grid)
            .iter()
            .map(|p| (normal_at(s, p.as_slice()) - &n0).norm())
            .fold(0.0, f64::max);
        if spread > opts.nvar_bound {
            out.push(format!(
                "normal variation {spread:.3} on S{i} exceeds {}; local and global C2 need not agree",
                opts.nvar_bound
            ));
        }
    }
    out
}

// Functionals, shared by the checks and by witness evaluation.

fn c1_value(s1: &SurfaceSpec, s2: &SurfaceSpec, xi1: &[f64], xi2: &[f64]) -> f64 {
    wedge_area(&normal_at(s1, xi1), &normal_at(s2, xi2))
}

fn global_value(s: &SurfaceSpec, s1: &SurfaceSpec, s2: &SurfaceSpec, a: &[f64], b: &[f64], t1: &[f64], t2: &[f64]) -> f64 {
    let za = lift(s, &vec_of(a));
    let zb = lift(s, &vec_of(b));
    let d = (za - zb).norm();
    let dn = normal_at(s, a) - normal_at(s, b);
    volume3(&dn, &normal_at(s1, t1), &normal_at(s2, t2)) / d
}

fn local_value(s: &SurfaceSpec, xi: &[f64], v: &[f64], n: &[f64]) -> f64 {
    let op = shape_operator_fast(s, &vec_of(xi));
    wedge_area(&op.apply_ambient(&vec_of(v)), &vec_of(n))
}

fn curvature_value(s: &SurfaceSpec, xi: &[f64], v: &[f64]) -> f64 {
    let op = shape_operator_fast(s, &vec_of(xi));
    let v = vec_of(v);
    op.apply_ambient(&v).dot(&v).abs()
}

fn hessian_value(s: &SurfaceSpec, xi: &[f64], w: &[f64], n: &[f64]) -> f64 {
    let h = s.hess(&vec_of(xi));
    wedge_area(&(h * vec_of(w)), &vec_of(n))
}

fn lee_value(s: &SurfaceSpec, xi: &[f64], n: &[f64]) -> Option<f64> {
    let h = s.hess(&vec_of(xi));
    if h.determinant().abs() < 1e-8 {
        return None;
    }
    let n = vec_of(n);
    let inv = h.try_inverse()?;
    Some((inv * &n).dot(&n).abs())
}

fn cone_value(s1: &SurfaceSpec, s2: &SurfaceSpec, xi1: &[f64], tangents: &[Vec<f64>], xi2: &[f64]) -> f64 {
    let n = s1.dim();
    let op = shape_operator_fast(s1, &vec_of(xi1));
    let mut span = vec![normal_at(s1, xi1)];
    for t in tangents {
        span.push(op.apply_ambient(&vec_of(t)));
    }
    let basis = orthonormalize(&span);
    if basis.len() < n {
        return 0.0;
    }
    let n2 = normal_at(s2, xi2);
    let mut r = n2.clone();
    for b in &basis {
        let p = b.dot(&n2);
        r.axpy(-p, b, 1.0);
    }
    r.norm()
}

/// Recomputes the functional value recorded by a witness.
pub fn evaluate_witness(w: &Witness, s1: &SurfaceSpec, s2: &SurfaceSpec) -> f64 {
    let side_surface = |side: usize| if side == 1 { s1 } else { s2 };
    match w {
        Witness::Normals { xi1, xi2 } => c1_value(s1, s2, xi1, xi2),
        Witness::Global { side, xi_a, xi_b, xi_s1, xi_s2 } => {
            global_value(side_surface(*side), s1, s2, xi_a, xi_b, xi_s1, xi_s2)
        }
        Witness::Local { side, xi, v, n } => local_value(side_surface(*side), xi, v, n),
        Witness::Curvature { side, xi, v } => curvature_value(side_surface(*side), xi, v),
        Witness::Hessian { side, xi, w, n } => hessian_value(side_surface(*side), xi, w, n),
        Witness::Lee { side, xi, n } => lee_value(side_surface(*side), xi, n).unwrap_or(0.0),
        Witness::Cone { xi1, tangents, xi2 } => cone_value(s1, s2, xi1, tangents, xi2),
    }
}

/// Right singular vector for the smallest singular value of `m` (columns = inputs).
fn min_direction(m: &DMatrix<f64>) -> DVector<f64> {
    let k = m.ncols();
    if k == 1 {
        return DVector::from_element(1, 1.0);
    }
    let g = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(g);
    let i = eig.eigenvalues.imin();
    eig.eigenvectors.column(i).clone_owned()
}

fn combine(vs: &[DVector<f64>], c: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(vs[0].len());
    for (v, a) in vs.iter().zip(c.iter()) {
        out.axpy(*a, v, 1.0);
    }
    out
}

pub fn check_c1(s1: &SurfaceSpec, s2: &SurfaceSpec, grid: usize, theta: f64) -> ConditionReport {
    let mut rep = ConditionReport::new(ConditionId::C1, theta);
    let p1 = s1.domain().sample_points(grid);
    let p2 = s2.domain().sample_points(grid);
    rep.samples.surface_points = p1.len() + p2.len();
    let n1: Vec<DVector<f64>> = p1.iter().map(|p| normal_at(s1, p.as_slice())).collect();
    let n2: Vec<DVector<f64>> = p2.iter().map(|p| normal_at(s2, p.as_slice())).collect();
    for (a, u) in n1.iter().enumerate() {
        for (b, v) in n2.iter().enumerate() {
            rep.offer(wedge_area(u, v), || Witness::Normals {
                xi1: p1[a].as_slice().to_vec(),
                xi2: p2[b].as_slice().to_vec(),
            });
        }
    }
    rep.finish()
}

pub fn check_c2(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h_samples: &[DVector<f64>],
    theta: f64,
) -> Result<(ConditionReport, ConditionReport)> {
    check_c2_with(s1, s2, h_samples, theta, &CheckOptions::default())
}

pub fn check_c2_with(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h_samples: &[DVector<f64>],
    theta: f64,
    opts: &CheckOptions,
) -> Result<(ConditionReport, ConditionReport)> {
    let sc = side_curves(s1, s2, h_samples, opts)?;
    let warnings = nvar_warnings(s1, s2, opts);
    let mut global = ConditionReport::new(ConditionId::C2Global, theta);
    let mut local = ConditionReport::new(ConditionId::C2Local, theta);
    let aux1 = s1.domain().sample_points(opts.aux_grid);
    let aux2 = s2.domain().sample_points(opts.aux_grid);
    let an1: Vec<DVector<f64>> = aux1.iter().map(|p| normal_at(s1, p.as_slice())).collect();
    let an2: Vec<DVector<f64>> = aux2.iter().map(|p| normal_at(s2, p.as_slice())).collect();
    for (side, curve) in &sc.curves {
        let s = if *side == 1 { s1 } else { s2 };
        let m = curve.samples.len();
        let normals: Vec<DVector<f64>> = curve.samples.iter().map(|p| normal_at(s, p.as_slice())).collect();
        let lifts: Vec<DVector<f64>> = curve.samples.iter().map(|p| lift(s, p)).collect();
        for a in 0..m {
            for b in a + 1..m {
                let d = (&lifts[a] - &lifts[b]).norm();
                if d < 1e-12 {
                    continue;
                }
                let dn = &normals[a] - &normals[b];
                for (i1, u) in an1.iter().enumerate() {
                    for (i2, v) in an2.iter().enumerate() {
                        let val = volume3(&dn, u, v) / d;
                        global.offer(val, || Witness::Global {
                            side: *side,
                            xi_a: curve.samples[a].as_slice().to_vec(),
                            xi_b: curve.samples[b].as_slice().to_vec(),
                            xi_s1: aux1[i1].as_slice().to_vec(),
                            xi_s2: aux2[i2].as_slice().to_vec(),
                        });
                    }
                }
            }
        }
        for (k, xi) in curve.samples.iter().enumerate() {
            let op = shape_operator_fast(s, xi);
            let nrm = &curve.conormals[k];
            let tangents = &curve.tangents[k];
            let cols: Vec<DVector<f64>> = tangents
                .iter()
                .map(|t| {
                    let sv = op.apply_ambient(t);
                    let p = sv.dot(nrm);
                    sv - nrm * p
                })
                .collect();
            let mat = DMatrix::from_columns(&cols);
            let c = min_direction(&mat);
            let v = combine(tangents, &c);
            let val = wedge_area(&op.apply_ambient(&v), nrm);
            local.offer(val, || Witness::Local {
                side: *side,
                xi: xi.as_slice().to_vec(),
                v: v.as_slice().to_vec(),
                n: nrm.as_slice().to_vec(),
            });
        }
    }
    for rep in [&mut global, &mut local] {
        rep.samples.h_samples = sc.counts.h_samples;
        rep.samples.curves = sc.counts.curves;
        rep.samples.empty_curves = sc.counts.empty_curves;
        rep.samples.curve_points = sc.counts.curve_points;
        rep.samples.surface_points = aux1.len() + aux2.len();
        rep.warnings = warnings.clone();
    }
    Ok((global.finish(), local.finish()))
}

pub fn check_c3(s1: &SurfaceSpec, s2: &SurfaceSpec, h_samples: &[DVector<f64>], theta: f64) -> Result<ConditionReport> {
    check_c3_with(s1, s2, h_samples, theta, &CheckOptions::default())
}

pub fn check_c3_with(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h_samples: &[DVector<f64>],
    theta: f64,
    opts: &CheckOptions,
) -> Result<ConditionReport> {
    let sc = side_curves(s1, s2, h_samples, opts)?;
    let mut rep = ConditionReport::new(ConditionId::C3, theta);
    for (side, curve) in &sc.curves {
        let s = if *side == 1 { s1 } else { s2 };
        for (k, xi) in curve.samples.iter().enumerate() {
            let op = shape_operator_fast(s, xi);
            let tangents = &curve.tangents[k];
            let q = DMatrix::from_fn(tangents.len(), tangents.len(), |a, b| {
                op.apply_ambient(&tangents[b]).dot(&tangents[a])
            });
            let q = (&q + q.transpose()) * 0.5;
            let eig = nalgebra::SymmetricEigen::new(q);
            let lmax = eig.eigenvalues.max();
            let lmin = eig.eigenvalues.min();
            let c = if lmax > 0.0 && lmin < 0.0 {
                let e_p = eig.eigenvectors.column(eig.eigenvalues.imax()).clone_owned();
                let e_m = eig.eigenvectors.column(eig.eigenvalues.imin()).clone_owned();
                let c = e_p * (-lmin).sqrt() + e_m * lmax.sqrt();
                let len = c.norm();
                c / len
            } else {
                let i = eig.eigenvalues.iamin();
                eig.eigenvectors.column(i).clone_owned()
            };
            let v = combine(tangents, &c);
            let val = op.apply_ambient(&v).dot(&v).abs();
            rep.offer(val, || Witness::Curvature { side: *side, xi: xi.as_slice().to_vec(), v: v.as_slice().to_vec() });
        }
    }
    rep.samples = SampleCounts { evaluations: rep.samples.evaluations, ..sc.counts };
    Ok(rep.finish())
}

pub fn check_c3bb_and_clee(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h_samples: &[DVector<f64>],
    theta: f64,
) -> Result<(ConditionReport, ConditionReport)> {
    check_c3bb_and_clee_with(s1, s2, h_samples, theta, &CheckOptions::default())
}

pub fn check_c3bb_and_clee_with(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h_samples: &[DVector<f64>],
    theta: f64,
    opts: &CheckOptions,
) -> Result<(ConditionReport, ConditionReport)> {
    let sc = side_curves(s1, s2, h_samples, opts)?;
    let mut bb = ConditionReport::new(ConditionId::C3bb, theta);
    let mut lee = ConditionReport::new(ConditionId::CLee, theta);
    let mut singular = 0usize;
    for (side, curve) in &sc.curves {
        let s = if *side == 1 { s1 } else { s2 };
        for (k, xi) in curve.samples.iter().enumerate() {
            let h = s.hess(xi);
            let n = &curve.projected_normals[k];
            let ws = &curve.projected_tangents[k];
            let cols: Vec<DVector<f64>> = ws
                .iter()
                .map(|w| {
                    let hw = &h * w;
                    let p = hw.dot(n);
                    hw - n * p
                })
                .collect();
            let c = min_direction(&DMatrix::from_columns(&cols));
            let w = combine(ws, &c);
            let val = wedge_area(&(&h * &w), n);
            bb.offer(val, || Witness::Hessian {
                side: *side,
                xi: xi.as_slice().to_vec(),
                w: w.as_slice().to_vec(),
                n: n.as_slice().to_vec(),
            });
            match lee_value(s, xi.as_slice(), n.as_slice()) {
                Some(v) => lee.offer(v, || Witness::Lee { side: *side, xi: xi.as_slice().to_vec(), n: n.as_slice().to_vec() }),
                None => singular += 1,
            }
        }
    }
    for rep in [&mut bb, &mut lee] {
        rep.samples = SampleCounts { evaluations: rep.samples.evaluations, ..sc.counts.clone() };
    }
    if singular > 0 {
        lee.verdict = Verdict::NotApplicable;
        lee.infimum = 0.0;
        lee.witness = None;
        lee.warnings.push(format!("Hessian singular (|det| < 1e-8) at {singular} curve samples"));
    }
    Ok((bb.finish(), lee.finish()))
}

pub fn check_lfw(s1: &SurfaceSpec, s2: &SurfaceSpec, h: &DVector<f64>, theta: f64) -> Result<ConditionReport> {
    check_lfw_with(s1, s2, h, theta, &CheckOptions::default())
}

pub fn check_lfw_with(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h: &DVector<f64>,
    theta: f64,
    opts: &CheckOptions,
) -> Result<ConditionReport> {
    let curve = solve_intersection_curve_with(s1, s2, h, opts.curve_samples, &opts.curve)?;
    if curve.empty {
        return Err(Error::Inconclusive { op: "geometry::check_lfw", detail: "C1(h) is empty".into() });
    }
    let n = s1.dim();
    let mut rep = ConditionReport::new(ConditionId::Lfw, theta);
    let p2 = s2.domain().sample_points(opts.surface_grid);
    let n2: Vec<DVector<f64>> = p2.iter().map(|p| normal_at(s2, p.as_slice())).collect();
    for (k, xi) in curve.samples.iter().enumerate() {
        let op = shape_operator_fast(s1, xi);
        let mut span = vec![normal_at(s1, xi.as_slice())];
        for t in &curve.tangents[k] {
            span.push(op.apply_ambient(t));
        }
        let basis = orthonormalize(&span);
        let tangents: Vec<Vec<f64>> = curve.tangents[k].iter().map(|t| t.as_slice().to_vec()).collect();
        for (j, v) in n2.iter().enumerate() {
            let val = if basis.len() < n {
                0.0
            } else {
                let mut r = v.clone();
                for b in &basis {
                    let p = b.dot(v);
                    r.axpy(-p, b, 1.0);
                }
                r.norm()
            };
            rep.offer(val, || Witness::Cone {
                xi1: xi.as_slice().to_vec(),
                tangents: tangents.clone(),
                xi2: p2[j].as_slice().to_vec(),
            });
        }
    }
    rep.samples.h_samples = 1;
    rep.samples.curves = 1;
    rep.samples.curve_points = curve.samples.len();
    rep.samples.surface_points = p2.len();
    Ok(rep.finish())
}

/// Points α·N₁(ζ) for ζ on C₁(h) and α in `alphas`.
pub fn normal_cone_samples(
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    h: &DVector<f64>,
    alphas: &[f64],
    n_samples: usize,
) -> Result<Vec<DVector<f64>>> {
    let curve = super::curve::solve_intersection_curve(s1, s2, h, n_samples)?;
    if curve.empty {
        return Err(Error::Inconclusive { op: "geometry::normal_cone_samples", detail: "C1(h) is empty".into() });
    }
    let mut out = Vec::with_capacity(alphas.len() * curve.samples.len());
    for xi in &curve.samples {
        let nrm = normal_at(s1, xi.as_slice());
        for &a in alphas {
            out.push(&nrm * a);
        }
    }
    Ok(out)
}
