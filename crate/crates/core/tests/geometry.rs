mod common_surfaces;

use bilin_core::geometry::*;
use common_surfaces::{cone, hyperbolic, paraboloid, v};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn wedge_area_examples() {
    assert!(close(wedge_area(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])), 1.0, 1e-15));
    let u = v(&[1.0, 2.0, 3.0]);
    assert!(wedge_area(&u, &u) < 1e-7);
    let s5 = 5f64.sqrt();
    let a = v(&[-2.0 / s5, 0.0, 1.0 / s5]);
    let b = v(&[2.0 / s5, 0.0, 1.0 / s5]);
    // cross product oracle: |a × b|
    let cross = v(&[a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]);
    assert!(close(wedge_area(&a, &b), cross.norm(), 1e-14));
    assert!(close(wedge_area(&a, &b), 0.8, 1e-14));
}

#[test]
fn parallelepiped_volume_examples() {
    let e = |i: usize| {
        let mut x = vec![0.0; 3];
        x[i] = 1.0;
        v(&x)
    };
    assert!(close(parallelepiped_volume(&e(0), &e(1), &e(2)).unwrap(), 1.0, 1e-14));
    assert!(parallelepiped_volume(&e(0), &e(1), &(e(0) + e(1))).unwrap() < 1e-7);
    let (a, b, c) = (v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0]), v(&[1.0, 1.0, 2.0]));
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    assert!(close(parallelepiped_volume(&a, &b, &c).unwrap(), det.abs(), 1e-12));
    assert!(parallelepiped_volume(&v(&[1.0, 0.0]), &v(&[0.0, 1.0]), &v(&[1.0, 1.0])).is_err());
}

#[test]
fn surface_point_examples() {
    let p = paraboloid(&[0.0, 0.0], 1.5);
    let sp = surface_point(&p, &v(&[0.0, 0.0])).unwrap();
    assert!((sp.normal - v(&[0.0, 0.0, 1.0])).norm() < 1e-15);
    let sp = surface_point(&p, &v(&[1.0, 0.0])).unwrap();
    let s5 = 5f64.sqrt();
    assert!((&sp.normal - v(&[-2.0 / s5, 0.0, 1.0 / s5])).norm() < 1e-15);
    for t in &sp.tangent_basis {
        assert!(t.dot(&sp.normal).abs() < 1e-12);
        assert!(close(t.norm(), 1.0, 1e-12));
    }
    let c = cone(&[1.0, 0.0], 0.3);
    let sp = surface_point(&c, &v(&[1.0, 0.0])).unwrap();
    let s2 = 2f64.sqrt();
    assert!((&sp.normal - v(&[-1.0 / s2, 0.0, 1.0 / s2])).norm() < 1e-15);
    assert!(matches!(surface_point(&c, &v(&[3.0, 0.0])), Err(bilin_core::Error::Domain { .. })));
}

#[test]
fn shape_operator_examples() {
    let p = paraboloid(&[0.0, 0.0], 0.5);
    let s = shape_operator(&p, &v(&[0.0, 0.0])).unwrap();
    assert!((s.matrix.clone() - nalgebra::DMatrix::identity(2, 2) * 2.0).abs().max() < 1e-8);
    assert!(close(s.eigenvalues[0], 2.0, 1e-12) && close(s.eigenvalues[1], 2.0, 1e-12));

    let h = hyperbolic(&[0.0, 0.0], 0.5);
    let s = shape_operator(&h, &v(&[0.0, 0.0])).unwrap();
    assert!(close(s.eigenvalues[0], 2.0, 1e-12) && close(s.eigenvalues[1], -2.0, 1e-12));

    let c = cone(&[1.0, 0.0], 0.3);
    let s = shape_operator(&c, &v(&[1.0, 0.0])).unwrap();
    let fd = fd_shape_matrix(&c, &s.base);
    let fd_eig = nalgebra::SymmetricEigen::new((&fd + fd.transpose()) * 0.5).eigenvalues;
    let nonzero = fd_eig.iter().cloned().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    assert!(s.eigenvalues.iter().any(|l| l.abs() < 1e-12));
    assert!(s.eigenvalues.iter().any(|l| close(*l, nonzero, 1e-6) && l.abs() > 0.1));
}

#[test]
fn second_fundamental_form_examples() {
    let p = paraboloid(&[0.0, 0.0], 0.5);
    assert!(close(second_fundamental_form(&p, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 2.0, 1e-12));
    let h = hyperbolic(&[0.0, 0.0], 0.5);
    let r = 0.5f64.sqrt();
    assert!(second_fundamental_form(&h, &v(&[0.0, 0.0]), &v(&[r, r])).unwrap().abs() < 1e-12);
    assert_eq!(second_fundamental_form(&p, &v(&[0.2, 0.1]), &v(&[0.0, 0.0])).unwrap(), 0.0);
}

#[test]
fn intersection_curve_examples() {
    let p = paraboloid(&[0.0, 0.0], 1.2);
    let c = solve_intersection_curve(&p, &p, &v(&[0.0, 0.0, 2.0]), 64).unwrap();
    assert!(!c.empty);
    assert!(c.samples.len() >= 32);
    for s in &c.samples {
        assert!(close(s.norm(), 1.0, 1e-10));
    }
    let e = solve_intersection_curve(&p, &p, &v(&[0.0, 0.0, -1.0]), 64).unwrap();
    assert!(e.empty && e.samples.is_empty());
    let k = SurfaceSpec::new(2, SurfaceKind::Cone, Domain::ball(&[0.0, 0.0], 1.0), 0.1);
    assert!(k.is_err());
    let k = cone(&[0.6, 0.0], 0.4);
    let q = paraboloid(&[0.0, 0.0], 0.6);
    let c = solve_intersection_curve(&q, &k, &v(&[0.6, 0.0, 0.75]), 40).unwrap();
    assert!(!c.empty);
    for (i, s) in c.samples.iter().enumerate() {
        assert!(c.residuals[i] <= 1e-10);
        let y = v(&[0.6 - s[0], -s[1]]);
        let direct = q.phi(s.as_slice()) + k.phi(y.as_slice()) - 0.75;
        assert!(direct.abs() <= 1e-10);
        let g = q.grad(s) - k.grad(&y);
        for t in &c.projected_tangents[i] {
            assert!(t.dot(&g).abs() <= 1e-6 * g.norm());
        }
        for t in &c.tangents[i] {
            assert!(t.dot(&c.conormals[i]).abs() <= 1e-8);
        }
        let pn = &c.projected_normals[i];
        assert!(wedge_area(pn, &g) <= 1e-6 * g.norm());
    }
}

#[test]
fn level_set_matches_dense_grid_oracle() {
    // A fine grid sign scan locates the same curve within a grid cell.
    let q = paraboloid(&[0.0, 0.0], 0.6);
    let k = cone(&[0.6, 0.0], 0.4);
    let h = v(&[0.6, 0.0, 0.75]);
    let c = solve_intersection_curve(&q, &k, &h, 0).unwrap();
    let f = |x: f64, y: f64| q.phi(&[x, y]) + k.phi(&[0.6 - x, -y]) - 0.75;
    let m = 400;
    let step = 1.2 / m as f64;
    let mut crossings = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (-0.6 + i as f64 * step, -0.6 + j as f64 * step);
            if x * x + y * y > 0.16 {
                continue;
            }
            if f(x, y).signum() != f(x + step, y).signum() {
                crossings.push((x, y));
            }
        }
    }
    assert!(!crossings.is_empty());
    for (x, y) in crossings {
        let d = c.samples.iter().map(|s| ((s[0] - x).powi(2) + (s[1] - y).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
        assert!(d < 0.05, "grid crossing ({x},{y}) far from curve: {d}");
    }
}

fn elliptic_pair(radius: f64) -> (SurfaceSpec, SurfaceSpec) {
    (paraboloid(&[1.0, 0.0], radius), paraboloid(&[-1.0, 0.0], radius))
}

#[test]
fn c1_examples() {
    let (a, b) = elliptic_pair(0.02);
    let r = check_c1(&a, &b, 6, 0.5);
    assert!(r.passed());
    assert!(close(r.infimum, 0.8, 0.02), "{}", r.infimum);
    let w = r.witness.as_ref().unwrap();
    assert!(close(evaluate_witness(w, &a, &b), r.infimum, 1e-10));

    let s = paraboloid(&[0.3, 0.0], 0.2);
    let r = check_c1(&s, &s, 6, 0.1);
    assert!(!r.passed());
    assert!(r.infimum < 1e-7);

    // Paraboloid normals with |∇φ₁| = 1 point along cone normals at the same angle.
    let p = paraboloid(&[0.5, 0.0], 0.1);
    let k = cone(&[1.0, 0.0], 0.2);
    let r = check_c1(&p, &k, 8, 0.1);
    assert!(!r.passed(), "{}", r.infimum);
}

#[test]
fn c1_report_verdict_matches_infimum() {
    let (a, b) = elliptic_pair(0.2);
    for theta in [0.1, 0.5, 0.7, 0.9] {
        let r = check_c1(&a, &b, 8, theta);
        assert_eq!(r.passed(), r.infimum >= theta);
    }
}

#[test]
fn c2_c3_elliptic_pair_pass() {
    let (a, b) = elliptic_pair(0.2);
    let hs = default_h_samples(&a, &b, 3);
    let (g, l) = check_c2(&a, &b, &hs, 0.1).unwrap();
    assert!(g.passed(), "global {}", g.infimum);
    assert!(l.passed(), "local {}", l.infimum);
    let c3 = check_c3(&a, &b, &hs, 0.1).unwrap();
    assert!(c3.passed());
    for r in [&g, &l, &c3] {
        let w = r.witness.as_ref().unwrap();
        assert!(close(evaluate_witness(w, &a, &b), r.infimum, 1e-10));
    }
}

#[test]
fn c2_local_near_origin_is_two() {
    let a = paraboloid(&[0.05, 0.0], 0.03);
    let b = paraboloid(&[-0.05, 0.0], 0.03);
    let hs = default_h_samples(&a, &b, 3);
    let (_, l) = check_c2(&a, &b, &hs, 0.1).unwrap();
    assert!(l.infimum >= 2.0 * (1.0 - 0.05) && l.infimum <= 2.0 * 1.01, "{}", l.infimum);
    let c3 = check_c3(&a, &b, &hs, 0.1).unwrap();
    assert!(close(c3.infimum, 2.0, 0.1));
}

fn lee_pair() -> (SurfaceSpec, SurfaceSpec) {
    (hyperbolic(&[1.0, 1.0], 0.2), hyperbolic(&[-1.0, -1.0], 0.2))
}

#[test]
fn lee_configuration_fails_curvature_conditions() {
    let (a, b) = lee_pair();
    assert!(check_c1(&a, &b, 8, 0.1).passed());
    let hs = default_h_samples(&a, &b, 3);
    let c3 = check_c3(&a, &b, &hs, 0.1).unwrap();
    assert!(!c3.passed() && c3.infimum < 1e-3, "{}", c3.infimum);
    let (_, l) = check_c2(&a, &b, &hs, 0.1).unwrap();
    assert!(!l.passed() && l.infimum < 1e-3, "{}", l.infimum);
    let h = v(&[0.0, 0.0, 0.0]);
    let lfw = check_lfw(&a, &b, &h, 0.1).unwrap();
    assert!(!lfw.passed(), "{}", lfw.infimum);
}

#[test]
fn paraboloid_cone_pair_passes_c1_c2() {
    let a = paraboloid(&[0.0, 0.0], 0.1);
    let b = cone(&[1.0, 0.0], 0.25);
    assert!(check_c1(&a, &b, 8, 0.1).passed());
    let hs = default_h_samples(&a, &b, 3);
    let (g, l) = check_c2(&a, &b, &hs, 0.1).unwrap();
    assert!(g.passed(), "{}", g.infimum);
    assert!(l.passed(), "{}", l.infimum);
    let c3 = check_c3(&b, &a, &default_h_samples(&b, &a, 3), 0.1).unwrap();
    assert!(c3.passed(), "{}", c3.infimum);
}

#[test]
fn c3_pass_implies_c2_local_pass_on_same_samples() {
    let (a, b) = elliptic_pair(0.2);
    let hs = default_h_samples(&a, &b, 3);
    let c3 = check_c3(&a, &b, &hs, 0.1).unwrap();
    let (_, l) = check_c2(&a, &b, &hs, c3.infimum).unwrap();
    assert!(c3.passed());
    assert!(l.passed());
}

#[test]
fn all_empty_curves_is_inconclusive() {
    let (a, b) = elliptic_pair(0.1);
    let hs = vec![v(&[0.0, 0.0, -5.0])];
    assert!(matches!(check_c2(&a, &b, &hs, 0.1), Err(bilin_core::Error::Inconclusive { .. })));
    assert!(matches!(check_lfw(&a, &b, &hs[0], 0.1), Err(bilin_core::Error::Inconclusive { .. })));
}

#[test]
fn c3bb_and_clee_examples() {
    let (a, b) = elliptic_pair(0.2);
    let hs = default_h_samples(&a, &b, 2);
    let (bb, lee) = check_c3bb_and_clee(&a, &b, &hs, 0.1).unwrap();
    assert!(close(lee.infimum, 0.5, 1e-12));
    assert!(close(bb.infimum, 2.0, 1e-12));
    let (a, b) = lee_pair();
    let hs = vec![v(&[0.0, 0.0, 0.0])];
    let (_, lee) = check_c3bb_and_clee(&a, &b, &hs, 0.1).unwrap();
    assert!(lee.infimum < 1e-9, "{}", lee.infimum);
    let p = paraboloid(&[0.0, 0.0], 0.1);
    let k = cone(&[1.0, 0.0], 0.25);
    let (_, lee) = check_c3bb_and_clee(&k, &p, &default_h_samples(&k, &p, 2), 0.1).unwrap();
    assert_eq!(lee.verdict, Verdict::NotApplicable);
}

#[test]
fn lfw_examples() {
    let (a, b) = elliptic_pair(0.1);
    let h = v(&[0.0, 0.0, 2.0]);
    let r = check_lfw(&a, &b, &h, 0.1).unwrap();
    assert!(r.passed(), "{}", r.infimum);
    assert!(close(evaluate_witness(r.witness.as_ref().unwrap(), &a, &b), r.infimum, 1e-10));
    // A horizontal plane: its normal e₃ lies in the cone over the flat diagonal.
    let s1 = hyperbolic(&[1.0, 1.0], 0.2);
    let plane = SurfaceSpec::new(
        2,
        SurfaceKind::Quadratic { coefficients: vec![0.0, 0.0] },
        Domain::ball(&[-1.0, -1.0], 0.2),
        0.1,
    )
    .unwrap();
    let r = check_lfw(&s1, &plane, &v(&[0.0, 0.0, 0.0]), 0.1).unwrap();
    assert!(!r.passed() && r.infimum < 1e-8, "{}", r.infimum);
}

#[test]
fn normal_cone_examples() {
    let p = paraboloid(&[0.0, 0.0], 1.2);
    let h = v(&[0.0, 0.0, 2.0]);
    let zero = normal_cone_samples(&p, &p, &h, &[0.0, 0.0], 20).unwrap();
    assert!(zero.iter().all(|z| z.norm() == 0.0));
    assert_eq!(zero.len(), 40);
    let one = normal_cone_samples(&p, &p, &h, &[1.0], 20).unwrap();
    let s5 = 5f64.sqrt();
    for z in &one {
        assert!(close(z[2], 1.0 / s5, 1e-9));
        assert!(close((z[0] * z[0] + z[1] * z[1]).sqrt(), 2.0 / s5, 1e-9));
    }
    let three = normal_cone_samples(&p, &p, &h, &[1.0, -1.0, 2.0], 20).unwrap();
    assert_eq!(three.len(), 60);
}

#[test]
fn report_json_has_required_fields() {
    let (a, b) = elliptic_pair(0.1);
    let r = check_c1(&a, &b, 4, 0.1);
    let j = serde_json::to_value(&r).unwrap();
    for f in ["condition", "infimum", "threshold", "verdict", "witness", "samples"] {
        assert!(j.get(f).is_some(), "{f}");
    }
    let back: ConditionReport = serde_json::from_value(j).unwrap();
    assert_eq!(back, r);
}

#[test]
fn shape_operator_equals_hessian_at_critical_points() {
    for kind in [
        SurfaceKind::EllipticParaboloid,
        SurfaceKind::HyperbolicParaboloid,
        SurfaceKind::Quadratic { coefficients: vec![0.7, -1.3, 0.2] },
        SurfaceKind::MixedDegree { k: 4 },
    ] {
        let s = SurfaceSpec::new(3, kind, Domain::ball(&[0.0, 0.0, 0.0], 0.3), 0.1).unwrap();
        let x = v(&[0.0, 0.0, 0.0]);
        let op = shape_operator(&s, &x).unwrap();
        assert!((op.matrix - s.hess(&x)).abs().max() < 1e-8);
    }
}

proptest! {
    #[test]
    fn lagrange_identity(u in prop::collection::vec(-3.0f64..3.0, 4), w in prop::collection::vec(-3.0f64..3.0, 4)) {
        let (u, w) = (v(&u), v(&w));
        let a = wedge_area(&u, &w);
        let lhs = a * a + u.dot(&w).powi(2);
        let rhs = u.dot(&u) * w.dot(&w);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn surface_point_invariants(x in -0.25f64..0.25, y in -0.25f64..0.25) {
        let s = SurfaceSpec::new(2, SurfaceKind::MixedDegree { k: 3 }, Domain::ball(&[0.3, 0.1], 0.3), 0.1).unwrap();
        let xi = v(&[0.3 + x, 0.1 + y]);
        let sp = surface_point(&s, &xi).unwrap();
        prop_assert!((sp.normal.norm() - 1.0).abs() <= 1e-12);
        for t in &sp.tangent_basis {
            prop_assert!(t.dot(&sp.normal).abs() <= 1e-10);
        }
        let op = shape_operator(&s, &xi).unwrap();
        prop_assert!((&op.matrix - op.matrix.transpose()).abs().max() <= 1e-9);
        let rec = &op.eigenvectors * nalgebra::DMatrix::from_diagonal(&op.eigenvalues) * op.eigenvectors.transpose();
        prop_assert!((rec - &op.matrix).abs().max() <= 1e-8);
        for i in 0..2 {
            let mut c = nalgebra::DVector::zeros(2);
            c[i] = 1.0;
            let sv = &op.matrix * &c;
            prop_assert!(c.dot(&sv).abs() <= sv.norm() + 1e-12);
        }
    }

    #[test]
    fn curve_tangents_orthogonal_to_level_gradient(h3 in 1.0f64..3.0) {
        let p = paraboloid(&[0.0, 0.0], 1.5);
        let c = solve_intersection_curve(&p, &p, &v(&[0.2, -0.1, h3]), 24).unwrap();
        for (i, s) in c.samples.iter().enumerate() {
            let g = p.grad(s) - p.grad(&(v(&[0.2, -0.1]) - s));
            for t in &c.projected_tangents[i] {
                prop_assert!(t.dot(&g).abs() <= 1e-6 * g.norm());
            }
        }
    }
}
