#![allow(dead_code)]

use bilin_core::geometry::{Domain, SurfaceKind, SurfaceSpec};
use nalgebra::DVector;

pub fn paraboloid(center: &[f64], radius: f64) -> SurfaceSpec {
    SurfaceSpec::new(center.len(), SurfaceKind::EllipticParaboloid, Domain::ball(center, radius), 0.1).unwrap()
}

pub fn hyperbolic(center: &[f64], radius: f64) -> SurfaceSpec {
    SurfaceSpec::new(center.len(), SurfaceKind::HyperbolicParaboloid, Domain::ball(center, radius), 0.1).unwrap()
}

pub fn cone(center: &[f64], radius: f64) -> SurfaceSpec {
    SurfaceSpec::new(center.len(), SurfaceKind::Cone, Domain::ball(center, radius), 0.1).unwrap()
}

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
