//! Graph hypersurfaces, their shape operators and intersection curves, and
//! sample-based certification of the transversality and curvature conditions.

mod conditions;
mod curve;
mod domain;
mod graph;
mod shape;
mod surface;

pub use conditions::{
    check_c1, check_c2, check_c2_with, check_c3, check_c3_with, check_c3bb_and_clee, check_c3bb_and_clee_with,
    check_lfw, check_lfw_with, default_h_samples, evaluate_witness, normal_cone_samples, CheckOptions,
    ConditionId, ConditionReport, SampleCounts, Verdict, Witness, DEFAULT_THRESHOLD,
};
pub(crate) use curve::complement;
pub use curve::{solve_intersection_curve, solve_intersection_curve_with, CurveOptions, IntersectionCurve};
pub use domain::Domain;
pub use graph::TabulatedGraph;
pub use shape::{
    fd_shape_matrix, normal_at, parallelepiped_volume, second_fundamental_form, shape_operator, surface_point,
    wedge_area, ShapeOperator, SurfacePoint,
};
pub use surface::{
    catalog_name, catalog_parameters, CustomGraph, ScalarFn, SurfaceDescriptor, SurfaceKind, SurfaceSpec, VectorFn,
    CATALOG,
};
