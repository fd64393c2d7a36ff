//! Free waves e^{itφ(D)} on frequency lattices, bilinear space-time norms
//! on cubes and empirical scaling of their best constants.

mod fft;
mod grid;
mod knapp;
mod norm;
mod scaling;
mod snapshot;
mod wave;

pub use grid::FrequencyGrid;
pub use knapp::{elliptic_pair, generate_knapp, generate_knapp_in_window, generate_lee_pair, KnappPair, KnappPlate, CONORMAL_WIDTH, TANGENT_WIDTH};
pub use norm::{bilinear_lp_norm, check_coverage, gradient_diameter, CubeRegion};
pub use scaling::{estimate_scaling_exponent, fit_ratios, write_scaling_csv, ScaleData, ScalingFit, ScalingPoint};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use wave::{init_wave, SpatialField, WaveState};
