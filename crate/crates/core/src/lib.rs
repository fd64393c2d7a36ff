//! Numerical laboratory for bilinear Fourier extension estimates.
//!
//! The crate is organised around five layers: surface geometry and the
//! transversality/curvature conditions, free waves on frequency lattices,
//! wave packet decompositions, tables on dyadic cube partitions, and energy
//! estimates across thickened normal cones.

pub mod energy;
pub mod error;
pub mod fit;
pub mod freewave;
pub mod geometry;
pub mod quad;
pub mod tables;
pub mod wavepacket;

pub use error::{Error, Result};
