//! Wave packet decompositions f = Σ_T f_T adapted to a cube of side R:
//! smoothly averaged Voronoi frequency cells of side r⁻¹ ≈ R^{-1/2} times a
//! spatial partition of unity at scale c⁻²r.

mod bump;
mod checks;
mod decompose;

pub use bump::BumpProfile;
pub use checks::{
    commutator_constant, far_tube_decay, fit_constant, margin_shift_constant, mass_redistribution_check,
    max_packet_diameter, qest_check, reconstruction_residual, write_inventory, FarTubeBin, FarTubeOptions, FarTubeReport, QestReport,
};
pub use decompose::{decompose, packet_radius, PacketDecomposition, PacketParams, Tube};
