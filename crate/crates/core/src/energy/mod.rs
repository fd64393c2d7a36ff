//! Energy of free waves in thin neighbourhoods of normal cones, and the
//! oscillatory kernel behind it.

mod cone;
mod estimate;
mod kernel;

pub use cone::ThickenedSurface;
pub use estimate::{
    control_configuration, energy_in_neighborhood, energy_ratio_sweep, transversal_configuration, write_sweep_csv,
    EnergyConfiguration, EnergySweep, EnergyWindow, PacketFamily, SweepPoint,
};
pub use kernel::{kernel_decay_probe, KernelProbe, KernelReport, SpectralWindow};
