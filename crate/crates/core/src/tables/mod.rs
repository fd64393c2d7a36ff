//! Dyadic cube partitions, the averaging lemma, tables of depth C₀ and the
//! induction-on-scales recursion for the bilinear constant.

mod partition;
mod recursion;
mod select;
mod table;

pub use partition::{interior, CubePartition, InteriorMask};
pub use recursion::{
    closed_form_product, iterate_recursion, recursion_exponent, write_trace, RecursionParams, RecursionStep,
    RecursionTrace,
};
pub use select::{select_parent_cube, SampledField, SelectedCube};
pub use table::{build_table, build_table_from_waves, CrossTermMax, Table};
