//! Vector fields, time-1 maps, and orbit diagnostics.

mod domain;
pub mod hill;
pub mod integrate;
mod orbits;
mod sampling;
mod systems;

pub use domain::HyperRectangle;
pub use hill::{hill_neg, hill_pos, HillParams};
pub use integrate::{DormandPrince, Flow, IntegratorOptions};
pub use orbits::{
    flow_terminal, hausdorff, iterate_time1, iterate_time1_with, read_ensemble_csv, stabilization_index,
    write_ensemble_csv, OrbitEnsemble, ESCAPE_INFLATION,
};
pub use sampling::latin_hypercube;
pub use systems::{eval_field, SystemKind, SystemSpec, VectorField, CATALOG};
