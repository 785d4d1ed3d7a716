//! The constrained single-hidden-layer regression network.
//!
//! Hidden units come in `d` groups of `q`; every unit of group `i` shares the
//! direction `u_i`, so the kink hyperplanes of the network form `d` families
//! of parallel hyperplanes.

mod net;
mod train;

pub use net::{hardtanh, init_constrained, ConstrainedNet, Gradient};
pub use train::{
    check_convergence, check_span, split_indices, train, write_curves_csv, Adam, TrainConfig,
    TrainResult,
};
