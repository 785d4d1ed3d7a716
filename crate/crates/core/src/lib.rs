//! Machine-learned cubical decompositions (MLCD) of phase space.
//!
//! The pipeline samples orbits of a multistable ODE, clusters their endpoints
//! into attractors, fits a constrained piecewise-linear network to the
//! resulting labels, turns the network's kink hyperplanes into a parallelotope
//! grid, and verifies the Conley indices of the learned attracting
//! neighborhoods with cubical homology over GF(2).
//!
//! Modules follow the pipeline order:
//!
//! - [`dynamics`]: vector fields, time-1 maps, sampling, Hausdorff diagnostics
//! - [`labeling`]: 0-dimensional persistence clustering and the labeling function
//! - [`network`]: the grouped-row HardTanh regression network and its training
//! - [`decomposition`]: hyperplane arrangement, cells, and region classification
//! - [`homology`]: cubical complexes, Betti numbers, Conley checks, Morse reports
//! - [`benchmark`]: the regular cubical grid baseline
//! - [`harness`]: configuration, realizations, experiments, and reports

pub mod benchmark;
pub mod decomposition;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod homology;
pub mod labeling;
pub mod network;
pub mod rng;

pub use error::{Error, Result};

/// A point in state space.
pub type Point = Vec<f64>;
