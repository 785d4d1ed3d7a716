//! Parallelotope decompositions built from the kink hyperplanes of a trained
//! [`ConstrainedNet`](crate::network::ConstrainedNet).

mod arrangement;
mod cells;
mod regions;

pub use arrangement::{extract_arrangement, Arrangement, DEDUP_TOL};
pub use cells::{enumerate_cells, CellGrid};
pub use regions::{classify_cells, write_plot_csv, CellTag, RegionAssignment, Tag};
