//! Regular cubical grids labeled vertex by vertex, the baseline against
//! which learned decompositions are compared.

mod grid;
mod labelers;
mod search;

pub use grid::{classify_regular, RegularGrid};
pub use labelers::{label_vertices, nearest_attractor, Labeler};
pub use search::{min_grid_search, GridProfile, GridSearch};
