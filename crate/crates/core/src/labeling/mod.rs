//! Attractor identification by 0-dimensional Vietoris–Rips persistence.
//!
//! Terminal orbit points are clustered by single linkage; the clusters stand
//! in for the attractors and induce a label on every initial condition.

mod balance;
mod clusters;
mod dataset;
mod persistence;
mod union_find;

pub use balance::{balance, BalanceStrategy};
pub use clusters::{
    choose_num_clusters, choose_num_clusters_with, cluster_labels, label_terminal_points,
    ClusterAssignment, ClusteringOptions, TerminalLabels,
    LabelOrder, GAP_RATIO_MIN,
};
pub use dataset::{read_diagram_csv, write_diagram_csv, LabeledDataset};
pub use persistence::{minimum_spanning_tree, persistence0, MstEdge, PersistenceDiagram0};
pub use union_find::DisjointSet;
