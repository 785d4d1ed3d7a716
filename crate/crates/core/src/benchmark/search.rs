use serde::{Deserialize, Serialize};

use super::{classify_regular, label_vertices, Labeler, RegularGrid};
use crate::dynamics::HyperRectangle;
use crate::homology::{conley_check, ExpectedBetti};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridProfile {
    pub n: usize,
    pub cubes: usize,
    pub success: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub labeler: String,
    pub per_n: Vec<GridProfile>,
    pub min_n: Option<usize>,
    pub min_cubes: Option<usize>,
}

/// Scans `n = 1, 2, ...` and stops at the first resolution whose regular
/// decomposition has the expected homology, or after `n_max`.
pub fn min_grid_search(
    domain: &HyperRectangle,
    labeler: &Labeler,
    expected: &ExpectedBetti,
    n_max: usize,
) -> Result<GridSearch> {
    let mut per_n = Vec::new();
    let mut min_n = None;
    for n in 1..=n_max {
        let grid = RegularGrid::new(domain.clone(), n)?;
        let labels = label_vertices(labeler, &grid)?;
        let regions = classify_regular(&labels, &grid, labeler.num_labels())?;
        let check = conley_check(&regions, expected)?;
        per_n.push(GridProfile {
            n,
            cubes: grid.num_cubes(),
            success: check.success,
            failure: check.failure,
        });
        if check.success {
            min_n = Some(n);
            break;
        }
    }
    Ok(GridSearch {
        labeler: labeler.name().to_string(),
        min_cubes: min_n.map(|n| n.pow(domain.dim() as u32)),
        per_n,
        min_n,
    })
}
