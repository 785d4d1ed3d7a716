use rayon::prelude::*;

use super::RegularGrid;
use crate::dynamics::{flow_terminal, SystemSpec};
use crate::labeling::LabeledDataset;
use crate::{Error, Point, Result};

/// Source of vertex labels for a regular grid.
#[derive(Clone, Debug)]
pub enum Labeler {
    /// Majority vote of the `k` nearest training points; ties go to the
    /// label of the nearest tied point.
    Knn { data: LabeledDataset, k: usize },
    /// Integrates each vertex over `horizon` time-1 steps and takes the label
    /// of the closest attractor sample.
    Direct {
        system: SystemSpec,
        horizon: usize,
        attractor_samples: Vec<Vec<Point>>,
    },
}

impl Labeler {
    pub fn name(&self) -> &'static str {
        match self {
            Labeler::Knn { .. } => "knn",
            Labeler::Direct { .. } => "direct",
        }
    }

    pub fn num_labels(&self) -> usize {
        match self {
            Labeler::Knn { data, .. } => data.num_labels,
            Labeler::Direct {
                attractor_samples, ..
            } => attractor_samples.len(),
        }
    }

    pub fn label_points(&self, points: &[Point]) -> Result<Vec<usize>> {
        match self {
            Labeler::Knn { data, k } => {
                if data.is_empty() || *k == 0 {
                    return Err(Error::EmptyInput("nearest-neighbor labeler has no data"));
                }
                Ok(points.par_iter().map(|p| knn_vote(data, *k, p)).collect())
            }
            Labeler::Direct {
                system,
                horizon,
                attractor_samples,
            } => {
                if attractor_samples.iter().all(Vec::is_empty) {
                    return Err(Error::EmptyInput("direct labeler has no attractor samples"));
                }
                let (terminal, _) = flow_terminal(system, points, *horizon)?;
                Ok(terminal
                    .par_iter()
                    .map(|p| nearest_attractor(attractor_samples, p))
                    .collect())
            }
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Label of the attractor sample closest to `p`.
pub fn nearest_attractor(samples: &[Vec<Point>], p: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (label, set) in samples.iter().enumerate() {
        for q in set {
            let d = dist2(p, q);
            if d < best.1 {
                best = (label, d);
            }
        }
    }
    best.0
}

fn knn_vote(data: &LabeledDataset, k: usize, p: &[f64]) -> usize {
    let k = k.min(data.len());
    // (distance, label) of the k nearest, kept sorted
    let mut nearest: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (q, &l) in data.points.iter().zip(&data.labels) {
        let d = dist2(p, q);
        if nearest.len() < k || d < nearest[nearest.len() - 1].0 {
            let pos = nearest.partition_point(|e| e.0 <= d);
            nearest.insert(pos, (d, l));
            nearest.truncate(k);
        }
    }
    let mut votes = vec![0usize; data.num_labels];
    for &(_, l) in &nearest {
        votes[l] += 1;
    }
    let top = *votes.iter().max().expect("at least one label");
    nearest
        .iter()
        .find(|(_, l)| votes[*l] == top)
        .map(|&(_, l)| l)
        .expect("nonempty neighbor list")
}

/// Labels of all grid vertices in flat-index order.
pub fn label_vertices(labeler: &Labeler, grid: &RegularGrid) -> Result<Vec<usize>> {
    labeler.label_points(&grid.vertices())
}
