use serde::{Deserialize, Serialize};

use crate::dynamics::HyperRectangle;
use crate::network::{check_span, ConstrainedNet};
use crate::{Error, Result};

/// Cut values closer than this fraction of the domain's projected width are
/// merged.
pub const DEDUP_TOL: f64 = 1e-9;

/// Families of parallel hyperplanes `⟨n_i, x⟩ = t` with unit normals `n_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    pub directions: Vec<Vec<f64>>,
    /// Strictly increasing cut values per direction.
    pub cuts: Vec<Vec<f64>>,
    /// Marks the cuts that bound the domain's projection.
    pub bound_flags: Vec<Vec<bool>>,
}

impl Arrangement {
    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// Number of intervals along each direction.
    pub fn shape(&self) -> Vec<usize> {
        self.cuts.iter().map(|c| c.len() - 1).collect()
    }

    /// Size of the full tensor product of intervals.
    pub fn candidate_count(&self) -> usize {
        self.shape().iter().product()
    }
}

/// Builds the arrangement of kink hyperplanes clipped to the domain, with the
/// extremes of the domain's projection added as bounding cuts.
pub fn extract_arrangement(net: &ConstrainedNet, domain: &HyperRectangle) -> Result<Arrangement> {
    if domain.dim() != net.d {
        return Err(Error::DimensionMismatch {
            expected: net.d,
            got: domain.dim(),
        });
    }
    if !check_span(net) {
        return Err(Error::RankDeficient);
    }
    let mut directions = Vec::with_capacity(net.d);
    let mut cuts = Vec::with_capacity(net.d);
    let mut bound_flags = Vec::with_capacity(net.d);
    for (u, offsets) in net.directions.iter().zip(&net.offsets) {
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n: Vec<f64> = u.iter().map(|v| v / norm).collect();
        let (t_min, t_max) = domain.project(&n);
        let tol = DEDUP_TOL * (t_max - t_min);

        let mut levels: Vec<(f64, bool)> = vec![(t_min, true), (t_max, true)];
        for b in offsets {
            for j in [0.0, 1.0] {
                let t = (j - b) / norm;
                if t > t_min && t < t_max {
                    levels.push((t, false));
                }
            }
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, bool)> = Vec::with_capacity(levels.len());
        for (t, bound) in levels {
            match merged.last_mut() {
                Some(last) if t - last.0 <= tol => {
                    // a bound absorbs any kink level sitting on it
                    if bound {
                        *last = (t, true);
                    }
                }
                _ => merged.push((t, bound)),
            }
        }
        directions.push(n);
        cuts.push(merged.iter().map(|m| m.0).collect());
        bound_flags.push(merged.iter().map(|m| m.1).collect());
    }
    Ok(Arrangement {
        directions,
        cuts,
        bound_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(directions: Vec<Vec<f64>>, offsets: Vec<Vec<f64>>) -> ConstrainedNet {
        let p = offsets.len() * offsets[0].len();
        ConstrainedNet::new(directions, offsets, vec![0.5; p], 2).unwrap()
    }

    #[test]
    fn axis_aligned_unit_offsets() {
        let n = net(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0], vec![0.0]]);
        let dom = HyperRectangle::cube(2, -2.0, 2.0).unwrap();
        let arr = extract_arrangement(&n, &dom).unwrap();
        assert_eq!(arr.cuts, vec![vec![-2.0, 0.0, 1.0, 2.0]; 2]);
        assert_eq!(arr.bound_flags[0], vec![true, false, false, true]);
        assert_eq!(arr.candidate_count(), 9);
    }

    #[test]
    fn levels_outside_are_dropped() {
        // kinks at t = 5 and t = 6
        let n = net(vec![vec![1.0]], vec![vec![-5.0]]);
        let dom = HyperRectangle::cube(1, -2.0, 2.0).unwrap();
        let arr = extract_arrangement(&n, &dom).unwrap();
        assert_eq!(arr.cuts, vec![vec![-2.0, 2.0]]);
    }

    #[test]
    fn coincident_levels_merge() {
        let n = net(vec![vec![1.0]], vec![vec![0.0, 1e-14]]);
        let dom = HyperRectangle::cube(1, -2.0, 2.0).unwrap();
        let arr = extract_arrangement(&n, &dom).unwrap();
        assert_eq!(arr.cuts[0].len(), 4);
    }

    #[test]
    fn scaled_direction_normalizes_levels() {
        // <2 e1, x> + 0 = j  gives t = 0 and t = 0.5
        let n = net(vec![vec![2.0]], vec![vec![0.0]]);
        let dom = HyperRectangle::cube(1, -1.0, 1.0).unwrap();
        let arr = extract_arrangement(&n, &dom).unwrap();
        assert_eq!(arr.cuts[0], vec![-1.0, 0.0, 0.5, 1.0]);
        assert_eq!(arr.directions[0], vec![1.0]);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let n = net(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![vec![0.0], vec![0.0]]);
        let dom = HyperRectangle::cube(2, -1.0, 1.0).unwrap();
        assert!(matches!(extract_arrangement(&n, &dom), Err(Error::RankDeficient)));
    }
}
