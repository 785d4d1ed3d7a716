use crate::decomposition::{CellTag, RegionAssignment, Tag};
use crate::dynamics::HyperRectangle;
use crate::{Error, Point, Result};

/// Uniform subdivision of a box into `n^d` cubes.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularGrid {
    pub domain: HyperRectangle,
    pub n: usize,
}

impl RegularGrid {
    pub fn new(domain: HyperRectangle, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("grid needs n >= 1".into()));
        }
        Ok(Self { domain, n })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn num_cubes(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn num_vertices(&self) -> usize {
        (self.n + 1).pow(self.dim() as u32)
    }

    /// Coordinate of lattice line `k` along `axis`; the last line is the
    /// domain's upper bound exactly.
    pub fn coordinate(&self, axis: usize, k: usize) -> f64 {
        if k == self.n {
            self.domain.upper()[axis]
        } else {
            self.domain.lower()[axis] + self.domain.width(axis) * k as f64 / self.n as f64
        }
    }

    /// Multi-index of a vertex from its flat index (last axis fastest).
    pub fn vertex_index(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        for i in (0..d).rev() {
            idx[i] = flat % (self.n + 1);
            flat /= self.n + 1;
        }
        idx
    }

    pub fn flat_vertex(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * (self.n + 1) + k)
    }

    pub fn vertex(&self, idx: &[usize]) -> Point {
        idx.iter()
            .enumerate()
            .map(|(axis, &k)| self.coordinate(axis, k))
            .collect()
    }

    /// All vertices in flat-index order.
    pub fn vertices(&self) -> Vec<Point> {
        (0..self.num_vertices())
            .map(|f| self.vertex(&self.vertex_index(f)))
            .collect()
    }

    /// Cube multi-indices in lexicographic order.
    pub fn cubes(&self) -> Vec<Vec<usize>> {
        let d = self.dim();
        (0..self.num_cubes())
            .map(|mut flat| {
                let mut idx = vec![0; d];
                for i in (0..d).rev() {
                    idx[i] = flat % self.n;
                    flat /= self.n;
                }
                idx
            })
            .collect()
    }
}

/// A cube joins `N_k` when all of its vertices carry label `k`, and `U`
/// otherwise.
pub fn classify_regular(
    labels: &[usize],
    grid: &RegularGrid,
    num_labels: usize,
) -> Result<RegionAssignment> {
    if labels.len() != grid.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: grid.num_vertices(),
            got: labels.len(),
        });
    }
    let d = grid.dim();
    let cells = grid
        .cubes()
        .into_iter()
        .map(|cube| {
            let mut first = None;
            let mut uniform = true;
            for mask in 0..1usize << d {
                let corner: Vec<usize> = (0..d).map(|i| cube[i] + ((mask >> i) & 1)).collect();
                let l = labels[grid.flat_vertex(&corner)];
                match first {
                    None => first = Some(l),
                    Some(f) if f != l => {
                        uniform = false;
                        break;
                    }
                    _ => {}
                }
            }
            let tag = match first {
                Some(k) if uniform => Tag::Label(k),
                _ => Tag::Uncertain,
            };
            CellTag { index: cube, tag }
        })
        .collect();
    Ok(RegionAssignment {
        directions: (0..d)
            .map(|i| (0..d).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
            .collect(),
        cuts: (0..d)
            .map(|axis| (0..=grid.n).map(|k| grid.coordinate(axis, k)).collect())
            .collect(),
        cells,
        epsilon: 0.0,
        num_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_indexing() {
        let g = RegularGrid::new(HyperRectangle::cube(3, 0.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(g.num_cubes(), 64);
        assert_eq!(g.num_vertices(), 125);
        for f in [0, 7, 124] {
            assert_eq!(g.flat_vertex(&g.vertex_index(f)), f);
        }
        assert_eq!(g.vertex(&[4, 0, 2]), vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn one_dimensional_rule() {
        let g = RegularGrid::new(HyperRectangle::cube(1, -1.0, 1.0).unwrap(), 2).unwrap();
        let r = classify_regular(&[0, 0, 1], &g, 2).unwrap();
        let tags: Vec<Tag> = r.cells.iter().map(|c| c.tag).collect();
        assert_eq!(tags, vec![Tag::Label(0), Tag::Uncertain]);
    }

    #[test]
    fn uniform_labels() {
        let g = RegularGrid::new(HyperRectangle::cube(2, -1.0, 1.0).unwrap(), 3).unwrap();
        let r = classify_regular(&vec![1; 16], &g, 2).unwrap();
        assert_eq!(r.count(Tag::Label(1)), 9);
        assert_eq!(r.count(Tag::Uncertain), 0);
    }
}
