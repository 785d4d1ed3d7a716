use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use rayon::prelude::*;

use super::Arrangement;
use crate::dynamics::HyperRectangle;
use crate::{Error, Point, Result};

/// The parallelotopes of an arrangement that meet the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    pub arrangement: Arrangement,
    /// Interval index per direction for each kept cell, in lexicographic order.
    pub cells: Vec<Vec<usize>>,
    /// Inverse of the matrix whose rows are the unit directions.
    inverse: Vec<Vec<f64>>,
}

impl CellGrid {
    pub fn dim(&self) -> usize {
        self.arrangement.dim()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Point where the hyperplanes with the given cut indices meet.
    pub fn vertex(&self, corner: &[usize]) -> Point {
        let t: Vec<f64> = corner
            .iter()
            .enumerate()
            .map(|(i, &k)| self.arrangement.cuts[i][k])
            .collect();
        self.inverse
            .iter()
            .map(|row| row.iter().zip(&t).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Cut-index tuples of the `2^d` corners of a cell.
    pub fn corners(&self, cell: &[usize]) -> Vec<Vec<usize>> {
        let d = cell.len();
        (0..1usize << d)
            .map(|mask| (0..d).map(|i| cell[i] + ((mask >> i) & 1)).collect())
            .collect()
    }

    pub fn cell_vertices(&self, cell: &[usize]) -> Vec<Point> {
        self.corners(cell).iter().map(|c| self.vertex(c)).collect()
    }
}

fn invert(directions: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = directions.len();
    let m = DMatrix::from_fn(d, d, |r, c| directions[r][c]);
    let inv = m.try_inverse().ok_or(Error::RankDeficient)?;
    Ok((0..d).map(|r| (0..d).map(|c| inv[(r, c)]).collect()).collect())
}

/// Exact test of whether the closed cell meets the domain.
fn meets_domain(grid: &CellGrid, cell: &[usize], domain: &HyperRectangle) -> bool {
    let verts = grid.cell_vertices(cell);
    if verts.iter().any(|v| domain.contains(v)) {
        return true;
    }
    // the cell is the convex hull of its vertices, so if they all lie beyond
    // one face of the box the cell does too
    for axis in 0..domain.dim() {
        if verts.iter().all(|v| v[axis] < domain.lower()[axis])
            || verts.iter().all(|v| v[axis] > domain.upper()[axis])
        {
            return false;
        }
    }
    lp_feasible(&grid.arrangement, cell, domain)
}

fn lp_feasible(arr: &Arrangement, cell: &[usize], domain: &HyperRectangle) -> bool {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..domain.dim())
        .map(|i| problem.add_var(0.0, (domain.lower()[i], domain.upper()[i])))
        .collect();
    for (i, n) in arr.directions.iter().enumerate() {
        let terms: Vec<_> = vars.iter().copied().zip(n.iter().copied()).collect();
        problem.add_constraint(terms.as_slice(), ComparisonOp::Ge, arr.cuts[i][cell[i]]);
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, arr.cuts[i][cell[i] + 1]);
    }
    match problem.solve() {
        Ok(_) => true,
        Err(minilp::Error::Infeasible) => false,
        // any other solver outcome keeps the cell
        Err(_) => true,
    }
}

/// Keeps the cells of the tensor-product grid whose closed parallelotope
/// intersects the domain.
pub fn enumerate_cells(arr: &Arrangement, domain: &HyperRectangle) -> Result<CellGrid> {
    if arr.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: arr.dim(),
            got: domain.dim(),
        });
    }
    if arr.cuts.iter().any(|c| c.len() < 2) {
        return Err(Error::InvalidParameters("each direction needs two cuts".into()));
    }
    let mut grid = CellGrid {
        arrangement: arr.clone(),
        cells: Vec::new(),
        inverse: invert(&arr.directions)?,
    };
    let shape = arr.shape();
    let total = arr.candidate_count();
    let candidates: Vec<Vec<usize>> = (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; shape.len()];
            for i in (0..shape.len()).rev() {
                idx[i] = flat % shape[i];
                flat /= shape[i];
            }
            idx
        })
        .collect();
    let keep: Vec<bool> = candidates
        .par_iter()
        .map(|c| meets_domain(&grid, c, domain))
        .collect();
    grid.cells = candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng as _;

    fn rotated(cuts: Vec<f64>) -> Arrangement {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Arrangement {
            directions: vec![vec![s, s], vec![-s, s]],
            bound_flags: vec![vec![false; cuts.len()]; 2],
            cuts: vec![cuts.clone(), cuts],
        }
    }

    #[test]
    fn axis_aligned_cells_all_kept() {
        let arr = Arrangement {
            directions: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            cuts: vec![vec![-2.0, 0.0, 1.0, 2.0]; 2],
            bound_flags: vec![vec![true, false, false, true]; 2],
        };
        let dom = HyperRectangle::cube(2, -2.0, 2.0).unwrap();
        let grid = enumerate_cells(&arr, &dom).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid.vertex(&[1, 2]), vec![0.0, 1.0]);
    }

    #[test]
    fn rotated_corners_are_dropped() {
        let h = 2f64.sqrt();
        let arr = rotated(vec![-h, -0.9 * h, 0.0, 0.9 * h, h]);
        let dom = HyperRectangle::cube(2, -1.0, 1.0).unwrap();
        let grid = enumerate_cells(&arr, &dom).unwrap();
        // dense sampling oracle
        let mut rng = seeded(3);
        for cell in (0..4).flat_map(|a| (0..4).map(move |b| vec![a, b])) {
            let mut hit = false;
            for _ in 0..20000 {
                let t: Vec<f64> = (0..2)
                    .map(|i| rng.random_range(arr.cuts[i][cell[i]]..arr.cuts[i][cell[i] + 1]))
                    .collect();
                let x = grid.vertex_from_t(&t);
                if dom.contains(&x) {
                    hit = true;
                    break;
                }
            }
            assert_eq!(grid.cells.contains(&cell), hit, "cell {cell:?}");
        }
        assert!(grid.len() < 16);
    }

    impl CellGrid {
        fn vertex_from_t(&self, t: &[f64]) -> Point {
            self.inverse
                .iter()
                .map(|row| row.iter().zip(t).map(|(a, b)| a * b).sum())
                .collect()
        }
    }

    #[test]
    fn lp_agrees_with_fast_paths() {
        let h = 2f64.sqrt();
        let arr = rotated(vec![-h, -0.5, 0.3, h]);
        let dom = HyperRectangle::cube(2, -1.0, 1.0).unwrap();
        let grid = enumerate_cells(&arr, &dom).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let c = [a, b];
                assert_eq!(lp_feasible(&arr, &c, &dom), meets_domain(&grid, &c, &dom));
            }
        }
    }
}
