use std::collections::BTreeSet;

use super::BettiVector;
use crate::decomposition::{RegionAssignment, Tag};
use crate::{Error, Result};

/// Upper bound on the number of faces of a complex.
pub const MAX_FACES: usize = 10_000_000;

/// Union of closed unit cubes `∏ [c_i, c_i + 1]` with integer corners `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicalComplex {
    dim: usize,
    top_cells: BTreeSet<Vec<i64>>,
}

impl CubicalComplex {
    pub fn new(dim: usize, cells: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let top_cells: BTreeSet<Vec<i64>> = cells.into_iter().collect();
        if let Some(c) = top_cells.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            });
        }
        Ok(Self { dim, top_cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn top_cells(&self) -> &BTreeSet<Vec<i64>> {
        &self.top_cells
    }

    pub fn len(&self) -> usize {
        self.top_cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top_cells.is_empty()
    }
}

/// Complex formed by the cells of an assignment carrying `tag`.
pub fn to_cubical(assignment: &RegionAssignment, tag: Tag) -> CubicalComplex {
    let dim = assignment.directions.len();
    let cells = assignment
        .cells
        .iter()
        .filter(|c| c.tag == tag)
        .map(|c| c.index.iter().map(|&i| i as i64).collect());
    CubicalComplex::new(dim, cells).expect("assignment cells have the grid dimension")
}

/// Packs faces in doubled coordinates (even = vertex coordinate, odd =
/// unit interval) into one `u64` per face.
struct Encoder {
    shifts: Vec<u32>,
    masks: Vec<u64>,
}

impl Encoder {
    fn new(extents: &[u64]) -> Result<Self> {
        let mut shifts = Vec::with_capacity(extents.len());
        let mut masks = Vec::with_capacity(extents.len());
        let mut used = 0u32;
        for &e in extents {
            let bits = (64 - e.leading_zeros()).max(1);
            shifts.push(used);
            masks.push((1u64 << bits) - 1);
            used += bits;
        }
        if used > 64 {
            return Err(Error::ComplexTooLarge(format!(
                "face coordinates need {used} bits"
            )));
        }
        Ok(Self { shifts, masks })
    }

    fn coord(&self, key: u64, axis: usize) -> u64 {
        (key >> self.shifts[axis]) & self.masks[axis]
    }

    fn face_dim(&self, key: u64) -> usize {
        (0..self.shifts.len())
            .filter(|&i| self.coord(key, i) & 1 == 1)
            .count()
    }
}

fn all_faces(cx: &CubicalComplex, enc: &Encoder, base: &[i64]) -> Result<Vec<u64>> {
    let d = cx.dim;
    let per_cell = 3usize.pow(d as u32);
    let raw = cx.len().saturating_mul(per_cell);
    if raw > 20 * MAX_FACES {
        return Err(Error::ComplexTooLarge(format!(
            "{} cubes in dimension {d}",
            cx.len()
        )));
    }
    let mut faces = Vec::with_capacity(raw);
    for cell in &cx.top_cells {
        let origin: u64 = (0..d)
            .map(|i| ((2 * (cell[i] - base[i])) as u64) << enc.shifts[i])
            .sum();
        for combo in 0..per_cell {
            let mut key = origin;
            let mut c = combo;
            for i in 0..d {
                key += ((c % 3) as u64) << enc.shifts[i];
                c /= 3;
            }
            faces.push(key);
        }
    }
    faces.sort_unstable();
    faces.dedup();
    if faces.len() > MAX_FACES {
        return Err(Error::ComplexTooLarge(format!(
            "{} faces exceed the limit of {MAX_FACES}",
            faces.len()
        )));
    }
    Ok(faces)
}

/// Adds `other` into `col` over GF(2); both sorted ascending.
fn add_into(col: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < col.len() && j < other.len() {
        match col[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(col[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&col[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(col, scratch);
}

/// Betti numbers `β_0 .. β_d` of the closed complex over GF(2).
pub fn betti(cx: &CubicalComplex) -> Result<BettiVector> {
    if cx.is_empty() {
        return Err(Error::EmptyInput("homology of an empty complex"));
    }
    let d = cx.dim;
    let mut base = vec![i64::MAX; d];
    let mut top = vec![i64::MIN; d];
    for c in &cx.top_cells {
        for i in 0..d {
            base[i] = base[i].min(c[i]);
            top[i] = top[i].max(c[i]);
        }
    }
    let extents: Vec<u64> = (0..d).map(|i| (2 * (top[i] - base[i]) + 2) as u64).collect();
    let enc = Encoder::new(&extents)?;
    let faces = all_faces(cx, &enc, &base)?;

    let mut by_dim: Vec<Vec<u64>> = vec![Vec::new(); d + 1];
    for &f in &faces {
        by_dim[enc.face_dim(f)].push(f);
    }
    drop(faces);

    // rank[k] = rank of the boundary map from k-faces to (k-1)-faces
    let mut rank = vec![0usize; d + 2];
    // faces known to reduce to zero (pivots of the map one dimension up)
    let mut cleared: Vec<bool> = vec![false; by_dim[d].len()];
    let mut scratch = Vec::new();
    for k in (1..=d).rev() {
        let rows = &by_dim[k - 1];
        let index = |f: u64| rows.binary_search(&f).expect("faces are closed under boundary") as u32;
        let mut pivot_col: Vec<Option<u32>> = vec![None; rows.len()];
        let mut reduced: Vec<Vec<u32>> = Vec::new();
        let mut next_cleared = vec![false; rows.len()];
        for (j, &face) in by_dim[k].iter().enumerate() {
            if cleared[j] {
                continue;
            }
            let mut col: Vec<u32> = Vec::with_capacity(2 * k);
            for i in 0..d {
                if enc.coord(face, i) & 1 == 1 {
                    let step = 1u64 << enc.shifts[i];
                    col.push(index(face - step));
                    col.push(index(face + step));
                }
            }
            col.sort_unstable();
            while let Some(&low) = col.last() {
                match pivot_col[low as usize] {
                    Some(p) => add_into(&mut col, &reduced[p as usize], &mut scratch),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_col[low as usize] = Some(reduced.len() as u32);
                next_cleared[low as usize] = true;
                reduced.push(col);
            }
        }
        rank[k] = reduced.len();
        cleared = next_cleared;
    }
    let betti = (0..=d)
        .map(|k| by_dim[k].len() - rank[k] - rank[k + 1])
        .collect();
    Ok(BettiVector(betti))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(dim: usize, cells: &[&[i64]]) -> CubicalComplex {
        CubicalComplex::new(dim, cells.iter().map(|c| c.to_vec())).unwrap()
    }

    fn block(dim: usize, n: i64, hole: Option<Vec<i64>>) -> CubicalComplex {
        let mut cells = vec![vec![]];
        for _ in 0..dim {
            cells = cells
                .into_iter()
                .flat_map(|c: Vec<i64>| {
                    (0..n).map(move |v| {
                        let mut c = c.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        CubicalComplex::new(dim, cells.into_iter().filter(|c| Some(c) != hole.as_ref())).unwrap()
    }

    #[test]
    fn canonical_cases() {
        assert_eq!(betti(&complex(2, &[&[0, 0]])).unwrap().0, vec![1, 0, 0]);
        assert_eq!(betti(&block(2, 3, Some(vec![1, 1]))).unwrap().0, vec![1, 1, 0]);
        assert_eq!(betti(&complex(2, &[&[0, 0], &[3, 3]])).unwrap().0, vec![2, 0, 0]);
        assert_eq!(betti(&block(3, 3, Some(vec![1, 1, 1]))).unwrap().0, vec![1, 0, 1, 0]);
    }

    #[test]
    fn diagonal_cubes_touch() {
        // sharing a single vertex still connects them
        assert_eq!(betti(&complex(2, &[&[0, 0], &[1, 1]])).unwrap().0, vec![1, 0, 0]);
    }

    #[test]
    fn translation_invariance() {
        let a = block(2, 3, Some(vec![1, 1]));
        let shifted = CubicalComplex::new(
            2,
            a.top_cells().iter().map(|c| vec![c[0] - 40, c[1] + 1000]),
        )
        .unwrap();
        assert_eq!(betti(&a).unwrap(), betti(&shifted).unwrap());
    }

    #[test]
    fn empty_complex_is_an_error() {
        assert!(betti(&complex(2, &[])).is_err());
    }

    #[test]
    fn higher_dimensional_shell() {
        assert_eq!(
            betti(&block(4, 3, Some(vec![1, 1, 1, 1]))).unwrap().0,
            vec![1, 0, 0, 1, 0]
        );
    }
}
