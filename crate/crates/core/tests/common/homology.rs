//! Cubical Betti numbers against an independent simplicial computation.
//!
//! The oracle triangulates every unit cube with the Kuhn (Freudenthal)
//! subdivision, which is compatible across shared faces, and computes GF(2)
//! ranks of dense boundary matrices.

use std::collections::{BTreeSet, HashMap};

use mlcd::homology::{betti, BettiVector, CubicalComplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// All simplices (as sorted vertex-id lists) of the Kuhn triangulation.
fn kuhn_simplices(cells: &BTreeSet<Vec<i64>>, dim: usize) -> Vec<BTreeSet<Vec<usize>>> {
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); dim + 1];
    let perms = permutations(dim);
    for c in cells {
        for perm in &perms {
            let mut v = c.clone();
            let mut verts = Vec::with_capacity(dim + 1);
            let next = ids.len();
            verts.push(*ids.entry(v.clone()).or_insert(next));
            for &axis in perm {
                v[axis] += 1;
                let next = ids.len();
                verts.push(*ids.entry(v.clone()).or_insert(next));
            }
            // Every subset of a top simplex is a face.
            for mask in 1u32..(1 << (dim + 1)) {
                let mut face: Vec<usize> = (0..=dim)
                    .filter(|&k| mask & (1 << k) != 0)
                    .map(|k| verts[k])
                    .collect();
                face.sort_unstable();
                by_dim[face.len() - 1].insert(face);
            }
        }
    }
    by_dim
}

/// Rank over GF(2) of a dense matrix given as rows of bit words.
fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let words = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..words * 64 {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let prow = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] >> b & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn boundary_rank(faces: &BTreeSet<Vec<usize>>, simplices: &BTreeSet<Vec<usize>>) -> usize {
    if faces.is_empty() || simplices.is_empty() {
        return 0;
    }
    let index: HashMap<&Vec<usize>, usize> = faces.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let words = faces.len().div_ceil(64);
    let rows = simplices
        .iter()
        .map(|s| {
            let mut row = vec![0u64; words];
            for skip in 0..s.len() {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let i = index[&face];
                row[i / 64] ^= 1 << (i % 64);
            }
            row
        })
        .collect();
    gf2_rank(rows)
}

pub fn oracle_betti(cells: &BTreeSet<Vec<i64>>, dim: usize) -> Vec<usize> {
    let simplices = kuhn_simplices(cells, dim);
    let ranks: Vec<usize> = (0..=dim)
        .map(|k| if k == 0 { 0 } else { boundary_rank(&simplices[k - 1], &simplices[k]) })
        .collect();
    (0..=dim)
        .map(|k| {
            let next = if k < dim { ranks[k + 1] } else { 0 };
            simplices[k].len() - ranks[k] - next
        })
        .collect()
}

pub fn trimmed(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    while v.len() > 1 && v.last() == Some(&0) {
        v.pop();
    }
    v
}

pub fn cubical(dim: usize, cells: &BTreeSet<Vec<i64>>) -> BettiVector {
    betti(&CubicalComplex::new(dim, cells.iter().cloned()).unwrap()).unwrap()
}

/// 200 random complexes (at most 50 top cells, d <= 3) and the four canonical cases.
pub fn suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let dim = 1 + case % 3;
        let side: i64 = [8, 5, 4][dim - 1];
        let target = rng.random_range(1..=50);
        let mut cells = BTreeSet::new();
        while cells.len() < target.min(side.pow(dim as u32) as usize) {
            cells.insert((0..dim).map(|_| rng.random_range(0..side)).collect::<Vec<i64>>());
        }
        let got = trimmed(&cubical(dim, &cells).0);
        let want = trimmed(&oracle_betti(&cells, dim));
        if got != want {
            return Err(format!("case {case}: cubical {got:?}, oracle {want:?}, cells {cells:?}"));
        }
    }
    for (name, dim, cells, want) in canonical() {
        let got = cubical(dim, &cells);
        if !got.matches(&BettiVector(want.clone())) {
            return Err(format!("{name}: got {got}, expected {want:?}"));
        }
    }
    Ok("200 random complexes and 4 canonical cases agree".into())
}

pub fn canonical() -> Vec<(&'static str, usize, BTreeSet<Vec<i64>>, Vec<usize>)> {
    let single = [vec![0, 0]].into_iter().collect();
    let ring = (0..3)
        .flat_map(|i| (0..3).map(move |j| vec![i, j]))
        .filter(|c| c != &vec![1, 1])
        .collect();
    let pair = [vec![0, 0], vec![3, 3]].into_iter().collect();
    let shell = (0..27)
        .map(|k| vec![k / 9, (k / 3) % 3, k % 3])
        .filter(|c| c != &vec![1, 1, 1])
        .collect();
    vec![
        ("single cube", 2, single, vec![1, 0]),
        ("punctured 3x3", 2, ring, vec![1, 1]),
        ("two disjoint cubes", 2, pair, vec![2, 0]),
        ("punctured 3x3x3", 3, shell, vec![1, 0, 1]),
    ]
}
