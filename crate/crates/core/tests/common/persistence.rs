//! 0-dimensional persistence against a brute-force Kruskal on all pairs.

use mlcd::labeling::persistence0;
use mlcd::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

fn kruskal_weights(points: &[Point]) -> Vec<f64> {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            edges.push((w, i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut weights = Vec::new();
    for (w, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            weights.push(w);
        }
    }
    weights.sort_by(|a, b| b.total_cmp(a));
    weights
}

/// 100 random point sets of at most 200 points, exact to 1e-12.
pub fn suite() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..100 {
        let n = rng.random_range(2..=200);
        let dim = rng.random_range(1..=4);
        // Half the sets are clustered so that large gaps occur.
        let clustered = case % 2 == 0;
        let centers: Vec<Point> = (0..3)
            .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let points: Vec<Point> = (0..n)
            .map(|_| {
                let c = &centers[rng.random_range(0..3)];
                (0..dim)
                    .map(|k| {
                        if clustered {
                            c[k] + rng.random_range(-0.5..0.5)
                        } else {
                            rng.random_range(-5.0..5.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let got = persistence0(&points).unwrap().deaths;
        let want = kruskal_weights(&points);
        if got.len() != n - 1 {
            return Err(format!("case {case}: {} deaths for {n} points", got.len()));
        }
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
            if (g - w).abs() > 1e-12 {
                return Err(format!("case {case}: {g} vs {w}"));
            }
        }
    }
    Ok(format!("100 point sets, max deviation {worst:e}"))
}
