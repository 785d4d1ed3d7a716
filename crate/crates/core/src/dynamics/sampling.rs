use rand::seq::SliceRandom;
use rand::Rng;

use super::HyperRectangle;
use crate::rng::seeded;
use crate::{Error, Point, Result};

/// Latin hypercube design: along every axis each of the `n` equal-width slabs
/// holds exactly one point.
pub fn latin_hypercube(domain: &HyperRectangle, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::EmptyInput("latin hypercube needs at least one point"));
    }
    let d = domain.dim();
    let mut rng = seeded(seed);
    let mut points = vec![vec![0.0; d]; n];
    let mut slabs: Vec<usize> = (0..n).collect();
    for axis in 0..d {
        slabs.shuffle(&mut rng);
        let lo = domain.lower()[axis];
        let width = domain.width(axis);
        for (p, &slab) in points.iter_mut().zip(&slabs) {
            let u: f64 = rng.random();
            p[axis] = lo + width * (slab as f64 + u) / n as f64;
        }
    }
    Ok(points)
}
