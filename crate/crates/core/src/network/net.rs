use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dynamics::HyperRectangle;
use crate::rng::seeded;
use crate::{Error, Result};

/// Clamp of `x` to `[a, b]`.
pub fn hardtanh(a: f64, b: f64, x: f64) -> Result<f64> {
    if a > b {
        return Err(Error::InvalidParameters(format!("hardtanh bounds {a} > {b}")));
    }
    Ok(x.clamp(a, b))
}

#[inline]
fn unit_clamp(z: f64) -> f64 {
    z.clamp(0.0, 1.0)
}

/// `F(x) = clamp_[0, L-1](sum_ij w_ij clamp_[0,1](<u_i, x> + b_ij))`.
///
/// The weight of unit `j` of group `i` is `out_weights[i * q + j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNet")]
pub struct ConstrainedNet {
    pub d: usize,
    pub q: usize,
    #[serde(rename = "L")]
    pub num_labels: usize,
    pub directions: Vec<Vec<f64>>,
    pub offsets: Vec<Vec<f64>>,
    pub out_weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawNet {
    d: usize,
    q: usize,
    #[serde(rename = "L")]
    num_labels: usize,
    directions: Vec<Vec<f64>>,
    offsets: Vec<Vec<f64>>,
    out_weights: Vec<f64>,
}

impl TryFrom<RawNet> for ConstrainedNet {
    type Error = Error;

    fn try_from(r: RawNet) -> Result<Self> {
        let net = Self::new(r.directions, r.offsets, r.out_weights, r.num_labels)?;
        if (net.d, net.q) != (r.d, r.q) {
            return Err(Error::InvalidParameters(format!(
                "declared d = {}, q = {} but arrays have d = {}, q = {}",
                r.d, r.q, net.d, net.q
            )));
        }
        Ok(net)
    }
}

/// Gradient with the same layout as the network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub directions: Vec<Vec<f64>>,
    pub offsets: Vec<Vec<f64>>,
    pub out_weights: Vec<f64>,
}

impl Gradient {
    fn zeros(d: usize, q: usize) -> Self {
        Self {
            directions: vec![vec![0.0; d]; d],
            offsets: vec![vec![0.0; q]; d],
            out_weights: vec![0.0; d * q],
        }
    }

    /// All entries in parameter order: directions, offsets, output weights.
    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.directions
            .iter()
            .flatten()
            .chain(self.offsets.iter().flatten())
            .chain(&self.out_weights)
            .copied()
    }
}

impl ConstrainedNet {
    pub fn new(
        directions: Vec<Vec<f64>>,
        offsets: Vec<Vec<f64>>,
        out_weights: Vec<f64>,
        num_labels: usize,
    ) -> Result<Self> {
        let d = directions.len();
        if d == 0 {
            return Err(Error::InvalidParameters("network needs at least one direction".into()));
        }
        if let Some(u) = directions.iter().find(|u| u.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.len(),
            });
        }
        if offsets.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: offsets.len(),
            });
        }
        let q = offsets[0].len();
        if q == 0 || offsets.iter().any(|row| row.len() != q) {
            return Err(Error::InvalidParameters("offsets must be a d x q matrix, q >= 1".into()));
        }
        if out_weights.len() != d * q {
            return Err(Error::DimensionMismatch {
                expected: d * q,
                got: out_weights.len(),
            });
        }
        if num_labels == 0 {
            return Err(Error::InvalidParameters("need at least one label".into()));
        }
        Ok(Self {
            d,
            q,
            num_labels,
            directions,
            offsets,
            out_weights,
        })
    }

    /// Number of hidden units.
    pub fn p(&self) -> usize {
        self.d * self.q
    }

    fn upper(&self) -> f64 {
        (self.num_labels - 1) as f64
    }

    /// The full `p x d` hidden-layer matrix; rows within a group are equal.
    pub fn materialize(&self) -> Vec<Vec<f64>> {
        self.directions
            .iter()
            .flat_map(|u| std::iter::repeat_n(u.clone(), self.q))
            .collect()
    }

    fn project(&self, x: &[f64], i: usize) -> f64 {
        self.directions[i].iter().zip(x).map(|(u, v)| u * v).sum()
    }

    /// Output before the outer clamp.
    pub fn pre_activation(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            let t = self.project(x, i);
            for (j, b) in self.offsets[i].iter().enumerate() {
                s += self.out_weights[i * self.q + j] * unit_clamp(t + b);
            }
        }
        s
    }

    /// Contribution of group `i` as a function of the projection `t = <u_i, x>`.
    pub fn group_response(&self, i: usize, t: f64) -> f64 {
        self.offsets[i]
            .iter()
            .enumerate()
            .map(|(j, b)| self.out_weights[i * self.q + j] * unit_clamp(t + b))
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        self.pre_activation(x).clamp(0.0, self.upper())
    }

    /// Mean squared error against `targets` and its gradient.
    ///
    /// HardTanh derivatives are 1 on the closed interval and 0 outside.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], targets: &[f64]) -> (f64, Gradient) {
        let (d, q) = (self.d, self.q);
        let mut grad = Gradient::zeros(d, q);
        let n = xs.len().max(1) as f64;
        let upper = self.upper();
        let mut loss = 0.0;
        let mut z = vec![0.0; d * q];
        for (x, &y) in xs.iter().zip(targets) {
            let mut s = 0.0;
            for i in 0..d {
                let t = self.project(x, i);
                for j in 0..q {
                    let zij = t + self.offsets[i][j];
                    z[i * q + j] = zij;
                    s += self.out_weights[i * q + j] * unit_clamp(zij);
                }
            }
            let f = s.clamp(0.0, upper);
            let r = f - y;
            loss += r * r;
            if !(0.0..=upper).contains(&s) {
                continue;
            }
            let g = 2.0 * r / n;
            for i in 0..d {
                let mut gu = 0.0;
                for j in 0..q {
                    let k = i * q + j;
                    grad.out_weights[k] += g * unit_clamp(z[k]);
                    if (0.0..=1.0).contains(&z[k]) {
                        let gz = g * self.out_weights[k];
                        grad.offsets[i][j] += gz;
                        gu += gz;
                    }
                }
                if gu != 0.0 {
                    for (gd, xv) in grad.directions[i].iter_mut().zip(x.iter()) {
                        *gd += gu * xv;
                    }
                }
            }
        }
        (loss / n, grad)
    }

    pub fn mse(&self, xs: &[&[f64]], targets: &[f64]) -> f64 {
        let n = xs.len().max(1) as f64;
        xs.iter()
            .zip(targets)
            .map(|(x, y)| {
                let r = self.forward(x) - y;
                r * r
            })
            .sum::<f64>()
            / n
    }

    /// Mutable parameters in the same order as [`Gradient::flat`].
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.directions
            .iter_mut()
            .flatten()
            .chain(self.offsets.iter_mut().flatten())
            .chain(self.out_weights.iter_mut())
    }

    pub fn num_params(&self) -> usize {
        self.d * self.d + 2 * self.d * self.q
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Axis-aligned initialization: `u_i = e_i`, the 0-level of every unit of
/// group `i` uniform across the domain's `i`-th side, and output weights
/// uniform in `(-1/sqrt(p), 1/sqrt(p))`.
pub fn init_constrained(
    domain: &HyperRectangle,
    q: usize,
    num_labels: usize,
    seed: u64,
) -> Result<ConstrainedNet> {
    if q == 0 {
        return Err(Error::InvalidParameters("q must be at least 1".into()));
    }
    let d = domain.dim();
    let mut rng = seeded(seed);
    let directions = (0..d)
        .map(|i| (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
        .collect();
    let offsets = (0..d)
        .map(|i| {
            let (lo, hi) = (domain.lower()[i], domain.upper()[i]);
            (0..q).map(|_| -rng.random_range(lo..hi)).collect()
        })
        .collect();
    let bound = 1.0 / ((d * q) as f64).sqrt();
    let out_weights = (0..d * q).map(|_| rng.random_range(-bound..bound)).collect();
    ConstrainedNet::new(directions, offsets, out_weights, num_labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    fn unit_net() -> ConstrainedNet {
        ConstrainedNet::new(vec![vec![1.0]], vec![vec![0.0]], vec![1.0], 2).unwrap()
    }

    #[test]
    fn hardtanh_values() {
        assert_eq!(hardtanh(0.0, 1.0, -0.5).unwrap(), 0.0);
        assert_eq!(hardtanh(0.0, 1.0, 0.3).unwrap(), 0.3);
        assert_eq!(hardtanh(0.0, 1.0, 2.0).unwrap(), 1.0);
        assert!(hardtanh(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn one_unit_is_a_clamp() {
        let net = unit_net();
        assert_eq!(net.forward(&[0.5]), 0.5);
        assert_eq!(net.forward(&[-3.0]), 0.0);
        assert_eq!(net.forward(&[7.0]), 1.0);
    }

    #[test]
    fn zero_weights_give_zero() {
        let dom = HyperRectangle::cube(3, -1.0, 1.0).unwrap();
        let mut net = init_constrained(&dom, 2, 3, 5).unwrap();
        net.out_weights.iter_mut().for_each(|w| *w = 0.0);
        assert_eq!(net.forward(&[0.3, -0.2, 0.9]), 0.0);
    }

    #[test]
    fn init_shapes_and_levels() {
        let dom = HyperRectangle::cube(2, -2.0, 2.0).unwrap();
        let net = init_constrained(&dom, 1, 2, 11).unwrap();
        assert_eq!(net.directions, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        for row in &net.offsets {
            assert!(-row[0] > -2.0 && -row[0] < 2.0);
        }
        assert_eq!(net, init_constrained(&dom, 1, 2, 11).unwrap());

        let dom3 = HyperRectangle::cube(3, 0.0, 1.0).unwrap();
        let net = init_constrained(&dom3, 2, 2, 1).unwrap();
        assert_eq!(net.p(), 6);
        assert_eq!(net.offsets.len(), 3);
        assert!(net.offsets.iter().all(|r| r.len() == 2));
        let bound = 1.0 / 6f64.sqrt();
        assert!(net.out_weights.iter().all(|w| w.abs() < bound));
    }

    #[test]
    fn materialized_rows_repeat() {
        let dom = HyperRectangle::cube(3, 0.0, 1.0).unwrap();
        let net = init_constrained(&dom, 4, 2, 3).unwrap();
        let a = net.materialize();
        assert_eq!(a.len(), 12);
        for (r, row) in a.iter().enumerate() {
            assert_eq!(row, &net.directions[r / 4]);
        }
    }

    #[test]
    fn json_round_trip() {
        let dom = HyperRectangle::cube(2, 0.0, 1.0).unwrap();
        let net = init_constrained(&dom, 2, 3, 9).unwrap();
        let s = net.to_json().unwrap();
        assert!(s.contains("\"L\": 3"));
        assert_eq!(ConstrainedNet::from_json(&s).unwrap(), net);
        assert!(ConstrainedNet::from_json(r#"{"d":1,"q":1,"L":2,"directions":[[1.0]],"offsets":[[0.0]],"out_weights":[]}"#).is_err());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let dom = HyperRectangle::cube(2, -1.0, 1.0).unwrap();
        let mut net = init_constrained(&dom, 2, 2, 4).unwrap();
        net.out_weights = vec![0.7, 0.4, -0.3, 0.5];
        let xs: Vec<Point> = vec![vec![0.2, 0.1], vec![-0.4, 0.3], vec![0.6, -0.5]];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let ys = [1.0, 0.0, 0.0];
        let (_, g) = net.loss_and_gradient(&refs, &ys);
        let analytic: Vec<f64> = g.flat().collect();
        let h = 1e-6;
        for k in 0..net.num_params() {
            let mut plus = net.clone();
            *plus.params_mut().nth(k).unwrap() += h;
            let mut minus = net.clone();
            *minus.params_mut().nth(k).unwrap() -= h;
            let fd = (plus.mse(&refs, &ys) - minus.mse(&refs, &ys)) / (2.0 * h);
            assert!((fd - analytic[k]).abs() < 1e-6, "param {k}: {fd} vs {}", analytic[k]);
        }
    }
}
