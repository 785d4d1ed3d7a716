use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{ConstrainedNet, Gradient};
use crate::labeling::LabeledDataset;
use crate::rng::{derive_seed, seeded};
use crate::{Error, Result};

/// Relative singular-value threshold below which directions count as dependent.
const SPAN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub convergence_ratio: f64,
    pub seed: u64,
    pub test_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 1000,
            max_epochs: 100,
            patience: 10,
            convergence_ratio: 0.1,
            seed: 0,
            test_fraction: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.max_epochs > 0
            && self.patience > 0
            && self.convergence_ratio > 0.0
            && self.convergence_ratio < 1.0
            && self.test_fraction > 0.0
            && self.test_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid training config {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainResult {
    pub net: ConstrainedNet,
    pub train_losses: Vec<f64>,
    pub test_losses: Vec<f64>,
    pub converged: bool,
    pub spans: bool,
}

impl TrainResult {
    pub fn final_test_loss(&self) -> f64 {
        self.test_losses.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_train_loss(&self) -> f64 {
        self.train_losses.last().copied().unwrap_or(f64::NAN)
    }

    pub fn epochs(&self) -> usize {
        self.train_losses.len()
    }
}

/// Adam with the usual bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn step(&mut self, net: &mut ConstrainedNet, grad: &Gradient) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in net
            .params_mut()
            .zip(grad.flat())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let mhat = *m / c1;
            let vhat = *v / c2;
            *p -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

/// Seeded split of `0..n` into (train, test) index sets, each nonempty.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::EmptyInput("need at least two rows to split"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(seed));
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let train = idx.split_off(n_test);
    Ok((train, idx))
}

/// True when the last training loss is at most `(1 - beta)` times the first,
/// i.e. the relative reduction is at least `beta`.
pub fn check_convergence(train_losses: &[f64], beta: f64) -> bool {
    match (train_losses.first(), train_losses.last()) {
        (Some(&first), Some(&last)) if train_losses.len() >= 2 => {
            first == 0.0 || last <= (1.0 - beta) * first
        }
        _ => false,
    }
}

/// True when the direction vectors span the whole space.
pub fn check_span(net: &ConstrainedNet) -> bool {
    let d = net.d;
    let m = DMatrix::from_fn(d, d, |r, c| net.directions[r][c]);
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    max > 0.0 && min / max > SPAN_TOL
}

fn moving_average_stalled(test: &[f64], patience: usize) -> bool {
    let t = test.len() - 1;
    if t < patience {
        return false;
    }
    let recent: f64 = test[t + 1 - patience..=t].iter().sum::<f64>() / patience as f64;
    let previous: f64 = test[t - patience..t].iter().sum::<f64>() / patience as f64;
    recent >= previous
}

/// Mini-batch Adam on the squared error against the integer labels, with
/// early stopping on the moving average of the test loss.
pub fn train(net: ConstrainedNet, data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    if data.dim() != net.d {
        return Err(Error::DimensionMismatch {
            expected: net.d,
            got: data.dim(),
        });
    }
    let mut net = net;
    let (mut train_idx, test_idx) =
        split_indices(data.len(), cfg.test_fraction, derive_seed(cfg.seed, 0))?;
    let targets: Vec<f64> = data.labels.iter().map(|&l| l as f64).collect();
    let test_x: Vec<&[f64]> = test_idx.iter().map(|&i| data.points[i].as_slice()).collect();
    let test_y: Vec<f64> = test_idx.iter().map(|&i| targets[i]).collect();

    let mut rng = seeded(derive_seed(cfg.seed, 1));
    let mut adam = Adam::new(net.num_params(), cfg.learning_rate);
    let mut train_losses = Vec::new();
    let mut test_losses = Vec::new();
    let mut bx: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    let mut by: Vec<f64> = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.max_epochs {
        train_idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in train_idx.chunks(cfg.batch_size) {
            bx.clear();
            by.clear();
            bx.extend(batch.iter().map(|&i| data.points[i].as_slice()));
            by.extend(batch.iter().map(|&i| targets[i]));
            let (loss, grad) = net.loss_and_gradient(&bx, &by);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            adam.step(&mut net, &grad);
        }
        let train_loss = epoch_loss / train_idx.len() as f64;
        let test_loss = net.mse(&test_x, &test_y);
        if !test_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        train_losses.push(train_loss);
        test_losses.push(test_loss);
        if moving_average_stalled(&test_losses, cfg.patience) {
            break;
        }
    }

    let converged = check_convergence(&train_losses, cfg.convergence_ratio);
    let spans = check_span(&net);
    Ok(TrainResult {
        net,
        train_losses,
        test_losses,
        converged,
        spans,
    })
}

/// Writes `epoch,train_loss,test_loss` rows.
pub fn write_curves_csv<W: Write>(result: &TrainResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epoch", "train_loss", "test_loss"])?;
    for (e, (tr, te)) in result.train_losses.iter().zip(&result.test_losses).enumerate() {
        w.write_record([e.to_string(), tr.to_string(), te.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::HyperRectangle;
    use crate::network::init_constrained;

    fn losses(last: f64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..10).map(|k| 1.0 - 0.01 * k as f64).collect();
        v[0] = 1.0;
        v.push(last);
        v
    }

    #[test]
    fn convergence_rule() {
        assert!(check_convergence(&losses(0.05), 0.1));
        assert!(!check_convergence(&losses(0.95), 0.1));
        assert!(check_convergence(&losses(0.9), 0.1));
        assert!(check_convergence(&[0.0, 0.0], 0.1));
        assert!(!check_convergence(&[1.0], 0.1));
    }

    fn net_with(directions: Vec<Vec<f64>>) -> ConstrainedNet {
        ConstrainedNet::new(directions, vec![vec![0.0]; 2], vec![0.0; 2], 2).unwrap()
    }

    #[test]
    fn span_rule() {
        assert!(check_span(&net_with(vec![vec![1.0, 0.0], vec![0.0, 1.0]])));
        assert!(!check_span(&net_with(vec![vec![1.0, 1.0], vec![2.0, 2.0]])));
        let a = 1e-12_f64;
        assert!(!check_span(&net_with(vec![vec![1.0, 0.0], vec![a.cos(), a.sin()]])));
        assert!(!check_span(&net_with(vec![vec![0.0, 0.0], vec![0.0, 0.0]])));
    }

    #[test]
    fn early_stop_rule() {
        assert!(!moving_average_stalled(&[3.0, 2.0, 1.0], 2));
        assert!(moving_average_stalled(&[3.0, 2.0, 3.0], 2));
        assert!(!moving_average_stalled(&[3.0, 5.0], 2));
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split_indices(10, 0.5, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (5, 5));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let (tr, te) = split_indices(10, 0.2, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
    }

    #[test]
    fn all_zero_labels_are_learned() {
        let dom = HyperRectangle::cube(2, -2.0, 2.0).unwrap();
        let points = crate::dynamics::latin_hypercube(&dom, 400, 3).unwrap();
        let ds = LabeledDataset::new(points, vec![0; 400], 2).unwrap();
        let net = init_constrained(&dom, 1, 2, 7).unwrap();
        let cfg = TrainConfig {
            batch_size: 50,
            max_epochs: 100,
            patience: 10,
            seed: 2,
            ..TrainConfig::default()
        };
        let res = train(net, &ds, &cfg).unwrap();
        assert!(res.final_train_loss() < 1e-4, "{}", res.final_train_loss());
        assert_eq!(res.train_losses.len(), res.test_losses.len());
        assert!(res.spans);
    }

    #[test]
    fn training_is_deterministic() {
        let dom = HyperRectangle::cube(2, -1.0, 1.0).unwrap();
        let points = crate::dynamics::latin_hypercube(&dom, 200, 1).unwrap();
        let labels = points.iter().map(|p| usize::from(p[0] + p[1] > 0.0)).collect();
        let ds = LabeledDataset::new(points, labels, 2).unwrap();
        let cfg = TrainConfig {
            batch_size: 20,
            max_epochs: 30,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train(init_constrained(&dom, 1, 2, 1).unwrap(), &ds, &cfg).unwrap();
        let b = train(init_constrained(&dom, 1, 2, 1).unwrap(), &ds, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
