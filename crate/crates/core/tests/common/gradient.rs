//! Analytic training gradients against central finite differences.

use mlcd::network::ConstrainedNet;
use mlcd::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
/// Every kink is at least this far from all pre-activations, so a step of
/// `STEP` in any parameter cannot cross one.
const MARGIN: f64 = 1e-2;

struct Case {
    net: ConstrainedNet,
    xs: Vec<Point>,
    ys: Vec<f64>,
}

fn away_from_kinks(net: &ConstrainedNet, xs: &[Point]) -> bool {
    let upper = (net.num_labels - 1) as f64;
    xs.iter().all(|x| {
        let hidden_ok = (0..net.d).all(|i| {
            let t: f64 = net.directions[i].iter().zip(x).map(|(u, v)| u * v).sum();
            net.offsets[i]
                .iter()
                .all(|b| (t + b).abs() > MARGIN && (t + b - 1.0).abs() > MARGIN)
        });
        let s = net.pre_activation(x);
        hidden_ok && s.abs() > MARGIN && (s - upper).abs() > MARGIN
    })
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let d = rng.random_range(1..=4);
        let q = rng.random_range(1..=3);
        let num_labels = rng.random_range(2..=4);
        let directions = (0..d)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let offsets = (0..d)
            .map(|_| (0..q).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let out_weights = (0..d * q).map(|_| rng.random_range(-1.5..1.5)).collect();
        let net = ConstrainedNet::new(directions, offsets, out_weights, num_labels).unwrap();
        let xs: Vec<Point> = (0..8)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys = (0..8).map(|_| rng.random_range(0..num_labels) as f64).collect();
        if away_from_kinks(&net, &xs) {
            return Case { net, xs, ys };
        }
    }
}

/// 100 random non-kink configurations, step 1e-5, max relative error < 1e-5.
pub fn suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut nontrivial = 0;
    for case in 0..100 {
        let Case { net, xs, ys } = random_case(&mut rng);
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let (_, grad) = net.loss_and_gradient(&refs, &ys);
        let analytic: Vec<f64> = grad.flat().collect();
        let numeric: Vec<f64> = (0..net.num_params())
            .map(|k| {
                let mut plus = net.clone();
                let mut minus = net.clone();
                *plus.params_mut().nth(k).unwrap() += STEP;
                *minus.params_mut().nth(k).unwrap() -= STEP;
                (plus.mse(&refs, &ys) - minus.mse(&refs, &ys)) / (2.0 * STEP)
            })
            .collect();
        let scale = analytic.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let err = analytic
            .iter()
            .zip(&numeric)
            .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
        if scale > 0.0 {
            nontrivial += 1;
            let rel = err / scale;
            worst = worst.max(rel);
            if rel >= 1e-5 {
                return Err(format!("case {case}: relative error {rel:e}"));
            }
        } else if err >= 1e-12 {
            return Err(format!("case {case}: zero gradient but numeric {err:e}"));
        }
    }
    if nontrivial < 50 {
        return Err(format!("only {nontrivial} cases had a nonzero gradient"));
    }
    Ok(format!("100 configurations, max relative error {worst:e}"))
}
