//! Vertex-only classification relies on the network being affine on every
//! cell up to the outer clamp, which is monotone, so extremes sit at vertices.

use mlcd::harness::{decompose, prepare_dataset, train_realization, ExperimentConfig};
use mlcd::network::ConstrainedNet;
use mlcd::rng::derive_seed;
use mlcd::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn convex_combination(vertices: &[Point], rng: &mut ChaCha8Rng) -> Point {
    let weights: Vec<f64> = vertices.iter().map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    let d = vertices[0].len();
    (0..d)
        .map(|k| vertices.iter().zip(&weights).map(|(v, w)| v[k] * w / total).sum())
        .collect()
}

fn midpoint(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Checks every cell of the network's grid; returns the number of cells.
fn check_net(net: &ConstrainedNet, cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let sys = cfg.system_spec().unwrap();
    let dec = decompose(net, &sys, &[0.1]).unwrap();
    let upper = (net.num_labels - 1) as f64;
    for cell in &dec.grid.cells {
        let verts = dec.grid.cell_vertices(cell);
        let pre: Vec<f64> = verts.iter().map(|v| net.pre_activation(v)).collect();
        let out: Vec<f64> = verts.iter().map(|v| net.forward(v)).collect();
        let unclamped = pre.iter().all(|&s| (0.0..=upper).contains(&s));
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                let m = midpoint(&verts[i], &verts[j]);
                let scale = 1.0 + pre[i].abs().max(pre[j].abs());
                let affine = 0.5 * (pre[i] + pre[j]);
                if !((net.pre_activation(&m) - affine).abs() <= TOL * scale) {
                    return Err(format!("pre-activation not affine on cell {cell:?}"));
                }
                if unclamped && !((net.forward(&m) - 0.5 * (out[i] + out[j])).abs() <= TOL * scale) {
                    return Err(format!("forward not affine on unclamped cell {cell:?}"));
                }
            }
        }
        let lo = out.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..1000 {
            let x = convex_combination(&verts, rng);
            let f = net.forward(&x);
            if f < lo - TOL || f > hi + TOL {
                return Err(format!("value {f} escapes [{lo}, {hi}] on {cell:?}"));
            }
        }
    }
    Ok(dec.grid.len())
}

/// 20 trained realizations over three planar systems.
pub fn suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    let mut cells = 0;
    for (system, quota) in [("radial_bistable", 7), ("radial_tristable", 7), ("linear_separatrix", 6)] {
        let mut cfg = ExperimentConfig::defaults_for(system).unwrap();
        cfg.training.max_epochs = cfg.training.max_epochs.min(300);
        let sys = cfg.system_spec().unwrap();
        let data = prepare_dataset(&cfg, &sys).unwrap();
        let mut done = 0;
        for k in 0..50 {
            if done == quota {
                break;
            }
            let result = train_realization(&cfg, &sys, &data, derive_seed(99, k)).unwrap();
            if !result.spans {
                continue;
            }
            cells += check_net(&result.net, &cfg, &mut rng)?;
            done += 1;
        }
        checked += done;
    }
    if checked != 20 {
        return Err(format!("only {checked} spanning realizations"));
    }
    Ok(format!("{checked} networks, {cells} cells"))
}
