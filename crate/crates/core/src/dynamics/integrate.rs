//! Adaptive Dormand–Prince 5(4) integration.

use super::{HyperRectangle, VectorField};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step before giving up.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Outcome of integrating over a time span.
#[derive(Clone, Debug, PartialEq)]
pub enum Flow {
    Completed(Vec<f64>),
    /// The state left the guard box; carries the last state inside it.
    Escaped(Vec<f64>),
}

impl Flow {
    pub fn state(&self) -> &[f64] {
        match self {
            Flow::Completed(y) | Flow::Escaped(y) => y,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Debug)]
pub struct DormandPrince {
    opts: IntegratorOptions,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self::new(IntegratorOptions::default())
    }
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl DormandPrince {
    pub fn new(opts: IntegratorOptions) -> Self {
        Self { opts }
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.opts
    }

    /// Integrates `ẏ = g(y)` from `t0` to `t1`. With a guard box, stops as soon
    /// as an accepted step leaves it.
    pub fn integrate<F: VectorField + ?Sized>(
        &self,
        field: &F,
        y0: &[f64],
        t0: f64,
        t1: f64,
        guard: Option<&HyperRectangle>,
    ) -> Result<Flow> {
        let d = y0.len();
        let mut y = y0.to_vec();
        if t1 <= t0 {
            return Ok(Flow::Completed(y));
        }
        let mut st = Stages {
            k: std::array::from_fn(|_| vec![0.0; d]),
            tmp: vec![0.0; d],
            y_new: vec![0.0; d],
        };
        field.field_into(&y, &mut st.k[0]);
        check_finite(&st.k[0], t0)?;

        let mut t = t0;
        let mut h = self.initial_step(field, &y, &st.k[0], t1 - t0);
        let mut steps = 0usize;
        while t < t1 {
            if steps >= self.opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            steps += 1;
            let last = t + h >= t1;
            let step = if last { t1 - t } else { h };
            let err = self.trial_step(field, &y, step, &mut st);
            if !err.is_finite() {
                // shrink and retry; a non-finite stage at the floor is fatal
                if step <= self.opts.min_step {
                    return Err(Error::Integration {
                        t,
                        reason: "non-finite field values".into(),
                    });
                }
                h = step * 0.1;
                continue;
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                std::mem::swap(&mut y, &mut st.y_new);
                st.k.swap(0, 6);
                if let Some(b) = guard {
                    if !b.contains(&y) {
                        return Ok(Flow::Escaped(y));
                    }
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
            if h < self.opts.min_step && t < t1 {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
        }
        Ok(Flow::Completed(y))
    }

    /// Computes the stages for one step from `y` with `k[0] = g(y)` already
    /// filled; leaves the candidate in `y_new` and `g(y_new)` in `k[6]`.
    /// Returns the scaled RMS error estimate.
    fn trial_step<F: VectorField + ?Sized>(
        &self,
        field: &F,
        y: &[f64],
        h: f64,
        st: &mut Stages,
    ) -> f64 {
        let d = y.len();
        let Stages { k, tmp, y_new } = st;
        for i in 0..d {
            tmp[i] = y[i] + h * A21 * k[0][i];
        }
        field.field_into(tmp, &mut k[1]);
        for i in 0..d {
            tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        field.field_into(tmp, &mut k[2]);
        for i in 0..d {
            tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        field.field_into(tmp, &mut k[3]);
        for i in 0..d {
            tmp[i] = y[i]
                + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        field.field_into(tmp, &mut k[4]);
        for i in 0..d {
            tmp[i] = y[i]
                + h * (A61 * k[0][i]
                    + A62 * k[1][i]
                    + A63 * k[2][i]
                    + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        field.field_into(tmp, &mut k[5]);
        for i in 0..d {
            y_new[i] = y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        field.field_into(y_new, &mut k[6]);

        let mut acc = 0.0;
        for i in 0..d {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / scale).powi(2);
        }
        (acc / d as f64).sqrt()
    }

    /// Starting step from the usual two-evaluation heuristic.
    fn initial_step<F: VectorField + ?Sized>(
        &self,
        field: &F,
        y: &[f64],
        f0: &[f64],
        span: f64,
    ) -> f64 {
        let d = y.len() as f64;
        let scale = |i: usize| self.opts.atol + self.opts.rtol * y[i].abs();
        let d0 = (y.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / d).sqrt();
        let d1 = (f0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / d).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
        let mut f1 = vec![0.0; y.len()];
        field.field_into(&y1, &mut f1);
        let d2 = (f1
            .iter()
            .zip(f0)
            .enumerate()
            .map(|(i, (a, b))| ((a - b) / scale(i)).powi(2))
            .sum::<f64>()
            / d)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        if !h1.is_finite() {
            return h0.max(self.opts.min_step);
        }
        (100.0 * h0).min(h1).min(span).max(self.opts.min_step)
    }
}

fn check_finite(v: &[f64], t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration {
            t,
            reason: "non-finite field values".into(),
        })
    }
}
