//! Hill-function gene regulatory networks.
//!
//! Component `i` of the field is `-γ_i x_i + h_i(x)`, where `h_i` is the
//! product over regulators `j` of `H^±(x_j, L_ji, U_ji, Θ_ji, n)`. The sign
//! matrix records whether `x_j` activates (`+1`) or represses (`-1`) `x_i`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Repressing Hill function `ℓ + (u − ℓ) θⁿ / (yⁿ + θⁿ)`.
pub fn hill_neg(y: f64, lower: f64, upper: f64, theta: f64, n: f64) -> f64 {
    let yn = pow(y, n);
    let tn = pow(theta, n);
    lower + (upper - lower) * tn / (yn + tn)
}

/// Activating Hill function `ℓ + (u − ℓ) yⁿ / (yⁿ + θⁿ)`.
pub fn hill_pos(y: f64, lower: f64, upper: f64, theta: f64, n: f64) -> f64 {
    let yn = pow(y, n);
    let tn = pow(theta, n);
    lower + (upper - lower) * yn / (yn + tn)
}

#[inline]
fn pow(y: f64, n: f64) -> f64 {
    if n.fract() == 0.0 && n.abs() < i32::MAX as f64 {
        y.powi(n as i32)
    } else {
        y.max(0.0).powf(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    pub n: f64,
    pub gamma: Vec<f64>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    /// `sign[j][i]`: effect of `x_j` on `h_i`.
    pub sign: Vec<Vec<i8>>,
    #[serde(skip)]
    terms: Vec<Vec<Term>>,
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    source: usize,
    activating: bool,
    lower: f64,
    upper: f64,
    theta_n: f64,
}

impl HillParams {
    pub fn new(
        n: f64,
        gamma: Vec<f64>,
        lower: Vec<Vec<f64>>,
        upper: Vec<Vec<f64>>,
        theta: Vec<Vec<f64>>,
        sign: Vec<Vec<i8>>,
    ) -> Result<Self> {
        let mut params = Self {
            n,
            gamma,
            lower,
            upper,
            theta,
            sign,
            terms: Vec::new(),
        };
        params.validate()?;
        params.compile();
        Ok(params)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HillParams = serde_json::from_str(text)?;
        Self::new(raw.n, raw.gamma, raw.lower, raw.upper, raw.theta, raw.sign)
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.gamma.len();
        if d == 0 {
            return Err(Error::InvalidParameters("empty Hill system".into()));
        }
        if !(self.n > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "Hill exponent must be positive, got {}",
                self.n
            )));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(**g > 0.0)) {
            return Err(Error::InvalidParameters(format!(
                "decay rates must be positive, got {g}"
            )));
        }
        for (name, m) in [
            ("L", &self.lower),
            ("U", &self.upper),
            ("Theta", &self.theta),
        ] {
            if m.len() != d || m.iter().any(|row| row.len() != d) {
                return Err(Error::InvalidParameters(format!("{name} must be {d}x{d}")));
            }
        }
        if self.sign.len() != d || self.sign.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidParameters(format!("sign must be {d}x{d}")));
        }
        for j in 0..d {
            for i in 0..d {
                let s = self.sign[j][i];
                if !(-1..=1).contains(&s) {
                    return Err(Error::InvalidParameters(format!(
                        "sign[{j}][{i}] must be -1, 0 or 1"
                    )));
                }
                let active = s != 0;
                let pattern = [self.lower[j][i], self.upper[j][i], self.theta[j][i]]
                    .iter()
                    .map(|v| *v != 0.0)
                    .collect::<Vec<_>>();
                if pattern.iter().any(|nz| *nz != active) {
                    return Err(Error::InvalidParameters(format!(
                        "entry ({j}, {i}): L, U, Theta and sign must share a sparsity pattern"
                    )));
                }
            }
        }
        Ok(())
    }

    fn compile(&mut self) {
        let d = self.dim();
        self.terms = (0..d)
            .map(|i| {
                (0..d)
                    .filter(|&j| self.sign[j][i] != 0)
                    .map(|j| Term {
                        source: j,
                        activating: self.sign[j][i] > 0,
                        lower: self.lower[j][i],
                        upper: self.upper[j][i],
                        theta_n: pow(self.theta[j][i], self.n),
                    })
                    .collect()
            })
            .collect();
    }

    /// Regulation term `h_i(x)`.
    pub fn regulation(&self, i: usize, x: &[f64]) -> f64 {
        self.terms[i]
            .iter()
            .map(|t| {
                let yn = pow(x[t.source], self.n);
                let frac = if t.activating {
                    yn / (yn + t.theta_n)
                } else {
                    t.theta_n / (yn + t.theta_n)
                };
                t.lower + (t.upper - t.lower) * frac
            })
            .product()
    }

    pub fn field_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = -self.gamma[i] * x[i] + self.regulation(i, x);
        }
    }
}
