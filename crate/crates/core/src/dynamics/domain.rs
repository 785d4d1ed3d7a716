use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned box `∏ [lower_i, upper_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct HyperRectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for HyperRectangle {
    type Error = Error;

    fn try_from(raw: RawBox) -> Result<Self> {
        HyperRectangle::new(raw.lower, raw.upper)
    }
}

impl HyperRectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "axis {i}: need lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.width(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Scales the box about its center by `factor`.
    pub fn inflated(&self, factor: f64) -> Self {
        let center = self.center();
        let (lower, upper) = (0..self.dim())
            .map(|i| {
                let half = 0.5 * self.width(i) * factor;
                (center[i] - half, center[i] + half)
            })
            .unzip();
        Self { lower, upper }
    }

    /// Range of `⟨direction, x⟩` over the box.
    pub fn project(&self, direction: &[f64]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (i, &c) in direction.iter().enumerate() {
            let a = c * self.lower[i];
            let b = c * self.upper[i];
            lo += a.min(b);
            hi += a.max(b);
        }
        (lo, hi)
    }
}
