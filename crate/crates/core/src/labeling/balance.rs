use rand::Rng as _;

use super::LabeledDataset;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum BalanceStrategy {
    /// Leave the dataset as is.
    None,
    /// Duplicate rows of smaller classes until all class counts are equal.
    Oversample,
    /// Duplicate rows until class counts follow the given ratios. Rows are
    /// only ever added, so the largest class relative to its ratio stays put.
    Ratio(Vec<f64>),
}

/// Rebalances class counts by seeded duplication of existing rows.
///
/// Added rows are appended after the original ones; no label changes and no
/// new distinct point is created.
pub fn balance(ds: &LabeledDataset, strategy: &BalanceStrategy, seed: u64) -> Result<LabeledDataset> {
    let l = ds.num_labels;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); l];
    for (i, &lab) in ds.labels.iter().enumerate() {
        by_class[lab].push(i);
    }
    if let Some(k) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(k));
    }
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let targets: Vec<usize> = match strategy {
        BalanceStrategy::None => counts.clone(),
        BalanceStrategy::Oversample => {
            let max = *counts.iter().max().expect("at least one class");
            vec![max; l]
        }
        BalanceStrategy::Ratio(ratios) => {
            if ratios.len() != l {
                return Err(Error::DimensionMismatch {
                    expected: l,
                    got: ratios.len(),
                });
            }
            if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                return Err(Error::InvalidParameters("balance ratios must be positive".into()));
            }
            let scale = counts
                .iter()
                .zip(ratios)
                .map(|(&c, r)| c as f64 / r)
                .fold(0.0, f64::max);
            counts
                .iter()
                .zip(ratios)
                .map(|(&c, r)| ((scale * r).round() as usize).max(c))
                .collect()
        }
    };

    let mut rng = seeded(seed);
    let mut out = ds.clone();
    for (class, rows) in by_class.iter().enumerate() {
        for _ in rows.len()..targets[class] {
            let src = rows[rng.random_range(0..rows.len())];
            out.points.push(ds.points[src].clone());
            out.labels.push(class);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(counts: &[usize]) -> LabeledDataset {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            for i in 0..c {
                points.push(vec![k as f64, i as f64]);
                labels.push(k);
            }
        }
        LabeledDataset::new(points, labels, counts.len()).unwrap()
    }

    #[test]
    fn oversample_equalizes() {
        let b = balance(&dataset(&[90, 10]), &BalanceStrategy::Oversample, 1).unwrap();
        assert_eq!(b.class_counts(), vec![90, 90]);
        let b = balance(&dataset(&[50, 50]), &BalanceStrategy::Oversample, 1).unwrap();
        assert_eq!(b.class_counts(), vec![50, 50]);
    }

    #[test]
    fn ratio_target() {
        let b = balance(&dataset(&[400, 100]), &BalanceStrategy::Ratio(vec![70.0, 30.0]), 3).unwrap();
        let c = b.class_counts();
        assert_eq!(c[0], 400);
        assert!((c[0] as f64 / (c[0] + c[1]) as f64 - 0.7).abs() < 1e-3);
    }

    #[test]
    fn empty_class_is_an_error() {
        let mut ds = dataset(&[3, 1]);
        ds.num_labels = 3;
        assert!(matches!(
            balance(&ds, &BalanceStrategy::Oversample, 0),
            Err(Error::EmptyClass(2))
        ));
    }
}
