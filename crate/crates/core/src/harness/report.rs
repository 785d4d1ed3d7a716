use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RealizationRecord;
use crate::benchmark::GridSearch;
use crate::{Error, Result};

/// Included realizations needed before the loss/success separation is judged.
pub const MIN_REALIZATIONS_FOR_HEURISTIC: usize = 10;

/// Fraction of included realizations that must fall below the loss threshold.
const MIN_FRACTION_BELOW: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Trustworthy,
    Inexpressive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRate {
    pub epsilon: f64,
    pub successes: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sdev: f64,
    pub min: usize,
    pub max: usize,
}

impl CellStats {
    pub fn from_counts(counts: &[usize]) -> Option<Self> {
        if counts.is_empty() {
            return None;
        }
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / n;
        let var = if counts.len() > 1 {
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Self {
            count: counts.len(),
            mean,
            sdev: var.sqrt(),
            min: *counts.iter().min().expect("nonempty"),
            max: *counts.iter().max().expect("nonempty"),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub system: String,
    pub realizations: usize,
    pub included: usize,
    pub excluded: usize,
    pub exclusion_reasons: BTreeMap<String, usize>,
    pub success_rates: Vec<EpsilonRate>,
    /// Epsilon with the highest success rate (smallest on ties).
    pub best_epsilon: Option<f64>,
    pub best_rate: Option<f64>,
    /// Cell counts of the successful realizations at the best epsilon.
    pub cell_stats: Option<CellStats>,
    pub expressiveness: Option<Verdict>,
    /// Loss below which every included realization succeeds, if any fails.
    pub loss_threshold: Option<f64>,
    pub benchmark: Option<GridSearch>,
    pub diagnostic: Option<String>,
}

fn loss_key(r: &RealizationRecord) -> f64 {
    r.final_test_loss.unwrap_or(f64::INFINITY)
}

/// Judges whether low test loss reliably predicts success at `epsilon`.
///
/// Returns the verdict and the largest threshold `τ` such that all included
/// realizations with loss below `τ` succeed (`None` when none fail).
pub fn expressiveness_heuristic(
    records: &[RealizationRecord],
    epsilon: f64,
) -> Result<(Verdict, Option<f64>)> {
    let mut included: Vec<&RealizationRecord> = records.iter().filter(|r| r.included).collect();
    if included.len() < MIN_REALIZATIONS_FOR_HEURISTIC {
        return Err(Error::InsufficientRealizations {
            needed: MIN_REALIZATIONS_FOR_HEURISTIC,
            have: included.len(),
        });
    }
    included.sort_by(|a, b| loss_key(a).total_cmp(&loss_key(b)));
    let Some(first_failure) = included.iter().position(|r| !r.success_at(epsilon)) else {
        return Ok((Verdict::Trustworthy, None));
    };
    let tau = loss_key(included[first_failure]);
    let below = included.iter().filter(|r| loss_key(r) < tau).count();
    let verdict = if below as f64 >= MIN_FRACTION_BELOW * included.len() as f64 {
        Verdict::Trustworthy
    } else {
        Verdict::Inexpressive
    };
    Ok((verdict, Some(tau)))
}

/// Aggregates realization records; a pure function of its inputs.
pub fn summarize(
    system: &str,
    records: &[RealizationRecord],
    epsilons: &[f64],
    benchmark: Option<GridSearch>,
) -> ExperimentReport {
    let included: Vec<&RealizationRecord> = records.iter().filter(|r| r.included).collect();
    let mut exclusion_reasons = BTreeMap::new();
    for r in records.iter().filter(|r| !r.included) {
        let reason = r.exclusion.as_deref().unwrap_or("unknown");
        let key = reason.split(':').next().unwrap_or(reason).to_string();
        *exclusion_reasons.entry(key).or_insert(0) += 1;
    }
    let mut report = ExperimentReport {
        system: system.to_string(),
        realizations: records.len(),
        included: included.len(),
        excluded: records.len() - included.len(),
        exclusion_reasons,
        success_rates: Vec::new(),
        best_epsilon: None,
        best_rate: None,
        cell_stats: None,
        expressiveness: None,
        loss_threshold: None,
        benchmark,
        diagnostic: None,
    };
    if included.is_empty() {
        report.diagnostic = Some("all realizations were excluded".into());
        return report;
    }
    report.success_rates = epsilons
        .iter()
        .map(|&epsilon| {
            let successes = included.iter().filter(|r| r.success_at(epsilon)).count();
            EpsilonRate {
                epsilon,
                successes,
                rate: successes as f64 / included.len() as f64,
            }
        })
        .collect();
    let best = report
        .success_rates
        .iter()
        .fold(None::<&EpsilonRate>, |acc, r| match acc {
            Some(a) if a.rate >= r.rate => Some(a),
            _ => Some(r),
        })
        .expect("at least one epsilon")
        .clone();
    report.best_epsilon = Some(best.epsilon);
    report.best_rate = Some(best.rate);
    let counts: Vec<usize> = included
        .iter()
        .filter(|r| r.success_at(best.epsilon))
        .filter_map(|r| r.cell_count)
        .collect();
    report.cell_stats = CellStats::from_counts(&counts);
    match expressiveness_heuristic(records, best.epsilon) {
        Ok((verdict, tau)) => {
            report.expressiveness = Some(verdict);
            report.loss_threshold = tau;
        }
        Err(e) => report.diagnostic = Some(e.to_string()),
    }
    report
}
