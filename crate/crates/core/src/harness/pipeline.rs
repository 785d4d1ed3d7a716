use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::decomposition::{classify_cells, enumerate_cells, extract_arrangement, CellGrid, RegionAssignment};
use crate::dynamics::{flow_terminal, latin_hypercube, SystemSpec};
use crate::homology::{conley_check, BettiVector, ConleyResult, ExpectedBetti};
use crate::labeling::{balance, label_terminal_points, LabeledDataset, PersistenceDiagram0, TerminalLabels};
use crate::network::{init_constrained, train, ConstrainedNet, TrainResult};
use crate::rng::derive_seed;
use crate::{Error, Point, Result};

/// The labeled training data shared by all realizations of an experiment.
#[derive(Clone, Debug)]
pub struct PreparedData {
    /// Balanced dataset; `attractor_samples` holds the clustered terminal points.
    pub dataset: LabeledDataset,
    /// Class counts before balancing.
    pub raw_counts: Vec<usize>,
    pub escaped: usize,
    pub diagram: PersistenceDiagram0,
}

#[derive(Clone, Debug)]
pub struct Attractors {
    pub samples: Vec<Vec<Point>>,
    pub diagram: PersistenceDiagram0,
}

fn sample_and_label(
    cfg: &ExperimentConfig,
    sys: &SystemSpec,
    num_points: usize,
) -> Result<(Vec<Point>, TerminalLabels)> {
    let initial = latin_hypercube(&sys.domain, num_points, cfg.sampling.seed)?;
    let (terminal, escaped) = flow_terminal(sys, &initial, cfg.sampling.horizon)?;
    let labels = label_terminal_points(
        &terminal,
        &escaped,
        &cfg.clustering.options(sys),
        derive_seed(cfg.sampling.seed, 1),
    )?;
    Ok((initial, labels))
}

/// Samples initial conditions, integrates them, clusters the endpoints, and
/// balances the resulting classes.
pub fn prepare_dataset(cfg: &ExperimentConfig, sys: &SystemSpec) -> Result<PreparedData> {
    let (initial, tl) = sample_and_label(cfg, sys, cfg.sampling.num_points)?;
    let escaped = tl.labels.iter().filter(|l| l.is_none()).count();
    let (points, labels): (Vec<Point>, Vec<usize>) = initial
        .into_iter()
        .zip(&tl.labels)
        .filter_map(|(p, l)| l.map(|l| (p, l)))
        .unzip();
    let mut raw = LabeledDataset::new(points, labels, tl.num_labels)?;
    let raw_counts = raw.class_counts();
    raw.attractor_samples = tl.samples;
    let dataset = balance(&raw, &cfg.sampling.balance.strategy(), derive_seed(cfg.sampling.seed, 2))?;
    Ok(PreparedData {
        dataset,
        raw_counts,
        escaped,
        diagram: tl.diagram,
    })
}

/// Locates the attractors from a smaller sample, for the direct labeler.
pub fn identify_attractors(cfg: &ExperimentConfig, sys: &SystemSpec) -> Result<Attractors> {
    let (_, tl) = sample_and_label(cfg, sys, cfg.benchmark.attractor_points)?;
    Ok(Attractors {
        samples: tl.samples,
        diagram: tl.diagram,
    })
}

/// Seeds the network and trains it on the prepared data.
pub fn train_realization(
    cfg: &ExperimentConfig,
    sys: &SystemSpec,
    data: &PreparedData,
    seed: u64,
) -> Result<TrainResult> {
    let net = init_constrained(
        &sys.domain,
        cfg.network.q,
        data.dataset.num_labels,
        derive_seed(seed, 0),
    )?;
    let tc = crate::network::TrainConfig {
        seed: derive_seed(seed, 1),
        ..cfg.training.clone()
    };
    train(net, &data.dataset, &tc)
}

/// Cell grid of a trained network and its region assignment per epsilon.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub grid: CellGrid,
    pub regions: Vec<RegionAssignment>,
}

pub fn decompose(net: &ConstrainedNet, sys: &SystemSpec, epsilons: &[f64]) -> Result<Decomposition> {
    let arrangement = extract_arrangement(net, &sys.domain)?;
    let grid = enumerate_cells(&arrangement, &sys.domain)?;
    let regions = epsilons
        .iter()
        .map(|&eps| classify_cells(net, &grid, eps))
        .collect::<Result<_>>()?;
    Ok(Decomposition { grid, regions })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOutcome {
    pub epsilon: f64,
    pub success: bool,
    pub failure: Option<String>,
    /// Betti numbers per region tag; `None` for an empty region.
    pub betti: BTreeMap<String, Option<BettiVector>>,
    pub region_cells: BTreeMap<String, usize>,
}

impl EpsilonOutcome {
    fn new(epsilon: f64, check: ConleyResult) -> Self {
        Self {
            epsilon,
            success: check.success,
            betti: check
                .per_tag
                .iter()
                .map(|t| (t.tag.to_string(), t.betti.clone()))
                .collect(),
            region_cells: check.per_tag.iter().map(|t| (t.tag.to_string(), t.cells)).collect(),
            failure: check.failure,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub seed: u64,
    pub final_test_loss: Option<f64>,
    pub final_train_loss: Option<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub spans: bool,
    pub included: bool,
    pub exclusion: Option<String>,
    pub cell_count: Option<usize>,
    pub per_epsilon: Vec<EpsilonOutcome>,
    pub wall_time_secs: f64,
}

impl RealizationRecord {
    pub fn success_at(&self, epsilon: f64) -> bool {
        self.per_epsilon
            .iter()
            .any(|o| o.epsilon == epsilon && o.success)
    }
}

/// Trains, filters, decomposes, and checks one realization.
pub fn run_realization(
    cfg: &ExperimentConfig,
    sys: &SystemSpec,
    data: &PreparedData,
    expected: &ExpectedBetti,
    index: usize,
    seed: u64,
) -> RealizationRecord {
    let start = Instant::now();
    let mut record = RealizationRecord {
        index,
        seed,
        final_test_loss: None,
        final_train_loss: None,
        epochs: 0,
        converged: false,
        spans: false,
        included: false,
        exclusion: None,
        cell_count: None,
        per_epsilon: Vec::new(),
        wall_time_secs: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let res = train_realization(cfg, sys, data, seed)?;
        record.final_test_loss = Some(res.final_test_loss());
        record.final_train_loss = Some(res.final_train_loss());
        record.epochs = res.epochs();
        record.converged = res.converged;
        record.spans = res.spans;
        if !res.spans {
            record.exclusion = Some("directions do not span".into());
            return Ok(());
        }
        if !res.converged {
            record.exclusion = Some("training did not converge".into());
            return Ok(());
        }
        let dec = decompose(&res.net, sys, &cfg.epsilons)?;
        record.cell_count = Some(dec.grid.len());
        record.per_epsilon = dec
            .regions
            .iter()
            .map(|r| Ok(EpsilonOutcome::new(r.epsilon, conley_check(r, expected)?)))
            .collect::<Result<_>>()?;
        record.included = true;
        Ok(())
    })();
    if let Err(e) = outcome {
        record.included = false;
        record.per_epsilon.clear();
        record.exclusion = Some(match e {
            Error::NonFiniteLoss { .. } => format!("training did not converge: {e}"),
            other => format!("pipeline error: {other}"),
        });
    }
    record.wall_time_secs = start.elapsed().as_secs_f64();
    record
}
