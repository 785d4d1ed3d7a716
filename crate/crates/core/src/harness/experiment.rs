use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;

use super::pipeline::train_realization;
use super::{
    decompose, identify_attractors, prepare_dataset, run_realization, summarize, ExperimentConfig,
    ExperimentReport, LabelerKind, PreparedData, RealizationRecord,
};
use crate::benchmark::{min_grid_search, GridSearch, Labeler};
use crate::decomposition::{write_plot_csv, CellGrid, RegionAssignment};
use crate::dynamics::SystemSpec;
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "MLCD_WORKERS";

/// Thread pool sized by [`WORKERS_ENV`], or by rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<RealizationRecord>,
    pub report: ExperimentReport,
    /// Decomposition of a representative realization of a planar system.
    pub plot: Option<(CellGrid, RegionAssignment)>,
}

/// Minimal regular grid with the expected homology.
pub fn run_benchmark(cfg: &ExperimentConfig, sys: &SystemSpec, data: Option<&PreparedData>) -> Result<GridSearch> {
    let labeler = match cfg.benchmark.labeler {
        LabelerKind::Knn => {
            let owned;
            let data = match data {
                Some(d) => d,
                None => {
                    owned = prepare_dataset(cfg, sys)?;
                    &owned
                }
            };
            Labeler::Knn {
                data: data.dataset.clone(),
                k: cfg.benchmark.k,
            }
        }
        LabelerKind::Direct => Labeler::Direct {
            system: sys.clone(),
            horizon: cfg.sampling.horizon,
            attractor_samples: match data {
                Some(d) => d.dataset.attractor_samples.clone(),
                None => identify_attractors(cfg, sys)?.samples,
            },
        },
    };
    min_grid_search(&sys.domain, &labeler, &cfg.expected()?, cfg.benchmark.n_max)
}

/// Runs all realizations of an experiment on a shared dataset.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let sys = cfg.system_spec()?;
    let expected = cfg.expected()?;
    worker_pool()?.install(|| {
        let data = prepare_dataset(cfg, &sys)?;
        let mut records: Vec<RealizationRecord> = (0..cfg.realizations)
            .into_par_iter()
            .map(|k| {
                let seed = derive_seed(cfg.master_seed, k as u64);
                run_realization(cfg, &sys, &data, &expected, k, seed)
            })
            .collect();
        records.sort_by_key(|r| r.seed);
        let benchmark = if cfg.benchmark.with_experiment {
            Some(run_benchmark(cfg, &sys, Some(&data))?)
        } else {
            None
        };
        let report = summarize(&cfg.system, &records, &cfg.epsilons, benchmark);
        let plot = if sys.dim == 2 {
            representative_plot(cfg, &sys, &data, &records, &report)?
        } else {
            None
        };
        Ok(ExperimentOutput {
            config: cfg.clone(),
            records,
            report,
            plot,
        })
    })
}

fn representative_plot(
    cfg: &ExperimentConfig,
    sys: &SystemSpec,
    data: &PreparedData,
    records: &[RealizationRecord],
    report: &ExperimentReport,
) -> Result<Option<(CellGrid, RegionAssignment)>> {
    let Some(eps) = report.best_epsilon else {
        return Ok(None);
    };
    let chosen = records
        .iter()
        .find(|r| r.success_at(eps))
        .or_else(|| records.iter().find(|r| r.included));
    let Some(rec) = chosen else {
        return Ok(None);
    };
    let res = train_realization(cfg, sys, data, rec.seed)?;
    let mut dec = decompose(&res.net, sys, &[eps])?;
    let regions = dec.regions.pop().expect("one epsilon");
    Ok(Some((dec.grid, regions)))
}

fn scatter_csv(out: &ExperimentOutput, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let eps = &out.config.epsilons;
    let best = out.report.best_epsilon;
    let mut header = vec![
        "seed".to_string(),
        "final_test_loss".into(),
        "included".into(),
        "success".into(),
        "cell_count".into(),
    ];
    header.extend(eps.iter().map(|e| format!("success_eps_{e}")));
    w.write_record(&header)?;
    for r in &out.records {
        let mut row = vec![
            r.seed.to_string(),
            r.final_test_loss.map_or(String::new(), |l| l.to_string()),
            r.included.to_string(),
            best.is_some_and(|b| r.success_at(b)).to_string(),
            r.cell_count.map_or(String::new(), |c| c.to_string()),
        ];
        row.extend(eps.iter().map(|&e| r.success_at(e).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `records.json`, `report.json`, `scatter.csv`, and for planar
/// systems `cells.csv`, into `dir`.
pub fn write_experiment_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("records.json"))?), &out.records)?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("report.json"))?), &out.report)?;
    scatter_csv(out, &dir.join("scatter.csv"))?;
    if let Some((grid, regions)) = &out.plot {
        write_plot_csv(grid, regions, BufWriter::new(File::create(dir.join("cells.csv"))?))?;
    }
    Ok(())
}
