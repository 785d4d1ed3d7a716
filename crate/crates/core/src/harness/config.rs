use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemSpec;
use crate::homology::{expected_betti, ExpectedBetti};
use crate::labeling::{BalanceStrategy, ClusteringOptions, LabelOrder, GAP_RATIO_MIN};
use crate::network::TrainConfig;
use crate::{Error, Result};

pub const DEFAULT_EPSILONS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.49];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceConfig {
    None,
    Oversample,
    Ratio(Vec<f64>),
}

impl BalanceConfig {
    pub fn strategy(&self) -> BalanceStrategy {
        match self {
            BalanceConfig::None => BalanceStrategy::None,
            BalanceConfig::Oversample => BalanceStrategy::Oversample,
            BalanceConfig::Ratio(r) => BalanceStrategy::Ratio(r.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub num_points: usize,
    pub seed: u64,
    /// Number of time-1 iterates applied to each sample.
    pub horizon: usize,
    pub balance: BalanceConfig,
    /// Hausdorff tolerance for the stabilization diagnostic; 5% of the
    /// domain diameter if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilization_tol: Option<f64>,
}

impl SamplingConfig {
    pub fn stabilization_tol(&self, sys: &SystemSpec) -> f64 {
        self.stabilization_tol
            .unwrap_or(0.05 * sys.domain.diameter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelOrderConfig {
    /// Clusters ordered by centroid, lexicographically.
    Centroid,
    /// Outermost cluster (about the domain center) first.
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    /// Fixed number of attractors; selected from the persistence gap if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_labels: Option<usize>,
    pub max_clusters: usize,
    pub gap_ratio_min: f64,
    pub subsample: usize,
    pub order: LabelOrderConfig,
}

impl ClusteringConfig {
    pub fn options(&self, sys: &SystemSpec) -> ClusteringOptions {
        ClusteringOptions {
            num_labels: self.num_labels,
            max_clusters: self.max_clusters,
            gap_ratio_min: self.gap_ratio_min,
            subsample: self.subsample,
            order: match self.order {
                LabelOrderConfig::Centroid => LabelOrder::CentroidLex,
                LabelOrderConfig::Radial => LabelOrder::RadialDescending {
                    center: sys.domain.center(),
                },
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Hidden units per direction group.
    pub q: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelerKind {
    Knn,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub labeler: LabelerKind,
    /// Neighbors for the nearest-neighbor labeler.
    pub k: usize,
    pub n_max: usize,
    /// Samples used to locate the attractors for the direct labeler when no
    /// prepared dataset is available.
    pub attractor_points: usize,
    /// Run the grid search as part of `experiment`.
    pub with_experiment: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: String,
    /// Hill parameter file replacing the built-in parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_file: Option<String>,
    /// Expected-Betti JSON file; the built-in table is used if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_file: Option<String>,
    pub realizations: usize,
    pub master_seed: u64,
    pub epsilons: Vec<f64>,
    pub sampling: SamplingConfig,
    pub clustering: ClusteringConfig,
    pub network: NetworkConfig,
    pub training: TrainConfig,
    pub benchmark: BenchmarkConfig,
}

struct Row {
    q: usize,
    num_points: usize,
    batch_size: usize,
    max_epochs: usize,
    patience: usize,
    beta: f64,
    horizon: usize,
    num_labels: usize,
    order: LabelOrderConfig,
    /// Smallest regular grid resolution with the expected homology.
    reference_n: usize,
}

fn defaults_row(system: &str) -> Result<Row> {
    use LabelOrderConfig::{Centroid, Radial};
    let row = |q, num_points, batch_size, max_epochs, patience, beta, horizon, num_labels, order, reference_n| Row {
        q,
        num_points,
        batch_size,
        max_epochs,
        patience,
        beta,
        horizon,
        num_labels,
        order,
        reference_n,
    };
    Ok(match system {
        "linear_separatrix" => row(1, 10_000, 1_000, 100, 10, 0.1, 20, 2, Centroid, 3),
        "radial_bistable" => row(2, 1_000, 100, 1_000, 100, 0.1, 14, 2, Radial, 5),
        "radial_tristable" => row(5, 1_000, 100, 1_000, 100, 0.5, 14, 3, Radial, 13),
        "nonlinear_separatrix" => row(1, 10_000, 1_000, 100, 20, 0.1, 20, 2, Centroid, 3),
        "hill_periodic_3d" => row(5, 11_000, 1_000, 1_000, 100, 0.5, 50, 4, Centroid, 12),
        "emt_hill_6d" => row(2, 100_000, 10_000, 2_000, 100, 0.1, 50, 2, Centroid, 6),
        "ellipsoidal_2d" => row(2, 10_000, 1_000, 1_000, 100, 0.1, 14, 2, Radial, 11),
        "ellipsoidal_3d" => row(2, 20_000, 2_000, 1_000, 100, 0.1, 14, 2, Radial, 11),
        "ellipsoidal_4d" => row(2, 800_000, 80_000, 2_000, 100, 0.1, 14, 2, Radial, 11),
        "ellipsoidal_5d" => row(2, 800_000, 80_000, 2_000, 100, 0.1, 14, 2, Radial, 11),
        "decay" => row(1, 1_000, 100, 100, 10, 0.1, 5, 1, Centroid, 1),
        other => return Err(Error::UnknownSystem(other.to_string())),
    })
}

impl ExperimentConfig {
    /// Defaults for a catalog system.
    pub fn defaults_for(system: &str) -> Result<Self> {
        let r = defaults_row(system)?;
        let (balance, test_fraction) = match system {
            "ellipsoidal_4d" => (BalanceConfig::Ratio(vec![70.0, 30.0]), 0.2),
            "ellipsoidal_5d" => (BalanceConfig::Ratio(vec![86.0, 14.0]), 0.2),
            // Ring-shaped basins: oversampling the disk class lifts F above 1/2 on
            // the outer edge strips, which the separable net cannot avoid.
            "radial_bistable" | "radial_tristable" | "ellipsoidal_2d" | "ellipsoidal_3d" => {
                (BalanceConfig::None, 0.5)
            }
            _ => (BalanceConfig::Oversample, 0.5),
        };
        let dim = SystemSpec::by_name(system)?.dim;
        Ok(Self {
            system: system.to_string(),
            system_file: None,
            expected_file: None,
            realizations: 100,
            master_seed: 0,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            sampling: SamplingConfig {
                num_points: r.num_points,
                seed: 0,
                horizon: r.horizon,
                balance,
                stabilization_tol: None,
            },
            clustering: ClusteringConfig {
                num_labels: Some(r.num_labels),
                max_clusters: 10,
                gap_ratio_min: GAP_RATIO_MIN,
                subsample: 2_000,
                order: r.order,
            },
            network: NetworkConfig { q: r.q },
            training: TrainConfig {
                learning_rate: 0.01,
                batch_size: r.batch_size,
                max_epochs: r.max_epochs,
                patience: r.patience,
                convergence_ratio: r.beta,
                seed: 0,
                test_fraction,
            },
            benchmark: BenchmarkConfig {
                labeler: LabelerKind::Direct,
                k: 1,
                n_max: 2 * r.reference_n,
                attractor_points: 20_000,
                with_experiment: dim <= 3,
            },
        })
    }

    /// Parses a TOML document naming a system and overriding its defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let user: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let system = user
            .get("system")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("missing `system`".into()))?;
        let defaults = Self::defaults_for(system)?;
        let mut merged =
            toml::Table::try_from(&defaults).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, user);
        let cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        // relative parameter files are resolved next to the config
        let base = path.parent().unwrap_or(Path::new("."));
        for file in [&mut cfg.system_file, &mut cfg.expected_file].into_iter().flatten() {
            if Path::new(file.as_str()).is_relative() {
                *file = base.join(file.as_str()).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        if self.realizations == 0 {
            return Err(Error::Config("need at least one realization".into()));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 0.5)) {
            return Err(Error::Config("epsilons must lie in (0, 0.5)".into()));
        }
        if self.network.q == 0 || self.sampling.num_points < 2 || self.sampling.horizon == 0 {
            return Err(Error::Config("q, num_points and horizon must be positive".into()));
        }
        if self.benchmark.n_max == 0 || self.benchmark.k == 0 {
            return Err(Error::Config("benchmark n_max and k must be positive".into()));
        }
        Ok(())
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        match &self.system_file {
            Some(path) => SystemSpec::hill_from_json(&std::fs::read_to_string(path)?),
            None => SystemSpec::by_name(&self.system),
        }
    }

    pub fn expected(&self) -> Result<ExpectedBetti> {
        match &self.expected_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                // either a bare tag map or a table keyed by system name
                ExpectedBetti::from_json(&text).or_else(|_| {
                    let table: std::collections::BTreeMap<String, ExpectedBetti> =
                        serde_json::from_str(&text)?;
                    table
                        .get(&self.system)
                        .cloned()
                        .ok_or_else(|| Error::UnknownSystem(self.system.clone()))
                })
            }
            None => expected_betti(&self.system),
        }
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
