//! Experiment orchestration: runs the dataset × sampler × architecture ×
//! trial grid, aggregates macro-F1 tables, and persists a reproducible JSON
//! report.
//!
//! Every grid cell derives its own seed from the base seed and its identity,
//! so results are independent of scheduling order. Splitting and
//! standardization happen before resampling, and the test partition of a
//! given (dataset, trial) is shared by every sampler and architecture —
//! samplers never touch test data.

mod render;
mod report;

pub use render::{render_architecture_charts, render_summary_table, TableFormat};
pub use report::{ArchTable, BestMethod, EvalReport, RunResult, Table, TableRow};

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    apply_standardizer, fit_standardizer, load_csv, make_synthetic, stratified_split, Dataset,
    LabelColumn,
};
use crate::error::{Error, Result};
use crate::metrics::{confusion, ScorePair};
use crate::mlp::{predict_class, train, MlpArchitecture, TrainConfig, DECISION_THRESHOLD};
use crate::samplers::{resample, SamplerSpec};

/// Environment variable overriding the number of worker threads used for the
/// grid. Unset means the rayon default.
pub const PARALLELISM_ENV: &str = "KDESAMPLE_JOBS";

/// Where a benchmark dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        label_column: String,
        positive_label: String,
    },
    Synthetic {
        n_majority: usize,
        n_minority: usize,
        n_features: usize,
        class_separation: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: DatasetSource,
}

fn default_test_fraction() -> f64 {
    0.25
}

fn default_n_trials() -> usize {
    5
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Full experiment description, loadable from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub samplers: Vec<SamplerSpec>,
    pub architectures: Vec<MlpArchitecture>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_n_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::ConfigInvalid("no datasets configured".to_string()));
        }
        if self.samplers.is_empty() {
            return Err(Error::ConfigInvalid("no samplers configured".to_string()));
        }
        if self.architectures.is_empty() {
            return Err(Error::ConfigInvalid(
                "no architectures configured".to_string(),
            ));
        }
        if self.n_trials < 1 {
            return Err(Error::ConfigInvalid("n_trials must be ≥ 1".to_string()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "test_fraction must lie in (0,1), got {}",
                self.test_fraction
            )));
        }
        for (i, ds) in self.datasets.iter().enumerate() {
            if self.datasets[..i].iter().any(|d| d.name == ds.name) {
                return Err(Error::ConfigInvalid(format!(
                    "duplicate dataset name {:?}",
                    ds.name
                )));
            }
        }
        for (i, s) in self.samplers.iter().enumerate() {
            if self.samplers[..i].iter().any(|t| t.kind() == s.kind()) {
                return Err(Error::ConfigInvalid(format!(
                    "duplicate sampler kind {:?}",
                    s.kind()
                )));
            }
        }
        for (i, a) in self.architectures.iter().enumerate() {
            if self.architectures[..i].contains(a) {
                return Err(Error::ConfigInvalid(format!(
                    "duplicate architecture {a}"
                )));
            }
        }
        self.train
            .validate()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::JsonParse {
                path: path.to_path_buf(),
                source: e,
            })?;
        Ok(config)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Stable per-run seed: 64-bit FNV-1a over the UTF-8 concatenation
/// `dataset\x1F sampler\x1F architecture\x1F trial` (unit-separator
/// delimited, trial in decimal), XOR-folded with the base seed. Pure and
/// platform-independent, so any cell's seed can be re-derived offline.
pub fn derive_seed(
    base_seed: u64,
    dataset: &str,
    sampler: &str,
    architecture: &str,
    trial: usize,
) -> u64 {
    let input = format!("{dataset}\u{1f}{sampler}\u{1f}{architecture}\u{1f}{trial}");
    fnv1a64(input.as_bytes()) ^ base_seed
}

/// Seed for the (dataset, trial) split. Deliberately independent of sampler
/// and architecture so all methods are judged on identical test partitions.
pub fn split_seed(base_seed: u64, dataset: &str, trial: usize) -> u64 {
    derive_seed(base_seed, dataset, "split", "split", trial)
}

/// Seed for synthetic dataset generation; one fixed dataset per name.
pub fn dataset_seed(base_seed: u64, dataset: &str) -> u64 {
    derive_seed(base_seed, dataset, "dataset", "dataset", 0)
}

fn load_dataset(spec: &DatasetSpec, base_seed: u64) -> Result<Dataset> {
    let mut ds = match &spec.source {
        DatasetSource::Csv {
            path,
            label_column,
            positive_label,
        } => load_csv(path, &LabelColumn::parse(label_column), positive_label)?,
        DatasetSource::Synthetic {
            n_majority,
            n_minority,
            n_features,
            class_separation,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(dataset_seed(base_seed, &spec.name));
            make_synthetic(
                *n_majority,
                *n_minority,
                *n_features,
                *class_separation,
                &mut rng,
            )?
        }
    };
    ds.name = spec.name.clone();
    if ds.count(1) > ds.count(0) {
        return Err(Error::LabelsInverted {
            minority: ds.count(1),
            majority: ds.count(0),
        });
    }
    Ok(ds)
}

struct PreparedTrial {
    train: Dataset,
    test: Dataset,
}

/// Runs the full grid and assembles the report. Deterministic given
/// `config.base_seed`, regardless of execution order or thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;

    let datasets: Vec<Dataset> = config
        .datasets
        .iter()
        .map(|spec| load_dataset(spec, config.base_seed))
        .collect::<Result<_>>()?;

    // One split per (dataset, trial), shared across samplers and
    // architectures; standardizer fitted on the training half only.
    let mut prepared: Vec<Vec<PreparedTrial>> = Vec::with_capacity(datasets.len());
    for ds in &datasets {
        let mut trials = Vec::with_capacity(config.n_trials);
        for trial in 0..config.n_trials {
            let mut rng =
                ChaCha8Rng::seed_from_u64(split_seed(config.base_seed, &ds.name, trial));
            let pair = stratified_split(ds, config.test_fraction, &mut rng)?;
            let standardizer = fit_standardizer(&pair.train)?;
            trials.push(PreparedTrial {
                train: apply_standardizer(&standardizer, &pair.train),
                test: apply_standardizer(&standardizer, &pair.test),
            });
        }
        prepared.push(trials);
    }

    struct Job<'a> {
        dataset: &'a str,
        prepared: &'a PreparedTrial,
        sampler: &'a SamplerSpec,
        architecture: MlpArchitecture,
        trial: usize,
        seed: u64,
    }

    let mut jobs = Vec::new();
    for (d, ds) in datasets.iter().enumerate() {
        for sampler in &config.samplers {
            for &architecture in &config.architectures {
                for (trial, prep) in prepared[d].iter().enumerate() {
                    jobs.push(Job {
                        dataset: &ds.name,
                        prepared: prep,
                        sampler,
                        architecture,
                        trial,
                        seed: derive_seed(
                            config.base_seed,
                            &ds.name,
                            sampler.kind().as_str(),
                            architecture.name(),
                            trial,
                        ),
                    });
                }
            }
        }
    }

    let run_one = |job: &Job| -> Result<RunResult> {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
        let outcome = resample(&job.prepared.train, job.sampler, &mut rng)?;
        let train_config = TrainConfig {
            seed: rng.gen(),
            ..config.train.clone()
        };
        let (score, failure) = match train(job.architecture, &outcome.data, &train_config) {
            Ok(model) => {
                let preds =
                    predict_class(&model, &job.prepared.test.features.view(), DECISION_THRESHOLD)?;
                let cm = confusion(&preds, &job.prepared.test.labels)?;
                (Some(ScorePair::from_confusion(&cm)), None)
            }
            Err(e @ Error::TrainingDiverged { .. }) => (
                None,
                Some(format!(
                    "{e} (dataset {}, sampler {}, architecture {}, trial {})",
                    job.dataset,
                    job.sampler.kind(),
                    job.architecture,
                    job.trial
                )),
            ),
            Err(e) => return Err(e),
        };
        Ok(RunResult {
            dataset: job.dataset.to_string(),
            sampler: job.sampler.kind(),
            architecture: job.architecture,
            trial: job.trial,
            score,
            failure,
            wall_time_secs: started.elapsed().as_secs_f64(),
            seed_used: job.seed,
        })
    };

    let threads = std::env::var(PARALLELISM_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let runs: Vec<RunResult> = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::ConfigInvalid(format!("thread pool: {e}")))?;
            pool.install(|| jobs.par_iter().map(run_one).collect::<Result<_>>())?
        }
        None => jobs.par_iter().map(run_one).collect::<Result<_>>()?,
    };

    Ok(EvalReport::assemble(config, runs))
}
