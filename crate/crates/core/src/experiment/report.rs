//! Report structures: per-run results, per-architecture and summary tables,
//! and the versioned JSON document they serialize to.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ScorePair;
use crate::mlp::{MlpArchitecture, TrainConfig};
use crate::samplers::SamplerKind;

use super::ExperimentConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One grid cell execution. `score` is absent when training diverged; the
/// failure message names the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub sampler: SamplerKind,
    pub architecture: MlpArchitecture,
    pub trial: usize,
    pub score: Option<ScorePair>,
    pub failure: Option<String>,
    pub wall_time_secs: f64,
    pub seed_used: u64,
}

/// Rows are datasets; columns follow the report's sampler order. `None`
/// marks a cell whose every trial failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub dataset: String,
    pub cells: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchTable {
    pub architecture: MlpArchitecture,
    pub table: Table,
}

/// Best method(s) per dataset at display precision (4 decimals); ties list
/// every winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestMethod {
    pub dataset: String,
    pub best: Vec<SamplerKind>,
    pub score: Option<f64>,
}

/// The full evaluation report: raw runs plus aggregated tables. A summary
/// cell is the arithmetic mean of that dataset/sampler's per-architecture
/// means, which in turn average the trials that succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub base_seed: u64,
    pub test_fraction: f64,
    pub n_trials: usize,
    pub train: TrainConfig,
    pub datasets: Vec<String>,
    pub samplers: Vec<SamplerKind>,
    pub architectures: Vec<MlpArchitecture>,
    pub runs: Vec<RunResult>,
    pub per_architecture_table: Vec<ArchTable>,
    pub summary_table: Table,
    pub best_method_per_dataset: Vec<BestMethod>,
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

impl EvalReport {
    pub(super) fn assemble(config: &ExperimentConfig, runs: Vec<RunResult>) -> Self {
        let datasets: Vec<String> = config.datasets.iter().map(|d| d.name.clone()).collect();
        let samplers: Vec<SamplerKind> = config.samplers.iter().map(|s| s.kind()).collect();
        let architectures = config.architectures.clone();

        let cell_mean = |dataset: &str, sampler: SamplerKind, arch: MlpArchitecture| {
            let scores: Vec<f64> = runs
                .iter()
                .filter(|r| {
                    r.dataset == dataset && r.sampler == sampler && r.architecture == arch
                })
                .filter_map(|r| r.score.as_ref().map(|s| s.macro_f1))
                .collect();
            mean(&scores)
        };

        let per_architecture_table: Vec<ArchTable> = architectures
            .iter()
            .map(|&arch| ArchTable {
                architecture: arch,
                table: Table {
                    rows: datasets
                        .iter()
                        .map(|ds| TableRow {
                            dataset: ds.clone(),
                            cells: samplers
                                .iter()
                                .map(|&s| cell_mean(ds, s, arch))
                                .collect(),
                        })
                        .collect(),
                },
            })
            .collect();

        let summary_table = Table {
            rows: datasets
                .iter()
                .enumerate()
                .map(|(d, ds)| TableRow {
                    dataset: ds.clone(),
                    cells: (0..samplers.len())
                        .map(|s| {
                            let arch_means: Vec<f64> = per_architecture_table
                                .iter()
                                .filter_map(|t| t.table.rows[d].cells[s])
                                .collect();
                            mean(&arch_means)
                        })
                        .collect(),
                })
                .collect(),
        };

        let best_method_per_dataset = summary_table
            .rows
            .iter()
            .map(|row| {
                let rounded: Vec<Option<f64>> =
                    row.cells.iter().map(|c| c.map(round4)).collect();
                let best_score = rounded
                    .iter()
                    .filter_map(|c| *c)
                    .fold(f64::NEG_INFINITY, f64::max);
                if best_score.is_finite() {
                    BestMethod {
                        dataset: row.dataset.clone(),
                        best: samplers
                            .iter()
                            .zip(&rounded)
                            .filter(|(_, c)| **c == Some(best_score))
                            .map(|(&s, _)| s)
                            .collect(),
                        score: Some(best_score),
                    }
                } else {
                    BestMethod {
                        dataset: row.dataset.clone(),
                        best: Vec::new(),
                        score: None,
                    }
                }
            })
            .collect();

        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            base_seed: config.base_seed,
            test_fraction: config.test_fraction,
            n_trials: config.n_trials,
            train: config.train.clone(),
            datasets,
            samplers,
            architectures,
            runs,
            per_architecture_table,
            summary_table,
            best_method_per_dataset,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut json =
            serde_json::to_string_pretty(self).expect("report serialization is infallible");
        json.push('\n');
        json
    }

    pub fn from_json_str(json: &str) -> Result<EvalReport> {
        let report: EvalReport = serde_json::from_str(json).map_err(|e| Error::JsonParse {
            path: "<string>".into(),
            source: e,
        })?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::ConfigInvalid(format!(
                "unsupported report schema version {}",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<EvalReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        EvalReport::from_json_str(&text).map_err(|e| match e {
            Error::JsonParse { source, .. } => Error::JsonParse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Copy with every wall-time field zeroed; the determinism contract
    /// compares reports in this form.
    pub fn strip_wall_times(&self) -> EvalReport {
        let mut clone = self.clone();
        for run in &mut clone.runs {
            run.wall_time_secs = 0.0;
        }
        clone
    }

    /// Mean-over-architectures macro-F1 of one (dataset, sampler, trial):
    /// the per-trial analogue of a summary cell.
    pub fn trial_summary_score(
        &self,
        dataset: &str,
        sampler: SamplerKind,
        trial: usize,
    ) -> Option<f64> {
        let scores: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.dataset == dataset && r.sampler == sampler && r.trial == trial)
            .filter_map(|r| r.score.as_ref().map(|s| s.macro_f1))
            .collect();
        mean(&scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{DatasetSource, DatasetSpec};
    use crate::samplers::SamplerSpec;

    fn fake_config() -> ExperimentConfig {
        ExperimentConfig {
            datasets: vec![DatasetSpec {
                name: "abalone".to_string(),
                source: DatasetSource::Synthetic {
                    n_majority: 10,
                    n_minority: 5,
                    n_features: 2,
                    class_separation: 1.0,
                },
            }],
            samplers: vec![
                SamplerSpec::None,
                SamplerSpec::kde_scott(),
                SamplerSpec::Ros,
                SamplerSpec::Rus,
            ],
            architectures: vec![MlpArchitecture::Mlp1],
            train: TrainConfig::default(),
            test_fraction: 0.25,
            n_trials: 1,
            base_seed: 0,
            output_dir: "out".into(),
        }
    }

    fn run(sampler: SamplerKind, macro_f1: f64) -> RunResult {
        RunResult {
            dataset: "abalone".to_string(),
            sampler,
            architecture: MlpArchitecture::Mlp1,
            trial: 0,
            score: Some(ScorePair {
                f1_major: macro_f1,
                f1_minor: macro_f1,
                macro_f1,
            }),
            failure: None,
            wall_time_secs: 0.1,
            seed_used: 1,
        }
    }

    #[test]
    fn best_method_marks_ties_at_display_precision() {
        let runs = vec![
            run(SamplerKind::None, 0.7533),
            run(SamplerKind::Kde, 0.93),
            run(SamplerKind::Ros, 0.93),
            run(SamplerKind::Rus, 0.80),
        ];
        let report = EvalReport::assemble(&fake_config(), runs);
        let best = &report.best_method_per_dataset[0];
        assert_eq!(best.best, vec![SamplerKind::Kde, SamplerKind::Ros]);
        assert_eq!(best.score, Some(0.93));
    }

    #[test]
    fn all_failed_cell_is_none_and_excluded_from_best() {
        let mut failed = run(SamplerKind::Kde, 0.0);
        failed.score = None;
        failed.failure = Some("training diverged".to_string());
        let runs = vec![
            run(SamplerKind::None, 0.60),
            failed,
            run(SamplerKind::Ros, 0.58),
            run(SamplerKind::Rus, 0.55),
        ];
        let report = EvalReport::assemble(&fake_config(), runs);
        assert_eq!(report.summary_table.rows[0].cells[1], None);
        assert_eq!(
            report.best_method_per_dataset[0].best,
            vec![SamplerKind::None]
        );
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let runs = vec![
            run(SamplerKind::None, 0.54),
            run(SamplerKind::Kde, 0.6167),
            run(SamplerKind::Ros, 0.58),
            run(SamplerKind::Rus, 0.5833),
        ];
        let report = EvalReport::assemble(&fake_config(), runs);
        let json = report.to_json_string();
        let parsed = EvalReport::from_json_str(&json).unwrap();
        assert_eq!(parsed.to_json_string(), json);
        assert_eq!(parsed, report);
    }
}
