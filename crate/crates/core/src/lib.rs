//! KDE-based minority oversampling for imbalanced binary classification,
//! with random over/under-sampling baselines, small from-scratch MLP
//! classifiers, and a seeded benchmark harness that scores every
//! (dataset, sampler, architecture) cell by macro-average F1.
//!
//! The pipeline for one run: stratified split → standardize on the training
//! half → resample the training half only → train → evaluate macro-F1 on the
//! untouched test half. Everything is deterministic given a base seed.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod kde;
pub mod metrics;
pub mod mlp;
pub mod samplers;

pub use dataset::{
    apply_standardizer, fit_standardizer, load_csv, make_synthetic, meta, stratified_split,
    write_csv, Dataset, DatasetMeta, LabelColumn, SplitPair, Standardizer,
};
pub use error::{Error, Result};
pub use experiment::{
    derive_seed, render_architecture_charts, render_summary_table, run_experiment, DatasetSource,
    DatasetSpec, EvalReport, ExperimentConfig, RunResult, TableFormat, PARALLELISM_ENV,
};
pub use kde::{scott_bandwidth, select_bandwidth, BandwidthCriterion, BandwidthGrid, KdeModel};
pub use metrics::{confusion, f1_per_class, macro_f1, ConfusionMatrix, ScorePair};
pub use mlp::{
    bce_loss, init, predict_class, rmsprop_step, train, train_with_history, Gradients,
    MlpArchitecture, MlpModel, RmspropState, TrainConfig, DECISION_THRESHOLD, PROB_CLIP,
};
pub use samplers::{
    resample, verify_balance, BandwidthMode, ResampleOutcome, SamplerKind, SamplerSpec,
};
