//! End-to-end pipeline invariants: leakage-free splits, schedule
//! independence, and report persistence.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kdesample::experiment::split_seed;
use kdesample::{
    make_synthetic, run_experiment, stratified_split, DatasetSource, DatasetSpec, EvalReport,
    ExperimentConfig, MlpArchitecture, SamplerSpec, TrainConfig, PARALLELISM_ENV,
};

fn config() -> ExperimentConfig {
    ExperimentConfig {
        datasets: vec![DatasetSpec {
            name: "blob".to_string(),
            source: DatasetSource::Synthetic {
                n_majority: 80,
                n_minority: 16,
                n_features: 3,
                class_separation: 2.0,
            },
        }],
        samplers: vec![
            SamplerSpec::None,
            SamplerSpec::kde_scott(),
            SamplerSpec::Ros,
            SamplerSpec::Rus,
        ],
        architectures: vec![MlpArchitecture::Mlp1, MlpArchitecture::Mlp2],
        train: TrainConfig {
            epochs: 4,
            ..TrainConfig::default()
        },
        test_fraction: 0.25,
        n_trials: 2,
        base_seed: 11,
        output_dir: PathBuf::from("out"),
    }
}

#[test]
fn split_seed_ignores_sampler_and_architecture() {
    // The test partition for a (dataset, trial) is a function of the base
    // seed alone; re-deriving it twice yields bitwise-identical halves.
    let data = make_synthetic(50, 10, 2, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let seed = split_seed(11, "blob", 1);
    let a = stratified_split(&data, 0.25, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let b = stratified_split(&data, 0.25, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    assert_eq!(a.test, b.test);
    assert_eq!(a.train, b.train);
}

#[test]
fn schedule_independence_across_thread_counts() {
    let cfg = config();
    std::env::set_var(PARALLELISM_ENV, "1");
    let serial = run_experiment(&cfg).unwrap();
    std::env::set_var(PARALLELISM_ENV, "4");
    let parallel = run_experiment(&cfg).unwrap();
    std::env::remove_var(PARALLELISM_ENV);
    assert_eq!(
        serial.strip_wall_times().to_json_string(),
        parallel.strip_wall_times().to_json_string()
    );
}

#[test]
fn report_survives_disk_round_trip() {
    let report = run_experiment(&config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    report.save(&path).unwrap();
    let loaded = EvalReport::load(&path).unwrap();
    assert_eq!(loaded, report);
    // Serialize → parse → serialize is byte-identical.
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(loaded.to_json_string().into_bytes(), bytes);
}

#[test]
fn every_seed_is_recorded_and_rederivable() {
    let cfg = config();
    let report = run_experiment(&cfg).unwrap();
    for run in &report.runs {
        let expected = kdesample::derive_seed(
            cfg.base_seed,
            &run.dataset,
            run.sampler.as_str(),
            run.architecture.name(),
            run.trial,
        );
        assert_eq!(run.seed_used, expected);
    }
}
