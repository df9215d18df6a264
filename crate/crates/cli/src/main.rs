//! Benchmark CLI: run the full experiment grid, resample a single CSV, or
//! re-render tables and charts from a saved report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kdesample::{
    apply_standardizer, fit_standardizer, load_csv, render_architecture_charts,
    render_summary_table, resample, run_experiment, write_csv, Dataset, EvalReport,
    ExperimentConfig, LabelColumn, SamplerSpec, TableFormat,
};

#[derive(Parser)]
#[command(
    name = "kdesample",
    version,
    about = "KDE minority oversampling and its benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full dataset × sampler × architecture experiment grid.
    Run {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Balance one CSV dataset and write the result.
    Resample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Header name (or 0-based index) of the label column.
        #[arg(long)]
        label_column: String,
        /// Label value mapped to the minority class (1).
        #[arg(long)]
        positive: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Re-render tables or charts from a saved report, without retraining.
    Report {
        /// Report JSON produced by `run`.
        #[arg(long)]
        from: PathBuf,
        #[arg(long, value_enum)]
        format: ReportFormat,
        /// Output directory for SVG charts (ignored for the text formats).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Kde,
    Ros,
    Rus,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Markdown,
    Csv,
    Svg,
}

fn main() -> ExitCode {
    match run_cli(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_cli(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => cmd_run(&config, seed, out),
        Command::Resample {
            input,
            method,
            label_column,
            positive,
            seed,
            output,
        } => cmd_resample(&input, method, &label_column, &positive, seed, &output),
        Command::Report { from, format, out } => cmd_report(&from, format, &out),
    }
}

fn cmd_run(config_path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut config = ExperimentConfig::from_json_file(config_path)
        .with_context(|| format!("cannot load config {}", config_path.display()))?;
    if let Some(seed) = seed {
        config.base_seed = seed;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }

    let report = run_experiment(&config)?;

    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let report_path = out_dir.join("report.json");
    report.save(&report_path)?;
    let markdown = render_summary_table(&report, TableFormat::Markdown);
    std::fs::write(out_dir.join("summary.md"), &markdown)?;
    std::fs::write(
        out_dir.join("summary.csv"),
        render_summary_table(&report, TableFormat::Csv),
    )?;
    let charts = render_architecture_charts(&report, out_dir)?;

    print!("{markdown}");
    println!();
    println!("report: {}", report_path.display());
    for path in charts {
        println!("chart:  {}", path.display());
    }
    Ok(())
}

fn cmd_resample(
    input: &Path,
    method: Method,
    label_column: &str,
    positive: &str,
    seed: u64,
    output: &Path,
) -> Result<()> {
    let dataset = load_csv(input, &LabelColumn::parse(label_column), positive)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balanced = match method {
        Method::Ros => resample(&dataset, &SamplerSpec::Ros, &mut rng)?.data,
        Method::Rus => resample(&dataset, &SamplerSpec::Rus, &mut rng)?.data,
        Method::Kde => kde_resample_raw(&dataset, &mut rng)?,
    };
    write_csv(&balanced, output)?;
    println!(
        "{}: {} majority / {} minority -> {}: {} / {}",
        input.display(),
        dataset.count(0),
        dataset.count(1),
        output.display(),
        balanced.count(0),
        balanced.count(1),
    );
    Ok(())
}

// KDE operates in standardized space; synthetic rows are mapped back so the
// output file lives in the input's units, with the original rows untouched.
fn kde_resample_raw(dataset: &Dataset, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let standardizer = fit_standardizer(dataset)?;
    let standardized = apply_standardizer(&standardizer, dataset);
    let outcome = resample(&standardized, &SamplerSpec::kde_scott(), rng)?;

    let n_original = dataset.n_samples();
    let n_total = outcome.data.n_samples();
    let mut features = ndarray::Array2::zeros((n_total, dataset.n_features()));
    features
        .slice_mut(ndarray::s![..n_original, ..])
        .assign(&dataset.features);
    for i in n_original..n_total {
        let row = outcome.data.features.row(i);
        let raw = standardizer.inverse_row(row.as_slice().expect("contiguous row"));
        for (j, v) in raw.iter().enumerate() {
            features[[i, j]] = *v;
        }
    }
    let mut labels = dataset.labels.clone();
    labels.extend(std::iter::repeat_n(1u8, n_total - n_original));
    Ok(Dataset::new(
        dataset.name.clone(),
        features,
        labels,
        dataset.feature_names.clone(),
    )?)
}

fn cmd_report(from: &Path, format: ReportFormat, out: &Path) -> Result<()> {
    let report = EvalReport::load(from)?;
    match format {
        ReportFormat::Markdown => {
            print!("{}", render_summary_table(&report, TableFormat::Markdown));
        }
        ReportFormat::Csv => {
            print!("{}", render_summary_table(&report, TableFormat::Csv));
        }
        ReportFormat::Svg => {
            let charts = render_architecture_charts(&report, out)?;
            if charts.is_empty() {
                bail!("report holds no architecture tables to plot");
            }
            for path in charts {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}
