//! `nulllda` command line: train, transform, classify, verify,
//! counterexample.
//!
//! Exit codes: 0 ok, 2 input error, 3 retries exhausted, 4 injected sketch
//! rejected, 5 degenerate model.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nulllda::{
    certificate, fit_with_retry, fit_with_sketch, verification_report, CertificateReport,
    ProjectorBasis, ScatterFactors, ScatterKind, SketchFit, TotalScatterEigen,
    DEFAULT_MAX_RETRIES,
};
use nulllda_cli::{data, model_file, CliError};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "nulllda",
    version,
    about = "Null-space LDA in the d >> n regime, fitted through certified random sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a labeled CSV and write it as JSON.
    Train {
        /// Training CSV: one sample per row, features first, label last.
        #[arg(long)]
        data: PathBuf,
        /// Output model path.
        #[arg(long)]
        out: PathBuf,
        /// Seed for the sketch generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Near-singular ratio threshold for the certificate.
        #[arg(long)]
        threshold: Option<f64>,
        /// Redraw budget before giving up.
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: usize,
        /// Use this CSV as the sketch instead of drawing one; the train
        /// fails with exit code 4 if the certificate rejects it.
        #[arg(long)]
        sketch_file: Option<PathBuf>,
        /// Input is feature-per-row with labels in the last row.
        #[arg(long)]
        transpose: bool,
    },
    /// Project samples into the reduced space; writes the (c-1) x m matrix.
    Transform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        transpose: bool,
    },
    /// Predict class labels by the nearest reduced centroid.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Write predictions here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
    },
    /// Re-derive the scatter operators from the data and check the model
    /// against the null-LDA criteria and the exact oracle.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        transpose: bool,
    },
    /// Emit the known failing instance: dataset, sketch and the expected
    /// report (zero between-projection, zero orientation, singular verdict).
    Counterexample {
        /// Feature dimension (>= 4).
        #[arg(long)]
        dim: usize,
        /// Sketch magnitude in (0, 1).
        #[arg(long)]
        alpha: f64,
        /// Output directory for dataset.csv, sketch.csv, expected.json.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train {
            data,
            out,
            seed,
            threshold,
            max_retries,
            sketch_file,
            transpose,
        } => cmd_train(&data, &out, seed, threshold, max_retries, sketch_file, transpose),
        Command::Transform {
            model,
            data,
            out,
            transpose,
        } => cmd_transform(&model, &data, &out, transpose),
        Command::Classify {
            model,
            data,
            out,
            transpose,
        } => cmd_classify(&model, &data, out.as_deref(), transpose),
        Command::Verify {
            model,
            data,
            transpose,
        } => cmd_verify(&model, &data, transpose),
        Command::Counterexample { dim, alpha, out } => cmd_counterexample(dim, alpha, &out),
    }
}

fn certificate_line(report: &CertificateReport, seed: u64, retries: usize) -> String {
    json!({
        "verdict": report.verdict().to_string(),
        "sigma_min": report.sigma_min(),
        "sigma_max": report.sigma_max(),
        "singular_floor": report.singular_floor(),
        "ratio_threshold": report.ratio_threshold(),
        "retries": retries,
        "seed": seed,
    })
    .to_string()
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    data: &std::path::Path,
    out: &std::path::Path,
    seed: u64,
    threshold: Option<f64>,
    max_retries: usize,
    sketch_file: Option<PathBuf>,
    transpose: bool,
) -> Result<(), CliError> {
    let dataset = data::load_dataset(data, transpose)?;
    let model = match sketch_file {
        Some(path) => {
            let sketch = data::load_matrix(&path)?;
            match fit_with_sketch(&dataset, &sketch, threshold)? {
                SketchFit::Accepted(model) => *model,
                SketchFit::Rejected(report) => {
                    println!("{}", certificate_line(&report, seed, 0));
                    return Err(CliError::SketchRejected);
                }
            }
        }
        None => fit_with_retry(&dataset, seed, max_retries, threshold)?,
    };
    model_file::save(out, &model)?;
    println!(
        "{}",
        certificate_line(model.certificate(), model.seed(), model.retries())
    );
    Ok(())
}

fn cmd_transform(
    model_path: &std::path::Path,
    data_path: &std::path::Path,
    out: &std::path::Path,
    transpose: bool,
) -> Result<(), CliError> {
    let model = model_file::load(model_path)?;
    let (samples, _) = data::load_samples(data_path, transpose, model.dim())?;
    data::write_matrix(out, &model.transform(&samples))
}

fn cmd_classify(
    model_path: &std::path::Path,
    data_path: &std::path::Path,
    out: Option<&std::path::Path>,
    transpose: bool,
) -> Result<(), CliError> {
    let model = model_file::load(model_path)?;
    let (samples, _) = data::load_samples(data_path, transpose, model.dim())?;
    let mut text = model.classify(&samples).join("\n");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(
    model_path: &std::path::Path,
    data_path: &std::path::Path,
    transpose: bool,
) -> Result<(), CliError> {
    let model = model_file::load(model_path)?;
    let dataset = data::load_dataset(data_path, transpose)?;
    if dataset.dim() != model.dim() || dataset.num_classes() != model.num_classes() {
        return Err(CliError::Input(format!(
            "model is {} x {} classes, data is {} x {} classes",
            model.dim(),
            model.num_classes(),
            dataset.dim(),
            dataset.num_classes()
        )));
    }
    let factors = ScatterFactors::from_dataset(&dataset);
    let eigen = TotalScatterEigen::compute(&factors, None)?;
    let report = verification_report(&factors, &eigen, &model.orientation)?;
    println!(
        "{}",
        json!({
            "within_residual": report.criteria.within_residual,
            "between_norms": report.criteria.between_norms,
            "rank_w": report.rank,
            "fixed_point_residual": report.fixed_point_residual,
            "span_angle_vs_oracle": report.oracle_angle,
            "pass": {
                "within": report.criteria.within_pass,
                "between": report.criteria.between_pass,
                "rank": report.rank_pass,
                "fixed_point": report.fixed_point_pass,
                "oracle": report.oracle_pass,
            },
            "all_pass": report.all_pass(),
        })
    );
    Ok(())
}

fn cmd_counterexample(dim: usize, alpha: f64, out: &std::path::Path) -> Result<(), CliError> {
    let (dataset, sketch) = nulllda::counterexample(dim, alpha)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    data::write_dataset(&out.join("dataset.csv"), &dataset)?;
    data::write_matrix(&out.join("sketch.csv"), &sketch)?;

    // Measured expectations, written for consumption by CI.
    let factors = ScatterFactors::from_dataset(&dataset);
    let eigen = TotalScatterEigen::compute(&factors, None)?;
    let basis = ProjectorBasis::build(&eigen, &factors)?;
    let between_projection = factors.apply(ScatterKind::Between, &sketch)?;
    let column_norms: Vec<f64> = (0..between_projection.ncols())
        .map(|j| between_projection.column(j).norm())
        .collect();
    let orientation = nulllda::fast_null_lda(&factors, &eigen, &sketch)?;
    let report = certificate(&basis, &sketch, None)?;
    let expected = json!({
        "dim": dim,
        "alpha": alpha,
        "sb_sketch_column_norms": column_norms,
        "orientation_frobenius_norm": orientation.norm(),
        "certificate_verdict": report.verdict().to_string(),
        "certificate_sigma_min": report.sigma_min(),
        "certificate_sigma_max": report.sigma_max(),
    });
    let mut text = serde_json::to_string_pretty(&expected)
        .map_err(|e| CliError::Input(format!("serializing expectation: {e}")))?;
    text.push('\n');
    std::fs::write(out.join("expected.json"), text)
        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    Ok(())
}
