//! Model persistence: one JSON document per model.
//!
//! Matrix entries are stored column-major as decimal strings with 17
//! significant digits, which round-trips binary64 bitwise and keeps the
//! file byte-stable across save/load/save.

use std::path::Path;

use nalgebra::DMatrix;
use nulllda::{nearest_centroid, NullLdaModel};
use serde::{Deserialize, Serialize};

use crate::data::format_float;
use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Columns with norm at or below this mark a hand-damaged model.
const DEGENERATE_COLUMN_NORM: f64 = 1e-8;

#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub sigma_min: String,
    pub sigma_max: String,
    pub verdict: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub dim: usize,
    pub num_classes: usize,
    pub labels: Vec<String>,
    pub orientation: Vec<String>,
    pub reduced_centroids: Vec<String>,
    pub seed: u64,
    pub retries: usize,
    pub certificate: CertificateSummary,
}

/// A model reconstructed from disk; carries exactly what projection and
/// classification need.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub orientation: DMatrix<f64>,
    pub labels: Vec<String>,
    pub reduced_centroids: DMatrix<f64>,
}

impl LoadedModel {
    pub fn dim(&self) -> usize {
        self.orientation.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn transform(&self, samples: &DMatrix<f64>) -> DMatrix<f64> {
        self.orientation.transpose() * samples
    }

    pub fn classify(&self, samples: &DMatrix<f64>) -> Vec<String> {
        let projected = self.transform(samples);
        (0..projected.ncols())
            .map(|i| {
                let j = nearest_centroid(&projected.column(i).into_owned(), &self.reduced_centroids);
                self.labels[j].clone()
            })
            .collect()
    }
}

fn matrix_to_strings(m: &DMatrix<f64>) -> Vec<String> {
    m.iter().map(|&x| format_float(x)).collect()
}

fn strings_to_matrix(
    entries: &[String],
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<DMatrix<f64>, CliError> {
    if entries.len() != rows * cols {
        return Err(CliError::Input(format!(
            "model {what} has {} entries, expected {rows} x {cols}",
            entries.len()
        )));
    }
    let mut values = Vec::with_capacity(entries.len());
    for (i, s) in entries.iter().enumerate() {
        let x: f64 = s
            .parse()
            .map_err(|_| CliError::Input(format!("model {what} entry {i}: '{s}' is not numeric")))?;
        values.push(x);
    }
    Ok(DMatrix::from_column_slice(rows, cols, &values))
}

/// Serializes to the on-disk representation; deterministic for a given
/// model, independent of when or where it is written.
pub fn write_file(path: &Path, file: &ModelFile) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(file)
        .map_err(|e| CliError::Input(format!("serializing model: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn save(path: &Path, model: &NullLdaModel) -> Result<(), CliError> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        dim: model.dim(),
        num_classes: model.num_classes(),
        labels: model.class_names().to_vec(),
        orientation: matrix_to_strings(model.orientation()),
        reduced_centroids: matrix_to_strings(model.reduced_centroids()),
        seed: model.seed(),
        retries: model.retries(),
        certificate: CertificateSummary {
            sigma_min: format_float(model.certificate().sigma_min()),
            sigma_max: format_float(model.certificate().sigma_max()),
            verdict: model.certificate().verdict().to_string(),
        },
    };
    write_file(path, &file)
}

pub fn load(path: &Path) -> Result<LoadedModel, CliError> {
    let file = read_file(path)?;
    if file.format_version != FORMAT_VERSION {
        return Err(CliError::Input(format!(
            "model format version {} not supported (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    if file.num_classes < 2 || file.labels.len() != file.num_classes {
        return Err(CliError::Input(format!(
            "model declares {} classes but lists {} labels",
            file.num_classes,
            file.labels.len()
        )));
    }
    let k = file.num_classes - 1;
    let orientation = strings_to_matrix(&file.orientation, file.dim, k, "orientation")?;
    let reduced_centroids =
        strings_to_matrix(&file.reduced_centroids, k, file.num_classes, "centroids")?;
    for (j, col) in orientation.column_iter().enumerate() {
        if col.norm() <= DEGENERATE_COLUMN_NORM {
            return Err(CliError::DegenerateModel(format!(
                "orientation column {j} has vanishing norm"
            )));
        }
    }
    Ok(LoadedModel {
        orientation,
        labels: file.labels,
        reduced_centroids,
    })
}
