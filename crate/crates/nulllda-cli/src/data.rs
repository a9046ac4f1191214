//! CSV ingestion and emission.
//!
//! Default layout: one sample per row, feature columns first, class label in
//! the final column. A header row is skipped when any cell other than the
//! last fails to parse as a number. `--transpose` reads feature-per-row
//! files (columns are samples, labels in the last row) and expects no
//! header. All numeric output carries 17 significant digits so binary64
//! values round-trip exactly.

use std::path::Path;

use nalgebra::DMatrix;
use nulllda::LabeledDataset;

use crate::CliError;

/// Formats with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_grid(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut grid = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        grid.push(record.iter().map(str::to_owned).collect::<Vec<String>>());
    }
    if grid.is_empty() {
        return Err(CliError::Input(format!("{}: empty file", path.display())));
    }
    Ok(grid)
}

fn transpose_grid(grid: Vec<Vec<String>>) -> Vec<Vec<String>> {
    let rows = grid.len();
    let cols = grid[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| grid[i][j].clone()).collect())
        .collect()
}

fn parses(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

/// Header iff any cell of the first row, except optionally the trailing
/// label cell, is non-numeric.
fn strip_header(grid: &mut Vec<Vec<String>>, label_column: bool) {
    let first = &grid[0];
    let check = if label_column && first.len() > 1 {
        &first[..first.len() - 1]
    } else {
        &first[..]
    };
    if check.iter().any(|cell| !parses(cell)) {
        grid.remove(0);
    }
}

fn parse_cell(cell: &str, line: usize, column: usize) -> Result<f64, CliError> {
    cell.parse::<f64>().map_err(|_| {
        CliError::Input(format!(
            "line {line}: column {column}: '{cell}' is not numeric"
        ))
    })
}

/// Loads a labeled training file into a dataset (features become columns).
pub fn load_dataset(path: &Path, transpose: bool) -> Result<LabeledDataset, CliError> {
    let mut grid = read_grid(path)?;
    if transpose {
        grid = transpose_grid(grid);
    } else {
        strip_header(&mut grid, true);
    }
    if grid.is_empty() || grid[0].len() < 2 {
        return Err(CliError::Input(format!(
            "{}: need at least one feature column and a label column",
            path.display()
        )));
    }
    let n = grid.len();
    let d = grid[0].len() - 1;
    let mut data = DMatrix::zeros(d, n);
    let mut labels = Vec::with_capacity(n);
    for (i, row) in grid.iter().enumerate() {
        for j in 0..d {
            data[(j, i)] = parse_cell(&row[j], i + 1, j + 1)?;
        }
        labels.push(row[d].clone());
    }
    LabeledDataset::new(data, labels).map_err(|e| CliError::Input(e.to_string()))
}

/// Loads an all-numeric matrix file (for injected sketches), row-major as
/// written.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let mut grid = read_grid(path)?;
    strip_header(&mut grid, false);
    if grid.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let rows = grid.len();
    let cols = grid[0].len();
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            m[(i, j)] = parse_cell(cell, i + 1, j + 1)?;
        }
    }
    Ok(m)
}

/// Loads samples for projection or classification against a model of
/// dimension `dim`. Accepts files with or without the trailing label
/// column; labels are returned when present.
pub fn load_samples(
    path: &Path,
    transpose: bool,
    dim: usize,
) -> Result<(DMatrix<f64>, Option<Vec<String>>), CliError> {
    let mut grid = read_grid(path)?;
    if transpose {
        grid = transpose_grid(grid);
    }
    let width = grid[0].len();
    let labeled = width == dim + 1;
    if !labeled && width != dim {
        return Err(CliError::Input(format!(
            "{}: rows have {width} values, model dimension is {dim}",
            path.display()
        )));
    }
    if !transpose {
        strip_header(&mut grid, labeled);
    }
    let n = grid.len();
    let mut data = DMatrix::zeros(dim, n);
    let mut labels = labeled.then(|| Vec::with_capacity(n));
    for (i, row) in grid.iter().enumerate() {
        for j in 0..dim {
            data[(j, i)] = parse_cell(&row[j], i + 1, j + 1)?;
        }
        if let Some(labels) = labels.as_mut() {
            labels.push(row[dim].clone());
        }
    }
    Ok((data, labels))
}

/// Writes a matrix as CSV, one row per line.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_float(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes a dataset in the default layout: one sample per row, label last.
pub fn write_dataset(path: &Path, dataset: &LabeledDataset) -> Result<(), CliError> {
    let data = dataset.data();
    let mut out = String::new();
    for i in 0..dataset.num_samples() {
        let mut cells: Vec<String> = (0..dataset.dim())
            .map(|j| format_float(data[(j, i)]))
            .collect();
        cells.push(dataset.labels()[i].clone());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
