//! Factored scatter-matrix operators.
//!
//! The within, between and total scatter matrices are d x d, but each one is
//! H H^T for a tall factor H with at most n (or c) columns. Everything here
//! keeps the factors and applies S.V as H (H^T V); no d x d matrix is ever
//! allocated outside test oracles.

use nalgebra::{DMatrix, DVector};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Which scatter operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterKind {
    Within,
    Between,
    Total,
}

/// Tall factors of the three scatter matrices plus the centroids they are
/// built from.
///
/// * within factor: d x n, column i is `x_i - mu_{class(i)}`
/// * between factor: d x c, column j is `sqrt(n_j) (mu_j - mu)`
/// * total factor: d x n, column i is `x_i - mu`
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterFactors {
    within_factor: DMatrix<f64>,
    between_factor: DMatrix<f64>,
    total_factor: DMatrix<f64>,
    class_centroids: DMatrix<f64>,
    global_centroid: DVector<f64>,
    class_counts: Vec<usize>,
}

/// Per-class means (d x c, one column per class) and the global mean.
pub fn compute_centroids(dataset: &LabeledDataset) -> (DMatrix<f64>, DVector<f64>) {
    let d = dataset.dim();
    let n = dataset.num_samples();
    let c = dataset.num_classes();
    let data = dataset.data();

    let mut class_centroids = DMatrix::zeros(d, c);
    for (i, &j) in dataset.class_of().iter().enumerate() {
        let mut col = class_centroids.column_mut(j);
        col += data.column(i);
    }
    for (j, &count) in dataset.class_counts().iter().enumerate() {
        let mut col = class_centroids.column_mut(j);
        col /= count as f64;
    }

    let mut global_centroid = DVector::zeros(d);
    for i in 0..n {
        global_centroid += data.column(i);
    }
    global_centroid /= n as f64;

    (class_centroids, global_centroid)
}

impl ScatterFactors {
    /// Builds the three factor matrices from a dataset.
    pub fn from_dataset(dataset: &LabeledDataset) -> Self {
        let d = dataset.dim();
        let n = dataset.num_samples();
        let c = dataset.num_classes();
        let data = dataset.data();

        let (class_centroids, global_centroid) = compute_centroids(dataset);

        let mut within_factor = DMatrix::zeros(d, n);
        let mut total_factor = DMatrix::zeros(d, n);
        for i in 0..n {
            let x = data.column(i);
            let j = dataset.class_of()[i];
            within_factor
                .column_mut(i)
                .copy_from(&(x - class_centroids.column(j)));
            total_factor
                .column_mut(i)
                .copy_from(&(x - &global_centroid));
        }

        let mut between_factor = DMatrix::zeros(d, c);
        for j in 0..c {
            let weight = (dataset.class_counts()[j] as f64).sqrt();
            between_factor
                .column_mut(j)
                .copy_from(&((class_centroids.column(j) - &global_centroid) * weight));
        }

        Self {
            within_factor,
            between_factor,
            total_factor,
            class_centroids,
            global_centroid,
            class_counts: dataset.class_counts().to_vec(),
        }
    }

    /// Applies the selected scatter operator to a d x k block: returns
    /// `S V = H (H^T V)` at cost O(d n k).
    pub fn apply(&self, which: ScatterKind, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let h = self.factor(which);
        if v.nrows() != h.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "operand has {} rows, operator expects {}",
                v.nrows(),
                h.nrows()
            )));
        }
        Ok(h * (h.transpose() * v))
    }

    /// The tall factor H of the selected scatter matrix.
    pub fn factor(&self, which: ScatterKind) -> &DMatrix<f64> {
        match which {
            ScatterKind::Within => &self.within_factor,
            ScatterKind::Between => &self.between_factor,
            ScatterKind::Total => &self.total_factor,
        }
    }

    pub fn dim(&self) -> usize {
        self.total_factor.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.total_factor.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.between_factor.ncols()
    }

    /// d x c matrix of class centroids.
    pub fn class_centroids(&self) -> &DMatrix<f64> {
        &self.class_centroids
    }

    pub fn global_centroid(&self) -> &DVector<f64> {
        &self.global_centroid
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }
}

/// Numerical vs expected rank of one scatter matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankEntry {
    pub rank: usize,
    pub expected: usize,
    pub agrees: bool,
}

/// Numerical ranks of S_W, S_B, S_T against the generic-data expectations
/// (n-c, c-1, n-1). Disagreement flags samples that are not affinely
/// independent; it is reported, never an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankReport {
    pub within: RankEntry,
    pub between: RankEntry,
    pub total: RankEntry,
}

impl RankReport {
    pub fn all_agree(&self) -> bool {
        self.within.agrees && self.between.agrees && self.total.agrees
    }
}

/// Ranks computed from the singular values of each factor matrix
/// (rank of H equals rank of H H^T).
///
/// `rel_tol` is the relative singular-value cutoff; `None` selects
/// `max(nrows, ncols) * eps`.
pub fn rank_report(factors: &ScatterFactors, rel_tol: Option<f64>) -> RankReport {
    let n = factors.num_samples();
    let c = factors.num_classes();
    let entry = |h: &DMatrix<f64>, expected: usize| {
        let rank = factor_rank(h, rel_tol);
        RankEntry {
            rank,
            expected,
            agrees: rank == expected,
        }
    };
    RankReport {
        within: entry(&factors.within_factor, n - c),
        between: entry(&factors.between_factor, c - 1),
        total: entry(&factors.total_factor, n - 1),
    }
}

fn factor_rank(h: &DMatrix<f64>, rel_tol: Option<f64>) -> usize {
    let rel = rel_tol.unwrap_or(h.nrows().max(h.ncols()) as f64 * f64::EPSILON);
    let singular_values = h.clone().svd(false, false).singular_values;
    let max = singular_values.max();
    if max <= 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel * max).count()
}
