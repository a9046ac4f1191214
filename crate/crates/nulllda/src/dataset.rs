//! Labeled training data in the tall regime (feature dimension d, n samples,
//! usually d >> n).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A d x n sample matrix (samples are columns) plus per-sample class labels.
///
/// Class identifiers are arbitrary strings; they are mapped to contiguous
/// indices `0..c` in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    data: DMatrix<f64>,
    labels: Vec<String>,
    class_names: Vec<String>,
    class_of: Vec<usize>,
    class_counts: Vec<usize>,
}

impl LabeledDataset {
    /// Validates and wraps a d x n sample matrix with one label per column.
    ///
    /// Requires n >= 2 samples, c >= 2 classes, d >= 1 and finite features.
    pub fn new(data: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let (d, n) = data.shape();
        if d < 1 {
            return Err(Error::InvalidDataset("feature dimension must be >= 1".into()));
        }
        if n < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} samples",
                labels.len(),
                n
            )));
        }
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            let (row, col) = (bad % d, bad / d);
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {row}, sample {col}"
            )));
        }

        let mut class_names: Vec<String> = Vec::new();
        let mut class_of = Vec::with_capacity(n);
        for label in &labels {
            let idx = match class_names.iter().position(|c| c == label) {
                Some(idx) => idx,
                None => {
                    class_names.push(label.clone());
                    class_names.len() - 1
                }
            };
            class_of.push(idx);
        }
        if class_names.len() < 2 {
            return Err(Error::InvalidDataset("need at least 2 classes".into()));
        }
        let mut class_counts = vec![0usize; class_names.len()];
        for &j in &class_of {
            class_counts[j] += 1;
        }

        Ok(Self {
            data,
            labels,
            class_names,
            class_of,
            class_counts,
        })
    }

    /// Feature dimension d.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of samples n.
    pub fn num_samples(&self) -> usize {
        self.data.ncols()
    }

    /// Number of classes c.
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// The d x n sample matrix.
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Raw per-sample labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Class identifiers in first-appearance order.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Per-sample class index into [`class_names`](Self::class_names).
    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    /// Number of samples in each class.
    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Index of a class identifier, if present.
    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == label)
    }
}
