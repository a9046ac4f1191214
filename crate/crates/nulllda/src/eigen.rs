//! Truncated eigendecomposition of the total scatter matrix via its n x n
//! Gram matrix.
//!
//! S_T = H H^T never exists explicitly. We eigendecompose K = H^T H instead:
//! each eigenpair (lambda, v) of K with lambda > 0 yields a range-basis
//! column u = H v / sqrt(lambda), so S_T u = lambda u. Cost is O(d n^2 + n^3)
//! and no d x d matrix is formed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scatter::{ScatterFactors, ScatterKind};

/// Entries with absolute value above this count as nonzero when fixing
/// column signs for reproducibility.
const SIGN_FIX_TOL: f64 = 1e-12;

/// Orthonormal range basis and positive spectrum of the total scatter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalScatterEigen {
    range_basis: DMatrix<f64>,
    singular_values: Vec<f64>,
    rank: usize,
}

impl TotalScatterEigen {
    /// Eigendecomposes S_T through the Gram matrix of its total factor.
    ///
    /// `rel_tol` is the relative cutoff on the Gram eigenvalues; `None`
    /// selects `max(d, n) * eps`. The cutoff is applied on the eigenvalue
    /// scale because the Gram matrix resolves sigma^2 only down to roundoff
    /// in its largest eigenvalue; a cutoff on the sigma scale would count
    /// pure-roundoff modes as rank.
    ///
    /// Errors with [`Error::DegenerateDataset`] when S_T vanishes (all
    /// samples identical).
    pub fn compute(factors: &ScatterFactors, rel_tol: Option<f64>) -> Result<Self> {
        let h = factors.factor(ScatterKind::Total);
        let (d, n) = h.shape();
        let gram = h.transpose() * h;

        let eigen = nalgebra::SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eigen.eigenvalues[b]
                .partial_cmp(&eigen.eigenvalues[a])
                .unwrap()
                .then(a.cmp(&b))
        });

        let lambda_max = eigen.eigenvalues[order[0]];
        if lambda_max <= 0.0 {
            return Err(Error::DegenerateDataset);
        }
        let rel = rel_tol.unwrap_or(d.max(n) as f64 * f64::EPSILON);
        let cutoff = rel * lambda_max;

        let kept: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| eigen.eigenvalues[i] > cutoff)
            .collect();
        let rank = kept.len();
        if rank == 0 {
            return Err(Error::DegenerateDataset);
        }

        let mut range_basis = DMatrix::zeros(d, rank);
        let mut singular_values = Vec::with_capacity(rank);
        for (col, &i) in kept.iter().enumerate() {
            let sigma = eigen.eigenvalues[i].sqrt();
            singular_values.push(sigma);
            let u = (h * eigen.eigenvectors.column(i)) / sigma;
            range_basis.column_mut(col).copy_from(&u);
        }
        fix_column_signs(&mut range_basis);

        Ok(Self {
            range_basis,
            singular_values,
            rank,
        })
    }

    /// Orthonormal d x r basis of range(S_T).
    pub fn range_basis(&self) -> &DMatrix<f64> {
        &self.range_basis
    }

    /// Positive singular values of the total factor, nonincreasing; the
    /// eigenvalues of S_T are their squares.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Numerical rank r of S_T (n - 1 for generic data).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.range_basis.nrows()
    }

    /// Applies the Moore-Penrose inverse of S_T in factored form:
    /// `U1 Sigma1^-2 U1^T v`.
    pub fn apply_pseudo_inverse(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if v.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operand has {} rows, expected {}",
                v.nrows(),
                self.dim()
            )));
        }
        let mut coords = self.range_basis.transpose() * v;
        for (i, &sigma) in self.singular_values.iter().enumerate() {
            let mut row = coords.row_mut(i);
            row /= sigma * sigma;
        }
        Ok(&self.range_basis * coords)
    }
}

/// Flips each column so its first entry with |x| > tol is positive.
pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        if let Some(lead) = col.iter().find(|x| x.abs() > SIGN_FIX_TOL) {
            if *lead < 0.0 {
                col.neg_mut();
            }
        }
    }
}
