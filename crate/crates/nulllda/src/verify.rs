//! Independent exact null-LDA solver and the verification predicates built
//! on it.
//!
//! The exact route goes the classical way: restrict to range(S_T), take the
//! null space of the projected within scatter there, then the principal
//! components of the projected between scatter inside that null space. Only
//! the intersection of null(S_W) with range(S_T) carries discriminant
//! information, so the whole computation stays r x r.

use nalgebra::DMatrix;

use crate::eigen::TotalScatterEigen;
use crate::error::{Error, Result};
use crate::fit::apply_discriminant;
use crate::scatter::{ScatterFactors, ScatterKind};
use crate::subspace;

/// Scaled within residual must stay below this for the first null-LDA
/// criterion to pass.
pub const WITHIN_TOL: f64 = 1e-8;

/// Scaled per-column between norm must stay above this for the second
/// criterion to pass.
pub const BETWEEN_TOL: f64 = 1e-6;

/// Scaled fixed-point residual bound.
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// Largest admissible principal angle to the exact null-LDA subspace.
pub const ORACLE_ANGLE_TOL: f64 = 1e-8;

/// Exact null-LDA orientation via the projected null-space route.
///
/// Returns a d x (c-1) matrix with orthonormal columns. Errors when the
/// null space of the projected within scatter does not have dimension c-1,
/// i.e. the generic rank assumptions fail.
pub fn exact_null_lda(
    factors: &ScatterFactors,
    eigen: &TotalScatterEigen,
) -> Result<DMatrix<f64>> {
    let r = eigen.rank();
    let n = factors.num_samples();
    let k = factors.num_classes() - 1;
    let u1 = eigen.range_basis();

    // Projected within scatter, r x r.
    let within_coords = u1.transpose() * factors.factor(ScatterKind::Within);
    let projected_within = &within_coords * within_coords.transpose();
    let decomp = nalgebra::SymmetricEigen::new(projected_within);
    let lambda_max = decomp.eigenvalues.max().max(0.0);
    let cutoff = (n - 1) as f64 * f64::EPSILON * lambda_max;

    let null_cols: Vec<usize> = (0..r)
        .filter(|&i| decomp.eigenvalues[i] <= cutoff)
        .collect();
    if null_cols.len() != k {
        return Err(Error::RankAssumption(format!(
            "projected within scatter has null space of dimension {}, expected {k}",
            null_cols.len()
        )));
    }
    let mut null_basis = DMatrix::zeros(r, k);
    for (col, &i) in null_cols.iter().enumerate() {
        null_basis
            .column_mut(col)
            .copy_from(&decomp.eigenvectors.column(i));
    }

    // Principal components of the between scatter inside the null space.
    let lifted = u1 * null_basis; // d x k, orthonormal
    let between_coords = lifted.transpose() * factors.factor(ScatterKind::Between);
    let restricted_between = &between_coords * between_coords.transpose();
    let pc = nalgebra::SymmetricEigen::new(restricted_between);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        pc.eigenvalues[b]
            .partial_cmp(&pc.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let pc_max = pc.eigenvalues.max().max(0.0);
    let pc_cutoff = k as f64 * f64::EPSILON * pc_max;
    if order.iter().any(|&i| pc.eigenvalues[i] <= pc_cutoff) {
        return Err(Error::RankAssumption(
            "between scatter is rank deficient inside the within null space".into(),
        ));
    }
    let mut rotation = DMatrix::zeros(k, k);
    for (col, &i) in order.iter().enumerate() {
        rotation.column_mut(col).copy_from(&pc.eigenvectors.column(i));
    }

    Ok(lifted * rotation)
}

/// The two null-LDA criteria for an orientation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaCheck {
    /// `|S_W W|_F / (|H_w|^2 |W|_F)`
    pub within_residual: f64,
    /// Per column: `|S_B w| / (|H_b|^2 |w|)`
    pub between_norms: Vec<f64>,
    pub within_pass: bool,
    pub between_pass: bool,
}

/// Evaluates both null-LDA criteria through the factored operators.
pub fn criteria_check(factors: &ScatterFactors, w: &DMatrix<f64>) -> Result<CriteriaCheck> {
    let k = factors.num_classes() - 1;
    if w.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "orientation has {} columns, expected {k}",
            w.ncols()
        )));
    }
    let within_scale = spectral_norm(factors.factor(ScatterKind::Within)).powi(2);
    let between_scale = spectral_norm(factors.factor(ScatterKind::Between)).powi(2);

    let sw_w = factors.apply(ScatterKind::Within, w)?;
    let w_norm = w.norm();
    let within_residual = sw_w.norm() / (within_scale * w_norm).max(f64::MIN_POSITIVE);

    let sb_w = factors.apply(ScatterKind::Between, w)?;
    let between_norms: Vec<f64> = (0..k)
        .map(|j| {
            let col_norm = w.column(j).norm();
            sb_w.column(j).norm() / (between_scale * col_norm).max(f64::MIN_POSITIVE)
        })
        .collect();

    Ok(CriteriaCheck {
        within_pass: within_residual <= WITHIN_TOL,
        between_pass: between_norms.iter().all(|&x| x > BETWEEN_TOL),
        within_residual,
        between_norms,
    })
}

/// Scaled residual of the fixed-point identity `G W = W`.
pub fn fixed_point_check(
    factors: &ScatterFactors,
    eigen: &TotalScatterEigen,
    w: &DMatrix<f64>,
) -> Result<f64> {
    let gw = apply_discriminant(factors, eigen, w)?;
    Ok((gw - w).norm() / w.norm().max(f64::MIN_POSITIVE))
}

/// Largest principal angle between the spans of two d x k matrices.
/// Errors on rank-deficient input.
pub fn span_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    subspace::largest_principal_angle(a, b)
}

/// Everything the verify command reports about a fitted orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub criteria: CriteriaCheck,
    pub rank: usize,
    pub rank_pass: bool,
    pub fixed_point_residual: f64,
    pub fixed_point_pass: bool,
    pub oracle_angle: f64,
    pub oracle_pass: bool,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.within_pass
            && self.criteria.between_pass
            && self.rank_pass
            && self.fixed_point_pass
            && self.oracle_pass
    }
}

/// Runs every verification predicate against an orientation matrix.
pub fn verification_report(
    factors: &ScatterFactors,
    eigen: &TotalScatterEigen,
    w: &DMatrix<f64>,
) -> Result<VerificationReport> {
    let k = factors.num_classes() - 1;
    let criteria = criteria_check(factors, w)?;
    let rank = subspace::numerical_rank(w, None);
    let fixed_point_residual = fixed_point_check(factors, eigen, w)?;
    let oracle = exact_null_lda(factors, eigen)?;
    let oracle_angle = span_distance(w, &oracle)?;
    Ok(VerificationReport {
        criteria,
        rank,
        rank_pass: rank == k,
        fixed_point_residual,
        fixed_point_pass: fixed_point_residual <= FIXED_POINT_TOL,
        oracle_angle,
        oracle_pass: oracle_angle <= ORACLE_ANGLE_TOL,
    })
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}
