//! Orthonormal bases, principal angles and numerical rank.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Orthonormal basis of the column span, via the left singular vectors.
///
/// Errors when the input is rank deficient at the
/// `max(nrows, ncols) * eps` level.
pub fn orthonormal_columns(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = a.shape();
    if cols == 0 || rows < cols {
        return Err(Error::RankDeficientInput(format!(
            "{rows} x {cols} matrix cannot have {cols} independent columns"
        )));
    }
    let svd = a.clone().svd(true, false);
    let max = svd.singular_values.max();
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * max;
    if max <= 0.0 || svd.singular_values.iter().any(|&s| s <= cutoff) {
        return Err(Error::RankDeficientInput(format!(
            "column rank below {cols}"
        )));
    }
    Ok(svd.u.unwrap())
}

/// Largest principal angle between the column spans of two d x k matrices,
/// in radians.
///
/// Cosines come from the singular values of Qa^T Qb; for angles below pi/4
/// the sine-based residual `Qb - Qa (Qa^T Qb)` is used instead, which
/// resolves tiny angles down to machine precision where the arccosine
/// route bottoms out near sqrt(eps).
pub fn largest_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} x {} vs {} x {}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let qa = orthonormal_columns(a)?;
    let qb = orthonormal_columns(b)?;
    let cross = qa.transpose() * &qb;
    let cosines = cross.clone().svd(false, false).singular_values;
    let cos_min = cosines.min().clamp(0.0, 1.0);
    if cos_min * cos_min > 0.5 {
        let residual = &qb - &qa * cross;
        let sin_max = residual
            .svd(false, false)
            .singular_values
            .max()
            .clamp(0.0, 1.0);
        Ok(sin_max.asin())
    } else {
        Ok(cos_min.acos())
    }
}

/// Number of singular values above `rel_tol * sigma_max`; `None` selects
/// `max(nrows, ncols) * eps`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: Option<f64>) -> usize {
    let rel = rel_tol.unwrap_or(a.nrows().max(a.ncols()) as f64 * f64::EPSILON);
    let singular_values = a.clone().svd(false, false).singular_values;
    let max = singular_values.max();
    if max <= 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel * max).count()
}

/// Number of singular values above an absolute floor. Used when the matrix
/// itself may be pure roundoff and its own sigma_max is not a trustworthy
/// scale.
pub fn rank_with_floor(a: &DMatrix<f64>, floor: f64) -> usize {
    let singular_values = a.clone().svd(false, false).singular_values;
    singular_values.iter().filter(|&&s| s > floor).count()
}
