//! Sketch generation: seeded Gaussian draws, the known failing instance,
//! and adversarial sketches orthogonal to the certificate span.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::LabeledDataset;
use crate::eigen::TotalScatterEigen;
use crate::error::{Error, Result};
use crate::projector::ProjectorBasis;
use crate::subspace::orthonormal_columns;

/// d x k matrix with independent standard-normal entries, filled
/// column by column.
pub fn gaussian_sketch<R: Rng>(d: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, k);
    for col in 0..k {
        for row in 0..d {
            m[(row, col)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// The two-class instance on which an arbitrary sketch loses all
/// discriminant information.
///
/// All entries of the shared direction e = (1,0,1,...,1) are exact, the two
/// class centroids are e and 2e, and the sketch column only touches the
/// coordinate where e vanishes, so S_B Y, the certificate matrix and the
/// orientation matrix are all exactly zero in floating point.
///
/// The class centroid constraints force `2(x1+x2) = x3+x4`, so the four
/// samples span only three directions; they are affinely independent and the
/// scatter ranks keep their generic values (n-c, c-1, n-1) = (2, 1, 3).
pub fn counterexample(d: usize, alpha: f64) -> Result<(LabeledDataset, DMatrix<f64>)> {
    if d < 4 {
        return Err(Error::InvalidParameter(format!(
            "need dimension >= 4 for four independent directions, got {d}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }

    // Shared direction with a hole at coordinate 1, plus two unit
    // perturbations orthogonal to it, to each other and to that hole.
    let mut e = vec![1.0; d];
    e[1] = 0.0;
    let mut v = vec![0.0; d];
    v[0] = 1.0 / 2.0_f64.sqrt();
    v[2] = -1.0 / 2.0_f64.sqrt();
    let mut w = vec![0.0; d];
    w[0] = 1.0 / 6.0_f64.sqrt();
    w[2] = 1.0 / 6.0_f64.sqrt();
    w[3] = -2.0 / 6.0_f64.sqrt();

    let mut data = DMatrix::zeros(d, 4);
    for row in 0..d {
        data[(row, 0)] = e[row] + v[row];
        data[(row, 1)] = e[row] - v[row];
        data[(row, 2)] = 2.0 * e[row] + w[row];
        data[(row, 3)] = 2.0 * e[row] - w[row];
    }
    let labels = ["1", "1", "2", "2"].map(String::from).to_vec();
    let dataset = LabeledDataset::new(data, labels)?;

    let mut sketch = DMatrix::zeros(d, 1);
    sketch[(1, 0)] = alpha;

    Ok((dataset, sketch))
}

/// Random full-column-rank sketch inside the orthogonal complement of the
/// certificate span; the fast method maps it to an exactly uninformative
/// (zero) orientation.
///
/// Requires d - (c-1) >= c-1 so the complement can hold c-1 independent
/// columns. The complement projection is applied twice so the leftover
/// component along the certificate span is at the roundoff floor the
/// certificate classifies as singular.
pub fn adversarial_sketch(
    basis: &ProjectorBasis,
    eigen: &TotalScatterEigen,
    rng_seed: u64,
) -> Result<DMatrix<f64>> {
    let d = basis.dim();
    let k = basis.discriminant_dim();
    if eigen.dim() != d {
        return Err(Error::DimensionMismatch(
            "eigen decomposition and basis disagree on dimension".into(),
        ));
    }
    if d - k < k {
        return Err(Error::DimensionMismatch(format!(
            "complement of dimension {} cannot hold {k} independent columns",
            d - k
        )));
    }

    let q = orthonormal_columns(basis.certificate_basis())?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let z = gaussian_sketch(d, k, &mut rng);
    let mut y = &z - &q * (q.transpose() * &z);
    y = &y - &q * (q.transpose() * &y);

    let singular_values = y.clone().svd(false, false).singular_values;
    let max = singular_values.max();
    if max <= 0.0
        || singular_values
            .iter()
            .any(|&s| s <= d.max(k) as f64 * f64::EPSILON * max)
    {
        return Err(Error::RankDeficientSketch);
    }
    Ok(y)
}
