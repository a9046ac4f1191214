//! Full-rank certificate for a sketch, and its geometric counterpart.
//!
//! The orientation matrix built from a sketch Y has full column rank exactly
//! when the (c-1) x (c-1) cross product of the certificate basis with Y is
//! nonsingular. Equivalently, no nonzero vector of span(Y) may be orthogonal
//! to the span of the certificate basis, which the geometric check measures
//! through the largest principal angle.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::projector::ProjectorBasis;
use crate::subspace::largest_principal_angle;

/// Default ratio sigma_min/sigma_max below which a certificate counts as
/// near singular and the sketch should be redrawn.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 1e-8;

/// Safety factor on the roundoff-level singular floor.
pub const FLOOR_SAFETY: f64 = 10.0;

/// Angle within this of pi/2 counts as orthogonal in the geometric check.
pub const GEOMETRIC_ANGLE_TOL: f64 = 1e-6;

/// Certificate outcome for one sketch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Nonsingular,
    NearSingular,
    Singular,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Nonsingular => "nonsingular",
            Verdict::NearSingular => "near_singular",
            Verdict::Singular => "singular",
        };
        f.write_str(s)
    }
}

/// The certificate matrix, its extreme singular values and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    matrix: DMatrix<f64>,
    sigma_min: f64,
    sigma_max: f64,
    verdict: Verdict,
    singular_floor: f64,
    ratio_threshold: f64,
}

impl CertificateReport {
    /// The (c-1) x (c-1) certificate matrix (certificate basis transposed
    /// times the sketch).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    /// Absolute floor below which sigma_min counts as exactly singular.
    pub fn singular_floor(&self) -> f64 {
        self.singular_floor
    }

    /// Ratio threshold used for the near-singular band.
    pub fn ratio_threshold(&self) -> f64 {
        self.ratio_threshold
    }
}

/// Evaluates the rank certificate for a d x (c-1) sketch.
///
/// Verdicts: `Singular` when sigma_min falls below the roundoff floor
/// `(c-1) * eps * FLOOR_SAFETY * |basis| |sketch|` (the floor is scaled by
/// the pre-multiplication norms, not by sigma_max of the certificate matrix
/// itself, which is pure roundoff in exactly the cases the certificate must
/// catch); `NearSingular` when sigma_min/sigma_max is below the ratio
/// threshold; `Nonsingular` otherwise.
pub fn certificate(
    basis: &ProjectorBasis,
    sketch: &DMatrix<f64>,
    ratio_threshold: Option<f64>,
) -> Result<CertificateReport> {
    let k = basis.discriminant_dim();
    check_sketch_shape(basis, sketch)?;
    let ratio_threshold = ratio_threshold.unwrap_or(DEFAULT_RATIO_THRESHOLD);

    let matrix = basis.certificate_basis().transpose() * sketch;
    let singular_values = matrix.clone().svd(false, false).singular_values;
    let sigma_max = singular_values.max();
    let sigma_min = singular_values.min();

    let basis_norm = spectral_norm(basis.certificate_basis());
    let sketch_norm = spectral_norm(sketch);
    let singular_floor = k as f64 * f64::EPSILON * FLOOR_SAFETY * basis_norm * sketch_norm;

    let verdict = if sigma_min <= singular_floor {
        Verdict::Singular
    } else if sigma_min / sigma_max < ratio_threshold {
        Verdict::NearSingular
    } else {
        Verdict::Nonsingular
    };

    Ok(CertificateReport {
        matrix,
        sigma_min,
        sigma_max,
        verdict,
        singular_floor,
        ratio_threshold,
    })
}

/// Result of the geometric test between span(sketch) and the span of the
/// certificate basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricCheck {
    pub largest_angle: f64,
    pub verdict: Verdict,
}

/// Largest principal angle between span(sketch) and the certificate span.
///
/// The verdict is `Singular` exactly when the angle reaches pi/2 within
/// [`GEOMETRIC_ANGLE_TOL`]; it must agree with [`certificate`] on
/// singular-versus-not. Requires a full-column-rank sketch.
pub fn geometric_check(basis: &ProjectorBasis, sketch: &DMatrix<f64>) -> Result<GeometricCheck> {
    check_sketch_shape(basis, sketch)?;
    let svd = sketch.clone().svd(false, false);
    let max = svd.singular_values.max();
    let cutoff = sketch.nrows().max(sketch.ncols()) as f64 * f64::EPSILON * max;
    if max <= 0.0 || svd.singular_values.iter().any(|&s| s <= cutoff) {
        return Err(Error::RankDeficientSketch);
    }

    let largest_angle = largest_principal_angle(sketch, basis.certificate_basis())?;
    let verdict = if largest_angle >= FRAC_PI_2 - GEOMETRIC_ANGLE_TOL {
        Verdict::Singular
    } else {
        Verdict::Nonsingular
    };
    Ok(GeometricCheck {
        largest_angle,
        verdict,
    })
}

fn check_sketch_shape(basis: &ProjectorBasis, sketch: &DMatrix<f64>) -> Result<()> {
    if sketch.nrows() != basis.dim() || sketch.ncols() != basis.discriminant_dim() {
        return Err(Error::DimensionMismatch(format!(
            "sketch is {} x {}, expected {} x {}",
            sketch.nrows(),
            sketch.ncols(),
            basis.dim(),
            basis.discriminant_dim()
        )));
    }
    Ok(())
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use crate::eigen::TotalScatterEigen;
    use crate::scatter::ScatterFactors;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn pipeline(d: usize, n: usize, c: usize, seed: u64) -> ProjectorBasis {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DMatrix::from_fn(d, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let labels = (0..n).map(|i| format!("c{}", i % c)).collect();
        let ds = LabeledDataset::new(data, labels).unwrap();
        let f = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&f, None).unwrap();
        ProjectorBasis::build(&eigen, &f).unwrap()
    }

    #[test]
    fn basis_certifies_itself() {
        let basis = pipeline(12, 6, 3, 1);
        let report = certificate(&basis, &basis.certificate_basis().clone(), None).unwrap();
        assert_eq!(report.verdict(), Verdict::Nonsingular);
        // Z = M^T M is the Gram matrix of a full-column-rank matrix.
        assert!(report.sigma_min() > 0.0);

        let geo = geometric_check(&basis, &basis.certificate_basis().clone()).unwrap();
        assert_eq!(geo.verdict, Verdict::Nonsingular);
        assert!(geo.largest_angle <= 1e-10);
    }

    #[test]
    fn random_sketch_is_nonsingular() {
        let basis = pipeline(20, 8, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = DMatrix::from_fn(20, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let report = certificate(&basis, &y, None).unwrap();
        assert_eq!(report.verdict(), Verdict::Nonsingular);
        let geo = geometric_check(&basis, &y).unwrap();
        assert_eq!(geo.verdict, Verdict::Nonsingular);
    }

    #[test]
    fn sketch_with_orthogonal_column_is_singular() {
        // One column orthogonal to the certificate span, the other inside it.
        let basis = pipeline(16, 8, 3, 4);
        let m = basis.certificate_basis().clone();
        let qm = crate::subspace::orthonormal_columns(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = DMatrix::from_fn(16, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut ortho = &z - &qm * (qm.transpose() * &z);
        ortho = &ortho - &qm * (qm.transpose() * &ortho);
        let mut y = DMatrix::zeros(16, 2);
        y.column_mut(0).copy_from(&m.column(0));
        y.column_mut(1).copy_from(&ortho.column(0));

        let report = certificate(&basis, &y, None).unwrap();
        assert_eq!(report.verdict(), Verdict::Singular);
        let geo = geometric_check(&basis, &y).unwrap();
        assert_eq!(geo.verdict, Verdict::Singular);
        assert!((geo.largest_angle - FRAC_PI_2).abs() <= 1e-6);
    }

    #[test]
    fn zero_sketch_is_rejected_by_geometric_check() {
        let basis = pipeline(10, 4, 2, 6);
        let y = DMatrix::zeros(10, 1);
        assert!(matches!(
            geometric_check(&basis, &y),
            Err(Error::RankDeficientSketch)
        ));
        // but the certificate itself reports singular
        let report = certificate(&basis, &y, None).unwrap();
        assert_eq!(report.verdict(), Verdict::Singular);
    }

    #[test]
    fn wrong_shape_rejected() {
        let basis = pipeline(10, 4, 2, 7);
        let y = DMatrix::zeros(10, 3);
        assert!(matches!(
            certificate(&basis, &y, None),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
