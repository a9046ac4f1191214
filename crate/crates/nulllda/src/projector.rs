//! Bases attached to the discriminant operator G = S_T^+ S_B.
//!
//! Everything happens in the r-dimensional range of S_T. With Q the
//! whitened between factor and Q Q^T = R Lambda R^T its eigendecomposition,
//! Lambda must be c-1 ones followed by zeros; the first c-1 columns of
//! U1 Sigma1^-1 R span the unit eigenspace of G (where the null-LDA solution
//! lives), and U1 Qhat Rhat1 from the QR route spans range(S_B), the subspace
//! every accepted sketch must fully intersect.

use nalgebra::DMatrix;

use crate::eigen::TotalScatterEigen;
use crate::error::{Error, Result};
use crate::scatter::{ScatterFactors, ScatterKind};

/// Absolute tolerance for the 0/1 eigenvalue structure check.
pub const LAMBDA_STRUCTURE_TOL: f64 = 1e-8;

/// Derived bases used by the fast fit, the rank certificate and the
/// geometric check.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorBasis {
    solution_basis: DMatrix<f64>,
    certificate_basis: DMatrix<f64>,
    projector_eigenvalues: Vec<f64>,
    discriminant_dim: usize,
}

impl ProjectorBasis {
    /// Builds the solution and certificate bases from the range
    /// decomposition of S_T.
    ///
    /// Verifies that the whitened between operator has exactly c-1 unit
    /// eigenvalues and r-c+1 zero eigenvalues (within
    /// [`LAMBDA_STRUCTURE_TOL`]); any other spectrum means the rank
    /// assumptions on the data are broken and yields
    /// [`Error::ScatterStructure`].
    pub fn build(eigen: &TotalScatterEigen, factors: &ScatterFactors) -> Result<Self> {
        let r = eigen.rank();
        let k = factors.num_classes() - 1;
        if k > r {
            return Err(Error::RankAssumption(format!(
                "c-1 = {k} exceeds rank {r} of the total scatter"
            )));
        }
        if eigen.dim() != factors.dim() {
            return Err(Error::DimensionMismatch(
                "eigen decomposition and factors disagree on dimension".into(),
            ));
        }

        let u1 = eigen.range_basis();
        let sigma = eigen.singular_values();

        // Whitened between factor Q = Sigma1^-1 U1^T B, r x c.
        let mut whitened = u1.transpose() * factors.factor(ScatterKind::Between);
        scale_rows_inv(&mut whitened, sigma);

        let projector = &whitened * whitened.transpose();
        let decomp = nalgebra::SymmetricEigen::new(projector);
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| {
            decomp.eigenvalues[b]
                .partial_cmp(&decomp.eigenvalues[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let projector_eigenvalues: Vec<f64> =
            order.iter().map(|&i| decomp.eigenvalues[i]).collect();

        check_unit_zero_structure(&projector_eigenvalues, k)?;

        let mut rotation = DMatrix::zeros(r, r);
        for (col, &i) in order.iter().enumerate() {
            rotation
                .column_mut(col)
                .copy_from(&decomp.eigenvectors.column(i));
        }

        // T = Sigma1^-1 R maps range coordinates to the eigenbasis of G.
        let mut t = rotation;
        scale_rows_inv(&mut t, sigma);

        let solution_basis = u1 * t.columns(0, k);

        // QR route: T = Qhat Rhat with positive diagonal, then the first
        // c-1 columns of Rhat^-T via a triangular solve rather than an
        // explicit inverse.
        let qr = t.qr();
        let mut qhat = qr.q();
        let mut rhat = qr.unpack_r();
        for i in 0..r {
            if rhat[(i, i)] < 0.0 {
                let mut row = rhat.row_mut(i);
                row.neg_mut();
                let mut col = qhat.column_mut(i);
                col.neg_mut();
            }
        }
        let mut top_identity = DMatrix::zeros(r, k);
        for i in 0..k {
            top_identity[(i, i)] = 1.0;
        }
        let rhat1 = rhat
            .transpose()
            .solve_lower_triangular(&top_identity)
            .ok_or_else(|| {
                Error::ScatterStructure("triangular factor of the basis change is singular".into())
            })?;
        // No per-column sign fix here: the solution and certificate bases
        // must keep the pairing W = (solution basis)(certificate basis)^T Y,
        // which independent column flips would break. Both inherit
        // determinism from the sign-fixed range basis.
        let certificate_basis = u1 * (qhat * rhat1);

        Ok(Self {
            solution_basis,
            certificate_basis,
            projector_eigenvalues,
            discriminant_dim: k,
        })
    }

    /// d x (c-1) basis of the unit eigenspace of G; the orientation matrix
    /// is always a column mix of this.
    pub fn solution_basis(&self) -> &DMatrix<f64> {
        &self.solution_basis
    }

    /// d x (c-1) test basis spanning range(S_B); the certificate matrix is
    /// its cross product with the sketch.
    pub fn certificate_basis(&self) -> &DMatrix<f64> {
        &self.certificate_basis
    }

    /// Eigenvalues of the whitened between operator, nonincreasing
    /// (c-1 ones, then zeros).
    pub fn projector_eigenvalues(&self) -> &[f64] {
        &self.projector_eigenvalues
    }

    /// c - 1, the number of discriminant directions.
    pub fn discriminant_dim(&self) -> usize {
        self.discriminant_dim
    }

    pub fn dim(&self) -> usize {
        self.solution_basis.nrows()
    }
}

fn scale_rows_inv(m: &mut DMatrix<f64>, sigma: &[f64]) {
    for (i, &s) in sigma.iter().enumerate() {
        let mut row = m.row_mut(i);
        row /= s;
    }
}

fn check_unit_zero_structure(eigenvalues: &[f64], expected_units: usize) -> Result<()> {
    let units = eigenvalues
        .iter()
        .filter(|&&x| (x - 1.0).abs() <= LAMBDA_STRUCTURE_TOL)
        .count();
    let zeros = eigenvalues
        .iter()
        .filter(|&&x| x.abs() <= LAMBDA_STRUCTURE_TOL)
        .count();
    if units != expected_units || units + zeros != eigenvalues.len() {
        return Err(Error::ScatterStructure(format!(
            "expected {expected_units} unit and {} zero eigenvalues, spectrum is {:?}",
            eigenvalues.len() - expected_units,
            eigenvalues
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use crate::subspace::largest_principal_angle;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_dataset(d: usize, n: usize, c: usize, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DMatrix::from_fn(d, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let labels = (0..n).map(|i| format!("c{}", i % c)).collect();
        LabeledDataset::new(data, labels).unwrap()
    }

    fn pipeline(d: usize, n: usize, c: usize, seed: u64) -> (ScatterFactors, TotalScatterEigen, ProjectorBasis) {
        let ds = random_dataset(d, n, c, seed);
        let f = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&f, None).unwrap();
        let basis = ProjectorBasis::build(&eigen, &f).unwrap();
        (f, eigen, basis)
    }

    // G V = S_T^+ (S_B V) through the factors.
    fn apply_g(f: &ScatterFactors, eigen: &TotalScatterEigen, v: &DMatrix<f64>) -> DMatrix<f64> {
        let sb_v = f.apply(ScatterKind::Between, v).unwrap();
        eigen.apply_pseudo_inverse(&sb_v).unwrap()
    }

    #[test]
    fn eigenvalues_are_units_then_zeros() {
        for (d, n, c, seed) in [(12, 6, 3, 1), (30, 10, 4, 2), (9, 4, 2, 3)] {
            let (_, eigen, basis) = pipeline(d, n, c, seed);
            let lambda = basis.projector_eigenvalues();
            assert_eq!(lambda.len(), eigen.rank());
            for (i, &x) in lambda.iter().enumerate() {
                if i < c - 1 {
                    assert!((x - 1.0).abs() <= 1e-8, "lambda[{i}] = {x}");
                } else {
                    assert!(x.abs() <= 1e-8, "lambda[{i}] = {x}");
                }
            }
        }
    }

    #[test]
    fn solution_basis_is_fixed_by_g() {
        let (f, eigen, basis) = pipeline(14, 6, 2, 4);
        assert_eq!(basis.discriminant_dim(), 1);
        let u = basis.solution_basis();
        let gu = apply_g(&f, &eigen, u);
        assert!((gu - u).norm() <= 1e-8 * u.norm());
    }

    #[test]
    fn certificate_basis_spans_between_range() {
        // span(M) equals range(S_B); compare against the between factor's
        // own orthonormal range at test scale.
        let (f, _, basis) = pipeline(12, 6, 3, 5);
        let b = f.factor(ScatterKind::Between);
        let span_b = b.columns(0, 2).into_owned();
        let angle = largest_principal_angle(basis.certificate_basis(), &span_b).unwrap();
        assert!(angle <= 1e-8, "angle = {angle}");
    }

    #[test]
    fn unit_eigenspace_matches_explicit_oracle() {
        // Explicit G assembled from dense pseudo-inverse at test scale; its
        // unit eigenspace must match the solution basis.
        let (f, eigen, basis) = pipeline(12, 6, 3, 6);
        let gu = apply_g(&f, &eigen, basis.solution_basis());
        assert!((gu - basis.solution_basis()).norm() <= 1e-8 * basis.solution_basis().norm());

        let h = f.factor(ScatterKind::Total);
        let st = h * h.transpose();
        let hb = f.factor(ScatterKind::Between);
        let sb = hb * hb.transpose();
        let sigma_max = eigen.singular_values()[0];
        let pinv = st.svd(true, true).pseudo_inverse(12.0 * f64::EPSILON * sigma_max * sigma_max).unwrap();
        let g = pinv * sb;
        let gu_explicit = &g * basis.solution_basis();
        assert!((gu_explicit - basis.solution_basis()).norm() <= 1e-8 * basis.solution_basis().norm());
    }

    #[test]
    fn basis_pairing_survives_sign_choices() {
        // Regression: per-column sign fixes applied independently to the two
        // bases break W = (solution basis)(certificate basis)^T Y.
        let ds = random_dataset(13, 7, 3, 8438772027787229761);
        let f = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&f, None).unwrap();
        let basis = ProjectorBasis::build(&eigen, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8438772027787229761 ^ 0x5a5a);
        let y = crate::sketch::gaussian_sketch(13, 2, &mut rng);
        let w = crate::fit::fast_null_lda(&f, &eigen, &y).unwrap();
        let rebuilt = basis.solution_basis() * (basis.certificate_basis().transpose() * &y);
        assert!((&w - rebuilt).norm() <= 1e-8 * w.norm());
    }

    #[test]
    fn mixed_class_duplicate_breaks_structure() {
        // A sample duplicated into another class makes the within and
        // between ranks overlap inside a shrunken range(S_T).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut data = DMatrix::from_fn(10, 6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dup = data.column(0).into_owned();
        data.column_mut(3).copy_from(&dup);
        let labels = ["a", "a", "a", "b", "b", "b"].map(String::from).to_vec();
        let ds = LabeledDataset::new(data, labels).unwrap();
        let f = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&f, None).unwrap();
        assert!(matches!(
            ProjectorBasis::build(&eigen, &f),
            Err(Error::ScatterStructure(_))
        ));
    }
}
