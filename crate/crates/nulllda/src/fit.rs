//! The fast orientation matrix and the retrying fit around it.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::certificate::{certificate, CertificateReport, Verdict};
use crate::dataset::LabeledDataset;
use crate::eigen::TotalScatterEigen;
use crate::error::{Error, Result};
use crate::projector::ProjectorBasis;
use crate::scatter::{ScatterFactors, ScatterKind};
use crate::sketch::gaussian_sketch;

/// Default number of redraws before a fit gives up. Failure of a continuous
/// sketch is a measure-zero event, so exhausting these signals pathological
/// data rather than bad luck.
pub const DEFAULT_MAX_RETRIES: usize = 5;

/// Applies G = S_T^+ S_B to a d x k block, right to left through the
/// factors; cost O(d n k), no d x d intermediate.
pub fn apply_discriminant(
    factors: &ScatterFactors,
    eigen: &TotalScatterEigen,
    v: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let between = factors.apply(ScatterKind::Between, v)?;
    eigen.apply_pseudo_inverse(&between)
}

/// The fast orientation matrix `W = S_T^+ S_B Y` for a d x (c-1) sketch.
/// Columns are not normalized here; that happens in the fit.
pub fn fast_null_lda(
    factors: &ScatterFactors,
    eigen: &TotalScatterEigen,
    sketch: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let k = factors.num_classes() - 1;
    if sketch.nrows() != factors.dim() || sketch.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "sketch is {} x {}, expected {} x {k}",
            sketch.nrows(),
            sketch.ncols(),
            factors.dim()
        )));
    }
    apply_discriminant(factors, eigen, sketch)
}

/// A fitted null-LDA model: the orientation matrix with unit columns, the
/// label map, the class centroids in the reduced space and fit metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct NullLdaModel {
    orientation: DMatrix<f64>,
    class_names: Vec<String>,
    reduced_centroids: DMatrix<f64>,
    seed: u64,
    retries: usize,
    certificate: CertificateReport,
}

impl NullLdaModel {
    /// d x (c-1) orientation matrix, columns unit length.
    pub fn orientation(&self) -> &DMatrix<f64> {
        &self.orientation
    }

    /// Class identifiers in index order.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// (c-1) x c class centroids in the reduced space.
    pub fn reduced_centroids(&self) -> &DMatrix<f64> {
        &self.reduced_centroids
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of redraws the fit needed.
    pub fn retries(&self) -> usize {
        self.retries
    }

    pub fn certificate(&self) -> &CertificateReport {
        &self.certificate
    }

    pub fn dim(&self) -> usize {
        self.orientation.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Projects a d x m block of samples into the reduced space: `W^T X`.
    pub fn transform(&self, samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if samples.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "samples have {} rows, model dimension is {}",
                samples.nrows(),
                self.dim()
            )));
        }
        Ok(self.orientation.transpose() * samples)
    }

    /// Nearest-centroid class index for every column of a d x m block;
    /// ties go to the lowest class index.
    pub fn classify(&self, samples: &DMatrix<f64>) -> Result<Vec<usize>> {
        let projected = self.transform(samples)?;
        Ok((0..projected.ncols())
            .map(|i| nearest_centroid(&projected.column(i).into_owned(), &self.reduced_centroids))
            .collect())
    }

    /// Like [`classify`](Self::classify) but resolving indices to labels.
    pub fn classify_labels(&self, samples: &DMatrix<f64>) -> Result<Vec<String>> {
        Ok(self
            .classify(samples)?
            .into_iter()
            .map(|j| self.class_names[j].clone())
            .collect())
    }
}

/// Index of the centroid column nearest to `point` in Euclidean distance;
/// a strict comparison keeps the lowest index on ties.
pub fn nearest_centroid(point: &nalgebra::DVector<f64>, centroids: &DMatrix<f64>) -> usize {
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for j in 0..centroids.ncols() {
        let dist = (point - centroids.column(j)).norm_squared();
        if dist < best_dist {
            best = j;
            best_dist = dist;
        }
    }
    best
}

/// Outcome of fitting with a caller-supplied sketch.
#[derive(Debug, Clone, PartialEq)]
pub enum SketchFit {
    Accepted(Box<NullLdaModel>),
    /// The certificate refused the sketch; the report explains why.
    Rejected(CertificateReport),
}

/// Fits with a fixed sketch instead of drawing one. The sketch is accepted
/// only on a nonsingular certificate.
pub fn fit_with_sketch(
    dataset: &LabeledDataset,
    sketch: &DMatrix<f64>,
    ratio_threshold: Option<f64>,
) -> Result<SketchFit> {
    let factors = ScatterFactors::from_dataset(dataset);
    let eigen = TotalScatterEigen::compute(&factors, None)?;
    let basis = ProjectorBasis::build(&eigen, &factors)?;
    let report = certificate(&basis, sketch, ratio_threshold)?;
    if report.verdict() != Verdict::Nonsingular {
        return Ok(SketchFit::Rejected(report));
    }
    let model = assemble_model(dataset, &factors, &eigen, sketch, report, 0, 0)?;
    Ok(SketchFit::Accepted(Box::new(model)))
}

/// Draws seeded standard-normal sketches until the certificate accepts one,
/// then builds the model. Deterministic for a fixed seed: the same seed
/// always yields the same sketch sequence and the same model bits.
///
/// Errors with [`Error::RetriesExhausted`] after `max_retries` redraws.
pub fn fit_with_retry(
    dataset: &LabeledDataset,
    seed: u64,
    max_retries: usize,
    ratio_threshold: Option<f64>,
) -> Result<NullLdaModel> {
    let factors = ScatterFactors::from_dataset(dataset);
    let eigen = TotalScatterEigen::compute(&factors, None)?;
    let basis = ProjectorBasis::build(&eigen, &factors)?;
    let k = dataset.num_classes() - 1;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=max_retries {
        let sketch = gaussian_sketch(dataset.dim(), k, &mut rng);
        let report = certificate(&basis, &sketch, ratio_threshold)?;
        if report.verdict() == Verdict::Nonsingular {
            return assemble_model(dataset, &factors, &eigen, &sketch, report, seed, attempt);
        }
    }
    Err(Error::RetriesExhausted(max_retries))
}

fn assemble_model(
    dataset: &LabeledDataset,
    factors: &ScatterFactors,
    eigen: &TotalScatterEigen,
    sketch: &DMatrix<f64>,
    report: CertificateReport,
    seed: u64,
    retries: usize,
) -> Result<NullLdaModel> {
    let mut orientation = fast_null_lda(factors, eigen, sketch)?;
    for mut col in orientation.column_iter_mut() {
        let norm = col.norm();
        if !norm.is_normal() {
            return Err(Error::ScatterStructure(
                "certified sketch produced a vanishing orientation column".into(),
            ));
        }
        col /= norm;
    }
    let reduced_centroids = orientation.transpose() * factors.class_centroids();
    Ok(NullLdaModel {
        orientation,
        class_names: dataset.class_names().to_vec(),
        reduced_centroids,
        seed,
        retries,
        certificate: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::counterexample;
    use rand::RngExt;
    use rand_distr::StandardNormal;

    fn random_dataset(d: usize, n: usize, c: usize, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DMatrix::from_fn(d, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let labels = (0..n).map(|i| format!("c{}", i % c)).collect();
        LabeledDataset::new(data, labels).unwrap()
    }

    #[test]
    fn counterexample_sketch_maps_to_zero() {
        for d in [4, 9, 33] {
            let (ds, sketch) = counterexample(d, 0.7).unwrap();
            let factors = ScatterFactors::from_dataset(&ds);
            let eigen = TotalScatterEigen::compute(&factors, None).unwrap();
            let w = fast_null_lda(&factors, &eigen, &sketch).unwrap();
            assert!(w.iter().all(|&x| x == 0.0), "d = {d}");
        }
    }

    #[test]
    fn sketch_in_range_complement_maps_to_zero() {
        // Columns orthogonal to range(S_T) are annihilated by G.
        let ds = random_dataset(12, 5, 2, 40);
        let factors = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&factors, None).unwrap();
        let u1 = eigen.range_basis();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let z = DMatrix::from_fn(12, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &z - u1 * (u1.transpose() * &z);
        let w = fast_null_lda(&factors, &eigen, &y).unwrap();
        let scale = z.norm();
        assert!(w.norm() <= 1e-12 * scale);
    }

    #[test]
    fn matches_explicit_pseudo_inverse_oracle() {
        let ds = random_dataset(12, 6, 3, 42);
        let factors = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&factors, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let y = DMatrix::from_fn(12, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let fast = fast_null_lda(&factors, &eigen, &y).unwrap();

        let ht = factors.factor(ScatterKind::Total);
        let st = ht * ht.transpose();
        let hb = factors.factor(ScatterKind::Between);
        let sb = hb * hb.transpose();
        let sigma_max = eigen.singular_values()[0];
        let pinv = st
            .svd(true, true)
            .pseudo_inverse(12.0 * f64::EPSILON * sigma_max * sigma_max)
            .unwrap();
        let explicit = pinv * sb * &y;
        assert!((&fast - &explicit).norm() <= 1e-10 * explicit.norm());
    }

    #[test]
    fn fit_succeeds_first_draw_and_is_deterministic() {
        let ds = random_dataset(24, 9, 3, 44);
        let a = fit_with_retry(&ds, 0, DEFAULT_MAX_RETRIES, None).unwrap();
        assert_eq!(a.retries(), 0);
        assert_eq!(a.certificate().verdict(), Verdict::Nonsingular);
        let b = fit_with_retry(&ds, 0, DEFAULT_MAX_RETRIES, None).unwrap();
        // bit-identical, not merely close
        assert_eq!(a.orientation(), b.orientation());
        assert_eq!(a.reduced_centroids(), b.reduced_centroids());
        for col in a.orientation().column_iter() {
            assert!((col.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn near_singular_certificate_triggers_a_redraw() {
        // Pick the threshold between the ratios of the first two seeded
        // draws, so the first is rejected as near singular and the second
        // accepted.
        let ds = random_dataset(15, 9, 3, 0);
        let factors = ScatterFactors::from_dataset(&ds);
        let eigen = TotalScatterEigen::compute(&factors, None).unwrap();
        let basis = crate::projector::ProjectorBasis::build(&eigen, &factors).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let first = gaussian_sketch(15, 2, &mut rng);
        let second = gaussian_sketch(15, 2, &mut rng);
        let ratio = |y: &DMatrix<f64>| {
            let report = certificate(&basis, y, None).unwrap();
            report.sigma_min() / report.sigma_max()
        };
        let (r1, r2) = (ratio(&first), ratio(&second));
        assert!(r1 < r2, "seeds no longer order the ratios: {r1} vs {r2}");
        let threshold = (r1 + r2) / 2.0;

        let model = fit_with_retry(&ds, 0, DEFAULT_MAX_RETRIES, Some(threshold)).unwrap();
        assert_eq!(model.retries(), 1);
        // The accepted sketch is the second draw.
        let report = certificate(&basis, &second, Some(threshold)).unwrap();
        assert_eq!(model.certificate().matrix(), report.matrix());

        // An unreachable ratio exhausts the budget.
        let err = fit_with_retry(&ds, 0, 2, Some(1.0)).unwrap_err();
        assert!(matches!(err, Error::RetriesExhausted(2)));
    }

    #[test]
    fn fit_with_counterexample_sketch_is_rejected() {
        let (ds, sketch) = counterexample(10, 0.5).unwrap();
        match fit_with_sketch(&ds, &sketch, None).unwrap() {
            SketchFit::Rejected(report) => assert_eq!(report.verdict(), Verdict::Singular),
            SketchFit::Accepted(_) => panic!("counterexample sketch must be rejected"),
        }
    }

    #[test]
    fn fit_with_generic_sketch_on_counterexample_data_is_accepted() {
        let (ds, _) = counterexample(10, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let y = gaussian_sketch(10, 1, &mut rng);
        match fit_with_sketch(&ds, &y, None).unwrap() {
            SketchFit::Accepted(model) => {
                assert_eq!(model.certificate().verdict(), Verdict::Nonsingular)
            }
            SketchFit::Rejected(_) => panic!("generic sketch should be accepted"),
        }
    }

    #[test]
    fn training_samples_classify_onto_their_centroids() {
        let ds = random_dataset(30, 12, 4, 46);
        let model = fit_with_retry(&ds, 3, DEFAULT_MAX_RETRIES, None).unwrap();
        let predicted = model.classify(ds.data()).unwrap();
        assert_eq!(predicted, ds.class_of());
    }

    #[test]
    fn classify_ties_break_to_lowest_index() {
        // Exact tie: the origin is equidistant from mirrored centroids.
        let centroids = DMatrix::from_column_slice(1, 2, &[1.5, -1.5]);
        let origin = nalgebra::DVector::from_element(1, 0.0);
        assert_eq!(nearest_centroid(&origin, &centroids), 0);
        // And order of the tied pair does not matter.
        let swapped = DMatrix::from_column_slice(1, 2, &[-1.5, 1.5]);
        assert_eq!(nearest_centroid(&origin, &swapped), 0);
    }

    #[test]
    fn classify_is_order_independent() {
        let ds = random_dataset(16, 6, 2, 47);
        let model = fit_with_retry(&ds, 1, DEFAULT_MAX_RETRIES, None).unwrap();
        let forward = model.classify(ds.data()).unwrap();
        let mut reversed_data = DMatrix::zeros(16, 6);
        for i in 0..6 {
            reversed_data.column_mut(i).copy_from(&ds.data().column(5 - i));
        }
        let reversed = model.classify(&reversed_data).unwrap();
        let back: Vec<usize> = reversed.into_iter().rev().collect();
        assert_eq!(forward, back);
    }

    #[test]
    fn transform_rejects_wrong_dimension() {
        let ds = random_dataset(10, 6, 3, 48);
        let model = fit_with_retry(&ds, 0, DEFAULT_MAX_RETRIES, None).unwrap();
        let bad = DMatrix::zeros(9, 2);
        assert!(matches!(
            model.transform(&bad),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
