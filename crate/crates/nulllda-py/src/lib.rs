//! Python extension module exposing the null-LDA pipeline.
//!
//! Feature matrices cross the boundary as numpy arrays with samples as rows
//! (the scikit-learn convention); internally samples are columns.

use nalgebra::DMatrix;
use numpy::ndarray::Array2;
use numpy::{IntoPyArray, PyArray2, PyReadonlyArray2};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nulllda::{
    CertificateReport, LabeledDataset, NullLdaModel, ProjectorBasis, ScatterFactors, SketchFit,
    TotalScatterEigen, DEFAULT_MAX_RETRIES,
};

fn to_py_err(e: nulllda::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Rows-as-samples numpy array to a columns-as-samples matrix.
fn samples_to_matrix(arr: &PyReadonlyArray2<f64>) -> DMatrix<f64> {
    let view = arr.as_array();
    DMatrix::from_fn(view.ncols(), view.nrows(), |i, j| view[(j, i)])
}

/// Plain matrix (no orientation change) from numpy.
fn matrix_from_py(arr: &PyReadonlyArray2<f64>) -> DMatrix<f64> {
    let view = arr.as_array();
    DMatrix::from_fn(view.nrows(), view.ncols(), |i, j| view[(i, j)])
}

fn matrix_to_py<'py>(py: Python<'py>, m: &DMatrix<f64>) -> Bound<'py, PyArray2<f64>> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)]).into_pyarray(py)
}

fn certificate_dict<'py>(
    py: Python<'py>,
    report: &CertificateReport,
) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("verdict", report.verdict().to_string())?;
    dict.set_item("sigma_min", report.sigma_min())?;
    dict.set_item("sigma_max", report.sigma_max())?;
    dict.set_item("singular_floor", report.singular_floor())?;
    dict.set_item("ratio_threshold", report.ratio_threshold())?;
    Ok(dict)
}

/// Labeled training data: features with samples as rows, one label per row.
#[pyclass(frozen)]
struct Dataset {
    inner: LabeledDataset,
}

#[pymethods]
impl Dataset {
    #[new]
    fn new(features: PyReadonlyArray2<f64>, labels: Vec<String>) -> PyResult<Self> {
        let data = samples_to_matrix(&features);
        let inner = LabeledDataset::new(data, labels).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn num_samples(&self) -> usize {
        self.inner.num_samples()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    /// Numerical vs expected scatter ranks, as a dict.
    fn rank_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = nulllda::rank_report(&ScatterFactors::from_dataset(&self.inner), None);
        let dict = PyDict::new(py);
        for (name, entry) in [
            ("within", report.within),
            ("between", report.between),
            ("total", report.total),
        ] {
            let sub = PyDict::new(py);
            sub.set_item("rank", entry.rank)?;
            sub.set_item("expected", entry.expected)?;
            sub.set_item("agrees", entry.agrees)?;
            dict.set_item(name, sub)?;
        }
        dict.set_item("all_agree", report.all_agree())?;
        Ok(dict)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(dim={}, num_samples={}, num_classes={})",
            self.inner.dim(),
            self.inner.num_samples(),
            self.inner.num_classes()
        )
    }
}

/// A fitted model: unit-column orientation matrix plus reduced centroids.
#[pyclass(frozen)]
struct Model {
    inner: NullLdaModel,
}

#[pymethods]
impl Model {
    /// Projects samples (rows) into the reduced space; returns (m, c-1).
    fn transform<'py>(
        &self,
        py: Python<'py>,
        features: PyReadonlyArray2<f64>,
    ) -> PyResult<Bound<'py, PyArray2<f64>>> {
        let samples = samples_to_matrix(&features);
        let projected = self.inner.transform(&samples).map_err(to_py_err)?;
        Ok(matrix_to_py(py, &projected.transpose()))
    }

    /// Nearest-reduced-centroid labels for samples (rows).
    fn classify(&self, features: PyReadonlyArray2<f64>) -> PyResult<Vec<String>> {
        let samples = samples_to_matrix(&features);
        self.inner.classify_labels(&samples).map_err(to_py_err)
    }

    /// d x (c-1) orientation matrix.
    #[getter]
    fn orientation<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray2<f64>> {
        matrix_to_py(py, self.inner.orientation())
    }

    /// (c-1) x c class centroids in the reduced space.
    #[getter]
    fn reduced_centroids<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray2<f64>> {
        matrix_to_py(py, self.inner.reduced_centroids())
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    #[getter]
    fn retries(&self) -> usize {
        self.inner.retries()
    }

    /// Certificate of the accepted sketch, as a dict.
    #[getter]
    fn certificate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        certificate_dict(py, self.inner.certificate())
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(dim={}, num_classes={}, seed={}, retries={})",
            self.inner.dim(),
            self.inner.num_classes(),
            self.inner.seed(),
            self.inner.retries()
        )
    }
}

/// Fits a model by redrawing seeded Gaussian sketches until the rank
/// certificate accepts one.
#[pyfunction]
#[pyo3(signature = (dataset, seed = 0, max_retries = DEFAULT_MAX_RETRIES, threshold = None))]
fn fit(dataset: &Dataset, seed: u64, max_retries: usize, threshold: Option<f64>) -> PyResult<Model> {
    let inner =
        nulllda::fit_with_retry(&dataset.inner, seed, max_retries, threshold).map_err(to_py_err)?;
    Ok(Model { inner })
}

/// Fits with a fixed d x (c-1) sketch. Returns (model_or_None, certificate).
#[pyfunction]
#[pyo3(signature = (dataset, sketch, threshold = None))]
fn fit_with_sketch<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    sketch: PyReadonlyArray2<f64>,
    threshold: Option<f64>,
) -> PyResult<(Option<Model>, Bound<'py, PyDict>)> {
    let sketch = matrix_from_py(&sketch);
    match nulllda::fit_with_sketch(&dataset.inner, &sketch, threshold).map_err(to_py_err)? {
        SketchFit::Accepted(model) => {
            let dict = certificate_dict(py, model.certificate())?;
            Ok((Some(Model { inner: *model }), dict))
        }
        SketchFit::Rejected(report) => Ok((None, certificate_dict(py, &report)?)),
    }
}

/// Evaluates the rank certificate of a sketch without fitting.
#[pyfunction]
#[pyo3(signature = (dataset, sketch, threshold = None))]
fn certificate<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    sketch: PyReadonlyArray2<f64>,
    threshold: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let factors = ScatterFactors::from_dataset(&dataset.inner);
    let eigen = TotalScatterEigen::compute(&factors, None).map_err(to_py_err)?;
    let basis = ProjectorBasis::build(&eigen, &factors).map_err(to_py_err)?;
    let sketch = matrix_from_py(&sketch);
    let report = nulllda::certificate(&basis, &sketch, threshold).map_err(to_py_err)?;
    certificate_dict(py, &report)
}

/// Largest principal angle between span(sketch) and the certificate span,
/// with the singular/nonsingular verdict. Returns (angle, verdict).
#[pyfunction]
fn geometric_check(dataset: &Dataset, sketch: PyReadonlyArray2<f64>) -> PyResult<(f64, String)> {
    let factors = ScatterFactors::from_dataset(&dataset.inner);
    let eigen = TotalScatterEigen::compute(&factors, None).map_err(to_py_err)?;
    let basis = ProjectorBasis::build(&eigen, &factors).map_err(to_py_err)?;
    let sketch = matrix_from_py(&sketch);
    let check = nulllda::geometric_check(&basis, &sketch).map_err(to_py_err)?;
    Ok((check.largest_angle, check.verdict.to_string()))
}

type CounterexampleParts<'py> = (
    Bound<'py, PyArray2<f64>>,
    Vec<String>,
    Bound<'py, PyArray2<f64>>,
);

/// The instance on which an arbitrary sketch fails: returns
/// (features (4, dim), labels, sketch (dim, 1)).
#[pyfunction]
fn counterexample<'py>(py: Python<'py>, dim: usize, alpha: f64) -> PyResult<CounterexampleParts<'py>> {
    let (dataset, sketch) = nulllda::counterexample(dim, alpha).map_err(to_py_err)?;
    let features = matrix_to_py(py, &dataset.data().transpose());
    Ok((features, dataset.labels().to_vec(), matrix_to_py(py, &sketch)))
}

/// Full-column-rank sketch orthogonal to the certificate span; the fast
/// method maps it to zero.
#[pyfunction]
fn adversarial_sketch<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    seed: u64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let factors = ScatterFactors::from_dataset(&dataset.inner);
    let eigen = TotalScatterEigen::compute(&factors, None).map_err(to_py_err)?;
    let basis = ProjectorBasis::build(&eigen, &factors).map_err(to_py_err)?;
    let sketch = nulllda::adversarial_sketch(&basis, &eigen, seed).map_err(to_py_err)?;
    Ok(matrix_to_py(py, &sketch))
}

/// Exact null-LDA orientation (orthonormal columns) for cross-checking.
#[pyfunction]
fn exact_null_lda<'py>(py: Python<'py>, dataset: &Dataset) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let factors = ScatterFactors::from_dataset(&dataset.inner);
    let eigen = TotalScatterEigen::compute(&factors, None).map_err(to_py_err)?;
    let oracle = nulllda::exact_null_lda(&factors, &eigen).map_err(to_py_err)?;
    Ok(matrix_to_py(py, &oracle))
}

/// Verification report of a model against a dataset, as a dict.
#[pyfunction]
fn verify<'py>(py: Python<'py>, dataset: &Dataset, model: &Model) -> PyResult<Bound<'py, PyDict>> {
    let factors = ScatterFactors::from_dataset(&dataset.inner);
    let eigen = TotalScatterEigen::compute(&factors, None).map_err(to_py_err)?;
    let report = nulllda::verification_report(&factors, &eigen, model.inner.orientation())
        .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("within_residual", report.criteria.within_residual)?;
    dict.set_item("between_norms", report.criteria.between_norms.clone())?;
    dict.set_item("rank_w", report.rank)?;
    dict.set_item("fixed_point_residual", report.fixed_point_residual)?;
    dict.set_item("span_angle_vs_oracle", report.oracle_angle)?;
    let pass = PyDict::new(py);
    pass.set_item("within", report.criteria.within_pass)?;
    pass.set_item("between", report.criteria.between_pass)?;
    pass.set_item("rank", report.rank_pass)?;
    pass.set_item("fixed_point", report.fixed_point_pass)?;
    pass.set_item("oracle", report.oracle_pass)?;
    dict.set_item("pass", pass)?;
    dict.set_item("all_pass", report.all_pass())?;
    Ok(dict)
}

/// Largest principal angle between the column spans of two equal-shape
/// matrices (radians).
#[pyfunction]
fn span_distance(a: PyReadonlyArray2<f64>, b: PyReadonlyArray2<f64>) -> PyResult<f64> {
    nulllda::span_distance(&matrix_from_py(&a), &matrix_from_py(&b)).map_err(to_py_err)
}

#[pymodule]
fn nulllda_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(fit_with_sketch, m)?)?;
    m.add_function(wrap_pyfunction!(certificate, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_check, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(adversarial_sketch, m)?)?;
    m.add_function(wrap_pyfunction!(exact_null_lda, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(span_distance, m)?)?;
    m.add("DEFAULT_MAX_RETRIES", DEFAULT_MAX_RETRIES)?;
    Ok(())
}
