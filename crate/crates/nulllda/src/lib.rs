//! Null-space linear discriminant analysis for the undersampled regime,
//! fitted through random sketching.
//!
//! With n samples in d dimensions and d >> n, the scatter matrices are
//! singular and classical LDA breaks down. Null LDA instead looks for
//! directions that the within scatter annihilates while the between scatter
//! does not. The fast route multiplies the pseudo-inverse of the total
//! scatter and the between scatter into a random d x (c-1) sketch; this
//! crate adds the machinery that makes the shortcut safe:
//!
//! * factored scatter operators that never form a d x d matrix
//!   ([`ScatterFactors`]),
//! * a truncated eigendecomposition of the total scatter through its n x n
//!   Gram matrix ([`TotalScatterEigen`]),
//! * a rank certificate deciding, before any fitting, whether a sketch
//!   preserves all c-1 discriminant directions ([`certificate`]), with an
//!   equivalent geometric test through principal angles
//!   ([`geometric_check`]),
//! * a seeded, retrying fit ([`fit_with_retry`]) and a generator for the
//!   known failing instance ([`counterexample`]) plus adversarial sketches
//!   ([`adversarial_sketch`]),
//! * an independent exact null-LDA solver and verification predicates
//!   ([`exact_null_lda`], [`verification_report`]).

mod certificate;
mod dataset;
mod eigen;
mod error;
mod fit;
mod projector;
mod scatter;
mod sketch;
pub mod subspace;
mod verify;

pub use certificate::{
    certificate, geometric_check, CertificateReport, GeometricCheck, Verdict,
    DEFAULT_RATIO_THRESHOLD, FLOOR_SAFETY, GEOMETRIC_ANGLE_TOL,
};
pub use dataset::LabeledDataset;
pub use eigen::TotalScatterEigen;
pub use error::{Error, Result};
pub use fit::{
    apply_discriminant, fast_null_lda, fit_with_retry, fit_with_sketch, nearest_centroid,
    NullLdaModel, SketchFit, DEFAULT_MAX_RETRIES,
};
pub use projector::{ProjectorBasis, LAMBDA_STRUCTURE_TOL};
pub use scatter::{
    compute_centroids, rank_report, RankEntry, RankReport, ScatterFactors, ScatterKind,
};
pub use sketch::{adversarial_sketch, counterexample, gaussian_sketch};
pub use verify::{
    criteria_check, exact_null_lda, fixed_point_check, span_distance, verification_report,
    CriteriaCheck, VerificationReport, BETWEEN_TOL, FIXED_POINT_TOL, ORACLE_ANGLE_TOL, WITHIN_TOL,
};
