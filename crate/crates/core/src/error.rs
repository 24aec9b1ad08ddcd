//! Error type shared by every module in the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across signal synthesis, feature
/// extraction, model fitting, evaluation, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation that needs samples received none (or fewer than two).
    #[error("signal is empty or too short to process")]
    EmptySignal,

    /// The signal holds fewer detectable fundamental periods than requested.
    #[error("signal holds {found} detectable periods, {needed} required")]
    InsufficientSignal { needed: u32, found: u32 },

    /// Zero-crossing detection found nothing to lock onto.
    #[error("no zero crossings found; the signal never changes sign")]
    NoCrossings,

    /// The samples are constant or all zero, so scale-free statistics
    /// are undefined.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(&'static str),

    /// A feature value is NaN or infinite.
    #[error("non-finite feature value in column {column:?} of row {row}")]
    NonFiniteFeature { row: usize, column: String },

    /// A tree node was asked to summarise zero samples.
    #[error("tree node has no samples")]
    EmptyNode,

    /// A fitting routine received a dataset with no rows.
    #[error("dataset has no rows")]
    EmptyDataset,

    /// Training data holds a single class where both are required.
    #[error("training data holds a single class; both are required")]
    DegenerateLabels,

    /// A feature vector's length does not match what the model was
    /// trained on.
    #[error("feature arity mismatch: model expects {expected} values, got {got}")]
    FeatureArity { expected: usize, got: usize },

    /// Requested feature columns are absent from the dataset.
    #[error("columns missing from input: {missing:?}")]
    MissingColumns { missing: Vec<String> },

    /// Stratified folding cannot place at least one sample of every class
    /// in every fold.
    #[error("class {class:?} has {count} samples, fewer than {folds} folds")]
    InsufficientClassSamples {
        class: String,
        count: usize,
        folds: usize,
    },

    /// A metric has no defined value for the given inputs.
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    /// An iterative fit ran out of its iteration budget.
    #[error("did not converge within {iterations} iterations (residual norm {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A signal record failed a pipeline stage; carries which trial it was.
    #[error("record trial {trial_id}: {source}")]
    Record {
        trial_id: u32,
        #[source]
        source: Box<Error>,
    },

    /// Filesystem failure with the offending path attached.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV with the offending path attached.
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// Malformed JSON with the offending path attached.
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// A file parsed as CSV/JSON but its contents violate the expected
    /// layout (bad header, unparseable field, unknown label).
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    /// Wraps an error with the trial id of the record that produced it.
    pub fn for_trial(self, trial_id: u32) -> Self {
        Error::Record {
            trial_id,
            source: Box::new(self),
        }
    }
}
