//! Broken rotor bar detection for line-start permanent magnet synchronous
//! motors, from the startup current transient alone.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`signals`] synthesises startup transients for healthy and faulty
//!    machines across four load points, and trims captures to a whole
//!    number of fundamental periods.
//! 2. [`features`] condenses a trimmed transient into 13 time-domain
//!    statistics (RMS, shape/crest/impulsion/margin factors, moments, ...).
//! 3. [`cart`] and [`forest`] grow Gini-split decision trees and bagged
//!    ensembles over those features, with out-of-bag error estimates and
//!    impurity-based feature importances. [`baselines`] provides five
//!    reference classifiers (naive Bayes, logistic regression, ridge,
//!    RBF-kernel SVM, and a single tree) behind one training interface.
//! 4. [`eval`] runs stratified cross-validation grids over ensemble sizes
//!    and feature subsets, reporting accuracy and ROC-AUC.
//!
//! Everything is deterministic: each randomised step takes an explicit
//! seed, and child seeds are derived (never shared) so results are stable
//! under reordering and extension. Numeric code is generic over the sample
//! scalar ([`Scalar`]: `f32` or `f64`); aliases below fix the common
//! double-precision case.

pub mod baselines;
pub mod cart;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod io;
pub mod report;
pub mod scalar;
pub mod seeding;
pub mod signals;

pub use error::{Error, Result};
pub use features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use scalar::Scalar;
pub use signals::{Condition, GeneratorConfig, Load, SignalRecord};

/// Double-precision generator configuration.
pub type GeneratorConfig64 = signals::GeneratorConfig<f64>;
/// Double-precision signal record.
pub type SignalRecord64 = signals::SignalRecord<f64>;
/// Double-precision feature vector.
pub type FeatureVector64 = features::FeatureVector<f64>;
