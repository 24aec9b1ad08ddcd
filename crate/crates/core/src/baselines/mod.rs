//! Reference classifiers behind one train/score interface.
//!
//! Five comparison models: a single decision tree, Gaussian naive Bayes,
//! L2-regularized logistic regression, a linear ridge classifier, and an
//! RBF-kernel SVM. Each produces a real-valued score oriented so that
//! higher means more faulty, which is all the ROC machinery needs; no
//! calibration across models is implied.
//!
//! Scores have two natural scales: probability-like models (tree leaf
//! fraction, logistic sigmoid) decide at 1/2, signed models (naive Bayes
//! log-posterior difference, ridge response, SVM decision value) decide
//! at 0. [`TrainedClassifier::predict`] applies the right one.

pub mod logistic;
pub mod naive_bayes;
pub mod ridge;
pub mod standardize;
pub mod svm;

use serde::{Deserialize, Serialize};

use crate::cart::{CartConfig, DecisionTree};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding;
use crate::signals::Condition;
use standardize::Standardizer;

/// Model choice with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// One unpruned Gini tree on all features; no hyperparameters.
    Cart,
    /// Per-class feature Gaussians with frequency priors.
    GaussianNb,
    Logistic {
        l2_strength: f64,
        max_iterations: usize,
        convergence_tol: f64,
    },
    Ridge {
        regularization_strength: f64,
    },
    SvmRbf {
        cost: f64,
        /// RBF gamma; `None` resolves to 1/p at training time.
        kernel_width: Option<f64>,
        smo_tol: f64,
        max_passes: usize,
        working_set_seed: u64,
    },
}

impl ModelSpec {
    pub fn default_logistic() -> Self {
        ModelSpec::Logistic {
            l2_strength: 1.0,
            max_iterations: 10_000,
            convergence_tol: 1e-6,
        }
    }

    pub fn default_ridge() -> Self {
        ModelSpec::Ridge {
            regularization_strength: 1.0,
        }
    }

    pub fn default_svm_rbf() -> Self {
        ModelSpec::SvmRbf {
            cost: 1.0,
            kernel_width: None,
            smo_tol: 1e-3,
            max_passes: 10,
            working_set_seed: 0,
        }
    }

    /// The five models with conventional defaults, in canonical order.
    pub fn all_defaults() -> [ModelSpec; 5] {
        [
            ModelSpec::Cart,
            ModelSpec::GaussianNb,
            ModelSpec::default_logistic(),
            ModelSpec::default_ridge(),
            ModelSpec::default_svm_rbf(),
        ]
    }

    /// Stable snake_case name used in reports and file names.
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Cart => "cart",
            ModelSpec::GaussianNb => "gaussian_nb",
            ModelSpec::Logistic { .. } => "logistic",
            ModelSpec::Ridge { .. } => "ridge",
            ModelSpec::SvmRbf { .. } => "svm_rbf",
        }
    }

    /// Score value at which a prediction flips to faulty: 1/2 for
    /// probability-like scores, 0 for signed ones.
    pub fn decision_threshold(&self) -> f64 {
        match self {
            ModelSpec::Cart | ModelSpec::Logistic { .. } => 0.5,
            ModelSpec::GaussianNb | ModelSpec::Ridge { .. } | ModelSpec::SvmRbf { .. } => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            ModelSpec::Cart | ModelSpec::GaussianNb => Ok(()),
            ModelSpec::Logistic {
                l2_strength,
                max_iterations,
                convergence_tol,
            } => {
                if !pos(l2_strength) {
                    return bad("l2_strength must be finite and positive");
                }
                if max_iterations == 0 {
                    return bad("max_iterations must be at least 1");
                }
                if !pos(convergence_tol) {
                    return bad("convergence_tol must be finite and positive");
                }
                Ok(())
            }
            ModelSpec::Ridge {
                regularization_strength,
            } => {
                if !pos(regularization_strength) {
                    return bad("regularization_strength must be finite and positive");
                }
                Ok(())
            }
            ModelSpec::SvmRbf {
                cost,
                kernel_width,
                smo_tol,
                max_passes,
                ..
            } => {
                if !pos(cost) {
                    return bad("cost must be finite and positive");
                }
                if let Some(g) = kernel_width {
                    if !pos(g) {
                        return bad("kernel_width must be finite and positive");
                    }
                }
                if !pos(smo_tol) {
                    return bad("smo_tol must be finite and positive");
                }
                if max_passes == 0 {
                    return bad("max_passes must be at least 1");
                }
                Ok(())
            }
        }
    }
}

/// A model choice plus the standardization switch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub model: ModelSpec,
    /// Standardize features with training-fold statistics before fitting
    /// and scoring.
    pub standardize_inputs: bool,
}

impl ClassifierSpec {
    /// Wraps a model with its conventional standardization: on for the
    /// geometry-sensitive models (logistic, ridge, SVM), off for the
    /// per-feature-equivariant ones (tree, naive Bayes).
    pub fn standard(model: ModelSpec) -> Self {
        let standardize_inputs = matches!(
            model,
            ModelSpec::Logistic { .. } | ModelSpec::Ridge { .. } | ModelSpec::SvmRbf { .. }
        );
        ClassifierSpec {
            model,
            standardize_inputs,
        }
    }

    /// The five default classifiers in canonical order.
    pub fn all_defaults() -> Vec<ClassifierSpec> {
        ModelSpec::all_defaults()
            .into_iter()
            .map(ClassifierSpec::standard)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()
    }
}

/// Learned parameters, one variant per model kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Cart { tree: DecisionTree<f64> },
    GaussianNb(naive_bayes::GaussianNbModel),
    Logistic(logistic::LogisticModel),
    Ridge(ridge::RidgeModel),
    SvmRbf(svm::SvmModel),
}

/// A trained classifier: the [`ClassifierSpec`] it came from, the
/// feature names it expects, frozen standardization statistics (if any),
/// and the learned parameters. Serializes losslessly to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    spec: ClassifierSpec,
    feature_names: Vec<String>,
    standardizer: Option<Standardizer>,
    model: TrainedModel,
}

/// Trains `spec` on `dataset`. Both classes must be present; features
/// must be finite (guaranteed by [`Dataset`] construction).
pub fn train<F: Scalar>(spec: &ClassifierSpec, dataset: &Dataset<F>) -> Result<TrainedClassifier> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = dataset.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateLabels);
    }

    let mut rows: Vec<Vec<f64>> = dataset
        .rows()
        .iter()
        .map(|r| r.iter().map(|v| v.into_f64()).collect())
        .collect();
    let standardizer = spec.standardize_inputs.then(|| Standardizer::fit(&rows));
    if let Some(s) = &standardizer {
        rows = s.apply_all(&rows);
    }
    let labels = dataset.labels();

    let model = match spec.model {
        ModelSpec::Cart => {
            let tree_data = Dataset::from_parts(
                dataset.feature_names().to_vec(),
                rows,
                labels.to_vec(),
                dataset.meta().to_vec(),
            )?;
            // Full feature scan at every node: the stream is never drawn
            // from, so the seed is irrelevant.
            let mut unused_rng = seeding::rng(0);
            let tree = DecisionTree::fit(&tree_data, &CartConfig::default(), &mut unused_rng)?;
            TrainedModel::Cart { tree }
        }
        ModelSpec::GaussianNb => TrainedModel::GaussianNb(naive_bayes::fit(&rows, labels)?),
        ModelSpec::Logistic {
            l2_strength,
            max_iterations,
            convergence_tol,
        } => TrainedModel::Logistic(logistic::fit(
            &rows,
            labels,
            l2_strength,
            max_iterations,
            convergence_tol,
        )?),
        ModelSpec::Ridge {
            regularization_strength,
        } => TrainedModel::Ridge(ridge::fit(&rows, labels, regularization_strength)?),
        ModelSpec::SvmRbf {
            cost,
            kernel_width,
            smo_tol,
            max_passes,
            working_set_seed,
        } => {
            let gamma = kernel_width.unwrap_or(1.0 / dataset.n_features() as f64);
            TrainedModel::SvmRbf(svm::fit(
                &rows,
                labels,
                cost,
                gamma,
                smo_tol,
                max_passes,
                working_set_seed,
            )?)
        }
    };

    Ok(TrainedClassifier {
        spec: *spec,
        feature_names: dataset.feature_names().to_vec(),
        standardizer,
        model,
    })
}

impl TrainedClassifier {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn model(&self) -> &TrainedModel {
        &self.model
    }

    pub fn decision_threshold(&self) -> f64 {
        self.spec.model.decision_threshold()
    }

    /// Real-valued score, higher meaning more faulty.
    pub fn score<F: Scalar>(&self, x: &[F]) -> Result<f64> {
        if x.len() != self.feature_names.len() {
            return Err(Error::FeatureArity {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        let mut xs: Vec<f64> = x.iter().map(|v| v.into_f64()).collect();
        if let Some(s) = &self.standardizer {
            s.apply(&mut xs);
        }
        match &self.model {
            TrainedModel::Cart { tree } => tree.probability(&xs),
            TrainedModel::GaussianNb(m) => Ok(m.score(&xs)),
            TrainedModel::Logistic(m) => Ok(m.score(&xs)),
            TrainedModel::Ridge(m) => Ok(m.score(&xs)),
            TrainedModel::SvmRbf(m) => Ok(m.score(&xs)),
        }
    }

    /// Thresholds the score at the model's natural boundary; the boundary
    /// itself reads as faulty.
    pub fn predict<F: Scalar>(&self, x: &[F]) -> Result<Condition> {
        Ok(if self.score(x)? >= self.decision_threshold() {
            Condition::Faulty
        } else {
            Condition::Healthy
        })
    }
}
