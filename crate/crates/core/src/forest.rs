//! Bagged ensembles of Gini trees with out-of-bag diagnostics.
//!
//! Each tree grows on a bootstrap sample (as many draws with replacement
//! as the dataset has rows) with a random feature subset drawn fresh at
//! every node. The ensemble scores a point by averaging the faulty-class
//! fraction of the leaf each tree routes it to; a hard majority vote is
//! also available.
//!
//! Randomness is structured for reproducibility: tree `t` derives its own
//! seed from the forest seed and `t`, then splits it into one stream for
//! the bootstrap draw and one for node-level feature subsets. Trees are
//! therefore independent of how many siblings follow them - growing a
//! bigger forest with the same seed extends the tree list without
//! changing existing trees.

use serde::{Deserialize, Serialize};

use crate::cart::{CartConfig, DecisionTree};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding;
use crate::signals::Condition;

/// How many candidate features each tree node considers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetRule {
    /// Every feature at every node (bagging without feature sampling).
    All,
    /// Ceiling of the square root of the feature count; the usual
    /// classification default.
    Sqrt,
    /// A fixed count, validated against the dataset width at fit time.
    Fixed(usize),
}

impl SubsetRule {
    fn resolve(self, n_features: usize) -> Result<Option<usize>> {
        match self {
            SubsetRule::All => Ok(None),
            SubsetRule::Sqrt => Ok(Some((n_features as f64).sqrt().ceil() as usize)),
            SubsetRule::Fixed(m) => {
                if m == 0 || m > n_features {
                    Err(Error::InvalidConfig(format!(
                        "fixed feature subset must lie in 1..={n_features}, got {m}"
                    )))
                } else {
                    Ok(Some(m))
                }
            }
        }
    }
}

/// Ensemble parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub feature_subset: SubsetRule,
    /// Passed through to every tree; 2 leaves trees unpruned.
    pub min_samples_split: usize,
    pub rng_seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            feature_subset: SubsetRule::Sqrt,
            min_samples_split: 2,
            rng_seed: 0,
        }
    }
}

/// Out-of-bag summary recorded at fit time.
///
/// A row is out of bag for a tree when the bootstrap never drew it; such
/// rows act as a free validation set. Each row is classified by the
/// majority vote of the trees it is out of bag for (ties read as faulty),
/// and the error is the fraction misclassified. Rows drawn into every
/// bootstrap receive no vote and are skipped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OobReport {
    /// Mean fraction of rows out of bag per tree; about `exp(-1)` for
    /// honest bootstraps.
    pub mean_oob_fraction: f64,
    /// OOB misclassification rate, or `None` when every row was skipped.
    pub error: Option<f64>,
    /// Rows that appeared in every bootstrap and could not be scored.
    pub uncounted_rows: usize,
}

/// A fitted ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest<F> {
    config: ForestConfig,
    feature_names: Vec<String>,
    trees: Vec<DecisionTree<F>>,
    oob: OobReport,
}

impl<F: Scalar> RandomForest<F> {
    /// Fits `cfg.n_trees` trees on bootstrap samples of `dataset`.
    pub fn fit(dataset: &Dataset<F>, cfg: &ForestConfig) -> Result<Self> {
        if cfg.n_trees == 0 {
            return Err(Error::InvalidConfig(
                "n_trees must be at least 1".to_string(),
            ));
        }
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let subset = cfg.feature_subset.resolve(dataset.n_features())?;
        let tree_cfg = CartConfig {
            min_samples_split: cfg.min_samples_split,
            feature_subset: subset,
        };

        let n = dataset.len();
        let mut trees = Vec::with_capacity(cfg.n_trees);
        let mut oob_votes = vec![[0usize; 2]; n];
        let mut oob_fraction_sum = 0.0;

        for t in 0..cfg.n_trees {
            let tree_seed = seeding::derive_seed(cfg.rng_seed, t as u64);
            let mut bootstrap_rng = seeding::rng(seeding::derive_seed(tree_seed, 0));
            let mut node_rng = seeding::rng(seeding::derive_seed(tree_seed, 1));

            let mut in_bag = vec![false; n];
            let draws: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rand::Rng::random_range(&mut bootstrap_rng, 0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();

            let tree = DecisionTree::fit(&dataset.subset_rows(&draws), &tree_cfg, &mut node_rng)?;

            let mut oob_count = 0usize;
            for (i, bagged) in in_bag.iter().enumerate() {
                if !bagged {
                    oob_count += 1;
                    let vote = tree.predict(dataset.row(i))?;
                    oob_votes[i][vote.class_index()] += 1;
                }
            }
            oob_fraction_sum += oob_count as f64 / n as f64;
            trees.push(tree);
        }

        let mut counted = 0usize;
        let mut errors = 0usize;
        for (i, votes) in oob_votes.iter().enumerate() {
            if votes[0] + votes[1] == 0 {
                continue;
            }
            counted += 1;
            let predicted = if votes[0] > votes[1] {
                Condition::Healthy
            } else {
                Condition::Faulty
            };
            if predicted != dataset.label(i) {
                errors += 1;
            }
        }

        Ok(RandomForest {
            config: *cfg,
            feature_names: dataset.feature_names().to_vec(),
            trees,
            oob: OobReport {
                mean_oob_fraction: oob_fraction_sum / cfg.n_trees as f64,
                error: (counted > 0).then(|| errors as f64 / counted as f64),
                uncounted_rows: n - counted,
            },
        })
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn trees(&self) -> &[DecisionTree<F>] {
        &self.trees
    }

    pub fn oob(&self) -> &OobReport {
        &self.oob
    }

    /// Mean over trees of the faulty fraction in the leaf `x` reaches.
    /// Ranges over [0, 1]; higher means more faulty-looking.
    pub fn score(&self, x: &[F]) -> Result<f64> {
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.probability(x)?;
        }
        Ok(sum / self.trees.len() as f64)
    }

    /// Thresholds [`score`](Self::score) at 1/2; the midpoint itself reads
    /// as faulty.
    pub fn predict(&self, x: &[F]) -> Result<Condition> {
        Ok(if self.score(x)? >= 0.5 {
            Condition::Faulty
        } else {
            Condition::Healthy
        })
    }

    /// Hard majority vote over the trees' leaf classes; an exact tie
    /// reads as faulty.
    pub fn majority_vote(&self, x: &[F]) -> Result<Condition> {
        let mut votes = [0usize; 2];
        for tree in &self.trees {
            votes[tree.predict(x)?.class_index()] += 1;
        }
        Ok(if votes[0] > votes[1] {
            Condition::Healthy
        } else {
            Condition::Faulty
        })
    }

    /// Mean of the trees' normalised importances, renormalised to sum
    /// to 1. All zeros when no tree ever split.
    pub fn importances(&self) -> Vec<f64> {
        let p = self.feature_names.len();
        let mut acc = vec![0.0; p];
        for tree in &self.trees {
            for (a, v) in acc.iter_mut().zip(tree.importances()) {
                *a += v;
            }
        }
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            for v in &mut acc {
                *v /= total;
            }
        }
        acc
    }

    /// Feature names with importances, most important first; exact ties
    /// keep dataset column order. An ensemble with no splits at all
    /// yields an empty ranking.
    pub fn importance_ranking(&self) -> Vec<(String, f64)> {
        let imp = self.importances();
        if imp.iter().all(|&v| v == 0.0) {
            return Vec::new();
        }
        let mut order: Vec<usize> = (0..imp.len()).collect();
        order.sort_by(|&a, &b| {
            imp[b]
                .partial_cmp(&imp[a])
                .expect("finite importance")
                .then(a.cmp(&b))
        });
        order
            .into_iter()
            .map(|i| (self.feature_names[i].clone(), imp[i]))
            .collect()
    }
}
