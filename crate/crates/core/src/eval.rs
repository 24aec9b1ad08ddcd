//! Cross-validated evaluation grids and ranking metrics.
//!
//! [`run_plan`] reproduces the study design this crate exists for: a
//! stratified k-fold sweep of forest sizes and feature subsets, a row of
//! reference classifiers on the same folds, and an importance ranking
//! from a forest fitted to the full dataset. Everything is deterministic
//! given the plan seed, and a failing cell records its error instead of
//! aborting the rest of the grid.

use serde::{Deserialize, Serialize};

use crate::baselines::{self, ClassifierSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FEATURE_NAMES;
use crate::forest::{ForestConfig, RandomForest, SubsetRule};
use crate::scalar::Scalar;
use crate::seeding;
use crate::signals::Condition;

/// A named list of feature columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub name: String,
    pub features: Vec<String>,
}

impl FeatureSubset {
    pub fn new(name: &str, features: &[&str]) -> Self {
        FeatureSubset {
            name: name.to_string(),
            features: features.iter().map(|f| f.to_string()).collect(),
        }
    }
}

/// The full evaluation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPlan {
    /// Cross-validation folds; at least 2.
    pub folds: usize,
    /// Master seed; folding, the importance forest, and every forest cell
    /// derive their own child seeds from it.
    pub seed: u64,
    /// Reference classifiers, each run on every feature subset.
    pub classifiers: Vec<ClassifierSpec>,
    /// Ensemble sizes for the forest sweep.
    pub tree_counts: Vec<usize>,
    /// Feature subsets; every cell runs once per subset.
    pub feature_subsets: Vec<FeatureSubset>,
}

impl EvalPlan {
    /// The study defaults: 5 folds, the five reference classifiers, the
    /// 10..1000 tree sweep, and the all/top-3/top-2 subsets.
    pub fn with_seed(seed: u64) -> Self {
        EvalPlan {
            folds: 5,
            seed,
            classifiers: ClassifierSpec::all_defaults(),
            tree_counts: vec![10, 100, 200, 500, 1000],
            feature_subsets: vec![
                FeatureSubset::new("all13", &FEATURE_NAMES),
                FeatureSubset::new("top3", &["mean_index", "impulsion", "shape_factor"]),
                FeatureSubset::new("top2", &["mean_index", "impulsion"]),
            ],
        }
    }

    fn validate<F: Scalar>(&self, dataset: &Dataset<F>) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".to_string()));
        }
        if self.feature_subsets.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one feature subset is required".to_string(),
            ));
        }
        for subset in &self.feature_subsets {
            if subset.features.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "feature subset {:?} is empty",
                    subset.name
                )));
            }
            let missing: Vec<String> = subset
                .features
                .iter()
                .filter(|f| dataset.feature_index(f).is_none())
                .cloned()
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingColumns { missing });
            }
        }
        for count in &self.tree_counts {
            if *count == 0 {
                return Err(Error::InvalidConfig(
                    "tree counts must be at least 1".to_string(),
                ));
            }
        }
        for spec in &self.classifiers {
            spec.validate()?;
        }
        Ok(())
    }
}

impl Default for EvalPlan {
    fn default() -> Self {
        EvalPlan::with_seed(0)
    }
}

/// Fold metrics for one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub auc_mean: f64,
    pub auc_std: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub fold_auc: Vec<f64>,
    pub fold_accuracy: Vec<f64>,
}

/// Result of one cell: metrics, or the error that stopped it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Ok(CellMetrics),
    Failed { error: String },
}

/// One (subset, ensemble size) cell of the forest sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestCell {
    pub subset: String,
    pub n_trees: usize,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

impl ForestCell {
    /// Stable label used in file names and table captions.
    pub fn label(&self) -> String {
        format!("forest_t{}_{}", self.n_trees, self.subset)
    }
}

/// One (classifier, subset) cell of the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierCell {
    pub classifier: String,
    pub subset: String,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

impl ClassifierCell {
    /// Stable label used in file names and table captions.
    pub fn label(&self) -> String {
        format!("{}_{}", self.classifier, self.subset)
    }
}

/// Pooled held-out scores for one successful cell: every dataset row
/// scored exactly once, by the model of the fold that held it out. Rows
/// appear fold by fold, so pairing `scores[i]` with `labels[i]` is enough
/// to draw a cross-validated ROC curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CellScores {
    /// Matches the owning cell's `label()`.
    pub cell: String,
    pub labels: Vec<Condition>,
    pub scores: Vec<f64>,
}

/// One feature with its ensemble importance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    pub importance: f64,
}

/// Everything [`run_plan`] produces. Serializes deterministically: same
/// plan and dataset, same bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: usize,
    pub seed: u64,
    pub forest_cells: Vec<ForestCell>,
    pub classifier_cells: Vec<ClassifierCell>,
    /// Importance ranking from a 100-tree forest on the full dataset.
    pub importance_ranking: Vec<RankedFeature>,
}

/// Splits row indices into `k` disjoint folds with per-class balance.
///
/// Within each class (healthy first, then faulty, one shared RNG stream)
/// the indices are shuffled and dealt round-robin, so every fold's class
/// counts differ from perfect proportionality by at most one sample.
pub fn stratified_folds(labels: &[Condition], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig("folds must be at least 2".to_string()));
    }
    let mut rng = seeding::rng(seed);
    let mut folds = vec![Vec::new(); k];
    for class in Condition::ALL {
        let mut indices: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        if indices.len() < k {
            return Err(Error::InsufficientClassSamples {
                class: class.to_string(),
                count: indices.len(),
                folds: k,
            });
        }
        rand::seq::SliceRandom::shuffle(indices.as_mut_slice(), &mut rng);
        for (i, idx) in indices.into_iter().enumerate() {
            folds[i % k].push(idx);
        }
    }
    Ok(folds)
}

/// Rank-statistic AUC: the fraction of (faulty, healthy) pairs the scores
/// order correctly, ties counting half. Exact, not trapezoid-approximate.
pub fn auc(scores: &[f64], labels: &[Condition]) -> Result<f64> {
    let mut healthy = Vec::new();
    let mut faulty = Vec::new();
    for (s, l) in scores.iter().zip(labels) {
        match l {
            Condition::Healthy => healthy.push(*s),
            Condition::Faulty => faulty.push(*s),
        }
    }
    if healthy.is_empty() || faulty.is_empty() {
        return Err(Error::UndefinedMetric("AUC needs both classes present"));
    }
    let mut wins = 0.0f64;
    for f in &faulty {
        for h in &healthy {
            if f > h {
                wins += 1.0;
            } else if f == h {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (healthy.len() as f64 * faulty.len() as f64))
}

/// Fraction of rows on the right side of `threshold`; a score exactly at
/// the threshold reads as faulty.
pub fn accuracy(scores: &[f64], labels: &[Condition], threshold: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::UndefinedMetric("accuracy of an empty set"));
    }
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| {
            let predicted = if **s >= threshold {
                Condition::Faulty
            } else {
                Condition::Healthy
            };
            predicted == **l
        })
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// ROC staircase for plotting: `(false positive rate, true positive
/// rate)` from (0,0) to (1,1), one step per distinct score.
pub fn roc_points(scores: &[f64], labels: &[Condition]) -> Result<Vec<(f64, f64)>> {
    let n_f = labels.iter().filter(|l| **l == Condition::Faulty).count();
    let n_h = labels.len() - n_f;
    if n_f == 0 || n_h == 0 {
        return Err(Error::UndefinedMetric("ROC needs both classes present"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("finite score")
            .then(a.cmp(&b))
    });
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        // Consume all rows sharing one score so ties move diagonally.
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            match labels[order[i]] {
                Condition::Faulty => tp += 1,
                Condition::Healthy => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / n_h as f64, tp as f64 / n_f as f64));
    }
    Ok(points)
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    (mean, var.sqrt())
}

/// Scores every row of `test` with `score_fn`; returns the fold's AUC,
/// accuracy, and the raw scores for pooling.
fn fold_metrics<F: Scalar>(
    test: &Dataset<F>,
    threshold: f64,
    mut score_fn: impl FnMut(&[F]) -> Result<f64>,
) -> Result<(f64, f64, Vec<f64>)> {
    let scores: Vec<f64> = (0..test.len())
        .map(|i| score_fn(test.row(i)))
        .collect::<Result<_>>()?;
    Ok((
        auc(&scores, test.labels())?,
        accuracy(&scores, test.labels(), threshold)?,
        scores,
    ))
}

/// Per-fold metric accumulator shared by both cell runners.
struct CellAccumulator {
    fold_auc: Vec<f64>,
    fold_accuracy: Vec<f64>,
    pooled_labels: Vec<Condition>,
    pooled_scores: Vec<f64>,
}

impl CellAccumulator {
    fn new(folds: usize) -> Self {
        CellAccumulator {
            fold_auc: Vec::with_capacity(folds),
            fold_accuracy: Vec::with_capacity(folds),
            pooled_labels: Vec::new(),
            pooled_scores: Vec::new(),
        }
    }

    fn push(&mut self, labels: &[Condition], fold: (f64, f64, Vec<f64>)) {
        let (auc, accuracy, scores) = fold;
        self.fold_auc.push(auc);
        self.fold_accuracy.push(accuracy);
        self.pooled_labels.extend_from_slice(labels);
        self.pooled_scores.extend(scores);
    }

    fn finish(self) -> (CellOutcome, Option<(Vec<Condition>, Vec<f64>)>) {
        (
            CellOutcome::Ok(aggregate(self.fold_auc, self.fold_accuracy)),
            Some((self.pooled_labels, self.pooled_scores)),
        )
    }
}

fn aggregate(fold_auc: Vec<f64>, fold_accuracy: Vec<f64>) -> CellMetrics {
    let (auc_mean, auc_std) = mean_and_population_std(&fold_auc);
    let (accuracy_mean, accuracy_std) = mean_and_population_std(&fold_accuracy);
    CellMetrics {
        auc_mean,
        auc_std,
        accuracy_mean,
        accuracy_std,
        fold_auc,
        fold_accuracy,
    }
}

/// Training-fold indices: every fold but `held_out`, in dataset order.
fn training_indices(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(f, _)| *f != held_out)
        .flat_map(|(_, fold)| fold.iter().copied())
        .collect();
    indices.sort_unstable();
    indices
}

/// Runs the whole grid. See the module docs for the layout; fold splits
/// are shared by every cell, and each forest cell derives per-fold seeds
/// from the plan seed and its own grid position.
pub fn run_plan<F: Scalar>(plan: &EvalPlan, dataset: &Dataset<F>) -> Result<EvalReport> {
    run_plan_with_scores(plan, dataset).map(|(report, _)| report)
}

/// [`run_plan`] plus the pooled held-out scores of every successful
/// cell, in report cell order (forest sweep first), for ROC rendering.
pub fn run_plan_with_scores<F: Scalar>(
    plan: &EvalPlan,
    dataset: &Dataset<F>,
) -> Result<(EvalReport, Vec<CellScores>)> {
    plan.validate(dataset)?;
    let folds = stratified_folds(dataset.labels(), plan.folds, seeding::derive_seed(plan.seed, 0))?;

    let importance_forest = RandomForest::fit(
        dataset,
        &ForestConfig {
            n_trees: 100,
            feature_subset: SubsetRule::Sqrt,
            min_samples_split: 2,
            rng_seed: seeding::derive_seed(plan.seed, 1),
        },
    )?;
    let importance_ranking = importance_forest
        .importance_ranking()
        .into_iter()
        .map(|(feature, importance)| RankedFeature {
            feature,
            importance,
        })
        .collect();

    let mut forest_cells = Vec::new();
    let mut all_scores = Vec::new();
    for (s_idx, subset) in plan.feature_subsets.iter().enumerate() {
        let columns: Vec<&str> = subset.features.iter().map(String::as_str).collect();
        let view = dataset.select_features(&columns)?;
        for (t_idx, &n_trees) in plan.tree_counts.iter().enumerate() {
            let cell_tag = 2 + (s_idx * plan.tree_counts.len() + t_idx) as u64;
            let cell_seed = seeding::derive_seed(plan.seed, cell_tag);
            let (outcome, scores) = run_forest_cell(&view, &folds, n_trees, cell_seed);
            let cell = ForestCell {
                subset: subset.name.clone(),
                n_trees,
                outcome,
            };
            if let Some((labels, scores)) = scores {
                all_scores.push(CellScores {
                    cell: cell.label(),
                    labels,
                    scores,
                });
            }
            forest_cells.push(cell);
        }
    }

    let mut classifier_cells = Vec::new();
    for spec in &plan.classifiers {
        for subset in &plan.feature_subsets {
            let columns: Vec<&str> = subset.features.iter().map(String::as_str).collect();
            let view = dataset.select_features(&columns)?;
            let (outcome, scores) = run_classifier_cell(&view, &folds, spec);
            let cell = ClassifierCell {
                classifier: spec.model.name().to_string(),
                subset: subset.name.clone(),
                outcome,
            };
            if let Some((labels, scores)) = scores {
                all_scores.push(CellScores {
                    cell: cell.label(),
                    labels,
                    scores,
                });
            }
            classifier_cells.push(cell);
        }
    }

    let report = EvalReport {
        folds: plan.folds,
        seed: plan.seed,
        forest_cells,
        classifier_cells,
        importance_ranking,
    };
    Ok((report, all_scores))
}

fn run_forest_cell<F: Scalar>(
    view: &Dataset<F>,
    folds: &[Vec<usize>],
    n_trees: usize,
    cell_seed: u64,
) -> (CellOutcome, Option<(Vec<Condition>, Vec<f64>)>) {
    let mut acc = CellAccumulator::new(folds.len());
    for held_out in 0..folds.len() {
        let train = view.subset_rows(&training_indices(folds, held_out));
        let test = view.subset_rows(&folds[held_out]);
        let config = ForestConfig {
            n_trees,
            feature_subset: SubsetRule::Sqrt,
            min_samples_split: 2,
            rng_seed: seeding::derive_seed(cell_seed, held_out as u64),
        };
        let result = RandomForest::fit(&train, &config)
            .and_then(|forest| fold_metrics(&test, 0.5, |x| forest.score(x)));
        match result {
            Ok(fold) => acc.push(test.labels(), fold),
            Err(e) => return (CellOutcome::Failed { error: e.to_string() }, None),
        }
    }
    acc.finish()
}

fn run_classifier_cell<F: Scalar>(
    view: &Dataset<F>,
    folds: &[Vec<usize>],
    spec: &ClassifierSpec,
) -> (CellOutcome, Option<(Vec<Condition>, Vec<f64>)>) {
    let threshold = spec.model.decision_threshold();
    let mut acc = CellAccumulator::new(folds.len());
    for held_out in 0..folds.len() {
        let train = view.subset_rows(&training_indices(folds, held_out));
        let test = view.subset_rows(&folds[held_out]);
        let result = baselines::train(spec, &train)
            .and_then(|clf| fold_metrics(&test, threshold, |x| clf.score(x)));
        match result {
            Ok(fold) => acc.push(test.labels(), fold),
            Err(e) => return (CellOutcome::Failed { error: e.to_string() }, None),
        }
    }
    acc.finish()
}

/// Returns the `k_top` most important feature names, ranked by a
/// 100-tree forest fitted to the full dataset with the given seed.
pub fn select_features<F: Scalar>(
    dataset: &Dataset<F>,
    k_top: usize,
    seed: u64,
) -> Result<Vec<String>> {
    if k_top == 0 || k_top > dataset.n_features() {
        return Err(Error::InvalidConfig(format!(
            "k_top must lie in 1..={}, got {k_top}",
            dataset.n_features()
        )));
    }
    let forest = RandomForest::fit(
        dataset,
        &ForestConfig {
            n_trees: 100,
            feature_subset: SubsetRule::Sqrt,
            min_samples_split: 2,
            rng_seed: seed,
        },
    )?;
    let ranking = forest.importance_ranking();
    if ranking.is_empty() {
        return Err(Error::UndefinedMetric(
            "feature importances are all zero; nothing to rank",
        ));
    }
    Ok(ranking
        .into_iter()
        .take(k_top)
        .map(|(name, _)| name)
        .collect())
}
