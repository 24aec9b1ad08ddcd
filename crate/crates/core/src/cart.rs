//! Binary classification trees split on Gini impurity.
//!
//! Trees grow unpruned: a node stops only when it is pure, holds fewer
//! samples than `min_samples_split`, or no candidate split improves
//! impurity. Candidate thresholds are midpoints between consecutive
//! distinct values of a feature; a sample routes left when its value is
//! `<=` the threshold.
//!
//! Everything about growth is deterministic. Impurity and split gain are
//! evaluated in `f64` with one fixed operation order (see [`gini`]), so a
//! brute-force re-evaluation of every candidate reproduces the chosen
//! split bit for bit. Ties in gain resolve to the lowest feature index,
//! then the lowest threshold, because candidates are scanned in ascending
//! order and only a strictly greater gain displaces the incumbent. When a
//! per-node feature subset is configured, the subset is drawn for the node
//! before either child grows and the children grow left first, which pins
//! the random stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signals::Condition;

/// Growth parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartConfig {
    /// Nodes with fewer samples become leaves. The minimum (and default)
    /// is 2; the tree is otherwise unpruned.
    pub min_samples_split: usize,
    /// Number of features drawn (without replacement) as candidates at
    /// each node. `None` considers every feature everywhere.
    pub feature_subset: Option<usize>,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig {
            min_samples_split: 2,
            feature_subset: None,
        }
    }
}

/// One tree node; leaves keep their training class counts so that
/// probabilities and importances can be recovered from the stored tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node<F> {
    Leaf {
        /// Training samples per class, indexed by [`Condition::class_index`].
        class_counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: F,
        left: Box<Node<F>>,
        right: Box<Node<F>>,
    },
}

/// A fitted classification tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<F> {
    n_features: usize,
    root: Node<F>,
}

/// Gini impurity of a two-class count vector.
///
/// The operation order is part of the contract: start from 1, subtract
/// the squared healthy share, subtract the squared faulty share. Keeping
/// one order everywhere makes independently computed gains comparable
/// with `==` rather than a tolerance.
fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    let h = counts[0] as f64 / n;
    let f = counts[1] as f64 / n;
    1.0 - h * h - f * f
}

/// Gain of a split, evaluated as `(parent - weighted_left) - weighted_right`.
fn split_gain(parent: f64, counts_l: [usize; 2], counts_r: [usize; 2]) -> f64 {
    let nl = (counts_l[0] + counts_l[1]) as f64;
    let nr = (counts_r[0] + counts_r[1]) as f64;
    let n = nl + nr;
    (parent - (nl / n) * gini(counts_l)) - (nr / n) * gini(counts_r)
}

/// Midpoint threshold between two consecutive distinct values.
///
/// Computed as `lo + (hi - lo) / 2`; if rounding pushes the midpoint up to
/// `hi` (adjacent floats), the threshold falls back to `lo` so that `<=`
/// still separates the pair.
fn midpoint<F: Scalar>(lo: F, hi: F) -> F {
    let mut mid = lo + (hi - lo) / F::from_f64_lossy(2.0);
    if !(mid < hi) {
        mid = lo;
    }
    mid
}

struct BestSplit<F> {
    feature: usize,
    threshold: F,
    gain: f64,
}

/// Scans one feature's candidate thresholds, updating `best` in place.
/// `pairs` is scratch space reused across calls.
fn scan_feature<F: Scalar>(
    dataset: &Dataset<F>,
    indices: &[usize],
    feature: usize,
    parent: f64,
    total: [usize; 2],
    best: &mut Option<BestSplit<F>>,
    pairs: &mut Vec<(F, Condition)>,
) {
    pairs.clear();
    pairs.extend(
        indices
            .iter()
            .map(|&i| (dataset.row(i)[feature], dataset.label(i))),
    );
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature value"));

    let mut left = [0usize; 2];
    for k in 0..pairs.len() - 1 {
        left[pairs[k].1.class_index()] += 1;
        let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
        if !(lo < hi) {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let gain = split_gain(parent, left, right);
        let better = match best {
            Some(b) => gain > b.gain,
            None => gain > 0.0,
        };
        if better {
            *best = Some(BestSplit {
                feature,
                threshold: midpoint(lo, hi),
                gain,
            });
        }
    }
}

fn count_labels<F: Scalar>(dataset: &Dataset<F>, indices: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &i in indices {
        counts[dataset.label(i).class_index()] += 1;
    }
    counts
}

fn grow<F: Scalar, R: Rng + ?Sized>(
    dataset: &Dataset<F>,
    indices: Vec<usize>,
    cfg: &CartConfig,
    rng: &mut R,
    pairs: &mut Vec<(F, Condition)>,
) -> Node<F> {
    let counts = count_labels(dataset, &indices);
    if counts[0] == 0 || counts[1] == 0 || indices.len() < cfg.min_samples_split {
        return Node::Leaf {
            class_counts: counts,
        };
    }

    let parent = gini(counts);
    let mut best: Option<BestSplit<F>> = None;
    match cfg.feature_subset {
        Some(m) => {
            // Drawn before the children grow; sorted so that the scan
            // order (and therefore tie-breaking) matches the full scan.
            let mut chosen = rand::seq::index::sample(rng, dataset.n_features(), m).into_vec();
            chosen.sort_unstable();
            for feature in chosen {
                scan_feature(dataset, &indices, feature, parent, counts, &mut best, pairs);
            }
        }
        None => {
            for feature in 0..dataset.n_features() {
                scan_feature(dataset, &indices, feature, parent, counts, &mut best, pairs);
            }
        }
    }

    let Some(split) = best else {
        return Node::Leaf {
            class_counts: counts,
        };
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| dataset.row(i)[split.feature] <= split.threshold);
    debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

    let left = grow(dataset, left_idx, cfg, rng, pairs);
    let right = grow(dataset, right_idx, cfg, rng, pairs);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

impl<F: Scalar> DecisionTree<F> {
    /// Grows a tree on the whole dataset.
    ///
    /// The RNG is consumed only when `cfg.feature_subset` is set, one draw
    /// per internal node, in preorder (node, then left subtree, then
    /// right).
    pub fn fit<R: Rng + ?Sized>(
        dataset: &Dataset<F>,
        cfg: &CartConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if cfg.min_samples_split < 2 {
            return Err(Error::InvalidConfig(
                "min_samples_split must be at least 2".to_string(),
            ));
        }
        if let Some(m) = cfg.feature_subset {
            if m == 0 || m > dataset.n_features() {
                return Err(Error::InvalidConfig(format!(
                    "feature_subset must lie in 1..={}, got {m}",
                    dataset.n_features()
                )));
            }
        }
        let indices: Vec<usize> = (0..dataset.len()).collect();
        let mut pairs = Vec::with_capacity(dataset.len());
        let root = grow(dataset, indices, cfg, rng, &mut pairs);
        Ok(DecisionTree {
            n_features: dataset.n_features(),
            root,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn leaf_for(&self, x: &[F]) -> Result<&[usize; 2]> {
        if x.len() != self.n_features {
            return Err(Error::FeatureArity {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class_counts } => return Ok(class_counts),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Fraction of faulty training samples in the leaf `x` falls into.
    pub fn probability(&self, x: &[F]) -> Result<f64> {
        let counts = self.leaf_for(x)?;
        Ok(counts[1] as f64 / (counts[0] + counts[1]) as f64)
    }

    /// Majority class of the leaf `x` falls into; an exact tie reads as
    /// faulty, erring on the side of flagging a machine.
    pub fn predict(&self, x: &[F]) -> Result<Condition> {
        let counts = self.leaf_for(x)?;
        Ok(if counts[0] > counts[1] {
            Condition::Healthy
        } else {
            Condition::Faulty
        })
    }

    /// Impurity-based feature importances, recovered from the stored tree.
    ///
    /// Each internal node contributes its gain weighted by the fraction of
    /// training samples that reached it. The vector is normalised to sum
    /// to 1; a tree with no splits returns all zeros.
    pub fn importances(&self) -> Vec<f64> {
        fn walk<F: Scalar>(node: &Node<F>, n_root: f64, acc: &mut [f64]) -> [usize; 2] {
            match node {
                Node::Leaf { class_counts } => *class_counts,
                Node::Split {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    let cl = walk(left, n_root, acc);
                    let cr = walk(right, n_root, acc);
                    let counts = [cl[0] + cr[0], cl[1] + cr[1]];
                    let n = (counts[0] + counts[1]) as f64;
                    acc[*feature] += (n / n_root) * split_gain(gini(counts), cl, cr);
                    counts
                }
            }
        }

        fn node_counts<F>(node: &Node<F>) -> [usize; 2] {
            match node {
                Node::Leaf { class_counts } => *class_counts,
                Node::Split { left, right, .. } => {
                    let l = node_counts(left);
                    let r = node_counts(right);
                    [l[0] + r[0], l[1] + r[1]]
                }
            }
        }

        let mut acc = vec![0.0; self.n_features];
        let root_counts = node_counts(&self.root);
        let n_root = (root_counts[0] + root_counts[1]) as f64;
        walk(&self.root, n_root, &mut acc);
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            for v in &mut acc {
                *v /= total;
            }
        }
        acc
    }

    /// Number of leaves; useful for sanity checks and reporting.
    pub fn leaf_count(&self) -> usize {
        fn count<F>(node: &Node<F>) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => count(left) + count(right),
            }
        }
        count(&self.root)
    }

    pub fn root(&self) -> &Node<F> {
        &self.root
    }
}
