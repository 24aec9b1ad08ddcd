//! The acceptance gate: ten go/no-go checks covering the whole pipeline,
//! run as one test so the verdicts print as a single block (use
//! `cargo test --test acceptance -- --nocapture` to see every line).
//!
//! Each check returns `Ok(detail)` or `Err(reason)`; the gate prints one
//! PASS/FAIL line per check and fails if any check failed. Checks that
//! need the reference corpus (320 records from the default generator at
//! a pinned seed) share one copy of it.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use rotorbar_core::baselines::{self, ridge, ClassifierSpec, ModelSpec, TrainedModel};
use rotorbar_core::baselines::logistic::objective_and_gradient;
use rotorbar_core::baselines::naive_bayes;
use rotorbar_core::baselines::standardize::Standardizer;
use rotorbar_core::cart::{CartConfig, DecisionTree, Node};
use rotorbar_core::dataset::{extract_dataset, Dataset, RowMeta};
use rotorbar_core::eval::{self, CellOutcome, EvalPlan, EvalReport, FeatureSubset};
use rotorbar_core::features::{self, FEATURE_NAMES};
use rotorbar_core::forest::{ForestConfig, RandomForest};
use rotorbar_core::io;
use rotorbar_core::seeding;
use rotorbar_core::signals::{generate_dataset, ANALYSIS_PERIODS};
use rotorbar_core::{Condition, GeneratorConfig64, Load};

/// Seed of the shared reference corpus; every corpus-dependent check uses
/// the same one so their verdicts describe one dataset.
const MASTER_SEED: u64 = 7;
const TRIALS_PER_CELL: u32 = 40;

type Check = Result<String, String>;

fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

#[test]
fn acceptance_gate() {
    let mut results: Vec<(usize, &'static str, Check)> = Vec::new();

    results.push((1, "features match a straight-line oracle", feature_oracle_check()));
    results.push((3, "pure-sine asymptotics", sine_asymptotics_check()));
    results.push((4, "tree splits match exhaustive search", brute_force_check()));
    results.push((8, "end-to-end determinism", determinism_check()));

    let (corpus_verdict, corpus) = corpus_check();
    results.push((5, "forest behaviour on the reference corpus", corpus_verdict));
    match &corpus {
        Some((dataset, report)) => {
            results.push((2, "feature identities", identities_check(dataset)));
            results.push((6, "forest leads the baselines", baseline_check(report)));
            results.push((7, "label-permutation null", permutation_check(dataset)));
            results.push((9, "solver numerics", numerics_check(dataset)));
            results.push((10, "out-of-bag accounting", oob_check(dataset, report)));
        }
        None => {
            for (number, name) in [
                (2, "feature identities"),
                (6, "forest leads the baselines"),
                (7, "label-permutation null"),
                (9, "solver numerics"),
                (10, "out-of-bag accounting"),
            ] {
                results.push((number, name, Err("reference corpus unavailable".into())));
            }
        }
    }

    results.sort_by_key(|r| r.0);
    let mut failures = Vec::new();
    for (number, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {number:>2}  {name}: {detail}"),
            Err(reason) => {
                println!("FAIL {number:>2}  {name}: {reason}");
                failures.push(*number);
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance checks {failures:?} failed; rerun with --nocapture for the verdict lines"
    );
}

/// 1: all thirteen features plus the standard deviation agree with an
/// independent one-pass-per-quantity oracle on 100 random sequences.
fn feature_oracle_check() -> Check {
    let start = Instant::now();
    let tol = 1e-9;
    let mut rng = seeding::rng(0xfeed);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = match case {
            0 => 3,
            1 => 4,
            2 => 5,
            _ => rng.random_range(3..=5000),
        };
        // asymmetric support keeps the mean, skewness, and peak family
        // away from the trivial zero cases
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 1.5).collect();

        let lib = features::extract(&x).map_err(|e| format!("case {case}: {e}"))?.as_array();
        let lib_sigma = features::std_dev(&x).map_err(|e| format!("case {case}: {e}"))?;
        let (oracle, oracle_sigma) = oracle_features(&x);

        for (f, (&got, want)) in lib.iter().zip(oracle).enumerate() {
            let err = rel_err(got, want);
            worst = worst.max(err);
            if err > tol {
                return Err(format!(
                    "case {case} ({n} samples): {} differs, {got} vs oracle {want} (rel {err:.2e})",
                    FEATURE_NAMES[f]
                ));
            }
        }
        let sigma_err = rel_err(lib_sigma, oracle_sigma);
        worst = worst.max(sigma_err);
        if sigma_err > tol {
            return Err(format!(
                "case {case}: sigma differs, {lib_sigma} vs oracle {oracle_sigma}"
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        return Err(format!("took {:.2}s, budget 5s", elapsed.as_secs_f64()));
    }
    Ok(format!(
        "100 sequences (3..=5000 samples), worst rel err {worst:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

/// Straight-line reference: every quantity from its own loop, no shared
/// profile struct, naive left-to-right sums.
fn oracle_features(x: &[f64]) -> ([f64; 13], f64) {
    let n = x.len() as f64;
    let mut sum = 0.0;
    for &v in x {
        sum += v;
    }
    let mean = sum / n;
    let mut sum_abs = 0.0;
    for &v in x {
        sum_abs += v.abs();
    }
    let mean_abs = sum_abs / n;
    let mut sum_root = 0.0;
    for &v in x {
        sum_root += v.abs().sqrt();
    }
    let mean_root = sum_root / n;
    let mut sum_sq = 0.0;
    for &v in x {
        sum_sq += v * v;
    }
    let mut max = f64::NEG_INFINITY;
    for &v in x {
        max = max.max(v);
    }
    let mut min = f64::INFINITY;
    for &v in x {
        min = min.min(v);
    }
    let max_abs = max.abs().max(min.abs());
    let rms = (sum_sq / n).sqrt();
    let mut m2 = 0.0;
    for &v in x {
        m2 += (v - mean) * (v - mean);
    }
    m2 /= n;
    let mut m3 = 0.0;
    for &v in x {
        m3 += (v - mean) * (v - mean) * (v - mean);
    }
    m3 /= n;
    let mut m4 = 0.0;
    for &v in x {
        m4 += (v - mean) * (v - mean) * (v - mean) * (v - mean);
    }
    m4 /= n;
    let sigma = m2.sqrt();
    let values = [
        mean,
        rms,
        sum_sq.sqrt(),
        max - min,
        sum_sq,
        rms / mean_abs,
        max_abs / mean_abs,
        max_abs / rms,
        max_abs / (mean_root * mean_root),
        (max * max) / (rms * rms),
        m2 * n / (n - 1.0),
        m3 / (sigma * sigma * sigma),
        m4 / (sigma * sigma * sigma * sigma),
    ];
    (values, sigma)
}

/// 2: impulsion = shape x crest and rss^2 = energy on every corpus row,
/// and the peak-ratio chain crest <= impulsion <= margin never inverts.
fn identities_check(dataset: &Dataset<f64>) -> Check {
    let col = |name: &str| {
        dataset
            .feature_index(name)
            .ok_or_else(|| format!("column {name} missing"))
    };
    let shape = col("shape_factor")?;
    let imp = col("impulsion")?;
    let crest = col("crest_factor")?;
    let margin = col("margin_factor")?;
    let rss = col("rss")?;
    let energy = col("energy")?;
    for i in 0..dataset.len() {
        let r = dataset.row(i);
        let product_err = rel_err(r[imp], r[shape] * r[crest]);
        if product_err > 1e-12 {
            return Err(format!(
                "row {i}: impulsion {} vs shape*crest {} (rel {product_err:.2e})",
                r[imp],
                r[shape] * r[crest]
            ));
        }
        let square_err = rel_err(r[rss] * r[rss], r[energy]);
        if square_err > 1e-12 {
            return Err(format!("row {i}: rss^2 vs energy off by rel {square_err:.2e}"));
        }
        if !(r[crest] <= r[imp] && r[imp] <= r[margin]) {
            return Err(format!(
                "row {i}: peak-ratio chain inverted, crest {} impulsion {} margin {}",
                r[crest], r[imp], r[margin]
            ));
        }
    }
    Ok(format!(
        "both identities within 1e-12 and the peak-ratio chain ordered on all {} rows",
        dataset.len()
    ))
}

/// 3: a clean sine has crest factor sqrt(2) and kurtosis 3/2.
fn sine_asymptotics_check() -> Check {
    let x: Vec<f64> = (0..4000)
        .map(|k| (2.0 * PI * 50.0 * k as f64 / 5000.0).sin())
        .collect();
    let fv = features::extract(&x).map_err(|e| e.to_string())?;
    let crest_gap = (fv.crest_factor - 2.0f64.sqrt()).abs();
    let kurtosis_gap = (fv.kurtosis - 1.5).abs();
    if crest_gap > 1e-2 {
        return Err(format!(
            "crest factor {} is {crest_gap:.2e} from sqrt(2)",
            fv.crest_factor
        ));
    }
    if kurtosis_gap > 1e-2 {
        return Err(format!(
            "kurtosis {} is {kurtosis_gap:.2e} from 1.5",
            fv.kurtosis
        ));
    }
    Ok(format!(
        "40 periods at 5 kHz: crest off by {crest_gap:.1e}, kurtosis off by {kurtosis_gap:.1e}"
    ))
}

/// 4: on twenty small random datasets, every internal node of a grown
/// tree carries exactly the split an exhaustive scan would pick, under
/// the documented tie-break (lowest feature index, then lowest
/// threshold), and every leaf's class counts match its row partition.
fn brute_force_check() -> Check {
    let start = Instant::now();
    let mut rng = seeding::rng(41);
    let mut nodes_checked = 0usize;
    for case in 0..20 {
        let n = rng.random_range(8..=50);
        let p = rng.random_range(1..=3);
        // every other dataset snaps values to a coarse grid so that
        // repeated values and equal-gain ties actually occur
        let coarse = case % 2 == 0;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..p)
                .map(|_| {
                    if coarse {
                        rng.random_range(0..8) as f64 * 0.5 - 2.0
                    } else {
                        rng.random::<f64>() * 4.0 - 2.0
                    }
                })
                .collect();
            rows.push(row);
        }
        let mut labels: Vec<Condition> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.5 {
                    Condition::Healthy
                } else {
                    Condition::Faulty
                }
            })
            .collect();
        labels[0] = Condition::Healthy;
        labels[1] = Condition::Faulty;
        let meta: Vec<RowMeta> = (0..n)
            .map(|i| RowMeta {
                trial_id: i as u32,
                load: Load::L0,
            })
            .collect();
        let names: Vec<String> = (0..p).map(|j| format!("f{j}")).collect();
        let dataset = Dataset::from_parts(names, rows, labels, meta)
            .map_err(|e| format!("case {case}: {e}"))?;

        let tree = DecisionTree::fit(&dataset, &CartConfig::default(), &mut rng)
            .map_err(|e| format!("case {case}: {e}"))?;
        let indices: Vec<usize> = (0..dataset.len()).collect();
        verify_node(tree.root(), &dataset, indices, &mut nodes_checked)
            .map_err(|e| format!("case {case}: {e}"))?;
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {:.2}s, budget 10s", elapsed.as_secs_f64()));
    }
    Ok(format!(
        "20 datasets, {nodes_checked} internal nodes all match, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

struct OracleSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Exhaustive best split over all features and all candidate midpoints,
/// replicating the library's arithmetic order so equal gains compare
/// with `==` and the first maximal candidate wins.
fn oracle_split(dataset: &Dataset<f64>, indices: &[usize]) -> Option<OracleSplit> {
    let mut total = [0usize; 2];
    for &i in indices {
        total[dataset.label(i).class_index()] += 1;
    }
    if total[0] == 0 || total[1] == 0 || indices.len() < 2 {
        return None;
    }
    let gini = |counts: [usize; 2]| {
        let n = (counts[0] + counts[1]) as f64;
        let h = counts[0] as f64 / n;
        let f = counts[1] as f64 / n;
        1.0 - h * h - f * f
    };
    let parent = gini(total);
    let mut best: Option<OracleSplit> = None;
    for feature in 0..dataset.n_features() {
        let mut pairs: Vec<(f64, Condition)> = indices
            .iter()
            .map(|&i| (dataset.row(i)[feature], dataset.label(i)))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
        let mut left = [0usize; 2];
        for k in 0..pairs.len() - 1 {
            left[pairs[k].1.class_index()] += 1;
            let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
            if !(lo < hi) {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (left[0] + left[1]) as f64;
            let nr = (right[0] + right[1]) as f64;
            let n = nl + nr;
            let gain = (parent - (nl / n) * gini(left)) - (nr / n) * gini(right);
            let better = match &best {
                Some(b) => gain > b.gain,
                None => gain > 0.0,
            };
            if better {
                let mut mid = lo + (hi - lo) / 2.0;
                if !(mid < hi) {
                    mid = lo;
                }
                best = Some(OracleSplit {
                    feature,
                    threshold: mid,
                    gain,
                });
            }
        }
    }
    best
}

fn verify_node(
    node: &Node<f64>,
    dataset: &Dataset<f64>,
    indices: Vec<usize>,
    checked: &mut usize,
) -> Result<(), String> {
    let mut counts = [0usize; 2];
    for &i in &indices {
        counts[dataset.label(i).class_index()] += 1;
    }
    let oracle = oracle_split(dataset, &indices);
    match node {
        Node::Leaf { class_counts } => {
            if let Some(o) = oracle {
                return Err(format!(
                    "leaf over {} rows, but a split on f{} at {} gains {:.6}",
                    indices.len(),
                    o.feature,
                    o.threshold,
                    o.gain
                ));
            }
            if *class_counts != counts {
                return Err(format!(
                    "leaf counts {class_counts:?} disagree with the partition {counts:?}"
                ));
            }
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let Some(o) = oracle else {
                return Err(format!(
                    "tree split a node of {} rows the oracle cannot split",
                    indices.len()
                ));
            };
            if *feature != o.feature || *threshold != o.threshold {
                return Err(format!(
                    "split mismatch over {} rows: tree (f{feature}, {threshold}) vs oracle (f{}, {})",
                    indices.len(),
                    o.feature,
                    o.threshold
                ));
            }
            *checked += 1;
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .into_iter()
                .partition(|&i| dataset.row(i)[*feature] <= *threshold);
            verify_node(left, dataset, left_idx, checked)?;
            verify_node(right, dataset, right_idx, checked)?;
        }
    }
    Ok(())
}

/// 5: builds the reference corpus and the default evaluation grid, then
/// checks the headline forest behaviour: strong 100-tree AUC, stability
/// across ensemble sizes, a two-feature subset that keeps up with all
/// thirteen, and a selection that lands on {mean_index, impulsion} in at
/// least 8 of 10 seeds. Everything must finish inside two minutes.
fn corpus_check() -> (Check, Option<(Dataset<f64>, EvalReport)>) {
    let start = Instant::now();
    let built: Result<(Dataset<f64>, EvalReport), String> = (|| {
        let config = GeneratorConfig64::default();
        let records = generate_dataset(&config, TRIALS_PER_CELL, MASTER_SEED)
            .map_err(|e| e.to_string())?;
        let extraction =
            extract_dataset(&records, ANALYSIS_PERIODS).map_err(|e| e.to_string())?;
        if !extraction.failures.is_empty() {
            return Err(format!(
                "{} records failed feature extraction",
                extraction.failures.len()
            ));
        }
        let report = eval::run_plan(&EvalPlan::with_seed(MASTER_SEED), &extraction.dataset)
            .map_err(|e| e.to_string())?;
        Ok((extraction.dataset, report))
    })();
    let (dataset, report) = match built {
        Ok(v) => v,
        Err(e) => return (Err(e), None),
    };

    let verdict = (|| {
        if dataset.len() != 320 {
            return Err(format!("expected 320 rows, got {}", dataset.len()));
        }
        let auc = |n_trees: usize, subset: &str| -> Result<f64, String> {
            let cell = report
                .forest_cells
                .iter()
                .find(|c| c.n_trees == n_trees && c.subset == subset)
                .ok_or_else(|| format!("no cell for {n_trees} trees on {subset}"))?;
            match &cell.outcome {
                CellOutcome::Ok(m) => Ok(m.auc_mean),
                CellOutcome::Failed { error } => Err(format!("cell {} failed: {error}", cell.label())),
            }
        };

        let auc_100 = auc(100, "all13")?;
        if auc_100 < 0.95 {
            return Err(format!("100-tree cross-validated AUC {auc_100:.4} < 0.95"));
        }

        let ladder: Vec<f64> = [10, 100, 200, 500, 1000]
            .iter()
            .map(|&t| auc(t, "all13"))
            .collect::<Result<_, _>>()?;
        let hi = ladder.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ladder.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi - lo > 0.02 {
            return Err(format!(
                "AUC swings {:.4} across the tree ladder (limit 0.02)",
                hi - lo
            ));
        }

        let auc_top2 = auc(100, "top2")?;
        let gap = (auc_top2 - auc_100).abs();
        if gap > 0.02 {
            return Err(format!(
                "two-feature subset AUC {auc_top2:.4} is {gap:.4} from all-features {auc_100:.4}"
            ));
        }

        let wanted: BTreeSet<&str> = ["mean_index", "impulsion"].into();
        let mut hits = 0;
        for seed in 0..10 {
            let picked =
                eval::select_features(&dataset, 2, seed).map_err(|e| e.to_string())?;
            let set: BTreeSet<&str> = picked.iter().map(String::as_str).collect();
            if set == wanted {
                hits += 1;
            }
        }
        if hits < 8 {
            return Err(format!(
                "top-2 selection found {{mean_index, impulsion}} in only {hits}/10 seeds"
            ));
        }

        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(120) {
            return Err(format!("took {:.1}s, budget 120s", elapsed.as_secs_f64()));
        }
        Ok(format!(
            "AUC {auc_100:.4} at 100 trees, ladder range {:.4}, top-2 gap {gap:.4}, selection {hits}/10, {:.1}s",
            hi - lo,
            elapsed.as_secs_f64()
        ))
    })();
    (verdict, Some((dataset, report)))
}

/// 6: the forest's mean AUC concedes at most 0.01 to any reference
/// classifier, and all six models clear 0.90.
fn baseline_check(report: &EvalReport) -> Check {
    let forest_cell = report
        .forest_cells
        .iter()
        .find(|c| c.n_trees == 100 && c.subset == "all13")
        .ok_or("no 100-tree all-feature cell")?;
    let forest_auc = match &forest_cell.outcome {
        CellOutcome::Ok(m) => m.auc_mean,
        CellOutcome::Failed { error } => return Err(format!("forest cell failed: {error}")),
    };
    if forest_auc < 0.90 {
        return Err(format!("forest AUC {forest_auc:.4} < 0.90"));
    }
    let mut seen = 0;
    let mut weakest: Option<(String, f64)> = None;
    for cell in report
        .classifier_cells
        .iter()
        .filter(|c| c.subset == "all13")
    {
        let auc = match &cell.outcome {
            CellOutcome::Ok(m) => m.auc_mean,
            CellOutcome::Failed { error } => {
                return Err(format!("cell {} failed: {error}", cell.label()))
            }
        };
        seen += 1;
        if auc < 0.90 {
            return Err(format!("{} AUC {auc:.4} < 0.90", cell.classifier));
        }
        if forest_auc < auc - 0.01 {
            return Err(format!(
                "forest {forest_auc:.4} trails {} at {auc:.4} by more than 0.01",
                cell.classifier
            ));
        }
        if weakest.as_ref().is_none_or(|(_, w)| auc < *w) {
            weakest = Some((cell.classifier.clone(), auc));
        }
    }
    if seen != 5 {
        return Err(format!("expected 5 reference classifiers, saw {seen}"));
    }
    let (weak_name, weak_auc) = weakest.expect("five cells seen");
    Ok(format!(
        "forest AUC {forest_auc:.4}; all five baselines within reach, weakest {weak_name} at {weak_auc:.4}"
    ))
}

/// 7: with labels shuffled the forest must score like a coin flip; a
/// cross-validated AUC far from 1/2 would mean information leaks between
/// folds or labels leak into features.
fn permutation_check(dataset: &Dataset<f64>) -> Check {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for shuffle in 0..10u64 {
        let mut labels = dataset.labels().to_vec();
        let mut rng = seeding::rng(0xad0be + shuffle);
        labels.shuffle(&mut rng);
        let permuted = Dataset::from_parts(
            dataset.feature_names().to_vec(),
            dataset.rows().to_vec(),
            labels,
            dataset.meta().to_vec(),
        )
        .map_err(|e| e.to_string())?;

        let mut plan = EvalPlan::with_seed(shuffle);
        plan.classifiers.clear();
        plan.tree_counts = vec![100];
        plan.feature_subsets = vec![FeatureSubset::new("all13", &FEATURE_NAMES)];
        let report = eval::run_plan(&plan, &permuted).map_err(|e| e.to_string())?;
        let cell = &report.forest_cells[0];
        let auc = match &cell.outcome {
            CellOutcome::Ok(m) => m.auc_mean,
            CellOutcome::Failed { error } => {
                return Err(format!("shuffle {shuffle}: cell failed: {error}"))
            }
        };
        if !(0.3..=0.7).contains(&auc) {
            return Err(format!("shuffle {shuffle}: AUC {auc:.4} outside [0.3, 0.7]"));
        }
        lo = lo.min(auc);
        hi = hi.max(auc);
    }
    Ok(format!("10 shuffles, AUC spanned [{lo:.3}, {hi:.3}]"))
}

/// 8: the same seeds give byte-identical artifacts end to end, and a
/// saved model survives JSON unchanged.
fn determinism_check() -> Check {
    let one_run = || -> Result<(Vec<u8>, Vec<u8>, Dataset<f64>), String> {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config = GeneratorConfig64::default();
        let records = generate_dataset(&config, 4, 3).map_err(|e| e.to_string())?;
        io::write_dataset(tmp.path(), &config, 3, &records).map_err(|e| e.to_string())?;
        let back = io::read_dataset::<f64>(&tmp.path().join(io::MANIFEST_FILE))
            .map_err(|e| e.to_string())?;
        let extraction = extract_dataset(&back, ANALYSIS_PERIODS).map_err(|e| e.to_string())?;
        if !extraction.failures.is_empty() {
            return Err("records failed extraction".into());
        }
        let features_path = tmp.path().join("features.csv");
        io::write_features_csv(&features_path, &extraction.dataset)
            .map_err(|e| e.to_string())?;
        let dataset = io::read_features_csv::<f64>(&features_path).map_err(|e| e.to_string())?;

        let mut plan = EvalPlan::with_seed(3);
        plan.tree_counts = vec![10, 100];
        let report = eval::run_plan(&plan, &dataset).map_err(|e| e.to_string())?;
        let report_path = tmp.path().join("report.json");
        io::save_json(&report_path, &report).map_err(|e| e.to_string())?;

        let report_bytes = fs::read(&report_path).map_err(|e| e.to_string())?;
        let manifest_bytes =
            fs::read(tmp.path().join(io::MANIFEST_FILE)).map_err(|e| e.to_string())?;
        Ok((report_bytes, manifest_bytes, dataset))
    };

    let (report_a, manifest_a, dataset) = one_run()?;
    let (report_b, manifest_b, _) = one_run()?;
    if manifest_a != manifest_b {
        return Err("manifests differ between identical runs".into());
    }
    if report_a != report_b {
        return Err("reports differ between identical runs".into());
    }

    // model round-trip: save, load, save again; bytes and scores agree
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let forest = RandomForest::fit(
        &dataset,
        &ForestConfig {
            n_trees: 50,
            rng_seed: 3,
            ..ForestConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let saved = io::SavedModel::Forest(forest);
    let first = tmp.path().join("model.json");
    let second = tmp.path().join("model2.json");
    io::save_model(&first, &saved).map_err(|e| e.to_string())?;
    let loaded = io::load_model(&first).map_err(|e| e.to_string())?;
    io::save_model(&second, &loaded).map_err(|e| e.to_string())?;
    let bytes_a = fs::read(&first).map_err(|e| e.to_string())?;
    let bytes_b = fs::read(&second).map_err(|e| e.to_string())?;
    if bytes_a != bytes_b {
        return Err("model JSON changed across a save/load/save cycle".into());
    }
    for i in 0..dataset.len() {
        let row = dataset.row(i);
        let a = saved.score(row).map_err(|e| e.to_string())?;
        let b = loaded.score(row).map_err(|e| e.to_string())?;
        if a.to_bits() != b.to_bits() {
            return Err(format!("row {i}: reloaded model scores {b}, original {a}"));
        }
    }
    Ok(format!(
        "reports byte-identical across runs ({} bytes); model JSON round-trip lossless",
        report_a.len()
    ))
}

/// 9: the optimisers actually solved their stated problems: the logistic
/// gradient matches central differences, the ridge solution satisfies
/// its normal equations, every SVM training point satisfies the KKT
/// conditions within tolerance, and a constant feature cannot produce a
/// non-finite naive-Bayes score.
fn numerics_check(dataset: &Dataset<f64>) -> Check {
    // logistic: analytic gradient vs central differences at random points
    let mut rng = seeding::rng(99);
    let n = 40;
    let p = 5;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
        .collect();
    let targets: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() < 0.5 { 0.0 } else { 1.0 })
        .collect();
    let l2 = 0.7;
    let mut worst_grad = 0.0f64;
    for _ in 0..3 {
        let weights: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let bias = rng.random::<f64>() - 0.5;
        let (_, grad_w, grad_b) = objective_and_gradient(&rows, &targets, &weights, bias, l2);
        let objective = |w: &[f64], b: f64| objective_and_gradient(&rows, &targets, w, b, l2).0;
        for j in 0..=p {
            let analytic = if j < p { grad_w[j] } else { grad_b };
            let theta = if j < p { weights[j] } else { bias };
            let h = 1e-5 * (1.0 + theta.abs());
            let mut plus = weights.clone();
            let mut minus = weights.clone();
            let (bp, bm) = if j < p {
                plus[j] += h;
                minus[j] -= h;
                (bias, bias)
            } else {
                (bias + h, bias - h)
            };
            let numeric = (objective(&plus, bp) - objective(&minus, bm)) / (2.0 * h);
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-2);
            worst_grad = worst_grad.max(err);
            if err > 1e-5 {
                return Err(format!(
                    "logistic gradient component {j}: analytic {analytic} vs numeric {numeric} (rel {err:.2e})"
                ));
            }
        }
    }

    // ridge: substitute the trained solution back into its normal equations
    let spec = ClassifierSpec::standard(ModelSpec::default_ridge());
    let trained = baselines::train(&spec, dataset).map_err(|e| e.to_string())?;
    let TrainedModel::Ridge(ridge_model) = trained.model() else {
        return Err("ridge training returned the wrong model kind".into());
    };
    let ModelSpec::Ridge {
        regularization_strength,
    } = spec.model
    else {
        unreachable!("spec built as ridge");
    };
    let standardizer = Standardizer::fit(dataset.rows());
    let standardized = standardizer.apply_all(dataset.rows());
    let (a, rhs) = ridge::normal_equations(&standardized, dataset.labels(), regularization_strength);
    let mut beta = ridge_model.weights.clone();
    beta.push(ridge_model.bias);
    let mut residual = 0.0f64;
    for j in 0..rhs.len() {
        let lhs: f64 = a[j].iter().zip(&beta).map(|(x, y)| x * y).sum();
        residual = residual.max((lhs - rhs[j]).abs());
    }
    if residual > 1e-8 {
        return Err(format!("ridge normal-equation residual {residual:.2e} > 1e-8"));
    }

    // svm: every training point within smo_tol of its KKT condition
    let spec = ClassifierSpec::standard(ModelSpec::default_svm_rbf());
    let trained = baselines::train(&spec, dataset).map_err(|e| e.to_string())?;
    let TrainedModel::SvmRbf(svm_model) = trained.model() else {
        return Err("svm training returned the wrong model kind".into());
    };
    let violation = svm_model.max_kkt_violation();
    if violation > svm_model.smo_tol {
        return Err(format!(
            "svm KKT violation {violation:.2e} exceeds smo_tol {:.2e}",
            svm_model.smo_tol
        ));
    }

    // naive Bayes: a constant column must not produce non-finite scores
    let mut rows = dataset.rows().to_vec();
    for row in &mut rows {
        row[0] = 1.25;
    }
    let nb = naive_bayes::fit(&rows, dataset.labels()).map_err(|e| e.to_string())?;
    for (i, row) in rows.iter().enumerate() {
        let score = nb.score(row);
        if !score.is_finite() {
            return Err(format!("row {i}: naive-Bayes score {score} on a constant feature"));
        }
    }

    Ok(format!(
        "gradient rel err {worst_grad:.1e}, ridge residual {residual:.1e}, svm KKT within {:.0e}, nb scores finite",
        svm_model.smo_tol
    ))
}

/// 10: bootstrap accounting: the out-of-bag fraction sits near exp(-1)
/// at 256 rows, and the OOB error agrees with cross-validation.
fn oob_check(dataset: &Dataset<f64>, report: &EvalReport) -> Check {
    let indices: Vec<usize> = (0..256).collect();
    let subset = dataset.subset_rows(&indices);
    let small = RandomForest::fit(
        &subset,
        &ForestConfig {
            rng_seed: MASTER_SEED,
            ..ForestConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let fraction = small.oob().mean_oob_fraction;
    if !(0.30..=0.44).contains(&fraction) {
        return Err(format!("OOB fraction {fraction:.4} outside [0.30, 0.44] at 256 rows"));
    }

    let full = RandomForest::fit(
        dataset,
        &ForestConfig {
            rng_seed: MASTER_SEED,
            ..ForestConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let oob_error = full
        .oob()
        .error
        .ok_or("no row was ever out of bag at 100 trees")?;
    let cell = report
        .forest_cells
        .iter()
        .find(|c| c.n_trees == 100 && c.subset == "all13")
        .ok_or("no 100-tree all-feature cell")?;
    let cv_error = match &cell.outcome {
        CellOutcome::Ok(m) => 1.0 - m.accuracy_mean,
        CellOutcome::Failed { error } => return Err(format!("forest cell failed: {error}")),
    };
    let gap = (oob_error - cv_error).abs();
    if gap > 0.05 {
        return Err(format!(
            "OOB error {oob_error:.4} vs cross-validated error {cv_error:.4}: gap {gap:.4} > 0.05"
        ));
    }
    Ok(format!(
        "OOB fraction {fraction:.4}; OOB error {oob_error:.4} within {gap:.4} of CV error {cv_error:.4}"
    ))
}
