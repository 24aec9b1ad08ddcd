//! Renderers turning an [`EvalReport`](crate::eval::EvalReport) into
//! aligned text tables and CSV extracts.
//!
//! Two table shapes cover the study write-up: the forest sweep (ensemble
//! sizes down the side, feature subsets across the top, accuracy in the
//! cells) and the classifier comparison (models down the side, subsets
//! across the top, AUC in the cells). Every renderer is a pure function
//! of the report, so rendering never perturbs determinism guarantees.

use std::fmt::Write as _;

use crate::eval::{CellMetrics, CellOutcome, CellScores, EvalReport};

/// Left-aligns each column to its widest entry, two spaces between
/// columns, no trailing spaces.
fn render_columns(rows: &[Vec<String>]) -> String {
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; n_cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            let _ = write!(line, "{:<width$}", cell, width = widths[i]);
            if i + 1 < row.len() {
                line.push_str("  ");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn metric_text(outcome: &CellOutcome, pick: impl Fn(&CellMetrics) -> (f64, f64)) -> String {
    match outcome {
        CellOutcome::Ok(m) => {
            let (mean, std) = pick(m);
            format!("{mean:.4} ({std:.4})")
        }
        CellOutcome::Failed { .. } => "failed".to_string(),
    }
}

/// First-appearance order without duplicates.
fn ordered_unique<T: Clone + PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut seen = Vec::new();
    for item in items {
        if !seen.contains(&item) {
            seen.push(item);
        }
    }
    seen
}

/// The forest sweep as text: one row per ensemble size, one column per
/// feature subset, accuracy as `mean (STD)` over folds.
pub fn tree_sweep_table(report: &EvalReport) -> String {
    let subsets = ordered_unique(report.forest_cells.iter().map(|c| c.subset.clone()));
    let tree_counts = ordered_unique(report.forest_cells.iter().map(|c| c.n_trees));

    let mut rows = Vec::new();
    let mut header = vec!["trees".to_string()];
    header.extend(subsets.iter().cloned());
    rows.push(header);
    for &n_trees in &tree_counts {
        let mut row = vec![n_trees.to_string()];
        for subset in &subsets {
            let cell = report
                .forest_cells
                .iter()
                .find(|c| c.n_trees == n_trees && c.subset == *subset);
            row.push(match cell {
                Some(c) => metric_text(&c.outcome, |m| (m.accuracy_mean, m.accuracy_std)),
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }

    format!(
        "Forest accuracy by ensemble size and feature subset, mean (STD) over {} folds\n{}",
        report.folds,
        render_columns(&rows)
    )
}

/// The classifier comparison as text: the forest first (at 100 trees when
/// the sweep includes it, otherwise the largest size present), then each
/// reference classifier; one column per subset, AUC as `mean (STD)`.
pub fn classifier_table(report: &EvalReport) -> String {
    let subsets = ordered_unique(
        report
            .forest_cells
            .iter()
            .map(|c| c.subset.clone())
            .chain(report.classifier_cells.iter().map(|c| c.subset.clone())),
    );
    let classifiers = ordered_unique(report.classifier_cells.iter().map(|c| c.classifier.clone()));

    let mut rows = Vec::new();
    let mut header = vec!["classifier".to_string()];
    header.extend(subsets.iter().cloned());
    rows.push(header);

    let forest_counts = ordered_unique(report.forest_cells.iter().map(|c| c.n_trees));
    let headline = if forest_counts.contains(&100) {
        Some(100)
    } else {
        forest_counts.iter().max().copied()
    };
    if let Some(n_trees) = headline {
        let mut row = vec![format!("random_forest ({n_trees} trees)")];
        for subset in &subsets {
            let cell = report
                .forest_cells
                .iter()
                .find(|c| c.n_trees == n_trees && c.subset == *subset);
            row.push(match cell {
                Some(c) => metric_text(&c.outcome, |m| (m.auc_mean, m.auc_std)),
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }

    for classifier in &classifiers {
        let mut row = vec![classifier.clone()];
        for subset in &subsets {
            let cell = report
                .classifier_cells
                .iter()
                .find(|c| c.classifier == *classifier && c.subset == *subset);
            row.push(match cell {
                Some(c) => metric_text(&c.outcome, |m| (m.auc_mean, m.auc_std)),
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }

    format!(
        "Classifier AUC by feature subset, mean (STD) over {} folds\n{}",
        report.folds,
        render_columns(&rows)
    )
}

fn csv_into_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    build(&mut writer).expect("writing CSV to memory cannot fail");
    let bytes = writer.into_inner().expect("flushing in-memory CSV");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

fn push_outcome_fields(fields: &mut Vec<String>, outcome: &CellOutcome) {
    match outcome {
        CellOutcome::Ok(m) => {
            fields.push("ok".to_string());
            for v in [m.auc_mean, m.auc_std, m.accuracy_mean, m.accuracy_std] {
                fields.push(v.to_string());
            }
            fields.push(String::new());
        }
        CellOutcome::Failed { error } => {
            fields.push("failed".to_string());
            fields.extend(std::iter::repeat_n(String::new(), 4));
            fields.push(error.clone());
        }
    }
}

/// Every grid cell as one CSV row. Forest rows carry a tree count and
/// the model name `forest`; reference rows leave the count empty.
pub fn cells_csv(report: &EvalReport) -> String {
    csv_into_string(|w| {
        w.write_record([
            "cell",
            "model",
            "subset",
            "trees",
            "status",
            "auc_mean",
            "auc_std",
            "accuracy_mean",
            "accuracy_std",
            "error",
        ])?;
        for cell in &report.forest_cells {
            let mut fields = vec![
                cell.label(),
                "forest".to_string(),
                cell.subset.clone(),
                cell.n_trees.to_string(),
            ];
            push_outcome_fields(&mut fields, &cell.outcome);
            w.write_record(&fields)?;
        }
        for cell in &report.classifier_cells {
            let mut fields = vec![
                cell.label(),
                cell.classifier.clone(),
                cell.subset.clone(),
                String::new(),
            ];
            push_outcome_fields(&mut fields, &cell.outcome);
            w.write_record(&fields)?;
        }
        Ok(())
    })
}

/// The full-dataset importance ranking as `feature,importance` rows.
pub fn importance_csv(report: &EvalReport) -> String {
    csv_into_string(|w| {
        w.write_record(["feature", "importance"])?;
        for ranked in &report.importance_ranking {
            w.write_record([ranked.feature.as_str(), &ranked.importance.to_string()])?;
        }
        Ok(())
    })
}

/// One ROC curve as `fpr,tpr` rows, from (0,0) to (1,1).
pub fn roc_csv(points: &[(f64, f64)]) -> String {
    csv_into_string(|w| {
        w.write_record(["fpr", "tpr"])?;
        for (fpr, tpr) in points {
            w.write_record([fpr.to_string(), tpr.to_string()])?;
        }
        Ok(())
    })
}

/// File-name-safe form of a cell label: anything outside
/// `[A-Za-z0-9._-]` becomes `_`.
pub fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// ROC CSVs for every scored cell, as (file stem, CSV body) pairs.
pub fn roc_csv_per_cell(scores: &[CellScores]) -> crate::error::Result<Vec<(String, String)>> {
    scores
        .iter()
        .map(|cell| {
            let points = crate::eval::roc_points(&cell.scores, &cell.labels)?;
            Ok((format!("roc_{}", sanitize_label(&cell.cell)), roc_csv(&points)))
        })
        .collect()
}
