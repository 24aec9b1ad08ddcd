//! Labelled feature matrices and the signal-to-features pipeline.
//!
//! A [`Dataset`] is the unit every learner in this crate trains on: a
//! dense row-major matrix with named columns, one class label and one
//! provenance record per row. Helpers cover the two ways datasets come to
//! exist (extraction from signal records, or full synthesis from a
//! generator configuration) plus the column and row subsetting the
//! evaluation grids need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features, FEATURE_NAMES};
use crate::scalar::Scalar;
use crate::signals::{
    generate_dataset, preprocess, Condition, GeneratorConfig, Load, SignalRecord,
    ANALYSIS_PERIODS,
};

/// Provenance of one dataset row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub trial_id: u32,
    pub load: Load,
}

/// A labelled feature matrix with named columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset<F> {
    feature_names: Vec<String>,
    rows: Vec<Vec<F>>,
    labels: Vec<Condition>,
    meta: Vec<RowMeta>,
}

impl<F: Scalar> Dataset<F> {
    /// Assembles a dataset from parallel parts.
    ///
    /// Every value must be finite; the first offender is reported with its
    /// row and column. Structural mismatches (jagged rows, label or meta
    /// count differing from the row count) are caller bugs and panic.
    pub fn from_parts(
        feature_names: Vec<String>,
        rows: Vec<Vec<F>>,
        labels: Vec<Condition>,
        meta: Vec<RowMeta>,
    ) -> Result<Self> {
        assert_eq!(rows.len(), labels.len(), "one label per row");
        assert_eq!(rows.len(), meta.len(), "one meta record per row");
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(
                row.len(),
                feature_names.len(),
                "row {r} width differs from the header"
            );
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteFeature {
                        row: r,
                        column: feature_names[c].clone(),
                    });
                }
            }
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn label(&self, i: usize) -> Condition {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Condition] {
        &self.labels
    }

    pub fn meta(&self) -> &[RowMeta] {
        &self.meta
    }

    /// Rows per class, indexed by [`Condition::class_index`].
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for label in &self.labels {
            counts[label.class_index()] += 1;
        }
        counts
    }

    /// A new dataset holding only the named columns, in the given order.
    pub fn select_features(&self, names: &[&str]) -> Result<Self> {
        let mut indices = Vec::with_capacity(names.len());
        let mut missing = Vec::new();
        for name in names {
            match self.feature_index(name) {
                Some(i) => indices.push(i),
                None => missing.push((*name).to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingColumns { missing });
        }
        Ok(Dataset {
            feature_names: names.iter().map(|n| n.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|row| indices.iter().map(|&i| row[i]).collect())
                .collect(),
            labels: self.labels.clone(),
            meta: self.meta.clone(),
        })
    }

    /// A new dataset holding the given rows, in the given order.
    /// Out-of-range indices panic.
    pub fn subset_rows(&self, indices: &[usize]) -> Self {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            meta: indices.iter().map(|&i| self.meta[i]).collect(),
        }
    }

    /// Synthesises records from `cfg` and extracts their features in one
    /// step: `trials_per_cell` records per (condition, load) cell, trimmed
    /// to the standard analysis window.
    ///
    /// Synthetic records are generated with enough headroom that trimming
    /// and extraction always succeed, so any per-record failure is
    /// escalated rather than skipped.
    pub fn synthesize(
        cfg: &GeneratorConfig<F>,
        trials_per_cell: u32,
        seed: u64,
    ) -> Result<Self> {
        let records = generate_dataset(cfg, trials_per_cell, seed)?;
        let extraction = extract_dataset(&records, ANALYSIS_PERIODS)?;
        if let Some((trial_id, err)) = extraction.failures.into_iter().next() {
            return Err(err.for_trial(trial_id));
        }
        Ok(extraction.dataset)
    }
}

/// Result of extracting features from a batch of signal records.
#[derive(Debug)]
pub struct Extraction<F> {
    /// Rows for every record that made it through trimming and extraction.
    pub dataset: Dataset<F>,
    /// Trial ids and causes for the records that did not.
    pub failures: Vec<(u32, Error)>,
}

/// Trims every record to `periods` fundamental periods and extracts the
/// standard feature set.
///
/// Records that fail (too short, constant, degenerate) are collected into
/// [`Extraction::failures`] instead of aborting the batch; their rows are
/// absent from the dataset.
pub fn extract_dataset<F: Scalar>(
    records: &[SignalRecord<F>],
    periods: u32,
) -> Result<Extraction<F>> {
    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    let mut meta = Vec::with_capacity(records.len());
    let mut failures = Vec::new();
    for record in records {
        let outcome = preprocess(record, periods).and_then(|t| extract_features(&t));
        match outcome {
            Ok(features) => {
                rows.push(features.as_array().to_vec());
                labels.push(record.condition);
                meta.push(RowMeta {
                    trial_id: record.trial_id,
                    load: record.load,
                });
            }
            Err(e) => failures.push((record.trial_id, e)),
        }
    }
    let dataset = Dataset::from_parts(
        FEATURE_NAMES.iter().map(|n| n.to_string()).collect(),
        rows,
        labels,
        meta,
    )?;
    Ok(Extraction { dataset, failures })
}
