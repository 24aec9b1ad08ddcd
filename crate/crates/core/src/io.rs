//! File formats: per-record signal CSVs, the dataset manifest, feature
//! matrices, and JSON persistence for models and reports.
//!
//! Layout on disk mirrors per-test acquisition: one CSV per captured
//! signal (`t_s,current_a`), indexed by a manifest JSON that records the
//! generator settings, the master seed, and one entry per file. Feature
//! matrices are flat CSVs with three metadata columns followed by one
//! column per feature; readers address every column by header name, so
//! column order never carries meaning. All errors carry the offending
//! path.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::TrainedClassifier;
use crate::dataset::{Dataset, RowMeta};
use crate::error::{Error, Result};
use crate::forest::RandomForest;
use crate::scalar::Scalar;
use crate::signals::{Condition, GeneratorConfig, Load, SignalRecord};

/// Manifest file name inside a simulated dataset directory.
pub const MANIFEST_FILE: &str = "manifest.json";

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn json_error(path: &Path, source: serde_json::Error) -> Error {
    Error::Json {
        path: path.to_path_buf(),
        source,
    }
}

fn format_error(path: &Path, message: String) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message,
    }
}

/// Writes `value` as pretty-printed JSON with a trailing newline.
/// Numbers round-trip exactly, so loading the file reproduces `value`.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| json_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Reads a JSON file written by [`save_json`] (or any compatible JSON).
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| json_error(path, e))
}

/// Writes one signal as a `t_s,current_a` CSV. Sample values print in
/// shortest round-trip form, so reading the file back is lossless.
pub fn write_signal_csv<F: Scalar>(path: &Path, record: &SignalRecord<F>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer
        .write_record(["t_s", "current_a"])
        .map_err(|e| csv_error(path, e))?;
    let rate = record.sample_rate_hz.into_f64();
    for (i, sample) in record.samples.iter().enumerate() {
        writer
            .write_record([(i as f64 / rate).to_string(), sample.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// Reads the `current_a` column of a signal CSV, by header name.
pub fn read_signal_samples<F: Scalar>(path: &Path) -> Result<Vec<F>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    let column = headers
        .iter()
        .position(|h| h == "current_a")
        .ok_or_else(|| format_error(path, "missing current_a column".to_string()))?;
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = record
            .get(column)
            .ok_or_else(|| format_error(path, format!("data row {}: short record", i + 1)))?;
        let value = field.parse::<F>().map_err(|_| {
            format_error(path, format!("data row {}: not a number: {field:?}", i + 1))
        })?;
        samples.push(value);
    }
    Ok(samples)
}

/// One signal file in a dataset manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord<F> {
    /// Signal CSV path, relative to the manifest file.
    pub file: String,
    pub condition: Condition,
    pub load: Load,
    pub trial_id: u32,
    pub seed: u64,
    pub sample_rate_hz: F,
}

/// Index of a simulated dataset: generator settings, master seed, and
/// one entry per signal file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DatasetManifest<F> {
    pub config: GeneratorConfig<F>,
    pub master_seed: u64,
    pub records: Vec<ManifestRecord<F>>,
}

fn signal_file_name<F: Scalar>(record: &SignalRecord<F>) -> String {
    format!(
        "trial_{:04}_{}_load_{}.csv",
        record.trial_id, record.condition, record.load
    )
}

/// Writes every record as its own CSV plus a `manifest.json` into `dir`
/// (created if absent). Returns the manifest that was written.
pub fn write_dataset<F: Scalar>(
    dir: &Path,
    config: &GeneratorConfig<F>,
    master_seed: u64,
    records: &[SignalRecord<F>],
) -> Result<DatasetManifest<F>> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut entries = Vec::with_capacity(records.len());
    for record in records {
        let file = signal_file_name(record);
        write_signal_csv(&dir.join(&file), record)?;
        entries.push(ManifestRecord {
            file,
            condition: record.condition,
            load: record.load,
            trial_id: record.trial_id,
            seed: record.seed,
            sample_rate_hz: record.sample_rate_hz,
        });
    }
    let manifest = DatasetManifest {
        config: config.clone(),
        master_seed,
        records: entries,
    };
    save_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Loads every signal listed in a manifest, resolving file names
/// relative to the manifest's directory.
pub fn read_dataset<F: Scalar>(manifest_path: &Path) -> Result<Vec<SignalRecord<F>>> {
    let manifest: DatasetManifest<F> = load_json(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    manifest
        .records
        .iter()
        .map(|entry| {
            let samples = read_signal_samples(&base.join(&entry.file))?;
            Ok(SignalRecord {
                condition: entry.condition,
                load: entry.load,
                trial_id: entry.trial_id,
                sample_rate_hz: entry.sample_rate_hz,
                seed: entry.seed,
                samples,
            })
        })
        .collect()
}

const META_COLUMNS: [&str; 3] = ["trial_id", "condition", "load"];

/// Writes a feature matrix: `trial_id,condition,load` then one column
/// per feature, one row per record.
pub fn write_features_csv<F: Scalar>(path: &Path, dataset: &Dataset<F>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = META_COLUMNS.to_vec();
    header.extend(dataset.feature_names().iter().map(String::as_str));
    writer
        .write_record(&header)
        .map_err(|e| csv_error(path, e))?;
    for i in 0..dataset.len() {
        let meta = &dataset.meta()[i];
        let mut fields = vec![
            meta.trial_id.to_string(),
            dataset.label(i).to_string(),
            meta.load.to_string(),
        ];
        fields.extend(dataset.row(i).iter().map(|v| v.to_string()));
        writer
            .write_record(&fields)
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// Reads a feature matrix written by [`write_features_csv`].
///
/// The three metadata columns are located by name and may sit anywhere;
/// every remaining column, in header order, becomes a feature.
pub fn read_features_csv<F: Scalar>(path: &Path) -> Result<Dataset<F>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();

    let mut meta_idx = [0usize; 3];
    let mut missing = Vec::new();
    for (slot, name) in META_COLUMNS.iter().enumerate() {
        match headers.iter().position(|h| h == *name) {
            Some(i) => meta_idx[slot] = i,
            None => missing.push(name.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingColumns { missing });
    }
    let feature_columns: Vec<usize> = (0..headers.len())
        .filter(|i| !meta_idx.contains(i))
        .collect();
    let feature_names: Vec<String> = feature_columns
        .iter()
        .map(|&i| headers[i].to_string())
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut meta = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let context = |message: String| format_error(path, format!("data row {}: {message}", i + 1));
        let field = |idx: usize| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| context("short record".to_string()))
        };

        let trial_id = field(meta_idx[0])?
            .parse::<u32>()
            .map_err(|e| context(format!("trial_id: {e}")))?;
        let condition = field(meta_idx[1])?
            .parse::<Condition>()
            .map_err(|e| context(e.to_string()))?;
        let load = field(meta_idx[2])?
            .parse::<Load>()
            .map_err(|e| context(e.to_string()))?;

        let mut row = Vec::with_capacity(feature_columns.len());
        for &col in &feature_columns {
            let raw = field(col)?;
            let value = raw
                .parse::<F>()
                .map_err(|_| context(format!("{}: not a number: {raw:?}", &headers[col])))?;
            row.push(value);
        }
        rows.push(row);
        labels.push(condition);
        meta.push(RowMeta { trial_id, load });
    }
    Dataset::from_parts(feature_names, rows, labels, meta)
}

/// A model file: an ensemble or a single reference classifier, tagged so
/// files are self-describing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SavedModel {
    Forest(RandomForest<f64>),
    Classifier(TrainedClassifier),
}

impl SavedModel {
    /// Feature columns the model was trained on, in training order.
    pub fn feature_names(&self) -> &[String] {
        match self {
            SavedModel::Forest(forest) => forest.feature_names(),
            SavedModel::Classifier(clf) => clf.feature_names(),
        }
    }

    /// Short human-readable description for logs and summaries.
    pub fn describe(&self) -> String {
        match self {
            SavedModel::Forest(forest) => format!("forest ({} trees)", forest.trees().len()),
            SavedModel::Classifier(clf) => clf.spec().model.name().to_string(),
        }
    }

    /// Score value at which a prediction flips to faulty.
    pub fn decision_threshold(&self) -> f64 {
        match self {
            SavedModel::Forest(_) => 0.5,
            SavedModel::Classifier(clf) => clf.decision_threshold(),
        }
    }

    /// Real-valued score, higher meaning more faulty.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            SavedModel::Forest(forest) => forest.score(x),
            SavedModel::Classifier(clf) => clf.score(x),
        }
    }

    /// Hard class decision at [`Self::decision_threshold`].
    pub fn predict(&self, x: &[f64]) -> Result<Condition> {
        let score = self.score(x)?;
        Ok(if score >= self.decision_threshold() {
            Condition::Faulty
        } else {
            Condition::Healthy
        })
    }
}

/// Saves a model as self-describing JSON.
pub fn save_model(path: &Path, model: &SavedModel) -> Result<()> {
    save_json(path, model)
}

/// Loads a model saved by [`save_model`].
pub fn load_model(path: &Path) -> Result<SavedModel> {
    load_json(path)
}

/// Guard file claiming exclusive use of an output directory.
///
/// Creation fails if another process holds the guard; dropping removes
/// the file. A crashed process can leave one behind, in which case the
/// error message names the stale path to delete.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    /// Claims `dir` by creating `.lock` inside it (the directory is
    /// created first if absent).
    pub fn claim(dir: &Path) -> Result<DirLock> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(DirLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(format_error(
                &path,
                "output directory is in use (or a stale lock remains; delete the file to proceed)"
                    .to_string(),
            )),
            Err(e) => Err(io_error(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{self, ClassifierSpec, ModelSpec};
    use crate::dataset::Dataset;
    use crate::forest::{ForestConfig, SubsetRule};
    use crate::signals::{generate_dataset, GeneratorConfig};

    fn tiny_records() -> Vec<SignalRecord<f64>> {
        let mut config = GeneratorConfig::<f64>::default();
        config.captured_periods = 45;
        generate_dataset(&config, 1, 77).unwrap()
    }

    fn tiny_dataset() -> Dataset<f64> {
        let records = tiny_records();
        let extraction = crate::dataset::extract_dataset(&records, 40).unwrap();
        assert!(extraction.failures.is_empty());
        extraction.dataset
    }

    #[test]
    fn signal_csv_round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let records = tiny_records();
        let path = dir.path().join("one.csv");
        write_signal_csv(&path, &records[0]).unwrap();

        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t_s,current_a\n"));

        let samples: Vec<f64> = read_signal_samples(&path).unwrap();
        assert_eq!(samples, records[0].samples);
    }

    #[test]
    fn dataset_round_trips_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let records = tiny_records();
        let mut config = GeneratorConfig::<f64>::default();
        config.captured_periods = 45;

        let manifest = write_dataset(dir.path(), &config, 77, &records).unwrap();
        assert_eq!(manifest.records.len(), records.len());
        assert_eq!(manifest.master_seed, 77);

        let loaded: Vec<SignalRecord<f64>> =
            read_dataset(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded, records);
    }

    #[test]
    fn rewriting_a_dataset_is_byte_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let records = tiny_records();
        let config = GeneratorConfig::<f64>::default();
        write_dataset(dir_a.path(), &config, 77, &records).unwrap();
        write_dataset(dir_b.path(), &config, 77, &records).unwrap();
        for entry in fs::read_dir(dir_a.path()).unwrap() {
            let name = entry.unwrap().file_name();
            let a = fs::read(dir_a.path().join(&name)).unwrap();
            let b = fs::read(dir_b.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name:?} differs between identical runs");
        }
    }

    #[test]
    fn features_csv_round_trips_and_reads_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = tiny_dataset();
        let path = dir.path().join("features.csv");
        write_features_csv(&path, &dataset).unwrap();

        let text = fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("trial_id,condition,load,mean_index,"));
        assert_eq!(header.split(',').count(), 16);

        let loaded: Dataset<f64> = read_features_csv(&path).unwrap();
        assert_eq!(loaded.feature_names(), dataset.feature_names());
        assert_eq!(loaded.rows(), dataset.rows());
        assert_eq!(loaded.labels(), dataset.labels());
        assert_eq!(loaded.meta(), dataset.meta());

        // Shuffle the columns; reading by name must reproduce the same
        // per-name values regardless of position.
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let mut shuffled = String::new();
        let order: Vec<usize> = (0..header.len()).rev().collect();
        shuffled.push_str(
            &order
                .iter()
                .map(|&i| header[i])
                .collect::<Vec<_>>()
                .join(","),
        );
        shuffled.push('\n');
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            shuffled.push_str(
                &order
                    .iter()
                    .map(|&i| fields[i])
                    .collect::<Vec<_>>()
                    .join(","),
            );
            shuffled.push('\n');
        }
        let path2 = dir.path().join("reversed.csv");
        fs::write(&path2, shuffled).unwrap();
        let reversed: Dataset<f64> = read_features_csv(&path2).unwrap();
        assert_eq!(reversed.labels(), dataset.labels());
        for name in dataset.feature_names() {
            let a = dataset.feature_index(name).unwrap();
            let b = reversed.feature_index(name).unwrap();
            for i in 0..dataset.len() {
                assert_eq!(dataset.row(i)[a], reversed.row(i)[b]);
            }
        }
    }

    #[test]
    fn malformed_inputs_name_the_path_and_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");

        fs::write(&path, "trial_id,condition,load,x\n0,sick,0.0,1.0\n").unwrap();
        let err = read_features_csv::<f64>(&path).unwrap_err().to_string();
        assert!(err.contains("bad.csv") && err.contains("row 1") && err.contains("sick"));

        fs::write(&path, "trial_id,condition,load,x\n0,healthy,0.0,abc\n").unwrap();
        let err = read_features_csv::<f64>(&path).unwrap_err().to_string();
        assert!(err.contains("abc"));

        fs::write(&path, "trial_id,condition\n0,healthy\n").unwrap();
        let err = read_features_csv::<f64>(&path).unwrap_err();
        assert!(matches!(err, Error::MissingColumns { ref missing } if missing == &["load"]));

        let err = read_signal_samples::<f64>(&dir.path().join("absent.csv"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("absent.csv"));
    }

    #[test]
    fn models_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = tiny_dataset();

        let forest = RandomForest::fit(
            &dataset,
            &ForestConfig {
                n_trees: 5,
                feature_subset: SubsetRule::Sqrt,
                min_samples_split: 2,
                rng_seed: 3,
            },
        )
        .unwrap();
        let saved = SavedModel::Forest(forest);
        let path = dir.path().join("forest.json");
        save_model(&path, &saved).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, saved);
        assert_eq!(loaded.describe(), "forest (5 trees)");
        assert_eq!(loaded.decision_threshold(), 0.5);
        let row = dataset.row(0);
        assert_eq!(loaded.score(row).unwrap(), saved.score(row).unwrap());

        let spec = ClassifierSpec::standard(ModelSpec::default_ridge());
        let clf = baselines::train(&spec, &dataset).unwrap();
        let saved = SavedModel::Classifier(clf);
        let path = dir.path().join("ridge.json");
        save_model(&path, &saved).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, saved);
        assert_eq!(loaded.describe(), "ridge");
        assert_eq!(loaded.decision_threshold(), 0.0);
        assert_eq!(loaded.feature_names().len(), 13);
    }

    #[test]
    fn directory_lock_is_exclusive_and_releases_on_drop() {
        let dir = tempfile::tempdir().unwrap();
        let lock = DirLock::claim(dir.path()).unwrap();
        let err = DirLock::claim(dir.path()).unwrap_err().to_string();
        assert!(err.contains("in use"));
        drop(lock);
        let _relock = DirLock::claim(dir.path()).unwrap();
    }
}
