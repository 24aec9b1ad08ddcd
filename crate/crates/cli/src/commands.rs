//! Implementations of the six subcommands.
//!
//! Shared conventions: inputs are read before the output directory is
//! touched, so a bad input never leaves a half-claimed directory behind;
//! the output directory is then created, locked for the duration of the
//! command, and given a `run_config.json` recording the effective settings.

use std::fs;
use std::path::Path;

use serde::Serialize;

use rotorbar_core::dataset::{extract_dataset, Dataset};
use rotorbar_core::eval::{self, EvalPlan, EvalReport, FeatureSubset};
use rotorbar_core::forest::{ForestConfig, RandomForest};
use rotorbar_core::io::{self, DatasetManifest, DirLock, SavedModel};
use rotorbar_core::report;
use rotorbar_core::signals::{generate_dataset, ANALYSIS_PERIODS};
use rotorbar_core::{Condition, Error, GeneratorConfig64};

use crate::config::{require_out, require_seed, Format, RunConfig};
use crate::{
    CliError, CliResult, EvaluateArgs, ExtractArgs, PredictArgs, ReportArgs, SimulateArgs,
    TrainArgs,
};

pub const FEATURES_FILE: &str = "features.csv";
pub const MODEL_FILE: &str = "model.json";
pub const VERDICTS_FILE: &str = "verdicts.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TREE_SWEEP_FILE: &str = "tree_sweep.txt";
pub const CLASSIFIER_FILE: &str = "classifier_comparison.txt";
pub const IMPORTANCE_FILE: &str = "importance.csv";
pub const CELLS_FILE: &str = "cells.csv";
pub const RUN_CONFIG_FILE: &str = "run_config.json";

const VERDICT_HEADER: &str = "trial_id,condition,load,probability,predicted";
const DEFAULT_TRIALS_PER_CELL: u32 = 40;
const DEFAULT_TREES: usize = 100;

/// Effective settings of one invocation, echoed into the output directory
/// so every artifact can be traced back to the run that produced it.
#[derive(Serialize)]
struct Provenance<'a> {
    command: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<&'a GeneratorConfig64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials_per_cell: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree_counts: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trees: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<Format>,
}

impl<'a> Provenance<'a> {
    fn new(command: &'static str) -> Self {
        Provenance {
            command,
            inputs: Vec::new(),
            seed: None,
            generator: None,
            trials_per_cell: None,
            folds: None,
            tree_counts: None,
            trees: None,
            features: None,
            format: None,
        }
    }

    fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }
}

/// Creates the output directory and claims its lockfile; the lock is held
/// until the returned guard drops at the end of the command.
fn prepare_out(dir: &Path) -> CliResult<DirLock> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::from(Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })?;
    Ok(DirLock::claim(dir)?)
}

/// Writes text with exactly one trailing newline.
fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut content = text.to_string();
    if !content.ends_with('\n') {
        content.push('\n');
    }
    fs::write(path, content).map_err(|e| {
        CliError::from(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

/// Prints a rendered block followed by exactly one newline.
fn print_block(text: &str) {
    println!("{}", text.trim_end_matches('\n'));
}

fn write_provenance(dir: &Path, prov: &Provenance) -> CliResult<()> {
    Ok(io::save_json(&dir.join(RUN_CONFIG_FILE), prov)?)
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    let seed = require_seed(args.seed, &file)?;
    let out = require_out(args.out, &file)?;
    let generator = file.generator.unwrap_or_default();
    generator.validate()?;
    let trials = file.trials_per_cell.unwrap_or(DEFAULT_TRIALS_PER_CELL);

    let _lock = prepare_out(&out)?;
    let mut prov = Provenance::new("simulate");
    prov.seed = Some(seed);
    prov.generator = Some(&generator);
    prov.trials_per_cell = Some(trials);
    write_provenance(&out, &prov)?;

    let records = generate_dataset(&generator, trials, seed)?;
    io::write_dataset(&out, &generator, seed, &records)?;
    println!(
        "wrote {} signal records and {} to {}",
        records.len(),
        io::MANIFEST_FILE,
        out.display()
    );
    Ok(())
}

pub fn extract(args: ExtractArgs) -> CliResult<()> {
    let manifest: DatasetManifest<f64> = io::load_json(&args.manifest)?;
    let records = io::read_dataset::<f64>(&args.manifest)?;
    let extraction = extract_dataset(&records, ANALYSIS_PERIODS)?;
    if !extraction.failures.is_empty() {
        for (trial_id, err) in &extraction.failures {
            eprintln!("trial {trial_id}: {err}");
        }
        let ids: Vec<u32> = extraction.failures.iter().map(|f| f.0).collect();
        return Err(CliError::Data(format!(
            "{} of {} records failed preprocessing: trials {:?}",
            ids.len(),
            records.len(),
            ids
        )));
    }

    let _lock = prepare_out(&args.out)?;
    let mut prov = Provenance::new("extract").input(&args.manifest);
    prov.seed = Some(manifest.master_seed);
    prov.generator = Some(&manifest.config);
    write_provenance(&args.out, &prov)?;

    let path = args.out.join(FEATURES_FILE);
    io::write_features_csv(&path, &extraction.dataset)?;
    println!(
        "extracted {} rows into {}",
        extraction.dataset.len(),
        path.display()
    );
    Ok(())
}

pub fn train(args: TrainArgs) -> CliResult<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    let seed = require_seed(args.seed, &file)?;
    let out = require_out(args.out, &file)?;

    let full: Dataset<f64> = io::read_features_csv(&args.features_csv)?;
    let dataset = match &args.features {
        Some(names) => {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            full.select_features(&refs)?
        }
        None => full,
    };
    let trees = args.trees.unwrap_or(DEFAULT_TREES);
    let config = ForestConfig {
        n_trees: trees,
        rng_seed: seed,
        ..ForestConfig::default()
    };
    let model = RandomForest::fit(&dataset, &config)?;
    let oob_error = model.oob().error;
    let saved = SavedModel::Forest(model);

    let _lock = prepare_out(&out)?;
    let mut prov = Provenance::new("train").input(&args.features_csv);
    prov.seed = Some(seed);
    prov.trees = Some(trees);
    prov.features = args.features.clone();
    write_provenance(&out, &prov)?;

    let path = out.join(MODEL_FILE);
    io::save_model(&path, &saved)?;
    println!(
        "trained {} on {} rows; saved to {}",
        saved.describe(),
        dataset.len(),
        path.display()
    );
    match oob_error {
        Some(e) => println!("out-of-bag error: {e:.4}"),
        None => println!("out-of-bag error: unavailable (no row was left out of every bootstrap)"),
    }
    Ok(())
}

pub fn predict(args: PredictArgs) -> CliResult<()> {
    let model = io::load_model(&args.model)?;
    let dataset: Dataset<f64> = io::read_features_csv(&args.features_csv)?;

    // columns are matched to the model by name; order carries no meaning
    let missing: Vec<String> = model
        .feature_names()
        .iter()
        .filter(|name| dataset.feature_index(name).is_none())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns { missing }.into());
    }
    let columns: Vec<usize> = model
        .feature_names()
        .iter()
        .map(|name| dataset.feature_index(name).expect("checked above"))
        .collect();

    let _lock = prepare_out(&args.out)?;
    let prov = Provenance::new("predict")
        .input(&args.model)
        .input(&args.features_csv);
    write_provenance(&args.out, &prov)?;

    let mut verdicts = String::from(VERDICT_HEADER);
    verdicts.push('\n');
    let mut faulty = 0usize;
    for i in 0..dataset.len() {
        let row = dataset.row(i);
        let projected: Vec<f64> = columns.iter().map(|&c| row[c]).collect();
        let probability = model.score(&projected)?;
        let predicted = model.predict(&projected)?;
        if predicted == Condition::Faulty {
            faulty += 1;
        }
        let meta = &dataset.meta()[i];
        verdicts.push_str(&format!(
            "{},{},{},{},{}\n",
            meta.trial_id,
            dataset.label(i),
            meta.load,
            probability,
            predicted
        ));
    }
    let path = args.out.join(VERDICTS_FILE);
    write_text(&path, &verdicts)?;

    if dataset.is_empty() {
        eprintln!(
            "warning: {} has no data rows; wrote a header-only verdict file",
            args.features_csv.display()
        );
    }
    println!(
        "scored {} rows with {}: {} faulty, {} healthy",
        dataset.len(),
        model.describe(),
        faulty,
        dataset.len() - faulty
    );
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    let seed = require_seed(args.seed, &file)?;
    let out = require_out(args.out, &file)?;
    let format = args.format.or(file.format).unwrap_or(Format::Table);

    let dataset: Dataset<f64> = io::read_features_csv(&args.features_csv)?;
    let mut plan = EvalPlan::with_seed(seed);
    if let Some(folds) = file.folds {
        plan.folds = folds;
    }
    if let Some(tree_counts) = file.tree_counts {
        plan.tree_counts = tree_counts;
    }
    if let Some(n) = args.trees {
        plan.tree_counts = vec![n];
    }
    if let Some(names) = &args.features {
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        plan.feature_subsets = vec![FeatureSubset::new("custom", &refs)];
    }

    let (eval_report, scores) = eval::run_plan_with_scores(&plan, &dataset)?;

    let _lock = prepare_out(&out)?;
    let mut prov = Provenance::new("evaluate").input(&args.features_csv);
    prov.seed = Some(seed);
    prov.folds = Some(plan.folds);
    prov.tree_counts = Some(plan.tree_counts.clone());
    prov.features = args.features.clone();
    prov.format = Some(format);
    write_provenance(&out, &prov)?;

    io::save_json(&out.join(REPORT_FILE), &eval_report)?;
    write_text(&out.join(TREE_SWEEP_FILE), &report::tree_sweep_table(&eval_report))?;
    write_text(
        &out.join(CLASSIFIER_FILE),
        &report::classifier_table(&eval_report),
    )?;
    write_text(
        &out.join(IMPORTANCE_FILE),
        &report::importance_csv(&eval_report),
    )?;
    if format == Format::Csv {
        write_text(&out.join(CELLS_FILE), &report::cells_csv(&eval_report))?;
        for (stem, csv) in report::roc_csv_per_cell(&scores)? {
            write_text(&out.join(format!("{stem}.csv")), &csv)?;
        }
    }
    print_report(&eval_report, format)?;
    Ok(())
}

pub fn render_report(args: ReportArgs) -> CliResult<()> {
    let eval_report: EvalReport = io::load_json(&args.report)?;
    let format = args.format.unwrap_or(Format::Table);

    if let Some(out) = &args.out {
        let _lock = prepare_out(out)?;
        let prov = Provenance::new("report").input(&args.report);
        write_provenance(out, &prov)?;
        write_text(&out.join(TREE_SWEEP_FILE), &report::tree_sweep_table(&eval_report))?;
        write_text(
            &out.join(CLASSIFIER_FILE),
            &report::classifier_table(&eval_report),
        )?;
        write_text(
            &out.join(IMPORTANCE_FILE),
            &report::importance_csv(&eval_report),
        )?;
        // per-row scores are not stored in the report, so there are no ROC
        // files here; rerun `evaluate --format csv` to regenerate those
        write_text(&out.join(CELLS_FILE), &report::cells_csv(&eval_report))?;
    }
    print_report(&eval_report, format)
}

/// Stdout rendering shared by `evaluate` and `report`, so re-rendering a
/// saved report reproduces the original output byte for byte.
fn print_report(eval_report: &EvalReport, format: Format) -> CliResult<()> {
    match format {
        Format::Table => {
            print_block(&report::tree_sweep_table(eval_report));
            println!();
            print_block(&report::classifier_table(eval_report));
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(eval_report)
                .map_err(|e| CliError::Data(format!("report not serialisable: {e}")))?;
            print_block(&text);
        }
        Format::Csv => print_block(&report::cells_csv(eval_report)),
    }
    Ok(())
}
