//! The JSON run-configuration file shared by the subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rotorbar_core::io;
use rotorbar_core::GeneratorConfig64;

use crate::{CliError, CliResult};

/// Stdout rendering selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
    Csv,
}

/// File mirror of the command-line knobs. Every field is optional and a
/// command-line flag always wins over the file value, so one config can be
/// shared across a whole pipeline run with per-step overrides.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Generator overrides; fields left out keep their default values.
    pub generator: Option<GeneratorConfig64>,
    /// Simulated trials per (condition, load) cell; 40 when absent.
    pub trials_per_cell: Option<u32>,
    /// Cross-validation folds; 5 when absent.
    pub folds: Option<usize>,
    /// Ensemble sizes for the evaluation sweep.
    pub tree_counts: Option<Vec<usize>>,
    /// Fallback for --seed.
    pub seed: Option<u64>,
    /// Fallback for --out.
    pub out: Option<PathBuf>,
    /// Fallback for --format.
    pub format: Option<Format>,
}

impl RunConfig {
    /// Loads `path` when given, otherwise the all-absent config. Unknown
    /// keys are rejected so a typo cannot silently fall back to a default.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Ok(io::load_json(p)?),
            None => Ok(RunConfig::default()),
        }
    }
}

/// Seed of a stochastic command, from flag or file. Refusing to invent one
/// keeps every run reproducible from its recorded arguments.
pub fn require_seed(flag: Option<u64>, file: &RunConfig) -> CliResult<u64> {
    flag.or(file.seed).ok_or_else(|| {
        CliError::Usage(
            "a seed is required: pass --seed N or set \"seed\" in the --config file".into(),
        )
    })
}

/// Output directory, from flag or file.
pub fn require_out(flag: Option<PathBuf>, file: &RunConfig) -> CliResult<PathBuf> {
    flag.or_else(|| file.out.clone()).ok_or_else(|| {
        CliError::Usage(
            "an output directory is required: pass --out DIR or set \"out\" in the --config file"
                .into(),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig {
            seed: Some(1),
            out: Some(PathBuf::from("file-dir")),
            ..RunConfig::default()
        };
        assert_eq!(require_seed(Some(9), &file).unwrap(), 9);
        assert_eq!(require_seed(None, &file).unwrap(), 1);
        assert_eq!(
            require_out(Some(PathBuf::from("flag-dir")), &file).unwrap(),
            PathBuf::from("flag-dir")
        );
        assert_eq!(
            require_out(None, &file).unwrap(),
            PathBuf::from("file-dir")
        );
    }

    #[test]
    fn missing_seed_is_a_usage_error() {
        let err = require_seed(None, &RunConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn partial_generator_overrides_keep_the_other_defaults() {
        let parsed: RunConfig =
            serde_json::from_str(r#"{"generator": {"noise_std_a": 0.5}, "folds": 3}"#).unwrap();
        let g = parsed.generator.unwrap();
        assert_eq!(g.noise_std_a, 0.5);
        let defaults = GeneratorConfig64::default();
        assert_eq!(g.fundamental_hz, defaults.fundamental_hz);
        assert_eq!(g.captured_periods, defaults.captured_periods);
        assert_eq!(parsed.folds, Some(3));
        assert_eq!(parsed.seed, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 4}"#).is_err());
    }

    #[test]
    fn format_names_match_the_flag_values() {
        assert_eq!(
            serde_json::from_str::<Format>(r#""table""#).unwrap(),
            Format::Table
        );
        assert_eq!(serde_json::to_string(&Format::Csv).unwrap(), r#""csv""#);
    }
}
