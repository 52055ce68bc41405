use std::fs;
use std::path::{Path, PathBuf};

use ffp::RankingMode;
use serde::Deserialize;

use crate::data::Mode;
use crate::CliError;

/// Defaults read from `--config`. Every field is optional and any flag given
/// on the command line overrides it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub mode: Option<Mode>,
    pub k: Option<usize>,
    pub a: Option<f64>,
    pub n: Option<f64>,
    pub ranking: Option<RankingMode>,
    pub k_grid: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub library: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Output { path: path.to_path_buf(), source })?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
