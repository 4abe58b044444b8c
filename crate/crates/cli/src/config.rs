use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use koopman_equiv::Error;

/// Contents of a `--config` file. Field names match the long flags with
/// dashes replaced by underscores; flags given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub algo: Option<u8>,
    pub oracle: Option<String>,
    pub oracle_g: Option<String>,
    pub gamma: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub traj: Option<PathBuf>,
    pub step_cmd: Option<String>,
    pub max_iters: Option<usize>,
    pub eps: Option<f64>,
    pub overflow_cap: Option<f64>,
    pub method: Option<String>,
    pub dict: Option<String>,
    pub rank: Option<usize>,
    pub tau: Option<f64>,
    pub centering: Option<String>,
    pub eps_conj: Option<f64>,
    pub eps_semi: Option<f64>,
    pub keep_unit: Option<bool>,
    pub resolution: Option<usize>,
    pub outdir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub sequential: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn check_command(&self, invoked: &str) -> Result<(), Error> {
        match &self.command {
            Some(c) if c != invoked => Err(Error::Config(format!(
                "config file is for `{c}` but `{invoked}` was invoked"
            ))),
            _ => Ok(()),
        }
    }
}

/// Flag value, else config value, else nothing.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub const OUTDIR_ENV: &str = "KOOPEQ_OUTDIR";

pub fn default_outdir() -> PathBuf {
    std::env::var_os(OUTDIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("koopeq-out"))
}
