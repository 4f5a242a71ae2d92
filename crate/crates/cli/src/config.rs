//! Run configuration: file defaults, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ultradiff_core::verdict::RaiReading;
use ultradiff_core::CheckConfig;

use crate::error::CliError;

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "ULTRADIFF_CONFIG";
pub const DEFAULT_CONFIG_PATH: &str = "ultradiff.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RaiReadingArg {
    MuLeft,
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub truncation: usize,
    pub dp_cap: usize,
    pub epsilon: f64,
    pub grow_tol: f64,
    pub flat_tol: f64,
    pub min_refute: f64,
    pub far_vertices: u32,
    pub window: usize,
    pub t0: f64,
    pub rai_reading: RaiReadingArg,
    pub mode: Mode,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = CheckConfig::default();
        RunConfig {
            truncation: c.truncation,
            dp_cap: c.dp_cap,
            epsilon: c.epsilon,
            grow_tol: c.grow_tol,
            flat_tol: c.flat_tol,
            min_refute: c.min_refute,
            far_vertices: c.far_vertices,
            window: c.window,
            t0: c.t0,
            rai_reading: RaiReadingArg::MuLeft,
            mode: Mode::Exact,
            format: Format::Json,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn check_config(&self) -> CheckConfig {
        CheckConfig {
            truncation: self.truncation,
            dp_cap: self.dp_cap,
            grow_tol: self.grow_tol,
            flat_tol: self.flat_tol,
            min_refute: self.min_refute,
            epsilon: self.epsilon,
            far_vertices: self.far_vertices,
            window: self.window,
            rai_reading: match self.rai_reading {
                RaiReadingArg::MuLeft => RaiReading::MuLeft,
                RaiReadingArg::AsPrinted => RaiReading::AsPrinted,
            },
            t0: self.t0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("truncation", self.truncation as f64),
            ("dp_cap", self.dp_cap as f64),
            ("epsilon", self.epsilon),
            ("grow_tol", self.grow_tol),
            ("flat_tol", self.flat_tol),
            ("min_refute", self.min_refute),
            ("window", self.window as f64),
            ("t0", self.t0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("config `{name}` must be positive")));
            }
        }
        if self.epsilon >= 1.0 {
            return Err(CliError::Usage("config `epsilon` must be below 1".into()));
        }
        Ok(())
    }

    /// Explicit path, else the path in [`CONFIG_ENV`], else
    /// [`DEFAULT_CONFIG_PATH`] when it exists, else built-in defaults.
    pub fn load(explicit: Option<&Path>) -> Result<RunConfig, CliError> {
        let path: Option<PathBuf> = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => Some(PathBuf::from(p)),
                None => {
                    let p = PathBuf::from(DEFAULT_CONFIG_PATH);
                    p.exists().then_some(p)
                }
            },
        };
        let cfg = match path {
            Some(p) => crate::formats::read_json::<RunConfig>(&p)?,
            None => RunConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_core() {
        assert_eq!(RunConfig::default().check_config(), CheckConfig::default());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"truncation": 512}"#).unwrap();
        assert_eq!(cfg.truncation, 512);
        assert_eq!(cfg.dp_cap, 512);
        assert!(serde_json::from_str::<RunConfig>(r#"{"truncaton": 512}"#).is_err());
    }
}
