//! Experiment configuration: a TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ttp_core::IbeaConfig;

/// Environment variable holding the default worker-thread count.
pub const WORKERS_ENV: &str = "TTP_WORKERS";

/// Serialized as one flat table: the experiment keys next to the algorithm's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub instance: PathBuf,
    pub repetitions: usize,
    pub output: PathBuf,
    #[serde(flatten)]
    pub algorithm: IbeaConfig,
}

#[derive(Deserialize)]
struct ExperimentKeys {
    instance: PathBuf,
    #[serde(default = "one")]
    repetitions: usize,
    output: PathBuf,
}

fn one() -> usize {
    1
}

const EXPERIMENT_KEYS: [&str; 3] = ["instance", "repetitions", "output"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn new(instance: PathBuf, output: PathBuf) -> Self {
        ExperimentConfig {
            instance,
            repetitions: 1,
            output,
            algorithm: IbeaConfig::default(),
        }
    }

    /// Reads a TOML config. Relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = ExperimentConfig::parse(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.instance = base.join(&cfg.instance);
        cfg.output = base.join(&cfg.output);
        Ok(cfg)
    }

    /// Parses the flat TOML form; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        let mut algorithm: toml::Table = toml::from_str(text)?;
        let mut keys = toml::Table::new();
        for k in EXPERIMENT_KEYS {
            if let Some(v) = algorithm.remove(k) {
                keys.insert(k.to_string(), v);
            }
        }
        let keys = ExperimentKeys::deserialize(toml::Value::Table(keys))?;
        let algorithm = IbeaConfig::deserialize(toml::Value::Table(algorithm))?;
        Ok(ExperimentConfig {
            instance: keys.instance,
            repetitions: keys.repetitions,
            output: keys.output,
            algorithm,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.repetitions < 1 {
            return Err(ConfigError::Invalid("repetitions must be at least 1".into()));
        }
        self.algorithm
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Worker count from the environment, if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}
