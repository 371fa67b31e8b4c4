use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Which summarization algorithm the pipeline runs per query scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Exhaustive search with permutation elimination and bound pruning.
    Exact,
    /// Plain greedy selection, evaluating every candidate fact each round.
    Greedy,
    /// Greedy with the naive pruning plan (prune at every occasion).
    GreedyPruned,
    /// Greedy with the cost-optimized pruning plan.
    GreedyOpt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Greedy => "greedy",
            Self::GreedyPruned => "greedy-pruned",
            Self::GreedyOpt => "greedy-opt",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "greedy" => Ok(Self::Greedy),
            "greedy-pruned" => Ok(Self::GreedyPruned),
            "greedy-opt" => Ok(Self::GreedyOpt),
            other => Err(EngineError::Config(format!(
                "unknown algorithm '{}' (expected exact, greedy, greedy-pruned or greedy-opt)",
                other
            ))),
        }
    }
}

/// The user's default expectation before hearing any fact.
///
/// Either the overall mean of the target column, or a fixed constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorSpec {
    Constant(f64),
    Named(String),
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self::Named("column_mean".to_string())
    }
}

impl PriorSpec {
    /// Resolve against the overall mean of the target column.
    pub fn resolve(&self, column_mean: f64) -> Result<f64> {
        match self {
            Self::Constant(v) => Ok(*v),
            Self::Named(name) if name == "column_mean" => Ok(column_mean),
            Self::Named(other) => Err(EngineError::Config(format!(
                "unknown prior '{}' (expected \"column_mean\" or a number)",
                other
            ))),
        }
    }
}

/// Parameters of the pruning cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruningConfig {
    /// Standard deviation of the modeled per-group utility bound.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Per-row weight of a gain computation pass.
    #[serde(default = "default_w_u")]
    pub w_u: f64,
    /// Per-row weight of a bound computation pass.
    #[serde(default = "default_w_d")]
    pub w_d: f64,
}

fn default_sigma() -> f64 {
    0.25
}
fn default_w_u() -> f64 {
    1.0
}
fn default_w_d() -> f64 {
    0.3
}

impl Default for PruningConfig {
    fn default() -> Self {
        Self { sigma: default_sigma(), w_u: default_w_u(), w_d: default_w_d() }
    }
}

/// Engine configuration, read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Path to the delimited data file. Relative paths are resolved against
    /// the directory of the configuration file.
    pub data: String,
    /// Columns usable in query and fact predicates, in declaration order.
    pub dimensions: Vec<String>,
    /// Numeric columns to summarize.
    pub targets: Vec<String>,
    /// Maximal number of equality predicates per query scope.
    #[serde(default = "default_max_query_preds")]
    pub max_query_preds: usize,
    /// Maximal number of extra predicates a fact may add to the query scope.
    #[serde(default = "default_max_extra_fact_preds")]
    pub max_extra_fact_preds: usize,
    /// Maximal number of facts per speech.
    #[serde(default = "default_speech_length")]
    pub speech_length: usize,
    /// Default user expectation: "column_mean" or a constant.
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub pruning: PruningConfig,
    /// Field delimiter override; auto-detected from the header when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<String>,
    /// Columns every fact scope must restrict. Empty means no requirement.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub required_fact_columns: Vec<String>,
}

fn default_max_query_preds() -> usize {
    2
}
fn default_max_extra_fact_preds() -> usize {
    2
}
fn default_speech_length() -> usize {
    3
}
fn default_algorithm() -> Algorithm {
    Algorithm::Greedy
}

impl EngineConfig {
    /// Minimal config with all defaults; handy for tests and synthetic data.
    pub fn new(
        data: impl Into<String>,
        dimensions: Vec<String>,
        targets: Vec<String>,
    ) -> Self {
        Self {
            data: data.into(),
            dimensions,
            targets,
            max_query_preds: default_max_query_preds(),
            max_extra_fact_preds: default_max_extra_fact_preds(),
            speech_length: default_speech_length(),
            prior: PriorSpec::default(),
            algorithm: default_algorithm(),
            pruning: PruningConfig::default(),
            delimiter: None,
            required_fact_columns: Vec::new(),
        }
    }

    /// Read a config document, resolving the data path against the config dir.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|source| EngineError::Io { path: path.to_path_buf(), source })?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| EngineError::Config(format!("{}: {}", path.display(), e)))?;
        config.validate()?;
        let data_path = PathBuf::from(&config.data);
        if data_path.is_relative() {
            if let Some(dir) = path.parent() {
                config.data = dir.join(data_path).to_string_lossy().into_owned();
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions.is_empty() {
            return Err(EngineError::Config("at least one dimension is required".into()));
        }
        if self.targets.is_empty() {
            return Err(EngineError::Config("at least one target is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in self.dimensions.iter().chain(self.targets.iter()) {
            if !seen.insert(name.as_str()) {
                return Err(EngineError::Config(format!("column '{}' declared twice", name)));
            }
        }
        if let Some(d) = &self.delimiter {
            if d != "," && d != "\t" {
                return Err(EngineError::Config(
                    "delimiter must be \",\" or \"\\t\"".into(),
                ));
            }
        }
        if self.pruning.sigma <= 0.0 || self.pruning.w_u <= 0.0 || self.pruning.w_d <= 0.0 {
            return Err(EngineError::Config("pruning parameters must be positive".into()));
        }
        for col in &self.required_fact_columns {
            if !self.dimensions.contains(col) {
                return Err(EngineError::Config(format!(
                    "required fact column '{}' is not a declared dimension",
                    col
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg: EngineConfig = serde_json::from_str(
            r#"{"data":"d.csv","dimensions":["a"],"targets":["t"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.max_query_preds, 2);
        assert_eq!(cfg.max_extra_fact_preds, 2);
        assert_eq!(cfg.speech_length, 3);
        assert_eq!(cfg.algorithm, Algorithm::Greedy);
        assert_eq!(cfg.prior, PriorSpec::Named("column_mean".into()));
        assert_eq!(cfg.pruning, PruningConfig { sigma: 0.25, w_u: 1.0, w_d: 0.3 });
    }

    #[test]
    fn prior_accepts_number_or_name() {
        let cfg: EngineConfig = serde_json::from_str(
            r#"{"data":"d.csv","dimensions":["a"],"targets":["t"],"prior":0}"#,
        )
        .unwrap();
        assert_eq!(cfg.prior.resolve(7.5).unwrap(), 0.0);
        let cfg: EngineConfig = serde_json::from_str(
            r#"{"data":"d.csv","dimensions":["a"],"targets":["t"],"prior":"column_mean"}"#,
        )
        .unwrap();
        assert_eq!(cfg.prior.resolve(7.5).unwrap(), 7.5);
        let bad = PriorSpec::Named("median".into());
        assert!(bad.resolve(1.0).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for algo in [
            Algorithm::Exact,
            Algorithm::Greedy,
            Algorithm::GreedyPruned,
            Algorithm::GreedyOpt,
        ] {
            assert_eq!(algo.name().parse::<Algorithm>().unwrap(), algo);
        }
        assert!("fastest".parse::<Algorithm>().is_err());
    }
}
