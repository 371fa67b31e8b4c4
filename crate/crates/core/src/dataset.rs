use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::config::EngineConfig;
use crate::error::{EngineError, Result};
use crate::scope::Scope;

pub type DimId = usize;
pub type TargetId = usize;

/// Reserved category for missing or empty dimension cells. It behaves like
/// any other value afterwards, keeping every row addressable by scopes.
pub const NULL_CATEGORY: &str = "∅NULL";

/// A dictionary-encoded dimension column.
#[derive(Debug, Clone)]
pub struct DimensionColumn {
    name: String,
    codes: Vec<u32>,
    dictionary: Vec<String>,
}

impl DimensionColumn {
    pub fn new(name: impl Into<String>, codes: Vec<u32>, dictionary: Vec<String>) -> Self {
        let col = Self { name: name.into(), codes, dictionary };
        debug_assert!(col.codes.iter().all(|&c| (c as usize) < col.dictionary.len()));
        col
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn cardinality(&self) -> usize {
        self.dictionary.len()
    }

    pub fn decode(&self, code: u32) -> &str {
        &self.dictionary[code as usize]
    }

    pub fn encode(&self, value: &str) -> Option<u32> {
        self.dictionary.iter().position(|v| v == value).map(|i| i as u32)
    }

    pub fn dictionary(&self) -> &[String] {
        &self.dictionary
    }
}

/// A numeric target column with a per-row validity mask.
///
/// Rows whose cell did not parse stay in the dataset (they may carry other
/// targets) but are skipped by every aggregation over this column.
#[derive(Debug, Clone)]
pub struct TargetColumn {
    name: String,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl TargetColumn {
    pub fn new(name: impl Into<String>, values: Vec<f64>, valid: Vec<bool>) -> Self {
        assert_eq!(values.len(), valid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { name: name.into(), values, valid }
    }

    /// All rows valid.
    pub fn dense(name: impl Into<String>, values: Vec<f64>) -> Self {
        let valid = vec![true; values.len()];
        Self::new(name, values, valid)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, row: usize) -> f64 {
        self.values[row]
    }

    pub fn is_valid(&self, row: usize) -> bool {
        self.valid[row]
    }

    /// Mean over all valid rows.
    pub fn mean(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (v, ok) in self.values.iter().zip(&self.valid) {
            if *ok {
                sum += v;
                count += 1;
            }
        }
        sum / count as f64
    }
}

/// An immutable columnar table: dictionary-encoded dimensions plus numeric
/// targets. Row order is file order; sums iterate in row order so aggregates
/// are reproducible bit for bit.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    n_rows: usize,
    dimensions: Vec<DimensionColumn>,
    targets: Vec<TargetColumn>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        n_rows: usize,
        dimensions: Vec<DimensionColumn>,
        targets: Vec<TargetColumn>,
    ) -> Self {
        for d in &dimensions {
            assert_eq!(d.codes.len(), n_rows, "dimension length mismatch");
        }
        for t in &targets {
            assert_eq!(t.values.len(), n_rows, "target length mismatch");
        }
        Self { name: name.into(), n_rows, dimensions, targets }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dimensions(&self) -> &[DimensionColumn] {
        &self.dimensions
    }

    pub fn targets(&self) -> &[TargetColumn] {
        &self.targets
    }

    pub fn dimension(&self, id: DimId) -> &DimensionColumn {
        &self.dimensions[id]
    }

    pub fn target(&self, id: TargetId) -> &TargetColumn {
        &self.targets[id]
    }

    pub fn dimension_by_name(&self, name: &str) -> Option<DimId> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn target_by_name(&self, name: &str) -> Option<TargetId> {
        self.targets.iter().position(|t| t.name == name)
    }

    /// Every distinct value combination of `cols` present in the data, each as
    /// a scope over exactly those columns, in lexicographic order of value ids.
    /// The empty column set yields the single empty scope.
    pub fn distinct_combinations(&self, cols: &[DimId]) -> Result<Vec<Scope>> {
        for &c in cols {
            if c >= self.dimensions.len() {
                return Err(EngineError::UnknownColumn(format!("dimension id {}", c)));
            }
        }
        let rows: Vec<usize> = (0..self.n_rows).collect();
        Ok(self.distinct_combinations_in(cols, &rows))
    }

    /// Distinct combinations restricted to `rows`. Infallible variant used on
    /// already-validated column sets; this count is the M(g) statistic of the
    /// pruning cost model.
    pub fn distinct_combinations_in(&self, cols: &[DimId], rows: &[usize]) -> Vec<Scope> {
        let mut sorted: Vec<DimId> = cols.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        for &row in rows {
            let key: Vec<u32> = sorted.iter().map(|&d| self.dimensions[d].codes[row]).collect();
            seen.insert(key);
        }
        seen.into_iter()
            .map(|key| Scope::new(sorted.iter().copied().zip(key).collect()))
            .collect()
    }
}

fn detect_delimiter(header: &str, config: &EngineConfig) -> Result<char> {
    if let Some(d) = &config.delimiter {
        return Ok(if d == "\t" { '\t' } else { ',' });
    }
    let commas = header.matches(',').count();
    let tabs = header.matches('\t').count();
    if commas == 0 && tabs == 0 {
        return Err(EngineError::Data(
            "could not detect a delimiter in the header (no comma or tab)".into(),
        ));
    }
    Ok(if tabs > commas { '\t' } else { ',' })
}

/// Load a delimited text table into a [`Dataset`].
///
/// Declared dimensions are dictionary-encoded in first-appearance order;
/// missing dimension cells become the reserved [`NULL_CATEGORY`]. Target
/// cells parse as reals; a row whose target cells are all unparseable is
/// dropped (and counted in the returned statistics).
pub fn load_dataset(path: &Path, config: &EngineConfig) -> Result<(Dataset, LoadStats)> {
    let text = fs::read_to_string(path)
        .map_err(|source| EngineError::Io { path: path.to_path_buf(), source })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| EngineError::Data(format!("{}: empty file", path.display())))?;
    let delimiter = detect_delimiter(header, config)?;
    let columns: Vec<&str> = header.split(delimiter).map(str::trim).collect();

    let mut dim_idx = Vec::with_capacity(config.dimensions.len());
    for name in &config.dimensions {
        let idx = columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| EngineError::MissingColumn(name.clone()))?;
        dim_idx.push(idx);
    }
    let mut target_idx = Vec::with_capacity(config.targets.len());
    for name in &config.targets {
        let idx = columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| EngineError::MissingColumn(name.clone()))?;
        target_idx.push(idx);
    }

    let mut dim_codes: Vec<Vec<u32>> = vec![Vec::new(); dim_idx.len()];
    let mut dictionaries: Vec<Vec<String>> = vec![Vec::new(); dim_idx.len()];
    let mut target_values: Vec<Vec<f64>> = vec![Vec::new(); target_idx.len()];
    let mut target_valid: Vec<Vec<bool>> = vec![Vec::new(); target_idx.len()];
    let mut dropped = 0usize;

    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(delimiter).map(str::trim).collect();
        let parsed: Vec<Option<f64>> = target_idx
            .iter()
            .map(|&i| cells.get(i).and_then(|c| c.parse::<f64>().ok()).filter(|v| v.is_finite()))
            .collect();
        if parsed.iter().all(Option::is_none) {
            dropped += 1;
            continue;
        }
        for (k, &i) in dim_idx.iter().enumerate() {
            let raw = cells.get(i).copied().unwrap_or("");
            let value = if raw.is_empty() { NULL_CATEGORY } else { raw };
            let code = match dictionaries[k].iter().position(|v| v == value) {
                Some(c) => c as u32,
                None => {
                    dictionaries[k].push(value.to_string());
                    (dictionaries[k].len() - 1) as u32
                }
            };
            dim_codes[k].push(code);
        }
        for (k, value) in parsed.into_iter().enumerate() {
            target_values[k].push(value.unwrap_or(0.0));
            target_valid[k].push(value.is_some());
        }
    }

    let n_rows = dim_codes.first().map_or_else(|| target_values[0].len(), Vec::len);
    for (k, name) in config.targets.iter().enumerate() {
        if !target_valid[k].iter().any(|&ok| ok) {
            return Err(EngineError::EmptyTarget(name.clone()));
        }
    }

    let dimensions = config
        .dimensions
        .iter()
        .zip(dim_codes.into_iter().zip(dictionaries))
        .map(|(name, (codes, dict))| DimensionColumn::new(name.clone(), codes, dict))
        .collect();
    let targets = config
        .targets
        .iter()
        .zip(target_values.into_iter().zip(target_valid))
        .map(|(name, (values, valid))| TargetColumn::new(name.clone(), values, valid))
        .collect();

    let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok((Dataset::new(name, n_rows, dimensions, targets), LoadStats { dropped_rows: dropped }))
}

/// Ingestion statistics reported alongside a loaded dataset.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadStats {
    /// Rows dropped because no declared target value parsed.
    pub dropped_rows: usize,
}
