//! Problem generation and batch pre-processing: enumerate every supported
//! query scope, summarize each with the configured algorithm, render the
//! speech text, and assemble the persisted store.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::{Algorithm, EngineConfig};
use crate::dataset::{Dataset, DimId, TargetId};
use crate::error::{EngineError, Result};
use crate::exact::exact_summary;
use crate::greedy::greedy_summary;
use crate::pruning::{fact_groups, naive_plan, opt_prune, CostParams, PrunedGains};
use crate::scope::Scope;
use crate::store::{
    fnv1a64, RecordFact, SpeechRecord, SpeechStore, StoreManifest, StoreSchema,
};
use crate::summary::{generate_facts_for_slice, slice_rows, Speech};
use crate::Deadline;

/// All query scopes restricting one fixed set of columns.
#[derive(Debug, Clone)]
pub struct QueryScopeGroup {
    pub columns: Vec<DimId>,
    pub scopes: Vec<Scope>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.clone());
        // Advance in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if combo[i] < n - (k - i) {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// One query per (target, column subset of size ≤ max_query_preds, distinct
/// value combination), in deterministic order: targets in config order, then
/// subsets by size then column ids, then scopes lexicographically.
pub fn enumerate_problems(
    ds: &Dataset,
    config: &EngineConfig,
) -> Result<Vec<(TargetId, QueryScopeGroup)>> {
    let d = ds.dimensions().len();
    let mut out = Vec::new();
    for target in 0..ds.targets().len() {
        for size in 0..=config.max_query_preds.min(d) {
            for columns in combinations(d, size) {
                let scopes = ds.distinct_combinations(&columns)?;
                out.push((target, QueryScopeGroup { columns, scopes }));
            }
        }
    }
    Ok(out)
}

/// Fact scope groups for one query scope: every superset of the query
/// columns adding up to `max_extra` dimensions, the query columns
/// themselves included, ordered by size then column ids. When
/// `required` is nonempty, only groups restricting all required columns
/// are kept.
pub fn candidate_fact_groups_for(
    total_dims: usize,
    query_columns: &[DimId],
    max_extra: usize,
    required: &[DimId],
) -> Vec<Vec<DimId>> {
    let remaining: Vec<DimId> =
        (0..total_dims).filter(|d| !query_columns.contains(d)).collect();
    let mut groups = Vec::new();
    for extra in 0..=max_extra.min(remaining.len()) {
        for combo in combinations(remaining.len(), extra) {
            let mut group: Vec<DimId> = query_columns.to_vec();
            group.extend(combo.iter().map(|&i| remaining[i]));
            group.sort_unstable();
            groups.push(group);
        }
    }
    groups.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
    groups.retain(|g| required.iter().all(|r| g.contains(r)));
    groups
}

/// Config-driven variant resolving the required fact columns by name.
pub fn candidate_fact_groups(
    ds: &Dataset,
    query_columns: &[DimId],
    config: &EngineConfig,
) -> Result<Vec<Vec<DimId>>> {
    let mut required = Vec::new();
    for name in &config.required_fact_columns {
        let id = ds
            .dimension_by_name(name)
            .ok_or_else(|| EngineError::UnknownColumn(name.clone()))?;
        required.push(id);
    }
    Ok(candidate_fact_groups_for(
        ds.dimensions().len(),
        query_columns,
        config.max_extra_fact_preds,
        &required,
    ))
}

/// Trim a value to at most two decimals, dropping trailing zeros.
pub fn format_value(v: f64) -> String {
    let mut s = format!("{:.2}", v);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn scope_phrase(labels: &[(String, String)]) -> String {
    if labels.is_empty() {
        "overall".to_string()
    } else {
        labels
            .iter()
            .map(|(col, value)| format!("{}={}", col, value))
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

/// Fill the speech template: the leading fact names the target, later facts
/// ride on "It is … for …".
pub fn render_speech(target: &str, facts: &[RecordFact]) -> Result<String> {
    let first = facts.first().ok_or_else(|| {
        EngineError::Data("cannot render a speech with zero facts".into())
    })?;
    let mut text = format!(
        "The average {} for {} is {}.",
        target,
        scope_phrase(&first.scope),
        format_value(first.value)
    );
    for fact in &facts[1..] {
        text.push_str(&format!(
            " It is {} for {}.",
            format_value(fact.value),
            scope_phrase(&fact.scope)
        ));
    }
    Ok(text)
}

/// Pre-processing knobs; `algorithm` overrides the config when set.
#[derive(Debug, Clone, Default)]
pub struct PreprocessOptions {
    pub algorithm: Option<Algorithm>,
    pub threads: Option<usize>,
    /// Wall-clock budget per query scope group; an expired group is dropped
    /// from the store with a warning.
    pub timeout: Option<std::time::Duration>,
}

#[derive(Debug, Clone)]
pub struct TargetStats {
    pub target: String,
    pub records: usize,
    pub fact_evals: u64,
    pub millis: u128,
}

#[derive(Debug)]
pub struct PreprocessReport {
    pub store: SpeechStore,
    pub per_target: Vec<TargetStats>,
    /// Query scope groups dropped by the per-group timeout.
    pub timed_out_groups: usize,
    /// Scopes skipped because no row carries the target.
    pub skipped_scopes: usize,
}

struct ScopeOutcome {
    record: SpeechRecord,
    fact_evals: u64,
}

#[allow(clippy::too_many_arguments)]
fn summarize_scope(
    ds: &Dataset,
    config: &EngineConfig,
    algorithm: Algorithm,
    target: TargetId,
    prior: f64,
    scope: &Scope,
    groups: &[Vec<DimId>],
    deadline: Option<&Deadline>,
) -> Result<Option<ScopeOutcome>> {
    let slice = slice_rows(ds, target, scope);
    if slice.is_empty() {
        return Ok(None);
    }
    let catalog = generate_facts_for_slice(ds, target, &slice, groups)?;
    if catalog.facts.is_empty() {
        return Ok(None);
    }
    let m = config.speech_length;

    let (speech, utility, base_error, fact_evals): (Speech, f64, f64, u64) = match algorithm {
        Algorithm::Greedy => {
            let r = greedy_summary(ds, &slice, target, prior, &catalog.facts, m, None, deadline)?;
            (r.speech, r.utility, r.base_error, r.gain_evals)
        }
        Algorithm::GreedyPruned | Algorithm::GreedyOpt => {
            let groups = fact_groups(&catalog);
            let params = CostParams::new(&config.pruning, slice.len());
            let plan = if algorithm == Algorithm::GreedyPruned {
                naive_plan(&groups, &params)
            } else {
                opt_prune(&groups, &params)
            };
            let mut provider = PrunedGains::new(&catalog, plan);
            let r = greedy_summary(
                ds,
                &slice,
                target,
                prior,
                &catalog.facts,
                m,
                Some(&mut provider),
                deadline,
            )?;
            (r.speech, r.utility, r.base_error, r.gain_evals)
        }
        Algorithm::Exact => {
            let r =
                exact_summary(ds, &slice, target, prior, &catalog.facts, m, 0.0, deadline)?;
            (r.speech, r.utility, r.base_error, r.fact_evals)
        }
    };

    let facts: Vec<RecordFact> = speech
        .facts()
        .iter()
        .map(|f| RecordFact { scope: f.scope.labels(ds), value: f.value, support: f.support })
        .collect();
    let target_name = ds.target(target).name().to_string();
    let text = render_speech(&target_name, &facts)?;
    let record = SpeechRecord {
        target: target_name,
        scope: scope.labels(ds),
        facts,
        utility,
        base_error,
        text,
    };
    Ok(Some(ScopeOutcome { record, fact_evals }))
}

/// Run the full pre-processing pipeline and assemble the store.
///
/// Scopes within a group run on a worker pool; results are merged in scope
/// order, so the store is identical for any thread count.
pub fn preprocess(
    ds: &Dataset,
    config: &EngineConfig,
    options: &PreprocessOptions,
) -> Result<PreprocessReport> {
    config.validate()?;
    let algorithm = options.algorithm.unwrap_or(config.algorithm);
    let fingerprint = match std::fs::read(&config.data) {
        Ok(bytes) => format!("{:016x}", fnv1a64(&bytes)),
        Err(_) => format!("{:016x}", fnv1a64(ds.name().as_bytes())),
    };
    let manifest = StoreManifest {
        version: 1,
        config: config.clone(),
        fingerprint,
        schema: StoreSchema::of(ds),
    };
    let mut store = SpeechStore::new(manifest);

    let mut priors = Vec::with_capacity(ds.targets().len());
    for t in ds.targets() {
        priors.push(config.prior.resolve(t.mean())?);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| EngineError::Config(format!("thread pool: {}", e)))?;

    let problems = enumerate_problems(ds, config)?;
    let mut per_target: Vec<TargetStats> = ds
        .targets()
        .iter()
        .map(|t| TargetStats {
            target: t.name().to_string(),
            records: 0,
            fact_evals: 0,
            millis: 0,
        })
        .collect();
    let mut timed_out_groups = 0usize;
    let mut skipped_scopes = 0usize;

    for (target, group) in &problems {
        let started = Instant::now();
        let deadline = options.timeout.map(Deadline::after);
        let groups = candidate_fact_groups(ds, &group.columns, config)?;
        let prior = priors[*target];
        let outcomes: Vec<Result<Option<ScopeOutcome>>> = pool.install(|| {
            group
                .scopes
                .par_iter()
                .map(|scope| {
                    if let Some(d) = &deadline {
                        d.check()?;
                    }
                    summarize_scope(
                        ds,
                        config,
                        algorithm,
                        *target,
                        prior,
                        scope,
                        &groups,
                        deadline.as_ref(),
                    )
                })
                .collect()
        });

        let mut group_records = Vec::new();
        let mut group_evals = 0u64;
        let mut cancelled = false;
        for outcome in outcomes {
            match outcome {
                Ok(Some(o)) => {
                    group_evals += o.fact_evals;
                    group_records.push(o.record);
                }
                Ok(None) => skipped_scopes += 1,
                Err(EngineError::Cancelled) => {
                    cancelled = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if cancelled {
            timed_out_groups += 1;
            continue;
        }
        let stats = &mut per_target[*target];
        stats.records += group_records.len();
        stats.fact_evals += group_evals;
        stats.millis += started.elapsed().as_millis();
        for record in group_records {
            store.insert(record)?;
        }
    }

    Ok(PreprocessReport { store, per_target, timed_out_groups, skipped_scopes })
}
