use std::collections::BTreeMap;
use std::ops::Range;

use crate::dataset::{Dataset, DimId, TargetId};
use crate::error::{EngineError, Result};
use crate::scope::Scope;

/// A scope plus the average target value over its in-scope rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub scope: Scope,
    pub value: f64,
    /// Number of slice rows the average was computed over (always ≥ 1).
    pub support: usize,
}

/// A bounded set of facts summarizing one data subset.
///
/// Facts are kept in presentation order (selection order for greedy,
/// decreasing single-fact utility for exhaustive search); set semantics is
/// by scope, and no two facts may share a scope.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Speech {
    facts: Vec<Fact>,
}

impl Speech {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(facts: Vec<Fact>) -> Self {
        let mut scopes: Vec<&Scope> = facts.iter().map(|f| &f.scope).collect();
        scopes.sort();
        for pair in scopes.windows(2) {
            assert!(pair[0] != pair[1], "speech facts must have distinct scopes");
        }
        Self { facts }
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Scopes in canonical order, for set comparisons.
    pub fn sorted_scopes(&self) -> Vec<&Scope> {
        let mut scopes: Vec<&Scope> = self.facts.iter().map(|f| &f.scope).collect();
        scopes.sort();
        scopes
    }

    pub fn same_fact_set(&self, other: &Speech) -> bool {
        self.sorted_scopes() == other.sorted_scopes()
    }
}

/// Facts generated for one query scope, laid out group-contiguously.
///
/// Groups appear in deterministic order (ascending size, then column ids);
/// facts within a group are ordered lexicographically by scope value ids, so
/// a fact's index doubles as its tie-breaking rank.
#[derive(Debug, Clone)]
pub struct FactCatalog {
    pub facts: Vec<Fact>,
    pub group_columns: Vec<Vec<DimId>>,
    pub group_ranges: Vec<Range<usize>>,
}

impl FactCatalog {
    pub fn group_of_fact(&self, fact_id: usize) -> usize {
        self.group_ranges
            .iter()
            .position(|r| r.contains(&fact_id))
            .expect("fact id out of catalog range")
    }
}

/// Rows of `query_scope` whose target value is present, in row order.
pub fn slice_rows(ds: &Dataset, target: TargetId, query_scope: &Scope) -> Vec<usize> {
    (0..ds.n_rows())
        .filter(|&row| ds.target(target).is_valid(row) && query_scope.matches_row(ds, row))
        .collect()
}

/// One aggregation pass per fact group over `slice`, emitting one fact per
/// distinct value combination with support ≥ 1; value is the mean target.
pub fn generate_facts_for_slice(
    ds: &Dataset,
    target: TargetId,
    slice: &[usize],
    fact_groups: &[Vec<DimId>],
) -> Result<FactCatalog> {
    if target >= ds.targets().len() {
        return Err(EngineError::UnknownColumn(format!("target id {}", target)));
    }
    let tcol = ds.target(target);
    let mut facts = Vec::new();
    let mut group_columns = Vec::with_capacity(fact_groups.len());
    let mut group_ranges = Vec::with_capacity(fact_groups.len());
    for cols in fact_groups {
        for &c in cols {
            if c >= ds.dimensions().len() {
                return Err(EngineError::UnknownColumn(format!("dimension id {}", c)));
            }
        }
        let mut sorted = cols.clone();
        sorted.sort_unstable();
        let start = facts.len();
        let mut cells: BTreeMap<Vec<u32>, (usize, f64)> = BTreeMap::new();
        for &row in slice {
            let key: Vec<u32> =
                sorted.iter().map(|&d| ds.dimension(d).codes()[row]).collect();
            let cell = cells.entry(key).or_insert((0, 0.0));
            cell.0 += 1;
            cell.1 += tcol.value(row);
        }
        for (key, (count, sum)) in cells {
            facts.push(Fact {
                scope: Scope::new(sorted.iter().copied().zip(key).collect()),
                value: sum / count as f64,
                support: count,
            });
        }
        group_columns.push(sorted);
        group_ranges.push(start..facts.len());
    }
    Ok(FactCatalog { facts, group_columns, group_ranges })
}

/// Facts for a query scope: restricts rows to the scope, then aggregates per
/// group. Groups are expected to be supersets of the scope's columns.
pub fn generate_facts(
    ds: &Dataset,
    target: TargetId,
    query_scope: &Scope,
    fact_groups: &[Vec<DimId>],
) -> Result<FactCatalog> {
    let slice = slice_rows(ds, target, query_scope);
    generate_facts_for_slice(ds, target, &slice, fact_groups)
}

/// The candidate value closest to the row's true target value, among the
/// prior and every fact value whose scope contains the row. Ties break
/// toward the numerically smaller candidate; total deviation is unaffected
/// by the tie rule.
pub fn expected_value(
    ds: &Dataset,
    target: TargetId,
    prior: f64,
    speech: &Speech,
    row: usize,
) -> f64 {
    let truth = ds.target(target).value(row);
    let mut best = prior;
    let mut best_dist = (prior - truth).abs();
    for fact in speech.facts() {
        if fact.scope.matches_row(ds, row) {
            let dist = (fact.value - truth).abs();
            if dist < best_dist || (dist == best_dist && fact.value < best) {
                best = fact.value;
                best_dist = dist;
            }
        }
    }
    best
}

/// Accumulated deviation of a speech over `slice` and its utility relative
/// to the empty speech: `(error, base_error − error)`.
pub fn speech_utility(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    speech: &Speech,
) -> Result<(f64, f64)> {
    if slice.is_empty() {
        return Err(EngineError::EmptySlice);
    }
    let tcol = ds.target(target);
    let mut error = 0.0;
    let mut base_error = 0.0;
    for &row in slice {
        let truth = tcol.value(row);
        error += (expected_value(ds, target, prior, speech, row) - truth).abs();
        base_error += (prior - truth).abs();
    }
    Ok((error, base_error - error))
}

/// Utility of each singleton speech, in fact order.
pub fn single_fact_utilities(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    facts: &[Fact],
) -> Vec<f64> {
    let tcol = ds.target(target);
    facts
        .iter()
        .map(|fact| {
            let mut utility = 0.0;
            for &row in slice {
                if fact.scope.matches_row(ds, row) {
                    let truth = tcol.value(row);
                    let before = (prior - truth).abs();
                    let with = (fact.value - truth).abs();
                    utility += before - before.min(with);
                }
            }
            utility
        })
        .collect()
}

/// Per-row user expectations for the current partial speech over one slice.
///
/// Single-owner state: algorithms clone or mutate their own copy. Distinct
/// query scopes carry independent states and may run in parallel.
#[derive(Debug, Clone)]
pub struct ExpectationState<'d> {
    ds: &'d Dataset,
    target: TargetId,
    prior: f64,
    slice: Vec<usize>,
    expectations: Vec<f64>,
}

impl<'d> ExpectationState<'d> {
    /// Fresh state: every expectation starts at the prior.
    pub fn new(ds: &'d Dataset, slice: Vec<usize>, target: TargetId, prior: f64) -> Self {
        let expectations = vec![prior; slice.len()];
        Self { ds, target, prior, slice, expectations }
    }

    pub fn dataset(&self) -> &'d Dataset {
        self.ds
    }

    pub fn target(&self) -> TargetId {
        self.target
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn slice(&self) -> &[usize] {
        &self.slice
    }

    pub fn expectations(&self) -> &[f64] {
        &self.expectations
    }

    /// |expectation − truth| for the i-th slice row.
    pub fn residual(&self, i: usize) -> f64 {
        let truth = self.ds.target(self.target).value(self.slice[i]);
        (self.expectations[i] - truth).abs()
    }

    /// Current accumulated deviation over the slice, in row order.
    pub fn total_error(&self) -> f64 {
        (0..self.slice.len()).map(|i| self.residual(i)).sum()
    }

    /// Exact utility increase from adding `fact` to the current speech.
    ///
    /// Per in-scope row: `|e − v| − |closest(e, fact.value; v) − v|`,
    /// always ≥ 0 under the closest-value model.
    pub fn marginal_gain(&self, fact: &Fact) -> f64 {
        let tcol = self.ds.target(self.target);
        let mut gain = 0.0;
        for (i, &row) in self.slice.iter().enumerate() {
            if fact.scope.matches_row(self.ds, row) {
                let truth = tcol.value(row);
                let before = (self.expectations[i] - truth).abs();
                let with = (fact.value - truth).abs();
                gain += before - before.min(with);
            }
        }
        gain
    }

    /// Move each in-scope expectation to whichever of {current, fact value}
    /// is closer to the truth; ties keep the current expectation.
    pub fn apply(&mut self, fact: &Fact) {
        let tcol = self.ds.target(self.target);
        for (i, &row) in self.slice.iter().enumerate() {
            if fact.scope.matches_row(self.ds, row) {
                let truth = tcol.value(row);
                if (fact.value - truth).abs() < (self.expectations[i] - truth).abs() {
                    self.expectations[i] = fact.value;
                }
            }
        }
    }
}

/// Exact utility increase of `fact` given the expectations in `state`.
pub fn marginal_gain(state: &ExpectationState<'_>, fact: &Fact) -> f64 {
    state.marginal_gain(fact)
}

/// Functional variant of [`ExpectationState::apply`].
pub fn update_expectations<'d>(state: &ExpectationState<'d>, fact: &Fact) -> ExpectationState<'d> {
    let mut next = state.clone();
    next.apply(fact);
    next
}

/// Collapse duplicate-scope facts, keeping the first occurrence. Returns the
/// surviving facts with their original indices.
pub fn dedup_facts(facts: &[Fact]) -> (Vec<Fact>, Vec<usize>) {
    let mut seen: BTreeMap<&Scope, ()> = BTreeMap::new();
    let mut pool = Vec::with_capacity(facts.len());
    let mut original = Vec::with_capacity(facts.len());
    for (i, fact) in facts.iter().enumerate() {
        if seen.insert(&fact.scope, ()).is_none() {
            pool.push(fact.clone());
            original.push(i);
        }
    }
    (pool, original)
}
