//! Run-time side: parse a textual query against a store's schema and map it
//! to the best pre-generated speech.

use std::fmt;

use crate::store::{record_key, SpeechRecord, SpeechStore, StoreSchema};

/// A parsed query: one target column plus equality predicates over original
/// value strings, sorted by column name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub target: String,
    pub predicates: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryError {
    Syntax(String),
    UnknownTarget { name: String, suggestion: Option<String> },
    UnknownColumn { name: String, suggestion: Option<String> },
    UnknownValue { column: String, value: String, suggestion: Option<String> },
    DuplicateColumn(String),
    NoSpeeches(String),
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suggest = |s: &Option<String>| match s {
            Some(hint) => format!(" (did you mean '{}'?)", hint),
            None => String::new(),
        };
        match self {
            Self::Syntax(msg) => write!(f, "cannot parse query: {}", msg),
            Self::UnknownTarget { name, suggestion } => {
                write!(f, "unknown target '{}'{}", name, suggest(suggestion))
            }
            Self::UnknownColumn { name, suggestion } => {
                write!(f, "unknown column '{}'{}", name, suggest(suggestion))
            }
            Self::UnknownValue { column, value, suggestion } => {
                write!(f, "unknown value '{}' for column '{}'{}", value, column, suggest(suggestion))
            }
            Self::DuplicateColumn(name) => {
                write!(f, "column '{}' appears twice in the query", name)
            }
            Self::NoSpeeches(target) => write!(f, "no speeches for target '{}'", target),
        }
    }
}

impl std::error::Error for QueryError {}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = if ca.eq_ignore_ascii_case(&cb) { 0 } else { 1 };
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Nearest candidate within edit distance 2, if any.
fn suggest<'a, I: IntoIterator<Item = &'a str>>(name: &str, candidates: I) -> Option<String> {
    candidates
        .into_iter()
        .map(|c| (levenshtein(name, c), c))
        .filter(|&(d, _)| d <= 2)
        .min_by_key(|&(d, _)| d)
        .map(|(_, c)| c.to_string())
}

fn eq_fold(a: &str, b: &str) -> bool {
    a.len() == b.len() && a.chars().zip(b.chars()).all(|(x, y)| x.eq_ignore_ascii_case(&y))
}

/// Split on a keyword as a standalone word, case-insensitively.
fn split_keyword<'t>(text: &'t str, keyword: &str) -> Vec<&'t str> {
    let mut parts = Vec::new();
    let mut start = 0usize;
    let lower = text.to_ascii_lowercase();
    let mut search = 0usize;
    while let Some(pos) = lower[search..].find(keyword) {
        let at = search + pos;
        let before_ok = at == 0 || lower.as_bytes()[at - 1].is_ascii_whitespace();
        let end = at + keyword.len();
        let after_ok = end == lower.len() || lower.as_bytes()[end].is_ascii_whitespace();
        if before_ok && after_ok {
            parts.push(&text[start..at]);
            start = end;
        }
        search = end;
    }
    parts.push(&text[start..]);
    parts
}

/// Parse `TARGET [ where COL = VALUE { and COL = VALUE } ]`.
///
/// Keywords are case-insensitive; the target, columns and values match the
/// schema case-insensitively and resolve to their stored spelling. Unknown
/// names come back with a nearest-match suggestion when one is close.
pub fn parse_query(text: &str, schema: &StoreSchema) -> Result<Query, QueryError> {
    let pieces = split_keyword(text.trim(), "where");
    if pieces.len() > 2 {
        return Err(QueryError::Syntax("more than one 'where'".into()));
    }
    let target_text = pieces[0].trim();
    if target_text.is_empty() {
        return Err(QueryError::Syntax("missing target column".into()));
    }
    let target = schema
        .targets
        .iter()
        .find(|t| eq_fold(t, target_text))
        .cloned()
        .ok_or_else(|| QueryError::UnknownTarget {
            name: target_text.to_string(),
            suggestion: suggest(target_text, schema.targets.iter().map(String::as_str)),
        })?;

    let mut predicates: Vec<(String, String)> = Vec::new();
    if pieces.len() == 2 {
        for clause in split_keyword(pieces[1], "and") {
            let clause = clause.trim();
            let (col_text, value_text) = clause
                .split_once('=')
                .ok_or_else(|| QueryError::Syntax(format!("expected COL = VALUE in '{}'", clause)))?;
            let col_text = col_text.trim();
            let value_text = value_text.trim();
            let dim = schema
                .dimensions
                .iter()
                .find(|d| eq_fold(&d.name, col_text))
                .ok_or_else(|| QueryError::UnknownColumn {
                    name: col_text.to_string(),
                    suggestion: suggest(
                        col_text,
                        schema.dimensions.iter().map(|d| d.name.as_str()),
                    ),
                })?;
            let value = dim
                .values
                .iter()
                .find(|v| eq_fold(v, value_text))
                .cloned()
                .ok_or_else(|| QueryError::UnknownValue {
                    column: dim.name.clone(),
                    value: value_text.to_string(),
                    suggestion: suggest(value_text, dim.values.iter().map(String::as_str)),
                })?;
            if predicates.iter().any(|(c, _)| c == &dim.name) {
                return Err(QueryError::DuplicateColumn(dim.name.clone()));
            }
            predicates.push((dim.name.clone(), value));
        }
    }
    predicates.sort();
    Ok(Query { target, predicates })
}

/// The most specific stored speech for a query: the exact key when present,
/// otherwise — among records of the same target whose scope S is a subset of
/// the query predicates Q — one maximizing |S ∩ Q|, ties broken by smallest
/// canonical key.
pub fn lookup<'s>(store: &'s SpeechStore, query: &Query) -> Result<&'s SpeechRecord, QueryError> {
    if let Some(record) = store.get(&record_key(&query.target, &query.predicates)) {
        return Ok(record);
    }
    let mut best: Option<&SpeechRecord> = None;
    let mut any_for_target = false;
    for record in store.records() {
        if record.target != query.target {
            continue;
        }
        any_for_target = true;
        let contained =
            record.scope.iter().all(|binding| query.predicates.contains(binding));
        if !contained {
            continue;
        }
        // |S ∩ Q| = |S| once S ⊆ Q; records iterate in key order, so a
        // strict improvement check keeps the smallest key among ties.
        if best.is_none_or(|b| record.scope.len() > b.scope.len()) {
            best = Some(record);
        }
    }
    match best {
        Some(record) => Ok(record),
        None => {
            let _ = any_for_target;
            Err(QueryError::NoSpeeches(query.target.clone()))
        }
    }
}
