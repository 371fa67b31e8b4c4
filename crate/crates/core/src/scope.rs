use crate::dataset::{Dataset, DimId};

/// A conjunction of equality predicates on dimension columns.
///
/// Bindings are kept sorted by dimension id with no duplicate dimension, so
/// scopes compare and hash structurally. The empty scope matches every row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Scope {
    bindings: Vec<(DimId, u32)>,
}

impl Scope {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build a scope from arbitrary bindings. Sorts by dimension id.
    ///
    /// Panics on duplicate dimensions; callers construct scopes from
    /// deduplicated column sets.
    pub fn new(mut bindings: Vec<(DimId, u32)>) -> Self {
        bindings.sort_unstable();
        for pair in bindings.windows(2) {
            assert!(pair[0].0 != pair[1].0, "duplicate dimension in scope");
        }
        Self { bindings }
    }

    pub fn bindings(&self) -> &[(DimId, u32)] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn columns(&self) -> impl Iterator<Item = DimId> + '_ {
        self.bindings.iter().map(|&(d, _)| d)
    }

    /// True iff every binding matches the row's dimension values.
    pub fn matches_row(&self, ds: &Dataset, row: usize) -> bool {
        self.bindings.iter().all(|&(dim, value)| ds.dimension(dim).codes()[row] == value)
    }

    /// True iff `self`'s bindings are a subset of `other`'s.
    pub fn is_subset_of(&self, other: &Scope) -> bool {
        self.bindings.iter().all(|b| other.bindings.binary_search(b).is_ok())
    }

    /// Human-readable bindings as original strings, sorted by column name.
    pub fn labels(&self, ds: &Dataset) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .bindings
            .iter()
            .map(|&(dim, value)| {
                let col = ds.dimension(dim);
                (col.name().to_string(), col.decode(value).to_string())
            })
            .collect();
        out.sort();
        out
    }

    /// Canonical text key: `col=value` tokens sorted and joined by `&`.
    pub fn key(&self, ds: &Dataset) -> String {
        scope_key_from_labels(&self.labels(ds))
    }
}

/// Canonical key for already-stringified bindings (must be sorted).
pub fn scope_key_from_labels(labels: &[(String, String)]) -> String {
    let tokens: Vec<String> =
        labels.iter().map(|(col, value)| format!("{}={}", col, value)).collect();
    tokens.join("&")
}

/// True iff every binding of `scope` matches the row's dimension values.
pub fn within_scope(scope: &Scope, ds: &Dataset, row: usize) -> bool {
    scope.matches_row(ds, row)
}
