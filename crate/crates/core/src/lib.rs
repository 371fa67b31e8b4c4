//! Pre-computed fact-set summaries of multidimensional data.
//!
//! For every supported query scope over a columnar dataset, the engine
//! selects a bounded set of average-value facts that minimizes the deviation
//! between a modeled user's expectations and the data — exactly, or greedily
//! with a guaranteed approximation factor, optionally with cost-optimized
//! fact pruning — and serves the rendered summaries at query time by
//! best-match lookup.

use std::time::{Duration, Instant};

pub mod config;
pub mod dataset;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod oracle;
pub mod pipeline;
pub mod pruning;
pub mod runtime;
pub mod scope;
pub mod store;
pub mod summary;
pub mod synth;

pub use config::{Algorithm, EngineConfig, PriorSpec, PruningConfig};
pub use dataset::{load_dataset, Dataset, DimId, DimensionColumn, TargetColumn, TargetId};
pub use error::{EngineError, Result};
pub use exact::{exact_summary, passes_pruning, ExactResult, SpeechCandidate};
pub use greedy::{greedy_summary, GainProvider, GainSet, GreedyResult};
pub use oracle::brute_force_optimal;
pub use pipeline::{
    candidate_fact_groups, enumerate_problems, preprocess, render_speech, PreprocessOptions,
    PreprocessReport, QueryScopeGroup,
};
pub use pruning::{
    enumerate_plans, fact_groups, group_upper_bound, naive_plan, opt_prune, plan_cost,
    prune_probability, survival_probability, trivial_plan, utility_with_pruning, CostParams,
    FactGroup, PrunedGains, PruningPlan,
};
pub use runtime::{lookup, parse_query, Query, QueryError};
pub use scope::{within_scope, Scope};
pub use store::{record_key, RecordFact, SpeechRecord, SpeechStore, StoreManifest, StoreSchema};
pub use summary::{
    expected_value, generate_facts, marginal_gain, single_fact_utilities, slice_rows,
    speech_utility, update_expectations, ExpectationState, Fact, FactCatalog, Speech,
};

/// Cooperative wall-clock deadline. Long-running searches poll it and bail
/// out with [`EngineError::Cancelled`]; timeout policy itself lives with the
/// caller.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    at: Instant,
}

impl Deadline {
    pub fn after(budget: Duration) -> Self {
        Self { at: Instant::now() + budget }
    }

    pub fn expired(&self) -> bool {
        Instant::now() >= self.at
    }

    pub fn check(&self) -> Result<()> {
        if self.expired() {
            Err(EngineError::Cancelled)
        } else {
            Ok(())
        }
    }
}
