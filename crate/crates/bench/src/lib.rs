//! Shared setup for the criterion benchmarks.

use speechsum_core::pipeline::candidate_fact_groups_for;
use speechsum_core::summary::generate_facts_for_slice;
use speechsum_core::synth::synthetic_dataset;
use speechsum_core::{Dataset, FactCatalog};

/// A ready-to-summarize problem over the full synthetic dataset.
pub struct BenchProblem {
    pub ds: Dataset,
    pub slice: Vec<usize>,
    pub prior: f64,
    pub catalog: FactCatalog,
}

pub fn problem(dims: usize, values: usize, rows: usize, seed: u64) -> BenchProblem {
    let ds = synthetic_dataset(dims, values, rows, 5.0, seed);
    let slice: Vec<usize> = (0..ds.n_rows()).collect();
    let groups = candidate_fact_groups_for(dims, &[], 2, &[]);
    let catalog = generate_facts_for_slice(&ds, 0, &slice, &groups).expect("valid groups");
    let prior = ds.target(0).mean();
    BenchProblem { ds, slice, prior, catalog }
}
