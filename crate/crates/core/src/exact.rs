//! Guaranteed-optimal summarization: iterative speech expansion with
//! permutation elimination and bound-based pruning against a lower bound.

use crate::dataset::{Dataset, TargetId};
use crate::error::Result;
use crate::greedy::greedy_summary;
use crate::summary::{dedup_facts, single_fact_utilities, speech_utility, Fact, Speech};
use crate::Deadline;

/// A partial speech under expansion.
///
/// Fact ids are ordered by non-increasing single-fact utility (ties by
/// ascending id), which keeps exactly one permutation per fact set alive.
/// `u_bound` sums the members' single-fact utilities and stays an upper
/// bound on the candidate's true utility.
#[derive(Debug, Clone)]
pub struct SpeechCandidate {
    pub fact_ids: Vec<u32>,
    pub u_bound: f64,
    pub last_single_utility: f64,
}

impl SpeechCandidate {
    fn single(fact_id: usize, single_utility: f64) -> Self {
        Self {
            fact_ids: vec![fact_id as u32],
            u_bound: single_utility,
            last_single_utility: single_utility,
        }
    }

    fn expand(&self, fact_id: usize, single_utility: f64) -> Self {
        let mut fact_ids = self.fact_ids.clone();
        fact_ids.push(fact_id as u32);
        Self {
            fact_ids,
            u_bound: self.u_bound + single_utility,
            last_single_utility: single_utility,
        }
    }

    pub fn len(&self) -> usize {
        self.fact_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fact_ids.is_empty()
    }
}

/// Both pruning conditions for expanding `cand` with fact `fact_id`.
///
/// Condition 1 admits only the canonical permutation: the new fact's single
/// utility must be strictly below the last one's, or equal with a larger id.
/// Condition 2 compares the optimistic completion `u_bound + remaining·fu`
/// against the lower bound `b`; equality survives, so an optimum whose
/// utility equals `b` is never lost. `remaining` counts the additions still
/// to come, including this fact.
pub fn passes_pruning(
    cand: &SpeechCandidate,
    fact_id: usize,
    single_utility: f64,
    b: f64,
    remaining: usize,
) -> bool {
    let last_id = *cand.fact_ids.last().expect("candidates are never empty") as usize;
    let ordered = cand.last_single_utility > single_utility
        || (cand.last_single_utility == single_utility && last_id < fact_id);
    ordered && cand.u_bound + remaining as f64 * single_utility >= b
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub speech: Speech,
    pub utility: f64,
    pub base_error: f64,
    pub error: f64,
    /// Candidate expansions rejected by either pruning condition.
    pub pruned_expansions: u64,
    /// Full-length candidates whose exact utility was computed.
    pub final_candidates: u64,
    /// Speech- and fact-level utility evaluations, including the greedy seed.
    pub fact_evals: u64,
}

/// Optimal speech of up to `m` facts.
///
/// Seeds the search with a greedy run (its utility, combined with the
/// caller's `b`, drives bound pruning) and keeps the greedy speech in the
/// final argmax, so the result never falls below the seed even if pruning
/// empties the candidate set.
#[allow(clippy::too_many_arguments)]
pub fn exact_summary(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    facts: &[Fact],
    m: usize,
    b: f64,
    deadline: Option<&Deadline>,
) -> Result<ExactResult> {
    let (result, _) = run(ds, slice, target, prior, facts, m, b, deadline)?;
    Ok(result)
}

/// Search driver; also returns the surviving full-length candidates so the
/// bound and permutation invariants can be inspected.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    facts: &[Fact],
    m: usize,
    b: f64,
    deadline: Option<&Deadline>,
) -> Result<(ExactResult, Vec<SpeechCandidate>)> {
    let (pool, _) = dedup_facts(facts);
    let m_eff = m.min(pool.len());

    let seed = greedy_summary(ds, slice, target, prior, &pool, m_eff, None, deadline)?;
    let mut fact_evals = seed.gain_evals;
    if m_eff == 0 {
        let (error, utility) = speech_utility(ds, slice, target, prior, &Speech::empty())?;
        let result = ExactResult {
            speech: Speech::empty(),
            utility,
            base_error: error + utility,
            error,
            pruned_expansions: 0,
            final_candidates: 0,
            fact_evals,
        };
        return Ok((result, Vec::new()));
    }

    let singles = single_fact_utilities(ds, slice, target, prior, &pool);
    fact_evals += pool.len() as u64;
    let bound = b.max(seed.utility);

    let mut candidates: Vec<SpeechCandidate> =
        (0..pool.len()).map(|i| SpeechCandidate::single(i, singles[i])).collect();
    let mut pruned_expansions = 0u64;

    for _ in 2..=m_eff {
        if let Some(d) = deadline {
            d.check()?;
        }
        let mut expanded = Vec::new();
        for cand in &candidates {
            if let Some(d) = deadline {
                d.check()?;
            }
            let remaining = m_eff - cand.len();
            for (fact_id, &fu) in singles.iter().enumerate() {
                if passes_pruning(cand, fact_id, fu, bound, remaining) {
                    expanded.push(cand.expand(fact_id, fu));
                } else {
                    pruned_expansions += 1;
                }
            }
        }
        candidates = expanded;
        if candidates.is_empty() {
            break;
        }
    }

    // Exact utility of each survivor; the greedy seed enters first so ties
    // resolve toward it.
    let mut best_speech = seed.speech.clone();
    let mut best_utility = seed.utility;
    for cand in &candidates {
        if let Some(d) = deadline {
            d.check()?;
        }
        let speech = Speech::new(
            cand.fact_ids.iter().map(|&i| pool[i as usize].clone()).collect(),
        );
        let (_, utility) = speech_utility(ds, slice, target, prior, &speech)?;
        fact_evals += 1;
        if utility > best_utility {
            best_utility = utility;
            best_speech = speech;
        }
    }

    let (error, utility) = speech_utility(ds, slice, target, prior, &best_speech)?;
    let result = ExactResult {
        speech: best_speech,
        utility,
        base_error: error + utility,
        error,
        pruned_expansions,
        final_candidates: candidates.len() as u64,
        fact_evals,
    };
    Ok((result, candidates))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::oracle::brute_force_optimal;
    use crate::pipeline::candidate_fact_groups_for;
    use crate::summary::generate_facts_for_slice;
    use crate::synth::{flight_grid, random_instance};

    fn grid_catalog() -> (Dataset, Vec<usize>, Vec<Fact>) {
        let ds = flight_grid();
        let slice: Vec<usize> = (0..16).collect();
        let groups = candidate_fact_groups_for(2, &[], 2, &[]);
        let catalog = generate_facts_for_slice(&ds, 0, &slice, &groups).unwrap();
        (ds, slice, catalog.facts)
    }

    #[test]
    fn fixture_matches_brute_force_optimum() {
        let (ds, slice, facts) = grid_catalog();
        assert_eq!(facts.len(), 25);
        let (_, oracle) = brute_force_optimal(&ds, &slice, 0, 0.0, &facts, 2).unwrap();
        let seed = greedy_summary(&ds, &slice, 0, 0.0, &facts, 2, None, None).unwrap();
        let result =
            exact_summary(&ds, &slice, 0, 0.0, &facts, 2, seed.utility, None).unwrap();
        assert!((result.utility - oracle).abs() <= 1e-9);
    }

    #[test]
    fn length_one_picks_the_best_single_fact() {
        let (ds, slice, mut facts) = grid_catalog();
        facts.retain(|f| !f.scope.is_empty());
        let result = exact_summary(&ds, &slice, 0, 0.0, &facts, 1, 0.0, None).unwrap();
        assert_eq!(result.utility, 40.0);
    }

    #[test]
    fn single_candidate_fact_is_returned_regardless_of_m() {
        let (ds, slice, facts) = grid_catalog();
        let one = vec![facts[3].clone()];
        let result = exact_summary(&ds, &slice, 0, 0.0, &one, 3, 0.0, None).unwrap();
        assert_eq!(result.speech.len(), 1);
        assert_eq!(result.speech.facts()[0], one[0]);
    }

    #[test]
    fn pruning_condition_examples() {
        // A 20-utility candidate cannot reach b=85 with one 20-utility addition.
        let cand = SpeechCandidate::single(2, 20.0);
        assert!(!passes_pruning(&cand, 5, 20.0, 85.0, 1));
        // Ordering: a higher-utility fact may not follow a lower-utility one.
        assert!(!passes_pruning(&cand, 5, 40.0, 0.0, 1));
        // With b=0 the bound condition is vacuous for ordered utilities.
        assert!(passes_pruning(&cand, 5, 10.0, 0.0, 1));
        // Equal utilities order by ascending fact id.
        assert!(passes_pruning(&cand, 5, 20.0, 0.0, 1));
        assert!(!passes_pruning(&cand, 1, 20.0, 0.0, 1));
        // The bound condition keeps equality.
        assert!(passes_pruning(&cand, 5, 20.0, 40.0, 1));
    }

    #[test]
    fn survivors_have_sound_bounds_and_unique_fact_sets() {
        for seed in [3u64, 17, 21, 404] {
            let inst = random_instance(seed);
            let greedy = greedy_summary(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
                None,
                None,
            )
            .unwrap();
            let (result, survivors) = run(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
                greedy.utility,
                None,
            )
            .unwrap();
            let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
            for cand in &survivors {
                let mut ids = cand.fact_ids.clone();
                ids.sort_unstable();
                assert!(seen.insert(ids), "duplicate fact set survived (seed {})", seed);
                let speech = Speech::new(
                    cand.fact_ids.iter().map(|&i| inst.facts()[i as usize].clone()).collect(),
                );
                let (_, utility) =
                    speech_utility(&inst.ds, &inst.slice, inst.target, inst.prior, &speech)
                        .unwrap();
                assert!(utility <= cand.u_bound + 1e-9, "bound violated (seed {})", seed);
            }
            assert!(result.utility + 1e-9 >= greedy.utility);
        }
    }

    #[test]
    fn raising_the_bound_prunes_more_without_changing_the_result() {
        for seed in [2u64, 9, 33] {
            let inst = random_instance(seed);
            let (_, optimal) = brute_force_optimal(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
            )
            .unwrap();
            let mut last_pruned = 0u64;
            let mut last_utility: Option<f64> = None;
            for fraction in [0.0, 0.5, 1.0] {
                let result = exact_summary(
                    &inst.ds,
                    &inst.slice,
                    inst.target,
                    inst.prior,
                    inst.facts(),
                    inst.m,
                    optimal * fraction,
                    None,
                )
                .unwrap();
                assert!(result.pruned_expansions >= last_pruned);
                last_pruned = result.pruned_expansions;
                if let Some(prev) = last_utility {
                    assert!((result.utility - prev).abs() <= 1e-9);
                }
                last_utility = Some(result.utility);
            }
        }
    }
}
