//! Near-optimal summarization by iterative best-fact selection.

use crate::dataset::{Dataset, TargetId};
use crate::error::Result;
use crate::summary::{
    dedup_facts, speech_utility, ExpectationState, Fact, Speech,
};
use crate::Deadline;

/// Marginal gains for one selection round. `None` marks facts a pruning
/// provider skipped; present entries are exact gains.
#[derive(Debug, Clone)]
pub struct GainSet {
    pub gains: Vec<Option<f64>>,
    /// Number of per-fact gain computations performed.
    pub evals: u64,
}

impl GainSet {
    /// Index of the best present gain; ties break toward the smaller index.
    pub fn argmax(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, gain) in self.gains.iter().enumerate() {
            if let Some(g) = gain {
                if best.is_none_or(|(_, bg)| *g > bg) {
                    best = Some((i, *g));
                }
            }
        }
        best
    }
}

/// Supplies per-round marginal gains; the pruning module implements this to
/// skip dominated fact groups.
pub trait GainProvider {
    /// Gains for the current expectations. `facts` is the deduplicated pool
    /// the caller selects from; the result must be indexed the same way.
    fn gains(&mut self, state: &ExpectationState<'_>, facts: &[Fact]) -> GainSet;
}

/// Evaluates every fact, one scan of the slice per fact.
pub struct ExhaustiveGains;

impl GainProvider for ExhaustiveGains {
    fn gains(&mut self, state: &ExpectationState<'_>, facts: &[Fact]) -> GainSet {
        let gains = facts.iter().map(|f| Some(state.marginal_gain(f))).collect();
        GainSet { gains, evals: facts.len() as u64 }
    }
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub speech: Speech,
    pub utility: f64,
    pub base_error: f64,
    pub error: f64,
    /// `(fact index, marginal gain)` per iteration, in selection order.
    /// Indices refer to the caller's fact list.
    pub picks: Vec<(usize, f64)>,
    pub gain_evals: u64,
}

/// Greedily add the most useful fact until `m` facts are chosen or the best
/// marginal gain reaches zero. Each round selects the argmax gain — via
/// `provider` when supplied, otherwise by evaluating all facts — with ties
/// broken by fact order, then updates the expectations.
#[allow(clippy::too_many_arguments)]
pub fn greedy_summary(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    facts: &[Fact],
    m: usize,
    mut provider: Option<&mut dyn GainProvider>,
    deadline: Option<&Deadline>,
) -> Result<GreedyResult> {
    let (pool, original) = dedup_facts(facts);
    let mut state = ExpectationState::new(ds, slice.to_vec(), target, prior);
    let mut picks: Vec<(usize, f64)> = Vec::new();
    let mut chosen: Vec<Fact> = Vec::new();
    let mut gain_evals = 0u64;
    let mut exhaustive = ExhaustiveGains;

    for _ in 0..m.min(pool.len()) {
        if let Some(d) = deadline {
            d.check()?;
        }
        // No residual error means no fact can gain anything.
        if state.total_error() <= 0.0 {
            break;
        }
        let gain_set = match provider.as_deref_mut() {
            Some(p) => p.gains(&state, &pool),
            None => exhaustive.gains(&state, &pool),
        };
        gain_evals += gain_set.evals;
        let (best, best_gain) = match gain_set.argmax() {
            Some(found) => found,
            None => break,
        };
        if best_gain <= 0.0 {
            break;
        }
        state.apply(&pool[best]);
        chosen.push(pool[best].clone());
        picks.push((original[best], best_gain));
    }

    let speech = Speech::new(chosen);
    let (error, utility) = speech_utility(ds, slice, target, prior, &speech)?;
    Ok(GreedyResult {
        speech,
        utility,
        base_error: error + utility,
        error,
        picks,
        gain_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::candidate_fact_groups_for;
    use crate::summary::{generate_facts_for_slice, marginal_gain, ExpectationState};
    use crate::synth::{flight_grid, random_instance};

    fn grid_facts(include_empty_group: bool) -> (Dataset, Vec<usize>, Vec<Fact>) {
        let ds = flight_grid();
        let slice: Vec<usize> = (0..16).collect();
        let mut groups = candidate_fact_groups_for(2, &[], 2, &[]);
        if !include_empty_group {
            groups.retain(|g| !g.is_empty());
        }
        let catalog = generate_facts_for_slice(&ds, 0, &slice, &groups).unwrap();
        (ds, slice, catalog.facts)
    }

    // Region/season facts only: the setting of the worked greedy example.
    #[test]
    fn single_round_ties_at_forty() {
        let (ds, slice, facts) = grid_facts(false);
        let result = greedy_summary(&ds, &slice, 0, 0.0, &facts, 1, None, None).unwrap();
        assert_eq!(result.utility, 40.0);
        assert_eq!(result.speech.len(), 1);
        let label = result.speech.facts()[0].scope.key(&ds);
        assert!(label == "region=North" || label == "season=Winter");
    }

    #[test]
    fn two_rounds_select_winter_and_north() {
        let (ds, slice, facts) = grid_facts(false);
        let result = greedy_summary(&ds, &slice, 0, 0.0, &facts, 2, None, None).unwrap();
        assert_eq!(result.utility, 65.0);
        let mut keys: Vec<String> =
            result.speech.facts().iter().map(|f| f.scope.key(&ds)).collect();
        keys.sort();
        assert_eq!(keys, vec!["region=North".to_string(), "season=Winter".to_string()]);
        assert_eq!(result.picks[0].1, 40.0);
        assert_eq!(result.picks[1].1, 25.0);
    }

    #[test]
    fn zero_length_returns_empty_speech() {
        let (ds, slice, facts) = grid_facts(true);
        let result = greedy_summary(&ds, &slice, 0, 0.0, &facts, 0, None, None).unwrap();
        assert!(result.speech.is_empty());
        assert_eq!(result.utility, 0.0);
        assert_eq!(result.base_error, 120.0);
    }

    // With the overall-average fact available it wins the first round.
    #[test]
    fn overall_fact_dominates_when_present() {
        let (ds, slice, facts) = grid_facts(true);
        let result = greedy_summary(&ds, &slice, 0, 0.0, &facts, 2, None, None).unwrap();
        assert!(result.speech.facts()[0].scope.is_empty());
        assert_eq!(result.picks[0].1, 60.0);
        assert_eq!(result.utility, 75.0);
    }

    #[test]
    fn each_pick_is_a_true_argmax_and_trajectory_is_monotone() {
        for seed in 0..30u64 {
            let inst = random_instance(seed);
            let result = greedy_summary(
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
            // Replay the trajectory, re-scanning all facts at every step.
            let mut state =
                ExpectationState::new(&inst.ds, inst.slice.clone(), inst.target, inst.prior);
            let mut last_utility = 0.0;
            let mut total = 0.0;
            for &(fact_id, gain) in &result.picks {
                let best_anywhere = inst
                    .facts()
                    .iter()
                    .map(|f| marginal_gain(&state, f))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!((gain - best_anywhere).abs() <= 1e-9, "seed {}", seed);
                total += gain;
                assert!(total >= last_utility - 1e-9, "monotone trajectory");
                last_utility = total;
                state.apply(&inst.facts()[fact_id]);
            }
            assert!((result.utility - total).abs() <= 1e-9);
        }
    }

    #[test]
    fn duplicate_facts_collapse_before_the_loop() {
        let (ds, slice, facts) = grid_facts(false);
        let mut doubled = facts.clone();
        doubled.extend(facts.iter().cloned());
        let a = greedy_summary(&ds, &slice, 0, 0.0, &facts, 3, None, None).unwrap();
        let b = greedy_summary(&ds, &slice, 0, 0.0, &doubled, 3, None, None).unwrap();
        assert_eq!(a.utility, b.utility);
        assert_eq!(a.picks, b.picks);
    }
}
