//! Independent brute-force ground truth. Enumerates every fact subset and
//! scores each from scratch; deliberately shares no code path with the
//! optimizers beyond the kernel's utility definition.

use crate::dataset::{Dataset, TargetId};
use crate::error::{EngineError, Result};
use crate::summary::{speech_utility, Fact, Speech};

/// Default enumeration budget, in subsets.
pub const DEFAULT_BUDGET: u128 = 2_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out
}

/// Number of subsets the oracle would evaluate for `k` facts and length `m`.
pub fn subset_count(k: usize, m: usize) -> u128 {
    (0..=m.min(k)).map(|size| binomial(k, size)).sum()
}

/// Maximal-utility speech over every fact subset of size ≤ m, enumerated in
/// colexicographic order with no pruning whatsoever.
pub fn brute_force_optimal(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    facts: &[Fact],
    m: usize,
) -> Result<(Speech, f64)> {
    brute_force_optimal_with_budget(ds, slice, target, prior, facts, m, DEFAULT_BUDGET)
}

pub fn brute_force_optimal_with_budget(
    ds: &Dataset,
    slice: &[usize],
    target: TargetId,
    prior: f64,
    facts: &[Fact],
    m: usize,
    budget: u128,
) -> Result<(Speech, f64)> {
    let combinations = subset_count(facts.len(), m);
    if combinations > budget {
        return Err(EngineError::BudgetExceeded { combinations, budget });
    }
    let mut best_speech = Speech::empty();
    let mut best_utility = 0.0f64;
    let mut indices: Vec<usize> = Vec::new();
    for size in 1..=m.min(facts.len()) {
        indices.clear();
        indices.extend(0..size);
        loop {
            let speech = Speech::new(indices.iter().map(|&i| facts[i].clone()).collect());
            let (_, utility) = speech_utility(ds, slice, target, prior, &speech)?;
            if utility > best_utility {
                best_utility = utility;
                best_speech = speech;
            }
            // Advance to the next combination in colexicographic order.
            let mut pos = 0;
            loop {
                if pos == size {
                    break;
                }
                let limit = if pos + 1 == size { facts.len() } else { indices[pos + 1] };
                if indices[pos] + 1 < limit {
                    indices[pos] += 1;
                    for (lower, slot) in indices[..pos].iter_mut().enumerate() {
                        *slot = lower;
                    }
                    break;
                }
                pos += 1;
            }
            if pos == size {
                break;
            }
        }
    }
    Ok((best_speech, best_utility))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::flight_grid;

    #[test]
    fn zero_length_returns_empty_speech() {
        let ds = flight_grid();
        let slice: Vec<usize> = (0..16).collect();
        let facts = vec![Fact {
            scope: crate::scope::Scope::empty(),
            value: 7.5,
            support: 16,
        }];
        let (speech, utility) = brute_force_optimal(&ds, &slice, 0, 0.0, &facts, 0).unwrap();
        assert!(speech.is_empty());
        assert_eq!(utility, 0.0);
    }

    #[test]
    fn single_fact_pool_returns_its_utility() {
        let ds = flight_grid();
        let slice: Vec<usize> = (0..16).collect();
        let facts = vec![Fact { scope: crate::scope::Scope::empty(), value: 7.5, support: 16 }];
        let (speech, utility) = brute_force_optimal(&ds, &slice, 0, 0.0, &facts, 3).unwrap();
        assert_eq!(speech.len(), 1);
        let singles = crate::summary::single_fact_utilities(&ds, &slice, 0, 0.0, &facts);
        assert_eq!(utility, singles[0]);
    }

    #[test]
    fn budget_violation_is_reported() {
        let ds = flight_grid();
        let slice: Vec<usize> = (0..16).collect();
        let facts: Vec<Fact> = (0..30)
            .map(|i| Fact {
                scope: crate::scope::Scope::new(vec![(0, (i % 4) as u32)]),
                value: i as f64,
                support: 1,
            })
            .collect();
        let err =
            brute_force_optimal_with_budget(&ds, &slice, 0, 0.0, &facts, 3, 100).unwrap_err();
        assert!(matches!(err, EngineError::BudgetExceeded { .. }));
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subset_count(25, 2), 1 + 25 + 300);
        assert_eq!(subset_count(4, 9), 16);
    }
}
