//! The `verify` subcommand: re-runs the optimality, guarantee, pruning and
//! submodularity suites against the configured dataset plus seeded random
//! instances, printing one line per suite.

use std::f64::consts::E;
use std::path::Path;

use speechsum_core::oracle::{brute_force_optimal_with_budget, subset_count, DEFAULT_BUDGET};
use speechsum_core::pipeline::candidate_fact_groups;
use speechsum_core::summary::generate_facts_for_slice;
use speechsum_core::synth::{random_instance, Instance};
use speechsum_core::{
    exact_summary, fact_groups, greedy_summary, load_dataset, naive_plan, opt_prune,
    speech_utility, CostParams, EngineConfig, Fact, PrunedGains, Scope, Speech,
};

use crate::Failure;

const TOL: f64 = 1e-9;

struct Suite {
    name: &'static str,
    passed: usize,
    failed: usize,
    skipped: usize,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, passed: 0, failed: 0, skipped: 0 }
    }

    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    fn print(&self) {
        let verdict = if self.failed == 0 { "PASS" } else { "FAIL" };
        println!(
            "{:<22} {}  ({} checks, {} failed, {} skipped)",
            self.name, verdict, self.passed + self.failed, self.failed, self.skipped
        );
    }
}

/// Instances derived from the configured dataset: one per target, over the
/// unrestricted query scope.
fn dataset_instances(config: &EngineConfig) -> Result<Vec<Instance>, Failure> {
    let (ds, _) = load_dataset(config.data.as_ref(), config).map_err(Failure::config)?;
    let groups = candidate_fact_groups(&ds, &[], config).map_err(Failure::config)?;
    let mut instances = Vec::new();
    for target in 0..ds.targets().len() {
        let slice = speechsum_core::slice_rows(&ds, target, &Scope::empty());
        if slice.is_empty() {
            continue;
        }
        let prior = config
            .prior
            .resolve(ds.target(target).mean())
            .map_err(Failure::config)?;
        let catalog =
            generate_facts_for_slice(&ds, target, &slice, &groups).map_err(Failure::config)?;
        instances.push(Instance {
            ds: ds.clone(),
            slice,
            target,
            prior,
            catalog,
            m: config.speech_length,
        });
    }
    Ok(instances)
}

pub fn run(config_path: &Path, n_instances: usize, seed: u64) -> Result<(), Failure> {
    let config = EngineConfig::from_file(config_path).map_err(Failure::config)?;
    let mut instances = dataset_instances(&config)?;
    for i in 0..n_instances {
        instances.push(random_instance(seed.wrapping_add(i as u64)));
    }

    let mut oracle_suite = Suite::new("oracle-equivalence");
    let mut guarantee_suite = Suite::new("greedy-guarantee");
    let mut pruning_suite = Suite::new("pruning-equivalence");
    let mut submodular_suite = Suite::new("submodularity");

    for inst in &instances {
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
        .map_err(Failure::config)?;

        // Oracle-backed suites only fit within the enumeration budget.
        if subset_count(inst.facts().len(), inst.m) <= DEFAULT_BUDGET {
            let (_, optimal) = brute_force_optimal_with_budget(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
                DEFAULT_BUDGET,
            )
            .map_err(Failure::config)?;
            let exact = exact_summary(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
                greedy.utility,
                None,
            )
            .map_err(Failure::config)?;
            oracle_suite.record((exact.utility - optimal).abs() <= TOL);
            guarantee_suite.record(greedy.utility >= (1.0 - 1.0 / E) * optimal - TOL);
        } else {
            oracle_suite.skipped += 1;
            guarantee_suite.skipped += 1;
        }

        let groups = fact_groups(&inst.catalog);
        let params = CostParams::new(&config.pruning, inst.slice.len());
        let mut equal = true;
        for plan in [naive_plan(&groups, &params), opt_prune(&groups, &params)] {
            let mut provider = PrunedGains::new(&inst.catalog, plan);
            let pruned = greedy_summary(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
                Some(&mut provider),
                None,
            )
            .map_err(Failure::config)?;
            equal &= greedy.picks.len() == pruned.picks.len()
                && greedy
                    .picks
                    .iter()
                    .zip(&pruned.picks)
                    .all(|(a, b)| (a.1 - b.1).abs() <= TOL)
                && (greedy.utility - pruned.utility).abs() <= TOL;
        }
        pruning_suite.record(equal);

        submodular_suite.record(submodularity_holds(inst));
    }

    for suite in [&oracle_suite, &guarantee_suite, &pruning_suite, &submodular_suite] {
        suite.print();
    }
    let failures = oracle_suite.failed
        + guarantee_suite.failed
        + pruning_suite.failed
        + submodular_suite.failed;
    if failures > 0 {
        return Err(Failure::config(format!("{} verification checks failed", failures)));
    }
    println!("all suites passed on {} instances", instances.len());
    Ok(())
}

/// Deterministic diminishing-returns check: nested prefixes of the fact list
/// as F1 ⊆ F2 with each remaining fact as the extension.
fn submodularity_holds(inst: &Instance) -> bool {
    let facts = inst.facts();
    let k = facts.len();
    if k < 2 {
        return true;
    }
    let utility = |ids: &[usize], extra: Option<usize>| -> f64 {
        let mut chosen: Vec<Fact> = ids.iter().map(|&i| facts[i].clone()).collect();
        if let Some(e) = extra {
            chosen.push(facts[e].clone());
        }
        speech_utility(&inst.ds, &inst.slice, inst.target, inst.prior, &Speech::new(chosen))
            .map(|(_, u)| u)
            .unwrap_or(0.0)
    };
    let f2_size = k.min(3);
    let f2: Vec<usize> = (0..f2_size).collect();
    for f1_size in 0..=f2_size {
        let f1 = &f2[..f1_size];
        let u1 = utility(f1, None);
        let u2 = utility(&f2, None);
        if u2 < u1 - TOL {
            return false;
        }
        for f in f2_size..k {
            let gain1 = utility(f1, Some(f)) - u1;
            let gain2 = utility(&f2, Some(f)) - u2;
            if gain1 < gain2 - TOL {
                return false;
            }
        }
    }
    true
}
