//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).

use std::f64::consts::E;

use speechsum_core::pipeline::candidate_fact_groups_for;
use speechsum_core::summary::generate_facts_for_slice;
use speechsum_core::synth::{flight_grid, random_instance, skewed_instance, Instance};
use speechsum_core::{
    brute_force_optimal, exact_summary, fact_groups, greedy_summary, naive_plan, opt_prune,
    preprocess, prune_probability, speech_utility, trivial_plan, CostParams, Dataset,
    DimensionColumn, EngineConfig, ExpectationState, Fact, PreprocessOptions, PriorSpec,
    PrunedGains, Speech, SpeechStore, TargetColumn,
};

const TOL: f64 = 1e-9;

fn pass(criterion: &str) {
    println!("ACCEPTANCE PASS: {}", criterion);
}

fn fixture_catalog(include_empty_group: bool) -> (Dataset, Vec<usize>, Vec<Fact>) {
    let ds = flight_grid();
    let slice: Vec<usize> = (0..16).collect();
    let mut groups = candidate_fact_groups_for(2, &[], 2, &[]);
    if !include_empty_group {
        groups.retain(|g| !g.is_empty());
    }
    let catalog = generate_facts_for_slice(&ds, 0, &slice, &groups).unwrap();
    (ds, slice, catalog.facts)
}

fn fixture_config() -> EngineConfig {
    let mut config = EngineConfig::new(
        "fixture",
        vec!["region".into(), "season".into()],
        vec!["delay".into()],
    );
    config.max_query_preds = 1;
    config.max_extra_fact_preds = 2;
    config.speech_length = 2;
    config.prior = PriorSpec::Constant(0.0);
    config
}

fn fact<'a>(ds: &Dataset, facts: &'a [Fact], key: &str) -> &'a Fact {
    facts.iter().find(|f| f.scope.key(ds) == key).expect("fixture fact")
}

#[test]
fn criterion_01_fixture_fidelity() {
    let (ds, slice, facts) = fixture_catalog(false);

    let (error, utility) = speech_utility(&ds, &slice, 0, 0.0, &Speech::empty()).unwrap();
    assert!((error - 120.0).abs() <= TOL && utility.abs() <= TOL);

    let speech1 = Speech::new(vec![
        fact(&ds, &facts, "region=South&season=Summer").clone(),
        fact(&ds, &facts, "region=East&season=Winter").clone(),
    ]);
    let (_, utility) = speech_utility(&ds, &slice, 0, 0.0, &speech1).unwrap();
    assert!((utility - 40.0).abs() <= TOL);

    let singles = speechsum_core::single_fact_utilities(&ds, &slice, 0, 0.0, &facts);
    let max = singles.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((max - 40.0).abs() <= TOL);
    let tied: Vec<String> = facts
        .iter()
        .zip(&singles)
        .filter(|(_, &u)| (u - max).abs() <= TOL)
        .map(|(f, _)| f.scope.key(&ds))
        .collect();
    assert_eq!(tied, vec!["region=North".to_string(), "season=Winter".to_string()]);

    let winter = fact(&ds, &facts, "season=Winter").clone();
    let mut state = ExpectationState::new(&ds, slice.clone(), 0, 0.0);
    state.apply(&winter);
    assert!((state.marginal_gain(fact(&ds, &facts, "region=North")) - 25.0).abs() <= TOL);

    // Post-Winter per-scope residual sums: Fall = 10, East = 5.
    let scope_sum = |dim: usize, value: &str| -> f64 {
        let code = ds.dimension(dim).encode(value).unwrap();
        state
            .slice()
            .iter()
            .enumerate()
            .filter(|(_, &row)| ds.dimension(dim).codes()[row] == code)
            .map(|(i, _)| state.residual(i))
            .sum()
    };
    assert!((scope_sum(1, "Fall") - 10.0).abs() <= TOL);
    assert!((scope_sum(0, "East") - 5.0).abs() <= TOL);

    pass("1 fixture fidelity (error 120, speech-1 utility 40, tie at 40, gain 25, bounds 10/5)");
}

fn solved_instances() -> Vec<(Instance, f64)> {
    (0..50u64)
        .map(|seed| {
            let inst = random_instance(seed);
            let (_, optimal) = brute_force_optimal(
                &inst.ds,
                &inst.slice,
                inst.target,
                inst.prior,
                inst.facts(),
                inst.m,
            )
            .expect("instances fit the oracle budget");
            (inst, optimal)
        })
        .collect()
}

#[test]
fn criterion_02_exact_equals_oracle() {
    let started = std::time::Instant::now();
    for (inst, optimal) in solved_instances() {
        let seed = greedy_summary(
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
        let exact = exact_summary(
            &inst.ds,
            &inst.slice,
            inst.target,
            inst.prior,
            inst.facts(),
            inst.m,
            seed.utility,
            None,
        )
        .unwrap();
        assert!(
            (exact.utility - optimal).abs() <= TOL,
            "exact {} != oracle {} (instance {})",
            exact.utility,
            optimal,
            inst.ds.name()
        );
    }
    assert!(started.elapsed().as_secs() < 30);
    pass("2 exact = oracle on 50 seeded instances");
}

#[test]
fn criterion_03_greedy_guarantee() {
    let factor = 1.0 - 1.0 / E;
    let mut ratios = Vec::new();
    let mut check = |ds: &Dataset, slice: &[usize], prior: f64, facts: &[Fact], m: usize| {
        let (_, optimal) = brute_force_optimal(ds, slice, 0, prior, facts, m).unwrap();
        let greedy = greedy_summary(ds, slice, 0, prior, facts, m, None, None).unwrap();
        assert!(greedy.utility >= factor * optimal - TOL);
        if optimal > 0.0 {
            ratios.push(greedy.utility / optimal);
        }
    };
    for (inst, _) in solved_instances() {
        check(&inst.ds, &inst.slice, inst.prior, inst.facts(), inst.m);
    }
    let (ds, slice, facts) = fixture_catalog(true);
    check(&ds, &slice, 0.0, &facts, 2);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    println!("  greedy/optimal mean ratio: {:.4} over {} instances", mean, ratios.len());
    pass("3 greedy within (1 - 1/e) of the optimum on every instance");
}

#[test]
fn criterion_04_pruning_soundness() {
    for (inst, _) in solved_instances() {
        let groups = fact_groups(&inst.catalog);
        let params = CostParams { sigma: 0.25, w_u: 1.0, w_d: 0.3, n: inst.slice.len() };
        let base = greedy_summary(
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
            .unwrap();
            assert_eq!(base.picks.len(), pruned.picks.len());
            for (a, b) in base.picks.iter().zip(&pruned.picks) {
                assert!((a.1 - b.1).abs() <= TOL, "per-iteration gains diverged");
            }
            assert!((base.utility - pruned.utility).abs() <= TOL);
        }
    }
    pass("4 naive, optimized and no pruning pick identical-gain facts and utilities");
}

#[test]
fn criterion_05_submodularity_and_monotonicity() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0usize;
    let mut instance_seed = 1000u64;
    while checked < 1000 {
        let inst = random_instance(instance_seed);
        instance_seed += 1;
        let k = inst.facts().len();
        if k < 2 {
            continue;
        }
        for _ in 0..20 {
            let f2_size = rng.random_range(1..=k.min(4));
            let mut ids: Vec<usize> = (0..k).collect();
            for i in 0..f2_size {
                let j = rng.random_range(i..k);
                ids.swap(i, j);
            }
            let f2_ids = &ids[..f2_size];
            let f1_size = rng.random_range(0..=f2_size);
            let f1_ids = &f2_ids[..f1_size];
            let outside: Vec<usize> =
                (0..k).filter(|i| !f2_ids.contains(i)).collect();
            if outside.is_empty() {
                continue;
            }
            let f = outside[rng.random_range(0..outside.len())];

            let utility = |ids: &[usize], extra: Option<usize>| -> f64 {
                let mut facts: Vec<Fact> =
                    ids.iter().map(|&i| inst.facts()[i].clone()).collect();
                if let Some(e) = extra {
                    facts.push(inst.facts()[e].clone());
                }
                speech_utility(&inst.ds, &inst.slice, inst.target, inst.prior, &Speech::new(facts))
                    .unwrap()
                    .1
            };
            let u1 = utility(f1_ids, None);
            let u2 = utility(f2_ids, None);
            let u1f = utility(f1_ids, Some(f));
            let u2f = utility(f2_ids, Some(f));
            assert!(u2 >= u1 - TOL, "monotonicity violated");
            assert!(
                (u1f - u1) >= (u2f - u2) - TOL,
                "diminishing returns violated: {} < {}",
                u1f - u1,
                u2f - u2
            );
            checked += 1;
            if checked == 1000 {
                break;
            }
        }
    }
    pass("5 submodularity and monotonicity hold on 1,000 seeded triples");
}

#[test]
fn criterion_06_cost_model_sanity() {
    for m in [1usize, 3, 7, 100] {
        for sigma in [0.05, 0.25, 2.0] {
            assert_eq!(prune_probability(m, m, sigma), 0.5);
        }
    }
    assert!((prune_probability(2, 8, 0.25) - 0.85558).abs() <= 5e-4);
    let groups: Vec<speechsum_core::FactGroup> = [1usize, 4, 16]
        .iter()
        .enumerate()
        .map(|(i, &m)| speechsum_core::FactGroup { columns: vec![i], m_count: m, facts: 0..0 })
        .collect();
    let reference = trivial_plan(
        &groups,
        &CostParams { sigma: 0.25, w_u: 1.0, w_d: 0.3, n: 64 },
    )
    .est_cost;
    for sigma in [0.01, 0.25, 1.0, 1e3, 1e6] {
        let params = CostParams { sigma, w_u: 1.0, w_d: 0.3, n: 64 };
        assert_eq!(speechsum_core::plan_cost(&trivial_plan(&groups, &params), &groups, &params), reference);
    }
    pass("6 cost model sanity (p(m,m)=0.5, p(2,8,.25)=0.85558, trivial cost σ-free)");
}

#[test]
fn criterion_07_pruning_effectiveness() {
    let ds = skewed_instance(10_000);
    // The 2-value dimension must explain at least 90% of target variance.
    let mean = ds.target(0).mean();
    let total_var: f64 =
        (0..ds.n_rows()).map(|r| (ds.target(0).value(r) - mean).powi(2)).sum();
    let mut group_means = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for r in 0..ds.n_rows() {
        let a = ds.dimension(0).codes()[r] as usize;
        group_means[a] += ds.target(0).value(r);
        counts[a] += 1;
    }
    for a in 0..2 {
        group_means[a] /= counts[a] as f64;
    }
    let residual_var: f64 = (0..ds.n_rows())
        .map(|r| {
            let a = ds.dimension(0).codes()[r] as usize;
            (ds.target(0).value(r) - group_means[a]).powi(2)
        })
        .sum();
    assert!(1.0 - residual_var / total_var >= 0.9);

    let slice: Vec<usize> = (0..ds.n_rows()).collect();
    let groups_cols = candidate_fact_groups_for(2, &[], 2, &[]);
    let catalog = generate_facts_for_slice(&ds, 0, &slice, &groups_cols).unwrap();
    assert_eq!(catalog.facts.len(), 1 + 2 + 100 + 200);

    let base =
        greedy_summary(&ds, &slice, 0, 0.0, &catalog.facts, 3, None, None).unwrap();
    let groups = fact_groups(&catalog);
    let params = CostParams { sigma: 0.25, w_u: 1.0, w_d: 0.3, n: slice.len() };
    let mut provider = PrunedGains::new(&catalog, opt_prune(&groups, &params));
    let optimized = greedy_summary(
        &ds,
        &slice,
        0,
        0.0,
        &catalog.facts,
        3,
        Some(&mut provider),
        None,
    )
    .unwrap();

    assert!(optimized.utility >= base.utility - TOL);
    assert!(
        2 * optimized.gain_evals <= base.gain_evals,
        "optimized pruning evaluated {} of {} gains",
        optimized.gain_evals,
        base.gain_evals
    );
    println!(
        "  gain evaluations: greedy-base {}, greedy-opt {}",
        base.gain_evals, optimized.gain_evals
    );
    pass("7 optimized pruning does at most half the gain evaluations, same utility");
}

#[test]
fn criterion_08_pipeline_counts() {
    // Fixture: l = 1, one target, no empty slices ⇒ exactly 9 records.
    let ds = flight_grid();
    let config = fixture_config();
    let report = preprocess(&ds, &config, &PreprocessOptions::default()).unwrap();
    assert_eq!(report.store.len(), 9);

    // A dataset with a target gap: the record count follows
    // t·Σ M(C) − (empty-slice scopes), under the C(d,l)·n^l query bound.
    let sparse = Dataset::new(
        "sparse",
        3,
        vec![DimensionColumn::new(
            "a",
            vec![0, 1, 2],
            vec!["x".into(), "y".into(), "z".into()],
        )],
        vec![TargetColumn::new("t", vec![1.0, 0.0, 3.0], vec![true, false, true])],
    );
    let mut config = EngineConfig::new("sparse", vec!["a".into()], vec!["t".into()]);
    config.max_query_preds = 1;
    config.prior = PriorSpec::Constant(0.0);
    let report = preprocess(&sparse, &config, &PreprocessOptions::default()).unwrap();
    let m_sum = 1 + 3; // M(∅) + M({a})
    assert_eq!(report.skipped_scopes, 1); // the y-scope carries no target
    assert_eq!(report.store.len(), m_sum - report.skipped_scopes);

    let (t, d, l, n) = (1usize, 1usize, 1usize, 3usize);
    let bound: usize = (0..=l).map(|i| binomial(d, i) * n.pow(i as u32)).sum::<usize>() * t;
    assert!(report.store.len() + report.skipped_scopes <= bound);
    pass("8 record counts match t·ΣM(C) minus empty slices; fixture yields 9");
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut out = 1usize;
    for i in 0..k.min(n - k) {
        out = out * (n - i) / (i + 1);
    }
    out
}

#[test]
fn criterion_09_store_round_trip_and_thread_determinism() {
    let ds = flight_grid();
    let config = fixture_config();
    let serial = preprocess(
        &ds,
        &config,
        &PreprocessOptions { threads: Some(1), ..Default::default() },
    )
    .unwrap();
    let parallel = preprocess(
        &ds,
        &config,
        &PreprocessOptions { threads: Some(8), ..Default::default() },
    )
    .unwrap();

    let record_section = |store: &SpeechStore| -> String {
        store.to_jsonl().lines().skip(1).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(record_section(&serial.store), record_section(&parallel.store));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.jsonl");
    serial.store.save(&path).unwrap();
    let loaded = SpeechStore::load(&path).unwrap();
    assert_eq!(
        serial.store.records().collect::<Vec<_>>(),
        loaded.records().collect::<Vec<_>>()
    );
    assert_eq!(loaded.manifest, serial.store.manifest);
    pass("9 save∘load is identity; 1-thread and 8-thread record sections match");
}

#[test]
fn criterion_10_lookup_law() {
    use rand::Rng;
    use rand::SeedableRng;

    let grid = flight_grid();
    let grid_store =
        preprocess(&grid, &fixture_config(), &PreprocessOptions::default()).unwrap().store;

    let synth = speechsum_core::synth::synthetic_dataset(3, 3, 120, 4.0, 11);
    let mut synth_config = EngineConfig::new(
        "synth",
        vec!["dim0".into(), "dim1".into(), "dim2".into()],
        vec!["value".into()],
    );
    synth_config.max_query_preds = 2;
    synth_config.speech_length = 2;
    let synth_store =
        preprocess(&synth, &synth_config, &PreprocessOptions::default()).unwrap().store;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0usize;
    for (ds, store) in [(&grid, &grid_store), (&synth, &synth_store)] {
        for _ in 0..100 {
            let target = ds.target(0).name().to_string();
            let n_preds = rng.random_range(0..=ds.dimensions().len());
            let mut predicates: Vec<(String, String)> = Vec::new();
            let mut dims: Vec<usize> = (0..ds.dimensions().len()).collect();
            for i in 0..n_preds {
                let j = rng.random_range(i..dims.len());
                dims.swap(i, j);
                let dim = ds.dimension(dims[i]);
                let value = dim.decode(rng.random_range(0..dim.cardinality() as u32));
                predicates.push((dim.name().to_string(), value.to_string()));
            }
            predicates.sort();
            let query = speechsum_core::Query { target: target.clone(), predicates };
            let record = speechsum_core::lookup(store, &query).expect("lookup is total");

            // Exhaustive re-derivation of the best match.
            assert!(record.scope.iter().all(|b| query.predicates.contains(b)));
            let best = store
                .records()
                .filter(|r| {
                    r.target == target
                        && r.scope.iter().all(|b| query.predicates.contains(b))
                })
                .map(|r| r.scope.len())
                .max()
                .unwrap();
            assert_eq!(record.scope.len(), best, "overlap not maximal");
            let smallest_key = store
                .records()
                .filter(|r| {
                    r.target == target
                        && r.scope.len() == best
                        && r.scope.iter().all(|b| query.predicates.contains(b))
                })
                .map(|r| r.key())
                .min()
                .unwrap();
            assert_eq!(record.key(), smallest_key, "tie not broken by smallest key");
            // Exact-match priority.
            if record.scope.len() == query.predicates.len() {
                assert_eq!(record.key(), speechsum_core::record_key(&target, &query.predicates));
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 200);
    pass("10 lookup returns S ⊆ Q with maximal overlap on 200 random queries");
}
