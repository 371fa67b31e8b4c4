//! Cost-model-driven elimination of dominated fact groups before gain
//! evaluation. A pruning plan names source groups whose computed gains bound
//! away target groups (and their specializations); the optimizer picks the
//! plan with minimal estimated cost.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::ops::Range;

use crate::config::PruningConfig;
use crate::dataset::DimId;
use crate::greedy::{GainProvider, GainSet};
use crate::summary::{ExpectationState, Fact, FactCatalog};

/// All facts restricting the same set of dimension columns; the unit of
/// pruning. `m_count` is the number of distinct value combinations within
/// the current slice, which equals the number of member facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactGroup {
    pub columns: Vec<DimId>,
    pub m_count: usize,
    pub facts: Range<usize>,
}

impl FactGroup {
    /// True iff `self`'s columns are a subset of `other`'s, i.e. `other`
    /// specializes `self`.
    pub fn generalizes(&self, other: &FactGroup) -> bool {
        self.columns.iter().all(|c| other.columns.binary_search(c).is_ok())
    }
}

/// Groups of a generated fact catalog, in catalog order.
pub fn fact_groups(catalog: &FactCatalog) -> Vec<FactGroup> {
    catalog
        .group_columns
        .iter()
        .zip(&catalog.group_ranges)
        .map(|(columns, range)| FactGroup {
            columns: columns.clone(),
            m_count: range.len(),
            facts: range.clone(),
        })
        .collect()
}

/// A pruning strategy: gains of `source` groups are computed first and their
/// maximum prunes the `targets` in order. The trivial plan has every group
/// as source and no targets.
#[derive(Debug, Clone, PartialEq)]
pub struct PruningPlan {
    pub source: Vec<usize>,
    pub targets: Vec<usize>,
    pub est_cost: f64,
}

impl PruningPlan {
    pub fn is_trivial(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Statistical parameters of the pruning cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Standard deviation of the modeled per-group utility bound.
    pub sigma: f64,
    /// Per-row weight of computing gains for one group.
    pub w_u: f64,
    /// Per-row weight of computing deviation bounds for one group.
    pub w_d: f64,
    /// Slice row count.
    pub n: usize,
}

impl CostParams {
    pub fn new(config: &PruningConfig, n: usize) -> Self {
        Self { sigma: config.sigma, w_u: config.w_u, w_d: config.w_d, n }
    }

    fn c_u(&self) -> f64 {
        self.w_u * self.n as f64
    }

    fn c_d(&self) -> f64 {
        self.w_d * self.n as f64
    }
}

/// Probability that a source group with `m_s` facts out-bounds a target
/// group with `m_t` facts: both bounds are modeled as normals with means
/// 1/M and shared variance σ², so P(u_s > u_t) = Φ((1/m_s − 1/m_t)/(σ√2)).
pub fn prune_probability(m_s: usize, m_t: usize, sigma: f64) -> f64 {
    debug_assert!(m_s >= 1 && m_t >= 1 && sigma > 0.0);
    let diff = 1.0 / m_s as f64 - 1.0 / m_t as f64;
    standard_normal_cdf(diff / (sigma * SQRT_2))
}

/// Φ, via the error function.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

/// Probability that group `g` is pruned by no (source, processed target)
/// pair, assuming independent pruning outcomes. Targets apply only when
/// they generalize `g`; with no applicable target the survival is 1.
pub fn survival_probability(
    g: &FactGroup,
    source: &[usize],
    targets_so_far: &[usize],
    groups: &[FactGroup],
    params: &CostParams,
) -> f64 {
    let mut survival = 1.0;
    for &s in source {
        for &t in targets_so_far {
            if groups[t].generalizes(g) {
                survival *=
                    1.0 - prune_probability(groups[s].m_count, groups[t].m_count, params.sigma);
            }
        }
    }
    survival
}

/// Estimated execution cost of a plan: bound passes for the sources, one
/// deviation pass per target, plus gain passes for every non-source group
/// weighted by its survival probability. A target's own survival counts the
/// targets processed up to and including itself — its gains are only
/// computed if its own check fails to prune it.
pub fn plan_cost(plan: &PruningPlan, groups: &[FactGroup], params: &CostParams) -> f64 {
    let mut cost = plan.source.len() as f64 * params.c_u();
    cost += plan.targets.len() as f64 * params.c_d();
    for (g_idx, g) in groups.iter().enumerate() {
        if plan.source.contains(&g_idx) {
            continue;
        }
        let visible = match plan.targets.iter().position(|&t| t == g_idx) {
            Some(pos) => &plan.targets[..=pos],
            None => &plan.targets[..],
        };
        cost += survival_probability(g, &plan.source, visible, groups, params) * params.c_u();
    }
    cost
}

fn ascending_m_order(groups: &[FactGroup]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        (groups[a].m_count, &groups[a].columns).cmp(&(groups[b].m_count, &groups[b].columns))
    });
    order
}

/// The no-pruning plan: every group is a source.
pub fn trivial_plan(groups: &[FactGroup], params: &CostParams) -> PruningPlan {
    let mut plan =
        PruningPlan { source: ascending_m_order(groups), targets: Vec::new(), est_cost: 0.0 };
    plan.est_cost = plan_cost(&plan, groups, params);
    plan
}

/// Prune at every occasion: the smallest group is the only source, all
/// remaining groups are targets in ascending-M order.
pub fn naive_plan(groups: &[FactGroup], params: &CostParams) -> PruningPlan {
    let order = ascending_m_order(groups);
    let mut plan = PruningPlan {
        source: vec![order[0]],
        targets: order[1..].to_vec(),
        est_cost: 0.0,
    };
    plan.est_cost = plan_cost(&plan, groups, params);
    plan
}

/// Candidate plans: for each prefix of the ascending-M group order as the
/// source, targets are added greedily by the heuristic H(t) = Pr(P_t) ·
/// |{live groups t generalizes}|, recording a plan after every addition and
/// discarding the new target's specializations from the live set. The
/// trivial plan is always appended.
pub fn enumerate_plans(groups: &[FactGroup], params: &CostParams) -> Vec<PruningPlan> {
    let order = ascending_m_order(groups);
    let mut plans = Vec::new();
    for prefix in 1..=order.len() {
        let source: Vec<usize> = order[..prefix].to_vec();
        let mut live: Vec<usize> = order[prefix..].to_vec();
        let mut targets: Vec<usize> = Vec::new();
        while !live.is_empty() {
            let mut best = 0usize;
            let mut best_h = f64::NEG_INFINITY;
            for (pos, &t) in live.iter().enumerate() {
                let prune_any = 1.0
                    - source.iter().fold(1.0, |acc, &s| {
                        acc * (1.0
                            - prune_probability(
                                groups[s].m_count,
                                groups[t].m_count,
                                params.sigma,
                            ))
                    });
                let covered =
                    live.iter().filter(|&&l| groups[t].generalizes(&groups[l])).count();
                let h = prune_any * covered as f64;
                if h > best_h {
                    best_h = h;
                    best = pos;
                }
            }
            let t = live[best];
            targets.push(t);
            let mut plan =
                PruningPlan { source: source.clone(), targets: targets.clone(), est_cost: 0.0 };
            plan.est_cost = plan_cost(&plan, groups, params);
            plans.push(plan);
            live.retain(|&l| !groups[t].generalizes(&groups[l]));
        }
    }
    plans.push(trivial_plan(groups, params));
    plans
}

/// Minimum-cost candidate plan; ties break toward fewer source groups, then
/// fewer targets.
pub fn opt_prune(groups: &[FactGroup], params: &CostParams) -> PruningPlan {
    enumerate_plans(groups, params)
        .into_iter()
        .min_by(|a, b| {
            (a.est_cost, a.source.len(), a.targets.len())
                .partial_cmp(&(b.est_cost, b.source.len(), b.targets.len()))
                .expect("plan costs are finite")
        })
        .expect("at least the trivial plan exists")
}

/// Upper bound on the gain of any fact in a group: the maximum, over the
/// group's distinct combinations, of the summed residual |e − v| within the
/// combination. The empty group yields the total current error.
pub fn group_upper_bound(state: &ExpectationState<'_>, group: &FactGroup) -> f64 {
    let ds = state.dataset();
    let mut per_scope: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (i, &row) in state.slice().iter().enumerate() {
        let key: Vec<u32> =
            group.columns.iter().map(|&d| ds.dimension(d).codes()[row]).collect();
        *per_scope.entry(key).or_insert(0.0) += state.residual(i);
    }
    per_scope.values().fold(0.0, |acc, &v| acc.max(v))
}

/// Exact gains for every fact of one group, in one pass over the slice.
/// Accumulation order per fact matches the row order of a direct scan.
fn group_gains(
    state: &ExpectationState<'_>,
    catalog: &FactCatalog,
    group_idx: usize,
    gains: &mut [Option<f64>],
) -> u64 {
    let ds = state.dataset();
    let tcol = ds.target(state.target());
    let columns = &catalog.group_columns[group_idx];
    let range = &catalog.group_ranges[group_idx];
    let lookup: BTreeMap<Vec<u32>, usize> = range
        .clone()
        .map(|fact_id| {
            let key: Vec<u32> =
                catalog.facts[fact_id].scope.bindings().iter().map(|&(_, v)| v).collect();
            (key, fact_id)
        })
        .collect();
    for fact_id in range.clone() {
        gains[fact_id] = Some(0.0);
    }
    for (i, &row) in state.slice().iter().enumerate() {
        let key: Vec<u32> = columns.iter().map(|&d| ds.dimension(d).codes()[row]).collect();
        let fact_id = *lookup.get(&key).expect("facts were generated over this slice");
        let truth = tcol.value(row);
        let before = (state.expectations()[i] - truth).abs();
        let with = (catalog.facts[fact_id].value - truth).abs();
        let slot = gains[fact_id].as_mut().expect("initialized above");
        *slot += before - before.min(with);
    }
    range.len() as u64
}

/// Execute a pruning plan for one selection round: compute gains for the
/// source groups, take their maximum `m`, drop every still-live target whose
/// upper bound is strictly below `m` together with its specializations, then
/// compute gains for the surviving groups. Source gains are reused in the
/// returned set rather than recomputed.
pub fn utility_with_pruning(
    state: &ExpectationState<'_>,
    catalog: &FactCatalog,
    plan: &PruningPlan,
) -> GainSet {
    let groups = fact_groups(catalog);
    assert!(!plan.source.is_empty(), "pruning plans need at least one source group");
    let mut gains: Vec<Option<f64>> = vec![None; catalog.facts.len()];
    let mut evals = 0u64;

    for &s in &plan.source {
        evals += group_gains(state, catalog, s, &mut gains);
    }
    let m = plan
        .source
        .iter()
        .flat_map(|&s| groups[s].facts.clone())
        .filter_map(|fact_id| gains[fact_id])
        .fold(f64::NEG_INFINITY, f64::max);

    let mut alive = vec![true; groups.len()];
    for &t in &plan.targets {
        if !alive[t] {
            continue;
        }
        let u = group_upper_bound(state, &groups[t]);
        if m > u {
            for (g_idx, g) in groups.iter().enumerate() {
                if groups[t].generalizes(g) && !plan.source.contains(&g_idx) {
                    alive[g_idx] = false;
                }
            }
        }
    }

    for (g_idx, ok) in alive.iter().enumerate() {
        if *ok && !plan.source.contains(&g_idx) {
            evals += group_gains(state, catalog, g_idx, &mut gains);
        }
    }
    GainSet { gains, evals }
}

/// [`GainProvider`] wiring a pruning plan into the greedy loop. The plan is
/// fixed for the whole summarization problem; bounds are re-derived from the
/// live expectations every round.
pub struct PrunedGains<'c> {
    catalog: &'c FactCatalog,
    plan: PruningPlan,
}

impl<'c> PrunedGains<'c> {
    pub fn new(catalog: &'c FactCatalog, plan: PruningPlan) -> Self {
        Self { catalog, plan }
    }

    pub fn plan(&self) -> &PruningPlan {
        &self.plan
    }
}

impl GainProvider for PrunedGains<'_> {
    fn gains(&mut self, state: &ExpectationState<'_>, facts: &[Fact]) -> GainSet {
        assert_eq!(
            facts.len(),
            self.catalog.facts.len(),
            "pruned gains require the catalog's fact list"
        );
        if self.plan.is_trivial() {
            // No targets: evaluate every group without bound checks.
            let mut gains: Vec<Option<f64>> = vec![None; facts.len()];
            let mut evals = 0u64;
            for g_idx in 0..self.catalog.group_ranges.len() {
                evals += group_gains(state, self.catalog, g_idx, &mut gains);
            }
            return GainSet { gains, evals };
        }
        utility_with_pruning(state, self.catalog, &self.plan)
    }
}
