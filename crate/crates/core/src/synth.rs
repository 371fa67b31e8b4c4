//! Built-in datasets and seeded instance generators used by the verification
//! command, the benchmark harness, and the test suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, DimensionColumn, TargetColumn, TargetId};
use crate::summary::{generate_facts_for_slice, Fact, FactCatalog};

/// The 4×4 flight-delay grid: one row per (region, season) cell.
///
/// Winter delays: East 20, South 10, West 10, North 20; the North also sees
/// 10/20/10 across Spring/Summer/Fall. Every other cell is on time.
pub fn flight_grid() -> Dataset {
    let regions = ["East", "South", "West", "North"];
    let seasons = ["Spring", "Summer", "Fall", "Winter"];
    let delay = |region: &str, season: &str| -> f64 {
        match (region, season) {
            ("East", "Winter") => 20.0,
            ("South", "Summer") => 20.0,
            ("South", "Winter") => 10.0,
            ("West", "Winter") => 10.0,
            ("North", "Spring") => 10.0,
            ("North", "Summer") => 20.0,
            ("North", "Fall") => 10.0,
            ("North", "Winter") => 20.0,
            _ => 0.0,
        }
    };
    let mut region_codes = Vec::with_capacity(16);
    let mut season_codes = Vec::with_capacity(16);
    let mut delays = Vec::with_capacity(16);
    for (ri, region) in regions.iter().enumerate() {
        for (si, season) in seasons.iter().enumerate() {
            region_codes.push(ri as u32);
            season_codes.push(si as u32);
            delays.push(delay(region, season));
        }
    }
    Dataset::new(
        "flight_grid",
        16,
        vec![
            DimensionColumn::new(
                "region",
                region_codes,
                regions.iter().map(|s| s.to_string()).collect(),
            ),
            DimensionColumn::new(
                "season",
                season_codes,
                seasons.iter().map(|s| s.to_string()).collect(),
            ),
        ],
        vec![TargetColumn::dense("delay", delays)],
    )
}

/// The flight grid rendered as CSV (header plus 16 rows, file order).
pub fn flight_grid_csv() -> String {
    dataset_to_csv(&flight_grid())
}

/// Serialize a dense dataset back to delimited text, dimensions first.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    let names: Vec<&str> = ds
        .dimensions()
        .iter()
        .map(|d| d.name())
        .chain(ds.targets().iter().map(|t| t.name()))
        .collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in 0..ds.n_rows() {
        let mut cells: Vec<String> = ds
            .dimensions()
            .iter()
            .map(|d| d.decode(d.codes()[row]).to_string())
            .collect();
        for t in ds.targets() {
            cells.push(if t.is_valid(row) { format!("{}", t.value(row)) } else { String::new() });
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One self-contained summarization problem for the property suites.
#[derive(Debug, Clone)]
pub struct Instance {
    pub ds: Dataset,
    pub slice: Vec<usize>,
    pub target: TargetId,
    pub prior: f64,
    pub catalog: FactCatalog,
    pub m: usize,
}

impl Instance {
    pub fn facts(&self) -> &[Fact] {
        &self.catalog.facts
    }
}

/// A small seeded random instance: ≤ 64 rows, ≤ 3 dimensions with ≤ 3 values
/// each, ≤ 14 candidate facts, speech length ≤ 3. Target values mix small
/// integers (to exercise exact ties) with fractional noise.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_dims = rng.random_range(1..=3usize);
    let cards: Vec<usize> = (0..n_dims).map(|_| rng.random_range(2..=3usize)).collect();
    let n_rows = rng.random_range(4..=64usize);

    let mut dims = Vec::with_capacity(n_dims);
    for (d, card) in cards.iter().enumerate() {
        let codes: Vec<u32> =
            (0..n_rows).map(|_| rng.random_range(0..*card as u32)).collect();
        let dict: Vec<String> = (0..*card).map(|v| format!("d{}v{}", d, v)).collect();
        dims.push(DimensionColumn::new(format!("dim{}", d), codes, dict));
    }

    let integral = rng.random_bool(0.5);
    let values: Vec<f64> = (0..n_rows)
        .map(|_| {
            if integral {
                (rng.random_range(0..=4u32) * 5) as f64
            } else {
                rng.random_range(0.0..20.0)
            }
        })
        .collect();
    let ds = Dataset::new(
        format!("synthetic_{}", seed),
        n_rows,
        dims,
        vec![TargetColumn::dense("value", values)],
    );
    let slice: Vec<usize> = (0..n_rows).collect();

    // Random subset of the power-set fact groups, capped at 14 facts total.
    let mut groups = power_set(n_dims);
    let keep: Vec<Vec<usize>> = groups
        .drain(..)
        .filter(|g| g.is_empty() || rng.random_bool(0.8))
        .collect();
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    let mut total = 0usize;
    for g in keep {
        let m_count = ds.distinct_combinations_in(&g, &slice).len();
        if total + m_count <= 14 {
            total += m_count;
            chosen.push(g);
        }
    }
    if chosen.is_empty() {
        chosen.push(Vec::new());
    }

    let catalog = generate_facts_for_slice(&ds, 0, &slice, &chosen).expect("valid groups");
    let prior = match rng.random_range(0..3u32) {
        0 => 0.0,
        1 => ds.target(0).mean(),
        _ => rng.random_range(0.0..20.0),
    };
    let m = rng.random_range(1..=3usize);
    Instance { ds, slice, target: 0, prior, catalog, m }
}

/// All subsets of {0..n_dims}, ordered by size then lexicographically.
pub fn power_set(n_dims: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0u32..(1 << n_dims))
        .map(|mask| (0..n_dims).filter(|d| mask & (1 << d) != 0).collect())
        .collect();
    sets.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
    sets
}

/// The skewed pruning showcase: dimension `a` (2 values) determines the
/// target exactly (means 0 and 100), dimension `b` (100 values) is pure
/// labeling. One general fact dominates every specific one, so bound checks
/// settle the scan almost immediately.
pub fn skewed_instance(n_rows: usize) -> Dataset {
    assert!(n_rows >= 200 && n_rows.is_multiple_of(200), "row count must be a multiple of 200");
    let mut a_codes = Vec::with_capacity(n_rows);
    let mut b_codes = Vec::with_capacity(n_rows);
    let mut values = Vec::with_capacity(n_rows);
    for row in 0..n_rows {
        let a = (row % 2) as u32;
        a_codes.push(a);
        b_codes.push(((row / 2) % 100) as u32);
        values.push(if a == 0 { 0.0 } else { 100.0 });
    }
    Dataset::new(
        "skewed",
        n_rows,
        vec![
            DimensionColumn::new("a", a_codes, vec!["a0".into(), "a1".into()]),
            DimensionColumn::new(
                "b",
                b_codes,
                (0..100).map(|v| format!("b{:02}", v)).collect(),
            ),
        ],
        vec![TargetColumn::dense("value", values)],
    )
}

/// Seeded synthetic dataset for the benchmark harness: independent uniform
/// categorical dimensions; the target is a per-cell mean plus noise.
pub fn synthetic_dataset(
    n_dims: usize,
    values_per_dim: usize,
    n_rows: usize,
    noise: f64,
    seed: u64,
) -> Dataset {
    assert!(n_dims >= 1 && values_per_dim >= 1 && n_rows >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<u32>> = vec![Vec::with_capacity(n_rows); n_dims];
    // Per-dimension value effects keep cell means scope-dependent.
    let effects: Vec<Vec<f64>> = (0..n_dims)
        .map(|_| (0..values_per_dim).map(|_| rng.random_range(-25.0..25.0)).collect())
        .collect();
    let mut values = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let mut mean = 50.0;
        for (d, col) in columns.iter_mut().enumerate() {
            let v = rng.random_range(0..values_per_dim as u32);
            col.push(v);
            mean += effects[d][v as usize];
        }
        values.push(mean + rng.random_range(-noise..=noise));
    }
    let dimensions = columns
        .into_iter()
        .enumerate()
        .map(|(d, codes)| {
            let dict: Vec<String> = (0..values_per_dim).map(|v| format!("d{}v{}", d, v)).collect();
            DimensionColumn::new(format!("dim{}", d), codes, dict)
        })
        .collect();
    Dataset::new(
        format!("bench_{}d_{}v_{}r", n_dims, values_per_dim, n_rows),
        n_rows,
        dimensions,
        vec![TargetColumn::dense("value", values)],
    )
}
