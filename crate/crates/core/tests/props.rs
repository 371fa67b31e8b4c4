//! Property tests for the structural invariants.

use std::io::Write;

use proptest::prelude::*;

use speechsum_core::{load_dataset, prune_probability, EngineConfig};

fn token() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_]{1,8}"
}

proptest! {
    // Every ingested dimension string decodes back to itself.
    #[test]
    fn dictionary_round_trip(values in prop::collection::vec(token(), 1..40)) {
        let mut csv = String::from("dim,target\n");
        for v in &values {
            csv.push_str(v);
            csv.push_str(",1\n");
        }
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(csv.as_bytes()).unwrap();
        let config = EngineConfig::new("d", vec!["dim".into()], vec!["target".into()]);
        let (ds, _) = load_dataset(file.path(), &config).unwrap();
        let dim = ds.dimension(0);
        for v in &values {
            prop_assert_eq!(dim.decode(dim.encode(v).unwrap()), v.as_str());
        }
    }

    // M is monotone under column-set inclusion and bounded by the
    // cardinality product of the added columns.
    #[test]
    fn distinct_combination_monotonicity(
        rows in prop::collection::vec((0u32..3, 0u32..4, 0u32..2), 1..50),
        subset_mask in 0u8..8,
    ) {
        let n = rows.len();
        let columns: Vec<Vec<u32>> = (0..3)
            .map(|d| rows.iter().map(|r| [r.0, r.1, r.2][d]).collect())
            .collect();
        let dims = columns
            .into_iter()
            .enumerate()
            .map(|(d, codes)| {
                let card = *codes.iter().max().unwrap() as usize + 1;
                speechsum_core::DimensionColumn::new(
                    format!("d{}", d),
                    codes,
                    (0..card).map(|v| format!("v{}", v)).collect(),
                )
            })
            .collect();
        let ds = speechsum_core::Dataset::new(
            "prop",
            n,
            dims,
            vec![speechsum_core::TargetColumn::dense("t", vec![0.0; n])],
        );
        let a: Vec<usize> = (0..3).filter(|d| subset_mask & (1 << d) != 0).collect();
        let b: Vec<usize> = (0..3).collect();
        let m_a = ds.distinct_combinations(&a).unwrap().len();
        let m_b = ds.distinct_combinations(&b).unwrap().len();
        prop_assert!(m_a <= m_b);
        let product: usize = b
            .iter()
            .filter(|d| !a.contains(d))
            .map(|&d| ds.dimension(d).cardinality())
            .product();
        prop_assert!(m_b <= m_a * product);
        prop_assert_eq!(ds.distinct_combinations(&[]).unwrap().len(), 1);
    }

    // Pruning probabilities live in [0,1] and are complementary.
    #[test]
    fn prune_probability_laws(m_s in 1usize..200, m_t in 1usize..200, sigma in 0.01f64..10.0) {
        let p = prune_probability(m_s, m_t, sigma);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p + prune_probability(m_t, m_s, sigma) - 1.0).abs() <= 1e-12);
        if m_s == m_t {
            prop_assert_eq!(p, 0.5);
        }
        if m_s < m_t {
            prop_assert!(p >= 0.5);
        }
    }
}
