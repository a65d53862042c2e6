//! Histogram invariants under random data.

use obsim_core::stats::{Binning, Histogram};
use proptest::prelude::*;

fn binning() -> impl Strategy<Value = Binning> {
    prop_oneof![
        (1u32..6).prop_map(|w| Binning::Linear { width: w as f64 }),
        (1.05f64..3.0).prop_map(|ratio| Binning::Log { ratio }),
    ]
}

fn mass(h: &Histogram) -> f64 {
    (0..h.counts.len()).map(|k| h.density(k) * h.width(k)).sum::<f64>() + h.excluded_fraction()
}

proptest! {
    #[test]
    fn integer_mass_is_one(values in prop::collection::vec(0u64..5_000, 1..400), b in binning()) {
        let h = Histogram::of_integers(&values, b);
        prop_assert_eq!(h.counts.iter().sum::<u64>() + h.excluded, values.len() as u64);
        prop_assert!((mass(&h) - 1.0).abs() < 1e-12);
        let zeros = values.iter().filter(|&&v| v == 0).count() as u64;
        let expect_excluded = if matches!(b, Binning::Log { .. }) { zeros } else { 0 };
        prop_assert_eq!(h.excluded, expect_excluded);
    }

    #[test]
    fn every_value_lands_in_its_bin(values in prop::collection::vec(1u64..10_000, 1..200), ratio in 1.05f64..2.0) {
        let h = Histogram::of_integers(&values, Binning::Log { ratio });
        for &v in &values {
            let k = h.edges.partition_point(|&e| e <= v as f64) - 1;
            prop_assert!(h.edges[k] <= v as f64 && (v as f64) < h.edges[k + 1]);
            prop_assert!(h.counts[k] > 0);
        }
    }

    #[test]
    fn real_mass_is_one(values in prop::collection::vec(0.0f64..1e4, 1..400), b in binning(), lower in 0.5f64..5.0) {
        let h = Histogram::of_reals(&values, b, lower);
        prop_assert_eq!(h.counts.iter().sum::<u64>() + h.excluded, values.len() as u64);
        prop_assert!((mass(&h) - 1.0).abs() < 1e-9);
        let below = values.iter().filter(|&&v| v < lower).count() as u64;
        prop_assert_eq!(h.excluded, below);
    }

    #[test]
    fn series_skips_empty_bins(values in prop::collection::vec(0u64..100, 1..100)) {
        let h = Histogram::of_integers(&values, Binning::LOG_DEFAULT);
        let s = h.to_series("h");
        prop_assert!(s.points.iter().all(|p| p.count > 0 && p.y > 0.0));
        prop_assert_eq!(s.points.iter().map(|p| p.count).sum::<u64>(), h.total - h.excluded);
    }
}
