use std::collections::BTreeSet;

use prodsynth_core::matcher::{select_correspondences, train_rows, Correspondence, TrainConfig};
use prodsynth_core::CandidateTuple;
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = Vec<Correspondence>> {
    prop::collection::vec(("[A-D]", "[w-z]", "M[12]", 0u32..=20), 0..40).prop_map(|rows| {
        rows.into_iter()
            .map(|(ap, ao, m, s)| Correspondence {
                candidate: CandidateTuple::new(ap, ao, m, "C"),
                score: f64::from(s) / 20.0,
            })
            .collect()
    })
}

fn keys(cs: &[Correspondence]) -> BTreeSet<(String, String, String, u64)> {
    cs.iter()
        .map(|c| {
            let t = &c.candidate;
            (
                t.catalog_attribute.clone(),
                t.offer_attribute.clone(),
                t.merchant.clone(),
                c.score.to_bits(),
            )
        })
        .collect()
}

proptest! {
    #[test]
    fn selection_shrinks_as_theta_grows(cs in scored(), lo in 0u32..=20, hi in 0u32..=20, resolve in any::<bool>()) {
        let (lo, hi) = (f64::from(lo.min(hi)) / 20.0, f64::from(lo.max(hi)) / 20.0);
        let wide = select_correspondences(&cs, lo, resolve);
        let narrow = select_correspondences(&cs, hi, resolve);
        prop_assert!(keys(&narrow).is_subset(&keys(&wide)));
        prop_assert!(narrow.iter().all(|c| c.score > hi));
    }

    #[test]
    fn resolution_keeps_one_catalog_attribute_per_offer_attribute(cs in scored(), theta in 0u32..20) {
        let kept = select_correspondences(&cs, f64::from(theta) / 20.0, true);
        let mut seen = BTreeSet::new();
        for c in &kept {
            let t = &c.candidate;
            prop_assert!(seen.insert((t.offer_attribute.clone(), t.merchant.clone())));
            // Nothing above θ for the same offer attribute scores higher.
            prop_assert!(cs.iter().all(|o| o.candidate.offer_attribute != t.offer_attribute
                || o.candidate.merchant != t.merchant
                || o.score <= c.score));
        }
    }

    #[test]
    fn training_is_invariant_to_positive_affine_feature_maps(
        rows in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 3), any::<bool>()), 4..30),
        scale in prop::collection::vec(0.1f64..10.0, 3),
        shift in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
        prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
        let moved: Vec<Vec<f64>> = x
            .iter()
            .map(|r| r.iter().zip(&scale).zip(&shift).map(|((v, a), b)| v * a + b).collect())
            .collect();
        let names = || vec!["f0".to_string(), "f1".into(), "f2".into()];
        let config = TrainConfig { max_iters: 2000, ..TrainConfig::default() };
        let m1 = train_rows(names(), &x, &labels, &config).unwrap();
        let m2 = train_rows(names(), &moved, &labels, &config).unwrap();
        for (a, b) in x.iter().zip(&moved) {
            prop_assert!((m1.probability(a) - m2.probability(b)).abs() < 1e-6);
        }
    }
}
