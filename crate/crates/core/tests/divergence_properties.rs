use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use prodsynth_core::distsim::{jaccard, js_divergence, kl_divergence, TokenBag};
use proptest::prelude::*;

fn bag_from(counts: &BTreeMap<String, u64>) -> TokenBag {
    let mut b = TokenBag::new();
    for (t, &c) in counts {
        b.add_token(t.clone(), c);
    }
    b
}

fn counts() -> impl Strategy<Value = BTreeMap<String, u64>> {
    prop::collection::btree_map("[a-f]", 1u64..6, 0..6)
}

/// Same relative frequencies, by cross-multiplication.
fn same_distribution(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> bool {
    let (ta, tb): (u64, u64) = (a.values().sum(), b.values().sum());
    if ta == 0 || tb == 0 {
        return false;
    }
    a.keys().chain(b.keys()).all(|k| {
        let (ca, cb) = (a.get(k).copied().unwrap_or(0), b.get(k).copied().unwrap_or(0));
        ca * tb == cb * ta
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn js_is_symmetric_and_bounded(a in counts(), b in counts()) {
        let (x, y) = (bag_from(&a), bag_from(&b));
        let d = js_divergence(&x, &y);
        prop_assert!((d - js_divergence(&y, &x)).abs() < 1e-12);
        prop_assert!((0.0..=LN_2 + 1e-12).contains(&d), "{d}");
    }

    #[test]
    fn js_is_zero_exactly_for_identical_distributions(a in counts(), b in counts(), k in 1u64..4) {
        let (x, y) = (bag_from(&a), bag_from(&b));
        let d = js_divergence(&x, &y);
        if same_distribution(&a, &b) {
            prop_assert!(d.abs() < 1e-12, "{d}");
        } else {
            prop_assert!(d > 1e-12, "{d}");
        }
        let scaled: BTreeMap<String, u64> = a.iter().map(|(t, c)| (t.clone(), c * k)).collect();
        if !a.is_empty() {
            prop_assert!(js_divergence(&x, &bag_from(&scaled)).abs() < 1e-12);
        }
    }

    #[test]
    fn js_of_disjoint_supports_is_ln2(a in counts(), b in counts()) {
        let b: BTreeMap<String, u64> = b.into_iter().map(|(t, c)| (format!("{t}_"), c)).collect();
        let d = js_divergence(&bag_from(&a), &bag_from(&b));
        prop_assert!((d - LN_2).abs() < 1e-12);
    }

    #[test]
    fn kl_to_the_midpoint_is_non_negative(a in counts(), b in counts()) {
        let (Some(p), Some(q)) = (bag_from(&a).distribution(), bag_from(&b).distribution()) else {
            return Ok(());
        };
        let m = p.midpoint(&q);
        let kl = kl_divergence(&p, &m).unwrap();
        prop_assert!(kl >= -1e-12);
        // p ≤ 2m everywhere, so the divergence never exceeds ln 2.
        prop_assert!(kl <= LN_2 + 1e-12);
    }

    #[test]
    fn jaccard_matches_the_set_oracle(a in counts(), b in counts()) {
        let (x, y) = (bag_from(&a), bag_from(&b));
        let j = jaccard(&x, &y);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&y, &x));
        let inter = a.keys().filter(|k| b.contains_key(*k)).count();
        let union = a.keys().chain(b.keys()).collect::<std::collections::BTreeSet<_>>().len();
        let oracle = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
        prop_assert!((j - oracle).abs() < 1e-12);
        if !a.is_empty() {
            prop_assert_eq!(jaccard(&x, &x), 1.0);
        }
    }
}
