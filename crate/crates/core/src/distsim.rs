//! Distributional similarity between catalog and offer attributes.
//!
//! Values of an attribute are pooled into a bag of lowercased whitespace
//! tokens. Two bags are compared with the Jensen-Shannon divergence of their
//! term distributions (natural log, so the range is `[0, ln 2]`) and with the
//! Jaccard coefficient of their distinct-token sets.
//!
//! Bags are built from a *group* of offers and the products those offers were
//! historically matched to. Three groupings give the six classifier features:
//! merchant + category, category, and merchant.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::model::{CandidateTuple, Corpus};
use crate::text::tokenize;
use crate::{Error, Result};

/// Multiset of tokens. Never stores zero counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenBag {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl TokenBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_value(&mut self, value: &str) {
        for token in tokenize(value) {
            self.add_token(token, 1);
        }
    }

    pub fn add_token(&mut self, token: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(token).or_insert(0) += count;
        self.total += count;
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of distinct tokens.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(t, &c)| (t.as_str(), c))
    }

    /// `None` for an empty bag.
    pub fn distribution(&self) -> Option<TermDistribution> {
        if self.is_empty() {
            return None;
        }
        let total = self.total as f64;
        Some(TermDistribution {
            probs: self
                .counts
                .iter()
                .map(|(t, &c)| (t.clone(), c as f64 / total))
                .collect(),
        })
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenBag {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut bag = Self::new();
        for value in iter {
            bag.add_value(value.as_ref());
        }
        bag
    }
}

/// Multiset union of the tokens of every value.
pub fn build_bag<S: AsRef<str>>(values: &[S]) -> TokenBag {
    values.iter().collect()
}

/// Relative term frequencies of a non-empty bag.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDistribution {
    probs: BTreeMap<String, f64>,
}

impl TermDistribution {
    pub fn prob(&self, token: &str) -> f64 {
        self.probs.get(token).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(t, &p)| (t.as_str(), p))
    }

    /// `½p + ½q`.
    pub fn midpoint(&self, other: &Self) -> Self {
        let mut probs = BTreeMap::new();
        for (t, p) in self.iter().chain(other.iter()) {
            *probs.entry(String::from(t)).or_insert(0.0) += 0.5 * p;
        }
        Self { probs }
    }
}

/// `Σ p(t)·ln(p(t)/m(t))`. Fails if `p` puts mass where `m` has none.
pub fn kl_divergence(p: &TermDistribution, m: &TermDistribution) -> Result<f64> {
    let mut sum = 0.0;
    for (token, pt) in p.iter() {
        if pt == 0.0 {
            continue;
        }
        let mt = m.prob(token);
        if mt == 0.0 {
            return Err(Error::Domain(alloc::format!(
                "token `{token}` has positive probability but zero reference mass"
            )));
        }
        sum += pt * libm::log(pt / mt);
    }
    Ok(sum)
}

/// Jensen-Shannon divergence of the two bags' term distributions.
///
/// Returns `ln 2` when either bag is empty.
pub fn js_divergence(a: &TokenBag, b: &TokenBag) -> f64 {
    if a.is_empty() || b.is_empty() {
        return LN_2;
    }
    let (ta, tb) = (a.total as f64, b.total as f64);
    let term = |p: f64, m: f64| if p > 0.0 { p * libm::log(p / m) } else { 0.0 };
    let mut sum = 0.0;
    let mut ia = a.counts.iter().peekable();
    let mut ib = b.counts.iter().peekable();
    loop {
        let (pa, pb) = match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some((_, &ca)), None) => {
                ia.next();
                (ca as f64 / ta, 0.0)
            }
            (None, Some((_, &cb))) => {
                ib.next();
                (0.0, cb as f64 / tb)
            }
            (Some((ka, &ca)), Some((kb, &cb))) => match ka.cmp(kb) {
                core::cmp::Ordering::Less => {
                    ia.next();
                    (ca as f64 / ta, 0.0)
                }
                core::cmp::Ordering::Greater => {
                    ib.next();
                    (0.0, cb as f64 / tb)
                }
                core::cmp::Ordering::Equal => {
                    ia.next();
                    ib.next();
                    (ca as f64 / ta, cb as f64 / tb)
                }
            },
        };
        let m = 0.5 * (pa + pb);
        sum += 0.5 * term(pa, m) + 0.5 * term(pb, m);
    }
    sum.clamp(0.0, LN_2)
}

/// `|A ∩ B| / |A ∪ B|` over distinct tokens; 0 when both are empty.
pub fn jaccard(a: &TokenBag, b: &TokenBag) -> f64 {
    let union = a.distinct() + b.distinct();
    if union == 0 {
        return 0.0;
    }
    let (small, large) = if a.distinct() <= b.distinct() { (a, b) } else { (b, a) };
    let common = small.counts.keys().filter(|t| large.counts.contains_key(*t)).count();
    common as f64 / (union - common) as f64
}

/// Which offers (and their matched products) feed a bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grouping {
    MerchantCategory,
    Category,
    Merchant,
}

impl Grouping {
    pub const ALL: [Grouping; 3] = [Self::MerchantCategory, Self::Category, Self::Merchant];

    fn admits(self, candidate: &CandidateTuple, merchant: &str, category: &str) -> bool {
        match self {
            Self::MerchantCategory => merchant == candidate.merchant && category == candidate.category,
            Self::Category => category == candidate.category,
            Self::Merchant => merchant == candidate.merchant,
        }
    }
}

/// Whether bags are restricted to historically matched offers/products.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Offers with a match record, and the products they match.
    #[default]
    Matched,
    /// Every offer in the group, and every catalog product of the group's
    /// categories.
    Unrestricted,
}

/// Builds the catalog-side and offer-side bags for one candidate and grouping
/// by scanning the corpus.
///
/// This is the reference route; [`FeatureIndex`] precomputes the same bags
/// for bulk featurization.
pub fn group_bags(
    candidate: &CandidateTuple,
    corpus: &Corpus,
    grouping: Grouping,
    mode: SelectionMode,
) -> (TokenBag, TokenBag) {
    let mut products = BTreeSet::new();
    let mut categories = BTreeSet::new();
    let mut offer_bag = TokenBag::new();
    for offer in corpus.offers() {
        if !grouping.admits(candidate, &offer.merchant, &offer.category) {
            continue;
        }
        match mode {
            SelectionMode::Matched => match corpus.matched_product(&offer.id) {
                Some(p) => {
                    products.insert(p.id.as_str());
                }
                None => continue,
            },
            SelectionMode::Unrestricted => {
                categories.insert(offer.category.as_str());
            }
        }
        for v in offer.values(&candidate.offer_attribute) {
            offer_bag.add_value(v);
        }
    }
    let mut product_bag = TokenBag::new();
    let catalog = corpus.catalog();
    match mode {
        SelectionMode::Matched => {
            for id in &products {
                let Some(product) = catalog.product(id) else { continue };
                for v in product.values(&candidate.catalog_attribute) {
                    product_bag.add_value(v);
                }
            }
        }
        SelectionMode::Unrestricted => {
            for p in catalog.products() {
                if categories.contains(p.category.as_str()) {
                    for v in p.values(&candidate.catalog_attribute) {
                        product_bag.add_value(v);
                    }
                }
            }
        }
    }
    (product_bag, offer_bag)
}

/// Names of the six classifier features, in [`FeatureVector::values`] order.
pub const FEATURE_NAMES: [&str; 6] = ["js_mc", "js_c", "js_m", "jaccard_mc", "jaccard_c", "jaccard_m"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub js_mc: f64,
    pub js_c: f64,
    pub js_m: f64,
    pub jaccard_mc: f64,
    pub jaccard_c: f64,
    pub jaccard_m: f64,
    /// Per grouping (MC, C, M): both bags were non-empty. Diagnostic only,
    /// not a classifier input.
    pub present: [bool; 3],
}

impl FeatureVector {
    /// No evidence at any grouping.
    pub const MISSING: Self = Self {
        js_mc: LN_2,
        js_c: LN_2,
        js_m: LN_2,
        jaccard_mc: 0.0,
        jaccard_c: 0.0,
        jaccard_m: 0.0,
        present: [false; 3],
    };

    pub fn values(&self) -> [f64; 6] {
        [
            self.js_mc,
            self.js_c,
            self.js_m,
            self.jaccard_mc,
            self.jaccard_c,
            self.jaccard_m,
        ]
    }

    pub fn from_values(values: [f64; 6]) -> Self {
        Self {
            js_mc: values[0],
            js_c: values[1],
            js_m: values[2],
            jaccard_mc: values[3],
            jaccard_c: values[4],
            jaccard_m: values[5],
            present: [true; 3],
        }
    }

    fn from_bags(bags: [(&TokenBag, &TokenBag); 3]) -> Self {
        let mut fv = Self::MISSING;
        for (g, (pb, ob)) in bags.into_iter().enumerate() {
            let present = !pb.is_empty() && !ob.is_empty();
            fv.present[g] = present;
            if !present {
                continue;
            }
            let (js, jac) = (js_divergence(pb, ob), jaccard(pb, ob));
            match g {
                0 => (fv.js_mc, fv.jaccard_mc) = (js, jac),
                1 => (fv.js_c, fv.jaccard_c) = (js, jac),
                _ => (fv.js_m, fv.jaccard_m) = (js, jac),
            }
        }
        fv
    }
}

/// The six features for one candidate, computed by direct corpus scans.
pub fn feature_vector(candidate: &CandidateTuple, corpus: &Corpus, mode: SelectionMode) -> FeatureVector {
    let bags = Grouping::ALL.map(|g| group_bags(candidate, corpus, g, mode));
    FeatureVector::from_bags([
        (&bags[0].0, &bags[0].1),
        (&bags[1].0, &bags[1].1),
        (&bags[2].0, &bags[2].1),
    ])
}

#[derive(Debug, Default)]
struct GroupBags {
    product: BTreeMap<String, TokenBag>,
    offer: BTreeMap<String, TokenBag>,
}

#[derive(Debug, Default)]
struct GroupMembers {
    offers: Vec<usize>,
    products: BTreeSet<usize>,
}

impl GroupMembers {
    fn into_bags(self, corpus: &Corpus) -> GroupBags {
        let mut bags = GroupBags::default();
        for pi in self.products {
            for (name, value) in &corpus.catalog().products()[pi].spec {
                bags.product.entry(name.clone()).or_default().add_value(value);
            }
        }
        for oi in self.offers {
            for (name, value) in &corpus.offers()[oi].spec {
                bags.offer.entry(name.clone()).or_default().add_value(value);
            }
        }
        bags
    }
}

/// Every bag needed to featurize candidates of a corpus, built in one pass
/// per grouping.
#[derive(Debug)]
pub struct FeatureIndex {
    mode: SelectionMode,
    by_merchant_category: BTreeMap<String, BTreeMap<String, GroupBags>>,
    by_category: BTreeMap<String, GroupBags>,
    by_merchant: BTreeMap<String, GroupBags>,
}

impl FeatureIndex {
    pub fn build(corpus: &Corpus, mode: SelectionMode) -> Self {
        let mut mc: BTreeMap<(&str, &str), GroupMembers> = BTreeMap::new();
        let mut c: BTreeMap<&str, GroupMembers> = BTreeMap::new();
        let mut m: BTreeMap<&str, GroupMembers> = BTreeMap::new();
        let mut merchant_categories: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();

        for (oi, offer) in corpus.offers().iter().enumerate() {
            let matched = corpus
                .matched_product(&offer.id)
                .and_then(|p| corpus.catalog().product_position(&p.id));
            if mode == SelectionMode::Matched && matched.is_none() {
                continue;
            }
            let keys = (offer.merchant.as_str(), offer.category.as_str());
            for members in [
                mc.entry(keys).or_default(),
                c.entry(keys.1).or_default(),
                m.entry(keys.0).or_default(),
            ] {
                members.offers.push(oi);
                if let Some(pi) = matched {
                    members.products.insert(pi);
                }
            }
            merchant_categories.entry(keys.0).or_default().insert(keys.1);
        }

        if mode == SelectionMode::Unrestricted {
            let mut by_category: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (pi, p) in corpus.catalog().products().iter().enumerate() {
                by_category.entry(p.category.as_str()).or_default().push(pi);
            }
            let in_category = |cat: &str| by_category.get(cat).into_iter().flatten().copied();
            for ((_, cat), members) in mc.iter_mut() {
                members.products = in_category(cat).collect();
            }
            for (cat, members) in c.iter_mut() {
                members.products = in_category(cat).collect();
            }
            for (merchant, members) in m.iter_mut() {
                members.products = merchant_categories[merchant]
                    .iter()
                    .flat_map(|cat| in_category(cat))
                    .collect();
            }
        }

        let mut by_merchant_category: BTreeMap<String, BTreeMap<String, GroupBags>> = BTreeMap::new();
        for ((merchant, cat), members) in mc {
            by_merchant_category
                .entry(merchant.into())
                .or_default()
                .insert(cat.into(), members.into_bags(corpus));
        }
        Self {
            mode,
            by_merchant_category,
            by_category: c.into_iter().map(|(k, v)| (k.into(), v.into_bags(corpus))).collect(),
            by_merchant: m.into_iter().map(|(k, v)| (k.into(), v.into_bags(corpus))).collect(),
        }
    }

    pub fn mode(&self) -> SelectionMode {
        self.mode
    }

    /// Same bags as [`group_bags`] for the mode this index was built with.
    pub fn bags(&self, candidate: &CandidateTuple, grouping: Grouping) -> (&TokenBag, &TokenBag) {
        static EMPTY: TokenBag = TokenBag {
            counts: BTreeMap::new(),
            total: 0,
        };
        let group = match grouping {
            Grouping::MerchantCategory => self
                .by_merchant_category
                .get(candidate.merchant.as_str())
                .and_then(|per_cat| per_cat.get(candidate.category.as_str())),
            Grouping::Category => self.by_category.get(candidate.category.as_str()),
            Grouping::Merchant => self.by_merchant.get(candidate.merchant.as_str()),
        };
        match group {
            Some(g) => (
                g.product.get(candidate.catalog_attribute.as_str()).unwrap_or(&EMPTY),
                g.offer.get(candidate.offer_attribute.as_str()).unwrap_or(&EMPTY),
            ),
            None => (&EMPTY, &EMPTY),
        }
    }

    pub fn features(&self, candidate: &CandidateTuple) -> FeatureVector {
        FeatureVector::from_bags(Grouping::ALL.map(|g| self.bags(candidate, g)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bag(values: &[&str]) -> TokenBag {
        build_bag(values)
    }

    fn interface() -> TokenBag {
        bag(&["ATA 100", "IDE 133", "IDE 133", "ATA 133"])
    }

    fn int_type() -> TokenBag {
        bag(&["ATA 100 mb/s", "IDE 133 mb/s", "IDE 133 mb/s", "ATA 133 mb/s"])
    }

    fn speed() -> TokenBag {
        bag(&["5400", "7200", "5400", "7200"])
    }

    #[test]
    fn bags_from_figure_values() {
        let b = interface();
        assert_eq!(
            (
                b.count("ata"),
                b.count("100"),
                b.count("ide"),
                b.count("133"),
                b.total()
            ),
            (2, 1, 2, 3, 8)
        );
        let b = int_type();
        assert_eq!((b.count("mb/s"), b.total()), (4, 12));
        assert!(build_bag::<&str>(&[]).is_empty());
    }

    #[test]
    fn kl_cases() {
        let p = bag(&["a"]).distribution().unwrap();
        let m = bag(&["a", "b"]).distribution().unwrap();
        assert!((kl_divergence(&p, &m).unwrap() - LN_2).abs() < 1e-12);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!(matches!(kl_divergence(&m, &p), Err(Error::Domain(_))));

        // Hand oracle: every Interface token has p/m = 1.2, so KL = ln 1.2.
        let p = interface().distribution().unwrap();
        let mix = p.midpoint(&int_type().distribution().unwrap());
        let kl = kl_divergence(&p, &mix).unwrap();
        assert!((kl - 0.182_321_556_793_954_6).abs() < 1e-12, "{kl}");
        assert!((kl - 0.1823).abs() < 1e-3);
    }

    #[test]
    fn js_cases() {
        assert_eq!(js_divergence(&speed(), &speed()), 0.0);
        let js = js_divergence(&interface(), &int_type());
        assert!((js - 0.13).abs() < 0.005, "{js}");
        assert!((js_divergence(&interface(), &speed()) - LN_2).abs() < 1e-12);
        assert_eq!(js_divergence(&TokenBag::new(), &speed()), LN_2);
    }

    #[test]
    fn js_matches_kl_route() {
        let (a, b) = (interface(), int_type());
        let (pa, pb) = (a.distribution().unwrap(), b.distribution().unwrap());
        let m = pa.midpoint(&pb);
        let via_kl = 0.5 * kl_divergence(&pa, &m).unwrap() + 0.5 * kl_divergence(&pb, &m).unwrap();
        assert!((js_divergence(&a, &b) - via_kl).abs() < 1e-12);
    }

    #[test]
    fn jaccard_cases() {
        assert_eq!(jaccard(&speed(), &speed()), 1.0);
        assert!((jaccard(&interface(), &int_type()) - 0.8).abs() < 1e-12);
        assert_eq!(jaccard(&TokenBag::new(), &speed()), 0.0);
        assert_eq!(jaccard(&TokenBag::new(), &TokenBag::new()), 0.0);
    }

    #[test]
    fn bag_is_order_independent() {
        let mut values = vec!["ATA 100", "IDE 133", "IDE 133", "ATA 133"];
        let a = build_bag(&values);
        values.reverse();
        assert_eq!(a, build_bag(&values));
    }
}
