use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::matcher::Correspondence;
use crate::model::{CandidateTuple, Catalog, Corpus};
use crate::text::tokenize;
use crate::{Error, Result};

/// Multinomial Naive Bayes over one category: classes are catalog attributes,
/// features are value tokens.
#[derive(Debug, Clone)]
pub struct NbModel {
    pub category: String,
    pub classes: Vec<String>,
    /// `n(w, c)` per class.
    pub term_counts: Vec<BTreeMap<String, u64>>,
    /// Total term occurrences per class.
    pub term_totals: Vec<u64>,
    /// `n(c)`: products carrying the attribute.
    pub class_counts: Vec<u64>,
    pub vocabulary: BTreeSet<String>,
}

/// Trains on every product of `category`. Classes are the schema attributes
/// present in at least one product.
pub fn nb_train(catalog: &Catalog, category: &str) -> Result<NbModel> {
    let products: Vec<_> = catalog.products().iter().filter(|p| p.category == category).collect();
    if products.is_empty() {
        return Err(Error::EmptyInput("category products"));
    }
    let order: Vec<&String> = match catalog.schema(category) {
        Some(schema) => schema.attributes.iter().collect(),
        None => Vec::new(),
    };
    let mut per_class: BTreeMap<&str, (BTreeMap<String, u64>, u64, u64)> = BTreeMap::new();
    let mut vocabulary = BTreeSet::new();
    for product in &products {
        let mut seen = BTreeSet::new();
        for (name, value) in &product.spec {
            let entry = per_class.entry(name.as_str()).or_default();
            if seen.insert(name.as_str()) {
                entry.2 += 1;
            }
            for t in tokenize(value) {
                vocabulary.insert(t.clone());
                *entry.0.entry(t).or_insert(0) += 1;
                entry.1 += 1;
            }
        }
    }
    let mut model = NbModel {
        category: category.into(),
        classes: Vec::new(),
        term_counts: Vec::new(),
        term_totals: Vec::new(),
        class_counts: Vec::new(),
        vocabulary,
    };
    for attr in order {
        if let Some((counts, total, n)) = per_class.remove(attr.as_str()) {
            model.classes.push(attr.clone());
            model.term_counts.push(counts);
            model.term_totals.push(total);
            model.class_counts.push(n);
        }
    }
    Ok(model)
}

impl NbModel {
    pub fn prior(&self, class: usize) -> f64 {
        let all: u64 = self.class_counts.iter().sum();
        self.class_counts[class] as f64 / all as f64
    }

    /// Add-one smoothed `P(w | c)`.
    pub fn term_probability(&self, class: usize, term: &str) -> f64 {
        let n = self.term_counts[class].get(term).copied().unwrap_or(0);
        (n as f64 + 1.0) / (self.term_totals[class] as f64 + self.vocabulary.len() as f64)
    }

    /// `P(c | v)` for every class, normalized to sum to 1.
    pub fn posterior(&self, value: &str) -> Vec<f64> {
        let tokens = tokenize(value);
        let logs: Vec<f64> = (0..self.classes.len())
            .map(|c| {
                libm::log(self.prior(c))
                    + tokens
                        .iter()
                        .map(|t| libm::log(self.term_probability(c, t)))
                        .sum::<f64>()
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logs.iter().map(|l| libm::exp(l - max)).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }
}

/// `score(A, B) = Σ_{v ∈ V} P(A | v) / |V|` for every class `A`, where `V`
/// is the set of distinct values. All zeros when `V` is empty.
pub fn nb_score<S: AsRef<str>>(model: &NbModel, values: &[S]) -> Vec<f64> {
    let distinct: BTreeSet<&str> = values.iter().map(AsRef::as_ref).collect();
    let mut scores = alloc::vec![0.0; model.classes.len()];
    if distinct.is_empty() {
        return scores;
    }
    for v in &distinct {
        for (s, p) in scores.iter_mut().zip(model.posterior(v)) {
            *s += p;
        }
    }
    let n = distinct.len() as f64;
    scores.iter_mut().for_each(|s| *s /= n);
    scores
}

/// For each catalog attribute `A`, emits `⟨A, B, M, C⟩` when `B` scores
/// strictly higher than every other offer attribute of `(M, C)`. Offer
/// values come from every offer of the merchant in the category.
pub fn nb_match(corpus: &Corpus, model: &NbModel, merchant: &str) -> Vec<Correspondence> {
    let mut values: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for offer in corpus.offers() {
        if offer.merchant == merchant && offer.category == model.category {
            for (name, value) in &offer.spec {
                values.entry(name.as_str()).or_default().push(value.as_str());
            }
        }
    }
    let scores: Vec<(&str, Vec<f64>)> = values.iter().map(|(attr, vs)| (*attr, nb_score(model, vs))).collect();
    let mut out = Vec::new();
    for (c, class) in model.classes.iter().enumerate() {
        let mut best: Option<(&str, f64)> = None;
        let mut tied = false;
        for (attr, s) in &scores {
            match best {
                Some((_, b)) if s[c] == b => tied = true,
                Some((_, b)) if s[c] < b => {}
                _ => {
                    best = Some((attr, s[c]));
                    tied = false;
                }
            }
        }
        if let (Some((attr, score)), false) = (best, tied) {
            out.push(Correspondence {
                candidate: CandidateTuple::new(class.clone(), attr, merchant, model.category.clone()),
                score,
            });
        }
    }
    out
}
