use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{max_weight_matching, soft_tfidf, TfIdfStats};
use crate::matcher::Correspondence;
use crate::model::{CandidateTuple, Corpus, Pair};
use crate::{Error, Result};

/// Rows are offer attributes, columns catalog attributes; cells in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.cols.iter().position(|x| x == col)?;
        Some(self.cells[r][c])
    }
}

type Joined<'a> = BTreeMap<&'a str, String>;

/// Values of a spec joined per attribute (multi-valued attributes are
/// concatenated with a space).
fn joined(spec: &[Pair]) -> Joined<'_> {
    let mut out = Joined::new();
    for (name, value) in spec {
        let slot = out.entry(name.as_str()).or_default();
        if !slot.is_empty() {
            slot.push(' ');
        }
        slot.push_str(value);
    }
    out
}

/// Mean over the matched (product, offer) pairs of `(M, C)` of the
/// offer-value × product-value SoftTFIDF matrix. Rows and columns are the
/// union of attributes over all pairs; a missing value contributes 0.
pub fn dumas_merchant_matrix(corpus: &Corpus, merchant: &str, category: &str) -> Result<SimilarityMatrix> {
    let catalog = corpus.catalog();
    let pairs: Vec<(Joined<'_>, Joined<'_>)> = corpus
        .matched_positions()
        .filter_map(|(oi, pi)| {
            let offer = &corpus.offers()[oi];
            (offer.merchant == merchant && offer.category == category)
                .then(|| (joined(&offer.spec), joined(&catalog.products()[pi].spec)))
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyInput("matches for merchant and category"));
    }
    let rows: Vec<String> = pairs
        .iter()
        .flat_map(|(o, _)| o.keys().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    let cols: Vec<String> = pairs
        .iter()
        .flat_map(|(_, p)| p.keys().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    let stats = TfIdfStats::from_documents(
        pairs
            .iter()
            .flat_map(|(o, p)| o.values().chain(p.values()))
            .map(String::as_str),
    );

    let mut memo: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let mut sums = alloc::vec![alloc::vec![0.0; cols.len()]; rows.len()];
    for (offer_values, product_values) in &pairs {
        for (r, row) in rows.iter().enumerate() {
            let Some(b) = offer_values.get(row.as_str()) else {
                continue;
            };
            for (c, col) in cols.iter().enumerate() {
                let Some(a) = product_values.get(col.as_str()) else {
                    continue;
                };
                let sim = *memo
                    .entry((b.as_str(), a.as_str()))
                    .or_insert_with(|| soft_tfidf(b, a, &stats));
                sums[r][c] += sim;
            }
        }
    }
    let t = pairs.len() as f64;
    let cells = sums
        .into_iter()
        .map(|row| row.into_iter().map(|s| s / t).collect())
        .collect();
    Ok(SimilarityMatrix { rows, cols, cells })
}

/// Maximum-weight assignment of offer to catalog attributes; each assigned
/// cell with positive weight becomes a correspondence scored by that weight.
pub fn dumas_match(matrix: &SimilarityMatrix, merchant: &str, category: &str) -> Vec<Correspondence> {
    max_weight_matching(&matrix.cells)
        .into_iter()
        .map(|(r, c)| Correspondence {
            candidate: CandidateTuple::new(matrix.cols[c].clone(), matrix.rows[r].clone(), merchant, category),
            score: matrix.cells[r][c],
        })
        .collect()
}

/// Runs the duplicate-based matcher for every `(M, C)` with matches.
pub fn dumas(corpus: &Corpus) -> Vec<Correspondence> {
    let groups: BTreeSet<(&str, &str)> = corpus
        .matched_positions()
        .map(|(oi, _)| {
            let o = &corpus.offers()[oi];
            (o.category.as_str(), o.merchant.as_str())
        })
        .collect();
    let mut out = Vec::new();
    for (category, merchant) in groups {
        if let Ok(matrix) = dumas_merchant_matrix(corpus, merchant, category) {
            out.extend(dumas_match(&matrix, merchant, category));
        }
    }
    out
}
