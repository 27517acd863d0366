//! Candidate generation, auto-labeling, logistic regression and selection of
//! attribute correspondences.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::distsim::{FeatureIndex, FeatureVector, FEATURE_NAMES};
use crate::model::{CandidateTuple, Corpus};
use crate::text::casefold;
use crate::{Error, Result};

/// Cross product of catalog attributes seen in matched products of `C` and
/// offer attributes seen in matched offers of `M` in `C`, for every
/// `(M, C)` with at least one match. Sorted by `(C, M, A^P, A^O)`.
pub fn generate_candidates(corpus: &Corpus) -> Vec<CandidateTuple> {
    let catalog = corpus.catalog();
    let mut catalog_attrs: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut offer_attrs: BTreeMap<(&str, &str), BTreeSet<&str>> = BTreeMap::new();
    for (oi, pi) in corpus.matched_positions() {
        let offer = &corpus.offers()[oi];
        let product = &catalog.products()[pi];
        catalog_attrs
            .entry(product.category.as_str())
            .or_default()
            .extend(product.spec.iter().map(|(n, _)| n.as_str()));
        offer_attrs
            .entry((offer.category.as_str(), offer.merchant.as_str()))
            .or_default()
            .extend(offer.spec.iter().map(|(n, _)| n.as_str()));
    }
    let mut out = Vec::new();
    for ((category, merchant), offer_side) in &offer_attrs {
        let Some(catalog_side) = catalog_attrs.get(category) else {
            continue;
        };
        for ap in catalog_side {
            for ao in offer_side {
                out.push(CandidateTuple::new(*ap, *ao, *merchant, *category));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub candidate: CandidateTuple,
    pub features: FeatureVector,
    pub label: bool,
}

/// Label assigned by the name-identity rules, or `None` when the rules say
/// nothing about the candidate.
///
/// `identities` holds `(merchant, category, casefolded catalog attribute)` of
/// every name-identity candidate.
fn identity_label(candidate: &CandidateTuple, identities: &BTreeSet<(&str, &str, String)>) -> Option<bool> {
    if candidate.is_name_identity() {
        return Some(true);
    }
    let key = (
        candidate.merchant.as_str(),
        candidate.category.as_str(),
        casefold(&candidate.catalog_attribute),
    );
    identities.contains(&key).then_some(false)
}

/// Positive: `⟨A, A, M, C⟩`. Negative: `⟨A, B, M, C⟩`, `A ≠ B`, when
/// `⟨A, A, M, C⟩` is also a candidate. Everything else is left out.
///
/// `features[i]` belongs to `candidates[i]`.
pub fn build_training_set(candidates: &[CandidateTuple], features: &[FeatureVector]) -> Vec<LabeledExample> {
    assert_eq!(candidates.len(), features.len(), "one feature vector per candidate");
    let identities: BTreeSet<(&str, &str, String)> = candidates
        .iter()
        .filter(|c| c.is_name_identity())
        .map(|c| (c.merchant.as_str(), c.category.as_str(), casefold(&c.catalog_attribute)))
        .collect();
    candidates
        .iter()
        .zip(features)
        .filter_map(|(c, f)| {
            identity_label(c, &identities).map(|label| LabeledExample {
                candidate: c.clone(),
                features: *f,
                label,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 penalty on the weights (the bias is not penalized).
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once every gradient component is below this.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            max_iters: 10_000,
            tolerance: 1e-6,
        }
    }
}

/// Logistic regression over standardized features.
///
/// Field order is the on-disk key order of `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub features: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

impl LogisticModel {
    /// All-zero model; scores everything 0.5.
    pub fn zero(features: Vec<String>) -> Self {
        let d = features.len();
        Self {
            features,
            weights: alloc::vec![0.0; d],
            bias: 0.0,
            means: alloc::vec![0.0; d],
            stds: alloc::vec![1.0; d],
            lambda: 0.0,
            iterations: 0,
        }
    }

    /// `w · standardize(x) + b`.
    pub fn linear(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .zip(self.means.iter().zip(&self.stds))
            .fold(self.bias, |sum, ((w, v), (m, s))| sum + w * (v - m) / s)
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear(x))
    }
}

/// Fits a logistic model to raw feature rows by full-batch gradient ascent on
/// the mean L2-regularized log-likelihood, starting from zero.
pub fn train_rows(
    feature_names: Vec<String>,
    rows: &[Vec<f64>],
    labels: &[bool],
    config: &TrainConfig,
) -> Result<LogisticModel> {
    let n = rows.len();
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateTrainingSet {
            positives,
            negatives: n - positives,
        });
    }
    let d = feature_names.len();
    let nf = n as f64;
    let mut means = alloc::vec![0.0; d];
    for row in rows {
        for j in 0..d {
            means[j] += row[j];
        }
    }
    means.iter_mut().for_each(|m| *m /= nf);
    let mut stds = alloc::vec![0.0; d];
    for row in rows {
        for j in 0..d {
            let dev = row[j] - means[j];
            stds[j] += dev * dev;
        }
    }
    for s in stds.iter_mut() {
        *s = libm::sqrt(*s / nf);
        // Constant (or NaN) columns are left unscaled.
        if s.is_nan() || *s <= 1e-12 {
            *s = 1.0;
        }
    }
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| (0..d).map(|j| (row[j] - means[j]) / stds[j]).collect())
        .collect();
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

    // The mean log-likelihood of standardized data has curvature at most
    // (d + 1) / 4 + lambda, so this step never overshoots.
    let step = 1.0 / (0.25 * (d as f64 + 1.0) + config.lambda);
    let mut w = alloc::vec![0.0; d];
    let mut b = 0.0;
    let mut grad_w = alloc::vec![0.0; d];
    let mut iterations = 0;
    while iterations < config.max_iters {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (zi, &yi) in z.iter().zip(&y) {
            let lin = zi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b;
            let r = yi - sigmoid(lin);
            for j in 0..d {
                grad_w[j] += r * zi[j];
            }
            grad_b += r;
        }
        let mut max_abs = libm::fabs(grad_b / nf);
        for j in 0..d {
            grad_w[j] = grad_w[j] / nf - config.lambda * w[j];
            max_abs = max_abs.max(libm::fabs(grad_w[j]));
        }
        if max_abs < config.tolerance {
            break;
        }
        for j in 0..d {
            w[j] += step * grad_w[j];
        }
        b += step * grad_b / nf;
        iterations += 1;
    }
    Ok(LogisticModel {
        features: feature_names,
        weights: w,
        bias: b,
        means,
        stds,
        lambda: config.lambda,
        iterations,
    })
}

/// Trains on the six distributional features of each example.
pub fn train(examples: &[LabeledExample], config: &TrainConfig) -> Result<LogisticModel> {
    let rows: Vec<Vec<f64>> = examples.iter().map(|e| e.features.values().to_vec()).collect();
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    train_rows(
        FEATURE_NAMES.iter().map(|s| String::from(*s)).collect(),
        &rows,
        &labels,
        config,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub candidate: CandidateTuple,
    pub score: f64,
}

pub fn predict(model: &LogisticModel, candidate: &CandidateTuple, features: &FeatureVector) -> Correspondence {
    Correspondence {
        candidate: candidate.clone(),
        score: model.probability(&features.values()),
    }
}

/// Keeps `score > theta`. With `resolve_conflicts`, an offer attribute of a
/// `(M, C)` keeps only its best catalog attribute (ties go to the
/// lexicographically smaller catalog name). Input order is preserved.
pub fn select_correspondences(scored: &[Correspondence], theta: f64, resolve_conflicts: bool) -> Vec<Correspondence> {
    let kept = scored.iter().filter(|c| c.score > theta);
    if !resolve_conflicts {
        return kept.cloned().collect();
    }
    let mut best: BTreeMap<(&str, &str, &str), &Correspondence> = BTreeMap::new();
    for c in kept.clone() {
        let t = &c.candidate;
        let key = (t.offer_attribute.as_str(), t.merchant.as_str(), t.category.as_str());
        best.entry(key)
            .and_modify(|cur| {
                let better = c.score > cur.score
                    || (c.score == cur.score && t.catalog_attribute < cur.candidate.catalog_attribute);
                if better {
                    *cur = c;
                }
            })
            .or_insert(c);
    }
    kept.filter(|c| {
        let t = &c.candidate;
        let winner = best[&(t.offer_attribute.as_str(), t.merchant.as_str(), t.category.as_str())];
        core::ptr::eq(winner, *c)
    })
    .cloned()
    .collect()
}

/// Counters of one offline learning run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnCounters {
    pub candidates: usize,
    pub labeled: usize,
    pub positives: usize,
    pub predicted_valid: usize,
    pub selected: usize,
}

#[derive(Debug, Clone)]
pub struct LearnOutput {
    pub model: LogisticModel,
    pub candidates: Vec<CandidateTuple>,
    pub features: Vec<FeatureVector>,
    /// Every candidate with its score, in candidate order.
    pub scored: Vec<Correspondence>,
    /// `scored` filtered at θ (and conflict-resolved when asked).
    pub selected: Vec<Correspondence>,
    pub counters: LearnCounters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub theta: f64,
    pub resolve_conflicts: bool,
    pub train: TrainConfig,
    pub mode: crate::distsim::SelectionMode,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            resolve_conflicts: true,
            train: TrainConfig::default(),
            mode: Default::default(),
        }
    }
}

/// Candidates → features → auto-labeled training set → model → scores →
/// selection.
pub fn learn(corpus: &Corpus, config: &LearnConfig) -> Result<LearnOutput> {
    let candidates = generate_candidates(corpus);
    let index = FeatureIndex::build(corpus, config.mode);
    let features: Vec<FeatureVector> = candidates.iter().map(|c| index.features(c)).collect();
    let examples = build_training_set(&candidates, &features);
    let model = train(&examples, &config.train)?;
    let scored: Vec<Correspondence> = candidates
        .iter()
        .zip(&features)
        .map(|(c, f)| predict(&model, c, f))
        .collect();
    let selected = select_correspondences(&scored, config.theta, config.resolve_conflicts);
    let counters = LearnCounters {
        candidates: candidates.len(),
        labeled: examples.len(),
        positives: examples.iter().filter(|e| e.label).count(),
        predicted_valid: scored.iter().filter(|c| c.score > config.theta).count(),
        selected: selected.len(),
    };
    Ok(LearnOutput {
        model,
        candidates,
        features,
        scored,
        selected,
        counters,
    })
}
