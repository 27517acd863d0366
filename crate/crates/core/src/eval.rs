//! Precision and coverage of scored correspondences against known answers,
//! relative recall, and product-level precision of synthesized products.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::LN_2;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{dumas, nb_match, nb_train};
use crate::distsim::{FeatureIndex, SelectionMode};
use crate::matcher::{generate_candidates, learn, select_correspondences, Correspondence, LearnConfig};
use crate::model::Corpus;
use crate::pipeline::SynthesizedProduct;
use crate::synth::GroundTruth;
use crate::text::{collapse_whitespace, normalize_key};
use crate::{CandidateTuple, Error, Result};

/// Precision grid of the summary report.
pub const PRECISION_GRID: [f64; 3] = [0.7, 0.8, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub coverage: usize,
    pub correct: usize,
    /// `None` when nothing scores above `theta`.
    pub precision: Option<f64>,
}

/// One point per threshold: `Z = {score > θ}` minus name identities,
/// precision `|Z ∩ truth| / |Z|`.
pub fn precision_coverage<F>(scored: &[Correspondence], is_correct: F, thetas: &[f64]) -> Vec<CurvePoint>
where
    F: Fn(&CandidateTuple) -> bool,
{
    let mut judged: Vec<(f64, bool)> = scored
        .iter()
        .filter(|c| !c.candidate.is_name_identity())
        .map(|c| (c.score, is_correct(&c.candidate)))
        .collect();
    judged.sort_by(|a, b| b.0.total_cmp(&a.0));
    thetas
        .iter()
        .map(|&theta| {
            let above = judged.partition_point(|(s, _)| *s > theta);
            let correct = judged[..above].iter().filter(|(_, ok)| *ok).count();
            CurvePoint {
                theta,
                coverage: above,
                correct,
                precision: (above > 0).then(|| correct as f64 / above as f64),
            }
        })
        .collect()
}

/// `0` and every distinct score, ascending; each distinct `Z` is reached.
pub fn thresholds(scored: &[Correspondence]) -> Vec<f64> {
    let mut t: Vec<f64> = scored.iter().map(|c| c.score).filter(|s| *s > 0.0).collect();
    t.push(0.0);
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Largest coverage among points with precision at least `p` (0 if none).
pub fn coverage_at_precision(curve: &[CurvePoint], p: f64) -> usize {
    curve
        .iter()
        .filter(|pt| pt.precision.is_some_and(|x| x >= p))
        .map(|pt| pt.coverage)
        .max()
        .unwrap_or(0)
}

/// `R_A / R_B`: with both coverages taken at the same precision the unknown
/// total cancels and the ratio is `c_a / c_b`.
pub fn relative_recall(c_a: usize, c_b: usize, precision: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&precision) {
        return Err(Error::Domain(alloc::format!("precision {precision} outside [0, 1]")));
    }
    if c_b == 0 {
        return Err(Error::ZeroCoverage);
    }
    Ok(c_a as f64 / c_b as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Classifier,
    JsMc,
    JaccardMc,
    NaiveBayes,
    Dumas,
    /// The classifier with features over all offers and products.
    ClassifierUnrestricted,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Self::Classifier,
        Self::JsMc,
        Self::JaccardMc,
        Self::NaiveBayes,
        Self::Dumas,
        Self::ClassifierUnrestricted,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Classifier => "classifier",
            Self::JsMc => "js_mc",
            Self::JaccardMc => "jaccard_mc",
            Self::NaiveBayes => "nb",
            Self::Dumas => "dumas",
            Self::ClassifierUnrestricted => "classifier_unrestricted",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::UnknownMethod(s.into()))
    }
}

/// Scored correspondences of one method, conflict-resolved when
/// `config.resolve_conflicts` is set. `config.theta` is ignored: the curve
/// sweeps it. `config.mode` applies to the classifier; the unrestricted
/// classifier always uses every product and offer.
pub fn run_method(corpus: &Corpus, method: Method, config: &LearnConfig) -> Result<Vec<Correspondence>> {
    let scored = match method {
        Method::Classifier | Method::ClassifierUnrestricted => {
            let mode = if method == Method::Classifier {
                config.mode
            } else {
                SelectionMode::Unrestricted
            };
            let cfg = LearnConfig { mode, ..*config };
            learn(corpus, &cfg)?.scored
        }
        Method::JsMc | Method::JaccardMc => {
            let index = FeatureIndex::build(corpus, SelectionMode::Matched);
            generate_candidates(corpus)
                .into_iter()
                .map(|candidate| {
                    let f = index.features(&candidate);
                    let score = if method == Method::JsMc {
                        1.0 - f.js_mc / LN_2
                    } else {
                        f.jaccard_mc
                    };
                    Correspondence {
                        candidate,
                        score: score.clamp(0.0, 1.0),
                    }
                })
                .collect()
        }
        Method::NaiveBayes => naive_bayes(corpus)?,
        Method::Dumas => dumas(corpus),
    };
    Ok(if config.resolve_conflicts {
        select_correspondences(&scored, f64::NEG_INFINITY, true)
    } else {
        scored
    })
}

/// NB over every `(M, C)` with at least one historical match, the same
/// groups the other matchers see.
fn naive_bayes(corpus: &Corpus) -> Result<Vec<Correspondence>> {
    let mut groups: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (oi, _) in corpus.matched_positions() {
        let o = &corpus.offers()[oi];
        groups
            .entry(o.category.as_str())
            .or_default()
            .insert(o.merchant.as_str());
    }
    let mut out = Vec::new();
    for (category, merchants) in groups {
        let model = nb_train(corpus.catalog(), category)?;
        for merchant in merchants {
            out.extend(nb_match(corpus, &model, merchant));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: String,
    pub points: Vec<CurvePoint>,
    /// `(precision, coverage)` over [`PRECISION_GRID`].
    pub coverage_at: Vec<(f64, usize)>,
}

impl MethodCurve {
    pub fn new<F>(method: &str, scored: &[Correspondence], is_correct: F) -> Self
    where
        F: Fn(&CandidateTuple) -> bool,
    {
        let points = precision_coverage(scored, is_correct, &thresholds(scored));
        let coverage_at = PRECISION_GRID
            .iter()
            .map(|&p| (p, coverage_at_precision(&points, p)))
            .collect();
        Self {
            method: method.into(),
            points,
            coverage_at,
        }
    }

    pub fn coverage(&self, precision: f64) -> usize {
        coverage_at_precision(&self.points, precision)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeRecall {
    pub precision: f64,
    pub method: String,
    pub baseline: String,
    /// `None` when the baseline has zero coverage.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductScore {
    pub synthesized: usize,
    /// Synthesized products whose key resolves to a planted product.
    pub matched: usize,
    pub attributes: usize,
    pub attributes_correct: usize,
    pub attribute_precision: Option<f64>,
    /// Products whose every attribute is correct.
    pub products_correct: usize,
    pub product_precision: Option<f64>,
}

/// Attribute values compare exactly after whitespace collapse. Attributes of
/// products that match no planted product count as wrong.
pub fn score_products(products: &[SynthesizedProduct], truth: &GroundTruth) -> ProductScore {
    let mut by_key: BTreeMap<(&str, &str, String), usize> = BTreeMap::new();
    for (i, p) in truth.products.iter().enumerate() {
        for (attr, key) in &p.keys {
            by_key.insert((p.category.as_str(), attr.as_str(), key.clone()), i);
        }
    }
    let mut score = ProductScore {
        synthesized: products.len(),
        ..Default::default()
    };
    for product in products {
        score.attributes += product.spec.len();
        let key = (
            product.category.as_str(),
            product.key_attribute.as_str(),
            normalize_key(&product.key),
        );
        let Some(&i) = by_key.get(&key) else { continue };
        score.matched += 1;
        let planted = &truth.products[i];
        let correct = product
            .spec
            .iter()
            .filter(|(attr, value)| {
                planted
                    .spec
                    .iter()
                    .any(|(a, v)| a == attr && collapse_whitespace(v) == collapse_whitespace(value))
            })
            .count();
        score.attributes_correct += correct;
        if correct == product.spec.len() {
            score.products_correct += 1;
        }
    }
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    score.attribute_precision = ratio(score.attributes_correct, score.attributes);
    score.product_precision = ratio(score.products_correct, score.synthesized);
    score
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Cross-name correspondences the corpus makes discoverable.
    pub planted_cross_name: usize,
    pub methods: Vec<MethodCurve>,
    pub relative_recall: Vec<RelativeRecall>,
    pub products: Option<ProductScore>,
}

/// Judges each method's output against the planted names and compares the
/// first method with every other one on [`PRECISION_GRID`].
pub fn score_methods(outputs: &[MethodOutput], truth: &GroundTruth) -> EvalReport {
    let names = truth.name_map();
    let is_correct = |t: &CandidateTuple| {
        names
            .get(&(t.category.as_str(), t.merchant.as_str(), t.catalog_attribute.as_str()))
            .is_some_and(|o| *o == t.offer_attribute)
    };
    let methods: Vec<MethodCurve> = outputs
        .iter()
        .map(|(m, scored)| MethodCurve::new(m, scored, is_correct))
        .collect();
    let mut relative = Vec::new();
    if let Some((head, rest)) = methods.split_first() {
        for &p in &PRECISION_GRID {
            for other in rest {
                relative.push(RelativeRecall {
                    precision: p,
                    method: head.method.clone(),
                    baseline: other.method.clone(),
                    ratio: relative_recall(head.coverage(p), other.coverage(p), p).ok(),
                });
            }
        }
    }
    EvalReport {
        planted_cross_name: truth.correspondences.len(),
        methods,
        relative_recall: relative,
        products: None,
    }
}

/// A method label with its scored correspondences.
pub type MethodOutput = (String, Vec<Correspondence>);

/// Runs every method on `corpus` and scores it.
pub fn evaluate(
    corpus: &Corpus,
    truth: &GroundTruth,
    methods: &[Method],
    config: &LearnConfig,
) -> Result<(EvalReport, Vec<MethodOutput>)> {
    let outputs = methods
        .iter()
        .map(|&m| Ok((m.label().to_string(), run_method(corpus, m, config)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((score_methods(&outputs, truth), outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::PlantedProduct;
    use alloc::vec;

    fn c(ap: &str, ao: &str, score: f64) -> Correspondence {
        Correspondence {
            candidate: CandidateTuple::new(ap, ao, "M", "C"),
            score,
        }
    }

    #[test]
    fn hand_evaluated_point() {
        let scored = [c("A", "ax", 0.9), c("B", "bx", 0.7), c("D", "dx", 0.6)];
        let ok = |t: &CandidateTuple| t.catalog_attribute != "B";
        let pts = precision_coverage(&scored, ok, &[0.65, 0.0, 1.0]);
        assert_eq!(pts[0].coverage, 2);
        assert_eq!(pts[0].precision, Some(0.5));
        assert_eq!(pts[1].coverage, 3);
        assert_eq!(pts[2].coverage, 0);
        assert_eq!(pts[2].precision, None);
    }

    #[test]
    fn identities_are_not_evaluated() {
        let scored = [c("A", "ax", 0.9), c("B", "B", 0.9)];
        let pts = precision_coverage(&scored, |_| true, &[0.0]);
        assert_eq!(pts[0].coverage, 1);
        assert_eq!(pts[0].precision, Some(1.0));
    }

    #[test]
    fn coverage_is_antitone_over_thresholds() {
        let scored = [
            c("A", "ax", 0.3),
            c("B", "bx", 0.3),
            c("D", "dx", 0.8),
            c("E", "ex", 0.0),
        ];
        let t = thresholds(&scored);
        assert_eq!(t, vec![0.0, 0.3, 0.8]);
        let pts = precision_coverage(&scored, |_| true, &t);
        assert_eq!(pts.iter().map(|p| p.coverage).collect::<Vec<_>>(), vec![3, 1, 0]);
        assert_eq!(coverage_at_precision(&pts, 0.9), 3);
    }

    #[test]
    fn relative_recall_arithmetic() {
        assert_eq!(relative_recall(20000, 10000, 0.8).unwrap(), 2.0);
        assert_eq!(relative_recall(7, 7, 0.3).unwrap(), 1.0);
        assert!(matches!(relative_recall(1, 0, 0.5), Err(Error::ZeroCoverage)));
    }

    #[test]
    fn method_labels_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("coma".parse::<Method>(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn product_scoring() {
        let truth = GroundTruth {
            products: vec![PlantedProduct {
                id: "p".into(),
                category: "C".into(),
                keys: vec![("Model Part Number".into(), "ab12".into())],
                spec: vec![
                    ("Model Part Number".into(), "AB-12".into()),
                    ("OS".into(), "Mac  OS".into()),
                ],
            }],
            ..Default::default()
        };
        let product = |os: &str, key: &str| SynthesizedProduct {
            category: "C".into(),
            key_attribute: "Model Part Number".into(),
            key: key.into(),
            spec: vec![("Model Part Number".into(), "AB-12".into()), ("OS".into(), os.into())],
            provenance: vec![],
        };
        let s = score_products(
            &[product("Mac OS", "ab12"), product("Linux", "ab12"), product("x", "zz")],
            &truth,
        );
        assert_eq!(s.matched, 2);
        assert_eq!(s.attributes, 6);
        assert_eq!(s.attributes_correct, 3);
        assert_eq!(s.products_correct, 1);
        assert_eq!(s.attribute_precision, Some(0.5));
    }
}
