use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::jaro_winkler;
use crate::text::tokenize;

/// Secondary similarity a token pair must exceed to count as close.
pub const SOFT_TFIDF_THRESHOLD: f64 = 0.9;

/// Document frequencies over a corpus of short values (one value = one
/// document).
#[derive(Debug, Clone, Default)]
pub struct TfIdfStats {
    documents: usize,
    df: BTreeMap<String, usize>,
}

impl TfIdfStats {
    pub fn from_documents<'a, I: IntoIterator<Item = &'a str>>(docs: I) -> Self {
        let mut stats = Self::default();
        for doc in docs {
            stats.add_document(doc);
        }
        stats
    }

    pub fn add_document(&mut self, doc: &str) {
        self.documents += 1;
        let mut tokens = tokenize(doc);
        tokens.sort_unstable();
        tokens.dedup();
        for t in tokens {
            *self.df.entry(t).or_insert(0) += 1;
        }
    }

    /// `ln(1 + N / df)`, with unseen tokens treated as `df = 1`. Stays
    /// positive for tokens that occur in every document.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.df.get(token).copied().unwrap_or(0).max(1) as f64;
        libm::log(1.0 + self.documents.max(1) as f64 / df)
    }

    /// Unit-length TF-IDF weights of the distinct tokens of `s`.
    fn weights(&self, s: &str) -> Vec<(String, f64)> {
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokenize(s) {
            *tf.entry(t).or_insert(0) += 1;
        }
        let mut w: Vec<(String, f64)> = tf
            .into_iter()
            .map(|(t, n)| {
                let idf = self.idf(&t);
                (t, libm::log(f64::from(n) + 1.0) * idf)
            })
            .collect();
        let norm = libm::sqrt(w.iter().map(|(_, x)| x * x).sum::<f64>());
        if norm > 0.0 {
            w.iter_mut().for_each(|(_, x)| *x /= norm);
        }
        w
    }
}

/// SoftTFIDF: every token of `a` is paired with its most Jaro-Winkler-similar
/// token of `b`; pairs above [`SOFT_TFIDF_THRESHOLD`] contribute
/// `w_a · w_b · jw`. Clamped to `[0, 1]`.
pub fn soft_tfidf(a: &str, b: &str, stats: &TfIdfStats) -> f64 {
    let wa = stats.weights(a);
    let wb = stats.weights(b);
    if wa.is_empty() || wb.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for (ta, va) in &wa {
        let mut best: Option<(f64, f64)> = None;
        for (tb, vb) in &wb {
            let sim = if ta == tb { 1.0 } else { jaro_winkler(ta, tb) };
            if best.is_none_or(|(s, _)| sim > s) {
                best = Some((sim, *vb));
            }
        }
        if let Some((sim, vb)) = best {
            if sim > SOFT_TFIDF_THRESHOLD {
                sum += va * vb * sim;
            }
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> TfIdfStats {
        TfIdfStats::from_documents(["Seagate Barracuda HD", "Barracuda", "Raptor"])
    }

    #[test]
    fn identical_strings_score_one() {
        let s = stats();
        for v in ["Seagate Barracuda HD", "Raptor", "unseen words here"] {
            assert!((soft_tfidf(v, v, &s) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn disjoint_strings_score_zero() {
        assert_eq!(soft_tfidf("Seagate Barracuda HD", "Raptor", &stats()), 0.0);
        assert_eq!(soft_tfidf("", "Raptor", &stats()), 0.0);
    }

    #[test]
    fn partial_overlap_ordering() {
        // Hand computation, N = 3: idf(barracuda) = ln(1 + 3/2), idf(seagate)
        // = idf(hd) = ln 4; every tf is 1 so weights are ln 2 · idf. The only
        // close pair is barracuda/barracuda, so the score is the normalized
        // barracuda weight of the long string.
        let s = stats();
        let (ib, i4) = (libm::log(2.5), libm::log(4.0));
        let expected = ib / libm::sqrt(ib * ib + 2.0 * i4 * i4);
        let got = soft_tfidf("Seagate Barracuda HD", "Barracuda", &s);
        assert!((got - expected).abs() < 1e-12);
        assert!(got > 0.0 && got < 1.0);
        assert!(got > soft_tfidf("Seagate Barracuda HD", "Raptor", &s));
    }
}
