//! Reference matchers for comparison curves: duplicate-based matching with
//! SoftTFIDF and bipartite assignment, and a per-category Naive Bayes
//! instance matcher.

mod dumas;
mod hungarian;
mod jaro_winkler;
mod naive_bayes;
mod soft_tfidf;

pub use dumas::{dumas, dumas_match, dumas_merchant_matrix, SimilarityMatrix};
pub use hungarian::max_weight_matching;
pub use jaro_winkler::{jaro, jaro_winkler};
pub use naive_bayes::{nb_match, nb_score, nb_train, NbModel};
pub use soft_tfidf::{soft_tfidf, TfIdfStats, SOFT_TFIDF_THRESHOLD};
