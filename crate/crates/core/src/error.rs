use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid schema for category `{category}`: {reason}")]
    InvalidSchema { category: String, reason: String },
    #[error("category `{0}` is defined more than once")]
    DuplicateCategory(String),
    #[error("product `{product}` references unknown category `{category}`")]
    UnknownCategory { product: String, category: String },
    #[error("duplicate product id `{0}`")]
    DuplicateProduct(String),
    #[error("product `{product}`: attribute `{attribute}` is not in the schema of `{category}`")]
    AttributeNotInSchema {
        product: String,
        category: String,
        attribute: String,
    },
    #[error("invalid offer `{offer}`: {reason}")]
    InvalidOffer { offer: String, reason: String },
    #[error("duplicate offer id `{0}`")]
    DuplicateOffer(String),
    #[error("match references unknown {kind} `{id}`")]
    DanglingMatch { kind: &'static str, id: String },
    #[error("match `{offer}` -> `{product}`: offer category `{offer_category}` differs from product category `{product_category}`")]
    CategoryMismatch {
        offer: String,
        product: String,
        offer_category: String,
        product_category: String,
    },
    #[error("offer `{0}` is matched more than once")]
    DuplicateMatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate training set: {positives} positive and {negatives} negative examples")]
    DegenerateTrainingSet { positives: usize, negatives: usize },
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),
    #[error("relative recall is undefined when the reference coverage is zero")]
    ZeroCoverage,
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}
