//! Catalog, offers and historical matches.
//!
//! Attribute names and values are kept verbatim; nothing here normalizes
//! text. A [`Corpus`] is immutable once built and indexes products and offers
//! by id, and every matched offer by its product.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::{Error, Result};

/// Key attributes used when a schema does not list its own.
pub const DEFAULT_KEY_ATTRIBUTES: [&str; 2] = ["Model Part Number", "UPC"];

/// An attribute-value pair as it appears in a specification.
pub type Pair = (String, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogSchema {
    pub category: String,
    pub attributes: Vec<String>,
    pub key_attributes: Vec<String>,
}

impl CatalogSchema {
    /// Validates attribute names and keys. `None` for `key_attributes` picks
    /// whichever of [`DEFAULT_KEY_ATTRIBUTES`] the schema contains.
    pub fn new(
        category: impl Into<String>,
        attributes: Vec<String>,
        key_attributes: Option<Vec<String>>,
    ) -> Result<Self> {
        let category = category.into();
        let invalid = |reason: String| Error::InvalidSchema {
            category: category.clone(),
            reason,
        };
        if category.trim().is_empty() {
            return Err(invalid("category name is empty".to_owned()));
        }
        let mut seen = HashSet::new();
        for name in &attributes {
            if name.trim().is_empty() {
                return Err(invalid("empty attribute name".to_owned()));
            }
            if !seen.insert(name.as_str()) {
                return Err(invalid(alloc::format!("duplicate attribute `{name}`")));
            }
        }
        let key_attributes = match key_attributes {
            Some(keys) => {
                if let Some(k) = keys.iter().find(|k| !seen.contains(k.as_str())) {
                    return Err(invalid(alloc::format!("key `{k}` is not a schema attribute")));
                }
                keys
            }
            None => DEFAULT_KEY_ATTRIBUTES
                .iter()
                .filter(|k| seen.contains(**k))
                .map(|k| (*k).to_owned())
                .collect(),
        };
        drop(seen);
        Ok(Self {
            category,
            attributes,
            key_attributes,
        })
    }

    pub fn contains(&self, attribute: &str) -> bool {
        self.attributes.iter().any(|a| a == attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub id: String,
    pub category: String,
    pub spec: Vec<Pair>,
}

impl Product {
    pub fn values<'a>(&'a self, attribute: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        spec_values(&self.spec, attribute)
    }
}

/// Opaque price: the amount is never parsed, only carried through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Price {
    pub amount: String,
    pub currency: Option<String>,
}

impl Price {
    /// Splits a trailing three-letter uppercase currency code off `raw`.
    pub fn parse(raw: &str) -> Self {
        let raw = raw.trim();
        if let Some((amount, code)) = raw.rsplit_once(' ') {
            if code.len() == 3 && code.chars().all(|c| c.is_ascii_uppercase()) {
                return Self {
                    amount: amount.trim_end().to_owned(),
                    currency: Some(code.to_owned()),
                };
            }
        }
        Self {
            amount: raw.to_owned(),
            currency: None,
        }
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.currency {
            Some(code) => write!(f, "{} {}", self.amount, code),
            None => f.write_str(&self.amount),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Offer {
    pub id: String,
    pub merchant: String,
    pub category: String,
    pub title: String,
    pub price: Option<Price>,
    pub url: Option<String>,
    pub image: Option<String>,
    pub spec: Vec<Pair>,
}

impl Offer {
    pub fn new(
        id: impl Into<String>,
        merchant: impl Into<String>,
        category: impl Into<String>,
        title: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            merchant: merchant.into(),
            category: category.into(),
            title: title.into(),
            price: None,
            url: None,
            image: None,
            spec: Vec::new(),
        }
    }

    pub fn with_spec(mut self, spec: Vec<Pair>) -> Self {
        self.spec = spec;
        self
    }

    pub fn values<'a>(&'a self, attribute: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        spec_values(&self.spec, attribute)
    }

    /// Checks the per-record invariants (not id uniqueness).
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidOffer {
            offer: self.id.clone(),
            reason: reason.to_owned(),
        };
        if self.id.trim().is_empty() {
            return Err(invalid("empty id"));
        }
        if self.merchant.trim().is_empty() {
            return Err(invalid("missing merchant"));
        }
        if self.category.trim().is_empty() {
            return Err(invalid("missing category"));
        }
        if self.spec.iter().any(|(name, _)| name.trim().is_empty()) {
            return Err(invalid("empty attribute name in spec"));
        }
        Ok(())
    }
}

fn spec_values<'a>(spec: &'a [Pair], attribute: &'a str) -> impl Iterator<Item = &'a str> + 'a {
    spec.iter()
        .filter(move |(name, _)| name == attribute)
        .map(|(_, value)| value.as_str())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchRecord {
    pub offer_id: String,
    pub product_id: String,
}

impl MatchRecord {
    pub fn new(offer_id: impl Into<String>, product_id: impl Into<String>) -> Self {
        Self {
            offer_id: offer_id.into(),
            product_id: product_id.into(),
        }
    }
}

/// `⟨catalog attribute, offer attribute, merchant, category⟩`.
///
/// Field order gives the (category, merchant, catalog, offer) sort used for
/// candidate output through [`CandidateTuple::sort_key`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct CandidateTuple {
    pub catalog_attribute: String,
    pub offer_attribute: String,
    pub merchant: String,
    pub category: String,
}

impl CandidateTuple {
    pub fn new(
        catalog_attribute: impl Into<String>,
        offer_attribute: impl Into<String>,
        merchant: impl Into<String>,
        category: impl Into<String>,
    ) -> Self {
        Self {
            catalog_attribute: catalog_attribute.into(),
            offer_attribute: offer_attribute.into(),
            merchant: merchant.into(),
            category: category.into(),
        }
    }

    pub fn sort_key(&self) -> (&str, &str, &str, &str) {
        (
            &self.category,
            &self.merchant,
            &self.catalog_attribute,
            &self.offer_attribute,
        )
    }

    /// Both sides carry the same name (trim + casefold).
    pub fn is_name_identity(&self) -> bool {
        crate::text::same_name(&self.catalog_attribute, &self.offer_attribute)
    }
}

impl fmt::Display for CandidateTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "⟨{}, {}, {}, {}⟩",
            self.catalog_attribute, self.offer_attribute, self.merchant, self.category
        )
    }
}

/// Schemas and products, indexed by category and product id.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    schemas: Vec<CatalogSchema>,
    schema_index: HashMap<String, usize>,
    products: Vec<Product>,
    product_index: HashMap<String, usize>,
}

impl Catalog {
    pub fn new(schemas: Vec<CatalogSchema>, products: Vec<Product>) -> Result<Self> {
        let mut catalog = Self::default();
        for schema in schemas {
            catalog.add_schema(schema)?;
        }
        for product in products {
            catalog.add_product(product)?;
        }
        Ok(catalog)
    }

    pub fn add_schema(&mut self, schema: CatalogSchema) -> Result<()> {
        if self.schema_index.contains_key(&schema.category) {
            return Err(Error::DuplicateCategory(schema.category));
        }
        self.schema_index.insert(schema.category.clone(), self.schemas.len());
        self.schemas.push(schema);
        Ok(())
    }

    pub fn check_product(&self, product: &Product) -> Result<()> {
        let schema = self.schema(&product.category).ok_or_else(|| Error::UnknownCategory {
            product: product.id.clone(),
            category: product.category.clone(),
        })?;
        if self.product_index.contains_key(&product.id) {
            return Err(Error::DuplicateProduct(product.id.clone()));
        }
        if let Some((name, _)) = product.spec.iter().find(|(name, _)| !schema.contains(name)) {
            return Err(Error::AttributeNotInSchema {
                product: product.id.clone(),
                category: product.category.clone(),
                attribute: name.clone(),
            });
        }
        Ok(())
    }

    pub fn add_product(&mut self, product: Product) -> Result<()> {
        self.check_product(&product)?;
        self.product_index.insert(product.id.clone(), self.products.len());
        self.products.push(product);
        Ok(())
    }

    pub fn schemas(&self) -> &[CatalogSchema] {
        &self.schemas
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn schema(&self, category: &str) -> Option<&CatalogSchema> {
        self.schema_index.get(category).map(|&i| &self.schemas[i])
    }

    pub fn product(&self, id: &str) -> Option<&Product> {
        self.product_position(id).map(|i| &self.products[i])
    }

    pub fn product_position(&self, id: &str) -> Option<usize> {
        self.product_index.get(id).copied()
    }
}

/// Catalog + offers + historical matches. Immutable after construction.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    catalog: Catalog,
    offers: Vec<Offer>,
    offer_index: HashMap<String, usize>,
    matches: Vec<MatchRecord>,
    /// Product position for each offer position, when matched.
    matched_product: Vec<Option<usize>>,
    /// Offer positions per product position.
    offers_of_product: HashMap<usize, Vec<usize>>,
}

impl Corpus {
    pub fn new(catalog: Catalog, offers: Vec<Offer>, matches: Vec<MatchRecord>) -> Result<Self> {
        let mut offer_index = HashMap::with_capacity(offers.len());
        for (i, offer) in offers.iter().enumerate() {
            offer.validate()?;
            if offer_index.insert(offer.id.clone(), i).is_some() {
                return Err(Error::DuplicateOffer(offer.id.clone()));
            }
        }
        let mut matched_product = alloc::vec![None; offers.len()];
        let mut offers_of_product: HashMap<usize, Vec<usize>> = HashMap::new();
        for record in &matches {
            let oi = *offer_index.get(&record.offer_id).ok_or_else(|| Error::DanglingMatch {
                kind: "offer",
                id: record.offer_id.clone(),
            })?;
            let pi = catalog
                .product_position(&record.product_id)
                .ok_or_else(|| Error::DanglingMatch {
                    kind: "product",
                    id: record.product_id.clone(),
                })?;
            let (offer, product) = (&offers[oi], &catalog.products[pi]);
            if offer.category != product.category {
                return Err(Error::CategoryMismatch {
                    offer: offer.id.clone(),
                    product: product.id.clone(),
                    offer_category: offer.category.clone(),
                    product_category: product.category.clone(),
                });
            }
            if matched_product[oi].is_some() {
                return Err(Error::DuplicateMatch(offer.id.clone()));
            }
            matched_product[oi] = Some(pi);
            offers_of_product.entry(pi).or_default().push(oi);
        }
        Ok(Self {
            catalog,
            offers,
            offer_index,
            matches,
            matched_product,
            offers_of_product,
        })
    }

    /// Same catalog and matches over a replacement offer list (for example
    /// after page extraction).
    pub fn with_offers(self, offers: Vec<Offer>) -> Result<Self> {
        Self::new(self.catalog, offers, self.matches)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn offers(&self) -> &[Offer] {
        &self.offers
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    pub fn offer(&self, id: &str) -> Option<&Offer> {
        self.offer_index.get(id).map(|&i| &self.offers[i])
    }

    /// Product matched to the offer with this id.
    pub fn matched_product(&self, offer_id: &str) -> Option<&Product> {
        let oi = *self.offer_index.get(offer_id)?;
        self.matched_product[oi].map(|pi| &self.catalog.products[pi])
    }

    /// Offers matched to the product with this id.
    pub fn offers_matched_to(&self, product_id: &str) -> impl Iterator<Item = &Offer> {
        self.catalog
            .product_position(product_id)
            .and_then(|pi| self.offers_of_product.get(&pi))
            .into_iter()
            .flatten()
            .map(|&oi| &self.offers[oi])
    }

    /// `(offer position, product position)` of every matched offer, in offer order.
    pub fn matched_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.matched_product
            .iter()
            .enumerate()
            .filter_map(|(oi, pi)| pi.map(|pi| (oi, pi)))
    }

    pub fn is_matched(&self, offer_position: usize) -> bool {
        self.matched_product[offer_position].is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn hard_drives() -> CatalogSchema {
        CatalogSchema::new("Hard Drives", s(&["Brand", "Model", "Speed", "Interface"]), None).unwrap()
    }

    #[test]
    fn default_keys_are_filtered_to_schema() {
        assert!(hard_drives().key_attributes.is_empty());
        let schema = CatalogSchema::new("Laptops", s(&["UPC", "Model Part Number", "RAM"]), None).unwrap();
        assert_eq!(schema.key_attributes, s(&["Model Part Number", "UPC"]));
    }

    #[test]
    fn schema_invariants() {
        assert!(CatalogSchema::new("C", s(&["A", " "]), None).is_err());
        assert!(CatalogSchema::new("C", s(&["A", "A"]), None).is_err());
        assert!(CatalogSchema::new("C", s(&["A"]), Some(s(&["B"]))).is_err());
    }

    #[test]
    fn product_outside_schema_is_rejected() {
        let product = Product {
            id: "p1".into(),
            category: "Hard Drives".into(),
            spec: vec![("Capacity".into(), "500GB".into())],
        };
        let err = Catalog::new(vec![hard_drives()], vec![product]).unwrap_err();
        assert!(matches!(err, Error::AttributeNotInSchema { .. }));
    }

    #[test]
    fn match_validation() {
        let product = Product {
            id: "p1".into(),
            category: "Hard Drives".into(),
            spec: vec![("Speed".into(), "5400".into())],
        };
        let catalog = Catalog::new(vec![hard_drives()], vec![product]).unwrap();
        let ok = Offer::new("o1", "M", "Hard Drives", "t");
        let wrong_cat = Offer::new("o2", "M", "Cameras", "t");
        let offers = vec![ok, wrong_cat];

        let corpus = Corpus::new(catalog.clone(), offers.clone(), vec![MatchRecord::new("o1", "p1")]).unwrap();
        assert_eq!(corpus.matched_product("o1").unwrap().id, "p1");
        assert_eq!(corpus.offers_matched_to("p1").count(), 1);

        let err = Corpus::new(catalog.clone(), offers.clone(), vec![MatchRecord::new("o2", "p1")]).unwrap_err();
        assert!(matches!(err, Error::CategoryMismatch { .. }));
        let err = Corpus::new(catalog.clone(), offers.clone(), vec![MatchRecord::new("o9", "p1")]).unwrap_err();
        assert!(matches!(err, Error::DanglingMatch { kind: "offer", .. }));
        let err = Corpus::new(
            catalog,
            offers,
            vec![MatchRecord::new("o1", "p1"), MatchRecord::new("o1", "p1")],
        )
        .unwrap_err();
        assert_eq!(err, Error::DuplicateMatch("o1".into()));
    }

    #[test]
    fn price_round_trip() {
        for raw in ["67.00 USD", "$67", "128"] {
            assert_eq!(Price::parse(raw).to_string(), raw);
        }
        assert_eq!(Price::parse("67.00 USD").currency.as_deref(), Some("USD"));
    }
}
