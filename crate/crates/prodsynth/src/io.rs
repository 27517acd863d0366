//! Line-delimited JSON formats for catalogs, offers, matches, correspondences
//! and synthesized products, plus the whole-file JSON artifacts.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use prodsynth_core::matcher::{Correspondence, LogisticModel};
use prodsynth_core::model::{Catalog, Pair};
use prodsynth_core::pipeline::{Provenance, SynthesizedProduct};
use prodsynth_core::{CandidateTuple, CatalogSchema, Corpus, MatchRecord, Offer, Price, Product};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] prodsynth_core::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Counts of what a lenient load accepted and skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub records: usize,
    pub skipped: usize,
}

/// Feeds `(line number, record)` to `accept`. A malformed line, or one that
/// `accept` rejects with `Ok(Some(reason))`, aborts under `strict` and is
/// skipped with a warning otherwise. Errors from `accept` always abort.
pub(crate) fn read_lines<T, F>(path: &Path, strict: bool, mut accept: F) -> Result<LoadReport>
where
    T: DeserializeOwned,
    F: FnMut(usize, T) -> Result<Option<String>>,
{
    let file = File::open(path).map_err(io_err(path))?;
    let mut report = LoadReport::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rejection = match serde_json::from_str::<T>(&line) {
            Ok(record) => accept(n, record)?,
            Err(e) => Some(e.to_string()),
        };
        match rejection {
            None => report.records += 1,
            Some(message) if strict => {
                return Err(IoError::Record {
                    path: path.to_owned(),
                    line: n,
                    message,
                })
            }
            Some(message) => {
                warn!("{}:{n}: skipped: {message}", path.display());
                report.skipped += 1;
            }
        }
    }
    Ok(report)
}

pub(crate) fn write_lines<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, &record).map_err(|source| IoError::Json {
            path: path.to_owned(),
            source,
        })?;
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json {
        path: path.to_owned(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CatalogLine {
    Schema {
        category: String,
        attributes: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        keys: Option<Vec<String>>,
    },
    Product {
        id: String,
        category: String,
        spec: Vec<Pair>,
    },
}

/// Schemas may appear anywhere in the file; products are checked against
/// them once the whole file is read.
pub fn load_catalog(path: &Path, strict: bool) -> Result<(Catalog, LoadReport)> {
    let mut schemas = Vec::new();
    let mut products = Vec::new();
    let report = read_lines(path, strict, |line, record: CatalogLine| {
        match record {
            CatalogLine::Schema {
                category,
                attributes,
                keys,
            } => schemas.push(CatalogSchema::new(category, attributes, keys)?),
            CatalogLine::Product { id, category, spec } => products.push((line, Product { id, category, spec })),
        }
        Ok(None)
    })?;
    let mut catalog = Catalog::new(schemas, Vec::new())?;
    for (line, product) in products {
        catalog.add_product(product).map_err(|e| IoError::Record {
            path: path.to_owned(),
            line,
            message: e.to_string(),
        })?;
    }
    Ok((catalog, report))
}

pub fn write_catalog(path: &Path, catalog: &Catalog) -> Result<()> {
    let schemas = catalog.schemas().iter().map(|s| CatalogLine::Schema {
        category: s.category.clone(),
        attributes: s.attributes.clone(),
        keys: Some(s.key_attributes.clone()),
    });
    let products = catalog.products().iter().map(|p| CatalogLine::Product {
        id: p.id.clone(),
        category: p.category.clone(),
        spec: p.spec.clone(),
    });
    write_lines(path, schemas.chain(products))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OfferLine {
    id: String,
    #[serde(default)]
    merchant: String,
    #[serde(default)]
    category: String,
    #[serde(default)]
    title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    price: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image: Option<String>,
    #[serde(default)]
    spec: Vec<Pair>,
}

impl From<OfferLine> for Offer {
    fn from(l: OfferLine) -> Self {
        Offer {
            id: l.id,
            merchant: l.merchant,
            category: l.category,
            title: l.title,
            price: l.price.as_deref().map(Price::parse),
            url: l.url,
            image: l.image,
            spec: l.spec,
        }
    }
}

impl From<&Offer> for OfferLine {
    fn from(o: &Offer) -> Self {
        OfferLine {
            id: o.id.clone(),
            merchant: o.merchant.clone(),
            category: o.category.clone(),
            title: o.title.clone(),
            price: o.price.as_ref().map(ToString::to_string),
            url: o.url.clone(),
            image: o.image.clone(),
            spec: o.spec.clone(),
        }
    }
}

/// Invalid offers and repeated ids are skipped (or abort under `strict`).
pub fn load_offers(path: &Path, strict: bool) -> Result<(Vec<Offer>, LoadReport)> {
    let mut offers = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let report = read_lines(path, strict, |_, record: OfferLine| {
        let offer = Offer::from(record);
        if let Err(e) = offer.validate() {
            return Ok(Some(e.to_string()));
        }
        if !seen.insert(offer.id.clone()) {
            return Ok(Some(prodsynth_core::Error::DuplicateOffer(offer.id).to_string()));
        }
        offers.push(offer);
        Ok(None)
    })?;
    Ok((offers, report))
}

pub fn write_offers(path: &Path, offers: &[Offer]) -> Result<()> {
    write_lines(path, offers.iter().map(OfferLine::from))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchLine {
    offer: String,
    product: String,
}

/// Reads match records and validates them against the catalog and offers.
pub fn load_corpus(catalog: Catalog, offers: Vec<Offer>, matches: &Path, strict: bool) -> Result<(Corpus, LoadReport)> {
    let mut records = Vec::new();
    let report = read_lines(matches, strict, |_, m: MatchLine| {
        records.push(MatchRecord::new(m.offer, m.product));
        Ok(None)
    })?;
    Ok((Corpus::new(catalog, offers, records)?, report))
}

pub fn write_matches(path: &Path, matches: &[MatchRecord]) -> Result<()> {
    write_lines(
        path,
        matches.iter().map(|m| MatchLine {
            offer: m.offer_id.clone(),
            product: m.product_id.clone(),
        }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrespondenceLine {
    catalog: String,
    offer: String,
    merchant: String,
    category: String,
    score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<String>,
}

pub fn load_correspondences(path: &Path, strict: bool) -> Result<(Vec<Correspondence>, LoadReport)> {
    let mut out = Vec::new();
    let report = read_lines(path, strict, |_, c: CorrespondenceLine| {
        out.push(Correspondence {
            candidate: CandidateTuple::new(c.catalog, c.offer, c.merchant, c.category),
            score: c.score,
        });
        Ok(None)
    })?;
    Ok((out, report))
}

pub fn write_correspondences(path: &Path, correspondences: &[Correspondence], method: Option<&str>) -> Result<()> {
    write_lines(
        path,
        correspondences.iter().map(|c| CorrespondenceLine {
            catalog: c.candidate.catalog_attribute.clone(),
            offer: c.candidate.offer_attribute.clone(),
            merchant: c.candidate.merchant.clone(),
            category: c.candidate.category.clone(),
            score: c.score,
            method: method.map(str::to_owned),
        }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductLine {
    category: String,
    key: String,
    key_attribute: String,
    spec: Vec<Pair>,
    provenance: BTreeMap<String, Vec<Provenance>>,
}

pub fn write_products(path: &Path, products: &[SynthesizedProduct]) -> Result<()> {
    write_lines(
        path,
        products.iter().map(|p| ProductLine {
            category: p.category.clone(),
            key: p.key.clone(),
            key_attribute: p.key_attribute.clone(),
            spec: p.spec.clone(),
            provenance: p.provenance.iter().cloned().collect(),
        }),
    )
}

/// Provenance comes back in attribute order of `spec`.
pub fn load_products(path: &Path, strict: bool) -> Result<(Vec<SynthesizedProduct>, LoadReport)> {
    let mut out = Vec::new();
    let report = read_lines(path, strict, |_, mut p: ProductLine| {
        let provenance = p
            .spec
            .iter()
            .filter_map(|(a, _)| p.provenance.remove(a).map(|v| (a.clone(), v)))
            .collect();
        out.push(SynthesizedProduct {
            category: p.category,
            key_attribute: p.key_attribute,
            key: p.key,
            spec: p.spec,
            provenance,
        });
        Ok(None)
    })?;
    Ok((out, report))
}

pub fn write_model(path: &Path, model: &LogisticModel) -> Result<()> {
    write_json(path, model)
}

pub fn load_model(path: &Path) -> Result<LogisticModel> {
    read_json(path)
}
