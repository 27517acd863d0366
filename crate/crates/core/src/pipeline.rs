//! Run-time offer processing: schema reconciliation, key clustering and
//! value fusion.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matcher::Correspondence;
use crate::model::{Catalog, CatalogSchema, Offer, Pair};
use crate::text::{casefold, normalize_key, tokenize};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconciledOffer {
    pub offer_id: String,
    pub merchant: String,
    pub category: String,
    pub pairs: Vec<Pair>,
}

/// Selected correspondences looked up by `(merchant, category, offer attribute)`.
#[derive(Debug, Clone, Default)]
pub struct CorrespondenceMap {
    map: BTreeMap<(String, String, String), Vec<String>>,
}

impl CorrespondenceMap {
    pub fn new(correspondences: &[Correspondence]) -> Self {
        let mut map: BTreeMap<(String, String, String), Vec<String>> = BTreeMap::new();
        for c in correspondences {
            let t = &c.candidate;
            let targets = map
                .entry((t.merchant.clone(), t.category.clone(), t.offer_attribute.clone()))
                .or_default();
            if !targets.contains(&t.catalog_attribute) {
                targets.push(t.catalog_attribute.clone());
            }
        }
        Self { map }
    }

    pub fn targets(&self, merchant: &str, category: &str, offer_attribute: &str) -> &[String] {
        // BTreeMap lookups need an owned tuple key.
        self.map
            .get(&(merchant.into(), category.into(), offer_attribute.into()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Renames offer attributes to catalog attributes.
///
/// A name equal (casefolded) to a schema attribute maps to that attribute.
/// Otherwise `⟨A, v⟩` becomes `⟨B, v⟩` for each selected `⟨B, A, M, C⟩`.
/// Unmapped pairs are dropped; the second return value counts them.
pub fn reconcile(
    offer: &Offer,
    correspondences: &CorrespondenceMap,
    schema: Option<&CatalogSchema>,
) -> (ReconciledOffer, usize) {
    let mut pairs = Vec::new();
    let mut discarded = 0;
    for (name, value) in &offer.spec {
        let folded = casefold(name);
        let identity = schema.and_then(|s| s.attributes.iter().find(|a| casefold(a) == folded));
        if let Some(attr) = identity {
            pairs.push((attr.clone(), value.clone()));
            continue;
        }
        let targets = correspondences.targets(&offer.merchant, &offer.category, name);
        let targets = targets.iter().filter(|b| schema.is_some_and(|s| s.contains(b)));
        let before = pairs.len();
        pairs.extend(targets.map(|b| (b.clone(), value.clone())));
        if pairs.len() == before {
            discarded += 1;
        }
    }
    (
        ReconciledOffer {
            offer_id: offer.id.clone(),
            merchant: offer.merchant.clone(),
            category: offer.category.clone(),
            pairs,
        },
        discarded,
    )
}

/// First schema key attribute with a value whose normalized form is non-empty.
pub fn extract_key(offer: &ReconciledOffer, schema: &CatalogSchema) -> Option<(String, String)> {
    schema.key_attributes.iter().find_map(|key| {
        offer
            .pairs
            .iter()
            .filter(|(name, _)| name == key)
            .map(|(_, v)| normalize_key(v))
            .find(|k| !k.is_empty())
            .map(|k| (key.clone(), k))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub category: String,
    pub key_attribute: String,
    pub key: String,
    pub members: Vec<ReconciledOffer>,
}

/// Groups offers by `(category, key attribute, normalized key)`, in that
/// sort order. Offers without a key (or without a schema) are dropped and
/// counted in the second return value.
pub fn cluster(offers: Vec<ReconciledOffer>, catalog: &Catalog) -> (Vec<Cluster>, usize) {
    let mut groups: BTreeMap<(String, String, String), Vec<ReconciledOffer>> = BTreeMap::new();
    let mut keyless = 0;
    for offer in offers {
        let key = catalog
            .schema(&offer.category)
            .and_then(|schema| extract_key(&offer, schema));
        match key {
            Some((attr, key)) => groups
                .entry((offer.category.clone(), attr, key))
                .or_default()
                .push(offer),
            None => keyless += 1,
        }
    }
    let clusters = groups
        .into_iter()
        .map(|((category, key_attribute, key), members)| Cluster {
            category,
            key_attribute,
            key,
            members,
        })
        .collect();
    (clusters, keyless)
}

/// Outcome of fusing one attribute's candidate values.
#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    /// Position of the chosen value in the input.
    pub index: usize,
    pub value: String,
    /// Distinct lowercased terms, in first-seen order.
    pub terms: Vec<String>,
    /// Binary term vector per input value.
    pub vectors: Vec<Vec<u8>>,
    pub centroid: Vec<f64>,
    /// Euclidean distance of each input value to the centroid.
    pub distances: Vec<f64>,
}

/// Picks the value closest to the centroid of the values' binary term
/// vectors. Ties go to the value that occurs most often verbatim, then to the
/// lexicographically smallest.
///
/// Comparisons use `n²·distance²`, which is an integer, so the choice does not
/// depend on input order.
pub fn fuse_value<S: AsRef<str>>(values: &[S]) -> Result<Fused> {
    if values.is_empty() {
        return Err(Error::EmptyInput("values to fuse"));
    }
    let n = values.len();
    let mut terms: Vec<String> = Vec::new();
    let mut term_index: BTreeMap<String, usize> = BTreeMap::new();
    let token_sets: Vec<Vec<usize>> = values
        .iter()
        .map(|v| {
            let mut ids: Vec<usize> = tokenize(v.as_ref())
                .into_iter()
                .map(|t| {
                    *term_index.entry(t.clone()).or_insert_with(|| {
                        terms.push(t);
                        terms.len() - 1
                    })
                })
                .collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    let dim = terms.len();
    let vectors: Vec<Vec<u8>> = token_sets
        .iter()
        .map(|ids| {
            let mut v = alloc::vec![0u8; dim];
            ids.iter().for_each(|&i| v[i] = 1);
            v
        })
        .collect();
    let mut counts = alloc::vec![0u64; dim];
    for v in &vectors {
        for (c, &x) in counts.iter_mut().zip(v) {
            *c += u64::from(x);
        }
    }
    let n64 = n as u64;
    let scaled_sq: Vec<u64> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .zip(&counts)
                .map(|(&x, &c)| {
                    let d = (n64 * u64::from(x)).abs_diff(c);
                    d * d
                })
                .sum()
        })
        .collect();
    let multiplicity = |i: usize| values.iter().filter(|v| v.as_ref() == values[i].as_ref()).count();
    let best = (0..n)
        .min_by(|&a, &b| {
            scaled_sq[a]
                .cmp(&scaled_sq[b])
                .then_with(|| multiplicity(b).cmp(&multiplicity(a)))
                .then_with(|| values[a].as_ref().cmp(values[b].as_ref()))
                .then_with(|| a.cmp(&b))
        })
        .unwrap_or(0);
    let nf = n as f64;
    Ok(Fused {
        index: best,
        value: String::from(values[best].as_ref()),
        terms,
        centroid: counts.iter().map(|&c| c as f64 / nf).collect(),
        distances: scaled_sq.iter().map(|&s| libm::sqrt(s as f64) / nf).collect(),
        vectors,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub offer: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesizedProduct {
    pub category: String,
    pub key_attribute: String,
    pub key: String,
    pub spec: Vec<Pair>,
    /// Per synthesized attribute, every contributing `(offer, value)`.
    pub provenance: Vec<(String, Vec<Provenance>)>,
}

/// One fused value per schema attribute that has at least one value among
/// the members, in schema order.
pub fn fuse_cluster(cluster: &Cluster, schema: &CatalogSchema) -> SynthesizedProduct {
    let mut spec = Vec::new();
    let mut provenance = Vec::new();
    for attr in &schema.attributes {
        let sources: Vec<Provenance> = cluster
            .members
            .iter()
            .flat_map(|m| {
                m.pairs
                    .iter()
                    .filter(|(name, _)| name == attr)
                    .map(|(_, v)| Provenance {
                        offer: m.offer_id.clone(),
                        value: v.clone(),
                    })
            })
            .collect();
        if sources.is_empty() {
            continue;
        }
        let values: Vec<&str> = sources.iter().map(|p| p.value.as_str()).collect();
        if let Ok(fused) = fuse_value(&values) {
            spec.push((attr.clone(), fused.value));
            provenance.push((attr.clone(), sources));
        }
    }
    SynthesizedProduct {
        category: cluster.category.clone(),
        key_attribute: cluster.key_attribute.clone(),
        key: cluster.key.clone(),
        spec,
        provenance,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisCounters {
    pub offers_in: usize,
    pub pairs_in: usize,
    pub pairs_reconciled: usize,
    pub pairs_discarded: usize,
    pub keyless_offers_dropped: usize,
    pub clusters: usize,
    pub products: usize,
    pub attributes_synthesized: usize,
    /// Clusters whose members carry more than one normalized value for
    /// another key attribute.
    pub key_disagreements: usize,
}

/// reconcile → cluster → fuse over every offer.
pub fn synthesize(
    offers: &[Offer],
    correspondences: &[Correspondence],
    catalog: &Catalog,
) -> (Vec<SynthesizedProduct>, SynthesisCounters) {
    let map = CorrespondenceMap::new(correspondences);
    let mut counters = SynthesisCounters {
        offers_in: offers.len(),
        ..Default::default()
    };
    let mut reconciled = Vec::with_capacity(offers.len());
    for offer in offers {
        let (r, discarded) = reconcile(offer, &map, catalog.schema(&offer.category));
        counters.pairs_in += offer.spec.len();
        counters.pairs_discarded += discarded;
        counters.pairs_reconciled += offer.spec.len() - discarded;
        reconciled.push(r);
    }
    let (clusters, keyless) = cluster(reconciled, catalog);
    counters.keyless_offers_dropped = keyless;
    counters.clusters = clusters.len();
    let mut products = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let Some(schema) = catalog.schema(&cluster.category) else {
            continue;
        };
        if key_disagreement(cluster, schema) {
            counters.key_disagreements += 1;
        }
        let product = fuse_cluster(cluster, schema);
        counters.attributes_synthesized += product.spec.len();
        products.push(product);
    }
    counters.products = products.len();
    (products, counters)
}

fn key_disagreement(cluster: &Cluster, schema: &CatalogSchema) -> bool {
    schema
        .key_attributes
        .iter()
        .filter(|k| **k != cluster.key_attribute)
        .any(|k| {
            let mut seen = alloc::collections::BTreeSet::new();
            for m in &cluster.members {
                for (name, v) in &m.pairs {
                    if name == k {
                        let norm = normalize_key(v);
                        if !norm.is_empty() {
                            seen.insert(norm);
                        }
                    }
                }
            }
            seen.len() > 1
        })
}
