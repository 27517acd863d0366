//! Attribute-value pairs from stored merchant landing pages.
//!
//! Every table row with exactly two cells yields one pair. Cells that
//! contain a nested table do not count, so a layout table wrapping the
//! specification table contributes nothing of its own.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use prodsynth_core::model::Pair;
use prodsynth_core::text::collapse_whitespace;
use prodsynth_core::Offer;
use scraper::{ElementRef, Html, Selector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{self, IoError};

pub const PAGE_INDEX: &str = "page_index.jsonl";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSpecification {
    pub offer_id: String,
    pub pairs: Vec<Pair>,
    pub source: PathBuf,
}

fn is_cell(e: &ElementRef<'_>) -> bool {
    matches!(e.value().name(), "td" | "th")
}

fn cell_text(cell: ElementRef<'_>) -> String {
    collapse_whitespace(&cell.text().collect::<String>())
}

/// Two-cell rows of every table in document order.
pub fn extract_pairs(html: &str) -> Vec<Pair> {
    let doc = Html::parse_document(html);
    let rows = Selector::parse("tr").expect("static selector");
    let tables = Selector::parse("table").expect("static selector");
    let mut pairs = Vec::new();
    for row in doc.select(&rows) {
        let cells: Vec<ElementRef<'_>> = row
            .children()
            .filter_map(ElementRef::wrap)
            .filter(|e| is_cell(e) && e.select(&tables).next().is_none())
            .collect();
        let [name, value] = cells[..] else { continue };
        let name = cell_text(name);
        let name = name.strip_suffix(':').unwrap_or(&name).trim_end();
        if name.is_empty() {
            continue;
        }
        pairs.push((name.to_owned(), cell_text(value)));
    }
    pairs
}

/// Stable page file name for a landing-page URL.
pub fn page_file_name(url: &str) -> String {
    format!("{:x}.html", Sha256::digest(url.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageIndexEntry {
    pub offer: String,
    pub file: String,
}

/// Writes each page under its URL hash (offer id when the URL is missing)
/// and the index mapping offers to files.
pub fn write_page_store(dir: &Path, pages: &[(&Offer, String)]) -> io::Result<()> {
    fs::create_dir_all(dir).map_err(|source| IoError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut index = Vec::with_capacity(pages.len());
    for (offer, html) in pages {
        let file = page_file_name(offer.url.as_deref().unwrap_or(&offer.id));
        let path = dir.join(&file);
        fs::write(&path, html).map_err(|source| IoError::Io { path, source })?;
        index.push(PageIndexEntry {
            offer: offer.id.clone(),
            file,
        });
    }
    io::write_lines(&dir.join(PAGE_INDEX), index)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExtractCounters {
    pub offers: usize,
    pub pages_read: usize,
    pub pages_missing: usize,
    pub pages_unreadable: usize,
    pub pairs_extracted: usize,
}

/// Reads one stored page. Bytes that are not UTF-8 give no pairs.
pub fn extract_file(offer_id: &str, path: &Path) -> std::io::Result<Option<RawSpecification>> {
    let bytes = fs::read(path)?;
    let Ok(html) = String::from_utf8(bytes) else {
        return Ok(None);
    };
    Ok(Some(RawSpecification {
        offer_id: offer_id.to_owned(),
        pairs: extract_pairs(&html),
        source: path.to_owned(),
    }))
}

/// Appends page pairs after each offer's feed pairs. Offers are located in
/// the page index first, then by the hash of their URL.
pub fn enrich_offers(offers: &[Offer], store: &Path, strict: bool) -> io::Result<(Vec<Offer>, ExtractCounters)> {
    if !store.is_dir() {
        return Err(IoError::Io {
            path: store.to_owned(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "page store is not a directory"),
        });
    }
    let mut index: HashMap<String, String> = HashMap::new();
    let index_path = store.join(PAGE_INDEX);
    if index_path.exists() {
        io::read_lines(&index_path, strict, |_, e: PageIndexEntry| {
            index.insert(e.offer, e.file);
            Ok(None)
        })?;
    }
    let mut counters = ExtractCounters {
        offers: offers.len(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(offers.len());
    for offer in offers {
        let mut offer = offer.clone();
        let file = index.get(&offer.id).cloned().or_else(|| {
            offer
                .url
                .as_deref()
                .map(page_file_name)
                .filter(|f| store.join(f).is_file())
        });
        if let Some(file) = file {
            match extract_file(&offer.id, &store.join(&file)) {
                Ok(Some(raw)) => {
                    counters.pages_read += 1;
                    counters.pairs_extracted += raw.pairs.len();
                    offer.spec.extend(raw.pairs);
                }
                Ok(None) => {
                    warn!("{}: page {file} is not UTF-8; no pairs extracted", offer.id);
                    counters.pages_unreadable += 1;
                }
                Err(e) => {
                    warn!("{}: page {file}: {e}", offer.id);
                    counters.pages_missing += 1;
                }
            }
        }
        out.push(offer);
    }
    Ok((out, counters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &str) -> String {
        format!("<html><body><table>{rows}</table></body></html>")
    }

    #[test]
    fn two_column_rows() {
        let html = table("<tr><td>Capacity</td><td>500GB</td></tr><tr><td>RPM</td><td>7200</td></tr>");
        assert_eq!(
            extract_pairs(&html),
            vec![("Capacity".into(), "500GB".into()), ("RPM".into(), "7200".into())]
        );
    }

    #[test]
    fn three_column_rows_are_ignored() {
        let html = table("<tr><td>a</td><td>b</td><td>c</td></tr>");
        assert!(extract_pairs(&html).is_empty());
    }

    #[test]
    fn trailing_colon_and_whitespace() {
        let html = table("<tr><th>  Hard Disk\n Size: </th><td> 500  <b>GB</b> </td></tr>");
        assert_eq!(extract_pairs(&html), vec![("Hard Disk Size".into(), "500 GB".into())]);
    }

    #[test]
    fn layout_tables_do_not_leak() {
        let html = "<table><tr><td>nav</td><td><table><tr><td>Speed</td><td>5400</td></tr></table></td></tr></table>";
        assert_eq!(extract_pairs(html), vec![("Speed".into(), "5400".into())]);
    }

    #[test]
    fn empty_names_are_dropped() {
        let html = table("<tr><td> : </td><td>x</td></tr><tr><td></td><td>y</td></tr>");
        assert!(extract_pairs(&html).is_empty());
    }

    #[test]
    fn file_names_are_stable() {
        let a = page_file_name("http://a.example/1");
        assert_eq!(a, page_file_name("http://a.example/1"));
        assert_ne!(a, page_file_name("http://a.example/2"));
        assert!(a.ends_with(".html") && a.len() == 64 + 5);
    }
}
