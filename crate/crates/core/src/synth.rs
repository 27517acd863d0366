//! Seeded synthetic corpora with known answers.
//!
//! Each category draws its schema from a fixed attribute library, in which a
//! few families (width, height and depth, for instance) share one value pool
//! and so only differ item by item. Products fall into segments, and every
//! segment sees its own slice of each attribute's value pool, so merchants
//! carrying a few segments have value distributions that differ from the
//! category as a whole. Every merchant picks one name and one writing style
//! per catalog attribute and category, then copies product values into its
//! offers with occasional perturbations, wrong values and junk pairs. Some
//! historical matches point at the wrong product.
//!
//! A fraction of merchants publish specifications in the feed; the rest only
//! on an HTML landing page, which [`SyntheticCorpus::pages`] renders.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matcher::generate_candidates;
use crate::model::{Catalog, CatalogSchema, Corpus, MatchRecord, Offer, Pair, Price, Product};
use crate::rng::SeededRng;
use crate::text::{normalize_key, same_name};
use crate::{CandidateTuple, Error, Result};

const MPN: &str = "Model Part Number";
const UPC: &str = "UPC";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub categories: usize,
    pub merchants: usize,
    pub attributes_per_category: usize,
    /// Synonyms available per catalog attribute within one category.
    pub synonym_pool_size: usize,
    pub products_per_category: usize,
    /// Inclusive range of offers drawn per offered product.
    pub offers_per_product: (usize, usize),
    pub match_fraction: f64,
    /// Chance, repeated up to three times per offer, of adding a junk pair.
    pub noise_rate: f64,
    /// Chance that an offer value is reformatted.
    pub perturbation_rate: f64,
    /// Chance a merchant keeps the catalog name of an attribute.
    pub identity_probability: f64,
    pub segments_per_category: usize,
    pub segments_per_merchant: usize,
    pub merchant_category_rate: f64,
    /// Chance a merchant omits a (non-key) attribute in a category.
    pub attribute_drop_rate: f64,
    /// Chance a product carries a non-key attribute.
    pub product_attribute_rate: f64,
    /// Products no merchant sells; their values come from a segment of
    /// their own.
    pub tail_product_fraction: f64,
    /// Share of an attribute's value pool visible to one segment.
    pub segment_value_share: f64,
    /// Exponent of the merchant popularity weights `1 / rank^s`.
    pub merchant_zipf: f64,
    /// Merchants whose feeds carry specifications; the others only have
    /// landing pages.
    pub feed_spec_fraction: f64,
    /// Chance a merchant renders one attribute in a house style (unit
    /// dropped or spelled out, hyphens removed) for all its offers.
    pub house_style_rate: f64,
    /// Chance an offer value is replaced by a wrong one from the same pool.
    pub value_error_rate: f64,
    /// Chance a match record points at the wrong product of the category.
    pub match_error_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            categories: 6,
            merchants: 20,
            attributes_per_category: 10,
            synonym_pool_size: 3,
            products_per_category: 200,
            offers_per_product: (3, 15),
            match_fraction: 0.6,
            noise_rate: 0.1,
            perturbation_rate: 0.05,
            identity_probability: 0.1,
            segments_per_category: 4,
            segments_per_merchant: 2,
            merchant_category_rate: 1.0,
            attribute_drop_rate: 0.0,
            product_attribute_rate: 0.95,
            tail_product_fraction: 0.15,
            segment_value_share: 0.5,
            merchant_zipf: 1.0,
            feed_spec_fraction: 0.25,
            house_style_rate: 0.15,
            value_error_rate: 0.03,
            match_error_rate: 0.03,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleConfig(msg));
        let rates = [
            ("match_fraction", self.match_fraction),
            ("noise_rate", self.noise_rate),
            ("perturbation_rate", self.perturbation_rate),
            ("identity_probability", self.identity_probability),
            ("merchant_category_rate", self.merchant_category_rate),
            ("attribute_drop_rate", self.attribute_drop_rate),
            ("product_attribute_rate", self.product_attribute_rate),
            ("tail_product_fraction", self.tail_product_fraction),
            ("segment_value_share", self.segment_value_share),
            ("feed_spec_fraction", self.feed_spec_fraction),
            ("house_style_rate", self.house_style_rate),
            ("value_error_rate", self.value_error_rate),
            ("match_error_rate", self.match_error_rate),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} = {r} is outside [0, 1]"));
            }
        }
        if self.categories == 0 || self.merchants == 0 {
            return bad("need at least one category and one merchant".into());
        }
        if self.attributes_per_category == 0 || self.attributes_per_category > LIBRARY.len() {
            return bad(format!("attributes_per_category must be in 1..={}", LIBRARY.len()));
        }
        let max_pool = LIBRARY.iter().map(|k| k.synonyms.len()).min().unwrap_or(0);
        if self.synonym_pool_size > max_pool {
            return bad(format!(
                "synonym pool of {} exceeds the {max_pool} synonyms known per attribute",
                self.synonym_pool_size
            ));
        }
        if self.synonym_pool_size == 0 && self.identity_probability < 1.0 {
            return bad("an empty synonym pool needs identity_probability = 1".into());
        }
        let (lo, hi) = self.offers_per_product;
        if lo > hi {
            return bad("offers_per_product range is reversed".into());
        }
        if self.segments_per_category == 0 || self.segments_per_merchant == 0 {
            return bad("segment counts must be positive".into());
        }
        if self.segments_per_merchant > self.segments_per_category {
            return bad("segments_per_merchant exceeds segments_per_category".into());
        }
        if !(self.merchant_zipf.is_finite() && self.merchant_zipf >= 0.0) {
            return bad("merchant_zipf must be a non-negative number".into());
        }
        Ok(())
    }
}

enum Values {
    PartNumber,
    Upc,
    Words(&'static [&'static str]),
    Measure(&'static [&'static str], &'static str),
}

struct Kind {
    name: &'static str,
    synonyms: &'static [&'static str],
    values: Values,
}

const DIMENSIONS: &[&str] = &[
    "1.0", "1.6", "2.4", "3.5", "4.1", "5.8", "7.2", "8.7", "9.6", "11.3", "13.5", "15.2", "17.9", "21.4",
];

const TRANSFER_RATES: &[&str] = &["100", "150", "200", "250", "300", "350", "400", "450", "500", "550"];

const WATTS: &[&str] = &["0.5", "1", "2", "5", "8", "12", "25", "45", "65", "90", "120", "180"];

/// Attributes sharing one value pool; a schema takes them together.
const FAMILIES: &[&[&str]] = &[
    &["Width", "Height", "Depth"],
    &["Read Speed", "Write Speed"],
    &["Power", "Standby Power"],
];

const BRANDS: &[&str] = &[
    "Seagate",
    "Western Digital",
    "Hitachi",
    "Samsung",
    "Toshiba",
    "Fujitsu",
    "Maxtor",
    "Sony",
    "Canon",
    "Nikon",
    "Panasonic",
    "Dell",
    "HP",
    "Lenovo",
    "Acer",
    "Apple",
    "LG",
    "Asus",
];

// The first three entries are forced into every schema, in this order.
const LIBRARY: &[Kind] = &[
    Kind {
        name: MPN,
        synonyms: &["MPN", "Mfr. Part #", "Manufacturer Part Number", "Part No", "Mfg Part"],
        values: Values::PartNumber,
    },
    Kind {
        name: UPC,
        synonyms: &["UPC Code", "Universal Product Code", "Barcode", "EAN/UPC", "GTIN"],
        values: Values::Upc,
    },
    Kind {
        name: "Brand",
        synonyms: &["Manufacturer", "Make", "Brand Name", "Mfr", "Maker"],
        values: Values::Words(BRANDS),
    },
    Kind {
        name: "Series",
        synonyms: &["Product Line", "Line", "Family", "Model Series"],
        values: Values::Words(&[
            "Barracuda",
            "Caviar Blue",
            "Deskstar",
            "Pavilion",
            "Inspiron",
            "ThinkPad",
            "Aspire",
            "Satellite",
            "Cyber-shot",
            "PowerShot",
            "Coolpix",
            "EOS Rebel",
            "Bravia",
            "Aquos",
            "Viera",
            "LaserJet",
        ]),
    },
    Kind {
        name: "Capacity",
        synonyms: &["Hard Disk Size", "Storage Capacity", "Size", "Total Capacity"],
        values: Values::Measure(
            &[
                "80", "120", "160", "250", "320", "500", "640", "750", "1000", "1500", "2000",
            ],
            "GB",
        ),
    },
    Kind {
        name: "Speed",
        synonyms: &["RPM", "Spindle Speed", "Rotational Speed", "Drive Speed"],
        values: Values::Measure(&["4200", "5400", "5900", "7200", "10000", "15000"], "rpm"),
    },
    Kind {
        name: "Interface",
        synonyms: &["Int. Type", "Interface Type", "Connection", "Bus"],
        values: Values::Words(&[
            "SATA 3Gb/s",
            "SATA 6Gb/s",
            "ATA 100",
            "ATA 133",
            "IDE 133",
            "SCSI Ultra320",
            "SAS 6Gb/s",
            "USB 2.0",
            "USB 3.0",
            "FireWire 800",
            "eSATA",
        ]),
    },
    Kind {
        name: "Color",
        synonyms: &["Colour", "Finish", "Color Family", "Case Color"],
        values: Values::Words(&[
            "Black",
            "Silver",
            "White",
            "Red",
            "Blue",
            "Gray",
            "Piano Black",
            "Gunmetal Gray",
            "Pearl White",
            "Champagne Gold",
        ]),
    },
    Kind {
        name: "Weight",
        synonyms: &["Item Weight", "Net Weight", "Wt", "Shipping Weight"],
        values: Values::Measure(
            &[
                "0.5", "1.2", "1.5", "2.3", "3.1", "4.4", "5.5", "6.2", "7.8", "9.9", "12.5",
            ],
            "lbs",
        ),
    },
    Kind {
        name: "Width",
        synonyms: &["Item Width", "W", "Overall Width", "Width (in)"],
        values: Values::Measure(DIMENSIONS, "in"),
    },
    Kind {
        name: "Height",
        synonyms: &["Item Height", "H", "Overall Height", "Height (in)"],
        values: Values::Measure(DIMENSIONS, "in"),
    },
    Kind {
        name: "Depth",
        synonyms: &["Item Depth", "D", "Overall Depth", "Length"],
        values: Values::Measure(DIMENSIONS, "in"),
    },
    Kind {
        name: "Screen Size",
        synonyms: &["Display Size", "Screen", "Diagonal Size", "Viewable Size"],
        values: Values::Measure(
            &[
                "2.5", "2.7", "3.0", "13.3", "14.1", "15.4", "15.6", "17.3", "19", "22", "24", "32", "42",
            ],
            "in",
        ),
    },
    Kind {
        name: "Resolution",
        synonyms: &[
            "Max Resolution",
            "Native Resolution",
            "Display Resolution",
            "Image Resolution",
        ],
        values: Values::Words(&[
            "1024 x 768",
            "1280 x 800",
            "1366 x 768",
            "1440 x 900",
            "1600 x 900",
            "1920 x 1080",
            "1920 x 1200",
            "2560 x 1440",
        ]),
    },
    Kind {
        name: "Operating System",
        synonyms: &["OS", "Platform", "Operating Sys", "Software Platform"],
        values: Values::Words(&[
            "Microsoft Windows Vista",
            "Windows Vista Home Premium",
            "Windows 7 Home Premium",
            "Windows 7 Professional",
            "Windows XP Professional",
            "Mac OS X",
            "Ubuntu Linux",
            "Chrome OS",
        ]),
    },
    Kind {
        name: "Processor",
        synonyms: &["CPU", "Processor Type", "Chip", "CPU Model"],
        values: Values::Words(&[
            "Intel Core 2 Duo",
            "Intel Core i3",
            "Intel Core i5",
            "Intel Core i7",
            "Intel Atom",
            "AMD Athlon II",
            "AMD Phenom II",
            "AMD Turion X2",
        ]),
    },
    Kind {
        name: "Memory",
        synonyms: &["RAM", "Memory Capacity", "System Memory", "Installed RAM"],
        values: Values::Measure(&["512", "1024", "2048", "3072", "4096", "6144", "8192"], "MB"),
    },
    Kind {
        name: "Warranty",
        synonyms: &["Warranty Length", "Manufacturer Warranty", "Guarantee", "Coverage"],
        values: Values::Words(&[
            "90 days",
            "1 year limited",
            "2 years limited",
            "3 years limited",
            "5 years limited",
            "lifetime limited",
        ]),
    },
    Kind {
        name: "Power",
        synonyms: &["Power Consumption", "Wattage", "Power Draw", "Watts"],
        values: Values::Measure(WATTS, "W"),
    },
    Kind {
        name: "Standby Power",
        synonyms: &["Idle Power", "Sleep Power", "Standby Consumption", "Power (Standby)"],
        values: Values::Measure(WATTS, "W"),
    },
    Kind {
        name: "Read Speed",
        synonyms: &["Max Read", "Read Rate", "Sequential Read", "Read Throughput"],
        values: Values::Measure(TRANSFER_RATES, "MB/s"),
    },
    Kind {
        name: "Write Speed",
        synonyms: &["Max Write", "Write Rate", "Sequential Write", "Write Throughput"],
        values: Values::Measure(TRANSFER_RATES, "MB/s"),
    },
    Kind {
        name: "Cache",
        synonyms: &["Buffer Size", "Buffer", "Cache Size", "Cache Memory"],
        values: Values::Measure(&["2", "8", "16", "32", "64"], "MB"),
    },
    Kind {
        name: "Material",
        synonyms: &["Construction", "Body Material", "Housing", "Shell"],
        values: Values::Words(&[
            "Aluminum",
            "Plastic",
            "Brushed Aluminum",
            "Magnesium Alloy",
            "Steel",
            "Polycarbonate",
            "Carbon Fiber",
        ]),
    },
    Kind {
        name: "Voltage",
        synonyms: &["Input Voltage", "Volts", "Power Supply", "Rated Voltage"],
        values: Values::Measure(&["5", "12", "19", "100-240", "110", "220"], "V"),
    },
    Kind {
        name: "Battery Life",
        synonyms: &["Battery Runtime", "Run Time", "Battery", "Battery Duration"],
        values: Values::Measure(&["2", "3", "4.5", "5", "6", "8", "10", "12"], "hours"),
    },
    Kind {
        name: "Optical Zoom",
        synonyms: &["Zoom", "Optical Zoom Ratio", "Zoom Ratio", "Lens Zoom"],
        values: Values::Measure(&["3", "4", "5", "10", "12", "18", "20", "26"], "x"),
    },
    Kind {
        name: "Focal Length",
        synonyms: &["Lens Focal Length", "Focal Range", "Lens", "Focal Length Range"],
        values: Values::Words(&[
            "18-55 mm",
            "28-105 mm",
            "35-70 mm",
            "24-120 mm",
            "5-50 mm",
            "6.3-31.5 mm",
            "4.7-84.2 mm",
        ]),
    },
    Kind {
        name: "Megapixels",
        synonyms: &["Effective Pixels", "Sensor Resolution", "MP", "Pixel Count"],
        values: Values::Measure(&["8", "10", "12.1", "14", "16", "18", "20.2", "24"], "MP"),
    },
    Kind {
        name: "Refresh Rate",
        synonyms: &["Refresh", "Scan Rate", "Vertical Refresh", "Frame Rate"],
        values: Values::Measure(&["60", "75", "120", "144", "240", "600"], "Hz"),
    },
    Kind {
        name: "Response Time",
        synonyms: &["Pixel Response", "Response", "Gray-to-Gray", "Response Speed"],
        values: Values::Measure(&["2", "5", "8", "12", "16"], "ms"),
    },
    Kind {
        name: "Print Speed",
        synonyms: &["Pages Per Minute", "PPM", "Print Rate", "Mono Print Speed"],
        values: Values::Measure(&["12", "18", "20", "25", "30", "35", "40", "50"], "ppm"),
    },
];

const FORCED_KINDS: usize = 3;

const JUNK_NAMES: &[&str] = &[
    "Availability",
    "Shipping",
    "Condition",
    "In Stock",
    "Ships From",
    "Rebate",
    "Customer Rating",
    "Item #",
    "SKU",
    "Return Policy",
    "Gift Wrap",
    "Sold By",
];

const JUNK_VALUES: &[&str] = &[
    "In stock",
    "Usually ships in 24 hours",
    "New",
    "Refurbished",
    "Free shipping",
    "2-3 business days",
    "4.5 out of 5",
    "See details",
    "Yes",
    "No",
    "Ground",
    "Limited quantity",
];

const CATEGORY_NAMES: &[&str] = &[
    "Hard Drives",
    "Laptops",
    "Digital Cameras",
    "Monitors",
    "Printers",
    "Televisions",
    "Desktops",
    "Tablets",
];

/// A catalog product the generator planted, with normalized keys for lookup
/// by any key attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedProduct {
    pub id: String,
    pub category: String,
    pub keys: Vec<Pair>,
    pub spec: Vec<Pair>,
}

/// The name one merchant uses for one catalog attribute in one category.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NameChoice {
    pub merchant: String,
    pub category: String,
    pub catalog: String,
    pub offer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Cross-name correspondences that the corpus makes discoverable, in
    /// candidate order.
    pub correspondences: Vec<CandidateTuple>,
    /// Every name choice, whether or not it surfaced in a matched offer.
    pub names: Vec<NameChoice>,
    /// Products that received at least one offer.
    pub products: Vec<PlantedProduct>,
}

impl GroundTruth {
    /// `(category, merchant, catalog attribute) → offer attribute`.
    pub fn name_map(&self) -> BTreeMap<(&str, &str, &str), &str> {
        self.names
            .iter()
            .map(|n| {
                (
                    (n.category.as_str(), n.merchant.as_str(), n.catalog.as_str()),
                    n.offer.as_str(),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub schemas: Vec<CatalogSchema>,
    pub products: Vec<Product>,
    /// Offers with their full specification.
    pub offers: Vec<Offer>,
    /// Whether each offer's specification travels in the feed; the rest
    /// only appear on the landing page.
    pub in_feed: Vec<bool>,
    /// Per merchant, whether page labels carry a trailing colon.
    pub colon_merchants: BTreeSet<String>,
    pub matches: Vec<MatchRecord>,
    pub truth: GroundTruth,
}

impl SyntheticCorpus {
    /// Offers as a feed delivers them: page-only offers have empty specs.
    pub fn feed_offers(&self) -> Vec<Offer> {
        self.offers
            .iter()
            .zip(&self.in_feed)
            .map(|(o, feed)| {
                let mut o = o.clone();
                if !feed {
                    o.spec.clear();
                }
                o
            })
            .collect()
    }

    /// Landing page of every page-only offer.
    pub fn pages(&self) -> Vec<(usize, String)> {
        self.offers
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.in_feed[*i])
            .map(|(i, o)| (i, render_page(o, self.colon_merchants.contains(&o.merchant))))
            .collect()
    }

    pub fn catalog(&self) -> Result<Catalog> {
        Catalog::new(self.schemas.clone(), self.products.clone())
    }

    /// The corpus with fully populated offer specs.
    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::new(self.catalog()?, self.offers.clone(), self.matches.clone())
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// A merchant landing page: a layout table wrapping a price table (three
/// columns) and the specification table.
pub fn render_page(offer: &Offer, trailing_colon: bool) -> String {
    let title = escape(&offer.title);
    let price = offer.price.as_ref().map(ToString::to_string).unwrap_or_default();
    let mut rows = String::new();
    for (name, value) in &offer.spec {
        let colon = if trailing_colon { ":" } else { "" };
        rows.push_str(&format!(
            "      <tr><td class=\"label\">{}{colon}</td><td>{}</td></tr>\n",
            escape(name),
            escape(value)
        ));
    }
    format!(
        "<!DOCTYPE html>\n<html>\n<head><title>{title}</title></head>\n<body>\n\
<table class=\"layout\">\n<tr>\n  <td><div class=\"nav\"><a href=\"/\">Home</a> &gt; {category}</div></td>\n  <td>\n\
    <h1>{title}</h1>\n\
    <table class=\"buy\"><tr><td>Price</td><td>{price}</td><td><button>Add to cart</button></td></tr></table>\n\
    <table class=\"spec\">\n      <tr><th colspan=\"2\">Specifications</th></tr>\n{rows}    </table>\n\
  </td>\n</tr>\n</table>\n</body>\n</html>\n",
        category = escape(&offer.category),
        price = escape(&price),
    )
}

struct CategoryPlan {
    name: String,
    kinds: Vec<usize>,
    /// Per attribute, per segment (tail last), indices into the value pool.
    slices: Vec<Vec<Vec<usize>>>,
    sellers: Vec<Seller>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Verbatim,
    NoUnit,
    LongUnit,
    NoHyphen,
}

struct Seller {
    merchant: usize,
    segments: Vec<usize>,
    /// Per attribute: `None` when dropped, else the name used and how values
    /// are written.
    names: Vec<Option<(String, Style)>>,
}

fn pool_len(values: &Values) -> usize {
    match values {
        Values::PartNumber | Values::Upc => 0,
        Values::Words(w) => w.len(),
        Values::Measure(n, _) => n.len(),
    }
}

fn render_value(values: &Values, index: usize) -> String {
    match values {
        Values::Words(w) => w[index].into(),
        Values::Measure(n, unit) => format!("{} {unit}", n[index]),
        Values::PartNumber | Values::Upc => unreachable!("identifiers are generated per product"),
    }
}

fn long_unit(unit: &str) -> &'static str {
    match unit {
        "GB" => "Gigabytes",
        "MB" => "Megabytes",
        "rpm" => "revolutions/min",
        "lbs" => "pounds",
        "in" => "inches",
        "W" => "Watts",
        "V" => "Volts",
        "hours" => "hrs",
        "x" => "times",
        "MP" => "megapixels",
        "Hz" => "hertz",
        "ms" => "milliseconds",
        "MB/s" => "megabytes/sec",
        _ => "pages/min",
    }
}

fn styles_for(values: &Values) -> &'static [Style] {
    match values {
        Values::PartNumber => &[Style::NoHyphen],
        Values::Upc => &[],
        Values::Measure(..) => &[Style::NoUnit, Style::LongUnit],
        Values::Words(_) => &[],
    }
}

fn apply_style(style: Style, values: &Values, value: &str) -> String {
    match (style, values) {
        (Style::NoUnit, Values::Measure(_, unit)) => value.strip_suffix(unit).unwrap_or(value).trim_end().into(),
        (Style::LongUnit, Values::Measure(_, unit)) => match value.strip_suffix(unit) {
            Some(number) => format!("{number}{}", long_unit(unit)),
            None => value.into(),
        },
        (Style::NoHyphen, _) => value.replace('-', ""),
        _ => value.into(),
    }
}

fn part_number(rng: &mut SeededRng, seen: &mut BTreeSet<String>) -> String {
    const LETTERS: &[u8] = b"ABCDEFGHJKLMNPRSTUVWXYZ";
    const ALNUM: &[u8] = b"ABCDEFGHJKLMNPRSTUVWXYZ0123456789";
    loop {
        let mut s = String::new();
        for _ in 0..2 {
            s.push(*rng.pick(LETTERS) as char);
        }
        for _ in 0..4 {
            s.push(char::from(b'0' + rng.below(10) as u8));
        }
        s.push('-');
        for _ in 0..2 {
            s.push(*rng.pick(ALNUM) as char);
        }
        if seen.insert(normalize_key(&s)) {
            return s;
        }
    }
}

fn upc(rng: &mut SeededRng, seen: &mut BTreeSet<String>) -> String {
    loop {
        let s: String = (0..12).map(|_| char::from(b'0' + rng.below(10) as u8)).collect();
        if seen.insert(s.clone()) {
            return s;
        }
    }
}

/// Reformats a single value without changing what it denotes.
fn perturb(rng: &mut SeededRng, kind: &Values, value: &str) -> String {
    match kind {
        Values::PartNumber => value.to_lowercase(),
        Values::Upc if value.len() == 12 => {
            format!("{} {} {} {}", &value[..1], &value[1..6], &value[6..11], &value[11..])
        }
        Values::Measure(..) if rng.chance(0.5) => value.replacen(' ', "", 1),
        Values::Words(_) => {
            let mut tokens: Vec<&str> = value.split(' ').collect();
            if tokens.len() > 1 && rng.chance(0.5) {
                tokens.rotate_left(1);
                tokens.join(" ")
            } else {
                value.to_uppercase()
            }
        }
        _ => value.to_uppercase(),
    }
}

fn category_name(i: usize) -> String {
    match CATEGORY_NAMES.get(i) {
        Some(n) => (*n).into(),
        None => format!("Category {:02}", i + 1),
    }
}

fn plan_category(rng: &mut SeededRng, config: &SynthConfig, index: usize) -> CategoryPlan {
    let forced = FORCED_KINDS.min(config.attributes_per_category);
    let mut kinds: Vec<usize> = (0..forced).collect();
    let position = |name: &str| {
        LIBRARY
            .iter()
            .position(|k| k.name == name)
            .expect("family member in library")
    };
    let mut groups: Vec<Vec<usize>> = FAMILIES
        .iter()
        .map(|f| f.iter().map(|n| position(n)).collect())
        .collect();
    groups.extend(
        (FORCED_KINDS..LIBRARY.len())
            .filter(|&k| !FAMILIES.iter().any(|f| f.contains(&LIBRARY[k].name)))
            .map(|k| alloc::vec![k]),
    );
    rng.shuffle(&mut groups);
    for group in groups {
        let room = config.attributes_per_category - kinds.len();
        kinds.extend(group.into_iter().take(room));
    }

    let segments = config.segments_per_category + 1;
    let slices = kinds
        .iter()
        .map(|&k| {
            let n = pool_len(&LIBRARY[k].values);
            let take = if n == 0 {
                0
            } else {
                let share = libm::ceil(n as f64 * config.segment_value_share) as usize;
                share.clamp(2.min(n), n)
            };
            (0..segments)
                .map(|_| {
                    let mut s = rng.sample(n, take);
                    s.sort_unstable();
                    s
                })
                .collect()
        })
        .collect();

    let pools: Vec<Vec<&'static str>> = kinds
        .iter()
        .map(|&k| {
            let mut syn = LIBRARY[k].synonyms.to_vec();
            rng.shuffle(&mut syn);
            syn.truncate(config.synonym_pool_size);
            syn
        })
        .collect();

    let mut sellers: Vec<usize> = (0..config.merchants)
        .filter(|_| rng.chance(config.merchant_category_rate))
        .collect();
    if sellers.is_empty() {
        sellers.push(rng.below(config.merchants));
    }
    let sellers = sellers
        .into_iter()
        .map(|merchant| {
            let mut segs = rng.sample(config.segments_per_category, config.segments_per_merchant);
            segs.sort_unstable();
            let names = kinds
                .iter()
                .zip(&pools)
                .map(|(&k, pool)| {
                    let kind = &LIBRARY[k];
                    if kind.name != MPN && rng.chance(config.attribute_drop_rate) {
                        return None;
                    }
                    let name = if pool.is_empty() || rng.chance(config.identity_probability) {
                        kind.name.into()
                    } else {
                        (*rng.pick(pool)).into()
                    };
                    let styles = styles_for(&kind.values);
                    let style = if !styles.is_empty() && rng.chance(config.house_style_rate) {
                        *rng.pick(styles)
                    } else {
                        Style::Verbatim
                    };
                    Some((name, style))
                })
                .collect();
            Seller {
                merchant,
                segments: segs,
                names,
            }
        })
        .collect();

    CategoryPlan {
        name: category_name(index),
        kinds,
        slices,
        sellers,
    }
}

struct Ids {
    mpn: BTreeSet<String>,
    upc: BTreeSet<String>,
}

fn make_products(
    rng: &mut SeededRng,
    config: &SynthConfig,
    plan: &CategoryPlan,
    category_index: usize,
    ids: &mut Ids,
) -> Vec<(Product, usize)> {
    let n = config.products_per_category;
    let tail_count = libm::round(n as f64 * config.tail_product_fraction) as usize;
    (0..n)
        .map(|p| {
            let segment = if p >= n - tail_count {
                config.segments_per_category
            } else {
                rng.below(config.segments_per_category)
            };
            let mut spec = Vec::new();
            for (a, &k) in plan.kinds.iter().enumerate() {
                let kind = &LIBRARY[k];
                let value = match kind.values {
                    Values::PartNumber => part_number(rng, &mut ids.mpn),
                    Values::Upc => upc(rng, &mut ids.upc),
                    ref v => {
                        if !rng.chance(config.product_attribute_rate) {
                            continue;
                        }
                        render_value(v, *rng.pick(&plan.slices[a][segment]))
                    }
                };
                spec.push((kind.name.to_string(), value));
            }
            let product = Product {
                id: format!("P{:02}-{:04}", category_index + 1, p + 1),
                category: plan.name.clone(),
                spec,
            };
            (product, segment)
        })
        .collect()
}

/// Deterministic for a given `(config, seed)`.
pub fn generate(config: &SynthConfig, seed: u64) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = SeededRng::new(seed);
    let merchants: Vec<String> = (0..config.merchants)
        .map(|i| format!("Merchant {:02}", i + 1))
        .collect();
    let weights: Vec<f64> = (0..config.merchants)
        .map(|i| 1.0 / libm::pow((i + 1) as f64, config.merchant_zipf))
        .collect();
    let feed_merchants: Vec<bool> = (0..config.merchants)
        .map(|_| rng.chance(config.feed_spec_fraction))
        .collect();
    let colon_merchants: BTreeSet<String> = merchants.iter().filter(|_| rng.chance(0.5)).cloned().collect();

    let mut schemas = Vec::new();
    let mut products = Vec::new();
    let mut offers = Vec::new();
    let mut in_feed = Vec::new();
    let mut matches = Vec::new();
    let mut names = Vec::new();
    let mut planted = Vec::new();
    let mut ids = Ids {
        mpn: BTreeSet::new(),
        upc: BTreeSet::new(),
    };

    for c in 0..config.categories {
        let plan = plan_category(&mut rng, config, c);
        let attributes: Vec<String> = plan.kinds.iter().map(|&k| LIBRARY[k].name.to_string()).collect();
        let schema = CatalogSchema::new(plan.name.clone(), attributes.clone(), None)?;
        for seller in &plan.sellers {
            for (attr, choice) in attributes.iter().zip(&seller.names) {
                if let Some((name, _)) = choice {
                    names.push(NameChoice {
                        merchant: merchants[seller.merchant].clone(),
                        category: plan.name.clone(),
                        catalog: attr.clone(),
                        offer: name.clone(),
                    });
                }
            }
        }

        let category_products = make_products(&mut rng, config, &plan, c, &mut ids);
        for (product, segment) in &category_products {
            let eligible: Vec<&Seller> = if *segment == config.segments_per_category {
                Vec::new()
            } else {
                plan.sellers.iter().filter(|s| s.segments.contains(segment)).collect()
            };
            // `k` distinct sellers, drawn by popularity.
            let k = rng.range_inclusive(config.offers_per_product.0, config.offers_per_product.1);
            let eligible_weights: Vec<f64> = eligible.iter().map(|s| weights[s.merchant]).collect();
            let mut picked = rng.weighted_distinct(&eligible_weights, k);
            picked.sort_unstable();
            let listing: Vec<&Seller> = picked.into_iter().map(|i| eligible[i]).collect();
            for seller in &listing {
                let offer = make_offer(&mut rng, config, &plan, seller, &merchants, product, offers.len());
                if rng.chance(config.match_fraction) {
                    let target = if rng.chance(config.match_error_rate) {
                        &rng.pick(&category_products).0
                    } else {
                        product
                    };
                    matches.push(MatchRecord::new(offer.id.clone(), target.id.clone()));
                }
                in_feed.push(feed_merchants[seller.merchant]);
                offers.push(offer);
            }
            if !listing.is_empty() {
                let keys = schema
                    .key_attributes
                    .iter()
                    .filter_map(|k| product.values(k).next().map(|v| (k.clone(), normalize_key(v))))
                    .collect();
                planted.push(PlantedProduct {
                    id: product.id.clone(),
                    category: product.category.clone(),
                    keys,
                    spec: product.spec.clone(),
                });
            }
        }
        products.extend(category_products.into_iter().map(|(p, _)| p));
        schemas.push(schema);
    }

    let mut corpus = SyntheticCorpus {
        schemas,
        products,
        offers,
        in_feed,
        colon_merchants,
        matches,
        truth: GroundTruth {
            correspondences: Vec::new(),
            names,
            products: planted,
        },
    };
    corpus.truth.correspondences = discoverable(&corpus)?;
    Ok(corpus)
}

fn make_offer(
    rng: &mut SeededRng,
    config: &SynthConfig,
    plan: &CategoryPlan,
    seller: &Seller,
    merchants: &[String],
    product: &Product,
    ordinal: usize,
) -> Offer {
    let mut spec: Vec<Pair> = Vec::new();
    for (a, &k) in plan.kinds.iter().enumerate() {
        let kind = &LIBRARY[k];
        let Some((name, style)) = &seller.names[a] else {
            continue;
        };
        for value in product.values(kind.name) {
            let value = if pool_len(&kind.values) > 0 && rng.chance(config.value_error_rate) {
                render_value(&kind.values, rng.below(pool_len(&kind.values)))
            } else {
                value.to_string()
            };
            let mut value = apply_style(*style, &kind.values, &value);
            if rng.chance(config.perturbation_rate) {
                value = perturb(rng, &kind.values, &value);
            }
            spec.push((name.clone(), value));
        }
    }
    for _ in 0..3 {
        if !rng.chance(config.noise_rate) {
            break;
        }
        let at = rng.below(spec.len() + 1);
        spec.insert(at, ((*rng.pick(JUNK_NAMES)).into(), (*rng.pick(JUNK_VALUES)).into()));
    }
    let merchant = &merchants[seller.merchant];
    let brand = product.values("Brand").next().unwrap_or("Generic");
    let mpn = product.values(MPN).next().unwrap_or("");
    let id = format!("O{:06}", ordinal + 1);
    let slug: String = merchant
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .collect::<String>()
        .to_lowercase();
    let cents = rng.range_inclusive(1999, 249_999);
    let mut offer = Offer::new(
        id.clone(),
        merchant.clone(),
        product.category.clone(),
        format!("{brand} {} {mpn}", product.category).trim().to_string(),
    )
    .with_spec(spec);
    offer.price = Some(Price::parse(&format!("{}.{:02} USD", cents / 100, cents % 100)));
    offer.url = Some(format!("http://www.{slug}.example/item/{id}"));
    offer
}

/// Keeps the planted cross-name choices that surface as candidates, and
/// checks that each of them is indeed generated.
fn discoverable(synthetic: &SyntheticCorpus) -> Result<Vec<CandidateTuple>> {
    let corpus = synthetic.corpus()?;
    let candidates: BTreeSet<CandidateTuple> = generate_candidates(&corpus).into_iter().collect();
    let mut matched_offer_attrs: BTreeSet<(&str, &str, &str)> = BTreeSet::new();
    let mut matched_product_attrs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for (oi, pi) in corpus.matched_positions() {
        let o = &corpus.offers()[oi];
        for (name, _) in &o.spec {
            matched_offer_attrs.insert((o.category.as_str(), o.merchant.as_str(), name.as_str()));
        }
        let p = &corpus.catalog().products()[pi];
        for (name, _) in &p.spec {
            matched_product_attrs.insert((p.category.as_str(), name.as_str()));
        }
    }
    let mut out = Vec::new();
    for n in &synthetic.truth.names {
        if same_name(&n.catalog, &n.offer)
            || !matched_offer_attrs.contains(&(n.category.as_str(), n.merchant.as_str(), n.offer.as_str()))
            || !matched_product_attrs.contains(&(n.category.as_str(), n.catalog.as_str()))
        {
            continue;
        }
        let t = CandidateTuple::new(
            n.catalog.clone(),
            n.offer.clone(),
            n.merchant.clone(),
            n.category.clone(),
        );
        if !candidates.contains(&t) {
            return Err(Error::Domain(format!("planted correspondence {t} is not a candidate")));
        }
        out.push(t);
    }
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::casefold;

    fn small() -> SynthConfig {
        SynthConfig {
            categories: 2,
            merchants: 5,
            attributes_per_category: 6,
            products_per_category: 30,
            ..Default::default()
        }
    }

    #[test]
    fn names_are_unambiguous() {
        let mut seen = BTreeSet::new();
        for kind in LIBRARY {
            assert!(seen.insert(casefold(kind.name)), "{}", kind.name);
        }
        for kind in LIBRARY {
            for s in kind.synonyms {
                assert!(seen.insert(casefold(s)), "{s}");
            }
        }
        for j in JUNK_NAMES {
            assert!(seen.insert(casefold(j)), "{j}");
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small(), 9).unwrap();
        let b = generate(&small(), 9).unwrap();
        assert_eq!(a.offers, b.offers);
        assert_eq!(a.matches, b.matches);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.pages(), b.pages());
        let c = generate(&small(), 10).unwrap();
        assert_ne!(a.offers, c.offers);
    }

    #[test]
    fn truth_is_cross_name_and_valid() {
        let s = generate(&small(), 1).unwrap();
        let corpus = s.corpus().unwrap();
        assert!(!s.truth.correspondences.is_empty());
        assert!(s.truth.correspondences.iter().all(|t| !t.is_name_identity()));
        assert_eq!(corpus.offers().len(), s.offers.len());
        let offered: BTreeSet<&str> = s.matches.iter().map(|m| m.product_id.as_str()).collect();
        let planted: BTreeSet<&str> = s.truth.products.iter().map(|p| p.id.as_str()).collect();
        assert!(offered.is_subset(&planted));
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let cases = [
            SynthConfig {
                synonym_pool_size: 9,
                ..small()
            },
            SynthConfig {
                attributes_per_category: 0,
                ..small()
            },
            SynthConfig {
                segments_per_merchant: 7,
                ..small()
            },
            SynthConfig {
                match_fraction: 1.5,
                ..small()
            },
        ];
        for c in cases {
            assert!(matches!(generate(&c, 0), Err(Error::InfeasibleConfig(_))));
        }
    }

    #[test]
    fn pages_carry_the_spec_table() {
        let s = generate(&small(), 3).unwrap();
        let (i, page) = s.pages().into_iter().next().expect("some page-only offer");
        let (name, value) = &s.offers[i].spec[0];
        assert!(page.contains(&escape(name)));
        assert!(page.contains(&escape(value)));
        assert!(s.feed_offers()[i].spec.is_empty());
    }

    #[test]
    fn page_text_is_escaped() {
        let offer = Offer::new("o", "M", "C", "A <b> & \"c\"").with_spec(alloc::vec![("W&H".into(), "1 < 2".into())]);
        let page = render_page(&offer, true);
        assert!(page.contains("A &lt;b&gt; &amp; &quot;c&quot;"));
        assert!(page.contains("W&amp;H:</td><td>1 &lt; 2"));
    }
}
