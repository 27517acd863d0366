//! Subcommands over the on-disk formats. Every input path defaults to a
//! file inside the output directory, so `generate`, `extract`, `learn`,
//! `synthesize` and `eval` chain with nothing but `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use prodsynth_core::distsim::{SelectionMode, FEATURE_NAMES};
use prodsynth_core::eval::{self, Method};
use prodsynth_core::matcher::{self, LearnConfig, LearnCounters, TrainConfig};
use prodsynth_core::pipeline::{self, SynthesisCounters};
use prodsynth_core::synth::{self, GroundTruth, SynthConfig};
use prodsynth_core::{Corpus, Offer};
use serde::{Deserialize, Serialize};

use crate::extract::{self, ExtractCounters};
use crate::io::{self, IoError, LoadReport};

pub const ENRICHED_OFFERS: &str = "offers.enriched.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "prodsynth",
    version,
    about = "Learn attribute correspondences between merchant offers and a product catalog, then synthesize products"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Append attribute-value pairs scraped from stored landing pages to the offers.
    Extract,
    /// Train the correspondence classifier and select correspondences.
    Learn,
    /// Reconcile, cluster and fuse offers into products.
    Synthesize,
    /// Score every method against the synthetic ground truth.
    Eval,
    /// Write a seeded synthetic corpus with its ground truth.
    Generate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Extract => "extract",
            Self::Learn => "learn",
            Self::Synthesize => "synthesize",
            Self::Eval => "eval",
            Self::Generate => "generate",
        }
    }
}

/// Command-line overrides of [`RunConfig`].
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON file holding RunConfig fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Abort on the first malformed input record instead of skipping it.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    #[arg(long, global = true)]
    pub offers: Option<PathBuf>,
    #[arg(long, global = true)]
    pub matches: Option<PathBuf>,
    /// Page store directory.
    #[arg(long, global = true)]
    pub pages: Option<PathBuf>,
    #[arg(long, global = true)]
    pub correspondences: Option<PathBuf>,
    #[arg(long, global = true)]
    pub products: Option<PathBuf>,
    #[arg(long, global = true)]
    pub truth: Option<PathBuf>,
    /// Generator knobs as JSON.
    #[arg(long, global = true)]
    pub synth_config: Option<PathBuf>,
    /// Keep every correspondence above θ, even several per offer attribute.
    #[arg(long, global = true)]
    pub no_conflict_resolution: bool,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Compute features over all products and offers, not only matched ones.
    #[arg(long, global = true)]
    pub unrestricted: bool,
    /// Comma-separated method labels to evaluate.
    #[arg(long, global = true, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Also write features.jsonl when learning.
    #[arg(long, global = true)]
    pub features: bool,
}

/// Everything a subcommand reads. Unset paths resolve inside `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    pub catalog: Option<PathBuf>,
    pub offers: Option<PathBuf>,
    pub matches: Option<PathBuf>,
    pub pages: Option<PathBuf>,
    pub correspondences: Option<PathBuf>,
    pub products: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub synth_config: Option<PathBuf>,
    pub theta: f64,
    pub resolve_conflicts: bool,
    pub lambda: f64,
    pub max_iters: usize,
    pub unrestricted: bool,
    pub methods: Vec<String>,
    pub features: bool,
    pub strict: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            out: PathBuf::from("out"),
            catalog: None,
            offers: None,
            matches: None,
            pages: None,
            correspondences: None,
            products: None,
            truth: None,
            synth_config: None,
            theta: LearnConfig::default().theta,
            resolve_conflicts: true,
            lambda: train.lambda,
            max_iters: train.max_iters,
            unrestricted: false,
            methods: Method::ALL.iter().map(|m| m.label().to_owned()).collect(),
            features: false,
            strict: false,
            seed: 42,
        }
    }
}

impl RunConfig {
    /// The config file (if any) with command-line flags layered on top.
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let mut c: RunConfig = match &flags.config {
            Some(path) => io::read_json(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &flags.$f { c.$f = v.clone().into(); })*};
        }
        set!(theta, seed, out, lambda, max_iters, methods);
        macro_rules! set_path {
            ($($f:ident),*) => {$(if flags.$f.is_some() { c.$f = flags.$f.clone(); })*};
        }
        set_path!(
            catalog,
            offers,
            matches,
            pages,
            correspondences,
            products,
            truth,
            synth_config
        );
        c.strict |= flags.strict;
        c.unrestricted |= flags.unrestricted;
        c.features |= flags.features;
        c.resolve_conflicts &= !flags.no_conflict_resolution;
        if !c.theta.is_finite() || !(0.0..=1.0).contains(&c.theta) {
            return Err(CliError::Usage(format!("theta must lie in [0, 1], got {}", c.theta)));
        }
        if !c.lambda.is_finite() || c.lambda < 0.0 {
            return Err(CliError::Usage(format!(
                "lambda must be non-negative, got {}",
                c.lambda
            )));
        }
        Ok(c)
    }

    fn or_out(&self, path: &Option<PathBuf>, default: &str) -> PathBuf {
        path.clone().unwrap_or_else(|| self.out.join(default))
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.or_out(&self.catalog, "catalog.jsonl")
    }

    /// Enriched offers when `extract` has run, the raw feed otherwise.
    pub fn offers_path(&self) -> PathBuf {
        self.offers.clone().unwrap_or_else(|| {
            let enriched = self.out.join(ENRICHED_OFFERS);
            if enriched.exists() {
                enriched
            } else {
                self.out.join("offers.jsonl")
            }
        })
    }

    pub fn matches_path(&self) -> PathBuf {
        self.or_out(&self.matches, "matches.jsonl")
    }

    pub fn pages_path(&self) -> PathBuf {
        self.or_out(&self.pages, "pages")
    }

    pub fn correspondences_path(&self) -> PathBuf {
        self.or_out(&self.correspondences, "correspondences.jsonl")
    }

    pub fn products_path(&self) -> PathBuf {
        self.or_out(&self.products, "products.jsonl")
    }

    pub fn truth_path(&self) -> PathBuf {
        self.or_out(&self.truth, "truth.json")
    }

    pub fn learn_config(&self) -> LearnConfig {
        LearnConfig {
            theta: self.theta,
            resolve_conflicts: self.resolve_conflicts,
            train: TrainConfig {
                lambda: self.lambda,
                max_iters: self.max_iters,
                ..TrainConfig::default()
            },
            mode: if self.unrestricted {
                SelectionMode::Unrestricted
            } else {
                SelectionMode::Matched
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl From<prodsynth_core::Error> for CliError {
    fn from(e: prodsynth_core::Error) -> Self {
        Self::Io(IoError::Core(e))
    }
}

impl CliError {
    /// 3 for data too degenerate to learn from, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(IoError::Core(prodsynth_core::Error::DegenerateTrainingSet { .. })) => 3,
            _ => 2,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn require(paths: &[&Path]) -> Result<()> {
    for p in paths {
        if !p.exists() {
            return Err(CliError::Usage(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(())
}

fn write_report<T: Serialize>(config: &RunConfig, command: Command, report: &T) -> Result<()> {
    io::write_json(&config.out.join(format!("{}.report.json", command.name())), report)?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = RunConfig::resolve(&cli.flags)?;
    fs::create_dir_all(&config.out).map_err(|source| IoError::Io {
        path: config.out.clone(),
        source,
    })?;
    match cli.command {
        Command::Extract => cmd_extract(&config),
        Command::Learn => cmd_learn(&config),
        Command::Synthesize => cmd_synthesize(&config),
        Command::Eval => cmd_eval(&config),
        Command::Generate => cmd_generate(&config),
    }
}

#[derive(Debug, Serialize)]
struct ExtractReport {
    offers_file: LoadReport,
    #[serde(flatten)]
    counters: ExtractCounters,
}

pub fn cmd_extract(config: &RunConfig) -> Result<()> {
    // Never read a previous run's output as input.
    let offers_path = config.or_out(&config.offers, "offers.jsonl");
    let pages = config.pages_path();
    require(&[&offers_path])?;
    if !pages.is_dir() {
        return Err(CliError::Usage(format!("{}: page store not found", pages.display())));
    }
    let (offers, load) = io::load_offers(&offers_path, config.strict)?;
    let (enriched, counters) = extract::enrich_offers(&offers, &pages, config.strict)?;
    io::write_offers(&config.out.join(ENRICHED_OFFERS), &enriched)?;
    info!(
        "extract: {} pairs from {} pages ({} missing)",
        counters.pairs_extracted, counters.pages_read, counters.pages_missing
    );
    write_report(
        config,
        Command::Extract,
        &ExtractReport {
            offers_file: load,
            counters,
        },
    )
}

#[derive(Debug, Serialize)]
struct CorpusLoad {
    catalog: LoadReport,
    offers: LoadReport,
    matches: LoadReport,
}

fn load_corpus(config: &RunConfig) -> Result<(Corpus, CorpusLoad)> {
    let (catalog_path, offers_path, matches_path) =
        (config.catalog_path(), config.offers_path(), config.matches_path());
    require(&[&catalog_path, &offers_path, &matches_path])?;
    let (catalog, catalog_load) = io::load_catalog(&catalog_path, config.strict)?;
    let (offers, offers_load) = io::load_offers(&offers_path, config.strict)?;
    let (corpus, matches_load) = io::load_corpus(catalog, offers, &matches_path, config.strict)?;
    Ok((
        corpus,
        CorpusLoad {
            catalog: catalog_load,
            offers: offers_load,
            matches: matches_load,
        },
    ))
}

#[derive(Debug, Serialize)]
struct LearnReport {
    load: CorpusLoad,
    theta: f64,
    mode: SelectionMode,
    resolve_conflicts: bool,
    iterations: usize,
    #[serde(flatten)]
    counters: LearnCounters,
}

#[derive(Debug, Serialize)]
struct FeatureLine<'a> {
    candidate: [&'a str; 4],
    #[serde(flatten)]
    values: serde_json::Map<String, serde_json::Value>,
}

pub fn cmd_learn(config: &RunConfig) -> Result<()> {
    let (corpus, load) = load_corpus(config)?;
    let learn_config = config.learn_config();
    let out = matcher::learn(&corpus, &learn_config)?;
    io::write_model(&config.out.join("model.json"), &out.model)?;
    io::write_correspondences(&config.correspondences_path(), &out.selected, None)?;
    if config.features {
        let lines = out.candidates.iter().zip(&out.features).map(|(c, f)| FeatureLine {
            candidate: [&c.catalog_attribute, &c.offer_attribute, &c.merchant, &c.category],
            values: FEATURE_NAMES
                .iter()
                .zip(f.values())
                .map(|(n, v)| ((*n).to_owned(), serde_json::json!(v)))
                .collect(),
        });
        io::write_lines(&config.out.join("features.jsonl"), lines)?;
    }
    info!(
        "learn: {} candidates, {} labeled ({} positive), {} selected",
        out.counters.candidates, out.counters.labeled, out.counters.positives, out.counters.selected
    );
    let report = LearnReport {
        load,
        theta: learn_config.theta,
        mode: learn_config.mode,
        resolve_conflicts: learn_config.resolve_conflicts,
        iterations: out.model.iterations,
        counters: out.counters,
    };
    write_report(config, Command::Learn, &report)
}

#[derive(Debug, Serialize)]
struct SynthesizeReport {
    catalog: LoadReport,
    offers: LoadReport,
    correspondences: LoadReport,
    #[serde(flatten)]
    counters: SynthesisCounters,
}

pub fn cmd_synthesize(config: &RunConfig) -> Result<()> {
    let (catalog_path, offers_path, corr_path) = (
        config.catalog_path(),
        config.offers_path(),
        config.correspondences_path(),
    );
    require(&[&catalog_path, &offers_path, &corr_path])?;
    let (catalog, catalog_load) = io::load_catalog(&catalog_path, config.strict)?;
    let (offers, offers_load) = io::load_offers(&offers_path, config.strict)?;
    let (correspondences, corr_load) = io::load_correspondences(&corr_path, config.strict)?;
    let (products, counters) = pipeline::synthesize(&offers, &correspondences, &catalog);
    io::write_products(&config.products_path(), &products)?;
    info!(
        "synthesize: {} products from {} offers ({} keyless)",
        counters.products, counters.offers_in, counters.keyless_offers_dropped
    );
    let report = SynthesizeReport {
        catalog: catalog_load,
        offers: offers_load,
        correspondences: corr_load,
        counters,
    };
    write_report(config, Command::Synthesize, &report)
}

#[derive(Debug, Serialize)]
struct MethodSummary {
    method: String,
    outputs: usize,
    coverage_at_0_9: usize,
}

#[derive(Debug, Serialize)]
struct EvalRunReport {
    load: CorpusLoad,
    planted_cross_name: usize,
    methods: Vec<MethodSummary>,
    products_scored: bool,
}

pub fn cmd_eval(config: &RunConfig) -> Result<()> {
    let methods = config
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods to evaluate".into()));
    }
    let truth_path = config.truth_path();
    require(&[&truth_path])?;
    let truth: GroundTruth = io::read_json(&truth_path)?;
    let (corpus, load) = load_corpus(config)?;
    let (mut report, outputs) = eval::evaluate(&corpus, &truth, &methods, &config.learn_config())?;
    for ((label, scored), curve) in outputs.iter().zip(&report.methods) {
        io::write_correspondences(
            &config.out.join("methods").join(format!("{label}.jsonl")),
            scored,
            Some(label),
        )?;
        write_curve(&config.out.join("curves").join(format!("{label}.csv")), curve)?;
    }
    let products_path = config.products_path();
    if products_path.exists() {
        let (products, _) = io::load_products(&products_path, config.strict)?;
        report.products = Some(eval::score_products(&products, &truth));
    }
    io::write_json(&config.out.join("report.json"), &report)?;
    let summary = EvalRunReport {
        load,
        planted_cross_name: report.planted_cross_name,
        methods: report
            .methods
            .iter()
            .zip(&outputs)
            .map(|(c, (_, scored))| MethodSummary {
                method: c.method.clone(),
                outputs: scored.len(),
                coverage_at_0_9: c.coverage(0.9),
            })
            .collect(),
        products_scored: report.products.is_some(),
    };
    for m in &summary.methods {
        info!("eval: {} covers {} at precision 0.9", m.method, m.coverage_at_0_9);
    }
    write_report(config, Command::Eval, &summary)
}

fn write_curve(path: &Path, curve: &eval::MethodCurve) -> Result<()> {
    let csv_err = |e: csv::Error| IoError::Record {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| IoError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["theta", "coverage", "precision"]).map_err(csv_err)?;
    for p in &curve.points {
        let precision = p.precision.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([p.theta.to_string(), p.coverage.to_string(), precision])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct GenerateReport {
    seed: u64,
    categories: usize,
    products: usize,
    offers: usize,
    feed_offers: usize,
    pages: usize,
    matches: usize,
    planted_cross_name: usize,
}

pub fn cmd_generate(config: &RunConfig) -> Result<()> {
    let synth_config: SynthConfig = match &config.synth_config {
        Some(path) => io::read_json(path)?,
        None => SynthConfig::default(),
    };
    let corpus = synth::generate(&synth_config, config.seed)?;
    let out = &config.out;
    io::write_catalog(&out.join("catalog.jsonl"), &corpus.catalog()?)?;
    io::write_offers(&out.join("offers.jsonl"), &corpus.feed_offers())?;
    io::write_matches(&out.join("matches.jsonl"), &corpus.matches)?;
    let pages = corpus.pages();
    let store: Vec<(&Offer, String)> = pages
        .iter()
        .map(|(i, html)| (&corpus.offers[*i], html.clone()))
        .collect();
    extract::write_page_store(&out.join("pages"), &store)?;
    io::write_json(&out.join("truth.json"), &corpus.truth)?;
    io::write_json(&out.join("synth_config.json"), &synth_config)?;
    // Stale enrichment from an earlier corpus would otherwise shadow the new feed.
    let stale = out.join(ENRICHED_OFFERS);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|source| IoError::Io { path: stale, source })?;
    }
    info!(
        "generate: {} offers ({} with pages), {} planted cross-name correspondences",
        corpus.offers.len(),
        pages.len(),
        corpus.truth.correspondences.len()
    );
    let report = GenerateReport {
        seed: config.seed,
        categories: corpus.schemas.len(),
        products: corpus.products.len(),
        offers: corpus.offers.len(),
        feed_offers: corpus.in_feed.iter().filter(|f| **f).count(),
        pages: pages.len(),
        matches: corpus.matches.len(),
        planted_cross_name: corpus.truth.correspondences.len(),
    };
    write_report(config, Command::Generate, &report)
}
