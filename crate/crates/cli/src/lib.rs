//! Command-line front end for `paperlink`: index a corpus, link single
//! articles, serve links over HTTP, evaluate, grid-search, and generate the
//! synthetic benchmark.

pub mod service;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use paperlink::corpus::{expand_journal_aliases, load_alias_table, load_news, load_papers};
use paperlink::eval::{AblationSpec, Backend, Dataset, Evaluator, WeightGrid, DEFAULT_KS};
use paperlink::synth::{generate, SynthConfig, DEFAULT_SEED};
use paperlink::{
    Field, Index, JournalAliasTable, LinkError, LinkRequest, LinkResponse, Linker, PaperRecord, SearchConfig,
    SubqueryKind,
};

/// Prefix of the environment variables that mirror every flag.
pub const ENV_PREFIX: &str = "PAPERLINK_";

#[derive(Debug, Parser)]
#[command(name = "paperlink", version, about = "Link news articles to the research papers they report on")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index snapshot from a paper file and an optional alias table.
    Index(IndexArgs),
    /// Link one article against a snapshot.
    Link(LinkArgs),
    /// Serve `POST /link` over HTTP.
    Serve(ServeArgs),
    /// Run an ablation over a paired news/paper dataset.
    Evaluate(EvaluateArgs),
    /// Grid-search subquery weights for top-1 accuracy.
    Gridsearch(GridArgs),
    /// Write the seeded synthetic benchmark.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Paper records, one JSON object per line.
    #[arg(long, env = "PAPERLINK_PAPERS")]
    pub papers: PathBuf,
    /// Journal alias table (TSV: issn, canonical name, aliases...).
    #[arg(long, env = "PAPERLINK_ALIASES")]
    pub aliases: Option<PathBuf>,
    /// Where to write the snapshot.
    #[arg(long, env = "PAPERLINK_SNAPSHOT")]
    pub snapshot: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Search configuration (TOML); defaults apply to absent keys.
    #[arg(long, env = "PAPERLINK_CONFIG")]
    pub config: Option<PathBuf>,
    /// Number of hits to return; overrides the config.
    #[arg(long, env = "PAPERLINK_TOP_K")]
    pub top_k: Option<usize>,
    /// Minimum final score; overrides the config.
    #[arg(long, env = "PAPERLINK_THRESHOLD")]
    pub threshold: Option<f64>,
}

impl SearchArgs {
    pub fn load(&self) -> Result<SearchConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => SearchConfig::load(path).input_err()?,
            None => SearchConfig::default(),
        };
        if let Some(k) = self.top_k {
            cfg.top_k = k;
        }
        if let Some(t) = self.threshold {
            cfg.min_score_threshold = t;
        }
        cfg.validate().map_err(|e| Failure::Input(anyhow!("invalid search configuration: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Index snapshot written by `paperlink index`.
    #[arg(long, env = "PAPERLINK_SNAPSHOT")]
    pub snapshot: PathBuf,
    /// Supplemental journal gazetteer (alias-table format; ISSN may be empty).
    #[arg(long, env = "PAPERLINK_ALIASES")]
    pub aliases: Option<PathBuf>,
    #[arg(long, env = "PAPERLINK_BACKEND", default_value = "main")]
    pub backend: Backend,
    /// Subquery kinds used when a request names none, e.g. `au,jo,ti`.
    #[arg(long, env = "PAPERLINK_KINDS", value_parser = SubqueryKind::parse_set)]
    pub kinds: Option<BTreeSet<SubqueryKind>>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, env = "PAPERLINK_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Article as a JSON link request (`title`, `body`, `release_date`, ...).
    #[arg(conflicts_with_all = ["title", "body", "date"])]
    pub article: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, requires = "date")]
    pub body: Option<String>,
    /// Release date of the inline article (YYYY-MM-DD).
    #[arg(long, requires = "body")]
    pub date: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, env = "PAPERLINK_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "PAPERLINK_PORT", default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Paper records, one JSON object per line.
    #[arg(long, env = "PAPERLINK_PAPERS")]
    pub papers: PathBuf,
    /// Journal alias table; without it alias expansion has no effect.
    #[arg(long, env = "PAPERLINK_ALIASES")]
    pub aliases: Option<PathBuf>,
    /// News articles with `gold_paper_id`, one JSON object per line.
    #[arg(long, env = "PAPERLINK_NEWS")]
    pub news: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Where to write the JSON report.
    #[arg(long, env = "PAPERLINK_REPORT")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// `features`, `metadata`, `backends`, or a TOML file of rows.
    #[arg(long, env = "PAPERLINK_SPEC", default_value = "features")]
    pub spec: String,
    /// Cutoffs for top-k accuracy.
    #[arg(long, env = "PAPERLINK_KS", value_delimiter = ',', default_values_t = DEFAULT_KS)]
    pub ks: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Weight grid (TOML with `au`, `jo`, `af`, `ti`, `co` arrays); a
    /// default grid is used when absent.
    #[arg(long, env = "PAPERLINK_GRID")]
    pub grid: Option<PathBuf>,
    #[arg(long, env = "PAPERLINK_KINDS", value_parser = SubqueryKind::parse_set, default_value = "au,jo,af,ti,co")]
    pub kinds: BTreeSet<SubqueryKind>,
    /// Search the unexpanded index.
    #[arg(long, env = "PAPERLINK_NO_ALIAS_EXPANSION")]
    pub no_alias_expansion: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, env = "PAPERLINK_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory for papers.jsonl, aliases.tsv and news.jsonl.
    #[arg(long, env = "PAPERLINK_OUT")]
    pub out: PathBuf,
}

/// A failed command, classified for the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad input files, flags or requests: exit 1.
    Input(anyhow::Error),
    /// Anything else: exit 2.
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Internal(e) => e,
        }
    }
}

impl From<LinkError> for Failure {
    fn from(e: LinkError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.into())
        } else {
            Failure::Internal(e.into())
        }
    }
}

trait Classify<T> {
    fn input_err(self) -> Result<T, Failure>;
    fn internal_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn internal_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

/// A linker plus the request defaults set on the command line. The CLI and
/// the service both answer through [`Engine::answer`], so their output is
/// identical for identical requests.
pub struct Engine {
    linker: Linker,
    backend: Backend,
    kinds: Option<BTreeSet<SubqueryKind>>,
}

impl Engine {
    pub fn new(linker: Linker, backend: Backend, kinds: Option<BTreeSet<SubqueryKind>>) -> Self {
        Self { linker, backend, kinds }
    }

    pub fn load(args: &EngineArgs) -> Result<Self, Failure> {
        let cfg = args.search.load()?;
        let index = Index::load(&args.snapshot)
            .with_context(|| format!("cannot load snapshot {}", args.snapshot.display()))
            .input_err()?;
        let gazetteer = args.aliases.as_deref().map(load_gazetteer).transpose()?;
        let linker = Linker::new(index, gazetteer.as_ref(), cfg).input_err()?;
        Ok(Self::new(linker, args.backend, args.kinds.clone()))
    }

    pub fn answer(&self, mut req: LinkRequest) -> Result<LinkResponse, LinkError> {
        if req.enabled_kinds.is_none() {
            req.enabled_kinds = self.kinds.clone();
        }
        self.linker.link(&req, self.backend)
    }
}

fn load_gazetteer(path: &Path) -> Result<JournalAliasTable, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .input_err()?;
    JournalAliasTable::parse(&text, true)
        .with_context(|| format!("in {}", path.display()))
        .input_err()
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Index(args) => cmd_index(&args),
        Command::Link(args) => cmd_link(&args),
        Command::Serve(args) => cmd_serve(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Gridsearch(args) => cmd_gridsearch(&args),
        Command::Generate(args) => cmd_generate(&args),
    }
}

/// Loads the alias table, or warns and returns `None` when it is absent.
fn optional_aliases(path: Option<&Path>) -> Result<Option<JournalAliasTable>, Failure> {
    match path {
        None => {
            warn!("no alias table given; journal aliases will not be expanded");
            Ok(None)
        }
        Some(p) if !p.exists() => {
            warn!("alias table {} not found; journal aliases will not be expanded", p.display());
            Ok(None)
        }
        Some(p) => load_alias_table(p)
            .with_context(|| format!("in {}", p.display()))
            .map(Some)
            .input_err(),
    }
}

fn read_papers(path: &Path) -> Result<Vec<PaperRecord>, Failure> {
    load_papers(path)
        .with_context(|| format!("in {}", path.display()))
        .input_err()
}

/// Per-field corpus statistics: documents with a nonempty field and their
/// mean length.
pub fn corpus_stats(index: &Index) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "papers: {}", index.len());
    for field in Field::ALL {
        let nonempty = (0..index.len() as u32).filter(|&d| index.doc_length(field, d) > 0).count();
        let stats = index.field_stats(field);
        let _ = writeln!(out, "{:<13} N {:>8}  avgdl {:>9.3}", field.as_str(), nonempty, stats.avgdl);
    }
    out
}

fn cmd_index(args: &IndexArgs) -> Result<(), Failure> {
    let papers = read_papers(&args.papers)?;
    let table = optional_aliases(args.aliases.as_deref())?;
    let records: Vec<PaperRecord> = match &table {
        Some(t) => papers.into_iter().map(|r| expand_journal_aliases(r, t)).collect(),
        None => papers,
    };
    let index = Index::build(records).input_err()?;
    index
        .save(&args.snapshot)
        .with_context(|| format!("cannot write snapshot {}", args.snapshot.display()))
        .input_err()?;
    info!("snapshot written to {}", args.snapshot.display());
    print!("{}", corpus_stats(&index));
    Ok(())
}

fn link_request(args: &LinkArgs) -> Result<LinkRequest, Failure> {
    match (&args.article, &args.body, args.date) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .input_err()?;
            Ok(LinkRequest::from_json(&text)?)
        }
        (None, Some(body), Some(date)) => {
            let req = LinkRequest::new(args.title.clone().unwrap_or_default(), body.clone(), date);
            req.validate()?;
            Ok(req)
        }
        _ => Err(Failure::Input(anyhow!("give an article file or --body and --date"))),
    }
}

fn cmd_link(args: &LinkArgs) -> Result<(), Failure> {
    let req = link_request(args)?;
    let engine = Engine::load(&args.engine)?;
    let resp = engine.answer(req)?;
    match args.format {
        Format::Text => print!("{}", resp.to_text()),
        Format::Machine => print!("{}", resp.to_machine()),
    }
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> Result<(), Failure> {
    let engine = Arc::new(Engine::load(&args.engine)?);
    let runtime = tokio::runtime::Runtime::new().internal_err()?;
    runtime.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))
            .internal_err()?;
        info!("serving POST /link on {addr} with the {} backend", args.engine.backend);
        axum::serve(listener, service::router(engine)).await.internal_err()
    })
}

fn load_dataset(args: &DatasetArgs) -> Result<Dataset, Failure> {
    let papers = read_papers(&args.papers)?;
    let aliases = optional_aliases(args.aliases.as_deref())?.unwrap_or_default();
    let news = load_news(&args.news)
        .with_context(|| format!("in {}", args.news.display()))
        .input_err()?;
    Ok(Dataset { papers, aliases, news })
}

fn write_report(path: Option<&Path>, json: &str) -> Result<(), Failure> {
    if let Some(path) = path {
        fs::write(path, format!("{json}\n"))
            .with_context(|| format!("cannot write report {}", path.display()))
            .input_err()?;
        info!("report written to {}", path.display());
    }
    Ok(())
}

fn ablation_spec(spec: &str) -> Result<AblationSpec, Failure> {
    match spec {
        "features" => Ok(AblationSpec::features()),
        "metadata" => Ok(AblationSpec::metadata()),
        "backends" => Ok(AblationSpec::backends()),
        path => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read ablation spec {path}"))
                .input_err()?;
            toml::from_str(&text)
                .with_context(|| format!("in ablation spec {path}"))
                .input_err()
        }
    }
}

fn evaluator(data: &Dataset) -> Result<Evaluator, Failure> {
    let ev = Evaluator::new(data).input_err()?;
    if ev.articles().next().is_none() {
        return Err(Failure::Input(anyhow!("no article has a gold paper in the corpus")));
    }
    Ok(ev)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let spec = ablation_spec(&args.spec)?;
    let base = args.data.search.load()?;
    let data = load_dataset(&args.data)?;
    let ev = evaluator(&data)?.with_ks(&args.ks);
    let report = ev.run_ablation(&spec, &base).map_err(|e| Failure::Input(anyhow!(e)))?;
    print!("{}", report.to_table());
    write_report(args.data.report.as_deref(), &report.to_json())
}

fn cmd_gridsearch(args: &GridArgs) -> Result<(), Failure> {
    let grid = match &args.grid {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read grid {}", path.display()))
                .input_err()?;
            WeightGrid::from_toml(&text)
                .map_err(|e| Failure::Input(anyhow!("in grid {}: {e}", path.display())))?
        }
        None => WeightGrid::default(),
    };
    let base = args.data.search.load()?;
    let data = load_dataset(&args.data)?;
    let ev = evaluator(&data)?;
    let report = ev
        .grid_search_weights(&args.kinds, &base, !args.no_alias_expansion, &grid)
        .map_err(|e| Failure::Input(anyhow!(e)))?;
    let w = report.best_weights;
    println!(
        "best top-1 {:.3} over {} articles at au {} jo {} af {} ti {} co {} ({} grid points)",
        report.best_top1,
        report.n,
        w.au,
        w.jo,
        w.af,
        w.ti,
        w.co,
        report.points.len()
    );
    let json = serde_json::to_string_pretty(&report).internal_err()?;
    write_report(args.data.report.as_deref(), &json)
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    let synth = generate(&SynthConfig::with_seed(args.seed));
    let data = &synth.dataset;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))
        .input_err()?;
    let lines = |items: Vec<String>| items.into_iter().map(|l| l + "\n").collect::<String>();
    let files = [
        ("papers.jsonl", lines(data.papers.iter().map(PaperRecord::to_line).collect())),
        ("aliases.tsv", data.aliases.to_tsv()),
        ("news.jsonl", lines(data.news.iter().map(|n| n.to_line()).collect())),
    ];
    for (name, text) in files {
        let path = args.out.join(name);
        fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .input_err()?;
    }
    println!(
        "wrote {} papers, {} alias entries and {} articles to {} (seed {})",
        data.papers.len(),
        data.aliases.len(),
        data.news.len(),
        args.out.display(),
        args.seed
    );
    Ok(())
}
