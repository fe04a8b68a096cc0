use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("malformed record{}: {message}", field.as_ref().map(|f| format!(" at field `{f}`")).unwrap_or_default())]
    Parse {
        field: Option<String>,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },
    #[error("alias table line {line}: {reason}")]
    AliasLine { line: usize, reason: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate paper_id `{0}`")]
    DuplicatePaperId(String),
    #[error("unknown paper_id `{0}`")]
    UnknownPaper(String),
    #[error("unsupported snapshot version {found} (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },
    #[error("snapshot is inconsistent: {0}")]
    SnapshotCorrupt(String),
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot format: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("query has no nonempty subquery")]
    EmptyQuery,
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("invalid `{field}`: {message}")]
    InvalidRequest { field: String, message: String },
    #[error("no extractable metadata")]
    NoMetadata,
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl LinkError {
    /// True when the caller, not the engine, is at fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, LinkError::Search(SearchError::Index(_)))
    }
}
