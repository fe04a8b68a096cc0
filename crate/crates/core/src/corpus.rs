//! Paper records, news articles, publication-date resolution and the
//! journal alias table.
//!
//! Records travel as JSON lines: one object per line. Text fields are
//! normalized on ingestion (Unicode NFC, whitespace collapsed) but keep
//! their case so acronyms such as "PNAS" survive for the extractor.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::CorpusError;

/// Collapses runs of whitespace to a single space, trims, and applies NFC.
pub fn normalize_text(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Comparison key used for alias deduplication and gazetteer lookup:
/// lowercase alphanumeric words separated by single spaces.
pub fn name_key(text: &str) -> String {
    let mut key = String::with_capacity(text.len());
    for word in text
        .nfc()
        .collect::<String>()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        if !key.is_empty() {
            key.push(' ');
        }
        key.extend(word.chars().flat_map(char::to_lowercase));
    }
    key
}

/// One publication date as recorded by the source database.
///
/// `placeholder` marks a date whose month and day were missing upstream and
/// were filled in as January 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PubDate {
    pub date: NaiveDate,
    #[serde(default)]
    pub placeholder: bool,
}

impl PubDate {
    pub fn exact(date: NaiveDate) -> Self {
        Self {
            date,
            placeholder: false,
        }
    }

    /// A year-only date, recorded as January 1 of `year`.
    pub fn year_only(year: i32) -> Self {
        Self {
            date: NaiveDate::from_ymd_opt(year, 1, 1).expect("January 1 exists in every year"),
            placeholder: true,
        }
    }

    fn validate(&self, field: &'static str) -> Result<(), CorpusError> {
        if self.placeholder && (self.date.month() != 1 || self.date.day() != 1) {
            return Err(CorpusError::Validation {
                field,
                reason: "placeholder dates must fall on January 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicationDates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal_pub: Option<PubDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pubmed_pub: Option<PubDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub online_pub: Option<PubDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted: Option<PubDate>,
}

impl PublicationDates {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, date) in [
            ("dates.journal_pub", self.journal_pub),
            ("dates.pubmed_pub", self.pubmed_pub),
            ("dates.online_pub", self.online_pub),
            ("dates.accepted", self.accepted),
        ] {
            if let Some(d) = date {
                d.validate(name)?;
            }
        }
        if self.journal_pub.is_none() && self.pubmed_pub.is_none() && self.online_pub.is_none() {
            return Err(CorpusError::Validation {
                field: "dates",
                reason: "at least one of journal_pub, pubmed_pub, online_pub is required".into(),
            });
        }
        Ok(())
    }
}

/// Resolves the date a paper first became publicly available.
///
/// The online date wins when present; otherwise the earlier of the journal and
/// PubMed dates. A result that precedes the accepted date is an upstream
/// artifact (typically a January 1 placeholder), so the accepted date is
/// returned instead.
pub fn resolve_earliest_date(dates: &PublicationDates) -> Result<NaiveDate, CorpusError> {
    let candidate = match dates.online_pub {
        Some(online) => Some(online.date),
        None => match (dates.journal_pub, dates.pubmed_pub) {
            (Some(j), Some(p)) => Some(j.date.min(p.date)),
            (Some(j), None) => Some(j.date),
            (None, Some(p)) => Some(p.date),
            (None, None) => None,
        },
    };
    let resolved = candidate.ok_or_else(|| CorpusError::Validation {
        field: "dates",
        reason: "no resolvable publication date".into(),
    })?;
    Ok(match dates.accepted {
        Some(accepted) if resolved < accepted.date => accepted.date,
        _ => resolved,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPaperRecord")]
pub struct PaperRecord {
    pub paper_id: String,
    pub doi: Option<String>,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub journal_name: String,
    pub journal_issn: Option<String>,
    pub journal_aliases: Vec<String>,
    pub authors: Vec<String>,
    pub affiliations: Vec<String>,
    pub dates: PublicationDates,
    pub earliest_date: NaiveDate,
}

/// Wire shape of a paper record. Required fields are optional here so the
/// validator can report them by name.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaperRecord {
    paper_id: Option<String>,
    #[serde(default)]
    doi: Option<String>,
    title: Option<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    journal_name: Option<String>,
    #[serde(default)]
    journal_issn: Option<String>,
    #[serde(default)]
    journal_aliases: Vec<String>,
    #[serde(default)]
    authors: Vec<String>,
    #[serde(default)]
    affiliations: Vec<String>,
    dates: Option<PublicationDates>,
    #[serde(default)]
    earliest_date: Option<NaiveDate>,
}

fn required(value: Option<String>, field: &'static str) -> Result<String, CorpusError> {
    match value.map(|v| normalize_text(&v)) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(CorpusError::MissingField(field)),
    }
}

fn optional(value: Option<String>) -> Option<String> {
    value.map(|v| normalize_text(&v)).filter(|v| !v.is_empty())
}

fn normalize_list(values: Vec<String>) -> Vec<String> {
    values
        .into_iter()
        .map(|v| normalize_text(&v))
        .filter(|v| !v.is_empty())
        .collect()
}

/// Deduplicates `aliases` by [`name_key`], dropping any alias equivalent to
/// `canonical`. First occurrence wins, order is preserved.
pub fn dedup_aliases(canonical: &str, aliases: impl IntoIterator<Item = String>) -> Vec<String> {
    let canonical_key = name_key(canonical);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for alias in aliases {
        let alias = normalize_text(&alias);
        let key = name_key(&alias);
        if key.is_empty() || key == canonical_key || !seen.insert(key) {
            continue;
        }
        out.push(alias);
    }
    out
}

impl TryFrom<RawPaperRecord> for PaperRecord {
    type Error = CorpusError;

    fn try_from(raw: RawPaperRecord) -> Result<Self, Self::Error> {
        Self::from_raw(raw)
    }
}

impl PaperRecord {
    /// Builds a validated record, normalizing text and resolving the
    /// earliest date.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        paper_id: impl Into<String>,
        doi: Option<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
        journal_name: impl Into<String>,
        journal_issn: Option<String>,
        journal_aliases: Vec<String>,
        authors: Vec<String>,
        affiliations: Vec<String>,
        dates: PublicationDates,
    ) -> Result<Self, CorpusError> {
        Self::from_raw(RawPaperRecord {
            paper_id: Some(paper_id.into()),
            doi,
            title: Some(title.into()),
            abstract_text: Some(abstract_text.into()),
            journal_name: Some(journal_name.into()),
            journal_issn,
            journal_aliases,
            authors,
            affiliations,
            dates: Some(dates),
            earliest_date: None,
        })
    }

    fn from_raw(raw: RawPaperRecord) -> Result<Self, CorpusError> {
        let paper_id = required(raw.paper_id, "paper_id")?;
        let title = required(raw.title, "title")?;
        let journal_name = required(raw.journal_name, "journal_name")?;
        let dates = raw.dates.ok_or(CorpusError::MissingField("dates"))?;
        dates.validate()?;
        let earliest_date = resolve_earliest_date(&dates)?;
        if let Some(stated) = raw.earliest_date {
            if stated != earliest_date {
                return Err(CorpusError::Validation {
                    field: "earliest_date",
                    reason: format!("stated {stated} but dates resolve to {earliest_date}"),
                });
            }
        }
        let journal_aliases = dedup_aliases(&journal_name, raw.journal_aliases);
        Ok(Self {
            paper_id,
            doi: optional(raw.doi),
            title,
            abstract_text: raw.abstract_text.map(|a| normalize_text(&a)).unwrap_or_default(),
            journal_name,
            journal_issn: optional(raw.journal_issn),
            journal_aliases,
            authors: normalize_list(raw.authors),
            affiliations: normalize_list(raw.affiliations),
            dates,
            earliest_date,
        })
    }

    /// Serializes the record as one JSON line (no trailing newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("paper records always serialize")
    }
}

/// Parses one JSON-lines paper record.
pub fn parse_paper_record(line: &str) -> Result<PaperRecord, CorpusError> {
    let raw: RawPaperRecord = parse_json(line)?;
    PaperRecord::from_raw(raw)
}

fn parse_json<T: serde::de::DeserializeOwned>(line: &str) -> Result<T, CorpusError> {
    let de = &mut serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        CorpusError::Parse {
            field: if path == "." { None } else { Some(path) },
            message: err.into_inner().to_string(),
        }
    })
}

fn read_lines<T>(
    path: &Path,
    mut parse: impl FnMut(&str) -> Result<T, CorpusError>,
) -> Result<Vec<T>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = parse(line).map_err(|source| CorpusError::AtLine {
            line: i + 1,
            source: Box::new(source),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Reads a JSON-lines paper file. Blank lines are skipped.
pub fn load_papers(path: impl AsRef<Path>) -> Result<Vec<PaperRecord>, CorpusError> {
    read_lines(path.as_ref(), parse_paper_record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewsArticle {
    pub news_id: String,
    pub source: String,
    pub title: String,
    pub body: String,
    pub release_date: NaiveDate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_paper_id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNewsArticle {
    news_id: Option<String>,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    title: Option<String>,
    body: Option<String>,
    release_date: Option<NaiveDate>,
    #[serde(default)]
    gold_paper_id: Option<String>,
}

impl NewsArticle {
    pub fn new(
        news_id: impl Into<String>,
        source: impl Into<String>,
        title: impl Into<String>,
        body: impl Into<String>,
        release_date: NaiveDate,
        gold_paper_id: Option<String>,
    ) -> Result<Self, CorpusError> {
        Self::from_raw(RawNewsArticle {
            news_id: Some(news_id.into()),
            source: Some(source.into()),
            title: Some(title.into()),
            body: Some(body.into()),
            release_date: Some(release_date),
            gold_paper_id,
        })
    }

    fn from_raw(raw: RawNewsArticle) -> Result<Self, CorpusError> {
        Ok(Self {
            news_id: required(raw.news_id, "news_id")?,
            source: raw.source.map(|s| normalize_text(&s)).unwrap_or_default(),
            title: raw.title.map(|s| normalize_text(&s)).unwrap_or_default(),
            body: required(raw.body, "body")?,
            release_date: raw
                .release_date
                .ok_or(CorpusError::MissingField("release_date"))?,
            gold_paper_id: optional(raw.gold_paper_id),
        })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("news articles always serialize")
    }
}

pub fn parse_news_article(line: &str) -> Result<NewsArticle, CorpusError> {
    let raw: RawNewsArticle = parse_json(line)?;
    NewsArticle::from_raw(raw)
}

pub fn load_news(path: impl AsRef<Path>) -> Result<Vec<NewsArticle>, CorpusError> {
    read_lines(path.as_ref(), parse_news_article)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasEntry {
    pub canonical_name: String,
    pub aliases: Vec<String>,
}

/// ISSN-keyed journal names and their alternative forms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JournalAliasTable {
    entries: BTreeMap<String, AliasEntry>,
    /// Name lists with no ISSN (supplemental gazetteer files).
    unkeyed: Vec<AliasEntry>,
}

impl JournalAliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry, merging alias lists when the ISSN is already present.
    /// A second, different canonical name for the same ISSN is kept as an alias.
    pub fn insert(&mut self, issn: &str, canonical_name: &str, aliases: Vec<String>) {
        let issn = issn.trim();
        let canonical_name = normalize_text(canonical_name);
        if issn.is_empty() {
            let aliases = dedup_aliases(&canonical_name, aliases);
            self.unkeyed.push(AliasEntry {
                canonical_name,
                aliases,
            });
            return;
        }
        match self.entries.get_mut(issn) {
            Some(entry) => {
                let merged = entry
                    .aliases
                    .drain(..)
                    .chain(std::iter::once(canonical_name))
                    .chain(aliases)
                    .collect::<Vec<_>>();
                entry.aliases = dedup_aliases(&entry.canonical_name, merged);
            }
            None => {
                let aliases = dedup_aliases(&canonical_name, aliases);
                self.entries.insert(
                    issn.to_string(),
                    AliasEntry {
                        canonical_name,
                        aliases,
                    },
                );
            }
        }
    }

    pub fn lookup(&self, issn: &str) -> Option<&AliasEntry> {
        self.entries.get(issn.trim())
    }

    /// Number of ISSN-keyed entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.unkeyed.is_empty()
    }

    /// Every entry, keyed ones in ISSN order followed by unkeyed ones.
    pub fn iter(&self) -> impl Iterator<Item = (Option<&str>, &AliasEntry)> {
        self.entries
            .iter()
            .map(|(k, v)| (Some(k.as_str()), v))
            .chain(self.unkeyed.iter().map(|v| (None, v)))
    }

    /// Serializes the table in the format read by [`JournalAliasTable::parse`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (issn, entry) in self.iter() {
            out.push_str(issn.unwrap_or(""));
            out.push('\t');
            out.push_str(&entry.canonical_name);
            for alias in &entry.aliases {
                out.push('\t');
                out.push_str(alias);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the tab-separated format: ISSN, canonical name, aliases...
    /// Blank lines and lines starting with `#` are ignored. When
    /// `allow_empty_issn` is false an empty ISSN column is an error.
    pub fn parse(text: &str, allow_empty_issn: bool) -> Result<Self, CorpusError> {
        let mut table = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| CorpusError::AliasLine {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut cols = line.split('\t');
            let issn = cols.next().unwrap_or_default().trim();
            let canonical = cols
                .next()
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .ok_or_else(|| malformed("expected ISSN<TAB>canonical name[<TAB>alias...]"))?;
            if issn.is_empty() && !allow_empty_issn {
                return Err(malformed("empty ISSN column"));
            }
            let aliases = cols
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(str::to_string)
                .collect();
            table.insert(issn, canonical, aliases);
        }
        Ok(table)
    }
}

pub fn load_alias_table(path: impl AsRef<Path>) -> Result<JournalAliasTable, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    JournalAliasTable::parse(&text, false)
}

/// Returns `record` with the table's names for its ISSN merged into
/// `journal_aliases`. The table's canonical name becomes an alias when it
/// differs from the record's own journal name.
pub fn expand_journal_aliases(mut record: PaperRecord, table: &JournalAliasTable) -> PaperRecord {
    let Some(entry) = record.journal_issn.as_deref().and_then(|issn| table.lookup(issn)) else {
        return record;
    };
    let merged = record
        .journal_aliases
        .drain(..)
        .chain(std::iter::once(entry.canonical_name.clone()))
        .chain(entry.aliases.iter().cloned())
        .collect::<Vec<_>>();
    record.journal_aliases = dedup_aliases(&record.journal_name, merged);
    record
}
