//! Per-field inverted index over paper records.
//!
//! Documents are stored sorted by `paper_id`, so internal document numbers,
//! postings order and every statistic are independent of input order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::error::IndexError;

/// Snapshot schema version written by [`Index::save`].
pub const SNAPSHOT_VERSION: u32 = 1;
const SNAPSHOT_FORMAT: &str = "paperlink-index";

/// Lowercased alphanumeric runs of `text`, in order.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text).map(|(_, tok)| tok).collect()
}

/// Tokens of `text` together with their byte ranges in the original string.
pub fn token_spans(text: &str) -> impl Iterator<Item = (Range<usize>, String)> + '_ {
    let mut chars = text.char_indices().peekable();
    std::iter::from_fn(move || {
        while let Some(&(_, c)) = chars.peek() {
            if c.is_alphanumeric() {
                break;
            }
            chars.next();
        }
        let (start, _) = *chars.peek()?;
        let mut end = start;
        let mut token = String::new();
        while let Some(&(i, c)) = chars.peek() {
            if !c.is_alphanumeric() {
                break;
            }
            token.extend(c.to_lowercase());
            end = i + c.len_utf8();
            chars.next();
        }
        Some((start..end, token))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Authors,
    Journal,
    Affiliations,
    Title,
    Abstract,
    Content,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Authors,
        Field::Journal,
        Field::Affiliations,
        Field::Title,
        Field::Abstract,
        Field::Content,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Authors => "authors",
            Field::Journal => "journal",
            Field::Affiliations => "affiliations",
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Content => "content",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    /// Text pieces of `record` that make up this field.
    pub fn parts(self, record: &PaperRecord) -> Vec<&str> {
        let journal = || {
            std::iter::once(record.journal_name.as_str())
                .chain(record.journal_aliases.iter().map(String::as_str))
        };
        match self {
            Field::Authors => record.authors.iter().map(String::as_str).collect(),
            Field::Journal => journal().collect(),
            Field::Affiliations => record.affiliations.iter().map(String::as_str).collect(),
            Field::Title => vec![record.title.as_str()],
            Field::Abstract => vec![record.abstract_text.as_str()],
            Field::Content => std::iter::once(record.title.as_str())
                .chain(record.authors.iter().map(String::as_str))
                .chain(record.affiliations.iter().map(String::as_str))
                .chain(journal())
                .chain(std::iter::once(record.abstract_text.as_str()))
                .collect(),
        }
    }

    /// All tokens of this field for `record`.
    pub fn tokens(self, record: &PaperRecord) -> Vec<String> {
        self.parts(record).into_iter().flat_map(tokenize).collect()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown field `{s}`"))
    }
}

/// Internal document number: position in the `paper_id`-sorted record list.
pub type DocId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: DocId,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    /// Every document in the corpus, used as N in IDF.
    pub doc_count: u32,
    /// Mean length over documents with a nonempty field; 0 when none.
    pub avgdl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FieldIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avgdl: f64,
}

impl FieldIndex {
    fn build(field: Field, records: &[PaperRecord]) -> Self {
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(records.len());
        let mut counts: HashMap<String, u32> = HashMap::new();
        for (doc, record) in records.iter().enumerate() {
            counts.clear();
            let mut len = 0u32;
            for tok in field.tokens(record) {
                len += 1;
                *counts.entry(tok).or_insert(0) += 1;
            }
            doc_lengths.push(len);
            for (term, tf) in counts.drain() {
                postings.entry(term).or_default().push(Posting {
                    doc: doc as DocId,
                    tf,
                });
            }
        }
        let (total, nonempty) = doc_lengths
            .iter()
            .filter(|&&l| l > 0)
            .fold((0u64, 0u64), |(t, n), &l| (t + u64::from(l), n + 1));
        let avgdl = if nonempty == 0 {
            0.0
        } else {
            total as f64 / nonempty as f64
        };
        Self {
            postings,
            doc_lengths,
            avgdl,
        }
    }
}

/// Immutable inverted index; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    records: Vec<PaperRecord>,
    by_id: HashMap<String, DocId>,
    fields: Vec<FieldIndex>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    version: u32,
    records: Vec<PaperRecord>,
    fields: BTreeMap<Field, FieldIndex>,
}

impl Index {
    /// Builds the index. Records should already have their aliases expanded.
    pub fn build(records: impl IntoIterator<Item = PaperRecord>) -> Result<Self, IndexError> {
        let mut records: Vec<PaperRecord> = records.into_iter().collect();
        records.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        if let Some(w) = records.windows(2).find(|w| w[0].paper_id == w[1].paper_id) {
            return Err(IndexError::DuplicatePaperId(w[0].paper_id.clone()));
        }
        let fields = Field::ALL
            .iter()
            .map(|&f| FieldIndex::build(f, &records))
            .collect();
        Ok(Self::assemble(records, fields))
    }

    fn assemble(records: Vec<PaperRecord>, fields: Vec<FieldIndex>) -> Self {
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.paper_id.clone(), i as DocId))
            .collect();
        Self {
            records,
            by_id,
            fields,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[PaperRecord] {
        &self.records
    }

    pub fn record(&self, doc: DocId) -> &PaperRecord {
        &self.records[doc as usize]
    }

    pub fn doc_id(&self, paper_id: &str) -> Option<DocId> {
        self.by_id.get(paper_id).copied()
    }

    pub fn get(&self, paper_id: &str) -> Option<&PaperRecord> {
        self.doc_id(paper_id).map(|d| self.record(d))
    }

    pub fn earliest_date(&self, doc: DocId) -> NaiveDate {
        self.records[doc as usize].earliest_date
    }

    fn field(&self, field: Field) -> &FieldIndex {
        &self.fields[field.slot()]
    }

    /// Raw postings in ascending document order.
    pub fn postings_raw(&self, field: Field, term: &str) -> &[Posting] {
        self.field(field)
            .postings
            .get(term)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Postings as `(paper_id, term_frequency)`, ascending by `paper_id`.
    pub fn postings(&self, field: Field, term: &str) -> Vec<(&str, u32)> {
        self.postings_raw(field, term)
            .iter()
            .map(|p| (self.record(p.doc).paper_id.as_str(), p.tf))
            .collect()
    }

    pub fn doc_freq(&self, field: Field, term: &str) -> u32 {
        self.postings_raw(field, term).len() as u32
    }

    pub fn doc_length(&self, field: Field, doc: DocId) -> u32 {
        self.field(field).doc_lengths[doc as usize]
    }

    pub fn field_stats(&self, field: Field) -> FieldStats {
        FieldStats {
            doc_count: self.records.len() as u32,
            avgdl: self.field(field).avgdl,
        }
    }

    /// Distinct terms indexed in `field`, in lexicographic order.
    pub fn terms(&self, field: Field) -> impl Iterator<Item = &str> {
        self.field(field).postings.keys().map(String::as_str)
    }

    /// Writes a versioned JSON snapshot.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let snapshot = Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            records: self.records.clone(),
            fields: Field::ALL
                .iter()
                .map(|&f| (f, self.field(f).clone()))
                .collect(),
        };
        let mut out = BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer(&mut out, &snapshot)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IndexError> {
        let reader = BufReader::new(fs::File::open(path)?);
        let snapshot: Snapshot = serde_json::from_reader(reader)?;
        if snapshot.format != SNAPSHOT_FORMAT {
            return Err(IndexError::SnapshotCorrupt(format!(
                "unexpected format tag `{}`",
                snapshot.format
            )));
        }
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(IndexError::SnapshotVersion {
                found: snapshot.version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let Snapshot {
            records,
            mut fields,
            ..
        } = snapshot;
        if records.windows(2).any(|w| w[0].paper_id >= w[1].paper_id) {
            return Err(IndexError::SnapshotCorrupt(
                "records not strictly sorted by paper_id".into(),
            ));
        }
        let mut ordered = Vec::with_capacity(Field::ALL.len());
        for f in Field::ALL {
            let fi = fields
                .remove(&f)
                .ok_or_else(|| IndexError::SnapshotCorrupt(format!("missing field `{f}`")))?;
            if fi.doc_lengths.len() != records.len() {
                return Err(IndexError::SnapshotCorrupt(format!(
                    "field `{f}` has {} lengths for {} records",
                    fi.doc_lengths.len(),
                    records.len()
                )));
            }
            let in_range = fi
                .postings
                .values()
                .flatten()
                .all(|p| (p.doc as usize) < records.len() && p.tf > 0);
            if !in_range {
                return Err(IndexError::SnapshotCorrupt(format!(
                    "field `{f}` has out-of-range postings"
                )));
            }
            ordered.push(fi);
        }
        Ok(Self::assemble(records, ordered))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PubDate, PublicationDates};

    pub(crate) fn record(id: &str, title: &str, journal: &str, authors: &[&str]) -> PaperRecord {
        PaperRecord::new(
            id,
            None,
            title,
            "",
            journal,
            None,
            vec![],
            authors.iter().map(|s| s.to_string()).collect(),
            vec![],
            PublicationDates {
                online_pub: Some(PubDate::exact("2020-01-10".parse().unwrap())),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("The BMJ"), vec!["the", "bmj"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Proc Natl Acad Sci"), vec!["proc", "natl", "acad", "sci"]);
        assert_eq!(tokenize("COVID-19, (n=12)"), vec!["covid", "19", "n", "12"]);
        assert_eq!(tokenize("Zürich Étude"), vec!["zürich", "étude"]);
    }

    #[test]
    fn token_spans_point_into_source() {
        let text = "Hi, Zürich-19!";
        for (span, tok) in token_spans(text) {
            assert_eq!(text[span].to_lowercase(), tok);
        }
    }

    #[test]
    fn disjoint_vocabularies() {
        let idx = Index::build(vec![
            record("1", "alpha beta", "Gamma", &[]),
            record("2", "delta epsilon", "Zeta", &[]),
        ])
        .unwrap();
        for term in idx.terms(Field::Title) {
            assert_eq!(idx.postings(Field::Title, term).len(), 1);
        }
    }

    #[test]
    fn thirteen_author_lengths() {
        // 13 names: 12 two-token names plus one three-token name = 27 tokens.
        let mut names: Vec<String> = (0..12).map(|i| format!("Author{i} Surname{i}")).collect();
        names.push("Mary Ann Jones".into());
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let idx = Index::build(vec![record("1", "t", "J", &refs)]).unwrap();
        assert_eq!(idx.doc_length(Field::Authors, 0), 27);
    }

    #[test]
    fn shared_alias_lists_both() {
        let mut a = record("1", "t", "Journal A", &[]);
        a.journal_aliases = vec!["Shared Alias".into()];
        let mut b = record("2", "t", "Journal B", &[]);
        b.journal_aliases = vec!["Shared Alias".into()];
        let idx = Index::build(vec![a, b]).unwrap();
        assert_eq!(idx.postings(Field::Journal, "shared"), vec![("1", 1), ("2", 1)]);
    }

    #[test]
    fn postings_examples() {
        let mut a = record("b", "x", "J", &[]);
        a.abstract_text = "cell cell growth".into();
        let idx = Index::build(vec![a, record("a", "x", "J", &[]), record("c", "x", "J", &[])]).unwrap();
        assert!(idx.postings(Field::Abstract, "unseen").is_empty());
        assert_eq!(idx.postings(Field::Abstract, "cell"), vec![("b", 2)]);
        assert_eq!(idx.postings(Field::Title, "x"), vec![("a", 1), ("b", 1), ("c", 1)]);
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = Index::build(vec![record("1", "a", "J", &[]), record("1", "b", "J", &[])]).unwrap_err();
        assert!(matches!(err, IndexError::DuplicatePaperId(id) if id == "1"));
    }

    #[test]
    fn field_stats_examples() {
        let idx = Index::build(vec![
            record("1", "a b c d", "J", &[]),
            record("2", "a b c d e f", "J", &[]),
        ])
        .unwrap();
        let s = idx.field_stats(Field::Title);
        assert_eq!((s.doc_count, s.avgdl), (2, 5.0));
        let s = idx.field_stats(Field::Abstract);
        assert_eq!((s.doc_count, s.avgdl), (2, 0.0));
        let idx = Index::build(vec![record("1", "a b c d e f g", "J", &[])]).unwrap();
        assert_eq!(idx.field_stats(Field::Title).avgdl, 7.0);
    }

    #[test]
    fn empty_field_excluded_from_avgdl() {
        let mut a = record("1", "t", "J", &[]);
        a.abstract_text = "one two three four".into();
        let idx = Index::build(vec![a, record("2", "t", "J", &[])]).unwrap();
        assert_eq!(idx.field_stats(Field::Abstract).avgdl, 4.0);
    }

    #[test]
    fn snapshot_round_trip() {
        let idx = Index::build(vec![
            record("2", "heart failure", "Circulation", &["Jane Doe"]),
            record("1", "lung cancer", "Thorax", &["John Roe"]),
        ])
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.json");
        idx.save(&path).unwrap();
        assert_eq!(Index::load(&path).unwrap(), idx);
    }

    #[test]
    fn snapshot_version_checked() {
        let idx = Index::build(vec![record("1", "a", "J", &[])]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.json");
        idx.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("\"version\":1", "\"version\":99");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            Index::load(&path),
            Err(IndexError::SnapshotVersion { found: 99, .. })
        ));
    }
}
