//! Weighted multi-field BM25 with multiplicative date decay.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::error::{ConfigError, IndexError, SearchError};
use crate::index::{tokenize, DocId, Field, Index};

/// The five subquery sources of a news-derived query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubqueryKind {
    Au,
    Jo,
    Af,
    Ti,
    Co,
}

impl SubqueryKind {
    pub const ALL: [SubqueryKind; 5] = [
        SubqueryKind::Au,
        SubqueryKind::Jo,
        SubqueryKind::Af,
        SubqueryKind::Ti,
        SubqueryKind::Co,
    ];

    /// The index field this subquery is matched against.
    pub fn field(self) -> Field {
        match self {
            SubqueryKind::Au => Field::Authors,
            SubqueryKind::Jo => Field::Journal,
            SubqueryKind::Af => Field::Affiliations,
            SubqueryKind::Ti => Field::Title,
            SubqueryKind::Co => Field::Content,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubqueryKind::Au => "au",
            SubqueryKind::Jo => "jo",
            SubqueryKind::Af => "af",
            SubqueryKind::Ti => "ti",
            SubqueryKind::Co => "co",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    /// Parses a comma-separated kind list such as `au,jo,co`.
    pub fn parse_set(s: &str) -> Result<BTreeSet<SubqueryKind>, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }

    /// Label in the `AuJoAf` style used for ablation rows.
    pub fn label(kinds: &BTreeSet<SubqueryKind>) -> String {
        kinds
            .iter()
            .map(|k| {
                let s = k.as_str();
                let mut c = s.chars();
                let first = c.next().unwrap().to_ascii_uppercase();
                format!("{first}{}", c.as_str())
            })
            .collect()
    }
}

impl fmt::Display for SubqueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubqueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubqueryKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown subquery kind `{s}` (expected au, jo, af, ti, co)"))
    }
}

/// One real value per subquery kind. Used for weights and score breakdowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerKind {
    pub au: f64,
    pub jo: f64,
    pub af: f64,
    pub ti: f64,
    pub co: f64,
}

pub type Weights = PerKind;
pub type FieldScores = PerKind;

impl PerKind {
    pub const ZERO: PerKind = PerKind::uniform(0.0);

    pub const fn uniform(v: f64) -> Self {
        Self {
            au: v,
            jo: v,
            af: v,
            ti: v,
            co: v,
        }
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            au: a[0],
            jo: a[1],
            af: a[2],
            ti: a[3],
            co: a[4],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.au, self.jo, self.af, self.ti, self.co]
    }

    pub fn get(&self, kind: SubqueryKind) -> f64 {
        self.to_array()[kind.slot()]
    }

    pub fn set(&mut self, kind: SubqueryKind, v: f64) {
        let mut a = self.to_array();
        a[kind.slot()] = v;
        *self = Self::from_array(a);
    }

    pub fn scale(self, c: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * c))
    }
}

impl Default for PerKind {
    /// The tuned subquery weights Au/1, Jo/1.5, Af/0.3, Ti/0.3, Co/0.2.
    fn default() -> Self {
        Self {
            au: 1.0,
            jo: 1.5,
            af: 0.3,
            ti: 0.3,
            co: 0.2,
        }
    }
}

/// BM25 length-normalization strength per indexed field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldB {
    pub authors: f64,
    pub journal: f64,
    pub affiliations: f64,
    pub title: f64,
    #[serde(rename = "abstract")]
    pub abstract_: f64,
    pub content: f64,
}

impl FieldB {
    pub const fn uniform(b: f64) -> Self {
        Self {
            authors: b,
            journal: b,
            affiliations: b,
            title: b,
            abstract_: b,
            content: b,
        }
    }

    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::Authors => self.authors,
            Field::Journal => self.journal,
            Field::Affiliations => self.affiliations,
            Field::Title => self.title,
            Field::Abstract => self.abstract_,
            Field::Content => self.content,
        }
    }

    fn all(&self) -> [f64; 6] {
        Field::ALL.map(|f| self.get(f))
    }
}

impl Default for FieldB {
    /// 0.75 everywhere except authors, where length normalization is off.
    fn default() -> Self {
        Self {
            authors: 0.0,
            ..Self::uniform(0.75)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub enabled: bool,
    pub offset_days: i64,
    pub half_life_days: i64,
    pub decay_at_half_life: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            offset_days: 7,
            half_life_days: 180,
            decay_at_half_life: 0.5,
        }
    }
}

impl DecayConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.offset_days < 0 {
            return Err("decay.offset_days must be >= 0".into());
        }
        if self.half_life_days <= 0 {
            return Err("decay.half_life_days must be > 0".into());
        }
        if !(self.decay_at_half_life > 0.0 && self.decay_at_half_life < 1.0) {
            return Err("decay.decay_at_half_life must be in (0, 1)".into());
        }
        Ok(())
    }
}

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub k1: f64,
    pub b: FieldB,
    pub weights: Weights,
    pub decay: DecayConfig,
    pub min_score_threshold: f64,
    pub top_k: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k1: DEFAULT_K1,
            b: FieldB::default(),
            weights: Weights::default(),
            decay: DecayConfig::default(),
            min_score_threshold: 0.0,
            top_k: 3,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return Err("k1 must be a finite value >= 0".into());
        }
        if self.b.all().iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err("every b must lie in [0, 1]".into());
        }
        if self
            .weights
            .to_array()
            .iter()
            .any(|w| !(*w >= 0.0 && w.is_finite()))
        {
            return Err("weights must be finite and nonnegative".into());
        }
        if !(self.min_score_threshold >= 0.0) {
            return Err("min_score_threshold must be >= 0".into());
        }
        if self.top_k == 0 {
            return Err("top_k must be >= 1".into());
        }
        self.decay.validate()
    }

    /// Parses a TOML config. Every key is optional; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SearchConfig = toml::from_str(text)?;
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("search config always serializes")
    }
}

/// A news-derived query: one token stream per subquery kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    subqueries: [Vec<String>; 5],
    /// Release date of the news article; `None` disables decay.
    pub news_date: Option<NaiveDate>,
}

impl Query {
    pub fn new(news_date: Option<NaiveDate>) -> Self {
        Self {
            subqueries: Default::default(),
            news_date,
        }
    }

    pub fn with_tokens(mut self, kind: SubqueryKind, tokens: Vec<String>) -> Self {
        self.subqueries[kind.slot()] = tokens;
        self
    }

    /// Tokenizes `text` into the `kind` subquery.
    pub fn with_text(self, kind: SubqueryKind, text: &str) -> Self {
        self.with_tokens(kind, tokenize(text))
    }

    pub fn set_tokens(&mut self, kind: SubqueryKind, tokens: Vec<String>) {
        self.subqueries[kind.slot()] = tokens;
    }

    pub fn tokens(&self, kind: SubqueryKind) -> &[String] {
        &self.subqueries[kind.slot()]
    }

    pub fn is_empty(&self) -> bool {
        self.subqueries.iter().all(Vec::is_empty)
    }

    /// Kinds whose token stream is nonempty.
    pub fn active_kinds(&self) -> impl Iterator<Item = SubqueryKind> + '_ {
        SubqueryKind::ALL
            .into_iter()
            .filter(|k| !self.tokens(*k).is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub paper_id: String,
    pub field_scores: FieldScores,
    pub weighted_score: f64,
    pub date_score: f64,
    pub final_score: f64,
    pub rank: usize,
}

/// `ln(1 + (N - n + 0.5) / (n + 0.5))`, always positive.
pub fn idf_from_counts(doc_count: u32, doc_freq: u32) -> f64 {
    let n = f64::from(doc_count);
    let df = f64::from(doc_freq);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

pub fn idf(index: &Index, field: Field, term: &str) -> f64 {
    idf_from_counts(index.field_stats(field).doc_count, index.doc_freq(field, term))
}

#[inline]
fn term_weight(idf: f64, tf: u32, doc_len: u32, avgdl: f64, k1: f64, b: f64) -> f64 {
    let tf = f64::from(tf);
    let norm = 1.0 - b + b * f64::from(doc_len) / avgdl;
    idf * tf * (k1 + 1.0) / (tf + k1 * norm)
}

/// BM25 of one document against `query` in `field`. Each query token is its
/// own summand, so repeated tokens count repeatedly.
pub fn bm25_score(
    index: &Index,
    field: Field,
    query: &[String],
    paper_id: &str,
    k1: f64,
    b: f64,
) -> Result<f64, SearchError> {
    let doc = index
        .doc_id(paper_id)
        .ok_or_else(|| IndexError::UnknownPaper(paper_id.to_string()))?;
    let doc_len = index.doc_length(field, doc);
    let stats = index.field_stats(field);
    if doc_len == 0 || stats.avgdl == 0.0 {
        return Ok(0.0);
    }
    let mut score = 0.0;
    for term in query {
        let postings = index.postings_raw(field, term);
        if let Ok(pos) = postings.binary_search_by_key(&doc, |p| p.doc) {
            let idf = idf_from_counts(stats.doc_count, postings.len() as u32);
            score += term_weight(idf, postings[pos].tf, doc_len, stats.avgdl, k1, b);
        }
    }
    Ok(score)
}

/// Exponential decay on the day gap, flat within the offset window.
pub fn date_score(paper_date: NaiveDate, news_date: NaiveDate, cfg: &DecayConfig) -> f64 {
    if !cfg.enabled {
        return 1.0;
    }
    let gap = (paper_date - news_date).num_days().abs();
    let excess = (gap - cfg.offset_days).max(0);
    if excess == 0 {
        return 1.0;
    }
    (cfg.decay_at_half_life.ln() / cfg.half_life_days as f64 * excess as f64).exp()
}

fn pair_date_score(paper: NaiveDate, news: Option<NaiveDate>, cfg: &DecayConfig) -> f64 {
    news.map_or(1.0, |n| date_score(paper, n, cfg))
}

/// `Σ weight_k · score_k`, summed in au, jo, af, ti, co order.
pub fn weighted_score(field_scores: &FieldScores, weights: &Weights) -> f64 {
    let s = field_scores.to_array();
    let w = weights.to_array();
    let mut total = 0.0;
    for i in 0..5 {
        total += w[i] * s[i];
    }
    total
}

/// Per-candidate scoring inputs that do not depend on the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScores {
    pub doc: DocId,
    pub field_scores: FieldScores,
    pub date_score: f64,
}

fn validate(query: &Query, cfg: &SearchConfig) -> Result<(), SearchError> {
    cfg.validate().map_err(SearchError::Config)?;
    if query.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    Ok(())
}

/// Documents sharing at least one token with any subquery in its field.
pub fn candidate_docs(index: &Index, query: &Query) -> BTreeSet<DocId> {
    let mut out = BTreeSet::new();
    for kind in query.active_kinds() {
        for term in query.tokens(kind) {
            out.extend(index.postings_raw(kind.field(), term).iter().map(|p| p.doc));
        }
    }
    out
}

/// Term-at-a-time BM25 accumulation over every candidate, in document order.
pub fn score_candidates(
    index: &Index,
    query: &Query,
    cfg: &SearchConfig,
) -> Result<Vec<CandidateScores>, SearchError> {
    validate(query, cfg)?;
    let mut acc: HashMap<DocId, [f64; 5]> = HashMap::new();
    for kind in query.active_kinds() {
        let field = kind.field();
        let stats = index.field_stats(field);
        if stats.avgdl == 0.0 {
            continue;
        }
        let b = cfg.b.get(field);
        let mut multiplicity: BTreeMap<&str, u32> = BTreeMap::new();
        for term in query.tokens(kind) {
            *multiplicity.entry(term.as_str()).or_insert(0) += 1;
        }
        for (term, times) in multiplicity {
            let postings = index.postings_raw(field, term);
            if postings.is_empty() {
                continue;
            }
            let idf = idf_from_counts(stats.doc_count, postings.len() as u32);
            for p in postings {
                let w = term_weight(idf, p.tf, index.doc_length(field, p.doc), stats.avgdl, cfg.k1, b);
                acc.entry(p.doc).or_insert([0.0; 5])[kind.slot()] += f64::from(times) * w;
            }
        }
    }
    // Candidates with no scorable field still belong to the candidate set.
    for doc in candidate_docs(index, query) {
        acc.entry(doc).or_insert([0.0; 5]);
    }
    let mut out: Vec<CandidateScores> = acc
        .into_iter()
        .map(|(doc, s)| CandidateScores {
            doc,
            field_scores: FieldScores::from_array(s),
            date_score: pair_date_score(index.earliest_date(doc), query.news_date, &cfg.decay),
        })
        .collect();
    out.sort_by_key(|c| c.doc);
    Ok(out)
}

/// Orders scored hits by descending final score, ties by ascending paper_id,
/// applies the threshold and `top_k`, and assigns 1-based ranks.
pub fn finalize_hits(mut hits: Vec<RankedHit>, cfg: &SearchConfig) -> Vec<RankedHit> {
    hits.retain(|h| h.final_score >= cfg.min_score_threshold);
    hits.sort_by(|a, b| {
        b.final_score
            .total_cmp(&a.final_score)
            .then_with(|| a.paper_id.cmp(&b.paper_id))
    });
    hits.truncate(cfg.top_k);
    for (i, h) in hits.iter_mut().enumerate() {
        h.rank = i + 1;
    }
    hits
}

pub fn combine(paper_id: &str, field_scores: FieldScores, date_score: f64, weights: &Weights) -> RankedHit {
    let weighted = weighted_score(&field_scores, weights);
    RankedHit {
        paper_id: paper_id.to_string(),
        field_scores,
        weighted_score: weighted,
        date_score,
        final_score: date_score * weighted,
        rank: 0,
    }
}

pub fn search(index: &Index, query: &Query, cfg: &SearchConfig) -> Result<Vec<RankedHit>, SearchError> {
    let scored = score_candidates(index, query, cfg)?;
    let hits = scored
        .into_iter()
        .map(|c| {
            combine(
                &index.record(c.doc).paper_id,
                c.field_scores,
                c.date_score,
                &cfg.weights,
            )
        })
        .collect();
    Ok(finalize_hits(hits, cfg))
}

/// Scores every record directly, without postings. Reference implementation
/// for checking [`search`].
pub fn brute_force_search(
    records: &[PaperRecord],
    query: &Query,
    cfg: &SearchConfig,
) -> Result<Vec<RankedHit>, SearchError> {
    BruteForce::new(records)?.search(query, cfg)
}

/// Per-record term counts for [`brute_force_search`], reusable across queries.
pub struct BruteForce<'a> {
    records: &'a [PaperRecord],
    /// `[kind][doc]` term counts.
    term_counts: Vec<Vec<HashMap<String, usize>>>,
    doc_lens: Vec<Vec<usize>>,
    avgdls: Vec<f64>,
}

impl<'a> BruteForce<'a> {
    pub fn new(records: &'a [PaperRecord]) -> Result<Self, SearchError> {
        let mut seen = BTreeSet::new();
        for r in records {
            if !seen.insert(r.paper_id.as_str()) {
                return Err(IndexError::DuplicatePaperId(r.paper_id.clone()).into());
            }
        }
        let mut term_counts = Vec::new();
        let mut doc_lens = Vec::new();
        let mut avgdls = Vec::new();
        for kind in SubqueryKind::ALL {
            let mut counts = Vec::with_capacity(records.len());
            let mut lens = Vec::with_capacity(records.len());
            for r in records {
                let toks = kind.field().tokens(r);
                lens.push(toks.len());
                let mut m = HashMap::new();
                for t in toks {
                    *m.entry(t).or_insert(0) += 1;
                }
                counts.push(m);
            }
            let nonempty: Vec<usize> = lens.iter().copied().filter(|&l| l > 0).collect();
            avgdls.push(if nonempty.is_empty() {
                0.0
            } else {
                nonempty.iter().sum::<usize>() as f64 / nonempty.len() as f64
            });
            term_counts.push(counts);
            doc_lens.push(lens);
        }
        Ok(Self {
            records,
            term_counts,
            doc_lens,
            avgdls,
        })
    }

    pub fn search(&self, query: &Query, cfg: &SearchConfig) -> Result<Vec<RankedHit>, SearchError> {
        validate(query, cfg)?;
        let n = self.records.len() as f64;
        let mut dfs: HashMap<(usize, &str), f64> = HashMap::new();
        let mut hits = Vec::new();
        for (d, record) in self.records.iter().enumerate() {
            let mut scores = [0.0; 5];
            let mut matched = false;
            for kind in SubqueryKind::ALL {
                let k = kind.slot();
                for q in query.tokens(kind) {
                    let Some(&tf) = self.term_counts[k][d].get(q) else {
                        continue;
                    };
                    matched = true;
                    let tf = tf as f64;
                    let df = *dfs.entry((k, q.as_str())).or_insert_with(|| {
                        self.term_counts[k].iter().filter(|m| m.contains_key(q)).count() as f64
                    });
                    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                    let k1 = cfg.k1;
                    let b = cfg.b.get(kind.field());
                    let len_ratio = self.doc_lens[k][d] as f64 / self.avgdls[k];
                    scores[k] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len_ratio));
                }
            }
            if !matched {
                continue;
            }
            let ds = match query.news_date {
                Some(news) if cfg.decay.enabled => {
                    let gap = (record.earliest_date - news).num_days().abs() as f64;
                    let excess = (gap - cfg.decay.offset_days as f64).max(0.0);
                    (cfg.decay.decay_at_half_life.ln() * excess / cfg.decay.half_life_days as f64).exp()
                }
                _ => 1.0,
            };
            let w = cfg.weights.to_array();
            let weighted: f64 = (0..5).map(|i| w[i] * scores[i]).fold(0.0, |acc, x| acc + x);
            let final_score = ds * weighted;
            if final_score < cfg.min_score_threshold {
                continue;
            }
            hits.push(RankedHit {
                paper_id: record.paper_id.clone(),
                field_scores: FieldScores::from_array(scores),
                weighted_score: weighted,
                date_score: ds,
                final_score,
                rank: 0,
            });
        }
        hits.sort_by(|a, b| {
            b.final_score
                .partial_cmp(&a.final_score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.paper_id.cmp(&b.paper_id))
        });
        hits.truncate(cfg.top_k);
        for (i, h) in hits.iter_mut().enumerate() {
            h.rank = i + 1;
        }
        Ok(hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PubDate, PublicationDates};

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn paper(id: &str, title: &str, journal: &str, authors: &[&str], date: &str) -> PaperRecord {
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
                online_pub: Some(PubDate::exact(d(date))),
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn idf_examples() {
        assert!(close(idf_from_counts(1, 1), (1.0f64 + 0.5 / 1.5).ln(), 1e-15));
        assert!((idf_from_counts(1, 1) - 0.287682).abs() < 1e-6);
        assert!((idf_from_counts(1000, 0) - 7.6014).abs() < 1e-3);
        assert_eq!(idf_from_counts(50, 7), idf_from_counts(50, 7));
        let idx = Index::build(vec![paper("1", "alpha", "J", &[], "2020-01-01")]).unwrap();
        assert!(close(idf(&idx, Field::Title, "alpha"), 0.2876820724517809, 1e-12));
        assert!(idf(&idx, Field::Title, "unseen") > idf(&idx, Field::Title, "alpha"));
    }

    #[test]
    fn bm25_examples() {
        let idx = Index::build(vec![paper("1", "alpha", "J", &[], "2020-01-01")]).unwrap();
        let q = tokenize("beta gamma");
        assert_eq!(bm25_score(&idx, Field::Title, &q, "1", 1.2, 0.75).unwrap(), 0.0);
        let s = bm25_score(&idx, Field::Title, &tokenize("alpha"), "1", 1.2, 0.75).unwrap();
        assert!(close(s, 0.2876820724517809, 1e-12), "{s}");
        assert!(bm25_score(&idx, Field::Title, &q, "missing", 1.2, 0.75).is_err());
    }

    #[test]
    fn b_zero_ignores_length() {
        let idx = Index::build(vec![
            paper("1", "alpha", "J", &[], "2020-01-01"),
            paper("2", "alpha beta gamma delta epsilon", "J", &[], "2020-01-01"),
        ])
        .unwrap();
        let q = tokenize("alpha");
        let short = bm25_score(&idx, Field::Title, &q, "1", 1.2, 0.0).unwrap();
        let long = bm25_score(&idx, Field::Title, &q, "2", 1.2, 0.0).unwrap();
        assert_eq!(short, long);
        let expected = idf(&idx, Field::Title, "alpha") * 2.2 / (1.0 + 1.2);
        assert_eq!(short, expected);
    }

    #[test]
    fn repeated_query_tokens_count_each_time() {
        let idx = Index::build(vec![
            paper("1", "alpha", "J", &[], "2020-01-01"),
            paper("2", "beta", "J", &[], "2020-01-01"),
        ])
        .unwrap();
        let once = bm25_score(&idx, Field::Title, &tokenize("alpha"), "1", 1.2, 0.75).unwrap();
        let twice = bm25_score(&idx, Field::Title, &tokenize("alpha alpha"), "1", 1.2, 0.75).unwrap();
        assert!(close(twice, 2.0 * once, 1e-15));
    }

    #[test]
    fn date_score_examples() {
        let cfg = DecayConfig::default();
        let news = d("2021-01-01");
        assert_eq!(date_score(news - chrono::Duration::days(3), news, &cfg), 1.0);
        assert!(close(date_score(news + chrono::Duration::days(187), news, &cfg), 0.5, 1e-12));
        assert!(close(date_score(news - chrono::Duration::days(367), news, &cfg), 0.25, 1e-12));
        assert_eq!(
            date_score(news - chrono::Duration::days(999), news, &DecayConfig::disabled()),
            1.0
        );
    }

    #[test]
    fn weighted_score_examples() {
        let s = FieldScores::from_array([2.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(weighted_score(&s, &Weights::ZERO), 0.0);
        let w = Weights {
            au: 1.0,
            jo: 1.5,
            ..Weights::ZERO
        };
        assert_eq!(weighted_score(&s, &w), 8.0);
        let w = Weights {
            ti: 0.3,
            ..Weights::ZERO
        };
        assert_eq!(weighted_score(&s, &w), 0.3 * 6.0);
    }

    #[test]
    fn empty_query_rejected() {
        let idx = Index::build(vec![paper("1", "a", "J", &[], "2020-01-01")]).unwrap();
        let q = Query::new(None);
        assert!(matches!(search(&idx, &q, &SearchConfig::default()), Err(SearchError::EmptyQuery)));
    }

    #[test]
    fn nearer_paper_wins() {
        let idx = Index::build(vec![
            paper("far", "stroke risk", "Neurology", &[], "2020-07-20"),
            paper("near", "stroke risk", "Neurology", &[], "2020-01-01"),
        ])
        .unwrap();
        let q = Query::new(Some(d("2020-01-01"))).with_text(SubqueryKind::Ti, "stroke risk");
        let hits = search(&idx, &q, &SearchConfig::default()).unwrap();
        assert_eq!(hits[0].paper_id, "near");
        assert!(hits[0].final_score > hits[1].final_score);
    }

    #[test]
    fn journal_only_weights() {
        let idx = Index::build(vec![
            paper("1", "gene therapy", "Gene Therapy Reports", &["Ann Lee"], "2020-01-01"),
            paper("2", "therapy", "Clinical Gene", &["Bo Chan"], "2020-03-01"),
            paper("3", "x", "Gene", &["Ann Lee"], "2020-06-01"),
            paper("4", "gene", "Other", &[], "2020-01-05"),
        ])
        .unwrap();
        let q = Query::new(Some(d("2020-01-10")))
            .with_text(SubqueryKind::Jo, "Gene Therapy")
            .with_text(SubqueryKind::Au, "Ann Lee")
            .with_text(SubqueryKind::Ti, "gene therapy");
        let cfg = SearchConfig {
            weights: Weights {
                jo: 1.5,
                ..Weights::ZERO
            },
            top_k: 10,
            ..SearchConfig::default()
        };
        let hits = search(&idx, &q, &cfg).unwrap();
        let mut expected: Vec<(String, f64)> = candidate_docs(&idx, &q)
            .into_iter()
            .map(|doc| {
                let r = idx.record(doc);
                let jo = bm25_score(&idx, Field::Journal, q.tokens(SubqueryKind::Jo), &r.paper_id, cfg.k1, cfg.b.journal)
                    .unwrap();
                let ds = date_score(r.earliest_date, q.news_date.unwrap(), &cfg.decay);
                (r.paper_id.clone(), jo * ds)
            })
            .collect();
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let got: Vec<&str> = hits.iter().map(|h| h.paper_id.as_str()).collect();
        let want: Vec<&str> = expected.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn editorial_vs_many_author_paper() {
        let mut many: Vec<String> = (0..12).map(|i| format!("Coauthor{i} Person{i}")).collect();
        many.push("Jane Doe".into());
        let many_refs: Vec<&str> = many.iter().map(String::as_str).collect();
        let idx = Index::build(vec![
            paper("editorial", "comment", "J", &["Jane Doe"], "2020-01-01"),
            paper("research", "trial", "J", &many_refs, "2020-01-01"),
        ])
        .unwrap();
        let q = tokenize("Jane Doe");
        let ed = bm25_score(&idx, Field::Authors, &q, "editorial", 1.2, 0.0).unwrap();
        let re = bm25_score(&idx, Field::Authors, &q, "research", 1.2, 0.0).unwrap();
        assert_eq!(ed, re);
        let ed = bm25_score(&idx, Field::Authors, &q, "editorial", 1.2, 0.75).unwrap();
        let re = bm25_score(&idx, Field::Authors, &q, "research", 1.2, 0.75).unwrap();
        assert!(ed > re);
    }

    #[test]
    fn threshold_above_max_empties_result() {
        let idx = Index::build(vec![paper("1", "alpha", "J", &[], "2020-01-01")]).unwrap();
        let q = Query::new(None).with_text(SubqueryKind::Ti, "alpha");
        let cfg = SearchConfig {
            min_score_threshold: 1e6,
            ..SearchConfig::default()
        };
        assert!(search(&idx, &q, &cfg).unwrap().is_empty());
    }

    #[test]
    fn brute_force_small_cases() {
        let q = Query::new(None).with_text(SubqueryKind::Ti, "alpha");
        let cfg = SearchConfig::default();
        assert!(brute_force_search(&[], &q, &cfg).unwrap().is_empty());
        let recs = vec![paper("1", "alpha", "J", &[], "2020-01-01")];
        let hits = brute_force_search(&recs, &q, &cfg).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!((hits[0].paper_id.as_str(), hits[0].rank), ("1", 1));
    }

    #[test]
    fn config_toml_defaults_and_unknown_keys() {
        let cfg = SearchConfig::from_toml("").unwrap();
        assert_eq!(cfg, SearchConfig::default());
        let cfg = SearchConfig::from_toml("top_k = 5\n[weights]\nau = 2.0\n[b]\nauthors = 0.5\n").unwrap();
        assert_eq!(cfg.top_k, 5);
        assert_eq!(cfg.weights.au, 2.0);
        assert_eq!(cfg.weights.jo, 1.5);
        assert_eq!(cfg.b.authors, 0.5);
        assert_eq!(cfg.b.title, 0.75);
        assert!(SearchConfig::from_toml("bogus = 1\n").is_err());
        assert!(SearchConfig::from_toml("[decay]\nhalf_life = 3\n").is_err());
        assert!(SearchConfig::from_toml("k1 = -1.0\n").is_err());
        assert!(SearchConfig::from_toml("[decay]\ndecay_at_half_life = 1.0\n").is_err());
        let round = SearchConfig::from_toml(&SearchConfig::default().to_toml()).unwrap();
        assert_eq!(round, SearchConfig::default());
    }

    #[test]
    fn kind_parsing() {
        let set = SubqueryKind::parse_set("au, jo,co").unwrap();
        assert_eq!(SubqueryKind::label(&set), "AuJoCo");
        assert!(SubqueryKind::parse_set("au,xx").is_err());
    }
}
