//! Metadata extraction from news text.
//!
//! The default extractor is rule based: a journal gazetteer with longest-match
//! lookup, a cue-word sentence filter, and a capitalization heuristic for
//! person and organization names. Learned models can be swapped in through
//! [`ExtractorPlugin`].
//!
//! Spans are half-open byte ranges into the input string.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{name_key, JournalAliasTable, NewsArticle, PaperRecord};
use crate::error::SearchError;
use crate::index::{token_spans, tokenize};
use crate::ranking::{Query, SubqueryKind};

/// Tokens kept from the start of a news body for the content subquery.
pub const CONTENT_PREFIX_TOKENS: usize = 300;

/// Single-word cues for the journal-sentence filter.
pub const CUE_WORDS: &[&str] = &[
    "journal",
    "published",
    "publish",
    "report",
    "reported",
    "write",
    "wrote",
    "study",
];

/// Multi-word cues for the journal-sentence filter.
pub const CUE_PHRASES: &[&[&str]] = &[&["appears", "in"]];

const GAZETTEER_CONFIDENCE: f64 = 1.0;
const CUE_CONFIDENCE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sentence<'a> {
    pub text: &'a str,
    pub start: usize,
}

impl Sentence<'_> {
    pub fn span(&self) -> Range<usize> {
        self.start..self.start + self.text.len()
    }
}

const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "al", "fig", "figs",
    "inc", "ltd", "co", "corp", "dept", "univ", "approx", "gen", "gov", "sen", "rep", "rev",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "eq",
    "vol", "pp", "ph", "mt",
];

fn is_abbreviation(word: &str) -> bool {
    let word = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    let mut letters = word.chars().filter(|c| c.is_alphabetic());
    // Single letters are initials ("A. B. Smith").
    if let (Some(c), None) = (letters.next(), letters.next()) {
        if word.chars().count() == 1 && c.is_uppercase() {
            return true;
        }
    }
    // Dotted forms such as "e.g" or "U.S".
    if word.contains('.') {
        return true;
    }
    ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

/// Rule-based sentence splitter. Splits after `.`, `!` or `?` (plus any
/// closing quotes) when followed by whitespace and a character that is not
/// lowercase. A period after an initial or a known abbreviation never splits.
pub fn split_sentences(text: &str) -> Vec<Sentence<'_>> {
    let mut out = Vec::new();
    let bytes_len = text.len();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let end = chars.get(j).map_or(bytes_len, |&(p, _)| p);
            let followed_by_space = j == chars.len() || chars[j].1.is_whitespace();
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let next_ok = k == chars.len() || !chars[k].1.is_lowercase();
            let guarded = c == '.' && {
                let word_start = text[..pos]
                    .rfind(char::is_whitespace)
                    .map_or(0, |p| p + 1);
                is_abbreviation(&text[word_start..pos])
            };
            if followed_by_space && next_ok && !guarded {
                push_trimmed(&mut out, text, start, end);
                start = end;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    push_trimmed(&mut out, text, start, bytes_len);
    out
}

fn push_trimmed<'a>(out: &mut Vec<Sentence<'a>>, text: &'a str, start: usize, end: usize) {
    let piece = &text[start..end];
    let trimmed = piece.trim_start();
    let lead = piece.len() - trimmed.len();
    let trimmed = trimmed.trim_end();
    if !trimmed.is_empty() {
        out.push(Sentence {
            text: trimmed,
            start: start + lead,
        });
    }
}

/// Normalized journal names (canonical and alternative) mapped to canonical
/// names. Lookup ignores case and punctuation; the longest match wins.
#[derive(Debug, Clone, Default)]
pub struct JournalGazetteer {
    names: HashMap<String, String>,
    max_tokens: usize,
}

impl JournalGazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `surface` as a name of `canonical`. The first registration
    /// of a normalized surface form wins.
    pub fn insert(&mut self, surface: &str, canonical: &str) {
        let key = name_key(surface);
        if key.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(key.split(' ').count());
        self.names.entry(key).or_insert_with(|| canonical.to_string());
    }

    /// Canonical names and aliases of every record's journal.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a PaperRecord>) -> Self {
        let mut g = Self::new();
        g.add_records(records);
        g
    }

    pub fn add_records<'a>(&mut self, records: impl IntoIterator<Item = &'a PaperRecord>) {
        let mut records: Vec<&PaperRecord> = records.into_iter().collect();
        records.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        for r in &records {
            self.insert(&r.journal_name, &r.journal_name);
        }
        for r in &records {
            for alias in &r.journal_aliases {
                self.insert(alias, &r.journal_name);
            }
        }
    }

    /// Adds every name in an alias table (or supplemental gazetteer file).
    pub fn add_table(&mut self, table: &JournalAliasTable) {
        for (_, entry) in table.iter() {
            self.insert(&entry.canonical_name, &entry.canonical_name);
            for alias in &entry.aliases {
                self.insert(alias, &entry.canonical_name);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<&str> {
        self.names.get(&name_key(name)).map(String::as_str)
    }

    /// Left-to-right longest non-overlapping matches in `text`.
    pub fn find(&self, text: &str) -> Vec<JournalMention> {
        let toks: Vec<(Range<usize>, String)> = token_spans(text).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let longest = self.max_tokens.min(toks.len() - i);
            let mut matched = None;
            for len in (1..=longest).rev() {
                let key = toks[i..i + len]
                    .iter()
                    .map(|(_, t)| t.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                if let Some(canonical) = self.names.get(&key) {
                    matched = Some((len, canonical));
                    break;
                }
            }
            match matched {
                Some((len, canonical)) => {
                    out.push(JournalMention {
                        canonical: canonical.clone(),
                        span: toks[i].0.start..toks[i + len - 1].0.end,
                    });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalMention {
    pub canonical: String,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EntityKind {
    Person,
    Org,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub surface: String,
    pub kind: EntityKind,
    pub span: Range<usize>,
}

fn has_cue(tokens: &[String]) -> bool {
    tokens.iter().any(|t| CUE_WORDS.contains(&t.as_str()))
        || CUE_PHRASES.iter().any(|phrase| {
            tokens
                .windows(phrase.len())
                .any(|w| w.iter().zip(phrase.iter()).all(|(a, b)| a == b))
        })
}

/// Default journal-sentence filter: a gazetteer hit scores 1.0, a cue word
/// alone 0.6, anything else 0.0.
pub fn is_journal_sentence(sentence: &str, gazetteer: &JournalGazetteer) -> (bool, f64) {
    if !gazetteer.find(sentence).is_empty() {
        return (true, GAZETTEER_CONFIDENCE);
    }
    if has_cue(&tokenize(sentence)) {
        return (true, CUE_CONFIDENCE);
    }
    (false, 0.0)
}

/// Gazetteer matches in `sentence`, as canonical names with their spans.
pub fn extract_journal_names(sentence: &str, gazetteer: &JournalGazetteer) -> Vec<(String, Range<usize>)> {
    gazetteer
        .find(sentence)
        .into_iter()
        .map(|m| (m.canonical, m.span))
        .collect()
}

const HONORIFICS: &[&str] = &["dr", "prof", "professor", "mr", "mrs", "ms", "sir", "dame"];

/// Words that, right before or after a capitalized name, mark it as a person.
const PERSON_CUES: &[&str] = &[
    "said", "says", "told", "explained", "added", "noted", "wrote", "stated", "according",
    "author", "authors", "co-author", "coauthor", "researcher", "researchers", "scientist",
    "investigator", "led", "colleagues", "lead", "senior", "expert",
];

const ORG_CUES: &[&str] = &[
    "university", "universities", "institute", "institutes", "hospital", "hospitals", "center",
    "centre", "college", "school", "laboratory", "laboratories", "lab", "foundation", "clinic",
    "department", "academy", "council", "agency", "society", "association", "organization",
    "organisation", "inc", "corporation", "company", "trust", "consortium", "museum",
    "observatory", "ministry", "faculty", "infirmary",
];

/// Lowercase words allowed between capitalized words of one name.
const CONNECTORS: &[&str] = &["of", "for", "the", "and", "&"];
const PARTICLES: &[&str] = &["de", "van", "von", "der", "den", "da", "di", "la", "le", "del", "du", "bin"];

/// Capitalized words that commonly start a sentence or a phrase and are
/// never part of a name.
const LEADING_NOISE: &[&str] = &[
    "the", "a", "an", "in", "on", "at", "to", "this", "that", "these", "those", "but", "and",
    "or", "however", "when", "while", "after", "before", "although", "it", "its", "their", "our",
    "we", "they", "he", "she", "his", "her", "researchers", "scientists", "according", "now",
    "then", "here", "there", "for", "from", "with", "by", "as", "if", "so", "yet", "also",
    "study", "lead", "senior", "author", "co-author", "coauthor", "colleague", "colleagues",
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday", "january",
    "february", "march", "april", "may", "june", "july", "august", "september", "october",
    "november", "december", "professor", "doctor", "said", "says", "researcher", "expert",
    "new", "one", "two", "three", "some", "many", "most", "more", "all", "each", "both",
    "people", "patients", "participants", "results", "findings", "data",
];

#[derive(Debug, Clone)]
struct Word<'a> {
    core: &'a str,
    span: Range<usize>,
    /// Leading opening punctuation (quote, parenthesis) before the word.
    opens: bool,
    /// Trailing punctuation that ends a name sequence.
    breaks: bool,
    initial: bool,
}

fn scan_words(text: &str) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for chunk in text.split_inclusive(char::is_whitespace) {
        let raw = chunk.trim_end();
        let base = offset;
        offset += chunk.len();
        if raw.is_empty() {
            continue;
        }
        let lead = raw.len() - raw.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
        let body = &raw[lead..];
        let core_end = body
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_alphanumeric())
            .map_or(0, |(i, c)| i + c.len_utf8());
        let mut core = &body[..core_end];
        let trailing = &body[core_end..];
        if core.is_empty() {
            continue;
        }
        for suffix in ["'s", "\u{2019}s"] {
            if core.len() > suffix.len() && core.ends_with(suffix) {
                core = &core[..core.len() - suffix.len()];
            }
        }
        let mut letters = core.chars();
        let initial = matches!((letters.next(), letters.next()), (Some(c), None) if c.is_uppercase())
            && trailing.starts_with('.');
        let honorific = HONORIFICS.contains(&core.to_lowercase().as_str()) && trailing.starts_with('.');
        let breaks = !trailing.is_empty() && !initial && !honorific;
        out.push(Word {
            core,
            span: base + lead..base + lead + core.len(),
            opens: lead > 0,
            breaks,
            initial,
        });
    }
    out
}

fn is_bridge(word: &str) -> bool {
    let w = lower(word);
    CONNECTORS.contains(&w.as_str()) || PARTICLES.contains(&w.as_str())
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn is_acronym(word: &str) -> bool {
    word.chars().filter(|c| c.is_alphabetic()).count() >= 2
        && !word.chars().any(char::is_lowercase)
}

fn lower(word: &str) -> String {
    word.to_lowercase()
}

/// Splits capitalized runs of `words` into entity candidates and classifies them.
fn classify_run(text: &str, words: &[Word<'_>], run: Range<usize>, out: &mut Vec<Entity>) {
    // Segments separated by connector words; the connector preceding each
    // segment is kept so organizations can absorb "of X"/"for X".
    let mut segments: Vec<(Option<String>, Vec<usize>)> = vec![(None, vec![])];
    for i in run.clone() {
        let w = lower(words[i].core);
        if CONNECTORS.contains(&w.as_str()) {
            // "and the" keeps "and": only the first connector of a gap counts.
            match segments.last() {
                Some((Some(_), seg)) if seg.is_empty() => {}
                _ => segments.push((Some(w), vec![])),
            }
        } else {
            segments.last_mut().unwrap().1.push(i);
        }
    }
    segments.retain(|(_, s)| !s.is_empty());
    // Drop sentence-initial noise words from the first segment.
    if let Some((_, first)) = segments.first_mut() {
        while first
            .first()
            .is_some_and(|&i| !words[i].initial && LEADING_NOISE.contains(&lower(words[i].core).as_str()))
        {
            first.remove(0);
        }
    }
    segments.retain(|(_, s)| !s.is_empty());

    let before = run.start.checked_sub(1).map(|i| lower(words[i].core));
    let after = words.get(run.end).map(|w| lower(w.core));
    let honorific_before = run.start > 0
        && HONORIFICS.contains(&before.as_deref().unwrap_or(""))
        && !words[run.start - 1].breaks;
    let cue_adjacent = before.as_deref().is_some_and(|w| PERSON_CUES.contains(&w))
        || (!words[run.end - 1].breaks && after.as_deref().is_some_and(|w| PERSON_CUES.contains(&w)));

    let mut i = 0;
    while i < segments.len() {
        let seg = &segments[i].1;
        let is_org = seg
            .iter()
            .any(|&w| ORG_CUES.contains(&lower(words[w].core).as_str()));
        if is_org {
            let mut last = *seg.last().unwrap();
            let mut j = i + 1;
            while j < segments.len()
                && matches!(segments[j].0.as_deref(), Some("of" | "for" | "&"))
            {
                last = *segments[j].1.last().unwrap();
                j += 1;
            }
            let span = words[seg[0]].span.start..words[last].span.end;
            out.push(Entity {
                surface: text[span.clone()].to_string(),
                kind: EntityKind::Org,
                span,
            });
            i = j;
            continue;
        }
        let first_segment = i == 0;
        let tokens = seg.len();
        let has_name_word = seg.iter().any(|&w| !words[w].initial && words[w].core.chars().count() >= 2);
        let acronym = seg.iter().any(|&w| is_acronym(words[w].core));
        let person = has_name_word
            && !acronym
            && tokens <= 4
            && ((first_segment && honorific_before)
                || tokens >= 2
                || (tokens == 1 && cue_adjacent && !words[seg[0]].initial));
        if person {
            let span = words[seg[0]].span.start..words[*seg.last().unwrap()].span.end;
            out.push(Entity {
                surface: text[span.clone()].to_string(),
                kind: EntityKind::Person,
                span,
            });
        }
        i += 1;
    }
}

/// Capitalization heuristic for person and organization names.
///
/// A run of capitalized words (allowing initials, name particles and the
/// connectors of/for/the/and) is split at connectors. A piece containing an
/// organization cue ("University", "Institute", "Hospital", "Center", ...)
/// becomes an ORG and absorbs following "of ..." pieces. Other pieces of two
/// to four words, or single words after an honorific or next to a person cue
/// ("said", "author"), become PERSON. Recall is favored over precision.
pub fn extract_entities(text: &str) -> Vec<Entity> {
    let words = scan_words(text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let w = &words[i];
        if !is_capitalized(w.core) || HONORIFICS.contains(&lower(w.core).as_str()) {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        let mut prev_breaks = w.breaks;
        while end < words.len() && !prev_breaks {
            let next = &words[end];
            if next.opens {
                break;
            }
            if !is_capitalized(next.core) {
                // Bridge over connectors and name particles that lead to
                // another capitalized word.
                let mut k = end;
                while k < words.len() && !words[k].breaks && is_bridge(words[k].core) {
                    k += 1;
                }
                let bridged = k > end
                    && words
                        .get(k)
                        .is_some_and(|n| is_capitalized(n.core) && !n.opens);
                if !bridged {
                    break;
                }
                end = k;
                continue;
            }
            prev_breaks = next.breaks;
            end += 1;
        }
        classify_run(text, &words, start..end, &mut out);
        i = end;
    }
    out
}

/// Pluggable extraction models. The default [`RuleExtractor`] uses the
/// gazetteer and heuristics in this module.
pub trait ExtractorPlugin: Send + Sync {
    /// Whether `sentence` names the publishing venue, with a confidence in [0, 1].
    fn classify_sentence(&self, gazetteer: &JournalGazetteer, sentence: &str) -> (bool, f64);
    fn extract_journals(&self, gazetteer: &JournalGazetteer, sentence: &str) -> Vec<(String, Range<usize>)>;
    fn extract_entities(&self, text: &str) -> Vec<Entity>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleExtractor;

impl ExtractorPlugin for RuleExtractor {
    fn classify_sentence(&self, gazetteer: &JournalGazetteer, sentence: &str) -> (bool, f64) {
        is_journal_sentence(sentence, gazetteer)
    }

    fn extract_journals(&self, gazetteer: &JournalGazetteer, sentence: &str) -> Vec<(String, Range<usize>)> {
        extract_journal_names(sentence, gazetteer)
    }

    fn extract_entities(&self, text: &str) -> Vec<Entity> {
        extract_entities(text)
    }
}

/// The five subquery sources pulled from one article.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedMetadata {
    pub authors: Vec<String>,
    pub affiliations: Vec<String>,
    /// Journal names as written in the article.
    pub journals: Vec<String>,
    pub title: String,
    pub content_prefix: String,
}

/// The leading `max_tokens` index tokens of `body`, as a substring.
pub fn content_prefix(body: &str, max_tokens: usize) -> &str {
    if max_tokens == 0 {
        return "";
    }
    match token_spans(body).nth(max_tokens - 1) {
        Some((span, _)) => &body[..span.end],
        None => body,
    }
}

fn push_unique(list: &mut Vec<String>, seen: &mut HashSet<String>, value: &str) {
    if seen.insert(value.to_lowercase()) {
        list.push(value.to_string());
    }
}

fn overlaps(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

/// Runs sentence splitting, the journal filter, journal extraction and
/// entity extraction over an article.
pub fn extract_metadata(
    news: &NewsArticle,
    gazetteer: &JournalGazetteer,
    plugin: &dyn ExtractorPlugin,
) -> ExtractedMetadata {
    let body = news.body.as_str();
    let mut journals = Vec::new();
    let mut journal_spans = Vec::new();
    let mut seen = HashSet::new();
    for sentence in split_sentences(body) {
        let (is_journal, _) = plugin.classify_sentence(gazetteer, sentence.text);
        if !is_journal {
            continue;
        }
        for (_, span) in plugin.extract_journals(gazetteer, sentence.text) {
            let abs = sentence.start + span.start..sentence.start + span.end;
            push_unique(&mut journals, &mut seen, &body[abs.clone()]);
            journal_spans.push(abs);
        }
    }
    let mut authors = Vec::new();
    let mut affiliations = Vec::new();
    let (mut seen_au, mut seen_af) = (HashSet::new(), HashSet::new());
    for entity in plugin.extract_entities(body) {
        if journal_spans.iter().any(|j| overlaps(j, &entity.span)) {
            continue;
        }
        match entity.kind {
            EntityKind::Person => push_unique(&mut authors, &mut seen_au, &entity.surface),
            EntityKind::Org => push_unique(&mut affiliations, &mut seen_af, &entity.surface),
        }
    }
    ExtractedMetadata {
        authors,
        affiliations,
        journals,
        title: news.title.clone(),
        content_prefix: content_prefix(body, CONTENT_PREFIX_TOKENS).to_string(),
    }
}

/// Tokenizes the enabled parts of `meta` into a query dated at `news_date`.
pub fn query_from_metadata(
    meta: &ExtractedMetadata,
    news_date: Option<chrono::NaiveDate>,
    enabled: &BTreeSet<SubqueryKind>,
) -> Query {
    let join = |items: &[String]| items.iter().flat_map(|s| tokenize(s)).collect::<Vec<_>>();
    let mut query = Query::new(news_date);
    for &kind in enabled {
        let tokens = match kind {
            SubqueryKind::Au => join(&meta.authors),
            SubqueryKind::Jo => join(&meta.journals),
            SubqueryKind::Af => join(&meta.affiliations),
            SubqueryKind::Ti => tokenize(&meta.title),
            SubqueryKind::Co => tokenize(&meta.content_prefix),
        };
        query.set_tokens(kind, tokens);
    }
    query
}

/// Extracts metadata from `news` and builds a query over `enabled` kinds.
pub fn build_query(
    news: &NewsArticle,
    gazetteer: &JournalGazetteer,
    plugin: &dyn ExtractorPlugin,
    enabled: &BTreeSet<SubqueryKind>,
) -> Result<Query, SearchError> {
    let meta = extract_metadata(news, gazetteer, plugin);
    let query = query_from_metadata(&meta, Some(news.release_date), enabled);
    if query.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    Ok(query)
}
