//! Single-article linking: the request/response types shared by the CLI and
//! the HTTP service.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::baseline::{and_search, AndQuery};
use crate::corpus::{JournalAliasTable, NewsArticle};
use crate::error::{LinkError, SearchError};
use crate::eval::Backend;
use crate::extraction::{build_query, ExtractorPlugin, JournalGazetteer, RuleExtractor};
use crate::index::Index;
use crate::ranking::{search, FieldScores, SearchConfig, SubqueryKind};

/// Version of the machine-readable response document.
pub const RESPONSE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRequest {
    #[serde(default)]
    pub title: String,
    pub body: String,
    pub release_date: NaiveDate,
    /// Subquery kinds to use; all five when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled_kinds: Option<BTreeSet<SubqueryKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
}

impl LinkRequest {
    pub fn new(title: impl Into<String>, body: impl Into<String>, release_date: NaiveDate) -> Self {
        Self {
            title: title.into(),
            body: body.into(),
            release_date,
            enabled_kinds: None,
            top_k: None,
        }
    }

    /// Parses a JSON request; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, LinkError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let req: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            // Missing fields are reported against their parent; name them instead.
            let field = message
                .strip_prefix("missing field `")
                .and_then(|m| m.split('`').next())
                .map(str::to_string)
                .unwrap_or(if path == "." { "request".to_string() } else { path });
            LinkError::InvalidRequest { field, message }
        })?;
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let invalid = |field: &str, message: &str| LinkError::InvalidRequest {
            field: field.to_string(),
            message: message.to_string(),
        };
        if self.body.trim().is_empty() {
            return Err(invalid("body", "must not be empty"));
        }
        if self.top_k == Some(0) {
            return Err(invalid("top_k", "must be at least 1"));
        }
        if self.enabled_kinds.as_ref().is_some_and(BTreeSet::is_empty) {
            return Err(invalid("enabled_kinds", "must name at least one kind"));
        }
        Ok(())
    }

    pub fn kinds(&self) -> BTreeSet<SubqueryKind> {
        self.enabled_kinds
            .clone()
            .unwrap_or_else(|| SubqueryKind::ALL.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkHit {
    pub rank: usize,
    pub paper_id: String,
    pub doi: Option<String>,
    pub title: String,
    pub journal: String,
    pub final_score: f64,
    pub date_score: f64,
    pub weighted_score: f64,
    pub field_scores: FieldScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResponse {
    pub schema_version: u32,
    pub backend: Backend,
    /// Sorted by rank; empty when no paper reaches the score threshold.
    pub hits: Vec<LinkHit>,
}

impl LinkResponse {
    /// The machine-readable document: pretty-printed JSON plus a newline.
    pub fn to_machine(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("responses always serialize");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        if self.hits.is_empty() {
            return "no paper reached the score threshold\n".to_string();
        }
        let mut out = String::new();
        for h in &self.hits {
            let _ = writeln!(out, "{}. {} ({})", h.rank, h.title, h.journal);
            let _ = writeln!(
                out,
                "   id {}{}",
                h.paper_id,
                h.doi.as_deref().map(|d| format!("  doi {d}")).unwrap_or_default()
            );
            let f = &h.field_scores;
            let _ = writeln!(
                out,
                "   score {:.4} = date {:.4} x weighted {:.4}  [au {:.3} jo {:.3} af {:.3} ti {:.3} co {:.3}]",
                h.final_score, h.date_score, h.weighted_score, f.au, f.jo, f.af, f.ti, f.co
            );
        }
        out
    }
}

/// An index plus everything needed to answer link requests. Immutable
/// after construction, so one instance can serve concurrent requests.
pub struct Linker {
    index: Index,
    gazetteer: JournalGazetteer,
    config: SearchConfig,
    plugin: Box<dyn ExtractorPlugin>,
}

impl Linker {
    /// The gazetteer covers every journal name in `index` plus any names in
    /// `aliases`.
    pub fn new(index: Index, aliases: Option<&JournalAliasTable>, config: SearchConfig) -> Result<Self, SearchError> {
        config.validate().map_err(SearchError::Config)?;
        let mut gazetteer = JournalGazetteer::from_records(index.records());
        if let Some(table) = aliases {
            gazetteer.add_table(table);
        }
        Ok(Self {
            index,
            gazetteer,
            config,
            plugin: Box::new(RuleExtractor),
        })
    }

    pub fn with_plugin(mut self, plugin: Box<dyn ExtractorPlugin>) -> Self {
        self.plugin = plugin;
        self
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn link(&self, req: &LinkRequest, backend: Backend) -> Result<LinkResponse, LinkError> {
        req.validate()?;
        let news = NewsArticle::new("request", "", req.title.clone(), req.body.clone(), req.release_date, None)
            .map_err(|e| LinkError::InvalidRequest {
                field: "body".into(),
                message: e.to_string(),
            })?;
        let query = match build_query(&news, &self.gazetteer, self.plugin.as_ref(), &req.kinds()) {
            Ok(q) => q,
            Err(SearchError::EmptyQuery) => return Err(LinkError::NoMetadata),
            Err(e) => return Err(e.into()),
        };
        let top_k = req.top_k.unwrap_or(self.config.top_k);
        let cfg = SearchConfig { top_k, ..self.config };
        let hits = match backend {
            Backend::Main => search(&self.index, &query, &cfg)?,
            Backend::CrossrefLike => {
                let mut hits = and_search(&self.index, &AndQuery::new(query, req.release_date), top_k)?;
                hits.retain(|h| h.final_score >= cfg.min_score_threshold);
                hits
            }
        };
        let hits = hits
            .into_iter()
            .map(|h| {
                let record = self.index.get(&h.paper_id).expect("hits come from the index");
                LinkHit {
                    rank: h.rank,
                    paper_id: h.paper_id,
                    doi: record.doi.clone(),
                    title: record.title.clone(),
                    journal: record.journal_name.clone(),
                    final_score: h.final_score,
                    date_score: h.date_score,
                    weighted_score: h.weighted_score,
                    field_scores: h.field_scores,
                }
            })
            .collect();
        Ok(LinkResponse {
            schema_version: RESPONSE_SCHEMA_VERSION,
            backend,
            hits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_release_date_is_named() {
        let err = LinkRequest::from_json(r#"{"title":"t","body":"b"}"#).unwrap_err();
        match err {
            LinkError::InvalidRequest { field, .. } => assert_eq!(field, "release_date"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_are_named() {
        let err = LinkRequest::from_json(r#"{"body":"b","release_date":"2020-13-01"}"#).unwrap_err();
        assert!(matches!(err, LinkError::InvalidRequest { ref field, .. } if field == "release_date"), "{err}");
        let err = LinkRequest::from_json(r#"{"body":"b","release_date":"2020-01-01","enabled_kinds":["au","xx"]}"#).unwrap_err();
        assert!(matches!(err, LinkError::InvalidRequest { ref field, .. } if field.starts_with("enabled_kinds")), "{err}");
        let err = LinkRequest::from_json(r#"{"body":"  ","release_date":"2020-01-01"}"#).unwrap_err();
        assert!(matches!(err, LinkError::InvalidRequest { ref field, .. } if field == "body"));
        let err = LinkRequest::from_json(r#"{"body":"b","release_date":"2020-01-01","colour":1}"#).unwrap_err();
        assert!(matches!(err, LinkError::InvalidRequest { .. }));
    }

    #[test]
    fn defaults() {
        let req = LinkRequest::from_json(r#"{"body":"b","release_date":"2020-01-01"}"#).unwrap();
        assert_eq!(req.kinds().len(), 5);
        assert_eq!(req.top_k, None);
        assert_eq!(req.title, "");
    }
}
