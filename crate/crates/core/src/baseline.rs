//! CrossRef-style retrieval: every subquery must match (logical AND) and the
//! paper must fall inside a hard date window around the news release.

use std::collections::BTreeSet;

use chrono::NaiveDate;

use crate::error::SearchError;
use crate::index::{DocId, Index};
use crate::ranking::{combine, finalize_hits, score_candidates, DecayConfig, FieldB, Query, RankedHit, SearchConfig, Weights};

pub const DEFAULT_WINDOW_DAYS: i64 = 45;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndQuery {
    pub subqueries: Query,
    pub news_date: NaiveDate,
    pub window_days: i64,
}

impl AndQuery {
    pub fn new(subqueries: Query, news_date: NaiveDate) -> Self {
        Self {
            subqueries,
            news_date,
            window_days: DEFAULT_WINDOW_DAYS,
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.window_days <= 0 {
            return Err(SearchError::Config("window_days must be > 0".into()));
        }
        if self.subqueries.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        Ok(())
    }
}

/// Documents matching at least one token of every nonempty subquery and
/// dated within the window.
pub fn and_candidates(index: &Index, query: &AndQuery) -> Result<BTreeSet<DocId>, SearchError> {
    query.validate()?;
    let q = &query.subqueries;
    let mut result: Option<BTreeSet<DocId>> = None;
    for kind in q.active_kinds() {
        let matching: BTreeSet<DocId> = q
            .tokens(kind)
            .iter()
            .flat_map(|t| index.postings_raw(kind.field(), t).iter().map(|p| p.doc))
            .collect();
        result = Some(match result {
            None => matching,
            Some(acc) => acc.intersection(&matching).copied().collect(),
        });
    }
    let mut docs = result.unwrap_or_default();
    docs.retain(|&d| (index.earliest_date(d) - query.news_date).num_days().abs() <= query.window_days);
    Ok(docs)
}

/// Scoring used for the baseline: default BM25 parameters on every field,
/// unit weights, no decay.
pub fn baseline_config(k: usize) -> SearchConfig {
    SearchConfig {
        b: FieldB::uniform(crate::ranking::DEFAULT_B),
        weights: Weights::uniform(1.0),
        decay: DecayConfig::disabled(),
        top_k: k,
        ..SearchConfig::default()
    }
}

/// Top `k` papers under AND semantics, ranked by the unweighted sum of
/// per-field BM25 scores.
pub fn and_search(index: &Index, query: &AndQuery, k: usize) -> Result<Vec<RankedHit>, SearchError> {
    let allowed = and_candidates(index, query)?;
    let cfg = baseline_config(k);
    let scored = score_candidates(index, &query.subqueries, &cfg)?;
    let hits = scored
        .into_iter()
        .filter(|c| allowed.contains(&c.doc))
        .map(|c| combine(&index.record(c.doc).paper_id, c.field_scores, 1.0, &cfg.weights))
        .collect();
    Ok(finalize_hits(hits, &cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PaperRecord, PubDate, PublicationDates};
    use crate::ranking::{candidate_docs, SubqueryKind};

    fn paper(id: &str, journal: &str, authors: &[&str], date: &str) -> PaperRecord {
        PaperRecord::new(
            id,
            None,
            "title",
            "",
            journal,
            None,
            vec![],
            authors.iter().map(|s| s.to_string()).collect(),
            vec![],
            PublicationDates {
                online_pub: Some(PubDate::exact(date.parse().unwrap())),
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn fixture() -> Index {
        Index::build(vec![
            paper("no-journal", "Thorax", &["Jane Doe"], "2020-03-01"),
            paper("too-old", "Heart", &["Jane Doe"], "2020-01-01"),
            paper("in-window", "Heart", &["Jane Doe", "Li Wei"], "2020-02-20"),
            paper("edge", "Heart", &["Jane Doe"], "2020-04-15"),
            paper("past-edge", "Heart", &["Jane Doe"], "2020-04-16"),
        ])
        .unwrap()
    }

    fn aujo() -> AndQuery {
        let q = Query::new(None)
            .with_text(SubqueryKind::Au, "Jane Doe")
            .with_text(SubqueryKind::Jo, "Heart");
        AndQuery::new(q, "2020-03-01".parse().unwrap())
    }

    #[test]
    fn and_semantics_and_window() {
        let idx = fixture();
        let hits = and_search(&idx, &aujo(), 10).unwrap();
        let ids: Vec<&str> = hits.iter().map(|h| h.paper_id.as_str()).collect();
        assert!(!ids.contains(&"no-journal"));
        assert!(!ids.contains(&"too-old"));
        assert!(ids.contains(&"in-window"));
        // 2020-03-01 + 45 days = 2020-04-15.
        assert!(ids.contains(&"edge"));
        assert!(!ids.contains(&"past-edge"));
        assert!(hits.iter().all(|h| h.date_score == 1.0 && h.final_score == h.weighted_score));
    }

    #[test]
    fn subset_of_main_candidates() {
        let idx = fixture();
        let q = aujo();
        let and = and_candidates(&idx, &q).unwrap();
        let or = candidate_docs(&idx, &q.subqueries);
        assert!(and.is_subset(&or));
    }

    #[test]
    fn adding_subquery_shrinks() {
        let idx = fixture();
        let q = aujo();
        let before = and_candidates(&idx, &q).unwrap();
        let mut more = q.clone();
        more.subqueries.set_tokens(SubqueryKind::Au, vec!["li".into(), "wei".into()]);
        let after = and_candidates(&idx, &more).unwrap();
        assert!(after.is_subset(&before));
        assert_eq!(after.len(), 1);
    }

    #[test]
    fn rejects_empty_and_bad_window() {
        let idx = fixture();
        let empty = AndQuery::new(Query::new(None), "2020-01-01".parse().unwrap());
        assert!(matches!(and_search(&idx, &empty, 3), Err(SearchError::EmptyQuery)));
        let mut bad = aujo();
        bad.window_days = 0;
        assert!(and_search(&idx, &bad, 3).is_err());
    }
}
