//! Top-k accuracy harness, ablation runs and subquery-weight grid search.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::baseline::{and_search, AndQuery};
use crate::corpus::{expand_journal_aliases, JournalAliasTable, NewsArticle, PaperRecord};
use crate::error::{IndexError, SearchError};
use crate::extraction::{extract_metadata, query_from_metadata, ExtractedMetadata, ExtractorPlugin, JournalGazetteer, RuleExtractor};
use crate::index::{DocId, Index};
use crate::ranking::{score_candidates, search, weighted_score, CandidateScores, Query, SearchConfig, SubqueryKind, Weights};

/// Cutoffs reported by default.
pub const DEFAULT_KS: [usize; 3] = [1, 3, 5];

/// A paired evaluation set: papers (aliases not yet expanded), the alias
/// table, and news articles carrying gold paper ids.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub papers: Vec<PaperRecord>,
    pub aliases: JournalAliasTable,
    pub news: Vec<NewsArticle>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub news_id: String,
    pub gold_paper_id: String,
    /// 1-based rank of the gold paper, `None` when it was not retrieved.
    pub gold_rank: Option<usize>,
}

/// Fraction of outcomes whose gold paper ranks within the top `k`.
pub fn top_k_accuracy(outcomes: &[Outcome], k: usize) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    let hits = outcomes
        .iter()
        .filter(|o| o.gold_rank.is_some_and(|r| r <= k))
        .count();
    hits as f64 / outcomes.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub news_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub label: String,
    pub accuracy: BTreeMap<usize, f64>,
    pub n: usize,
    pub outcomes: Vec<Outcome>,
    pub mean_latency_secs: f64,
    pub excluded: Vec<Excluded>,
}

impl EvalResult {
    pub fn top(&self, k: usize) -> f64 {
        self.accuracy
            .get(&k)
            .copied()
            .unwrap_or_else(|| top_k_accuracy(&self.outcomes, k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Main,
    CrossrefLike,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "main" => Ok(Backend::Main),
            "crossref-like" => Ok(Backend::CrossrefLike),
            other => Err(format!("unknown backend `{other}` (expected main or crossref-like)")),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Main => "main",
            Backend::CrossrefLike => "crossref-like",
        })
    }
}

/// The four engine features that can be switched off for ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Features {
    pub alias_expansion: bool,
    pub tuned_weights: bool,
    pub authors_b_zero: bool,
    pub decay: bool,
}

impl Features {
    pub const NONE: Features = Features {
        alias_expansion: false,
        tuned_weights: false,
        authors_b_zero: false,
        decay: false,
    };
    pub const ALL: Features = Features {
        alias_expansion: true,
        tuned_weights: true,
        authors_b_zero: true,
        decay: true,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub kinds: BTreeSet<SubqueryKind>,
    pub features: Features,
    #[serde(default)]
    pub backend: Backend,
}

impl AblationRow {
    pub fn new(label: impl Into<String>, kinds: &str, features: Features, backend: Backend) -> Self {
        Self {
            label: label.into(),
            kinds: SubqueryKind::parse_set(kinds).expect("row kinds are valid"),
            features,
            backend,
        }
    }

    /// `base` with this row's feature switches applied. Untuned weights are
    /// all 1; authors use b = 0.75 unless the b = 0 feature is on.
    pub fn search_config(&self, base: &SearchConfig) -> SearchConfig {
        let mut cfg = *base;
        if !self.features.tuned_weights {
            cfg.weights = Weights::uniform(1.0);
        }
        cfg.b.authors = if self.features.authors_b_zero { 0.0 } else { crate::ranking::DEFAULT_B };
        cfg.decay.enabled = self.features.decay;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub rows: Vec<AblationRow>,
}

impl AblationSpec {
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for row in &self.rows {
            if !seen.insert(row.label.as_str()) {
                return Err(format!("duplicate ablation label `{}`", row.label));
            }
            if row.kinds.is_empty() {
                return Err(format!("ablation row `{}` enables no subquery kind", row.label));
            }
        }
        Ok(())
    }

    /// Author + journal queries with each engine feature added alone, then all four.
    pub fn features() -> Self {
        let one = |f: fn(&mut Features)| {
            let mut x = Features::NONE;
            f(&mut x);
            x
        };
        Self {
            rows: vec![
                AblationRow::new("Baseline (AuJo)", "au,jo", Features::NONE, Backend::Main),
                AblationRow::new("+ Alternative journal names", "au,jo", one(|f| f.alias_expansion = true), Backend::Main),
                AblationRow::new("+ Tuned subquery weights", "au,jo", one(|f| f.tuned_weights = true), Backend::Main),
                AblationRow::new("+ BM25 b=0 for authors", "au,jo", one(|f| f.authors_b_zero = true), Backend::Main),
                AblationRow::new("+ Date decay scoring", "au,jo", one(|f| f.decay = true), Backend::Main),
                AblationRow::new("All four features", "au,jo", Features::ALL, Backend::Main),
            ],
        }
    }

    /// Metadata combinations with all features on.
    pub fn metadata() -> Self {
        Self {
            rows: ["au,jo", "au,jo,ti", "au,jo,af", "au,jo,co", "au,jo,af,ti,co"]
                .into_iter()
                .map(|k| {
                    let kinds = SubqueryKind::parse_set(k).unwrap();
                    AblationRow {
                        label: SubqueryKind::label(&kinds),
                        kinds,
                        features: Features::ALL,
                        backend: Backend::Main,
                    }
                })
                .collect(),
        }
    }

    /// The AND-semantics baseline next to the main engine, on identical
    /// five-kind queries.
    pub fn backends() -> Self {
        Self {
            rows: vec![
                AblationRow::new("crossref-like", "au,jo,af,ti,co", Features::ALL, Backend::CrossrefLike),
                AblationRow::new("main", "au,jo,af,ti,co", Features::ALL, Backend::Main),
            ],
        }
    }
}

struct Prepared {
    article: usize,
    gold: DocId,
    meta: ExtractedMetadata,
}

/// Holds indexes and extracted metadata for repeated evaluation runs over
/// one dataset.
pub struct Evaluator {
    news: Vec<NewsArticle>,
    plain: Index,
    expanded: Index,
    prepared: Vec<Prepared>,
    excluded: Vec<Excluded>,
    /// Number of retrieved results inspected for the gold rank.
    depth: usize,
    ks: Vec<usize>,
}

impl Evaluator {
    pub fn new(dataset: &Dataset) -> Result<Self, IndexError> {
        Self::with_plugin(dataset, &RuleExtractor)
    }

    pub fn with_plugin(dataset: &Dataset, plugin: &dyn ExtractorPlugin) -> Result<Self, IndexError> {
        let plain = Index::build(dataset.papers.iter().cloned())?;
        let expanded = Index::build(
            dataset
                .papers
                .iter()
                .cloned()
                .map(|r| expand_journal_aliases(r, &dataset.aliases)),
        )?;
        // The extractor knows every name, whether or not the index does.
        let mut gazetteer = JournalGazetteer::from_records(expanded.records());
        gazetteer.add_table(&dataset.aliases);
        let mut prepared = Vec::new();
        let mut excluded = Vec::new();
        for (i, news) in dataset.news.iter().enumerate() {
            let gold = match news.gold_paper_id.as_deref() {
                None => Err("article has no gold_paper_id".to_string()),
                Some(id) => plain
                    .doc_id(id)
                    .ok_or_else(|| format!("gold paper `{id}` is not in the corpus")),
            };
            match gold {
                Ok(gold) => prepared.push(Prepared {
                    article: i,
                    gold,
                    meta: extract_metadata(news, &gazetteer, plugin),
                }),
                Err(reason) => {
                    warn!("excluding article {}: {reason}", news.news_id);
                    excluded.push(Excluded {
                        news_id: news.news_id.clone(),
                        reason,
                    });
                }
            }
        }
        Ok(Self {
            news: dataset.news.clone(),
            plain,
            expanded,
            prepared,
            excluded,
            depth: *DEFAULT_KS.iter().max().unwrap(),
            ks: DEFAULT_KS.to_vec(),
        })
    }

    /// Reports accuracy at `ks` (the deepest cutoff sets the retrieval depth).
    pub fn with_ks(mut self, ks: &[usize]) -> Self {
        let mut ks: Vec<usize> = ks.iter().copied().filter(|&k| k > 0).collect();
        ks.sort_unstable();
        ks.dedup();
        if !ks.is_empty() {
            self.depth = *ks.last().unwrap();
            self.ks = ks;
        }
        self
    }

    pub fn index(&self, alias_expansion: bool) -> &Index {
        if alias_expansion {
            &self.expanded
        } else {
            &self.plain
        }
    }

    pub fn excluded(&self) -> &[Excluded] {
        &self.excluded
    }

    /// Evaluated articles, in dataset order.
    pub fn articles(&self) -> impl Iterator<Item = &NewsArticle> {
        self.prepared.iter().map(|p| &self.news[p.article])
    }

    /// The query each article produces for `kinds`.
    pub fn queries(&self, kinds: &BTreeSet<SubqueryKind>) -> Vec<Query> {
        self.prepared
            .iter()
            .map(|p| query_from_metadata(&p.meta, Some(self.news[p.article].release_date), kinds))
            .collect()
    }

    pub fn run_row(&self, row: &AblationRow, base: &SearchConfig) -> EvalResult {
        let cfg = SearchConfig {
            top_k: self.depth,
            ..row.search_config(base)
        };
        let index = self.index(row.features.alias_expansion);
        let mut outcomes = Vec::with_capacity(self.prepared.len());
        let mut elapsed = 0.0;
        for (p, query) in self.prepared.iter().zip(self.queries(&row.kinds)) {
            let news = &self.news[p.article];
            let started = Instant::now();
            let hits = match row.backend {
                Backend::Main => search(index, &query, &cfg),
                Backend::CrossrefLike => and_search(index, &AndQuery::new(query, news.release_date), self.depth),
            };
            elapsed += started.elapsed().as_secs_f64();
            let gold_id = &index.record(p.gold).paper_id;
            let gold_rank = match hits {
                Ok(hits) => hits.iter().find(|h| &h.paper_id == gold_id).map(|h| h.rank),
                Err(SearchError::EmptyQuery) => None,
                Err(e) => {
                    warn!("article {}: {e}", news.news_id);
                    None
                }
            };
            outcomes.push(Outcome {
                news_id: news.news_id.clone(),
                gold_paper_id: gold_id.clone(),
                gold_rank,
            });
        }
        let n = outcomes.len();
        EvalResult {
            label: row.label.clone(),
            accuracy: self.ks.iter().map(|&k| (k, top_k_accuracy(&outcomes, k))).collect(),
            n,
            outcomes,
            mean_latency_secs: if n == 0 { 0.0 } else { elapsed / n as f64 },
            excluded: self.excluded.clone(),
        }
    }

    pub fn run_ablation(&self, spec: &AblationSpec, base: &SearchConfig) -> Result<AblationReport, String> {
        spec.validate()?;
        Ok(AblationReport {
            rows: spec.rows.iter().map(|row| self.run_row(row, base)).collect(),
        })
    }

    /// Exhaustive search over the Cartesian product of `grid`, maximizing
    /// top-1 accuracy of the main engine with `kinds` and `base` settings.
    /// Ties go to the lexicographically smaller (au, jo, af, ti, co) vector.
    pub fn grid_search_weights(
        &self,
        kinds: &BTreeSet<SubqueryKind>,
        base: &SearchConfig,
        alias_expansion: bool,
        grid: &WeightGrid,
    ) -> Result<GridReport, String> {
        let axes = grid.axes()?;
        base.validate()?;
        let index = self.index(alias_expansion);
        let problems: Vec<Top1Problem> = self
            .prepared
            .iter()
            .zip(self.queries(kinds))
            .map(|(p, q)| Top1Problem::new(index, &q, base, p.gold))
            .collect();
        let n = problems.len();
        let mut points = Vec::new();
        let mut best: Option<(Weights, f64)> = None;
        for w in cartesian(&axes) {
            let weights = Weights::from_array(w);
            let hits = problems.iter().filter(|p| p.gold_is_top1(&weights, base.min_score_threshold)).count();
            let top1 = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
            if best.map_or(true, |(_, b)| top1 > b) {
                best = Some((weights, top1));
            }
            points.push(GridPoint { weights, top1 });
        }
        let (best_weights, best_top1) = best.expect("grid has at least one point");
        Ok(GridReport {
            best_weights,
            best_top1,
            n,
            points,
        })
    }
}

/// Precomputed candidate scores for deciding, per weight vector, whether the
/// gold paper would be ranked first by [`search`].
struct Top1Problem {
    gold: Option<CandidateScores>,
    gold_id: String,
    /// Candidates not provably beaten by the gold for every weight vector.
    rivals: Vec<(String, CandidateScores)>,
    /// Every other candidate, used when the gold's score is zero.
    all: Vec<(String, CandidateScores)>,
}

impl Top1Problem {
    fn new(index: &Index, query: &Query, cfg: &SearchConfig, gold: DocId) -> Self {
        let gold_id = index.record(gold).paper_id.clone();
        let scored = match score_candidates(index, query, cfg) {
            Ok(s) => s,
            Err(_) => {
                return Self {
                    gold: None,
                    gold_id,
                    rivals: vec![],
                    all: vec![],
                }
            }
        };
        let gold_scores = scored.iter().find(|c| c.doc == gold).cloned();
        let others: Vec<(String, CandidateScores)> = scored
            .into_iter()
            .filter(|c| c.doc != gold)
            .map(|c| (index.record(c.doc).paper_id.clone(), c))
            .collect();
        let rivals = match &gold_scores {
            None => vec![],
            Some(g) => {
                let gv = g.field_scores.to_array().map(|s| s * g.date_score);
                others
                    .iter()
                    .filter(|(_, c)| {
                        let cv = c.field_scores.to_array().map(|s| s * c.date_score);
                        // Dominated with a margin far above rounding error.
                        let dominated = (0..5).all(|i| {
                            if gv[i] == 0.0 {
                                cv[i] == 0.0
                            } else {
                                cv[i] <= gv[i] * (1.0 - 1e-9)
                            }
                        });
                        !dominated
                    })
                    .cloned()
                    .collect()
            }
        };
        Self {
            gold: gold_scores,
            gold_id,
            rivals,
            all: others,
        }
    }

    fn gold_is_top1(&self, weights: &Weights, threshold: f64) -> bool {
        let Some(g) = &self.gold else {
            return false;
        };
        let final_of = |c: &CandidateScores| c.date_score * weighted_score(&c.field_scores, weights);
        let gold_final = final_of(g);
        if gold_final < threshold {
            return false;
        }
        let pool = if gold_final > 0.0 { &self.rivals } else { &self.all };
        pool.iter().all(|(id, c)| {
            let f = final_of(c);
            f < gold_final || (f == gold_final && self.gold_id < *id)
        })
    }
}

fn cartesian(axes: &[Vec<f64>; 5]) -> impl Iterator<Item = [f64; 5]> + '_ {
    let sizes = axes.each_ref().map(Vec::len);
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut idx| {
        let mut out = [0.0; 5];
        for axis in (0..5).rev() {
            out[axis] = axes[axis][idx % sizes[axis]];
            idx /= sizes[axis];
        }
        out
    })
}

/// Candidate values per subquery weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightGrid {
    pub au: Vec<f64>,
    pub jo: Vec<f64>,
    pub af: Vec<f64>,
    pub ti: Vec<f64>,
    pub co: Vec<f64>,
}

impl Default for WeightGrid {
    fn default() -> Self {
        let values = vec![0.0, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 2.0];
        Self {
            au: values.clone(),
            jo: values.clone(),
            af: values.clone(),
            ti: values.clone(),
            co: values,
        }
    }
}

impl WeightGrid {
    pub fn single(w: Weights) -> Self {
        Self {
            au: vec![w.au],
            jo: vec![w.jo],
            af: vec![w.af],
            ti: vec![w.ti],
            co: vec![w.co],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    fn axes(&self) -> Result<[Vec<f64>; 5], String> {
        let mut out: [Vec<f64>; 5] = [self.au.clone(), self.jo.clone(), self.af.clone(), self.ti.clone(), self.co.clone()];
        for (axis, kind) in out.iter_mut().zip(SubqueryKind::ALL) {
            if axis.is_empty() {
                return Err(format!("grid for `{kind}` is empty"));
            }
            if axis.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(format!("grid for `{kind}` has a negative or non-finite weight"));
            }
            axis.sort_by(f64::total_cmp);
            axis.dedup();
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub weights: Weights,
    pub top1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub best_weights: Weights,
    pub best_top1: f64,
    pub n: usize,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<EvalResult>,
}

impl AblationReport {
    pub fn row(&self, label: &str) -> Option<&EvalResult> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Aligned plain-text table: one line per row.
    pub fn to_table(&self) -> String {
        let ks: BTreeSet<usize> = self.rows.iter().flat_map(|r| r.accuracy.keys().copied()).collect();
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(10);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "Experiment");
        for k in &ks {
            let _ = write!(out, "  {:>6}", format!("Top-{k}"));
        }
        let _ = writeln!(out, "  {:>10}  {:>5}", "Time (ms)", "n");
        for r in &self.rows {
            let _ = write!(out, "{:<width$}", r.label);
            for k in &ks {
                let _ = write!(out, "  {:>6.3}", r.top(*k));
            }
            let _ = writeln!(out, "  {:>10.4}  {:>5}", r.mean_latency_secs * 1e3, r.n);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
