use std::collections::BTreeSet;

use chrono::NaiveDate;
use paperlink::corpus::expand_journal_aliases;
use paperlink::eval::{AblationRow, AblationSpec, Backend, Dataset, Evaluator, Features, WeightGrid};
use paperlink::extraction::{build_query, JournalGazetteer, RuleExtractor};
use paperlink::ranking::search;
use paperlink::synth::{generate, SynthConfig};
use paperlink::{Index, JournalAliasTable, NewsArticle, PaperRecord, PubDate, PublicationDates, SearchConfig, SubqueryKind, Weights};

fn d(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn paper(id: &str, authors: &[&str], journal: &str) -> PaperRecord {
    PaperRecord::new(
        id,
        None,
        format!("Paper {id}"),
        "",
        journal,
        None,
        vec![],
        authors.iter().map(|s| s.to_string()).collect(),
        vec![],
        PublicationDates {
            online_pub: Some(PubDate::exact(d("2020-05-01"))),
            ..Default::default()
        },
    )
    .unwrap()
}

fn article(id: &str, body: String, gold: &str) -> NewsArticle {
    NewsArticle::new(id, "test", "Headline", body, d("2020-05-10"), Some(gold.to_string())).unwrap()
}

const FIELDS: &[&str] = &["Botany", "Geology", "Zoology", "Optics", "Acoustics", "Mycology", "Virology", "Ecology"];
const EXTRAS: &[&str] = &[
    "Xavier Quill", "Yolanda Rusk", "Zachary Tamm", "Wilma Underhay", "Vance Oxley", "Ursula Pike",
    "Trevor Nash", "Sylvia Mott",
];

/// Every article names two hub authors who co-sign many papers, one
/// outside expert, and a journal. The gold paper is the hubs' paper in that
/// journal; a rival lists the hubs plus the expert in an unrelated journal,
/// and two unrelated papers share the journal. Only a journal weight well
/// above the author weight ranks the gold first.
fn journal_dominant_dataset() -> Dataset {
    let hubs = ["Hubert Hale", "Imogen Irwin"];
    let mut papers = Vec::new();
    let mut news = Vec::new();
    for (i, (field, extra)) in FIELDS.iter().zip(EXTRAS).enumerate() {
        let journal = format!("Annals of {field}");
        let gold = format!("z-gold-{i}");
        papers.push(paper(&gold, &hubs, &journal));
        papers.push(paper(&format!("m-rival-{i}"), &[hubs[0], hubs[1], extra], "Generic Reports"));
        papers.push(paper(&format!("a-fill-{i}-1"), &["Nobody Special"], &journal));
        papers.push(paper(&format!("a-fill-{i}-2"), &["Someone Else"], &journal));
        let body = format!(
            "\"This is exciting,\" said {}, who led the research. {}, a co-author, agreed. \
             The study was published in the {journal} this week. \
             \"It is a solid result,\" said {extra}, who was not involved.",
            hubs[0], hubs[1]
        );
        news.push(article(&format!("n{i}"), body, &gold));
    }
    Dataset {
        papers,
        aliases: JournalAliasTable::new(),
        news,
    }
}

fn small_benchmark() -> Dataset {
    generate(&SynthConfig {
        articles: 60,
        same_group_far: 25,
        companions: 15,
        editorials: 10,
        lead_commentaries: 15,
        same_topic: 25,
        ..SynthConfig::default()
    })
    .dataset
}

fn kinds(s: &str) -> BTreeSet<SubqueryKind> {
    SubqueryKind::parse_set(s).unwrap()
}

#[test]
fn grid_search_equals_independent_per_point_evaluation() {
    let data = small_benchmark();
    let ev = Evaluator::new(&data).unwrap();
    let all = kinds("au,jo,af,ti,co");
    let base = SearchConfig {
        decay: paperlink::ranking::DecayConfig::disabled(),
        ..SearchConfig::default()
    };
    let grid = WeightGrid {
        au: vec![0.0, 1.0],
        jo: vec![0.0, 1.5],
        af: vec![0.0, 0.3],
        ti: vec![0.0, 0.3],
        co: vec![0.0, 2.0],
    };
    let report = ev.grid_search_weights(&all, &base, true, &grid).unwrap();
    assert_eq!(report.points.len(), 32);
    let mut best: Option<(Weights, f64)> = None;
    for point in &report.points {
        let row = AblationRow {
            label: "point".into(),
            kinds: all.clone(),
            features: Features {
                decay: false,
                ..Features::ALL
            },
            backend: Backend::Main,
        };
        let cfg = SearchConfig {
            weights: point.weights,
            ..base
        };
        let direct = ev.run_row(&row, &cfg).top(1);
        assert_eq!(point.top1, direct, "grid point {:?}", point.weights);
        if best.map_or(true, |(_, b)| direct > b) {
            best = Some((point.weights, direct));
        }
    }
    let (w, top1) = best.unwrap();
    assert_eq!(report.best_weights, w);
    assert_eq!(report.best_top1, top1);
    // Reproducible.
    assert_eq!(ev.grid_search_weights(&all, &base, true, &grid).unwrap(), report);
}

#[test]
fn single_point_grid_matches_evaluate() {
    let data = small_benchmark();
    let ev = Evaluator::new(&data).unwrap();
    let base = SearchConfig::default();
    let all = kinds("au,jo,af,ti,co");
    let report = ev
        .grid_search_weights(&all, &base, true, &WeightGrid::single(base.weights))
        .unwrap();
    assert_eq!(report.points.len(), 1);
    assert_eq!(report.best_weights, base.weights);
    let row = AblationRow::new("full", "au,jo,af,ti,co", Features::ALL, Backend::Main);
    assert_eq!(report.best_top1, ev.run_row(&row, &base).top(1));
}

#[test]
fn grid_ties_go_to_the_lexicographically_smaller_vector() {
    let data = small_benchmark();
    let ev = Evaluator::new(&data).unwrap();
    // With one active kind, scaling its weight never changes the ranking.
    let grid = WeightGrid {
        au: vec![2.0, 1.0, 0.5],
        jo: vec![0.7],
        af: vec![0.0],
        ti: vec![0.0],
        co: vec![0.0],
    };
    let report = ev.grid_search_weights(&kinds("au"), &SearchConfig::default(), true, &grid).unwrap();
    assert!(report.points.windows(2).all(|p| p[0].top1 == p[1].top1));
    assert_eq!(report.best_weights.au, 0.5);
}

#[test]
fn journal_dominant_fixture_prefers_journal_weight() {
    let data = journal_dominant_dataset();
    let ev = Evaluator::new(&data).unwrap();
    let report = ev
        .grid_search_weights(&kinds("au,jo"), &SearchConfig::default(), false, &WeightGrid::default())
        .unwrap();
    assert_eq!(report.best_top1, 1.0);
    assert!(report.best_weights.jo >= report.best_weights.au, "{:?}", report.best_weights);
    assert!(report.best_weights.au > 0.0);
    // Equal weights lose every article to the rival paper.
    let row = AblationRow::new("flat", "au,jo", Features::ALL, Backend::Main);
    let flat = SearchConfig {
        weights: Weights::uniform(1.0),
        ..SearchConfig::default()
    };
    assert_eq!(ev.run_row(&row, &flat).top(1), 0.0);
}

#[test]
fn harness_adds_nothing_to_direct_search() {
    let synth = generate(&SynthConfig::default());
    let data = &synth.dataset;
    let ev = Evaluator::new(data).unwrap();
    let row = AblationRow::new("Baseline (AuJo)", "au,jo", Features::NONE, Backend::Main);
    let base = SearchConfig::default();
    let result = ev.run_row(&row, &base);

    let plain = Index::build(data.papers.clone()).unwrap();
    let expanded: Vec<PaperRecord> = data.papers.iter().cloned().map(|r| expand_journal_aliases(r, &data.aliases)).collect();
    let mut gaz = JournalGazetteer::from_records(&expanded);
    gaz.add_table(&data.aliases);
    let cfg = SearchConfig {
        top_k: 5,
        ..row.search_config(&base)
    };
    for (news, outcome) in data.news.iter().zip(&result.outcomes) {
        let q = build_query(news, &gaz, &RuleExtractor, &row.kinds).unwrap();
        let hits = search(&plain, &q, &cfg).unwrap();
        let rank = hits.iter().find(|h| Some(&h.paper_id) == news.gold_paper_id.as_ref()).map(|h| h.rank);
        assert_eq!(outcome.gold_rank, rank, "{}", news.news_id);
    }
}

#[test]
fn perfect_fixture_scores_one_and_missing_gold_is_excluded() {
    let mut data = journal_dominant_dataset();
    let body = data.news[0].body.clone();
    data.news.push(article("orphan", body, "not-in-corpus"));
    let ev = Evaluator::new(&data).unwrap();
    assert_eq!(ev.excluded().len(), 1);
    assert_eq!(ev.excluded()[0].news_id, "orphan");
    let base = SearchConfig {
        weights: Weights {
            au: 0.1,
            jo: 1.5,
            ..Weights::ZERO
        },
        ..SearchConfig::default()
    };
    let spec = AblationSpec {
        rows: vec![AblationRow::new("AuJo", "au,jo", Features::ALL, Backend::Main)],
    };
    let report = ev.run_ablation(&spec, &base).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].n, FIELDS.len());
    assert_eq!(report.rows[0].top(1), 1.0);
    let table = report.to_table();
    assert!(table.lines().count() == 2 && table.contains("AuJo"), "{table}");
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["rows"][0]["accuracy"]["1"], 1.0);
}

#[test]
fn five_row_metadata_report() {
    let data = small_benchmark();
    let ev = Evaluator::new(&data).unwrap();
    let report = ev.run_ablation(&AblationSpec::metadata(), &SearchConfig::default()).unwrap();
    let labels: Vec<&str> = report.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, ["AuJo", "AuJoTi", "AuJoAf", "AuJoCo", "AuJoAfTiCo"]);
    let full = report.row("AuJoAfTiCo").unwrap();
    assert!(full.top(1) >= report.row("AuJo").unwrap().top(1));
    for r in &report.rows {
        assert!(r.top(1) <= r.top(3) && r.top(3) <= r.top(5));
    }
}
