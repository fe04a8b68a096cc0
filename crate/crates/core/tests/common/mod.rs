//! Random corpora and queries shared by the integration tests.
#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use paperlink::ranking::{DecayConfig, FieldB, SearchConfig};
use paperlink::{PaperRecord, PubDate, PublicationDates, Query, SubqueryKind, Weights};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn base_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 1, 1).unwrap()
}

/// Skewed draw from `0..n`, so that some terms are common and most rare.
fn skewed(rng: &mut impl Rng, n: usize) -> usize {
    let u: f64 = rng.gen();
    ((u * u * u) * n as f64) as usize % n
}

fn words(rng: &mut impl Rng, prefix: &str, vocab: usize, lo: usize, hi: usize) -> Vec<String> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| format!("{prefix}{}", skewed(rng, vocab))).collect()
}

pub struct CorpusShape {
    pub vocab: usize,
    pub names: usize,
    pub journals: usize,
}

pub fn random_dates(rng: &mut impl Rng) -> PublicationDates {
    let d = base_date() + Duration::days(rng.gen_range(0..1500));
    let near = |rng: &mut dyn rand::RngCore, days: i64| d + Duration::days(rng.gen_range(0..=days));
    match rng.gen_range(0..4) {
        0 => PublicationDates {
            online_pub: Some(PubDate::exact(d)),
            ..Default::default()
        },
        1 => PublicationDates {
            journal_pub: Some(PubDate::exact(d)),
            pubmed_pub: Some(PubDate::exact(near(rng, 60))),
            ..Default::default()
        },
        2 => PublicationDates {
            pubmed_pub: Some(PubDate::exact(d)),
            ..Default::default()
        },
        _ => PublicationDates {
            journal_pub: Some(PubDate::year_only(2019)),
            accepted: Some(PubDate::exact(near(rng, 300))),
            ..Default::default()
        },
    }
}

/// `n` random records. Fields are sometimes empty so that per-field
/// statistics over nonempty documents get exercised.
pub fn random_corpus(rng: &mut impl Rng, n: usize) -> (Vec<PaperRecord>, CorpusShape) {
    let shape = CorpusShape {
        vocab: rng.gen_range(30..300),
        names: rng.gen_range(20..200),
        journals: rng.gen_range(3..25),
    };
    let records = (0..n)
        .map(|i| {
            let title = words(rng, "w", shape.vocab, 1, 12).join(" ");
            let abstract_text = if rng.gen_bool(0.2) {
                String::new()
            } else {
                words(rng, "w", shape.vocab, 5, 80).join(" ")
            };
            let n_authors = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=15) };
            let authors = (0..n_authors)
                .map(|_| format!("G{} S{}", skewed(rng, shape.names / 4 + 1), skewed(rng, shape.names)))
                .collect();
            let affiliations = (0..rng.gen_range(0..=3))
                .map(|_| format!("Inst{} University", skewed(rng, 40)))
                .collect();
            let j = rng.gen_range(0..shape.journals);
            let aliases = if rng.gen_bool(0.3) { vec![format!("J{j} Abbr")] } else { vec![] };
            PaperRecord::new(
                format!("p{:05}", i * 7 % 100_000),
                None,
                title,
                abstract_text,
                format!("Journal {j} of Things"),
                None,
                aliases,
                authors,
                affiliations,
                random_dates(rng),
            )
            .unwrap()
        })
        .collect();
    (records, shape)
}

pub fn random_query(rng: &mut impl Rng, shape: &CorpusShape) -> Query {
    let date = rng
        .gen_bool(0.9)
        .then(|| base_date() + Duration::days(rng.gen_range(-100..1600)));
    loop {
        let mut q = Query::new(date);
        for kind in SubqueryKind::ALL {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let mut tokens = match kind {
                SubqueryKind::Au => words(rng, "s", shape.names, 1, 8),
                SubqueryKind::Jo => vec!["journal".into(), format!("{}", rng.gen_range(0..shape.journals + 2))],
                SubqueryKind::Af => vec![format!("inst{}", rng.gen_range(0..45)), "university".into()],
                SubqueryKind::Ti => words(rng, "w", shape.vocab, 1, 10),
                SubqueryKind::Co => words(rng, "w", shape.vocab, 5, 60),
            };
            if rng.gen_bool(0.2) {
                tokens.push("unseen".into());
            }
            if rng.gen_bool(0.2) {
                let dup = tokens[0].clone();
                tokens.push(dup);
            }
            q.set_tokens(kind, tokens);
        }
        if !q.is_empty() {
            return q;
        }
    }
}

pub fn random_config(rng: &mut impl Rng) -> SearchConfig {
    let mut b = FieldB::default();
    for v in [&mut b.authors, &mut b.journal, &mut b.affiliations, &mut b.title, &mut b.abstract_, &mut b.content] {
        *v = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..=1.0) };
    }
    let mut w = [0.0; 5];
    for x in &mut w {
        *x = if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.0..2.0) };
    }
    let decay = if rng.gen_bool(0.2) {
        DecayConfig::disabled()
    } else {
        DecayConfig {
            enabled: true,
            offset_days: rng.gen_range(0..30),
            half_life_days: rng.gen_range(20..400),
            decay_at_half_life: rng.gen_range(0.1..0.9),
        }
    };
    SearchConfig {
        k1: rng.gen_range(0.0..3.0),
        b,
        weights: Weights::from_array(w),
        decay,
        min_score_threshold: if rng.gen_bool(0.2) { rng.gen_range(0.0..3.0) } else { 0.0 },
        top_k: rng.gen_range(1..=50),
    }
}

pub fn shuffled<T: Clone>(rng: &mut impl Rng, items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
