//! Seeded generator for a paired news/paper benchmark.
//!
//! Research groups publish gold papers and look-alike distractors (the same
//! group in the same journal at other dates, near-simultaneous companion
//! papers, single-author commentaries by experts quoted in the news,
//! same-topic work from other groups). Each news article reports one gold
//! paper: it names the journal (half the time through an abbreviated
//! alias), two to four authors and one affiliation, carries a noised
//! headline, and is released 0–30 days after the paper's earliest date.

use chrono::{Datelike, Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{JournalAliasTable, NewsArticle, PaperRecord, PubDate, PublicationDates};
use crate::eval::Dataset;

/// Seed of the committed benchmark.
pub const DEFAULT_SEED: u64 = 20_210_611;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    /// Gold papers; one news article is written per gold paper.
    pub articles: usize,
    pub same_group_far: usize,
    pub companions: usize,
    /// Commentaries by experts quoted in the article.
    pub editorials: usize,
    /// Single-author commentaries by the gold paper's lead author.
    pub lead_commentaries: usize,
    pub same_topic: usize,
    /// Probability that an article names the journal through an alias.
    pub alias_rate: f64,
    pub max_release_lag_days: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            articles: 200,
            same_group_far: 70,
            companions: 40,
            editorials: 30,
            lead_commentaries: 60,
            same_topic: 100,
            alias_rate: 0.5,
            max_release_lag_days: 30,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn paper_count(&self) -> usize {
        self.articles + self.same_group_far + self.companions + self.editorials + self.lead_commentaries + self.same_topic
    }
}

/// What the generator embedded in one article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleTruth {
    pub news_id: String,
    pub gold_paper_id: String,
    pub journal_surface: String,
    pub via_alias: bool,
    pub authors_mentioned: Vec<String>,
    pub affiliation: String,
    pub release_lag_days: i64,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub dataset: Dataset,
    pub truth: Vec<ArticleTruth>,
}

const JOURNALS: &[(&str, &[&str])] = &[
    ("Annals of Clinical Neurology", &["Ann Clin Neurol"]),
    ("Journal of Cardiovascular Outcomes", &["J Cardiovasc Outc", "JCVO"]),
    ("British Review of Respiratory Medicine", &["Br Rev Respir Med"]),
    ("International Journal of Epidemiological Methods", &["Int J Epidemiol Meth"]),
    ("Pediatric Infection Reports", &["Pediatr Infect Rep"]),
    ("Oncology Frontiers", &["Oncol Front"]),
    ("Archives of Metabolic Disease", &["Arch Metab Dis"]),
    ("Clinical Immunology Letters", &["Clin Immunol Lett"]),
    ("Journal of Psychiatric Science", &["J Psychiatr Sci"]),
    ("Global Health Perspectives", &["Glob Health Perspect", "GHP"]),
    ("Nephrology and Dialysis Review", &["Nephrol Dial Rev"]),
    ("Journal of Hepatic Research", &["J Hepat Res"]),
    ("Endocrine Practice Quarterly", &["Endocr Pract Q"]),
    ("Reproductive Medicine Today", &["Reprod Med Today"]),
    ("Journal of Surgical Innovation", &["J Surg Innov"]),
    ("Dermatology Research and Practice", &["Dermatol Res Pract"]),
    ("Annual Review of Gerontology", &["Annu Rev Gerontol"]),
    ("Journal of Nutritional Biochemistry Studies", &["J Nutr Biochem Stud"]),
    ("Ophthalmic Science Reports", &["Ophthalmol Sci Rep"]),
    ("Tropical Disease Bulletin", &["Trop Dis Bull"]),
    ("Journal of Vaccine Development", &["J Vacc Dev"]),
    ("Sleep Medicine Communications", &["Sleep Med Commun"]),
    ("Rheumatology Advances", &["Rheumatol Adv"]),
    ("Hematology Open", &["Hematol Open"]),
    ("Proceedings of the Society for Experimental Biology", &["Proc Soc Exp Biol", "PSEB"]),
];

const PLACES: &[&str] = &[
    "Northbridge", "Eastfield", "Kingsford", "Halden", "Marlow", "Redcliffe", "Ashbury",
    "Westmoor", "Lindon", "Carrow", "Fenwick", "Brackley", "Dunmore", "Elsworth", "Glenhaven",
    "Harrowgate", "Ivelton", "Kesgrave", "Lowther", "Morden",
];

const INSTITUTION_FORMS: &[&str] = &[
    "University of {}",
    "{} University",
    "{} Institute of Medical Research",
    "{} General Hospital",
    "{} Medical Center",
    "{} School of Public Health",
    "{} Cancer Institute",
];

const DEPARTMENTS: &[&str] = &[
    "Neurology", "Cardiology", "Medicine", "Epidemiology", "Pediatrics", "Oncology",
    "Psychiatry", "Surgery", "Immunology", "Biochemistry", "Public Health", "Genetics",
];

const GIVEN_NAMES: &[&str] = &[
    "Maria", "James", "Anna", "David", "Sofia", "Daniel", "Laura", "Thomas", "Elena", "Michael",
    "Sarah", "Peter", "Julia", "Robert", "Emma", "Lucas", "Hannah", "Martin", "Clara", "Samuel",
    "Nora", "Victor", "Alice", "Felix", "Ingrid", "Omar", "Priya", "Kenji", "Mei", "Carlos",
    "Fatima", "Ahmed", "Olga", "Pavel", "Rosa", "Tomas", "Yuki", "Amara", "Jonas", "Leila",
    "Marco", "Greta", "Hugo", "Irene", "Karim", "Lena", "Nadia", "Oscar", "Paula", "Rafael",
    "Selin", "Tariq", "Ulla", "Vera", "Wei", "Xavier", "Yara", "Zoran", "Beatriz", "Chen",
    "Adele", "Bruno", "Camille", "Dmitri", "Esther", "Fabio", "Gemma", "Hamid", "Isla", "Jakob",
    "Keiko", "Lorenzo", "Miriam", "Nikolai", "Odette", "Pedro", "Quentin", "Renata", "Stefan",
    "Tamsin", "Umar", "Valentina", "Wiktor", "Ximena", "Yusuf", "Zainab", "Agnes", "Boris",
    "Celine", "Dario", "Elif", "Farah", "Gideon", "Helga", "Ivan", "Jana", "Kwame", "Lucia",
    "Mateo", "Naomi", "Orla", "Pierre", "Rhea", "Sven", "Thea", "Uri", "Viktor", "Wanda",
    "Yosef", "Zora", "Anders", "Bianca", "Cyrus", "Delia", "Emil", "Freya", "Goran", "Hiro",
    "Ines", "Jorge", "Kira", "Luca", "Magnus", "Nia", "Otto", "Petra", "Ravi", "Sana", "Theo",
    "Ugo", "Vikram", "Willa", "Yann", "Zeynep", "Arjun", "Brigitte", "Cosmin", "Dalia",
];

const SURNAME_HEADS: &[&str] = &[
    "Ash", "Black", "Bram", "Cal", "Dun", "El", "Fair", "Gold", "Hal", "Hart", "Kel", "Lang",
    "Mar", "Nor", "Oak", "Pem", "Quin", "Rad", "Sal", "Thorn", "Ul", "Ver", "Wex", "Yar", "Zel",
    "Brook", "Crane", "Dal", "Fen", "Gar",
];

const SURNAME_TAILS: &[&str] = &[
    "wood", "ton", "ley", "ford", "man", "son", "well", "by", "worth", "field", "more", "stead",
    "ham", "ridge", "wick", "er", "din", "sey", "holt", "ing",
];

const PREFIXES: &[&str] = &[
    "neuro", "cardio", "hepato", "nephro", "immuno", "onco", "myo", "osteo", "derma", "pulmo",
    "gastro", "hemato", "endo", "retino", "glyco", "lipo", "angio", "cyto", "lympho", "thrombo",
];

const ROOTS: &[&str] = &[
    "pathy", "genesis", "toxicity", "plasticity", "fibrosis", "kinase", "receptor", "signaling",
    "lesion", "marker", "inflammation", "remodeling", "metabolism", "transport", "dysfunction",
    "regulation", "sclerosis", "trophy", "vascular", "mediated",
];

const GENERAL: &[&str] = &[
    "risk", "outcomes", "cohort", "trial", "analysis", "association", "randomized", "treatment",
    "therapy", "mortality", "incidence", "exposure", "dose", "response", "clinical",
    "population", "factors", "evidence", "effect", "reduced", "increased", "longitudinal",
    "prospective", "severity", "progression", "screening", "biomarkers", "prevalence",
    "intervention", "baseline",
];

const POPULATIONS: &[&str] = &[
    "older adults", "children", "pregnant women", "adolescents", "patients", "veterans",
    "healthy volunteers", "smokers", "infants", "care home residents",
];

const HEADLINE_WORDS: &[&str] = &[
    "new", "study", "finds", "links", "could", "help", "scientists", "say", "may", "raise",
    "hope", "signal", "research", "warns",
];

const ROLES: &[&str] = &[
    "a professor of medicine", "an epidemiologist", "a senior lecturer", "a research fellow",
    "a consultant physician", "a clinical scientist",
];

struct Person {
    given: String,
    middle: Option<char>,
    surname: String,
    institution: usize,
    department: usize,
}

impl Person {
    /// Name as it appears in a paper's author list.
    fn byline(&self) -> String {
        match self.middle {
            Some(m) => format!("{} {m}. {}", self.given, self.surname),
            None => format!("{} {}", self.given, self.surname),
        }
    }

    /// Name as a journalist writes it.
    fn spoken(&self) -> String {
        format!("{} {}", self.given, self.surname)
    }
}

struct Group {
    members: Vec<usize>,
    journals: Vec<usize>,
    topic: Vec<String>,
}

struct Draft {
    title: String,
    abstract_text: String,
    journal: usize,
    authors: Vec<usize>,
    dates: PublicationDates,
    keywords: Vec<String>,
}

struct Generator {
    rng: ChaCha8Rng,
    institutions: Vec<(String, &'static str)>,
    people: Vec<Person>,
    experts: Vec<usize>,
    groups: Vec<Group>,
    vocab: Vec<String>,
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn token_count(text: &str) -> usize {
    crate::index::tokenize(text).len()
}

impl Generator {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut institutions = Vec::new();
        let mut places: Vec<&'static str> = PLACES.to_vec();
        places.shuffle(&mut rng);
        for (i, place) in places.iter().cycle().take(30).enumerate() {
            let form = INSTITUTION_FORMS[(i + i / PLACES.len()) % INSTITUTION_FORMS.len()];
            institutions.push((form.replace("{}", place), *place));
        }
        let vocab: Vec<String> = PREFIXES
            .iter()
            .flat_map(|p| ROOTS.iter().map(move |r| format!("{p}{r}")))
            .collect();
        let mut gen = Self {
            rng,
            institutions,
            people: Vec::new(),
            experts: Vec::new(),
            groups: Vec::new(),
            vocab,
        };
        gen.populate();
        gen
    }

    fn new_person(&mut self, institution: usize, taken: &mut std::collections::HashSet<String>) -> usize {
        loop {
            let given = GIVEN_NAMES.choose(&mut self.rng).unwrap().to_string();
            let surname = format!(
                "{}{}",
                SURNAME_HEADS.choose(&mut self.rng).unwrap(),
                SURNAME_TAILS.choose(&mut self.rng).unwrap()
            );
            if !taken.insert(format!("{given} {surname}")) {
                continue;
            }
            let middle = self
                .rng
                .gen_bool(0.25)
                .then(|| (b'A' + self.rng.gen_range(0..26u8)) as char);
            let department = self.rng.gen_range(0..DEPARTMENTS.len());
            self.people.push(Person {
                given,
                middle,
                surname,
                institution,
                department,
            });
            return self.people.len() - 1;
        }
    }

    fn populate(&mut self) {
        let mut taken = std::collections::HashSet::new();
        for g in 0..45 {
            let home = g % self.institutions.len();
            let size = self.rng.gen_range(18..=30);
            let mut members = Vec::with_capacity(size);
            for _ in 0..size {
                // Most members share the group's institution.
                let inst = if self.rng.gen_bool(0.8) {
                    home
                } else {
                    self.rng.gen_range(0..self.institutions.len())
                };
                members.push(self.new_person(inst, &mut taken));
            }
            let mut journals: Vec<usize> = (0..JOURNALS.len()).collect();
            journals.shuffle(&mut self.rng);
            journals.truncate(self.rng.gen_range(1..=2));
            let topic = self.vocab.choose_multiple(&mut self.rng, 10).cloned().collect();
            self.groups.push(Group {
                members,
                journals,
                topic,
            });
        }
        for _ in 0..80 {
            let inst = self.rng.gen_range(0..self.institutions.len());
            let p = self.new_person(inst, &mut taken);
            self.experts.push(p);
        }
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        items.choose(&mut self.rng).expect("nonempty pool")
    }

    fn general(&mut self) -> &'static str {
        GENERAL.choose(&mut self.rng).unwrap()
    }

    fn keywords(&mut self, group: usize, shared: &[String]) -> Vec<String> {
        let mut kws: Vec<String> = shared.to_vec();
        let topic = self.groups[group].topic.clone();
        while kws.len() < 2 {
            let w = self.pick(&topic).clone();
            if !kws.contains(&w) {
                kws.push(w);
            }
        }
        while kws.len() < 5 {
            let w = self.pick(&self.vocab.clone()).clone();
            if !kws.contains(&w) {
                kws.push(w);
            }
        }
        kws
    }

    fn paper_text(&mut self, kws: &[String], commentary: bool) -> (String, String) {
        let pop = *self.pick(POPULATIONS);
        let title = if commentary {
            format!(
                "{}: what {} means for {} {}",
                if self.rng.gen_bool(0.5) { "Commentary" } else { "Editorial" },
                kws[0],
                kws[1],
                self.general()
            )
        } else {
            let n_title = self.rng.gen_range(3..=4);
            let mut words: Vec<String> = kws[..n_title].to_vec();
            words.shuffle(&mut self.rng);
            format!(
                "{} {} and {} in {pop}: a {} {}",
                title_case(&words[0]),
                words[1..].join(" "),
                self.general(),
                self.general(),
                self.general()
            )
        };
        let mut sentences = Vec::new();
        let target = self.rng.gen_range(60..=120);
        let mut len = 0;
        while len < target {
            let a = self.pick(kws).clone();
            let b = self.pick(kws).clone();
            let s = match self.rng.gen_range(0..4) {
                0 => format!("We assessed {a} and {b} {} in {pop}.", self.general()),
                1 => format!("Higher {a} was associated with {} {b}.", self.general()),
                2 => format!(
                    "The {} of {a} differed by {} and {}.",
                    self.general(),
                    self.general(),
                    self.general()
                ),
                _ => format!("These findings implicate {a} in {b} {}.", self.general()),
            };
            len += token_count(&s);
            sentences.push(s);
        }
        (title, sentences.join(" "))
    }

    /// Publication dates resolving to `earliest`, cycling through the
    /// online / journal / PubMed / placeholder-with-accepted patterns.
    fn dates(&mut self, earliest: NaiveDate) -> PublicationDates {
        let days = |n: i64| Duration::days(n);
        let exact = PubDate::exact;
        match self.rng.gen_range(0..4) {
            0 => PublicationDates {
                online_pub: Some(exact(earliest)),
                journal_pub: Some(exact(earliest + days(self.rng.gen_range(14..=90)))),
                pubmed_pub: Some(exact(earliest + days(self.rng.gen_range(0..=60)))),
                accepted: Some(exact(earliest - days(self.rng.gen_range(20..=120)))),
            },
            1 => PublicationDates {
                journal_pub: Some(exact(earliest)),
                pubmed_pub: self
                    .rng
                    .gen_bool(0.5)
                    .then(|| exact(earliest + days(self.rng.gen_range(0..=30)))),
                accepted: Some(exact(earliest - days(self.rng.gen_range(10..=100)))),
                online_pub: None,
            },
            2 => PublicationDates {
                pubmed_pub: Some(exact(earliest)),
                journal_pub: Some(exact(earliest + days(self.rng.gen_range(1..=60)))),
                ..Default::default()
            },
            _ => PublicationDates {
                journal_pub: Some(PubDate::year_only(earliest.year())),
                pubmed_pub: self
                    .rng
                    .gen_bool(0.5)
                    .then(|| exact(earliest + days(self.rng.gen_range(5..=40)))),
                accepted: Some(exact(earliest)),
                online_pub: None,
            },
        }
    }

    fn draft(&mut self, journal: usize, authors: Vec<usize>, kws: Vec<String>, earliest: NaiveDate, commentary: bool) -> Draft {
        let (title, abstract_text) = self.paper_text(&kws, commentary);
        let dates = self.dates(earliest);
        Draft {
            title,
            abstract_text,
            journal,
            authors,
            dates,
            keywords: kws,
        }
    }

    fn group_authors(&mut self, group: usize, lo: usize, hi: usize) -> Vec<usize> {
        let members = self.groups[group].members.clone();
        let n = self.rng.gen_range(lo..=hi).min(members.len());
        members.choose_multiple(&mut self.rng, n).copied().collect()
    }

    fn headline(&mut self, title_kws: &[String]) -> String {
        let mut words: Vec<String> = title_kws
            .iter()
            .filter(|_| self.rng.gen_bool(0.7))
            .cloned()
            .collect();
        for _ in 0..self.rng.gen_range(2..=4) {
            words.push(self.pick(HEADLINE_WORDS).to_string());
        }
        words.shuffle(&mut self.rng);
        if let Some(first) = words.first_mut() {
            *first = title_case(first);
        }
        words.join(" ")
    }
}

fn journal_sentence(rng: &mut ChaCha8Rng, journal: &str, kw: &str) -> String {
    match rng.gen_range(0..5) {
        0 => format!("The findings were published in {journal} this week."),
        1 => format!("The study, published in {journal} on Tuesday, followed thousands of volunteers."),
        2 => format!("Writing in {journal}, the team reported that {kw} levels fell sharply."),
        3 => format!("The results appear in {journal} and build on earlier work."),
        _ => format!("Details of the work are reported in the latest issue of {journal} and online."),
    }
}

fn author_sentence(rng: &mut ChaCha8Rng, name: &str, kw: &str, lead: bool) -> String {
    let quote = match rng.gen_range(0..3) {
        0 => format!("We were surprised by how strongly {kw} stood out"),
        1 => "These results are an important first step".to_string(),
        _ => format!("This could change how we think about {kw}"),
    };
    if lead {
        return match rng.gen_range(0..3) {
            0 => format!("\"{quote},\" said {name}, who led the research."),
            1 => format!("Dr. {name} and colleagues tracked {kw} over several years."),
            _ => format!("The work was led by {name}, a specialist in {kw}."),
        };
    }
    match rng.gen_range(0..4) {
        0 => format!("\"{quote},\" added {name}, a co-author of the paper."),
        1 => format!("According to {name}, the approach could be tested in clinics soon."),
        2 => format!("{name}, the study's senior author, said more data were needed."),
        _ => format!("\"{quote},\" said {name}."),
    }
}

fn filler_sentence(rng: &mut ChaCha8Rng, kws: &[String], noise: &[String], n: u32) -> String {
    let k = |rng: &mut ChaCha8Rng| kws.choose(rng).unwrap().clone();
    let r = |rng: &mut ChaCha8Rng| noise.choose(rng).unwrap().clone();
    let (a, b, c) = (k(rng), k(rng), r(rng));
    match rng.gen_range(0..8) {
        0 => format!("The team measured {a} and {b} in {n} participants."),
        1 => format!("People with higher {a} had a {} percent greater risk of {b}.", n % 90 + 5),
        2 => format!("The researchers say {a} could become a target for new therapy."),
        3 => format!("Previous work had suggested a link between {a} and {b}, but evidence was limited."),
        4 => format!("It is not yet clear whether {a} causes {b} or is simply a marker of {c}."),
        5 => format!("Further trials are planned to test whether reducing {a} improves outcomes."),
        6 => format!("Experts have long debated the role of {c} in everyday health."),
        _ => format!("In total, {n} people took part, and most were followed for years."),
    }
}

/// Generates the benchmark for `cfg`. The same config always yields the
/// same dataset.
pub fn generate(cfg: &SynthConfig) -> SynthDataset {
    let mut g = Generator::new(cfg.seed);
    let base = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
    let mut drafts: Vec<Draft> = Vec::with_capacity(cfg.paper_count());
    let mut gold_groups = Vec::with_capacity(cfg.articles);
    let mut gold_dates = Vec::with_capacity(cfg.articles);

    for i in 0..cfg.articles {
        let group = if i < g.groups.len() { i } else { g.rng.gen_range(0..g.groups.len()) };
        let journal = *g.pick(&g.groups[group].journals.clone());
        let mut authors = g.group_authors(group, 3, 15);
        if g.rng.gen_bool(0.3) {
            let other = g.rng.gen_range(0..g.groups.len());
            authors.extend(g.group_authors(other, 1, 2).into_iter().filter(|a| !authors.contains(a)).collect::<Vec<_>>());
        }
        let kws = g.keywords(group, &[]);
        let earliest = base + Duration::days(g.rng.gen_range(0..6 * 365));
        drafts.push(g.draft(journal, authors, kws, earliest, false));
        gold_groups.push(group);
        gold_dates.push(earliest);
    }

    let mut order: Vec<usize> = (0..cfg.articles).collect();
    let mut golds_for = |g: &mut Generator, n: usize| -> Vec<usize> {
        order.shuffle(&mut g.rng);
        order.iter().cycle().take(n).copied().collect()
    };

    for gi in golds_for(&mut g, cfg.same_group_far) {
        let group = gold_groups[gi];
        let authors = g.group_authors(group, 3, 12);
        let kws = g.keywords(group, &[]);
        let gap = g.rng.gen_range(150..=1200) * if g.rng.gen_bool(0.5) { 1 } else { -1 };
        let d = g.draft(drafts[gi].journal, authors, kws, gold_dates[gi] + Duration::days(gap), false);
        drafts.push(d);
    }
    for gi in golds_for(&mut g, cfg.companions) {
        let group = gold_groups[gi];
        let authors = g.group_authors(group, 3, 12);
        let kws = g.keywords(group, &[]);
        let gap = g.rng.gen_range(-25..=25);
        let d = g.draft(drafts[gi].journal, authors, kws, gold_dates[gi] + Duration::days(gap), false);
        drafts.push(d);
    }
    // Articles whose gold has a commentary quote its author.
    let mut quoted: Vec<Option<usize>> = vec![None; cfg.articles];
    for gi in golds_for(&mut g, cfg.editorials) {
        let expert = *g.pick(&g.experts.clone());
        quoted[gi] = Some(expert);
        let shared = drafts[gi].keywords[..2].to_vec();
        let kws = g.keywords(gold_groups[gi], &shared);
        let gap = g.rng.gen_range(-5..=20);
        let d = g.draft(drafts[gi].journal, vec![expert], kws, gold_dates[gi] + Duration::days(gap), true);
        drafts.push(d);
    }
    for gi in golds_for(&mut g, cfg.lead_commentaries) {
        let lead = drafts[gi].authors[0];
        let shared = drafts[gi].keywords[..2].to_vec();
        let kws = g.keywords(gold_groups[gi], &shared);
        let gap = g.rng.gen_range(-5..=20);
        let d = g.draft(drafts[gi].journal, vec![lead], kws, gold_dates[gi] + Duration::days(gap), true);
        drafts.push(d);
    }
    for gi in golds_for(&mut g, cfg.same_topic) {
        let mut group = g.rng.gen_range(0..g.groups.len());
        if group == gold_groups[gi] {
            group = (group + 1) % g.groups.len();
        }
        let journal = g.rng.gen_range(0..JOURNALS.len());
        let authors = g.group_authors(group, 2, 10);
        let shared = drafts[gi].keywords[..2].to_vec();
        let kws = g.keywords(group, &shared);
        let gap = g.rng.gen_range(-700..=700);
        let d = g.draft(journal, authors, kws, gold_dates[gi] + Duration::days(gap), false);
        drafts.push(d);
    }

    // Ids are shuffled so that id order carries no signal.
    let mut ids: Vec<usize> = (0..drafts.len()).collect();
    ids.shuffle(&mut g.rng);
    let paper_id = |i: usize| format!("P{:05}", ids[i] + 1);

    let issn = |j: usize| format!("{:04}-{:04}", 1000 + j * 37, 2000 + j * 53);
    let mut aliases = JournalAliasTable::new();
    for (j, (name, alts)) in JOURNALS.iter().enumerate() {
        aliases.insert(&issn(j), name, alts.iter().map(|a| a.to_string()).collect());
    }

    let mut papers = Vec::with_capacity(drafts.len());
    for (i, d) in drafts.iter().enumerate() {
        let mut affiliations: Vec<String> = Vec::new();
        for &a in &d.authors {
            let p = &g.people[a];
            let (inst, place) = &g.institutions[p.institution];
            let aff = format!("Department of {}, {inst}, {place}", DEPARTMENTS[p.department]);
            if !affiliations.contains(&aff) {
                affiliations.push(aff);
            }
        }
        let record = PaperRecord::new(
            paper_id(i),
            Some(format!("10.5555/synth.{}", ids[i] + 1)),
            d.title.clone(),
            d.abstract_text.clone(),
            JOURNALS[d.journal].0,
            Some(issn(d.journal)),
            vec![],
            d.authors.iter().map(|&a| g.people[a].byline()).collect(),
            affiliations,
            d.dates,
        )
        .expect("generated records are valid");
        papers.push(record);
    }

    let mut news = Vec::with_capacity(cfg.articles);
    let mut truth = Vec::with_capacity(cfg.articles);
    for gi in 0..cfg.articles {
        let d = &drafts[gi];
        let kws = d.keywords.clone();
        let (canonical, alts) = JOURNALS[d.journal];
        let via_alias = g.rng.gen_bool(cfg.alias_rate);
        let surface = if via_alias { *g.pick(alts) } else { canonical };
        let lag = g.rng.gen_range(0..=cfg.max_release_lag_days);
        let release = gold_dates[gi] + Duration::days(lag);

        let n_mentioned = g.rng.gen_range(2..=4).min(d.authors.len());
        let mut mentioned = vec![d.authors[0]];
        let rest: Vec<usize> = d.authors[1..].choose_multiple(&mut g.rng, n_mentioned - 1).copied().collect();
        mentioned.extend(rest);
        let affiliation = g.institutions[g.people[d.authors[0]].institution].0.clone();

        let noise: Vec<String> = g.vocab.choose_multiple(&mut g.rng, 6).cloned().collect();
        let mut fillers = Vec::new();
        let mut opener = vec![format!(
            "Researchers at the {affiliation} have linked {} to {} in {}.",
            kws[0],
            kws[1],
            g.pick(POPULATIONS)
        )];
        let mut core = vec![journal_sentence(&mut g.rng, surface, &kws[2])];
        for (m, &a) in mentioned.iter().enumerate() {
            let kw = g.pick(&kws).clone();
            core.push(author_sentence(&mut g.rng, &g.people[a].spoken(), &kw, m == 0));
        }
        core[1..].shuffle(&mut g.rng);
        if g.rng.gen_bool(0.6) {
            let surname = g.people[mentioned[0]].surname.clone();
            core.push(match g.rng.gen_range(0..2) {
                0 => format!("{surname} said the team now plans a larger trial."),
                _ => format!("\"We need to confirm this in other groups,\" said {surname}."),
            });
        }
        if let Some(expert) = quoted[gi].or_else(|| g.rng.gen_bool(0.3).then(|| *g.pick(&g.experts.clone()))) {
            let role = *g.pick(ROLES);
            let p = &g.people[expert];
            core.push(format!(
                "\"It is an intriguing result,\" said {}, {role} at the {} who was not involved in the research.",
                p.spoken(),
                g.institutions[p.institution].0
            ));
        }
        let mut body: Vec<String> = Vec::new();
        body.append(&mut opener);
        let target = g.rng.gen_range(150..=330);
        let mut len: usize = core.iter().chain(&body).map(|s| token_count(s)).sum();
        while len < target {
            let n = g.rng.gen_range(40..5000);
            let s = filler_sentence(&mut g.rng, &kws, &noise, n);
            len += token_count(&s);
            fillers.push(s);
        }
        // Interleave: core sentences keep their order, fillers fill the gaps.
        let mut fi = fillers.into_iter();
        for s in core {
            body.push(s);
            for _ in 0..g.rng.gen_range(0..=2) {
                if let Some(f) = fi.next() {
                    body.push(f);
                }
            }
        }
        body.extend(fi);

        let title_kws: Vec<String> = kws[..3].to_vec();
        let headline = g.headline(&title_kws);
        let news_id = format!("N{:04}", gi + 1);
        let article = NewsArticle::new(
            news_id.clone(),
            "synthetic",
            headline,
            body.join(" "),
            release,
            Some(papers[gi].paper_id.clone()),
        )
        .expect("generated articles are valid");
        truth.push(ArticleTruth {
            news_id,
            gold_paper_id: papers[gi].paper_id.clone(),
            journal_surface: surface.to_string(),
            via_alias,
            authors_mentioned: mentioned.iter().map(|&a| g.people[a].spoken()).collect(),
            affiliation,
            release_lag_days: lag,
        });
        news.push(article);
    }

    papers.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    SynthDataset {
        dataset: Dataset {
            papers,
            aliases,
            news,
        },
        truth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&SynthConfig::default());
        let b = generate(&SynthConfig::default());
        assert_eq!(a.dataset.papers, b.dataset.papers);
        assert_eq!(a.dataset.news, b.dataset.news);
        let c = generate(&SynthConfig::with_seed(7));
        assert_ne!(a.dataset.news, c.dataset.news);
    }

    #[test]
    fn shape_matches_config() {
        let cfg = SynthConfig::default();
        let s = generate(&cfg);
        assert_eq!(s.dataset.papers.len(), 500);
        assert_eq!(s.dataset.news.len(), 200);
        let by_id: std::collections::HashMap<_, _> = s.dataset.papers.iter().map(|p| (p.paper_id.as_str(), p)).collect();
        assert_eq!(by_id.len(), 500);
        for (n, t) in s.dataset.news.iter().zip(&s.truth) {
            let gold = by_id[t.gold_paper_id.as_str()];
            let lag = (n.release_date - gold.earliest_date).num_days();
            assert!((0..=30).contains(&lag));
            assert!((2..=4).contains(&t.authors_mentioned.len()));
            assert!(n.body.contains(&t.journal_surface));
            assert!(n.body.contains(&t.affiliation));
            assert!(gold.journal_aliases.is_empty());
        }
        let via_alias = s.truth.iter().filter(|t| t.via_alias).count();
        assert!((70..=130).contains(&via_alias), "{via_alias}");
    }
}
