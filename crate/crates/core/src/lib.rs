//! Links health news articles to the research papers they report on.
//!
//! The pipeline pulls publication metadata out of a news article
//! ([`extraction`]), turns it into a five-part query, and ranks an indexed
//! paper corpus ([`index`]) by weighted per-field BM25 multiplied by a date
//! decay ([`ranking`]). [`baseline`] provides AND-semantics retrieval with a
//! hard date window for comparison, [`eval`] holds the accuracy harness, and
//! [`link`] wraps the pipeline for single-article requests.

pub mod baseline;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod extraction;
pub mod index;
pub mod link;
pub mod ranking;
pub mod synth;

pub use corpus::{JournalAliasTable, NewsArticle, PaperRecord, PubDate, PublicationDates};
pub use error::{ConfigError, CorpusError, IndexError, LinkError, SearchError};
pub use link::{LinkRequest, LinkResponse, Linker};
pub use index::{tokenize, Field, Index};
pub use ranking::{Query, RankedHit, SearchConfig, SubqueryKind, Weights};
