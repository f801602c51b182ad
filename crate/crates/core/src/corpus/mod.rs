//! Span-annotated claim corpora and their sentence-level views.
//!
//! An [`AnnotatedCorpus`] holds documents, claim spans and the codebook the
//! spans are coded against. [`derive_sentence_examples`] projects spans onto
//! sentences, which is the unit of both the identification and the
//! categorization task.

mod codebook;
mod examples;
mod io;
mod model;
mod split;
mod stats;

pub use codebook::{Category, Codebook};
pub use examples::{categorization_examples, derive_sentence_examples, SentenceExample};
pub use io::{load_corpus, load_corpus_str, write_corpus, CorpusFormat};
pub use model::{AnnotatedCorpus, ClaimSpan, Document, Polarity};
pub use split::{split_corpus, DatasetSplit, Partition};
pub use stats::{category_distribution, corpus_stats, CorpusStats, Distribution};
