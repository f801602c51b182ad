use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::AnnotatedCorpus;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_documents: usize,
    pub n_sentences: usize,
    pub n_spans: usize,
    pub n_labels: usize,
    pub mean_labels_per_span: f64,
    pub positive_sentence_rate: f64,
}

/// Percentage of claim labels per top-level category code.
pub type Distribution = BTreeMap<String, f64>;

pub fn corpus_stats(corpus: &AnnotatedCorpus) -> CorpusStats {
    let n_sentences = corpus.n_sentences();
    let n_spans = corpus.claims().len();
    let n_labels: usize = corpus.claims().iter().map(|c| c.categories.len()).sum();
    let positives: HashSet<(&str, usize)> = corpus
        .claims()
        .iter()
        .flat_map(|c| c.sentence_indices.iter().map(|&i| (c.document_id.as_str(), i)))
        .collect();
    CorpusStats {
        n_documents: corpus.documents().len(),
        n_sentences,
        n_spans,
        n_labels,
        mean_labels_per_span: if n_spans == 0 {
            0.0
        } else {
            n_labels as f64 / n_spans as f64
        },
        positive_sentence_rate: if n_sentences == 0 {
            0.0
        } else {
            positives.len() as f64 / n_sentences as f64
        },
    }
}

/// Share of every top-level category among all claim labels (not spans), in
/// percent. Only categories that occur are listed.
pub fn category_distribution(corpus: &AnnotatedCorpus) -> Result<Distribution> {
    let codebook = corpus.codebook();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for code in corpus.claims().iter().flat_map(|c| &c.categories) {
        let top = codebook
            .top_level_of(code)
            .expect("corpus categories are validated against the codebook");
        *counts.entry(top.to_string()).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(counts
        .into_iter()
        .map(|(k, v)| (k, 100.0 * v as f64 / total as f64))
        .collect())
}
