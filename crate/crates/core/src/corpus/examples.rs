use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AnnotatedCorpus;

/// One sentence with its identification and categorization targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceExample {
    pub document_id: String,
    pub sentence_index: usize,
    pub text: String,
    pub is_claim: bool,
    pub top_categories: BTreeSet<String>,
}

impl SentenceExample {
    /// Stable identifier of the sentence within its corpus.
    pub fn key(&self) -> String {
        format!("{}#{}", self.document_id, self.sentence_index)
    }
}

/// One example per sentence. A sentence is a claim iff some span touches it;
/// its categories are the union of the top-level ancestors of every touching
/// span's categories. Spans over several sentences mark all of them.
pub fn derive_sentence_examples(corpus: &AnnotatedCorpus) -> Vec<SentenceExample> {
    let by_doc = corpus.claims_by_document();
    let codebook = corpus.codebook();
    let mut out = Vec::with_capacity(corpus.n_sentences());
    for doc in corpus.documents() {
        let n = doc.sentences.len();
        let mut positive = vec![false; n];
        let mut cats = vec![BTreeSet::new(); n];
        for claim in by_doc.get(doc.id.as_str()).into_iter().flatten() {
            for &i in &claim.sentence_indices {
                positive[i] = true;
                cats[i].extend(
                    claim
                        .categories
                        .iter()
                        .filter_map(|c| codebook.top_level_of(c))
                        .map(str::to_string),
                );
            }
        }
        for (i, ((text, is_claim), top_categories)) in
            doc.sentences.iter().zip(positive).zip(cats).enumerate()
        {
            out.push(SentenceExample {
                document_id: doc.id.clone(),
                sentence_index: i,
                text: text.clone(),
                is_claim,
                top_categories,
            });
        }
    }
    out
}

/// Gold claim sentences that carry at least one category: the evaluation
/// and training population of the categorization task.
pub fn categorization_examples(examples: &[SentenceExample]) -> Vec<SentenceExample> {
    examples
        .iter()
        .filter(|e| e.is_claim && !e.top_categories.is_empty())
        .cloned()
        .collect()
}
