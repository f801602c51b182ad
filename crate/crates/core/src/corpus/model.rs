use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::Codebook;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Support,
    Oppose,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub outlet: String,
    pub date: NaiveDate,
    pub language: String,
    pub sentences: Vec<String>,
}

impl Document {
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

/// A claim span projected onto the sentences it touches.
///
/// An empty `categories` list marks a claim that was identified but could
/// not be coded against the codebook; it still counts for identification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimSpan {
    pub document_id: String,
    pub sentence_indices: Vec<usize>,
    pub char_start: Option<usize>,
    pub char_end: Option<usize>,
    pub categories: Vec<String>,
    pub actor: Option<String>,
    pub polarity: Option<Polarity>,
}

impl ClaimSpan {
    pub fn new(document_id: &str, sentence_indices: Vec<usize>, categories: &[&str]) -> Self {
        ClaimSpan {
            document_id: document_id.to_string(),
            sentence_indices,
            char_start: None,
            char_end: None,
            categories: categories.iter().map(|c| c.to_string()).collect(),
            actor: None,
            polarity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedCorpus {
    documents: Vec<Document>,
    claims: Vec<ClaimSpan>,
    codebook: Codebook,
    language: String,
}

/// Language tag used for corpora without documents.
pub const UNDETERMINED_LANGUAGE: &str = "und";

impl AnnotatedCorpus {
    /// Builds a corpus and checks every structural invariant.
    ///
    /// `language` may be `None`, in which case it is taken from the documents
    /// (or [`UNDETERMINED_LANGUAGE`] for an empty corpus).
    pub fn new(
        documents: Vec<Document>,
        claims: Vec<ClaimSpan>,
        codebook: Codebook,
        language: Option<String>,
    ) -> Result<Self> {
        let language = language
            .or_else(|| documents.first().map(|d| d.language.clone()))
            .unwrap_or_else(|| UNDETERMINED_LANGUAGE.to_string());

        let mut sentence_counts: HashMap<&str, usize> = HashMap::with_capacity(documents.len());
        for doc in &documents {
            if doc.sentences.is_empty() {
                return Err(Error::Validation(format!(
                    "document `{}` has no sentences",
                    doc.id
                )));
            }
            if doc.language != language {
                return Err(Error::Validation(format!(
                    "document `{}` is tagged `{}` but the corpus language is `{language}`",
                    doc.id, doc.language
                )));
            }
            if sentence_counts.insert(&doc.id, doc.sentences.len()).is_some() {
                return Err(Error::Validation(format!("duplicate document id `{}`", doc.id)));
            }
        }

        for claim in &claims {
            validate_claim(claim, &sentence_counts, &codebook)?;
        }

        Ok(AnnotatedCorpus {
            documents,
            claims,
            codebook,
            language,
        })
    }

    pub fn empty(codebook: Codebook) -> Self {
        AnnotatedCorpus {
            documents: Vec::new(),
            claims: Vec::new(),
            codebook,
            language: UNDETERMINED_LANGUAGE.to_string(),
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn claims(&self) -> &[ClaimSpan] {
        &self.claims
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn n_sentences(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Claims grouped by document id, each group in corpus order.
    pub fn claims_by_document(&self) -> HashMap<&str, Vec<&ClaimSpan>> {
        let mut map: HashMap<&str, Vec<&ClaimSpan>> = HashMap::new();
        for c in &self.claims {
            map.entry(c.document_id.as_str()).or_default().push(c);
        }
        map
    }

    /// The sub-corpus made of the given documents (corpus order is kept).
    pub fn subset(&self, ids: &HashSet<String>) -> AnnotatedCorpus {
        AnnotatedCorpus {
            documents: self
                .documents
                .iter()
                .filter(|d| ids.contains(&d.id))
                .cloned()
                .collect(),
            claims: self
                .claims
                .iter()
                .filter(|c| ids.contains(&c.document_id))
                .cloned()
                .collect(),
            codebook: self.codebook.clone(),
            language: self.language.clone(),
        }
    }

    /// Replaces sentence texts and the language tag, keeping every label.
    /// Character offsets are dropped because they no longer point anywhere
    /// meaningful in the new text.
    pub(crate) fn with_texts(&self, texts: Vec<Vec<String>>, language: &str) -> AnnotatedCorpus {
        debug_assert_eq!(texts.len(), self.documents.len());
        let documents = self
            .documents
            .iter()
            .zip(texts)
            .map(|(d, sentences)| {
                debug_assert_eq!(d.sentences.len(), sentences.len());
                Document {
                    language: language.to_string(),
                    sentences,
                    ..d.clone()
                }
            })
            .collect();
        let claims = self
            .claims
            .iter()
            .map(|c| ClaimSpan {
                char_start: None,
                char_end: None,
                ..c.clone()
            })
            .collect();
        AnnotatedCorpus {
            documents,
            claims,
            codebook: self.codebook.clone(),
            language: language.to_string(),
        }
    }

    /// Content hash over the serialized corpus and its codebook.
    pub fn fingerprint(&self) -> String {
        let body = super::io::to_jsonl_string(self);
        let codebook = serde_json::to_string(&self.codebook).expect("codebook serializes");
        crate::hashing::sha256_fields([
            body.as_bytes(),
            codebook.as_bytes(),
            self.language.as_bytes(),
        ])
    }
}

pub(super) fn validate_claim(
    claim: &ClaimSpan,
    sentence_counts: &HashMap<&str, usize>,
    codebook: &Codebook,
) -> Result<()> {
    let n = *sentence_counts.get(claim.document_id.as_str()).ok_or_else(|| {
        Error::Validation(format!(
            "claim references unknown document `{}`",
            claim.document_id
        ))
    })?;
    if claim.sentence_indices.is_empty() {
        return Err(Error::Validation(format!(
            "claim in document `{}` touches no sentence",
            claim.document_id
        )));
    }
    if claim.sentence_indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "claim in document `{}` has unordered sentence indices {:?}",
            claim.document_id, claim.sentence_indices
        )));
    }
    if let Some(&bad) = claim.sentence_indices.iter().find(|&&i| i >= n) {
        return Err(Error::Validation(format!(
            "claim in document `{}` references sentence {bad} of {n}",
            claim.document_id
        )));
    }
    match (claim.char_start, claim.char_end) {
        (Some(s), Some(e)) if s >= e => {
            return Err(Error::Validation(format!(
                "claim in document `{}` has char_start {s} >= char_end {e}",
                claim.document_id
            )))
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(Error::Validation(format!(
                "claim in document `{}` has only one character offset",
                claim.document_id
            )))
        }
        _ => {}
    }
    let mut seen = HashSet::new();
    for code in &claim.categories {
        if !codebook.contains(code) {
            return Err(Error::Validation(format!(
                "claim in document `{}` uses category `{code}` not in codebook `{}`",
                claim.document_id,
                codebook.name()
            )));
        }
        if !seen.insert(code) {
            return Err(Error::Validation(format!(
                "claim in document `{}` repeats category `{code}`",
                claim.document_id
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, n: usize) -> Document {
        Document {
            id: id.into(),
            outlet: "taz".into(),
            date: NaiveDate::from_ymd_opt(2015, 9, 1).unwrap(),
            language: "de".into(),
            sentences: (0..n).map(|i| format!("Satz {i}.")).collect(),
        }
    }

    #[test]
    fn rejects_broken_references() {
        let cb = Codebook::debatenet();
        let bad_doc = ClaimSpan::new("nope", vec![0], &["C1"]);
        assert!(AnnotatedCorpus::new(vec![doc("a", 2)], vec![bad_doc], cb.clone(), None).is_err());
        let bad_idx = ClaimSpan::new("a", vec![2], &["C1"]);
        assert!(AnnotatedCorpus::new(vec![doc("a", 2)], vec![bad_idx], cb.clone(), None).is_err());
        let bad_cat = ClaimSpan::new("a", vec![0], &["C9"]);
        assert!(AnnotatedCorpus::new(vec![doc("a", 2)], vec![bad_cat], cb.clone(), None).is_err());
        let no_sent = ClaimSpan::new("a", vec![], &["C1"]);
        assert!(AnnotatedCorpus::new(vec![doc("a", 2)], vec![no_sent], cb.clone(), None).is_err());
        let mut offs = ClaimSpan::new("a", vec![0], &["C1"]);
        offs.char_start = Some(5);
        offs.char_end = Some(5);
        assert!(AnnotatedCorpus::new(vec![doc("a", 2)], vec![offs], cb.clone(), None).is_err());
        let dup = AnnotatedCorpus::new(vec![doc("a", 1), doc("a", 1)], vec![], cb, None);
        assert!(dup.is_err());
    }

    #[test]
    fn uncategorized_claims_are_valid() {
        let c = ClaimSpan::new("a", vec![0, 1], &[]);
        let corpus =
            AnnotatedCorpus::new(vec![doc("a", 2)], vec![c], Codebook::debatenet(), None).unwrap();
        assert_eq!(corpus.language(), "de");
    }

    #[test]
    fn mixed_languages_rejected() {
        let mut en = doc("b", 1);
        en.language = "en".into();
        let r = AnnotatedCorpus::new(vec![doc("a", 1), en], vec![], Codebook::debatenet(), None);
        assert!(matches!(r, Err(Error::Validation(_))));
    }
}
