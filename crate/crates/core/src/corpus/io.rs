//! JSONL corpus storage: one document object per line, claims nested.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::model::validate_claim;
use super::{AnnotatedCorpus, ClaimSpan, Codebook, Document, Polarity};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    #[default]
    Jsonl,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    id: String,
    outlet: String,
    date: NaiveDate,
    language: String,
    sentences: Vec<String>,
    #[serde(default)]
    claims: Vec<ClaimRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimRecord {
    sentences: Vec<usize>,
    categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    char_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    char_end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    actor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarity: Option<Polarity>,
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    codebook: Codebook,
) -> Result<AnnotatedCorpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_corpus_str(&text, format, codebook)
}

/// Parses a JSONL corpus. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn load_corpus_str(
    text: &str,
    format: CorpusFormat,
    codebook: Codebook,
) -> Result<AnnotatedCorpus> {
    let CorpusFormat::Jsonl = format;
    let mut documents = Vec::new();
    let mut claims = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let counts = HashMap::from([(record.id.as_str(), record.sentences.len())]);
        let doc_claims: Vec<ClaimSpan> = record
            .claims
            .into_iter()
            .map(|c| ClaimSpan {
                document_id: record.id.clone(),
                sentence_indices: c.sentences,
                char_start: c.char_start,
                char_end: c.char_end,
                categories: c.categories,
                actor: c.actor,
                polarity: c.polarity,
            })
            .collect();
        for c in &doc_claims {
            validate_claim(c, &counts, &codebook)
                .map_err(|e| Error::Validation(format!("line {lineno}: {}", strip(e))))?;
        }
        claims.extend(doc_claims);
        documents.push(Document {
            id: record.id,
            outlet: record.outlet,
            date: record.date,
            language: record.language,
            sentences: record.sentences,
        });
    }
    if documents.is_empty() {
        return Ok(AnnotatedCorpus::empty(codebook));
    }
    AnnotatedCorpus::new(documents, claims, codebook, None)
}

fn strip(e: Error) -> String {
    match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    }
}

pub(crate) fn to_jsonl_string(corpus: &AnnotatedCorpus) -> String {
    let by_doc = corpus.claims_by_document();
    let mut out = String::new();
    for doc in corpus.documents() {
        let claims = by_doc
            .get(doc.id.as_str())
            .map(|cs| {
                cs.iter()
                    .map(|c| ClaimRecord {
                        sentences: c.sentence_indices.clone(),
                        categories: c.categories.clone(),
                        char_start: c.char_start,
                        char_end: c.char_end,
                        actor: c.actor.clone(),
                        polarity: c.polarity,
                    })
                    .collect()
            })
            .unwrap_or_default();
        let record = DocumentRecord {
            id: doc.id.clone(),
            outlet: doc.outlet.clone(),
            date: doc.date,
            language: doc.language.clone(),
            sentences: doc.sentences.clone(),
            claims,
        };
        let line = serde_json::to_string(&record).expect("document record serializes");
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn write_corpus(corpus: &AnnotatedCorpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, to_jsonl_string(corpus)).map_err(|e| Error::io(path, e))
}

impl AnnotatedCorpus {
    pub fn to_jsonl(&self) -> String {
        to_jsonl_string(self)
    }
}
