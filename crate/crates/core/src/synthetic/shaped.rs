use chrono::{Duration, NaiveDate};

use crate::corpus::{AnnotatedCorpus, ClaimSpan, Codebook, Document};
use crate::Result;

struct Shape {
    prefix: &'static str,
    outlet: &'static str,
    language: &'static str,
    n_docs: usize,
    n_sentences: usize,
    positive_sentences: usize,
    n_spans: usize,
    label_counts: [usize; 8],
}

/// Labels in block order; span `i` gets label `i`, and the first
/// `labels - spans` spans also get label `i + spans`, which always lies in a
/// later block.
fn build(shape: &Shape) -> Result<AnnotatedCorpus> {
    let codebook = Codebook::debatenet();
    let codes = codebook.top_level_codes();
    let labels: Vec<&str> = shape
        .label_counts
        .iter()
        .zip(&codes)
        .flat_map(|(&n, c)| std::iter::repeat_n(c.as_str(), n))
        .collect();
    let extra = labels.len() - shape.n_spans;

    let base = shape.n_sentences / shape.n_docs;
    let longer = shape.n_sentences % shape.n_docs;
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    let mut documents = Vec::with_capacity(shape.n_docs);
    let mut coords = Vec::with_capacity(shape.n_sentences);
    for d in 0..shape.n_docs {
        let n = base + usize::from(d < longer);
        let id = format!("{}{d:04}", shape.prefix);
        coords.extend((0..n).map(|i| (id.clone(), i)));
        documents.push(Document {
            id,
            outlet: shape.outlet.to_string(),
            date: start + Duration::days((d * 365 / shape.n_docs) as i64),
            language: shape.language.to_string(),
            sentences: (0..n).map(|i| format!("Sentence {i} of article {d}.")).collect(),
        });
    }
    let positive: Vec<&(String, usize)> = (0..shape.positive_sentences)
        .map(|j| &coords[j * shape.n_sentences / shape.positive_sentences])
        .collect();
    let claims = (0..shape.n_spans)
        .map(|i| {
            let (doc, idx) = positive[i % positive.len()];
            let mut cats = vec![labels[i]];
            if i < extra {
                cats.push(labels[i + shape.n_spans]);
            }
            ClaimSpan::new(doc, vec![*idx], &cats)
        })
        .collect();
    AnnotatedCorpus::new(documents, claims, codebook, Some(shape.language.to_string()))
}

/// German corpus with 700 articles, 16402 sentences (about 15% containing a
/// claim), 3442 claim spans and 4417 top-level labels.
pub fn debatenet_shaped() -> Result<AnnotatedCorpus> {
    build(&Shape {
        prefix: "dn",
        outlet: "taz",
        language: "de",
        n_docs: 700,
        n_sentences: 16402,
        positive_sentences: 2460,
        n_spans: 3442,
        label_counts: [977, 624, 403, 138, 712, 138, 757, 668],
    })
}

/// English corpus with 36 articles, 1347 sentences, 82 claim spans and 101
/// top-level labels.
pub fn guardian_shaped() -> Result<AnnotatedCorpus> {
    build(&Shape {
        prefix: "g",
        outlet: "guardian",
        language: "en",
        n_docs: 36,
        n_sentences: 1347,
        positive_sentences: 82,
        n_spans: 82,
        label_counts: [34, 2, 3, 8, 11, 7, 22, 14],
    })
}
