use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SentenceExample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Dev,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<SentenceExample>,
    pub dev: Vec<SentenceExample>,
    pub test: Vec<SentenceExample>,
    pub seed: u64,
    pub ratios: [f64; 3],
}

impl DatasetSplit {
    pub fn partition(&self, p: Partition) -> &[SentenceExample] {
        match p {
            Partition::Train => &self.train,
            Partition::Dev => &self.dev,
            Partition::Test => &self.test,
        }
    }

    pub fn document_ids(&self, p: Partition) -> HashSet<String> {
        self.partition(p)
            .iter()
            .map(|e| e.document_id.clone())
            .collect()
    }
}

/// Splits document counts by the largest-remainder rule. A partition with a
/// positive ratio that rounds to zero borrows a document when the donor stays
/// within one document of its exact share.
fn allocate(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = (e + 1e-9).floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - counts[a] as f64;
        let fb = exact[b] - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = n - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    for i in 0..3 {
        if ratios[i] > 0.0 && counts[i] == 0 {
            let donor = (0..3).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))).unwrap();
            if (counts[donor] as f64 - 1.0 - exact[donor]).abs() <= 1.0 + 1e-9 {
                counts[donor] -= 1;
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Document-level seeded split. Document ids are sorted before the shuffle so
/// the result depends only on the set of documents and the seed.
pub fn split_corpus(
    examples: &[SentenceExample],
    ratios: [f64; 3],
    seed: u64,
) -> Result<DatasetSplit> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::Config(format!("invalid split ratios {ratios:?}")));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios must sum to 1, got {total}"
        )));
    }
    let mut docs: Vec<&str> = examples
        .iter()
        .map(|e| e.document_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if docs.len() < 3 {
        return Err(Error::Validation(format!(
            "need at least 3 documents to split, got {}",
            docs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    docs.shuffle(&mut rng);
    let [n_train, n_dev, _] = allocate(docs.len(), &ratios);
    let train: HashSet<&str> = docs[..n_train].iter().copied().collect();
    let dev: HashSet<&str> = docs[n_train..n_train + n_dev].iter().copied().collect();

    let mut split = DatasetSplit {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        seed,
        ratios,
    };
    for e in examples {
        let id = e.document_id.as_str();
        if train.contains(id) {
            split.train.push(e.clone());
        } else if dev.contains(id) {
            split.dev.push(e.clone());
        } else {
            split.test.push(e.clone());
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn examples(n_docs: usize, per_doc: usize) -> Vec<SentenceExample> {
        (0..n_docs)
            .flat_map(|d| {
                (0..per_doc).map(move |s| SentenceExample {
                    document_id: format!("doc{d:03}"),
                    sentence_index: s,
                    text: format!("s{s}"),
                    is_claim: s == 0,
                    top_categories: BTreeSet::new(),
                })
            })
            .collect()
    }

    fn doc_count(xs: &[SentenceExample]) -> usize {
        xs.iter().map(|e| &e.document_id).collect::<HashSet<_>>().len()
    }

    #[test]
    fn ten_documents_split_8_1_1() {
        for seed in 0..20 {
            let s = split_corpus(&examples(10, 3), [0.8, 0.1, 0.1], seed).unwrap();
            assert_eq!(
                (doc_count(&s.train), doc_count(&s.dev), doc_count(&s.test)),
                (8, 1, 1)
            );
        }
    }

    #[test]
    fn allocation_rule() {
        assert_eq!(allocate(10, &[0.8, 0.1, 0.1]), [8, 1, 1]);
        assert_eq!(allocate(100, &[0.8, 0.1, 0.1]), [80, 10, 10]);
        assert_eq!(allocate(3, &[0.8, 0.1, 0.1]), [2, 1, 0]);
        assert_eq!(allocate(5, &[0.8, 0.1, 0.1]), [3, 1, 1]);
        assert_eq!(allocate(7, &[0.8, 0.1, 0.1]), [5, 1, 1]);
        assert_eq!(allocate(4, &[1.0, 0.0, 0.0]), [4, 0, 0]);
        assert_eq!(allocate(10, &[0.7, 0.2, 0.1]), [7, 2, 1]);
    }

    #[test]
    fn same_seed_same_partitions() {
        let ex = examples(37, 2);
        let a = split_corpus(&ex, [0.8, 0.1, 0.1], 11).unwrap();
        let b = split_corpus(&ex, [0.8, 0.1, 0.1], 11).unwrap();
        assert_eq!(a, b);
        let c = split_corpus(&ex, [0.8, 0.1, 0.1], 12).unwrap();
        assert_ne!(a.test, c.test);
    }

    #[test]
    fn errors() {
        assert!(split_corpus(&examples(2, 5), [0.8, 0.1, 0.1], 0).is_err());
        assert!(split_corpus(&examples(5, 1), [0.8, 0.1, 0.2], 0).is_err());
        assert!(split_corpus(&examples(5, 1), [1.1, -0.05, -0.05], 0).is_err());
    }
}
