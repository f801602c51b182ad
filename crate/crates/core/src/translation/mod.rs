//! Sentence-aligned corpus translation behind a pluggable backend.
//!
//! The translation unit is the sentence, so sentence `i` of document `d` in
//! the output is always the translation of sentence `i` of document `d` in
//! the input and every sentence-level label carries over unchanged. The cost
//! is that the backend never sees cross-sentence context.

mod backend;
mod cache;
mod http;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use backend::{CountingBackend, DictionaryBackend, IdentityBackend, LexiconPair, TranslationBackend};
pub use cache::{CacheIndex, CacheKey, TranslationCache};
pub use http::{HttpBackend, HttpBackendConfig};

use crate::corpus::AnnotatedCorpus;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Distinct uncached texts per backend call.
    pub batch_size: usize,
    /// Maximum number of backend calls in flight.
    pub parallelism: usize,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            batch_size: 64,
            parallelism: 1,
        }
    }
}

/// Failure on the input text at `index`.
struct IndexedError {
    index: usize,
    error: Error,
}

fn translate_indexed(
    backend: &dyn TranslationBackend,
    texts: &[String],
    source: &str,
    target: &str,
    cache: &TranslationCache,
    options: TranslateOptions,
) -> std::result::Result<Vec<String>, IndexedError> {
    if !backend.supports(source, target) {
        return Err(IndexedError {
            index: 0,
            error: Error::Config(format!(
                "backend `{}` does not support {source}->{target}",
                backend.id()
            )),
        });
    }
    let keys: Vec<CacheKey> = texts
        .iter()
        .map(|t| CacheKey::new(backend.id(), source, target, t))
        .collect();

    // distinct uncached texts in first-appearance order
    let mut resolved: HashMap<&CacheKey, String> = HashMap::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut queued: HashMap<&CacheKey, ()> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        if resolved.contains_key(key) || queued.contains_key(key) {
            continue;
        }
        match cache.get(key) {
            Some(hit) => {
                resolved.insert(key, hit);
            }
            None => {
                queued.insert(key, ());
                pending.push(i);
            }
        }
    }

    let batches: Vec<&[usize]> = pending.chunks(options.batch_size.max(1)).collect();
    let results: Mutex<Vec<Option<Result<Vec<String>>>>> =
        Mutex::new((0..batches.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let work = || loop {
        let b = next.fetch_add(1, Ordering::SeqCst);
        let Some(batch) = batches.get(b) else { break };
        let batch_texts: Vec<String> = batch.iter().map(|&i| texts[i].clone()).collect();
        let outcome = backend
            .translate_batch(&batch_texts, source, target)
            .and_then(|out| {
                if out.len() != batch_texts.len() {
                    return Err(Error::Translation {
                        message: format!(
                            "backend `{}` returned {} texts for a batch of {}",
                            backend.id(),
                            out.len(),
                            batch_texts.len()
                        ),
                        retryable: false,
                        location: None,
                    });
                }
                let items = batch.iter().map(|&i| keys[i].clone()).zip(out.clone()).collect();
                cache.insert_all(items)?;
                Ok(out)
            });
        let failed = outcome.is_err();
        results.lock().expect("results lock")[b] = Some(outcome);
        if failed {
            break;
        }
    };
    let workers = options.parallelism.clamp(1, batches.len().max(1));
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }

    for (batch, outcome) in batches.iter().zip(results.into_inner().expect("results lock")) {
        match outcome {
            Some(Ok(out)) => {
                for (&i, t) in batch.iter().zip(out) {
                    resolved.insert(&keys[i], t);
                }
            }
            Some(Err(error)) => return Err(IndexedError { index: batch[0], error }),
            // a sibling worker failed before this batch ran
            None => continue,
        }
    }
    keys.iter()
        .enumerate()
        .map(|(i, k)| {
            resolved.get(k).cloned().ok_or_else(|| IndexedError {
                index: i,
                error: Error::Translation {
                    message: "translation aborted after an earlier batch failed".into(),
                    retryable: true,
                    location: None,
                },
            })
        })
        .collect()
}

/// Translates `texts`, consulting and filling `cache`. Each distinct uncached
/// text reaches the backend at most once.
pub fn translate_texts(
    backend: &dyn TranslationBackend,
    texts: &[String],
    source: &str,
    target: &str,
    cache: &TranslationCache,
    options: TranslateOptions,
) -> Result<Vec<String>> {
    translate_indexed(backend, texts, source, target, cache, options).map_err(|e| e.error)
}

/// Sentence-by-sentence translation of a whole corpus. Document structure,
/// claim spans and categories are preserved; only the sentence texts and the
/// language tag change, and character offsets are dropped.
pub fn translate_corpus(
    corpus: &AnnotatedCorpus,
    backend: &dyn TranslationBackend,
    target: &str,
    cache: &TranslationCache,
    options: TranslateOptions,
) -> Result<AnnotatedCorpus> {
    let source = corpus.language();
    if source == target {
        return Err(Error::Config(format!(
            "corpus is already in `{target}`; nothing to translate"
        )));
    }
    let mut coords = Vec::with_capacity(corpus.n_sentences());
    let mut texts = Vec::with_capacity(corpus.n_sentences());
    for doc in corpus.documents() {
        for (i, s) in doc.sentences.iter().enumerate() {
            coords.push((doc.id.clone(), i));
            texts.push(s.clone());
        }
    }
    let translated = translate_indexed(backend, &texts, source, target, cache, options).map_err(
        |IndexedError { index, error }| match error {
            Error::Translation {
                message, retryable, ..
            } => Error::Translation {
                message,
                retryable,
                location: coords.get(index).cloned(),
            },
            other => other,
        },
    )?;
    let mut it = translated.into_iter();
    let per_doc: Vec<Vec<String>> = corpus
        .documents()
        .iter()
        .map(|d| it.by_ref().take(d.sentences.len()).collect())
        .collect();
    Ok(corpus.with_texts(per_doc, target))
}

/// Source -> pivot -> source round trip, used to simulate translate-test on
/// source-language gold data.
pub fn back_translate_corpus(
    corpus: &AnnotatedCorpus,
    backend: &dyn TranslationBackend,
    pivot: &str,
    cache: &TranslationCache,
    options: TranslateOptions,
) -> Result<AnnotatedCorpus> {
    let source = corpus.language().to_string();
    if !backend.supports(pivot, &source) {
        return Err(Error::Config(format!(
            "backend `{}` does not support the return leg {pivot}->{source}",
            backend.id()
        )));
    }
    let there = translate_corpus(corpus, backend, pivot, cache, options)?;
    translate_corpus(&there, backend, &source, cache, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_stats, ClaimSpan, Codebook, Document};
    use chrono::NaiveDate;

    fn corpus() -> AnnotatedCorpus {
        let doc = |id: &str, s: &[&str]| Document {
            id: id.into(),
            outlet: "taz".into(),
            date: NaiveDate::from_ymd_opt(2015, 9, 1).unwrap(),
            language: "de".into(),
            sentences: s.iter().map(|x| x.to_string()).collect(),
        };
        let mut span = ClaimSpan::new("a", vec![0], &["C1"]);
        span.char_start = Some(0);
        span.char_end = Some(3);
        AnnotatedCorpus::new(
            vec![doc("a", &["Das Haus", "Der Hund"]), doc("b", &["Das Haus"])],
            vec![span, ClaimSpan::new("b", vec![0], &["C2", "C3"])],
            Codebook::debatenet(),
            None,
        )
        .unwrap()
    }

    fn dict() -> DictionaryBackend {
        DictionaryBackend::new("dict")
            .with_pair("de", "en", [("das", "the"), ("haus", "house"), ("der", "the"), ("hund", "dog")])
            .with_pair("en", "de", [("the", "das"), ("house", "haus"), ("dog", "hund")])
    }

    #[test]
    fn identity_is_noop_on_texts() {
        let cache = TranslationCache::in_memory();
        let texts = vec!["a".to_string(), "b".to_string()];
        let out = translate_texts(&IdentityBackend, &texts, "de", "en", &cache, Default::default())
            .unwrap();
        assert_eq!(out, texts);
    }

    #[test]
    fn dictionary_and_cache_contract() {
        let cache = TranslationCache::in_memory();
        let backend = CountingBackend::new(dict());
        let texts = vec!["Haus".to_string(), "Haus".to_string(), "Hund".to_string()];
        let out = translate_texts(&backend, &texts, "de", "en", &cache, Default::default()).unwrap();
        assert_eq!(out, vec!["House", "House", "Dog"]);
        assert_eq!(backend.texts(), 2);
        let calls = backend.calls();
        let again = translate_texts(&backend, &texts, "de", "en", &cache, Default::default()).unwrap();
        assert_eq!(again, out);
        assert_eq!(backend.calls(), calls);
    }

    #[test]
    fn parallel_batches_reassemble_in_order() {
        let cache = TranslationCache::in_memory();
        let backend = CountingBackend::new(dict());
        let texts: Vec<String> = (0..50).map(|i| format!("Haus {i}")).collect();
        let opts = TranslateOptions {
            batch_size: 3,
            parallelism: 4,
        };
        let out = translate_texts(&backend, &texts, "de", "en", &cache, opts).unwrap();
        for (i, t) in out.iter().enumerate() {
            assert_eq!(t, &format!("House {i}"));
        }
        assert_eq!(backend.calls(), 17);
    }

    #[test]
    fn unsupported_pair_is_config_error() {
        let cache = TranslationCache::in_memory();
        let r = translate_texts(&dict(), &["x".into()], "de", "fr", &cache, Default::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn corpus_translation_preserves_labels() {
        let c = corpus();
        let cache = TranslationCache::in_memory();
        let en = translate_corpus(&c, &dict(), "en", &cache, Default::default()).unwrap();
        assert_eq!(en.language(), "en");
        assert_eq!(en.documents()[0].sentences, vec!["The House", "The Dog"]);
        assert_eq!(corpus_stats(&en), corpus_stats(&c));
        assert_eq!(en.claims()[0].char_start, None);
        assert_eq!(en.claims()[1].categories, c.claims()[1].categories);
        assert!(translate_corpus(&c, &dict(), "de", &cache, Default::default()).is_err());
    }

    #[test]
    fn identity_round_trip_is_text_identical() {
        let c = corpus();
        let cache = TranslationCache::in_memory();
        let back =
            back_translate_corpus(&c, &IdentityBackend, "en", &cache, Default::default()).unwrap();
        assert_eq!(back.language(), "de");
        for (a, b) in back.documents().iter().zip(c.documents()) {
            assert_eq!(a.sentences, b.sentences);
        }
    }

    struct Failing;

    impl TranslationBackend for Failing {
        fn id(&self) -> &str {
            "failing"
        }
        fn supports(&self, _: &str, _: &str) -> bool {
            true
        }
        fn translate_batch(&self, texts: &[String], _: &str, _: &str) -> Result<Vec<String>> {
            if texts.iter().any(|t| t.contains("Hund")) {
                Err(Error::Translation {
                    message: "boom".into(),
                    retryable: true,
                    location: None,
                })
            } else {
                Ok(texts.to_vec())
            }
        }
    }

    #[test]
    fn errors_carry_coordinates() {
        let cache = TranslationCache::in_memory();
        let opts = TranslateOptions {
            batch_size: 1,
            parallelism: 1,
        };
        match translate_corpus(&corpus(), &Failing, "en", &cache, opts) {
            Err(Error::Translation { location, retryable, .. }) => {
                assert_eq!(location, Some(("a".to_string(), 1)));
                assert!(retryable);
            }
            other => panic!("expected translation error, got {other:?}"),
        }
        // the batch before the failure was cached
        assert_eq!(cache.len(), 1);
    }
}
