use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Batch machine-translation service.
///
/// Implementations must return exactly one output per input, in input order.
pub trait TranslationBackend: Send + Sync {
    fn id(&self) -> &str;

    fn supports(&self, source: &str, target: &str) -> bool;

    fn translate_batch(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>>;
}

impl<B: TranslationBackend + ?Sized> TranslationBackend for std::sync::Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn supports(&self, source: &str, target: &str) -> bool {
        (**self).supports(source, target)
    }

    fn translate_batch(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>> {
        (**self).translate_batch(texts, source, target)
    }
}

/// Returns every text unchanged; supports every language pair.
#[derive(Debug, Clone, Default)]
pub struct IdentityBackend;

impl TranslationBackend for IdentityBackend {
    fn id(&self) -> &str {
        "identity"
    }

    fn supports(&self, _source: &str, _target: &str) -> bool {
        true
    }

    fn translate_batch(&self, texts: &[String], _: &str, _: &str) -> Result<Vec<String>> {
        Ok(texts.to_vec())
    }
}

/// Word-by-word substitution from per-direction lexicons.
///
/// Words are maximal alphanumeric runs; everything else is copied. Lookup is
/// exact first, then lowercased with the leading capital restored. Unknown
/// words pass through.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DictionaryBackend {
    id: String,
    pairs: Vec<LexiconPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconPair {
    pub source: String,
    pub target: String,
    pub entries: HashMap<String, String>,
}

impl DictionaryBackend {
    pub fn new(id: impl Into<String>) -> Self {
        DictionaryBackend {
            id: id.into(),
            pairs: Vec::new(),
        }
    }

    pub fn with_pair<I, K, V>(mut self, source: &str, target: &str, entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let entries = entries.into_iter().map(|(k, v)| (k.into(), v.into())).collect();
        self.pairs.retain(|p| !(p.source == source && p.target == target));
        self.pairs.push(LexiconPair {
            source: source.to_string(),
            target: target.to_string(),
            entries,
        });
        self
    }

    /// Adds the reverse direction of an existing pair. When several source
    /// words share a translation, the lexicographically first one wins.
    pub fn with_inverse(self, source: &str, target: &str) -> Self {
        let Some(pair) = self.lexicon(source, target) else {
            return self;
        };
        let mut keys: Vec<(&String, &String)> = pair.iter().collect();
        keys.sort();
        let mut inverse: HashMap<String, String> = HashMap::new();
        for (k, v) in keys {
            inverse.entry(v.clone()).or_insert_with(|| k.clone());
        }
        self.with_pair(target, source, inverse)
    }

    pub fn lexicon(&self, source: &str, target: &str) -> Option<&HashMap<String, String>> {
        self.pairs
            .iter()
            .find(|p| p.source == source && p.target == target)
            .map(|p| &p.entries)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn translate_text(lexicon: &HashMap<String, String>, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let mut word = String::new();
        let flush = |word: &mut String, out: &mut String| {
            if word.is_empty() {
                return;
            }
            out.push_str(&lookup(lexicon, word));
            word.clear();
        };
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                word.push(ch);
            } else {
                flush(&mut word, &mut out);
                out.push(ch);
            }
        }
        flush(&mut word, &mut out);
        out
    }
}

fn lookup(lexicon: &HashMap<String, String>, word: &str) -> String {
    if let Some(t) = lexicon.get(word) {
        return t.clone();
    }
    let lower = word.to_lowercase();
    match lexicon.get(&lower) {
        Some(t) if word.chars().next().is_some_and(char::is_uppercase) => {
            let mut chars = t.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
        Some(t) => t.clone(),
        None => word.to_string(),
    }
}

impl TranslationBackend for DictionaryBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn supports(&self, source: &str, target: &str) -> bool {
        self.lexicon(source, target).is_some()
    }

    fn translate_batch(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>> {
        let lexicon = self.lexicon(source, target).ok_or_else(|| {
            Error::Config(format!(
                "backend `{}` has no lexicon for {source}->{target}",
                self.id
            ))
        })?;
        Ok(texts
            .iter()
            .map(|t| Self::translate_text(lexicon, t))
            .collect())
    }
}

/// Wraps a backend and counts how often it is called.
#[derive(Debug, Default)]
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicUsize,
    texts: AtomicUsize,
}

impl<B> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        CountingBackend {
            inner,
            calls: AtomicUsize::new(0),
            texts: AtomicUsize::new(0),
        }
    }

    /// Number of `translate_batch` invocations.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Total number of texts sent to the inner backend.
    pub fn texts(&self) -> usize {
        self.texts.load(Ordering::SeqCst)
    }
}

impl<B: TranslationBackend> TranslationBackend for CountingBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn supports(&self, source: &str, target: &str) -> bool {
        self.inner.supports(source, target)
    }

    fn translate_batch(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.texts.fetch_add(texts.len(), Ordering::SeqCst);
        self.inner.translate_batch(texts, source, target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_substitutes_words_and_keeps_punctuation() {
        let b = DictionaryBackend::new("d").with_pair("de", "en", [("haus", "house"), ("das", "the")]);
        let out = b
            .translate_batch(&["Das Haus, bitte.".to_string()], "de", "en")
            .unwrap();
        assert_eq!(out, vec!["The House, bitte."]);
        assert!(b.supports("de", "en"));
        assert!(!b.supports("en", "de"));
    }

    #[test]
    fn exact_match_wins_over_lowercase() {
        let b = DictionaryBackend::new("d").with_pair("de", "en", [("Haus", "house")]);
        let out = b.translate_batch(&["Haus".to_string()], "de", "en").unwrap();
        assert_eq!(out, vec!["house"]);
    }

    #[test]
    fn inverse_is_deterministic_under_collisions() {
        let b = DictionaryBackend::new("d")
            .with_pair("de", "en", [("heute", "now"), ("jetzt", "now"), ("haus", "house")])
            .with_inverse("de", "en");
        let inv = b.lexicon("en", "de").unwrap();
        assert_eq!(inv["now"], "heute");
        assert_eq!(inv["house"], "haus");
    }

    #[test]
    fn unsupported_pair_is_config_error() {
        let b = DictionaryBackend::new("d");
        assert!(matches!(
            b.translate_batch(&[], "de", "fr"),
            Err(Error::Config(_))
        ));
    }
}
