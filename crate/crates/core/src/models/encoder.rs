use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::hashing::fnv1a64;
use crate::{Error, Result};

/// Sorted, duplicate-free sparse vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    /// Builds from unsorted pairs, summing duplicates and dropping zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut out = SparseVector::default();
        for (i, v) in pairs {
            match out.indices.last() {
                Some(&last) if last == i => *out.values.last_mut().expect("parallel vecs") += v,
                _ => {
                    out.indices.push(i);
                    out.values.push(v);
                }
            }
        }
        let keep: Vec<bool> = out.values.iter().map(|v| *v != 0.0).collect();
        if keep.iter().any(|k| !k) {
            let mut k = keep.iter();
            out.indices.retain(|_| *k.next().expect("same length"));
            let mut k = keep.iter();
            out.values.retain(|_| *k.next().expect("same length"));
        }
        out
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let mut out = SparseVector::default();
        for (i, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                out.indices.push(i as u32);
                out.values.push(v);
            }
        }
        out
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i as usize] += v;
        }
        out
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| dense[i as usize] * v)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Casing {
    Cased,
    #[default]
    Uncased,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageScope {
    Mono(String),
    Multilingual,
}

impl LanguageScope {
    pub fn covers(&self, language: &str) -> bool {
        match self {
            LanguageScope::Mono(l) => l == language,
            LanguageScope::Multilingual => true,
        }
    }
}

impl std::fmt::Display for LanguageScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LanguageScope::Mono(l) => write!(f, "mono-{l}"),
            LanguageScope::Multilingual => f.write_str("multilingual"),
        }
    }
}

/// Sentence encoder contract. Encoders are deterministic for fixed
/// parameters and safe to share between threads.
pub trait Encoder: Send + Sync {
    fn id(&self) -> &str;
    fn dim(&self) -> usize;
    fn casing(&self) -> Casing;
    fn scope(&self) -> &LanguageScope;
    fn trainable(&self) -> bool {
        false
    }
    fn tokenize(&self, text: &str) -> Vec<String>;
    fn encode(&self, text: &str) -> Vec<f64>;
    fn encode_sparse(&self, text: &str) -> SparseVector {
        SparseVector::from_dense(&self.encode(text))
    }
    /// Serializable description, if the encoder can be rebuilt from one.
    fn spec(&self) -> Option<EncoderSpec> {
        None
    }
    /// Gradient access to per-token input embeddings, when supported.
    fn differentiable(&self) -> Option<&dyn Differentiable> {
        None
    }
}

/// Token-level view of an encoder whose sentence vector is a differentiable
/// pooling of per-token input embeddings.
pub trait Differentiable {
    /// Tokens with their input embeddings.
    fn token_embeddings(&self, text: &str) -> Vec<(String, SparseVector)>;
    /// Pools token embeddings into a sentence vector.
    fn pool(&self, embeddings: &[SparseVector]) -> SparseVector;
    /// Gradient with respect to each token embedding, given the gradient with
    /// respect to the pooled vector.
    fn pool_backward(&self, embeddings: &[SparseVector], grad_pooled: &[f64]) -> Vec<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncoderSpec {
    HashedBow(HashedBowSpec),
}

impl EncoderSpec {
    pub fn hashed_mono(language: &str) -> Self {
        EncoderSpec::HashedBow(HashedBowSpec {
            scope: LanguageScope::Mono(language.to_string()),
            ..HashedBowSpec::default()
        })
    }

    pub fn hashed_multilingual(alignment: BTreeMap<String, String>) -> Self {
        EncoderSpec::HashedBow(HashedBowSpec {
            scope: LanguageScope::Multilingual,
            alignment,
            ..HashedBowSpec::default()
        })
    }

    pub fn scope(&self) -> &LanguageScope {
        match self {
            EncoderSpec::HashedBow(s) => &s.scope,
        }
    }

    pub fn build(&self) -> Result<Arc<dyn Encoder>> {
        match self {
            EncoderSpec::HashedBow(s) => Ok(Arc::new(HashedBowEncoder::new(s.clone())?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HashedBowSpec {
    pub dim: usize,
    pub casing: Casing,
    pub scope: LanguageScope,
    pub seed: u64,
    /// Token-to-pivot mapping applied before hashing, so that translation
    /// equivalents share a feature. Keys are matched exactly, then lowercased.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub alignment: BTreeMap<String, String>,
}

impl Default for HashedBowSpec {
    fn default() -> Self {
        HashedBowSpec {
            dim: 4096,
            casing: Casing::Uncased,
            scope: LanguageScope::Multilingual,
            seed: 0,
            alignment: BTreeMap::new(),
        }
    }
}

/// Feature-hashing bag-of-words encoder. Each token embeds as a signed
/// one-hot vector; the sentence vector is their sum divided by the square
/// root of the token count.
#[derive(Debug, Clone)]
pub struct HashedBowEncoder {
    id: String,
    spec: HashedBowSpec,
    lower_alignment: BTreeMap<String, String>,
}

impl HashedBowEncoder {
    pub fn new(spec: HashedBowSpec) -> Result<Self> {
        if spec.dim == 0 || spec.dim > u32::MAX as usize {
            return Err(Error::Config(format!("encoder dimension {} out of range", spec.dim)));
        }
        let casing = match spec.casing {
            Casing::Cased => "cased",
            Casing::Uncased => "uncased",
        };
        let id = format!("hashed-bow-{}-{casing}-{}", spec.scope, spec.dim);
        let lower_alignment = spec
            .alignment
            .iter()
            .map(|(k, v)| (k.to_lowercase(), v.clone()))
            .collect();
        Ok(HashedBowEncoder {
            id,
            spec,
            lower_alignment,
        })
    }

    fn normalize(&self, token: &str) -> String {
        let aligned = self
            .spec
            .alignment
            .get(token)
            .or_else(|| self.lower_alignment.get(&token.to_lowercase()));
        let t = aligned.map_or(token, String::as_str);
        match self.spec.casing {
            Casing::Cased => t.to_string(),
            Casing::Uncased => t.to_lowercase(),
        }
    }

    fn feature(&self, token: &str) -> (u32, f64) {
        let h = fnv1a64(token.as_bytes(), self.spec.seed);
        let bucket = ((h >> 1) % self.spec.dim as u64) as u32;
        let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
        (bucket, sign)
    }
}

impl Encoder for HashedBowEncoder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn casing(&self) -> Casing {
        self.spec.casing
    }

    fn scope(&self) -> &LanguageScope {
        &self.spec.scope
    }

    fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(|w| match self.spec.casing {
                Casing::Cased => w.to_string(),
                Casing::Uncased => w.to_lowercase(),
            })
            .collect()
    }

    fn encode(&self, text: &str) -> Vec<f64> {
        self.encode_sparse(text).to_dense(self.spec.dim)
    }

    fn encode_sparse(&self, text: &str) -> SparseVector {
        let emb: Vec<SparseVector> = self
            .token_embeddings(text)
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        self.pool(&emb)
    }

    fn spec(&self) -> Option<EncoderSpec> {
        Some(EncoderSpec::HashedBow(self.spec.clone()))
    }

    fn differentiable(&self) -> Option<&dyn Differentiable> {
        Some(self)
    }
}

impl Differentiable for HashedBowEncoder {
    fn token_embeddings(&self, text: &str) -> Vec<(String, SparseVector)> {
        self.tokenize(text)
            .into_iter()
            .map(|t| {
                let (i, s) = self.feature(&self.normalize(&t));
                (
                    t,
                    SparseVector {
                        indices: vec![i],
                        values: vec![s],
                    },
                )
            })
            .collect()
    }

    fn pool(&self, embeddings: &[SparseVector]) -> SparseVector {
        if embeddings.is_empty() {
            return SparseVector::default();
        }
        let scale = 1.0 / (embeddings.len() as f64).sqrt();
        SparseVector::from_pairs(
            embeddings
                .iter()
                .flat_map(|e| e.iter().map(|(i, v)| (i as u32, v * scale)))
                .collect(),
        )
    }

    fn pool_backward(&self, embeddings: &[SparseVector], grad_pooled: &[f64]) -> Vec<Vec<f64>> {
        let scale = 1.0 / (embeddings.len().max(1) as f64).sqrt();
        let g: Vec<f64> = grad_pooled.iter().map(|v| v * scale).collect();
        vec![g; embeddings.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc() -> HashedBowEncoder {
        HashedBowEncoder::new(HashedBowSpec {
            dim: 64,
            ..HashedBowSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn fixed_dimension_and_deterministic() {
        let e = enc();
        let a = e.encode("Die Regierung fordert mehr Geld");
        assert_eq!(a.len(), 64);
        assert_eq!(a, e.encode("Die Regierung fordert mehr Geld"));
        assert_eq!(e.encode(""), vec![0.0; 64]);
    }

    #[test]
    fn pooled_norm_is_one_without_collisions() {
        let e = HashedBowEncoder::new(HashedBowSpec::default()).unwrap();
        let v = e.encode_sparse("alpha beta gamma delta");
        let norm: f64 = v.values.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncased_ignores_case() {
        let e = enc();
        assert_eq!(e.encode("Fordert"), e.encode("fordert"));
    }

    #[test]
    fn alignment_maps_translations_together() {
        let mut al = BTreeMap::new();
        al.insert("demands".to_string(), "fordert".to_string());
        let e = HashedBowEncoder::new(HashedBowSpec {
            alignment: al,
            ..HashedBowSpec::default()
        })
        .unwrap();
        assert_eq!(e.encode("Demands"), e.encode("fordert"));
    }

    #[test]
    fn spec_round_trips() {
        let spec = EncoderSpec::hashed_mono("de");
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EncoderSpec>(&json).unwrap(), spec);
        let built = spec.build().unwrap();
        assert_eq!(built.id(), "hashed-bow-mono-de-uncased-4096");
        assert_eq!(built.spec().unwrap(), spec);
    }

    #[test]
    fn sparse_from_pairs_merges() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, -1.0), (1, 0.5)]);
        assert_eq!(v.indices, vec![1]);
        assert_eq!(v.values, vec![2.5]);
    }
}
