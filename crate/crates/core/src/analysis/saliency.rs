use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::evaluation::NO_CLAIM_LABEL;
use crate::models::{ClaimModel, ModelTask, SparseVector};
use crate::{Error, Result};

/// Attribution procedure recorded with every map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaliencyMethod {
    /// L2 norm of (embedding gradient ⊙ embedding) per token, divided by the
    /// sentence maximum.
    GradientTimesInputMaxNormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyMap {
    pub text: String,
    pub tokens: Vec<String>,
    pub scores: Vec<f64>,
    pub target: String,
    pub model_id: String,
    /// All raw attributions were zero; scores are all zero.
    pub degenerate: bool,
    pub method: SaliencyMethod,
}

/// Per-token relevance of `text` for the model's score of `target`.
///
/// `target` is one of the model's labels; binary models also accept
/// `no_claim`, whose score is one minus the claim score.
pub fn token_saliency(model: &ClaimModel, text: &str, target: &str) -> Result<SaliencyMap> {
    let diff = model.encoder().differentiable().ok_or_else(|| {
        Error::Capability(format!(
            "encoder {} does not expose input-embedding gradients",
            model.encoder().id()
        ))
    })?;
    let (tokens, embeddings): (Vec<String>, Vec<SparseVector>) =
        diff.token_embeddings(text).into_iter().unzip();
    let mut map = saliency_from_embeddings(model, &tokens, &embeddings, target)?;
    map.text = text.to_string();
    Ok(map)
}

/// Saliency for explicit token embeddings, e.g. with some of them replaced.
pub fn saliency_from_embeddings(
    model: &ClaimModel,
    tokens: &[String],
    embeddings: &[SparseVector],
    target: &str,
) -> Result<SaliencyMap> {
    let diff = model.encoder().differentiable().ok_or_else(|| {
        Error::Capability(format!(
            "encoder {} does not expose input-embedding gradients",
            model.encoder().id()
        ))
    })?;
    if tokens.is_empty() {
        return Err(Error::Validation("sentence has no tokens".into()));
    }
    if tokens.len() != embeddings.len() {
        return Err(Error::Validation("tokens and embeddings differ in length".into()));
    }
    let (k, sign) = match model.labels().iter().position(|l| l == target) {
        Some(k) => (k, 1.0),
        None if model.task() == ModelTask::Binary && target == NO_CLAIM_LABEL => (0, -1.0),
        None => {
            return Err(Error::Validation(format!(
                "target `{target}` is not a label of model {}",
                model.id()
            )))
        }
    };
    let pooled = diff.pool(embeddings);
    let s = model.head().scores(&pooled)[k];
    let ds_dz = sign * s * (1.0 - s);
    let grad_pooled: Vec<f64> = model.head().weights[k].iter().map(|w| ds_dz * w).collect();
    let grads = diff.pool_backward(embeddings, &grad_pooled);
    let raw: Vec<f64> = grads
        .iter()
        .zip(embeddings)
        .map(|(g, e)| e.iter().map(|(i, v)| (g[i] * v).powi(2)).sum::<f64>().sqrt())
        .collect();
    let max = raw.iter().cloned().fold(0.0, f64::max);
    let degenerate = max == 0.0;
    let scores = if degenerate {
        vec![0.0; raw.len()]
    } else {
        raw.iter().map(|r| r / max).collect()
    };
    Ok(SaliencyMap {
        text: tokens.join(" "),
        tokens: tokens.to_vec(),
        scores,
        target: target.to_string(),
        model_id: model.id().to_string(),
        degenerate,
        method: SaliencyMethod::GradientTimesInputMaxNormalized,
    })
}

pub fn render_saliency(map: &SaliencyMap) -> String {
    let w = map.tokens.iter().map(|t| t.chars().count()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "target: {}  model: {}", map.target, map.model_id);
    if map.degenerate {
        out.push_str("(degenerate: all attributions are zero)\n");
    }
    let _ = writeln!(out, "{:<w$}  score", "token");
    for (t, s) in map.tokens.iter().zip(&map.scores) {
        let _ = writeln!(out, "{t:<w$}  {s:.3}");
    }
    out
}
