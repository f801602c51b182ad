use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Encoder, EncoderSpec, LinearHead, ModelTask, TrainConfig};
use crate::evaluation::CLAIM_LABEL;
use crate::hashing::sha256_hex;
use crate::{Error, Execution, Result};

/// A trained sentence classifier: encoder plus sigmoid head. Immutable once
/// built and safe to share between threads.
#[derive(Clone)]
pub struct ClaimModel {
    id: String,
    encoder: Arc<dyn Encoder>,
    head: LinearHead,
    task: ModelTask,
    labels: Vec<String>,
    config: TrainConfig,
}

impl std::fmt::Debug for ClaimModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClaimModel")
            .field("id", &self.id)
            .field("encoder", &self.encoder.id())
            .field("task", &self.task)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryPrediction {
    pub label: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilabelPrediction {
    pub labels: BTreeSet<String>,
    /// One score per entry of the model's label space, in order.
    pub scores: Vec<f64>,
}

/// Serialized form of a [`ClaimModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub id: String,
    pub encoder: EncoderSpec,
    pub task: ModelTask,
    pub labels: Vec<String>,
    pub config: TrainConfig,
    pub head: LinearHead,
}

const CHECKPOINT_VERSION: u32 = 1;

impl ClaimModel {
    pub fn new(
        encoder: Arc<dyn Encoder>,
        head: LinearHead,
        task: ModelTask,
        labels: Vec<String>,
        config: TrainConfig,
    ) -> Result<Self> {
        head.validate()?;
        if head.n_outputs() != labels.len() || head.dim() != encoder.dim() {
            return Err(Error::Validation(format!(
                "head shape {}x{} does not match {} labels over dimension {}",
                head.n_outputs(),
                head.dim(),
                labels.len(),
                encoder.dim()
            )));
        }
        if task == ModelTask::Binary && labels != [CLAIM_LABEL] {
            return Err(Error::Validation("binary models have the single label `claim`".into()));
        }
        let digest = {
            let mut bytes = Vec::new();
            for row in head.weights.iter().chain(std::iter::once(&head.bias)) {
                for v in row {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
            sha256_hex(&bytes)
        };
        let id = format!("{}-{:?}-{}", encoder.id(), task, &digest[..12]).to_lowercase();
        Ok(ClaimModel {
            id,
            encoder,
            head,
            task,
            labels,
            config,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn encoder(&self) -> &Arc<dyn Encoder> {
        &self.encoder
    }

    pub fn head(&self) -> &LinearHead {
        &self.head
    }

    pub fn task(&self) -> ModelTask {
        self.task
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Per-label sigmoid scores for one sentence.
    pub fn scores(&self, text: &str) -> Vec<f64> {
        self.head.scores(&self.encoder.encode_sparse(text))
    }

    fn require(&self, task: ModelTask) -> Result<()> {
        if self.task != task {
            return Err(Error::Capability(format!(
                "model {} is {:?}, not {:?}",
                self.id, self.task, task
            )));
        }
        Ok(())
    }

    pub fn predict_binary(&self, texts: &[String]) -> Result<Vec<BinaryPrediction>> {
        self.predict_binary_with(texts, Execution::default())
    }

    /// Label is `score >= 0.5`, independent of the configured threshold.
    pub fn predict_binary_with(&self, texts: &[String], exec: Execution) -> Result<Vec<BinaryPrediction>> {
        self.require(ModelTask::Binary)?;
        Ok(exec.map(texts, |t| {
            let score = self.scores(t)[0];
            BinaryPrediction {
                label: score >= 0.5,
                score,
            }
        }))
    }

    pub fn predict_multilabel(&self, texts: &[String]) -> Result<Vec<MultilabelPrediction>> {
        self.predict_multilabel_with(texts, self.config.decision_threshold, Execution::default())
    }

    /// Includes a label iff its score is at least `threshold`.
    pub fn predict_multilabel_with(
        &self,
        texts: &[String],
        threshold: f64,
        exec: Execution,
    ) -> Result<Vec<MultilabelPrediction>> {
        self.require(ModelTask::Multilabel)?;
        Ok(exec.map(texts, |t| {
            let scores = self.scores(t);
            MultilabelPrediction {
                labels: self.select(&scores, threshold),
                scores,
            }
        }))
    }

    pub(crate) fn select(&self, scores: &[f64], threshold: f64) -> BTreeSet<String> {
        self.labels
            .iter()
            .zip(scores)
            .filter(|(_, &s)| s >= threshold)
            .map(|(l, _)| l.clone())
            .collect()
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let encoder = self.encoder.spec().ok_or_else(|| {
            Error::Capability(format!("encoder {} cannot be serialized", self.encoder.id()))
        })?;
        Ok(Checkpoint {
            format_version: CHECKPOINT_VERSION,
            id: self.id.clone(),
            encoder,
            task: self.task,
            labels: self.labels.clone(),
            config: self.config.clone(),
            head: self.head.clone(),
        })
    }

    pub fn from_checkpoint(cp: Checkpoint) -> Result<Self> {
        if cp.format_version != CHECKPOINT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported checkpoint version {}",
                cp.format_version
            )));
        }
        let encoder = cp.encoder.build()?;
        ClaimModel::new(encoder, cp.head, cp.task, cp.labels, cp.config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(&self.checkpoint()?)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ClaimModel::from_checkpoint(serde_json::from_str(&text)?)
    }
}
