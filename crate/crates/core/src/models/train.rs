use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::head::Adam;
use super::{ClaimModel, Encoder, LinearHead, ModelTask, SparseVector, TrainConfig};
use crate::corpus::SentenceExample;
use crate::evaluation::{confusion, f1_positive, multilabel_report, CLAIM_LABEL};
use crate::{Error, Execution, Result};

/// Bias of the constant model returned for single-class binary data.
const MAJORITY_BIAS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    #[serde(default)]
    pub dev_score: Option<f64>,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned (1-based).
    pub selected_epoch: Option<usize>,
    pub majority_model: bool,
    pub warnings: Vec<String>,
}

impl TrainingLog {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.epochs {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ClaimModel,
    pub log: TrainingLog,
}

fn targets(examples: &[SentenceExample], task: ModelTask, labels: &[String]) -> Vec<Vec<f64>> {
    examples
        .iter()
        .map(|e| match task {
            ModelTask::Binary => vec![if e.is_claim { 1.0 } else { 0.0 }],
            ModelTask::Multilabel => labels
                .iter()
                .map(|l| if e.top_categories.contains(l) { 1.0 } else { 0.0 })
                .collect(),
        })
        .collect()
}

fn dev_score(
    head: &LinearHead,
    xs: &[SparseVector],
    examples: &[SentenceExample],
    task: ModelTask,
    labels: &[String],
    threshold: f64,
) -> Result<f64> {
    match task {
        ModelTask::Binary => {
            let gold: Vec<bool> = examples.iter().map(|e| e.is_claim).collect();
            let pred: Vec<bool> = xs.iter().map(|x| head.scores(x)[0] >= 0.5).collect();
            Ok(f1_positive(&confusion(&gold, &pred)?).f1)
        }
        ModelTask::Multilabel => {
            let gold: Vec<_> = examples.iter().map(|e| e.top_categories.clone()).collect();
            let pred: Vec<_> = xs
                .iter()
                .map(|x| {
                    labels
                        .iter()
                        .zip(head.scores(x))
                        .filter(|(_, s)| *s >= threshold)
                        .map(|(l, _)| l.clone())
                        .collect()
                })
                .collect();
            Ok(multilabel_report(&gold, &pred, labels)?.macro_avg.f1)
        }
    }
}

/// Trains a linear sigmoid head on frozen encoder features.
///
/// `labels` is the label space for multilabel training (the top-level
/// codes); binary training ignores it and uses the single `claim` output.
/// The returned parameters are those of the epoch with the highest dev
/// score, the earliest such epoch on ties.
pub fn train(
    examples: &[SentenceExample],
    dev: &[SentenceExample],
    encoder: Arc<dyn Encoder>,
    config: &TrainConfig,
    labels: &[String],
    exec: Execution,
) -> Result<TrainOutcome> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::Validation("training set is empty".into()));
    }
    let labels: Vec<String> = match config.task {
        ModelTask::Binary => vec![CLAIM_LABEL.to_string()],
        ModelTask::Multilabel => {
            if labels.is_empty() {
                return Err(Error::Config("multilabel training needs a label space".into()));
            }
            labels.to_vec()
        }
    };
    if let Some(bad) = examples
        .iter()
        .chain(dev)
        .flat_map(|e| &e.top_categories)
        .find(|c| config.task == ModelTask::Multilabel && !labels.contains(c))
    {
        return Err(Error::Validation(format!("category `{bad}` is outside the label space")));
    }
    let mut log = TrainingLog::default();
    let dim = encoder.dim();

    if config.task == ModelTask::Binary {
        let positives = examples.iter().filter(|e| e.is_claim).count();
        if positives == 0 || positives == examples.len() {
            log.warn(format!(
                "training data has a single class ({}); returning a majority-class model",
                if positives == 0 { "negative" } else { "positive" }
            ));
            let mut head = LinearHead::zeros(1, dim);
            head.bias[0] = if positives == 0 { -MAJORITY_BIAS } else { MAJORITY_BIAS };
            log.majority_model = true;
            let model = ClaimModel::new(encoder, head, config.task, labels, config.clone())?;
            return Ok(TrainOutcome { model, log });
        }
    }
    if dev.is_empty() {
        log.warn("dev set is empty; returning last-epoch parameters".into());
    }

    let xs: Vec<SparseVector> = exec.map(examples, |e| encoder.encode_sparse(&e.text));
    let dev_xs: Vec<SparseVector> = exec.map(dev, |e| encoder.encode_sparse(&e.text));
    let ys = targets(examples, config.task, &labels);

    let mut head = LinearHead::zeros(labels.len(), dim);
    let mut opt = Adam::new(&head);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let steps_per_epoch = examples.len().div_ceil(config.batch_size);
    let total = steps_per_epoch * config.epochs;
    let mut step = 0usize;
    let mut best: Option<(f64, usize, LinearHead)> = None;
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut lr = 0.0;
        for batch in order.chunks(config.batch_size) {
            let bx: Vec<&SparseVector> = batch.iter().map(|&i| &xs[i]).collect();
            let by: Vec<&[f64]> = batch.iter().map(|&i| ys[i].as_slice()).collect();
            let (loss, grad) = head.loss_and_gradient(&bx, &by);
            loss_sum += loss * batch.len() as f64;
            lr = config.learning_rate_at(step, total);
            opt.step(&mut head, &grad, lr);
            step += 1;
        }
        let score = if dev.is_empty() {
            None
        } else {
            Some(dev_score(
                &head,
                &dev_xs,
                dev,
                config.task,
                &labels,
                config.decision_threshold,
            )?)
        };
        log::debug!("epoch {epoch}: loss {:.5} dev {score:?}", loss_sum / examples.len() as f64);
        log.epochs.push(EpochRecord {
            epoch,
            loss: loss_sum / examples.len() as f64,
            dev_score: score,
            learning_rate: lr,
        });
        if let Some(s) = score {
            if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
                best = Some((s, epoch, head.clone()));
            }
        }
    }

    let head = match best {
        Some((_, epoch, h)) => {
            log.selected_epoch = Some(epoch);
            h
        }
        None => {
            log.selected_epoch = Some(config.epochs);
            head
        }
    };
    let model = ClaimModel::new(encoder, head, config.task, labels, config.clone())?;
    Ok(TrainOutcome { model, log })
}
