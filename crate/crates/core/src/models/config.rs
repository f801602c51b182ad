use serde::{Deserialize, Serialize};

use super::Casing;
use crate::evaluation::Task;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTask {
    Binary,
    Multilabel,
}

impl From<Task> for ModelTask {
    fn from(t: Task) -> Self {
        match t {
            Task::Identification => ModelTask::Binary,
            Task::Categorization => ModelTask::Multilabel,
        }
    }
}

impl From<ModelTask> for Task {
    fn from(t: ModelTask) -> Self {
        match t {
            ModelTask::Binary => Task::Identification,
            ModelTask::Multilabel => Task::Categorization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub warmup_steps: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub task: ModelTask,
    pub decision_threshold: f64,
}

impl Default for TrainConfig {
    /// Defaults for the hashed bag-of-words encoder. Transformer presets
    /// live in [`transformer_preset`].
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            warmup_steps: 30,
            epochs: 10,
            batch_size: 16,
            seed: 0,
            task: ModelTask::Binary,
            decision_threshold: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn for_task(task: ModelTask) -> Self {
        TrainConfig {
            task,
            warmup_steps: match task {
                ModelTask::Binary => 30,
                ModelTask::Multilabel => 25,
            },
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::Config(format!(
                "decision_threshold must lie in (0, 1), got {}",
                self.decision_threshold
            )));
        }
        Ok(())
    }

    /// Learning rate for optimizer step `step` (0-based) out of `total`:
    /// linear warm-up, then linear decay towards zero.
    pub fn learning_rate_at(&self, step: usize, total: usize) -> f64 {
        if step < self.warmup_steps {
            return self.learning_rate * (step + 1) as f64 / self.warmup_steps as f64;
        }
        let remaining = total.saturating_sub(self.warmup_steps).max(1);
        self.learning_rate * total.saturating_sub(step) as f64 / remaining as f64
    }
}

/// Pretrained-transformer setup used for one language and task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformerPreset {
    pub model: &'static str,
    pub casing: Casing,
    pub learning_rate: f64,
    pub warmup_steps: usize,
}

/// Transformer fine-tuning hyperparameters per task and language; `None`
/// selects the multilingual model. Epoch counts are not part of the preset
/// and stay at the [`TrainConfig`] default.
pub fn transformer_preset(task: ModelTask, language: Option<&str>) -> Option<TransformerPreset> {
    use Casing::*;
    let p = |model, casing, learning_rate, warmup_steps| TransformerPreset {
        model,
        casing,
        learning_rate,
        warmup_steps,
    };
    Some(match (task, language) {
        (ModelTask::Binary, Some("en")) => p("bert-base-uncased", Uncased, 5e-5, 30),
        (ModelTask::Binary, Some("de")) => p("bert-base-german-cased", Cased, 5e-5, 30),
        (ModelTask::Binary, Some("fr")) => p("camembert-base", Cased, 4e-5, 30),
        (ModelTask::Binary, None) => p("bert-base-multilingual-cased", Cased, 2.5e-5, 30),
        (ModelTask::Multilabel, Some("en")) => p("bert-base-uncased", Uncased, 5e-5, 25),
        (ModelTask::Multilabel, Some("de")) => p("bert-base-german-cased", Cased, 4e-5, 25),
        (ModelTask::Multilabel, Some("fr")) => p("camembert-base", Cased, 4e-5, 25),
        (ModelTask::Multilabel, None) => p("bert-base-multilingual-uncased", Uncased, 3e-5, 25),
        _ => return None,
    })
}

impl TransformerPreset {
    pub fn train_config(&self, task: ModelTask, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            warmup_steps: self.warmup_steps,
            seed,
            task,
            ..TrainConfig::default()
        }
    }
}
