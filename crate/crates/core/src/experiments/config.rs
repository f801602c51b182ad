use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evaluation::Task;
use crate::models::{EncoderSpec, LanguageScope, ModelTask, TrainConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentCondition {
    Baseline,
    TranslateTrain,
    TranslateTest,
    Multilingual,
}

impl ExperimentCondition {
    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            ExperimentCondition::Baseline => "BL (mono)",
            ExperimentCondition::TranslateTrain => "Translate-train",
            ExperimentCondition::TranslateTest => "Translate-test",
            ExperimentCondition::Multilingual => "Multilingual",
        }
    }
}

impl std::fmt::Display for ExperimentCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExperimentCondition::Baseline => "baseline",
            ExperimentCondition::TranslateTrain => "translate_train",
            ExperimentCondition::TranslateTest => "translate_test",
            ExperimentCondition::Multilingual => "multilingual",
        })
    }
}

impl std::str::FromStr for ExperimentCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "baseline" => Ok(ExperimentCondition::Baseline),
            "translate_train" => Ok(ExperimentCondition::TranslateTrain),
            "translate_test" => Ok(ExperimentCondition::TranslateTest),
            "multilingual" => Ok(ExperimentCondition::Multilingual),
            other => Err(Error::Config(format!("unknown condition `{other}`"))),
        }
    }
}

/// Encoders per role. Monolingual roles without an entry use the default
/// hashed encoder for that language; the multilingual role defaults to an
/// unaligned hashed encoder.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderRoles {
    pub monolingual: BTreeMap<String, EncoderSpec>,
    pub multilingual: Option<EncoderSpec>,
}

impl EncoderRoles {
    pub fn monolingual_for(&self, language: &str) -> Result<EncoderSpec> {
        let spec = self
            .monolingual
            .get(language)
            .cloned()
            .unwrap_or_else(|| EncoderSpec::hashed_mono(language));
        if spec.scope() != &LanguageScope::Mono(language.to_string()) {
            return Err(Error::Config(format!(
                "monolingual encoder for `{language}` has scope {}",
                spec.scope()
            )));
        }
        Ok(spec)
    }

    pub fn multilingual(&self) -> Result<EncoderSpec> {
        let spec = self
            .multilingual
            .clone()
            .unwrap_or_else(|| EncoderSpec::hashed_multilingual(BTreeMap::new()));
        if spec.scope() != &LanguageScope::Multilingual {
            return Err(Error::Config(format!(
                "multilingual encoder has scope {}",
                spec.scope()
            )));
        }
        Ok(spec)
    }
}

fn default_runs() -> usize {
    2
}

fn default_ratios() -> [f64; 3] {
    [0.8, 0.1, 0.1]
}

fn default_backend() -> String {
    "identity".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub condition: ExperimentCondition,
    pub source_lang: String,
    pub target_lang: String,
    pub task: Task,
    /// Registered name of the annotated source-language corpus.
    pub source_corpus: String,
    /// Registered name of an annotated target-language test corpus. Without
    /// one, target-language test data is projected by translating the source
    /// test split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_test_corpus: Option<String>,
    #[serde(default)]
    pub encoders: EncoderRoles,
    /// Defaults to `TrainConfig::for_task` of the task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    /// Run `i` trains with seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_ratios")]
    pub split_ratios: [f64; 3],
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default)]
    pub simulate_via_backtranslation: bool,
}

impl ExperimentConfig {
    pub fn new(
        condition: ExperimentCondition,
        source_lang: &str,
        target_lang: &str,
        task: Task,
        source_corpus: &str,
    ) -> Self {
        ExperimentConfig {
            name: None,
            condition,
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            task,
            source_corpus: source_corpus.to_string(),
            target_test_corpus: None,
            encoders: EncoderRoles::default(),
            train: None,
            n_runs: default_runs(),
            seed: 0,
            split_seed: 0,
            split_ratios: default_ratios(),
            backend: default_backend(),
            simulate_via_backtranslation: false,
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!(
                "{} {}->{} {}",
                self.condition, self.source_lang, self.target_lang, self.task
            )
        })
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let task = ModelTask::from(self.task);
        let cfg = self.train.clone().unwrap_or_else(|| TrainConfig::for_task(task));
        if cfg.task != task {
            return Err(Error::Config(format!(
                "train.task is {:?} but the experiment task is {}",
                cfg.task, self.task
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentCondition::*;
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.display_name())));
        if self.n_runs == 0 {
            return bad("n_runs must be at least 1".into());
        }
        let same = self.source_lang == self.target_lang;
        match self.condition {
            Baseline if !same => {
                return bad(format!(
                    "baseline needs source = target language, got {}->{}",
                    self.source_lang, self.target_lang
                ))
            }
            Baseline if self.target_test_corpus.is_some() => {
                return bad("baseline evaluates on the source test split; drop target_test_corpus".into())
            }
            TranslateTrain | TranslateTest | Multilingual if same => {
                return bad(format!("{} needs distinct languages", self.condition))
            }
            _ => {}
        }
        if self.simulate_via_backtranslation {
            if self.condition != TranslateTest {
                return bad("simulate_via_backtranslation applies to translate_test only".into());
            }
            if self.target_test_corpus.is_some() {
                return bad("simulate_via_backtranslation uses the source test split; drop target_test_corpus".into());
            }
        }
        if self.condition == TranslateTest
            && !self.simulate_via_backtranslation
            && self.target_test_corpus.is_none()
        {
            return bad("translate_test needs target_test_corpus or simulate_via_backtranslation".into());
        }
        self.train_config()?;
        Ok(())
    }
}
