use serde::{Deserialize, Serialize};

use super::{ExperimentCondition, ExperimentConfig};
use crate::corpus::Partition;
use crate::evaluation::Task;
use crate::models::{EncoderSpec, TrainConfig};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationStep {
    pub from: String,
    pub to: String,
    pub backend: String,
}

/// Where one data set comes from: a registered corpus, optionally restricted
/// to a split partition, then translated step by step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataRoute {
    pub corpus: String,
    /// `None` selects the whole corpus.
    pub partition: Option<Partition>,
    pub translations: Vec<TranslationStep>,
    /// Language of the resulting text.
    pub language: String,
}

impl DataRoute {
    fn split(corpus: &str, partition: Partition, language: &str) -> Self {
        DataRoute {
            corpus: corpus.to_string(),
            partition: Some(partition),
            translations: Vec::new(),
            language: language.to_string(),
        }
    }

    fn whole(corpus: &str, language: &str) -> Self {
        DataRoute {
            corpus: corpus.to_string(),
            partition: None,
            translations: Vec::new(),
            language: language.to_string(),
        }
    }

    fn then_translate(mut self, to: &str, backend: &str) -> Self {
        self.translations.push(TranslationStep {
            from: self.language.clone(),
            to: to.to_string(),
            backend: backend.to_string(),
        });
        self.language = to.to_string();
        self
    }

    pub fn is_translated(&self) -> bool {
        !self.translations.is_empty()
    }

    /// Short column label: language, marked `(MT)` for machine-translated
    /// data and `(BT)` for a round trip back into the original language.
    pub fn label(&self) -> String {
        match self.translations.as_slice() {
            [] => self.language.clone(),
            [.., last] if self.translations[0].from == last.to => format!("{} (BT)", self.language),
            _ => format!("{} (MT)", self.language),
        }
    }
}

impl std::fmt::Display for DataRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.partition {
            Some(p) => write!(f, "{}[{p:?}]", self.corpus)?,
            None => write!(f, "{}", self.corpus)?,
        }
        for s in &self.translations {
            write!(f, " -> MT({}->{}, {})", s.from, s.to, s.backend)?;
        }
        write!(f, " [{}]", self.language)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub condition: ExperimentCondition,
    pub task: Task,
    pub source_lang: String,
    pub target_lang: String,
    pub train: DataRoute,
    pub dev: DataRoute,
    pub test: DataRoute,
    pub encoder: EncoderSpec,
    pub train_config: TrainConfig,
    pub seeds: Vec<u64>,
    pub split_seed: u64,
    pub split_ratios: [f64; 3],
}

impl std::fmt::Display for ExperimentPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "experiment: {}", self.name)?;
        writeln!(f, "condition:  {} ({}->{})", self.condition, self.source_lang, self.target_lang)?;
        writeln!(f, "task:       {}", self.task)?;
        writeln!(f, "train:      {}", self.train)?;
        writeln!(f, "dev:        {}", self.dev)?;
        writeln!(f, "test:       {}", self.test)?;
        writeln!(f, "encoder:    {}", self.encoder.scope())?;
        write!(f, "seeds:      {:?}", self.seeds)
    }
}

/// Data routing for a configuration. Pure; validates the configuration.
pub fn plan(config: &ExperimentConfig) -> Result<ExperimentPlan> {
    use ExperimentCondition::*;
    config.validate()?;
    let (s, t) = (config.source_lang.as_str(), config.target_lang.as_str());
    let corpus = config.source_corpus.as_str();
    let backend = config.backend.as_str();
    let src = |p| DataRoute::split(corpus, p, s);
    let target_test = || match &config.target_test_corpus {
        Some(name) => DataRoute::whole(name, t),
        None => src(Partition::Test).then_translate(t, backend),
    };
    let (train, dev, test, encoder) = match config.condition {
        Baseline => (
            src(Partition::Train),
            src(Partition::Dev),
            src(Partition::Test),
            config.encoders.monolingual_for(s)?,
        ),
        TranslateTrain => (
            src(Partition::Train).then_translate(t, backend),
            src(Partition::Dev).then_translate(t, backend),
            target_test(),
            config.encoders.monolingual_for(t)?,
        ),
        TranslateTest => {
            let test = if config.simulate_via_backtranslation {
                src(Partition::Test)
                    .then_translate(t, backend)
                    .then_translate(s, backend)
            } else {
                target_test().then_translate(s, backend)
            };
            (
                src(Partition::Train),
                src(Partition::Dev),
                test,
                config.encoders.monolingual_for(s)?,
            )
        }
        Multilingual => (
            src(Partition::Train),
            src(Partition::Dev),
            target_test(),
            config.encoders.multilingual()?,
        ),
    };
    Ok(ExperimentPlan {
        name: config.display_name(),
        condition: config.condition,
        task: config.task,
        source_lang: s.to_string(),
        target_lang: t.to_string(),
        train,
        dev,
        test,
        encoder,
        train_config: config.train_config()?,
        seeds: (0..config.n_runs as u64).map(|i| config.seed + i).collect(),
        split_seed: config.split_seed,
        split_ratios: config.split_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LanguageScope;

    fn cfg(c: ExperimentCondition, s: &str, t: &str) -> ExperimentConfig {
        ExperimentConfig::new(c, s, t, Task::Identification, "dn")
    }

    #[test]
    fn translate_train_routes_through_target() {
        let p = plan(&cfg(ExperimentCondition::TranslateTrain, "de", "en")).unwrap();
        assert_eq!(p.train.language, "en");
        assert_eq!(p.train.translations.len(), 1);
        assert_eq!(p.test.language, "en");
        assert_eq!(p.encoder.scope(), &LanguageScope::Mono("en".into()));
        assert_eq!(p.train.label(), "en (MT)");
    }

    #[test]
    fn simulated_translate_test_round_trips() {
        let mut c = cfg(ExperimentCondition::TranslateTest, "de", "en");
        c.simulate_via_backtranslation = true;
        let p = plan(&c).unwrap();
        assert_eq!(p.train.language, "de");
        assert!(!p.train.is_translated());
        let legs: Vec<(&str, &str)> = p
            .test
            .translations
            .iter()
            .map(|s| (s.from.as_str(), s.to.as_str()))
            .collect();
        assert_eq!(legs, vec![("de", "en"), ("en", "de")]);
        assert_eq!(p.test.partition, Some(Partition::Test));
        assert_eq!(p.encoder.scope(), &LanguageScope::Mono("de".into()));
        assert_eq!(p.test.label(), "de (BT)");
    }

    #[test]
    fn multilingual_uses_external_target() {
        let mut c = cfg(ExperimentCondition::Multilingual, "de", "fr");
        c.target_test_corpus = Some("fr_test".into());
        let p = plan(&c).unwrap();
        assert_eq!(p.train.language, "de");
        assert_eq!(p.test, DataRoute::whole("fr_test", "fr"));
        assert_eq!(p.encoder.scope(), &LanguageScope::Multilingual);
    }

    #[test]
    fn inconsistent_configs_rejected() {
        assert!(plan(&cfg(ExperimentCondition::Baseline, "de", "en")).is_err());
        assert!(plan(&cfg(ExperimentCondition::TranslateTrain, "de", "de")).is_err());
        assert!(plan(&cfg(ExperimentCondition::TranslateTest, "de", "en")).is_err());
        let mut c = cfg(ExperimentCondition::Baseline, "de", "de");
        c.n_runs = 0;
        assert!(plan(&c).is_err());
        let mut c = cfg(ExperimentCondition::Baseline, "de", "de");
        c.encoders
            .monolingual
            .insert("de".into(), EncoderSpec::hashed_mono("en"));
        assert!(plan(&c).is_err());
        let mut c = cfg(ExperimentCondition::Baseline, "de", "de");
        c.train = Some(TrainConfig::for_task(crate::models::ModelTask::Multilabel));
        assert!(plan(&c).is_err());
    }

    #[test]
    fn seeds_are_consecutive() {
        let mut c = cfg(ExperimentCondition::Baseline, "de", "de");
        c.seed = 41;
        c.n_runs = 3;
        assert_eq!(plan(&c).unwrap().seeds, vec![41, 42, 43]);
    }
}
