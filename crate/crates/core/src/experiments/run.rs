use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{plan, DataRoute, ExperimentConfig, ExperimentPlan};
use crate::corpus::{
    categorization_examples, derive_sentence_examples, split_corpus, AnnotatedCorpus, DatasetSplit,
    SentenceExample,
};
use crate::evaluation::{binary_report, multilabel_report, MetricsReport, Task};
use crate::hashing::sha256_fields;
use crate::models::{train, ClaimModel};
use crate::rundir::{ArtifactKind, RunDirectory};
use crate::translation::{translate_corpus, IdentityBackend, TranslateOptions, TranslationBackend, TranslationCache};
use crate::{Error, Execution, Result};

/// Corpora and translation backends available to experiments, by name.
pub struct Resources {
    corpora: BTreeMap<String, AnnotatedCorpus>,
    backends: BTreeMap<String, Arc<dyn TranslationBackend>>,
    cache: TranslationCache,
    translate_options: TranslateOptions,
}

impl Resources {
    /// Empty registry with the identity backend and an in-memory cache.
    pub fn new() -> Self {
        let mut backends: BTreeMap<String, Arc<dyn TranslationBackend>> = BTreeMap::new();
        backends.insert("identity".into(), Arc::new(IdentityBackend));
        Resources {
            corpora: BTreeMap::new(),
            backends,
            cache: TranslationCache::in_memory(),
            translate_options: TranslateOptions::default(),
        }
    }

    pub fn with_corpus(mut self, name: &str, corpus: AnnotatedCorpus) -> Self {
        self.corpora.insert(name.to_string(), corpus);
        self
    }

    /// Registers a backend under its own id.
    pub fn with_backend(mut self, backend: Arc<dyn TranslationBackend>) -> Self {
        self.backends.insert(backend.id().to_string(), backend);
        self
    }

    pub fn with_cache(mut self, cache: TranslationCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_translate_options(mut self, options: TranslateOptions) -> Self {
        self.translate_options = options;
        self
    }

    pub fn corpus(&self, name: &str) -> Result<&AnnotatedCorpus> {
        self.corpora
            .get(name)
            .ok_or_else(|| Error::Config(format!("corpus `{name}` is not registered")))
    }

    pub fn backend(&self, id: &str) -> Result<&Arc<dyn TranslationBackend>> {
        self.backends
            .get(id)
            .ok_or_else(|| Error::Config(format!("translation backend `{id}` is not registered")))
    }

    pub fn cache(&self) -> &TranslationCache {
        &self.cache
    }
}

impl Default for Resources {
    fn default() -> Self {
        Resources::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub report: MetricsReport,
    pub selected_epoch: Option<usize>,
    pub majority_model: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    /// Content hash of the configuration and input corpora.
    pub fingerprint: String,
    pub config: ExperimentConfig,
    pub plan: ExperimentPlan,
    pub corpus_fingerprints: BTreeMap<String, String>,
    pub runs: Vec<RunRecord>,
    pub mean: MetricsReport,
    /// Runs trained by this invocation; 0 when everything came from the run
    /// directory.
    #[serde(skip)]
    pub trained_runs: usize,
}

struct Stage(&'static str);

impl Stage {
    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ Error::Experiment { .. } => e,
            e @ Error::Config(_) => e,
            other => Error::Experiment {
                stage: self.0.to_string(),
                message: other.to_string(),
            },
        })
    }
}

fn materialize(
    route: &DataRoute,
    split: &DatasetSplit,
    resources: &Resources,
    task: Task,
) -> Result<Vec<SentenceExample>> {
    let mut corpus = resources.corpus(&route.corpus)?.clone();
    if let Some(p) = route.partition {
        corpus = corpus.subset(&split.document_ids(p));
    }
    for step in &route.translations {
        let backend = resources.backend(&step.backend)?;
        corpus = translate_corpus(
            &corpus,
            backend.as_ref(),
            &step.to,
            &resources.cache,
            resources.translate_options,
        )?;
    }
    let examples = derive_sentence_examples(&corpus);
    Ok(match task {
        Task::Identification => examples,
        Task::Categorization => categorization_examples(&examples),
    })
}

/// Scores `model` on `test` and renders one JSON record per example (key,
/// text, gold, prediction, correctness).
pub fn predictions_jsonl(
    model: &ClaimModel,
    test: &[SentenceExample],
    exec: Execution,
) -> Result<(MetricsReport, String)> {
    let texts: Vec<String> = test.iter().map(|e| e.text.clone()).collect();
    let mut lines = String::new();
    let report = match model.task() {
        crate::models::ModelTask::Binary => {
            let preds = model.predict_binary_with(&texts, exec)?;
            for (e, p) in test.iter().zip(&preds) {
                let line = json!({
                    "key": e.key(),
                    "text": e.text,
                    "gold": e.is_claim,
                    "label": p.label,
                    "score": p.score,
                    "correct": e.is_claim == p.label,
                });
                lines.push_str(&line.to_string());
                lines.push('\n');
            }
            let gold: Vec<bool> = test.iter().map(|e| e.is_claim).collect();
            let pred: Vec<bool> = preds.iter().map(|p| p.label).collect();
            binary_report(&gold, &pred)?
        }
        crate::models::ModelTask::Multilabel => {
            let preds = model.predict_multilabel_with(&texts, model.config().decision_threshold, exec)?;
            for (e, p) in test.iter().zip(&preds) {
                let line = json!({
                    "key": e.key(),
                    "text": e.text,
                    "gold": e.top_categories,
                    "labels": p.labels,
                    "scores": p.scores,
                    "correct": e.top_categories == p.labels,
                });
                lines.push_str(&line.to_string());
                lines.push('\n');
            }
            let gold: Vec<_> = test.iter().map(|e| e.top_categories.clone()).collect();
            let pred: Vec<_> = preds.into_iter().map(|p| p.labels).collect();
            multilabel_report(&gold, &pred, model.labels())?
        }
    };
    Ok((report, lines))
}

/// Runs every seed of one configuration.
///
/// With a run directory, per-run artifacts (checkpoint, training log,
/// predictions, report) and the final result are persisted with manifests,
/// completed runs are reused on a rerun with unchanged inputs, and a failure
/// leaves a `.failed` marker next to the result.
pub fn run(
    config: &ExperimentConfig,
    resources: &Resources,
    run_dir: Option<&RunDirectory>,
    exec: Execution,
) -> Result<ExperimentResult> {
    let plan = plan(config)?;
    let source = resources.corpus(&config.source_corpus)?;
    if source.language() != config.source_lang {
        return Err(Error::Config(format!(
            "corpus `{}` is `{}`, not the source language `{}`",
            config.source_corpus,
            source.language(),
            config.source_lang
        )));
    }
    let mut corpus_fingerprints = BTreeMap::new();
    corpus_fingerprints.insert(config.source_corpus.clone(), source.fingerprint());
    if let Some(name) = &config.target_test_corpus {
        let target = resources.corpus(name)?;
        if target.language() != config.target_lang {
            return Err(Error::Config(format!(
                "corpus `{name}` is `{}`, not the target language `{}`",
                target.language(),
                config.target_lang
            )));
        }
        corpus_fingerprints.insert(name.clone(), target.fingerprint());
    }
    for step in plan.train.translations.iter().chain(&plan.test.translations) {
        resources.backend(&step.backend)?;
    }
    let config_json = serde_json::to_string(config)?;
    let mut fields: Vec<&[u8]> = vec![config_json.as_bytes()];
    for (k, v) in &corpus_fingerprints {
        fields.push(k.as_bytes());
        fields.push(v.as_bytes());
    }
    let fingerprint = sha256_fields(fields)[..16].to_string();
    let result_name = format!("exp-{fingerprint}.json");

    if let Some(dir) = run_dir {
        if let Some(mut done) =
            dir.fresh_json::<ExperimentResult, _>(ArtifactKind::Reports, &result_name, &corpus_fingerprints, config)?
        {
            log::info!("{}: reusing completed result {result_name}", plan.name);
            done.trained_runs = 0;
            return Ok(done);
        }
        dir.write_json(ArtifactKind::Plans, &format!("exp-{fingerprint}.json"), &plan, &corpus_fingerprints, config)?;
    }

    let outcome = execute(config, &plan, resources, run_dir, exec, &fingerprint, &corpus_fingerprints);
    match outcome {
        Ok((runs, trained_runs)) => {
            let reports: Vec<MetricsReport> = runs.iter().map(|r| r.report.clone()).collect();
            let result = ExperimentResult {
                name: plan.name.clone(),
                fingerprint,
                config: config.clone(),
                mean: MetricsReport::mean(&reports)?,
                plan,
                corpus_fingerprints,
                runs,
                trained_runs,
            };
            if let Some(dir) = run_dir {
                dir.write_json(ArtifactKind::Reports, &result_name, &result, &result.corpus_fingerprints, config)?;
                dir.clear_failed(ArtifactKind::Reports, &result_name)?;
            }
            Ok(result)
        }
        Err(e) => {
            if let Some(dir) = run_dir {
                dir.mark_failed(ArtifactKind::Reports, &result_name, &e.to_string())?;
            }
            Err(e)
        }
    }
}

fn execute(
    config: &ExperimentConfig,
    plan: &ExperimentPlan,
    resources: &Resources,
    run_dir: Option<&RunDirectory>,
    exec: Execution,
    fingerprint: &str,
    inputs: &BTreeMap<String, String>,
) -> Result<(Vec<RunRecord>, usize)> {
    let source = resources.corpus(&config.source_corpus)?;
    let split = Stage("split").wrap(split_corpus(
        &derive_sentence_examples(source),
        plan.split_ratios,
        plan.split_seed,
    ))?;
    let stage = Stage("materialize");
    let train_set = stage.wrap(materialize(&plan.train, &split, resources, plan.task))?;
    let dev_set = stage.wrap(materialize(&plan.dev, &split, resources, plan.task))?;
    let test_set = stage.wrap(materialize(&plan.test, &split, resources, plan.task))?;
    if test_set.is_empty() {
        return Err(Error::Experiment {
            stage: "materialize".into(),
            message: format!("test data from {} is empty", plan.test),
        });
    }
    let labels = source.codebook().top_level_codes();

    let mut runs = Vec::with_capacity(plan.seeds.len());
    let mut trained = 0;
    for (r, &seed) in plan.seeds.iter().enumerate() {
        let run_name = format!("exp-{fingerprint}-run{r}");
        let run_config = json!({ "experiment": config, "run": r, "seed": seed });
        if let Some(dir) = run_dir {
            if let Some(rec) = dir.fresh_json::<RunRecord, _>(
                ArtifactKind::Reports,
                &format!("{run_name}.json"),
                inputs,
                &run_config,
            )? {
                runs.push(rec);
                continue;
            }
        }
        let train_config = crate::models::TrainConfig {
            seed,
            ..plan.train_config.clone()
        };
        let encoder = Stage("encoder").wrap(plan.encoder.build())?;
        let outcome = Stage("train").wrap(train(&train_set, &dev_set, encoder, &train_config, &labels, exec))?;
        let (report, predictions) = Stage("evaluate").wrap(predictions_jsonl(&outcome.model, &test_set, exec))?;
        trained += 1;
        let record = RunRecord {
            run: r,
            seed,
            report,
            selected_epoch: outcome.log.selected_epoch,
            majority_model: outcome.log.majority_model,
        };
        if let Some(dir) = run_dir {
            let stage = Stage("persist");
            let checkpoint = stage.wrap(outcome.model.checkpoint())?;
            stage.wrap(dir.write_json(ArtifactKind::Checkpoints, &format!("{run_name}.json"), &checkpoint, inputs, &run_config))?;
            stage.wrap(dir.write_artifact(
                ArtifactKind::Reports,
                &format!("{run_name}.log.jsonl"),
                outcome.log.to_jsonl()?.as_bytes(),
                inputs,
                &run_config,
            ))?;
            stage.wrap(dir.write_artifact(
                ArtifactKind::Predictions,
                &format!("{run_name}.jsonl"),
                predictions.as_bytes(),
                inputs,
                &run_config,
            ))?;
            stage.wrap(dir.write_json(ArtifactKind::Reports, &format!("{run_name}.json"), &record, inputs, &run_config))?;
        }
        runs.push(record);
    }
    Ok((runs, trained))
}
