use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use claimbridge::analysis::{
    cue_analysis, misclassification_overlap, monte_carlo_overlap, render_saliency, token_saliency,
    MonteCarloOverlap, OverlapReport,
};
use claimbridge::corpus::{
    categorization_examples, category_distribution, corpus_stats, derive_sentence_examples,
    load_corpus, split_corpus, write_corpus, AnnotatedCorpus, Codebook, CorpusFormat, CorpusStats,
    Distribution, Partition, SentenceExample,
};
use claimbridge::evaluation::{distribution_shift, render_report, render_shift, ShiftRow, Task};
use claimbridge::experiments::{
    grid_table, predictions_jsonl, run, ExperimentResult, GridTable,
};
use claimbridge::matcher::PrefixStemMatcher;
use claimbridge::models::{
    train, Checkpoint, ClaimModel, EncoderSpec, ModelTask, TrainConfig, TrainingLog,
};
use claimbridge::rundir::{ArtifactKind, RunDirectory};
use claimbridge::sampling::{sample_test_set, CandidatePool, SamplingParams};
use claimbridge::synthetic::{bilingual_claims, debatenet_shaped, guardian_shaped, BilingualParams};
use claimbridge::translation::{
    back_translate_corpus, translate_corpus, DictionaryBackend, IdentityBackend,
    TranslateOptions, TranslationBackend, TranslationCache,
};
use claimbridge::{Error, Execution};

use crate::config::{build_backend, LoadedGrid, Overrides};
use crate::output::Output;
use crate::{
    AnalyzeCommand, Cli, Command, CorpusArg, EncoderArg, EvaluateArgs, GenerateArgs, GridArgs,
    IngestArgs, PartitionArg, ReportArgs, SampleArgs, SplitArgs, SplitOptions, StatsArgs,
    Synthetic, TrainArgs, TranslateArgs,
};

const DEFAULT_RUN_DIR: &str = "runs";
const CACHE_DIR: &str = "translation-cache";

struct Ctx<'a> {
    cli: &'a Cli,
    out: Output,
    exec: Execution,
}

impl Ctx<'_> {
    fn run_dir(&self) -> Result<RunDirectory> {
        let root = self
            .cli
            .run_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_RUN_DIR));
        Ok(RunDirectory::create(root)?)
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let ctx = Ctx {
        cli,
        out: Output::new(cli.json),
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        },
    };
    match &cli.command {
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Split(a) => split(&ctx, a),
        Command::Translate(a) => translate(&ctx, a),
        Command::SampleTestset(a) => sample(&ctx, a),
        Command::Train(a) => train_cmd(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Grid(a) => grid(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Generate(a) => generate(&ctx, a),
    }
}

fn codebook(path: Option<&Path>) -> Result<Codebook> {
    Ok(match path {
        Some(p) => Codebook::from_json_file(p)?,
        None => Codebook::debatenet(),
    })
}

fn load(arg: &CorpusArg) -> Result<AnnotatedCorpus> {
    let cb = codebook(arg.codebook.as_deref())?;
    load_corpus(&arg.corpus, CorpusFormat::Jsonl, cb)
        .with_context(|| format!("loading {}", arg.corpus.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

fn ratios(opts: &SplitOptions) -> [f64; 3] {
    [opts.ratios[0], opts.ratios[1], opts.ratios[2]]
}

fn inputs<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn ingest(ctx: &Ctx, a: &IngestArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let rd = ctx.run_dir()?;
    let name = a.name.clone().unwrap_or_else(|| stem(&a.input.corpus));
    let file = format!("{name}.jsonl");
    let ins = inputs([("corpus", corpus.fingerprint())]);
    let cfg = json!({ "codebook": corpus.codebook().name() });
    let cached = rd.fresh_artifact(ArtifactKind::Corpora, &file, &ins, &cfg)?.is_some();
    let path = if cached {
        rd.path(ArtifactKind::Corpora, &file)
    } else {
        rd.write_artifact(ArtifactKind::Corpora, &file, corpus.to_jsonl().as_bytes(), &ins, &cfg)?
    };
    let s = corpus_stats(&corpus);
    let body = json!({
        "name": name,
        "path": path,
        "language": corpus.language(),
        "fingerprint": corpus.fingerprint(),
        "cached": cached,
        "stats": s,
    });
    ctx.out.emit(&body, || {
        format!(
            "{name}: {} documents, {} sentences, {} claim spans, {} labels{} -> {}\n",
            s.n_documents,
            s.n_sentences,
            s.n_spans,
            s.n_labels,
            if cached { " (unchanged)" } else { "" },
            path.display()
        )
    })
}

#[derive(Serialize)]
struct StatsOut {
    language: String,
    #[serde(flatten)]
    stats: CorpusStats,
    distribution: Option<Distribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift: Option<Vec<ShiftRow>>,
}

fn distribution_or_none(c: &AnnotatedCorpus) -> Result<Option<Distribution>> {
    match category_distribution(c) {
        Ok(d) => Ok(Some(d)),
        Err(Error::EmptyDistribution) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn stats(ctx: &Ctx, a: &StatsArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let distribution = distribution_or_none(&corpus)?;
    let shift = match &a.compare {
        Some(p) => {
            let other = load(&CorpusArg {
                corpus: p.clone(),
                codebook: a.input.codebook.clone(),
            })?;
            match (&distribution, distribution_or_none(&other)?) {
                (Some(d), Some(o)) => Some(distribution_shift(d, &o)),
                _ => bail!("both corpora need claim labels to compare distributions"),
            }
        }
        None => None,
    };
    let body = StatsOut {
        language: corpus.language().to_string(),
        stats: corpus_stats(&corpus),
        distribution,
        shift,
    };
    ctx.out.emit(&body, || render_stats(&body, corpus.codebook()))
}

fn render_stats(s: &StatsOut, cb: &Codebook) -> String {
    let st = &s.stats;
    let mut out = String::new();
    let _ = writeln!(out, "language            {}", s.language);
    let _ = writeln!(out, "documents           {}", st.n_documents);
    let _ = writeln!(out, "sentences           {}", st.n_sentences);
    let _ = writeln!(out, "claim spans         {}", st.n_spans);
    let _ = writeln!(out, "claim labels        {}", st.n_labels);
    let _ = writeln!(out, "labels per span     {:.2}", st.mean_labels_per_span);
    let _ = writeln!(out, "claim sentences     {:.1}%", 100.0 * st.positive_sentence_rate);
    if let Some(d) = &s.distribution {
        out.push_str("\ncategory    % of labels\n");
        for (code, pct) in d {
            let label = cb.get(code).map(|c| c.label.as_str()).unwrap_or("");
            let _ = writeln!(out, "{code:<6} {pct:>6.1}  {label}");
        }
    }
    if let Some(shift) = &s.shift {
        out.push('\n');
        out.push_str(&render_shift(shift, Some(cb)));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct PartitionOut {
    documents: Vec<String>,
    sentences: usize,
    claim_sentences: usize,
}

fn split(ctx: &Ctx, a: &SplitArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let examples = derive_sentence_examples(&corpus);
    let r = ratios(&a.split);
    let s = split_corpus(&examples, r, a.split.split_seed)?;
    let mut parts = BTreeMap::new();
    for (name, p) in [("train", Partition::Train), ("dev", Partition::Dev), ("test", Partition::Test)] {
        let ex = s.partition(p);
        let docs: BTreeSet<String> = ex.iter().map(|e| e.document_id.clone()).collect();
        parts.insert(
            name,
            PartitionOut {
                documents: docs.into_iter().collect(),
                sentences: ex.len(),
                claim_sentences: ex.iter().filter(|e| e.is_claim).count(),
            },
        );
    }
    let rd = ctx.run_dir()?;
    let file = format!("split-{}-{}.json", stem(&a.input.corpus), a.split.split_seed);
    let cfg = json!({ "ratios": r, "seed": a.split.split_seed });
    let body = json!({ "seed": a.split.split_seed, "ratios": r, "partitions": parts });
    let path = rd.write_json(
        ArtifactKind::Plans,
        &file,
        &body,
        &inputs([("corpus", corpus.fingerprint())]),
        &cfg,
    )?;
    ctx.out.emit(&json!({ "path": path, "split": body }), || {
        let mut t = String::from("partition  documents  sentences  claims\n");
        for name in ["train", "dev", "test"] {
            let p = &parts[name];
            let _ = writeln!(
                t,
                "{name:<9}  {:>9}  {:>9}  {:>6}",
                p.documents.len(),
                p.sentences,
                p.claim_sentences
            );
        }
        let _ = writeln!(t, "written to {}", path.display());
        t
    })
}

fn translate(ctx: &Ctx, a: &TranslateArgs) -> Result<()> {
    let corpus = load(&a.input)?;
    let rd = ctx.run_dir()?;
    let mut backends: HashMap<String, Arc<dyn TranslationBackend>> = HashMap::new();
    backends.insert("identity".into(), Arc::new(IdentityBackend));
    if let Some(p) = &a.dictionary {
        backends.insert("dictionary".into(), Arc::new(DictionaryBackend::from_json_file(p)?));
    }
    if let Some(p) = &a.config {
        let grid = LoadedGrid::read(p)?;
        let root = grid.run_dir(ctx.cli.run_dir.as_deref());
        for (name, table) in &grid.file.backends {
            backends.insert(name.clone(), build_backend(&root, name, table)?);
        }
    }
    let Some(backend) = backends.get(&a.backend) else {
        let mut known: Vec<_> = backends.keys().cloned().collect();
        known.sort();
        bail!("unknown backend `{}` (available: {})", a.backend, known.join(", "));
    };
    let cache = TranslationCache::open(rd.root().join(CACHE_DIR))?;
    let opts = TranslateOptions::default();
    let translated = if a.back {
        back_translate_corpus(&corpus, backend.as_ref(), &a.to, &cache, opts)?
    } else {
        translate_corpus(&corpus, backend.as_ref(), &a.to, &cache, opts)?
    };
    cache.flush()?;
    let name = if a.back {
        format!("{}.bt-{}.jsonl", stem(&a.input.corpus), a.to)
    } else {
        format!("{}.{}.jsonl", stem(&a.input.corpus), a.to)
    };
    let path = match &a.out {
        Some(p) => {
            write_corpus(&translated, p)?;
            p.clone()
        }
        None => rd.write_artifact(
            ArtifactKind::Corpora,
            &name,
            translated.to_jsonl().as_bytes(),
            &inputs([("corpus", corpus.fingerprint())]),
            &json!({ "backend": a.backend, "to": a.to, "back": a.back }),
        )?,
    };
    let body = json!({
        "path": path,
        "source_lang": corpus.language(),
        "language": translated.language(),
        "backend": a.backend,
        "sentences": translated.n_sentences(),
        "cache_hits": cache.hits(),
        "cache_misses": cache.misses(),
    });
    ctx.out.emit(&body, || {
        format!(
            "translated {} sentences {} -> {} with `{}` ({} cached, {} new) -> {}\n",
            translated.n_sentences(),
            corpus.language(),
            if a.back { format!("{} -> {}", a.to, translated.language()) } else { a.to.clone() },
            a.backend,
            cache.hits(),
            cache.misses(),
            path.display()
        )
    })
}

fn sample(ctx: &Ctx, a: &SampleArgs) -> Result<()> {
    let cb = Codebook::debatenet();
    let reference = load_corpus(&a.reference, CorpusFormat::Jsonl, cb.clone())
        .with_context(|| format!("loading {}", a.reference.display()))?;
    let pool_corpus = load_corpus(&a.pool, CorpusFormat::Jsonl, cb.clone())
        .with_context(|| format!("loading {}", a.pool.display()))?;
    let defaults = SamplingParams::default();
    let params = SamplingParams {
        top_k: a.top_k,
        window_days: a.window_days,
        keywords: a.keywords.clone().unwrap_or(defaults.keywords),
        actors: a.actors.clone(),
        target_size: a.size,
        seed: a.seed,
    };
    let pool = CandidatePool {
        documents: pool_corpus.documents().to_vec(),
        source: a.pool.display().to_string(),
    };
    let outcome = sample_test_set(reference.documents(), &pool, &params, &PrefixStemMatcher, ctx.exec)?;
    let sampled = AnnotatedCorpus::new(outcome.documents.clone(), Vec::new(), cb, None)?;
    let rd = ctx.run_dir()?;
    let ins = inputs([
        ("reference", reference.fingerprint()),
        ("pool", pool_corpus.fingerprint()),
    ]);
    let path = rd.write_artifact(
        ArtifactKind::Corpora,
        &format!("{}.jsonl", a.name),
        sampled.to_jsonl().as_bytes(),
        &ins,
        &params,
    )?;
    let plan_path = rd.write_json(
        ArtifactKind::Plans,
        &format!("{}.plan.json", a.name),
        &outcome.plan,
        &ins,
        &params,
    )?;
    let body = json!({
        "path": path,
        "plan_path": plan_path,
        "documents": outcome.documents.len(),
        "shortfall": outcome.shortfall,
        "plan": outcome.plan,
    });
    ctx.out.emit(&body, || {
        let mut t = String::from("month    reference  window                   eligible  quota\n");
        for m in &outcome.plan.months {
            let _ = writeln!(
                t,
                "{}  {:>9}  {} .. {}  {:>8}  {:>5}",
                m.month, m.reference_count, m.window.start, m.window.end, m.eligible, m.quota
            );
        }
        let _ = write!(t, "sampled {} documents", outcome.documents.len());
        if let Some(s) = outcome.shortfall {
            let _ = write!(t, ", {s} short of {}", a.size);
        }
        let _ = writeln!(t, " -> {}", path.display());
        t
    })
}

fn task_examples(task: Task, examples: &[SentenceExample]) -> Vec<SentenceExample> {
    match task {
        Task::Identification => examples.to_vec(),
        Task::Categorization => categorization_examples(examples),
    }
}

#[derive(Serialize, Deserialize)]
struct TrainSummary {
    name: String,
    model_id: String,
    task: Task,
    selected_epoch: Option<usize>,
    dev_score: Option<f64>,
    majority_model: bool,
    warnings: Vec<String>,
}

fn train_cmd(ctx: &Ctx, a: &TrainArgs) -> Result<()> {
    let task: Task = a.task.into();
    let corpus = load(&a.input)?;
    let examples = derive_sentence_examples(&corpus);
    let r = ratios(&a.split);
    let s = split_corpus(&examples, r, a.split.split_seed)?;
    let train_set = task_examples(task, &s.train);
    let dev_set = task_examples(task, &s.dev);
    let spec = match a.encoder {
        EncoderArg::Mono => EncoderSpec::hashed_mono(corpus.language()),
        EncoderArg::Multilingual => {
            let alignment = match &a.alignment {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
                    .with_context(|| format!("invalid alignment {}", p.display()))?,
                None => BTreeMap::new(),
            };
            EncoderSpec::hashed_multilingual(alignment)
        }
    };
    let defaults = TrainConfig::for_task(task.into());
    let config = TrainConfig {
        epochs: a.epochs.unwrap_or(defaults.epochs),
        learning_rate: a.learning_rate.unwrap_or(defaults.learning_rate),
        batch_size: a.batch_size.unwrap_or(defaults.batch_size),
        warmup_steps: a.warmup_steps.unwrap_or(defaults.warmup_steps),
        seed: a.seed,
        ..defaults
    };
    let labels: Vec<String> = match task {
        Task::Identification => vec!["claim".into()],
        Task::Categorization => corpus.codebook().top_level_codes(),
    };
    let name = a
        .name
        .clone()
        .unwrap_or_else(|| format!("{}-{}-s{}", stem(&a.input.corpus), task, a.seed));
    let rd = ctx.run_dir()?;
    let ins = inputs([("corpus", corpus.fingerprint())]);
    let cfg = json!({
        "encoder": spec,
        "train": config,
        "labels": labels,
        "split_ratios": r,
        "split_seed": a.split.split_seed,
    });
    let ckpt_name = format!("{name}.json");
    let summary_name = format!("{name}.train.json");
    let cached = match (
        rd.fresh_json::<Checkpoint, _>(ArtifactKind::Checkpoints, &ckpt_name, &ins, &cfg)?,
        rd.fresh_json::<TrainSummary, _>(ArtifactKind::Reports, &summary_name, &ins, &cfg)?,
    ) {
        (Some(_), Some(summary)) => Some(summary),
        _ => None,
    };
    let was_cached = cached.is_some();
    let summary = match cached {
        Some(s) => s,
        None => {
            let outcome = train(&train_set, &dev_set, spec.build()?, &config, &labels, ctx.exec)?;
            let log: &TrainingLog = &outcome.log;
            let model = &outcome.model;
            rd.write_json(ArtifactKind::Checkpoints, &ckpt_name, &model.checkpoint()?, &ins, &cfg)?;
            rd.write_artifact(
                ArtifactKind::Reports,
                &format!("{name}.log.jsonl"),
                log.to_jsonl()?.as_bytes(),
                &ins,
                &cfg,
            )?;
            let summary = TrainSummary {
                name: name.clone(),
                model_id: model.id().to_string(),
                task,
                selected_epoch: log.selected_epoch,
                dev_score: log
                    .epochs
                    .iter()
                    .find(|e| Some(e.epoch) == log.selected_epoch)
                    .and_then(|e| e.dev_score),
                majority_model: log.majority_model,
                warnings: log.warnings.clone(),
            };
            rd.write_json(ArtifactKind::Reports, &summary_name, &summary, &ins, &cfg)?;
            summary
        }
    };
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    let path = rd.path(ArtifactKind::Checkpoints, &ckpt_name);
    let body = json!({ "path": path, "cached": was_cached, "summary": summary });
    ctx.out.emit(&body, || {
        let dev = summary
            .dev_score
            .map(|d| format!("{:.3}", d))
            .unwrap_or_else(|| "n/a".into());
        let epoch = summary
            .selected_epoch
            .map(|e| e.to_string())
            .unwrap_or_else(|| "none".into());
        format!(
            "{} ({}) epoch {epoch} selected, dev score {dev}{} -> {}\n",
            summary.model_id,
            summary.task,
            if was_cached { " (unchanged)" } else { "" },
            path.display()
        )
    })
}

fn evaluate(ctx: &Ctx, a: &EvaluateArgs) -> Result<()> {
    let model = ClaimModel::load(&a.model)?;
    let corpus = load(&a.input)?;
    let scope = model.encoder().scope();
    if !scope.covers(corpus.language()) {
        return Err(Error::Validation(format!(
            "model encoder is {scope} but the corpus is in `{}`; translate it first",
            corpus.language()
        ))
        .into());
    }
    let all = derive_sentence_examples(&corpus);
    let examples = match a.partition {
        PartitionArg::All => all,
        p => {
            let s = split_corpus(&all, ratios(&a.split), a.split.split_seed)?;
            s.partition(match p {
                PartitionArg::Train => Partition::Train,
                PartitionArg::Dev => Partition::Dev,
                _ => Partition::Test,
            })
            .to_vec()
        }
    };
    let task: Task = model.task().into();
    let examples = task_examples(task, &examples);
    if examples.is_empty() {
        bail!("no {task} examples to evaluate");
    }
    let (report, lines) = predictions_jsonl(&model, &examples, ctx.exec)?;
    if let Some(p) = &a.predictions {
        fs::write(p, lines).with_context(|| format!("writing {}", p.display()))?;
    }
    ctx.out
        .emit(&report, || render_report(&report, Some(corpus.codebook())))
}

fn read_jsonl(path: &Path) -> Result<Vec<Value>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })
                .with_context(|| path.display().to_string())
        })
        .collect()
}

/// Keys of misclassified sentences, plus the full key set.
fn misclassified(path: &Path) -> Result<(BTreeSet<String>, HashSet<String>)> {
    let mut wrong = BTreeSet::new();
    let mut all = HashSet::new();
    for (i, v) in read_jsonl(path)?.into_iter().enumerate() {
        let (Some(key), Some(correct)) = (v["key"].as_str(), v["correct"].as_bool()) else {
            bail!("{}: record {} lacks `key` or `correct`", path.display(), i + 1);
        };
        if !all.insert(key.to_string()) {
            bail!("{}: duplicate key `{key}`", path.display());
        }
        if !correct {
            wrong.insert(key.to_string());
        }
    }
    Ok((wrong, all))
}

#[derive(Serialize)]
struct OverlapOut {
    #[serde(flatten)]
    report: OverlapReport,
    monte_carlo: Option<MonteCarloOverlap>,
}

fn analyze(ctx: &Ctx, cmd: &AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Saliency { model, text, target } => {
            let model = ClaimModel::load(model)?;
            let target = match target {
                Some(t) => t.clone(),
                None if model.task() == ModelTask::Binary => "claim".into(),
                None => {
                    let scores = model.scores(text);
                    let best = scores
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    model.labels()[best].clone()
                }
            };
            let map = token_saliency(&model, text, &target)?;
            ctx.out.emit(&map, || render_saliency(&map))
        }
        AnalyzeCommand::Cues { predictions, patterns } => {
            let (mut fp, mut fn_) = (Vec::new(), Vec::new());
            for (i, v) in read_jsonl(predictions)?.into_iter().enumerate() {
                let (Some(text), Some(gold), Some(label)) =
                    (v["text"].as_str(), v["gold"].as_bool(), v["label"].as_bool())
                else {
                    bail!(
                        "{}: record {} is not an identification prediction with text",
                        predictions.display(),
                        i + 1
                    );
                };
                match (gold, label) {
                    (false, true) => fp.push(text.to_string()),
                    (true, false) => fn_.push(text.to_string()),
                    _ => {}
                }
            }
            let r = cue_analysis(&fp, &fn_, patterns, &PrefixStemMatcher);
            ctx.out.emit(&r, || {
                let pct = |m: usize, n: usize| if n == 0 { 0.0 } else { 100.0 * m as f64 / n as f64 };
                let ratio = match r.ratio {
                    Some(x) => format!("{x:.2}"),
                    None => format!("{:?}", r.status).to_lowercase(),
                };
                format!(
                    "cues: {}\nfalse positives  {:>5} / {:<5} ({:.1}%)\nfalse negatives  {:>5} / {:<5} ({:.1}%)\nratio            {ratio}\n",
                    r.patterns.join(", "),
                    r.fp_matches,
                    r.fp_total,
                    pct(r.fp_matches, r.fp_total),
                    r.fn_matches,
                    r.fn_total,
                    pct(r.fn_matches, r.fn_total),
                )
            })
        }
        AnalyzeCommand::Overlap { a, b, trials, seed } => {
            let (wa, ka) = misclassified(a)?;
            let (wb, kb) = misclassified(b)?;
            if ka != kb {
                bail!("the two prediction files cover different test sentences");
            }
            let n = ka.len();
            let report = misclassification_overlap(&wa, &wb, n)?;
            let monte_carlo = if *trials > 0 && !wa.is_empty() && !wb.is_empty() {
                Some(monte_carlo_overlap(wa.len(), wb.len(), n, *trials, *seed, ctx.exec)?)
            } else {
                None
            };
            let body = OverlapOut { report, monte_carlo };
            ctx.out.emit(&body, || {
                let r = &body.report;
                let f = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into());
                let mut t = format!(
                    "misclassified  a {}  b {}  both {}  of {}\nobserved overlap  {}\nexpected overlap  {}\n",
                    r.size_a, r.size_b, r.intersection, r.n_test,
                    f(r.observed_overlap),
                    f(r.expected_overlap)
                );
                if let Some(mc) = &body.monte_carlo {
                    let _ = writeln!(
                        t,
                        "random baseline   {:.3} ± {:.4} ({} trials)",
                        mc.mean, mc.std_error, mc.trials
                    );
                }
                t
            })
        }
    }
}

#[derive(Serialize)]
struct ExperimentSummary {
    name: String,
    fingerprint: String,
    task: Task,
    headline: f64,
    runs: Vec<f64>,
}

fn summarize(results: &[ExperimentResult]) -> Vec<ExperimentSummary> {
    results
        .iter()
        .map(|r| ExperimentSummary {
            name: r.name.clone(),
            fingerprint: r.fingerprint.clone(),
            task: r.config.task,
            headline: r.mean.headline(),
            runs: r.runs.iter().map(|x| x.report.headline()).collect(),
        })
        .collect()
}

fn render_table(table: &GridTable, csv: bool) -> String {
    if csv {
        table.render_csv()
    } else {
        table.render_text()
    }
}

fn grid(ctx: &Ctx, a: &GridArgs) -> Result<()> {
    let grid = LoadedGrid::read(&a.config)?;
    let root = grid.run_dir(ctx.cli.run_dir.as_deref());
    let rd = RunDirectory::create(&root)?;
    let configs = grid.experiments(&Overrides {
        seed: a.seed,
        n_runs: a.runs,
        backend: a.backend.clone(),
    })?;
    let cache = TranslationCache::open(root.join(CACHE_DIR))?;
    let res = grid.resources(&root, cache)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for c in &configs {
        log::info!("running {}", c.display_name());
        match run(c, &res, Some(&rd), ctx.exec) {
            Ok(r) => results.push(r),
            Err(e) => failures.push(json!({ "name": c.display_name(), "error": e.to_string() })),
        }
    }
    res.cache().flush()?;
    let table = grid_table(&results);
    let ins: BTreeMap<String, String> = results
        .iter()
        .map(|r| (r.name.clone(), r.fingerprint.clone()))
        .collect();
    rd.write_artifact(ArtifactKind::Reports, "grid.txt", table.render_text().as_bytes(), &ins, &configs)?;
    rd.write_artifact(ArtifactKind::Reports, "grid.csv", table.render_csv().as_bytes(), &ins, &configs)?;
    let body = json!({
        "run_dir": root,
        "table": table,
        "experiments": summarize(&results),
        "failures": failures,
    });
    ctx.out.emit(&body, || render_table(&table, a.csv))?;
    if !failures.is_empty() {
        let names: Vec<_> = failures.iter().map(|f| f["name"].as_str().unwrap_or("?").to_string()).collect();
        bail!("{} experiment(s) failed: {}", failures.len(), names.join(", "));
    }
    Ok(())
}

fn is_result_file(name: &str) -> bool {
    name.strip_prefix("exp-")
        .and_then(|s| s.strip_suffix(".json"))
        .is_some_and(|fp| fp.len() == 16 && fp.chars().all(|c| c.is_ascii_hexdigit()))
}

fn report(ctx: &Ctx, a: &ReportArgs) -> Result<()> {
    let rd = ctx.run_dir()?;
    let dir = rd.root().join(ArtifactKind::Reports.dir_name());
    let mut names: Vec<String> = fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| is_result_file(n))
        .collect();
    names.sort();
    let mut results: Vec<ExperimentResult> = names
        .iter()
        .map(|n| {
            let p = dir.join(n);
            let text = fs::read_to_string(&p)?;
            serde_json::from_str(&text).with_context(|| format!("invalid result {}", p.display()))
        })
        .collect::<Result<_>>()?;
    if results.is_empty() {
        bail!("no experiment results in {}", rd.root().display());
    }
    results.sort_by(|x, y| (x.plan.condition, &x.name).cmp(&(y.plan.condition, &y.name)));
    let table = grid_table(&results);
    let body = json!({ "table": table, "experiments": summarize(&results) });
    ctx.out.emit(&body, || render_table(&table, a.csv))
}

/// Grid config over the generated corpora; the multilingual rows use an
/// encoder aligned with the generator's lexicon.
fn example_grid(alignment: &BTreeMap<String, String>) -> Result<String> {
    let aligned = toml::Table::try_from(json!({
        "multilingual": EncoderSpec::hashed_multilingual(alignment.clone())
    }))?;
    let mut experiments = Vec::new();
    for task in ["identification", "categorization"] {
        for (condition, target) in [
            ("baseline", "de"),
            ("translate_train", "en"),
            ("translate_test", "en"),
            ("multilingual", "en"),
        ] {
            let mut e = toml::Table::new();
            e.insert("condition".into(), condition.into());
            e.insert("source_lang".into(), "de".into());
            e.insert("target_lang".into(), target.into());
            e.insert("task".into(), task.into());
            e.insert("source_corpus".into(), "de".into());
            if target == "en" {
                e.insert("target_test_corpus".into(), "en".into());
            }
            match condition {
                "translate_train" | "translate_test" => {
                    e.insert("backend".into(), "lexicon".into());
                }
                "multilingual" => {
                    e.insert("encoders".into(), aligned.clone().into());
                }
                _ => {}
            }
            experiments.push(toml::Value::Table(e));
        }
    }
    let doc = toml::Table::try_from(json!({
        "run_dir": ".",
        "defaults": { "n_runs": 2, "seed": 0 },
        "corpora": {
            "de": { "path": "de.jsonl" },
            "en": { "path": "en.jsonl" },
        },
        "backends": { "lexicon": { "kind": "dictionary", "path": "lexicon.json" } },
    }))?;
    let mut doc = doc;
    doc.insert("experiments".into(), toml::Value::Array(experiments));
    Ok(format!(
        "# Experiment grid over the generated corpora.\n# Relative paths resolve against the run directory root.\n{}",
        toml::to_string(&doc)?
    ))
}

fn generate(ctx: &Ctx, a: &GenerateArgs) -> Result<()> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let p = a.out.join(name);
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
        Ok(())
    };
    match a.kind {
        Synthetic::Bilingual => {
            let defaults = BilingualParams::default();
            let b = bilingual_claims(&BilingualParams {
                source_documents: a.source_documents.unwrap_or(defaults.source_documents),
                target_documents: a.target_documents.unwrap_or(defaults.target_documents),
                seed: a.seed,
                ..defaults
            })?;
            put("de.jsonl", b.source.to_jsonl().as_bytes())?;
            put("en.jsonl", b.target.to_jsonl().as_bytes())?;
            put("lexicon.json", serde_json::to_string_pretty(&b.dictionary)?.as_bytes())?;
            put("alignment.json", serde_json::to_string_pretty(&b.alignment)?.as_bytes())?;
            put("grid.toml", example_grid(&b.alignment)?.as_bytes())?;
        }
        Synthetic::Debatenet => put("debatenet.jsonl", debatenet_shaped()?.to_jsonl().as_bytes())?,
        Synthetic::Guardian => put("guardian.jsonl", guardian_shaped()?.to_jsonl().as_bytes())?,
    }
    ctx.out.emit(&json!({ "files": written }), || {
        written.iter().map(|p| format!("wrote {}\n", p.display())).collect()
    })
}
