//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{Duration as Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use claimbridge::analysis::{
    misclassification_overlap, monte_carlo_overlap, saliency_from_embeddings, token_saliency,
};
use claimbridge::corpus::{
    category_distribution, corpus_stats, derive_sentence_examples, split_corpus, Document,
};
use claimbridge::evaluation::{
    cohens_kappa, distribution_shift, f1_positive, macro_average, ClassMetrics, ConfusionMatrix,
    Task,
};
use claimbridge::experiments::{run, ExperimentCondition, ExperimentConfig, Resources};
use claimbridge::matcher::PrefixStemMatcher;
use claimbridge::models::{
    ClaimModel, Differentiable, EncoderSpec, LinearHead, ModelTask, SparseVector, TrainConfig,
};
use claimbridge::sampling::{sample_test_set, top_window, CandidatePool, SamplingParams, YearMonth};
use claimbridge::synthetic::{bilingual_claims, debatenet_shaped, guardian_shaped, BilingualParams};
use claimbridge::Execution;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    // Inclusive bound; the slack absorbs binary rounding of decimal inputs.
    if (got - want).abs() <= tol + 1e-9 {
        Ok(format!("{name}={got:.4}"))
    } else {
        Err(format!("{name}={got:.6}, expected {want}±{tol}"))
    }
}

fn all(parts: Vec<Result<String, String>>) -> Outcome {
    let (ok, bad): (Vec<_>, Vec<_>) = parts.into_iter().partition(Result::is_ok);
    if bad.is_empty() {
        Ok(ok.into_iter().map(Result::unwrap).collect::<Vec<_>>().join(", "))
    } else {
        Err(bad.into_iter().map(Result::unwrap_err).collect::<Vec<_>>().join("; "))
    }
}

fn in_time(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{detail} [{:.1}s]", took.as_secs_f64()))
    } else {
        Err(format!("{detail}; took {:.1}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn c1_confusion_debatenet() -> Outcome {
    let m = f1_positive(&ConfusionMatrix::new(71, 39, 75, 822));
    all(vec![
        within("P", m.precision, 0.645, 0.001),
        within("R", m.recall, 0.486, 0.001),
        within("F1", m.f1, 0.555, 0.001),
    ])
}

fn c2_confusion_guardian() -> Outcome {
    let m = f1_positive(&ConfusionMatrix::new(29, 147, 83, 1088));
    within("F1", m.f1, 0.201, 0.001)
}

fn macro_of(rows: &[(f64, f64, f64)], want: (f64, f64, f64)) -> Vec<Result<String, String>> {
    let classes: Vec<ClassMetrics> = rows
        .iter()
        .map(|&(p, r, f)| ClassMetrics::from_values(p, r, f, 0))
        .collect();
    let m = macro_average(&classes);
    vec![
        within("P", m.precision, want.0, 0.005),
        within("R", m.recall, want.1, 0.005),
        within("F1", m.f1, want.2, 0.005),
    ]
}

fn c3_macro() -> Outcome {
    let translate_train_fr = [
        (0.67, 0.83, 0.74),
        (0.66, 0.74, 0.70),
        (0.66, 0.60, 0.63),
        (0.50, 0.44, 0.47),
        (0.87, 0.76, 0.81),
        (0.88, 0.50, 0.64),
        (0.70, 0.67, 0.69),
        (0.75, 0.70, 0.72),
    ];
    let guardian_translate_test = [
        (0.66, 0.66, 0.66),
        (0.25, 0.50, 0.33),
        (0.50, 0.67, 0.57),
        (1.00, 0.25, 0.40),
        (0.45, 0.82, 0.58),
        (0.50, 0.29, 0.36),
        (0.76, 0.76, 0.76),
        (0.57, 0.29, 0.38),
    ];
    let mut parts = macro_of(&translate_train_fr, (0.71, 0.66, 0.67));
    parts.extend(macro_of(&guardian_translate_test, (0.59, 0.53, 0.51)));
    all(parts)
}

fn c4_overlap() -> Outcome {
    let start = Instant::now();
    let a: BTreeSet<usize> = (0..122).collect();
    let b: BTreeSet<usize> = (50..170).collect();
    let r = misclassification_overlap(&a, &b, 1007).map_err(|e| e.to_string())?;
    let expected = r.expected_overlap.ok_or("expected overlap undefined")?;
    let mc = monte_carlo_overlap(122, 120, 1007, 10_000, 2024, Execution::default())
        .map_err(|e| e.to_string())?;
    let z = mc.z_score();
    let mc_part = if z <= 2.0 {
        Ok(format!("MC mean={:.4} se={:.5} z={z:.2}", mc.mean, mc.std_error))
    } else {
        Err(format!("MC mean={:.5} differs from {expected:.5} by {z:.2} SE", mc.mean))
    };
    let detail = all(vec![within("expected", expected, 0.121, 0.001), mc_part])?;
    in_time(Duration::from_secs(10), start, detail)
}

fn small_resources(docs: usize) -> Resources {
    let b = bilingual_claims(&BilingualParams {
        source_documents: docs,
        ..BilingualParams::default()
    })
    .expect("generator parameters are valid");
    Resources::new()
        .with_corpus("de", b.source)
        .with_corpus("en", b.target)
        .with_backend(Arc::new(b.dictionary))
}

fn c5_identity() -> Outcome {
    let start = Instant::now();
    let res = small_resources(60);
    let n = res.corpus("de").map_err(|e| e.to_string())?.n_sentences();
    if n < 500 {
        return Err(format!("corpus has only {n} sentences"));
    }
    let base_cfg = ExperimentConfig::new(ExperimentCondition::Baseline, "de", "de", Task::Identification, "de");
    let mut tt_cfg = ExperimentConfig::new(ExperimentCondition::TranslateTest, "de", "en", Task::Identification, "de");
    tt_cfg.simulate_via_backtranslation = true;
    tt_cfg.backend = "identity".into();
    let base = run(&base_cfg, &res, None, Execution::default()).map_err(|e| e.to_string())?;
    let tt = run(&tt_cfg, &res, None, Execution::default()).map_err(|e| e.to_string())?;
    let per_run_equal = base.runs.iter().zip(&tt.runs).all(|(a, b)| a.report == b.report);
    if base.mean != tt.mean || !per_run_equal {
        return Err(format!(
            "reports differ: baseline F1 {:.4}, translate-test F1 {:.4}",
            base.mean.headline(),
            tt.mean.headline()
        ));
    }
    in_time(
        Duration::from_secs(120),
        start,
        format!("{n} sentences, identical reports (F1 {:.3})", base.mean.headline()),
    )
}

fn c6_transfer() -> Outcome {
    let start = Instant::now();
    let b = bilingual_claims(&BilingualParams::default()).map_err(|e| e.to_string())?;
    let res = Resources::new()
        .with_corpus("de", b.source)
        .with_corpus("en", b.target)
        .with_backend(Arc::new(b.dictionary));
    let mut parts = Vec::new();
    for condition in [ExperimentCondition::TranslateTrain, ExperimentCondition::TranslateTest] {
        for (task, floor) in [(Task::Identification, 0.90), (Task::Categorization, 0.85)] {
            let mut cfg = ExperimentConfig::new(condition, "de", "en", task, "de");
            cfg.backend = "dictionary".into();
            cfg.target_test_corpus = Some("en".into());
            let r = run(&cfg, &res, None, Execution::default()).map_err(|e| e.to_string())?;
            let score = r.mean.headline();
            let name = format!("{condition}/{task}");
            parts.push(if score >= floor {
                Ok(format!("{name}={score:.3}"))
            } else {
                Err(format!("{name}={score:.3} < {floor}"))
            });
        }
    }
    let detail = all(parts)?;
    in_time(Duration::from_secs(300), start, detail)
}

fn c7_stats() -> Outcome {
    let dn = debatenet_shaped().map_err(|e| e.to_string())?;
    let g = guardian_shaped().map_err(|e| e.to_string())?;
    let (sd, sg) = (corpus_stats(&dn), corpus_stats(&g));
    let dd = category_distribution(&dn).map_err(|e| e.to_string())?;
    let dg = category_distribution(&g).map_err(|e| e.to_string())?;
    let shift = distribution_shift(&dd, &dg);
    let delta = |code: &str| shift.iter().find(|r| r.code == code).map(|r| r.delta).unwrap_or(f64::NAN);
    let counts = if (sd.n_spans, sd.n_labels, sg.n_spans, sg.n_labels) == (3442, 4417, 82, 101) {
        Ok("spans/labels 3442/4417, 82/101".to_string())
    } else {
        Err(format!(
            "counts {}/{} and {}/{}",
            sd.n_spans, sd.n_labels, sg.n_spans, sg.n_labels
        ))
    };
    all(vec![
        counts,
        within("DN labels/span", sd.mean_labels_per_span, 1.28, 0.005),
        within("G labels/span", sg.mean_labels_per_span, 1.23, 0.005),
        within("DN C1%", dd["C1"], 22.0, 0.5),
        within("G C1%", dg["C1"], 34.0, 0.5),
        within("C1 delta", delta("C1"), 12.0, 0.5),
        within("C2 delta", delta("C2"), -12.0, 0.5),
    ])
}

fn c8_kappa() -> Outcome {
    // 8 agreements (4 yes/yes, 4 no/no), each annotator 5 yes / 5 no
    let a = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
    let b = [1, 1, 1, 1, 0, 1, 0, 0, 0, 0];
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    let hand = within("kappa", k, 0.6, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut asymmetric = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..60);
        let labels = rng.gen_range(1..5);
        let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..labels)).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..labels)).collect();
        if cohens_kappa(&x, &y).ok() != cohens_kappa(&y, &x).ok() {
            asymmetric += 1;
        }
    }
    let sym = if asymmetric == 0 {
        Ok("symmetric on 100 pairs".to_string())
    } else {
        Err(format!("{asymmetric} asymmetric pairs"))
    };
    all(vec![hand, sym])
}

fn doc(id: String, date: NaiveDate, text: &str) -> Document {
    Document {
        id,
        outlet: "ref".into(),
        date,
        language: "en".into(),
        sentences: vec![text.to_string()],
    }
}

fn brute_force_window(dates: &[NaiveDate], month: YearMonth, len: u32) -> (NaiveDate, usize) {
    let mut best = (month.first_day(), 0usize);
    for offset in 0..month.days() {
        let start = month.first_day() + Days::days(offset as i64);
        let end = start + Days::days(len as i64 - 1);
        let count = dates
            .iter()
            .filter(|d| YearMonth::of(**d) == month && **d >= start && **d <= end)
            .count();
        if count > best.1 {
            best = (start, count);
        }
    }
    best
}

fn c9_sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for trial in 0..50 {
        let month = YearMonth::new(2015, rng.gen_range(1..=12)).map_err(|e| e.to_string())?;
        let n = rng.gen_range(1..40);
        let docs: Vec<Document> = (0..n)
            .map(|i| {
                let offset = rng.gen_range(-5..(month.days() as i64 + 5));
                doc(format!("t{trial}-{i}"), month.first_day() + Days::days(offset), "x")
            })
            .collect();
        let dates: Vec<NaiveDate> = docs.iter().map(|d| d.date).collect();
        let len = rng.gen_range(1..=10);
        let (start, count) = brute_force_window(&dates, month, len);
        match top_window(&docs, month, len) {
            Ok(w) if w.start == start && w.count == count => {}
            Err(_) if count == 0 => {}
            _ => mismatches += 1,
        }
    }
    let windows = if mismatches == 0 {
        Ok("top_window = brute force on 50 sets".to_string())
    } else {
        Err(format!("{mismatches} top_window mismatches"))
    };

    let mut split_errors = Vec::new();
    for n_docs in [3usize, 7, 10, 37, 100, 700] {
        let corpus = bilingual_claims(&BilingualParams {
            source_documents: n_docs,
            target_documents: 0,
            sentences_per_document: 2,
            ..BilingualParams::default()
        })
        .map_err(|e| e.to_string())?;
        let ex = derive_sentence_examples(&corpus.source);
        let s = split_corpus(&ex, [0.8, 0.1, 0.1], 5).map_err(|e| e.to_string())?;
        let again = split_corpus(&ex, [0.8, 0.1, 0.1], 5).map_err(|e| e.to_string())?;
        if s != again {
            split_errors.push(format!("split not deterministic for {n_docs}"));
        }
        let sizes = [s.train.len() / 2, s.dev.len() / 2, s.test.len() / 2];
        for (got, ratio) in sizes.iter().zip([0.8, 0.1, 0.1]) {
            if (*got as f64 - ratio * n_docs as f64).abs() > 1.0 {
                split_errors.push(format!("{n_docs} docs split {sizes:?}"));
                break;
            }
        }
    }
    let splits = if split_errors.is_empty() {
        Ok("80:10:10 within ±1 doc, seeded".to_string())
    } else {
        Err(split_errors.join(", "))
    };

    let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let reference: Vec<Document> = (0..300)
        .map(|i| doc(format!("r{i}"), start + Days::days((i * i) % 330), "x"))
        .collect();
    let mut pool_docs: Vec<Document> = (0..400)
        .map(|i| {
            doc(
                format!("p{i}"),
                start + Days::days(i % 360),
                if i % 3 == 0 { "Merkel on refugees" } else { "weather" },
            )
        })
        .collect();
    pool_docs.shuffle(&mut rng);
    let pool = CandidatePool {
        documents: pool_docs,
        source: "pool".into(),
    };
    let params = SamplingParams {
        actors: vec!["Merkel".into()],
        seed: 11,
        ..SamplingParams::default()
    };
    let a = sample_test_set(&reference, &pool, &params, &PrefixStemMatcher, Execution::Sequential)
        .map_err(|e| e.to_string())?;
    let b = sample_test_set(&reference, &pool, &params, &PrefixStemMatcher, Execution::default())
        .map_err(|e| e.to_string())?;
    let seeded = if a == b {
        Ok(format!("sample of {} reproducible", a.documents.len()))
    } else {
        Err("sample differs between runs".to_string())
    };
    all(vec![windows, splits, seeded])
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-10 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn c10_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let dim = rng.gen_range(3..12);
        let outs = rng.gen_range(1..9);
        let batch = rng.gen_range(1..6);
        let mut head = LinearHead::zeros(outs, dim);
        for w in head.weights.iter_mut().flatten().chain(head.bias.iter_mut()) {
            *w = rng.gen_range(-2.0..2.0);
        }
        let xs: Vec<SparseVector> = (0..batch)
            .map(|_| {
                let dense: Vec<f64> = (0..dim)
                    .map(|_| if rng.gen_bool(0.5) { rng.gen_range(-1.0..1.0) } else { 0.0 })
                    .collect();
                SparseVector::from_dense(&dense)
            })
            .collect();
        let ys: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..outs).map(|_| f64::from(rng.gen_bool(0.5) as u8)).collect())
            .collect();
        let xr: Vec<&SparseVector> = xs.iter().collect();
        let yr: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
        let (_, grad) = head.loss_and_gradient(&xr, &yr);
        let h = 1e-6;
        for k in 0..outs {
            for i in 0..=dim {
                let (mut p, mut m) = (head.clone(), head.clone());
                let analytic = if i == dim {
                    p.bias[k] += h;
                    m.bias[k] -= h;
                    grad.bias[k]
                } else {
                    p.weights[k][i] += h;
                    m.weights[k][i] -= h;
                    grad.weights[k][i]
                };
                let numeric = (p.loss(&xr, &yr) - m.loss(&xr, &yr)) / (2.0 * h);
                worst = worst.max(rel_err(analytic, numeric));
            }
        }
    }
    let grads = if worst <= 1e-5 {
        Ok(format!("max rel err {worst:.1e} on 20 instances"))
    } else {
        Err(format!("max rel err {worst:.2e} > 1e-5"))
    };

    let enc = EncoderSpec::hashed_mono("de").build().map_err(|e| e.to_string())?;
    let mut head = LinearHead::zeros(1, enc.dim());
    for w in head.weights[0].iter_mut() {
        *w = rng.gen_range(-1.0..1.0);
    }
    let weights = head.weights[0].clone();
    let model = ClaimModel::new(enc, head, ModelTask::Binary, vec!["claim".into()], TrainConfig::default())
        .map_err(|e| e.to_string())?;
    let text = "Die Regierung fordert eine Obergrenze für Flüchtlinge in Deutschland";
    let map = token_saliency(&model, text, "claim").map_err(|e| e.to_string())?;
    let diff: &dyn Differentiable = model.encoder().differentiable().ok_or("not differentiable")?;
    let emb: Vec<SparseVector> = diff.token_embeddings(text).into_iter().map(|(_, e)| e).collect();
    let analytic: Vec<f64> = emb.iter().map(|e| e.dot(&weights).abs()).collect();
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        idx
    };
    let max = analytic.iter().cloned().fold(0.0, f64::max);
    let values_match = map
        .scores
        .iter()
        .zip(&analytic)
        .all(|(s, a)| (s - a / max).abs() < 1e-9);
    let mut zeroed = emb.clone();
    zeroed[2] = SparseVector::default();
    let local = saliency_from_embeddings(&model, &map.tokens, &zeroed, "claim").map_err(|e| e.to_string())?;
    let saliency = if order(&map.scores) == order(&analytic) && values_match && local.scores[2] == 0.0 {
        Ok("saliency order = |w·e_t| order, locality holds".to_string())
    } else {
        Err(format!("saliency {:?} vs |w·e_t| {:?}", map.scores, analytic))
    };
    all(vec![grads, saliency])
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("metric oracle, DebateNet confusion matrix", c1_confusion_debatenet),
        ("metric oracle, Guardian confusion matrix", c2_confusion_guardian),
        ("macro oracle, per-class score fixtures", c3_macro),
        ("overlap oracle and Monte Carlo", c4_overlap),
        ("identity-translation equivalence", c5_identity),
        ("synthetic end-to-end transfer", c6_transfer),
        ("corpus-statistics oracles", c7_stats),
        ("kappa oracle and symmetry", c8_kappa),
        ("sampling oracle and determinism", c9_sampling),
        ("gradient check and linear saliency", c10_gradients),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
