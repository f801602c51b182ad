//! Sequential vs parallel execution of the data-parallel loops.
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use claimbridge::analysis::monte_carlo_overlap;
use claimbridge::corpus::derive_sentence_examples;
use claimbridge::evaluation::Task;
use claimbridge::experiments::{run_grid, ExperimentCondition, ExperimentConfig, Resources};
use claimbridge::models::{train, EncoderSpec, TrainConfig};
use claimbridge::synthetic::{bilingual_claims, BilingualParams};
use claimbridge::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn overlap(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo_overlap");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "10k trials"), |b| {
            b.iter(|| monte_carlo_overlap(122, 120, 1007, 10_000, 7, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

fn predict(c: &mut Criterion) {
    let corpus = bilingual_claims(&BilingualParams::default()).unwrap();
    let examples = derive_sentence_examples(&corpus.source);
    let encoder = EncoderSpec::hashed_mono("de").build().unwrap();
    let config = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    let labels = vec!["claim".to_string()];
    let model = train(&examples, &[], encoder, &config, &labels, Execution::Sequential)
        .unwrap()
        .model;
    let texts: Vec<String> = examples.iter().map(|e| e.text.clone()).collect();
    let mut g = c.benchmark_group("batch_predict");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, texts.len()), |b| {
            b.iter(|| model.predict_binary_with(black_box(&texts), exec).unwrap())
        });
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let b = bilingual_claims(&BilingualParams {
        source_documents: 80,
        target_documents: 30,
        ..BilingualParams::default()
    })
    .unwrap();
    let resources = Resources::new()
        .with_corpus("de", b.source)
        .with_corpus("en", b.target)
        .with_backend(Arc::new(b.dictionary));
    let mut configs = Vec::new();
    for task in [Task::Identification, Task::Categorization] {
        configs.push(ExperimentConfig::new(ExperimentCondition::Baseline, "de", "de", task, "de"));
        for cond in [ExperimentCondition::TranslateTrain, ExperimentCondition::TranslateTest] {
            let mut cfg = ExperimentConfig::new(cond, "de", "en", task, "de");
            cfg.backend = "dictionary".into();
            cfg.target_test_corpus = Some("en".into());
            configs.push(cfg);
        }
    }
    let mut g = c.benchmark_group("experiment_grid");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, configs.len()), |bench| {
            bench.iter(|| {
                for r in run_grid(black_box(&configs), &resources, None, exec) {
                    r.unwrap();
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, overlap, predict, grid);
criterion_main!(benches);
