use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn claimbridge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimbridge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn stats_json_matches_golden_file() {
    let corpus = fixture("guardian.jsonl");
    let out = claimbridge(&["--json", "stats", corpus.to_str().unwrap()]);
    ok(&out);
    let golden = fs::read_to_string(fixture("stats_guardian.golden.json")).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), golden);
    let v = json_of(&out);
    assert_eq!(v["n_documents"], 36);
    assert_eq!(v["n_sentences"], 1347);
    assert_eq!(v["n_spans"], 82);
    assert_eq!(v["n_labels"], 101);
}

#[test]
fn stats_text_lists_counts() {
    let out = claimbridge(&["stats", fixture("guardian.jsonl").to_str().unwrap()]);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["documents           36", "sentences           1347", "claim spans         82", "claim labels        101"] {
        assert!(text.contains(needle), "{needle:?} missing from\n{text}");
    }
}

#[test]
fn ingest_empty_file_succeeds_with_zero_counts() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let run = dir.path().join("run");
    let out = claimbridge(&["--json", "--run-dir", run.to_str().unwrap(), "ingest", empty.to_str().unwrap()]);
    ok(&out);
    let v = json_of(&out);
    assert_eq!(v["stats"]["n_documents"], 0);
    assert_eq!(v["stats"]["n_labels"], 0);
    assert_eq!(v["cached"], false);
    let again = claimbridge(&["--json", "--run-dir", run.to_str().unwrap(), "ingest", empty.to_str().unwrap()]);
    assert_eq!(json_of(&again)["cached"], true);
}

#[test]
fn usage_errors_exit_two_and_validation_errors_exit_one() {
    assert_eq!(claimbridge(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(claimbridge(&["stats", "--no-such-flag", "x"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(
        &bad,
        r#"{"id":"d1","outlet":"x","date":"2015-01-01","language":"de","sentences":["a"],"claims":[{"sentences":[3],"categories":["C1"]}]}"#,
    )
    .unwrap();
    let out = claimbridge(&["--json", "stats", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["error"]["kind"], "validation");
    assert!(v["error"]["message"].as_str().unwrap().contains("line 1"));
}

fn generate_bilingual(dir: &Path) {
    let out = claimbridge(&[
        "generate",
        "bilingual",
        "--out",
        dir.to_str().unwrap(),
        "--source-documents",
        "40",
        "--target-documents",
        "20",
    ]);
    ok(&out);
}

#[test]
fn grid_renders_flagged_table_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    generate_bilingual(dir.path());
    let config = dir.path().join("grid.toml");
    let out = claimbridge(&["grid", config.to_str().unwrap(), "--runs", "1"]);
    ok(&out);
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    let header = table.lines().next().unwrap();
    for col in ["Setup", "Train", "Test", "Id", "Cat"] {
        assert!(header.contains(col), "{header}");
    }
    for row in ["BL (mono)", "Translate-train", "Translate-test", "Multilingual"] {
        assert!(table.contains(row), "{row} missing:\n{table}");
    }
    assert!(table.contains('*'), "no best value flagged:\n{table}");

    let manifest = dir.path().join("reports/grid.txt.manifest.json");
    assert!(manifest.exists());
    let checkpoints: Vec<_> = fs::read_dir(dir.path().join("checkpoints")).unwrap().collect();
    assert!(!checkpoints.is_empty());
    let result_manifest = fs::read_dir(dir.path().join("reports"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.starts_with("exp-") && n.ends_with("-run0.json.manifest.json")
        })
        .unwrap();
    let before = fs::read_to_string(&result_manifest).unwrap();

    let again = claimbridge(&["grid", config.to_str().unwrap(), "--runs", "1"]);
    ok(&again);
    assert_eq!(String::from_utf8_lossy(&again.stdout), table);
    assert_eq!(fs::read_to_string(&result_manifest).unwrap(), before, "completed run was redone");

    let report = claimbridge(&["--run-dir", dir.path().to_str().unwrap(), "report"]);
    ok(&report);
    assert_eq!(String::from_utf8_lossy(&report.stdout), table);

    let json = claimbridge(&["--json", "--run-dir", dir.path().to_str().unwrap(), "report"]);
    let v = json_of(&json);
    assert_eq!(v["table"]["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["experiments"].as_array().unwrap().len(), 8);
}

#[test]
fn train_evaluate_and_saliency() {
    let dir = tempfile::tempdir().unwrap();
    generate_bilingual(dir.path());
    let run = dir.path().join("run");
    let run = run.to_str().unwrap();
    let de = dir.path().join("de.jsonl");
    let de = de.to_str().unwrap();

    let first = claimbridge(&["--json", "--run-dir", run, "train", de, "--task", "id", "--name", "m"]);
    ok(&first);
    let v = json_of(&first);
    assert_eq!(v["cached"], false);
    let ckpt = v["path"].as_str().unwrap().to_string();
    let second = claimbridge(&["--json", "--run-dir", run, "train", de, "--task", "id", "--name", "m"]);
    assert_eq!(json_of(&second)["cached"], true);
    let retrained = claimbridge(&["--json", "--run-dir", run, "train", de, "--task", "id", "--name", "m", "--seed", "4"]);
    assert_eq!(json_of(&retrained)["cached"], false);

    let preds = dir.path().join("preds.jsonl");
    let eval = claimbridge(&[
        "--json", "--run-dir", run, "evaluate", "--model", &ckpt, de, "--partition", "test",
        "--predictions", preds.to_str().unwrap(),
    ]);
    ok(&eval);
    let report = json_of(&eval);
    assert_eq!(report["task"], "identification");
    let n = report["n_instances"].as_u64().unwrap();
    assert_eq!(fs::read_to_string(&preds).unwrap().lines().count() as u64, n);

    let en = dir.path().join("en.jsonl");
    let wrong_language = claimbridge(&["evaluate", "--model", &ckpt, en.to_str().unwrap()]);
    assert_eq!(wrong_language.status.code(), Some(1));

    let sal = claimbridge(&["--json", "analyze", "saliency", "--model", &ckpt, "--text", "Die Regierung fordert mehr Grenzschutz"]);
    ok(&sal);
    let map = json_of(&sal);
    assert_eq!(map["tokens"].as_array().unwrap().len(), 5);
    let max = map["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!((max - 1.0).abs() < 1e-12);
}

#[test]
fn translate_with_dictionary_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    generate_bilingual(dir.path());
    let run = dir.path().join("run");
    let args = |json: bool| {
        let mut a = vec![
            "--run-dir".to_string(),
            run.to_str().unwrap().to_string(),
            "translate".into(),
            dir.path().join("en.jsonl").to_str().unwrap().to_string(),
            "--to".into(),
            "de".into(),
            "--dictionary".into(),
            dir.path().join("lexicon.json").to_str().unwrap().to_string(),
            "--backend".into(),
            "dictionary".into(),
        ];
        if json {
            a.insert(0, "--json".into());
        }
        a
    };
    let run_args = |json: bool| {
        let a = args(json);
        claimbridge(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let first = json_of(&run_args(true));
    assert_eq!(first["language"], "de");
    assert!(first["cache_misses"].as_u64().unwrap() > 0);
    let second = json_of(&run_args(true));
    assert_eq!(second["cache_misses"], 0);
    let text = fs::read_to_string(first["path"].as_str().unwrap()).unwrap();
    assert!(text.contains("\"language\":\"de\""));

    let unknown = claimbridge(&["translate", dir.path().join("en.jsonl").to_str().unwrap(), "--to", "de", "--backend", "nope"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn cues_and_overlap_from_prediction_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let rec = |k: usize, text: &str, gold: bool, label: bool| {
        format!(
            r#"{{"key":"d:{k}","text":"{text}","gold":{gold},"label":{label},"score":0.5,"correct":{}}}"#,
            gold == label
        )
    };
    let lines_a = [
        rec(0, "Die Partei fordert mehr", false, true),
        rec(1, "Die Partei fordert weniger", false, true),
        rec(2, "Die Partei sagte nichts", false, true),
        rec(3, "Der Minister verlangt Geld", true, false),
        rec(4, "Der Minister fordert Geld", true, false),
        rec(5, "ok", true, true),
        rec(6, "ok", false, false),
        rec(7, "ok", false, false),
    ];
    fs::write(&a, lines_a.join("\n")).unwrap();
    let lines_b = [
        rec(0, "x", false, true),
        rec(1, "x", false, false),
        rec(2, "x", false, false),
        rec(3, "x", true, false),
        rec(4, "x", true, true),
        rec(5, "x", true, true),
        rec(6, "x", false, true),
        rec(7, "x", false, false),
    ];
    fs::write(&b, lines_b.join("\n")).unwrap();

    let cues = claimbridge(&["--json", "analyze", "cues", "--predictions", a.to_str().unwrap(), "--patterns", "forder"]);
    ok(&cues);
    let v = json_of(&cues);
    assert_eq!((v["fp_matches"].as_u64(), v["fp_total"].as_u64()), (Some(2), Some(3)));
    assert_eq!((v["fn_matches"].as_u64(), v["fn_total"].as_u64()), (Some(1), Some(2)));
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((ratio - (2.0 / 3.0) / 0.5).abs() < 1e-12);

    let ov = claimbridge(&[
        "--json", "analyze", "overlap", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--trials", "2000",
    ]);
    ok(&ov);
    let v = json_of(&ov);
    // a misses {0,1,2,3,4}, b misses {0,3,6}
    assert_eq!(v["intersection"], 2);
    assert_eq!(v["n_test"], 8);
    assert!((v["observed_overlap"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((v["expected_overlap"].as_f64().unwrap() - 5.0 / 8.0).abs() < 1e-12);
    assert_eq!(v["monte_carlo"]["trials"], 2000);
}

#[test]
fn split_writes_plan_with_disjoint_documents() {
    let dir = tempfile::tempdir().unwrap();
    generate_bilingual(dir.path());
    let run = dir.path().join("run");
    let out = claimbridge(&[
        "--json", "--run-dir", run.to_str().unwrap(), "split",
        dir.path().join("de.jsonl").to_str().unwrap(), "--split-seed", "3",
    ]);
    ok(&out);
    let v = json_of(&out);
    let parts = &v["split"]["partitions"];
    let docs = |p: &str| parts[p]["documents"].as_array().unwrap().len();
    assert_eq!((docs("train"), docs("dev"), docs("test")), (32, 4, 4));
    assert!(Path::new(v["path"].as_str().unwrap()).exists());
}
