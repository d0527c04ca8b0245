use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn factkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("FACTKIT_CONFIG")
        .output()
        .expect("spawn factkit")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Synthetic MegaVeridicality long-format table: 6 verbs x 2 frames x 2
/// polarities, ten responses per item drawn deterministically.
fn write_mv(dir: &Path) -> PathBuf {
    let verbs = [("know", 9, 8), ("think", 3, 1), ("forget", 8, 7), ("pretend", 1, 4), ("say", 5, 3), ("realize", 9, 8)];
    let mut s = String::from("verb,frame,polarity,sentence,veridicality\n");
    let mut k = 0u32;
    for (verb, yes_pos, yes_neg) in verbs {
        for frame in ["V_that_S", "was_Ved_that_S"] {
            for neg in [false, true] {
                let yes = if neg { yes_neg } else { yes_pos };
                let sentence = format!("Someone {}{verb} that something happened", if neg { "did not " } else { "" });
                for r in 0..10 {
                    k = k.wrapping_mul(7).wrapping_add(3) % 11;
                    let resp = if r < yes { "yes" } else if k.is_multiple_of(2) { "maybe" } else { "no" };
                    let pol = if neg { "negative" } else { "positive" };
                    writeln!(s, "{verb},{frame},{pol},{sentence},{resp}").unwrap();
                }
            }
        }
    }
    let p = dir.join("mv.csv");
    fs::write(&p, s).unwrap();
    p
}

fn item(id: &str, dataset: &str, gold: f64, split: &str) -> Value {
    json!({
        "id": id, "dataset": dataset, "split": split,
        "sentence": "it happened", "tokens": ["it", "happened"], "event_span": [1, 2], "gold": gold,
    })
}

fn write_jsonl(path: &Path, rows: &[Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    fs::write(path, text).unwrap();
}

fn read_manifest(out: &Path) -> Value {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest.json");
    serde_json::from_slice(&fs::read(p).expect("manifest written")).unwrap()
}

/// ingest and split, returning the split file.
fn prepared(dir: &Path) -> PathBuf {
    write_mv(dir);
    let o = factkit(dir, &["ingest", "--dataset", "mv", "--input", "mv.csv", "--out", "mv.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = factkit(
        dir,
        &["split", "--in", "mv.jsonl", "--ratios", "0.5,0.2,0.3", "--seed", "3", "--stratify", "verb", "--out", "split.jsonl"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join("split.jsonl")
}

#[test]
fn missing_input_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = factkit(dir.path(), &["ingest", "--dataset", "cb", "--input", "absent.csv", "--out", "cb.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.csv"), "{}", stderr(&o));
    assert!(dir.path().join("cb.jsonl.FAILED").exists());
    assert!(!dir.path().join("cb.jsonl").exists());
}

#[test]
fn ingest_writes_records_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    prepared(dir.path());
    let text = fs::read_to_string(dir.path().join("mv.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 24);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["dataset"], "MV");
    assert_eq!(first["annotations"].as_array().unwrap().len(), 10);
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("mv.jsonl.filter.json")).unwrap()).unwrap();
    assert_eq!(report["kept"], 24);
    let m = read_manifest(&dir.path().join("mv.jsonl"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn split_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    prepared(dir.path());
    let args = |out: &'static str| ["split", "--in", "mv.jsonl", "--ratios", "0.5,0.2,0.3", "--seed", "3", "--stratify", "verb", "--out", out];
    assert_eq!(code(&factkit(dir.path(), &args("a.jsonl"))), 0);
    assert_eq!(code(&factkit(dir.path(), &args("b.jsonl"))), 0);
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.jsonl")).unwrap());
    assert_eq!(
        read_manifest(&dir.path().join("a.jsonl"))["config_hash"],
        read_manifest(&dir.path().join("b.jsonl"))["config_hash"]
    );
    let o = factkit(dir.path(), &["split", "--in", "mv.jsonl", "--ratios", "0.5,0.2,0.3", "--seed", "4", "--out", "c.jsonl"]);
    assert_eq!(code(&o), 0);
    assert_ne!(
        read_manifest(&dir.path().join("a.jsonl"))["config_hash"],
        read_manifest(&dir.path().join("c.jsonl"))["config_hash"]
    );
}

#[test]
fn stratify_by_verb_needs_verbs() {
    let dir = tempfile::tempdir().unwrap();
    write_jsonl(
        &dir.path().join("fb.jsonl"),
        &[item("fb:x:0", "FactBank", 3.0, "Unassigned"), item("fb:x:1", "FactBank", -3.0, "Unassigned")],
    );
    let o = factkit(dir.path(), &["split", "--in", "fb.jsonl", "--ratios", "0.5,0.25,0.25", "--stratify", "verb"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fb:x:0") && stderr(&o).contains("fb:x:1"), "{}", stderr(&o));
}

#[test]
fn ratios_must_be_three_values() {
    let dir = tempfile::tempdir().unwrap();
    write_jsonl(&dir.path().join("fb.jsonl"), &[item("fb:x:0", "FactBank", 3.0, "Unassigned")]);
    let o = factkit(dir.path(), &["split", "--in", "fb.jsonl", "--ratios", "0.5,0.5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d);

    let o = factkit(d, &["sig-predict", "--in", "split.jsonl", "--tsv", "sig.tsv", "--ordinal", "--out", "sig.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ordered logit"));
    let ordinal: Value = serde_json::from_slice(&fs::read(d.join("sig.jsonl.ordinal.json")).unwrap()).unwrap();
    let th = &ordinal["model"]["thresholds"];
    assert!(th[0].as_f64().unwrap() < th[1].as_f64().unwrap());
    assert_eq!(fs::read_to_string(d.join("sig.tsv")).unwrap().lines().count(), 24);

    let o = factkit(d, &["oracle", "--in", "split.jsonl", "--out", "oracle.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows: Vec<Value> = fs::read_to_string(d.join("oracle.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let tests = fs::read_to_string(d.join("split.jsonl")).unwrap().matches("\"Test\"").count();
    assert_eq!(rows.len(), tests);
    assert!(rows.iter().all(|r| r["source"] == "feature_match"));

    let o = factkit(d, &["eval", "--in", "split.jsonl", "--preds", "sig.tsv", "--out", "eval.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&fs::read(d.join("eval.json")).unwrap()).unwrap();
    assert_eq!(report["datasets"][0]["n"].as_u64().unwrap() as usize, tests);

    let o = factkit(d, &["analyze", "errors", "--in", "split.jsonl", "--preds", "sig.tsv", "--top-frac", "0.5", "--out", "errors.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ranked: Vec<Value> = serde_json::from_slice(&fs::read(d.join("errors.json")).unwrap()).unwrap();
    assert_eq!(ranked.len(), tests / 2);
    let errs: Vec<f64> = ranked.iter().map(|r| r["abs_error"].as_f64().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[0] >= w[1]));

    let mut ann = String::new();
    for (i, r) in ranked.iter().enumerate() {
        let id = r["id"].as_str().unwrap();
        writeln!(ann, "{id}\tlexical_inference\tA").unwrap();
        writeln!(ann, "{id}\t{}\tB", if i == 0 { "qud" } else { "lexical_inference" }).unwrap();
    }
    fs::write(d.join("ann.tsv"), ann).unwrap();
    let o = factkit(d, &["analyze", "categories", "--ranked", "errors.json", "--annotations", "ann.tsv", "--out", "cat.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cat: Value = serde_json::from_slice(&fs::read(d.join("cat.json")).unwrap()).unwrap();
    let agreement = &cat["datasets"][0]["agreement"];
    assert_eq!(agreement["shared"].as_u64().unwrap() as usize, ranked.len());
    assert_eq!(agreement["agreed"].as_u64().unwrap() as usize, ranked.len() - 1);

    let o = factkit(d, &["analyze", "scatter", "--in", "split.jsonl", "--preds", "sig.tsv", "--facet", "verb", "--out", "scatter.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(d.join("scatter.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), tests + 1);
}

#[test]
fn eval_averages_several_prediction_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_jsonl(
        &d.join("items.jsonl"),
        &[item("fb:x:0", "FactBank", 2.0, "Test"), item("fb:x:1", "FactBank", -1.0, "Test")],
    );
    fs::write(d.join("a.tsv"), "fb:x:0\t1\nfb:x:1\t-3\n").unwrap();
    fs::write(d.join("b.tsv"), "fb:x:0\t2\nfb:x:1\t-1\n").unwrap();
    fs::write(d.join("c.tsv"), "fb:x:0\t3\nfb:x:1\t1\n").unwrap();
    let o = factkit(d, &["eval", "--in", "items.jsonl", "--preds", "a.tsv", "b.tsv", "c.tsv", "--out", "e.json"]);
    // Averaged predictions equal the gold labels, so MAE is 0 and r is 1.
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&fs::read(d.join("e.json")).unwrap()).unwrap();
    assert!(r["datasets"][0]["mae"].as_f64().unwrap().abs() < 1e-12);
    assert!((r["datasets"][0]["pearson"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn eval_reports_missing_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_jsonl(
        &d.join("items.jsonl"),
        &[item("fb:x:0", "FactBank", 2.0, "Test"), item("fb:x:1", "FactBank", -1.0, "Test")],
    );
    fs::write(d.join("a.tsv"), "fb:x:0\t1\n").unwrap();
    let o = factkit(d, &["eval", "--in", "items.jsonl", "--preds", "a.tsv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fb:x:1"), "{}", stderr(&o));
}

#[test]
fn expected_without_oracle_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_jsonl(&d.join("items.jsonl"), &[item("fb:x:0", "FactBank", 2.0, "Test")]);
    fs::write(d.join("a.tsv"), "fb:x:0\t1\n").unwrap();
    let o = factkit(
        d,
        &["analyze", "expected", "--in", "items.jsonl", "--preds", "a.tsv", "--oracle", "oracle.jsonl", "--out", "x.json"],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("factkit oracle"), "{}", stderr(&o));
    assert!(d.join("x.json.FAILED").exists());
}

#[test]
fn oracle_warns_about_corpora_without_rules() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_jsonl(&d.join("items.jsonl"), &[item("fb:x:0", "FactBank", 2.0, "Test")]);
    let o = factkit(d, &["oracle", "--in", "items.jsonl", "--out", "o.jsonl"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    fs::write(d.join("rules.tsv"), "fb:x:0\t3\n").unwrap();
    let o = factkit(d, &["oracle", "--in", "items.jsonl", "--rule-predictions", "rules.tsv", "--out", "o.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_to_string(d.join("o.jsonl")).unwrap().contains("\"score\":3"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d);
    fs::write(d.join("run.toml"), "seed = 11\nout_dir = \"out\"\n[split]\nratios = [0.5, 0.25, 0.25]\n").unwrap();
    let o = factkit(d, &["--config", "run.toml", "split", "--in", "mv.jsonl", "--out", "s.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = read_manifest(&d.join("out/s.jsonl"));
    assert_eq!(m["options"]["split"]["seed"], 11);
    let o = factkit(d, &["--config", "run.toml", "split", "--in", "mv.jsonl", "--seed", "12", "--out", "t.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_manifest(&d.join("out/t.jsonl"))["options"]["split"]["seed"], 12);

    fs::write(d.join("bad.toml"), "[corpora]\ncb = \"missing.csv\"\n").unwrap();
    let o = factkit(d, &["--config", "bad.toml", "split", "--in", "mv.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.csv"));
}

#[test]
fn sequential_flag_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d);
    assert_eq!(code(&factkit(d, &["sig-predict", "--in", "split.jsonl", "--out", "p.jsonl"])), 0);
    assert_eq!(code(&factkit(d, &["--sequential", "sig-predict", "--in", "split.jsonl", "--out", "s.jsonl"])), 0);
    assert_eq!(fs::read(d.join("p.jsonl")).unwrap(), fs::read(d.join("s.jsonl")).unwrap());
}
