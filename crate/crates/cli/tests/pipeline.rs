use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_drought-impact"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_train_evaluate_overfits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (train, val) = (d.join("train.jsonl"), d.join("val.jsonl"));
    ok(&["synth", "--n", "64", "--seed", "7", "--output", p(&train)]);
    ok(&["synth", "--n", "32", "--seed", "8", "--output", p(&val)]);
    let model = d.join("model");
    ok(&[
        "train",
        "--input",
        p(&train),
        "--val",
        p(&val),
        "--output",
        p(&model),
        "--encoder",
        "tiny",
        "--seed",
        "7",
        "--batch-size",
        "16",
    ]);
    let preds = d.join("preds.jsonl");
    ok(&["predict", "--model", p(&model), "--input", p(&train), "--output", p(&preds)]);
    let report = d.join("metrics.json");
    let out = ok(&["evaluate", "--truth", p(&train), "--predictions", p(&preds), "--output", p(&report)]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Overall (micro/macro)"));
    let micro = json(&report)["overall"]["micro"]["f1"].as_f64().unwrap();
    assert!(micro >= 0.95, "micro F1 {micro}");

    let manifest = json(&model.join("manifest.json"));
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["seeds"]["master"], 7);
    assert_eq!(manifest["config"]["model"]["batch_size"], 16);
    assert!(json(&d.join("train.jsonl.manifest.json"))["seeds"]["synth"].is_u64());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for tag in ["a", "b"] {
        ok(&["synth", "--n", "40", "--seed", "3", "--noise", "0.1", "--output", p(&d.join(format!("{tag}.jsonl")))]);
        ok(&[
            "split",
            "--input",
            p(&d.join(format!("{tag}.jsonl"))),
            "--output",
            p(&d.join(format!("split-{tag}"))),
            "--seed",
            "5",
        ]);
    }
    let read = |f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    for f in ["train.jsonl", "validation.jsonl", "test.jsonl", "split.json"] {
        assert_eq!(read(&format!("split-a/{f}")), read(&format!("split-b/{f}")), "{f}");
    }
    let split = json(&d.join("split-a/split.json"));
    assert_eq!(split["assignments"].as_object().unwrap().len(), 40);
}

#[test]
fn keyword_label_wildfire_season() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tweets.txt");
    std::fs::write(&input, "wildfire season\n").unwrap();
    let output = dir.path().join("labeled.jsonl");
    ok(&["keyword-label", "--input", p(&input), "--output", p(&output)]);
    let row: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&output).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(row["fire"], 1);
    assert_eq!(row["agriculture"], 0);
    assert_eq!(row["water_supply_quality"], 0);
}

#[test]
fn evaluate_rejects_mismatched_ids() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.csv");
    std::fs::write(
        &truth,
        "id,text,agriculture,economy,fire,plants_wildlife,relief_response_restrictions,society_public_health,water_supply_quality\n\
         a,dry crops,1,0,0,0,0,0,0\n",
    )
    .unwrap();
    let preds = dir.path().join("preds.jsonl");
    std::fs::write(&preds, "{\"id\":\"b\",\"probabilities\":[0.9,0,0,0,0,0,0],\"labels\":[1,0,0,0,0,0,0]}\n").unwrap();
    let out =
        run(&["evaluate", "--truth", p(&truth), "--predictions", p(&preds), "--output", p(&dir.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("document ids do not match"));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn pretrained_without_weights_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("t.jsonl");
    ok(&["synth", "--n", "8", "--output", p(&train)]);
    let out = bin()
        .env_remove("DROUGHT_IMPACT_ENCODER_DIR")
        .args([
            "train",
            "--input",
            p(&train),
            "--val",
            p(&train),
            "--output",
            p(&dir.path().join("m")),
            "--encoder",
            "pretrained",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("DROUGHT_IMPACT_ENCODER_DIR"));
}

#[test]
fn review_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let tweets = d.join("tweets.txt");
    std::fs::write(&tweets, "farmers watch crops wither\nlawn and trees in the park are brown\nwildfire smoke again\nwells run dry near the lake\n").unwrap();
    let kw = d.join("kw.jsonl");
    ok(&["keyword-label", "--input", p(&tweets), "--output", p(&kw)]);
    // A "model" that calls everything agriculture.
    let ids: Vec<String> = std::fs::read_to_string(&kw)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    let preds = d.join("preds.jsonl");
    let rows: String = ids
        .iter()
        .map(|id| {
            format!("{{\"id\":\"{id}\",\"probabilities\":[0.9,0.1,0.1,0.1,0.1,0.1,0.1],\"labels\":[1,0,0,0,0,0,0]}}\n")
        })
        .collect();
    std::fs::write(&preds, rows).unwrap();

    let ledger = d.join("ledger.jsonl");
    let review = |keys: &str| {
        use std::io::Write;
        let mut child = bin()
            .args(["review", "--keywords", p(&kw), "--predictions", p(&preds), "--category", "agriculture"])
            .args(["--ledger", p(&ledger), "--seed", "1", "--reviewer", "tester"])
            .stdin(std::process::Stdio::piped())
            .stdout(std::process::Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(keys.as_bytes()).unwrap();
        let out = child.wait_with_output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    // Only the fire and water tweets lack an agriculture keyword, so they are the two disagreements.
    let shown = review("m irrigation of lawns\nq\n");
    assert!(shown.contains("keyword label: 0   model label: 1") || shown.contains("keyword label: 1   model label: 0"));
    assert_eq!(std::fs::read_to_string(&ledger).unwrap().lines().count(), 1);
    review("k\nk\n");
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&ledger).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2, "only two controversial documents exist");
    assert_eq!(lines[0]["verdict"], "model_correct");
    assert_eq!(lines[0]["note"], "irrigation of lawns");
    assert_eq!(lines[1]["reviewer"], "tester");

    let out_dir = d.join("report");
    ok(&["report", "--truth", p(&kw), "--predictions", p(&preds), "--ledger", p(&ledger), "--output", p(&out_dir)]);
    let md = std::fs::read_to_string(out_dir.join("report.md")).unwrap();
    for needle in [
        "## Classification metrics",
        "## Co-occurrence",
        "## Spot-check adjudication",
        "| Agriculture | 2 | 1 | 1 |",
        "label_distribution.svg",
    ] {
        assert!(md.contains(needle), "missing {needle:?} in\n{md}");
    }
    assert!(std::fs::read_to_string(out_dir.join("word_counts.svg")).unwrap().starts_with("<svg"));

    let co = d.join("co.json");
    ok(&["cooccur", "--predictions", p(&preds), "--output", p(&co)]);
    assert!(json(&co).is_object() || json(&co).is_array());
}
