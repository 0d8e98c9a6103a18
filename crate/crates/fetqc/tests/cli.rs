use std::path::Path;

use fetqc::cli::run;
use serde_json::Value;

fn fetqc(args: &[&str]) -> i32 {
    run(std::iter::once("fetqc").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_log(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(fetqc(&["--help"]), 0);
    assert_eq!(fetqc(&["--version"]), 0);
    assert_eq!(fetqc(&["frobnicate"]), 1);
    assert_eq!(fetqc(&["train", "--iqms", "x.csv"]), 1);
    assert_eq!(fetqc(&["predict", "--model", "/nonexistent/m.json", "--iqms", "/nonexistent/i.csv", "--out", "/tmp/o.tsv"]), 1);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fetqc(&["phantom", "--out", s(dir.path()), "--min-stacks", "4", "--max-stacks", "2"]), 1);
}

#[test]
fn unwritable_outputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let code = fetqc(&["phantom", "--out", s(&out), "--sites", "1", "--scanners-per-site", "1", "--subjects-per-scanner", "1", "--min-stacks", "1", "--max-stacks", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn phantom_to_evaluation_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");
    let gen = ["phantom", "--out", s(&data), "--sites", "1", "--scanners-per-site", "3", "--subjects-per-scanner", "3", "--min-stacks", "2", "--max-stacks", "3", "--seed", "5"];
    assert_eq!(fetqc(&gen), 0);
    let log = run_log(&data.join("run.log.json"));
    assert_eq!(log["seeds"]["master"], 5);
    assert_eq!(log["tool"], "fetqc");

    let iqms = d.join("iqms.csv");
    assert_eq!(fetqc(&["extract", "--dataset", s(&data), "--out", s(&iqms), "--jobs", "1"]), 0);
    let header = std::fs::read_to_string(&iqms).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 5 + 332);
    assert!(d.join("iqms.csv.log.json").is_file());

    let labels = data.join("labels.csv");
    let model = d.join("model.json");
    let train = ["train", "--iqms", s(&iqms), "--labels", s(&labels), "--task", "qc", "--out", s(&model), "--trees", "20", "--seed", "3"];
    assert_eq!(fetqc(&train), 0);
    assert_eq!(run_log(&d.join("model.json.log.json"))["seeds"]["forest"], 3);

    let pred = d.join("pred.tsv");
    assert_eq!(fetqc(&["predict", "--model", s(&model), "--iqms", s(&iqms), "--out", s(&pred)]), 0);
    let text = std::fs::read_to_string(&pred).unwrap();
    assert!(text.starts_with("stack_id\tscore\tinclude\n"));
    let n_stacks = fetqc::dataset::load_manifest(&data.join("manifest.tsv")).unwrap().len();
    assert_eq!(text.lines().count(), n_stacks + 1);
    for line in text.lines().skip(1) {
        let score: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&score));
    }

    let table = d.join("eval.tsv");
    let eval = ["evaluate", "--iqms", s(&iqms), "--labels", s(&labels), "--protocol", "loso", "--task", "qa", "--out", s(&table), "--repetitions", "2", "--trees", "10"];
    assert_eq!(fetqc(&eval), 0);
    assert!(std::fs::read_to_string(&table).unwrap().lines().count() >= 3);
    assert!(d.join("eval.tsv.per_scanner.tsv").is_file());
    let log = run_log(&d.join("eval.tsv.log.json"));
    assert_eq!(log["settings"]["protocol"], "loso");
    assert!(log["seeds"]["repetition_1"].is_u64());

    // The same seed reproduces the same model file.
    let again = d.join("model2.json");
    let train2 = ["train", "--iqms", s(&iqms), "--labels", s(&labels), "--task", "qc", "--out", s(&again), "--trees", "20", "--seed", "3"];
    assert_eq!(fetqc(&train2), 0);
    assert_eq!(std::fs::read(&model).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn ratings_aggregate_writes_labels_and_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let log = d.join("ratings.jsonl");
    let rec = |stack: &str, rater: &str, q: f64, ts: u64| {
        format!(
            r#"{{"stack_id":"{stack}","rater_id":"{rater}","quality":{q},"orientation":"axial","artifacts":{{"motion_inplane":"none","motion_throughplane":"mild","bias":"none","noise":"none","fov_incomplete":"none"}},"comment":"","timestamp":{ts},"duration_s":4.0}}"#
        )
    };
    let lines = [rec("a", "x", 1.0, 1), rec("a", "y", 2.0, 2), rec("b", "x", 3.0, 3), rec("a", "x", 0.5, 4)];
    std::fs::write(&log, lines.join("\n") + "\n").unwrap();
    let out = d.join("labels.csv");
    let paired = d.join("paired.tsv");
    assert_eq!(fetqc(&["ratings", "aggregate", "--ratings", s(&log), "--out", s(&out), "--paired", s(&paired)]), 0);
    assert_eq!(fetqc::tables::read_labels(&out).unwrap(), vec![("a".to_string(), 0.5), ("b".to_string(), 3.0)]);
    assert_eq!(std::fs::read_to_string(&paired).unwrap().lines().count(), 2);
    let mean = d.join("mean.csv");
    assert_eq!(fetqc(&["ratings", "aggregate", "--ratings", s(&log), "--out", s(&mean), "--policy", "mean-across-raters"]), 0);
    assert_eq!(fetqc::tables::read_labels(&mean).unwrap()[0], ("a".to_string(), 1.25));
    std::fs::write(&log, "garbage\n").unwrap();
    assert_eq!(fetqc(&["ratings", "aggregate", "--ratings", s(&log), "--out", s(&out)]), 1);
}
