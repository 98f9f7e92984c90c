use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn deonnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deonnet"))
        .args(args)
        .env("DEONNET_FIXTURES", fixtures())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = deonnet(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

#[test]
fn compile_prints_the_worked_example() {
    let out = ok(&["compile", &fixture("worked_example.norm")]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.contains(&"f <- d, e, not a, not b, not g."));
    let staged = ok(&["compile", &fixture("worked_example.norm"), "--stages", "--namespaced"]);
    assert!(staged.contains("r1_1 > r2"));
    assert!(staged.contains("out_f <- in_d, in_e, not in_a, not in_b, not in_g."));
    let dropped = ok(&["compile", &fixture("worked_example.norm"), "--exclude", "r1>r2"]);
    assert!(dropped.contains("f <- d, e, not g."));
}

#[test]
fn solve_reports_answer_sets_and_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("p.lp");
    fs::write(&lp, "a <- b.\n-a <- c.\n").unwrap();
    let lp = lp.to_str().unwrap();
    assert_eq!(ok(&["solve", lp, "--context", "b"]).trim(), "{a, b}");
    let o = deonnet(&["solve", lp, "--context", "b, c"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("Inconsistent"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_two_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.norm");
    fs::write(&bad, "rule R1 (a").unwrap();
    let o = deonnet(&["compile", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("ParseError"), "{err}");
    assert!(err.contains(":1:9:"), "{err}");
}

#[test]
fn missing_fixture_and_missing_file_exit_one() {
    let empty = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_deonnet"))
        .args(["experiment", "baseline", "--seeds", "1"])
        .env("DEONNET_FIXTURES", empty.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("MissingFixture"), "{}", stderr(&o));
    let o = deonnet(&["compile", "/nonexistent/x.norm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("MissingFile"), "{}", stderr(&o));
}

#[test]
fn translate_run_dataset_train_eval() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    let data = dir.path().join("data.csv");
    let trained = dir.path().join("trained.json");
    let history = dir.path().join("history.csv");
    let (net_s, data_s) = (net.to_str().unwrap(), data.to_str().unwrap());

    let o = deonnet(&["translate", &fixture("worked_example.norm"), "--out", net_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("a_min"));
    let run = ok(&["run", net_s, "--set", "in_d=1", "--set", "in_e=1"]);
    assert!(run.contains("out_f = 1"), "{run}");
    let run = ok(&["run", net_s, "--set", "in_d=1", "--set", "in_e=1", "--set", "in_a=1"]);
    assert!(run.contains("out_f = -1") && run.contains("out_c = 1"), "{run}");

    ok(&["dataset", &fixture("worked_example.norm"), "--out", data_s]);
    let eval = ok(&["eval", net_s, data_s]);
    assert!(eval.contains("tot  100.00%"), "{eval}");

    ok(&[
        "train",
        net_s,
        data_s,
        "--epochs",
        "5",
        "--seed",
        "3",
        "--out",
        trained.to_str().unwrap(),
        "--history",
        history.to_str().unwrap(),
    ]);
    assert_eq!(fs::read_to_string(&history).unwrap().lines().count(), 6);
    ok(&["eval", trained.to_str().unwrap(), data_s]);

    let rec = dir.path().join("rec.json");
    ok(&["translate", &fixture("example1.lp"), "--recurrent", "--out", rec.to_str().unwrap()]);
    let run = ok(&["run", rec.to_str().unwrap(), "--recurrent", "--set", "C=1", "--set", "A=1"]);
    assert!(run.contains("out A = -1") && run.contains("out B = 1"), "{run}");
}

#[test]
fn io_queries() {
    let out = ok(&["query-io", "ans", &fixture("dog_sign.ans"), "--context", "dog", "--variant", "1"]);
    assert!(out.contains("violations {dog}"), "{out}");
    let out = ok(&["query-io", "prop", &fixture("cases.io"), "--input", "top", "--formula", "x", "--variant", "2"]);
    assert!(out.trim().starts_with("in"), "{out}");
    let out = ok(&["query-io", "prop", &fixture("cases.io"), "--input", "top", "--formula", "x", "--variant", "1"]);
    assert!(out.trim().starts_with("out"), "{out}");
    let o = deonnet(&["query-io", "ans", &fixture("dog_sign.ans"), "--variant", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kleene_queries() {
    let out = ok(&["query-kleene", &fixture("brake.klp"), "--facts", "press"]);
    assert!(out.contains("slow = true") && out.contains("ab = false"), "{out}");
    let out = ok(&["query-kleene", &fixture("brake.klp"), "--goal", "slow", "--trace"]);
    assert!(out.contains("?slow reduces to press, -ab"), "{out}");
    assert_eq!(out.lines().last(), Some("Fails"));
    let out = ok(&["query-kleene", &fixture("brake.klp"), "--goal", "slow", "--facts", "press"]);
    assert_eq!(out.trim(), "Succeeds");
}

#[test]
fn quick_experiment_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("b.json");
    let out = ok(&[
        "experiment",
        "baseline",
        "--seeds",
        "1-2",
        "--epochs",
        "2",
        "--contexts",
        "200",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert!(out.contains("seeds"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    let csv = dir.path().join("inc.csv");
    ok(&[
        "experiment",
        "incremental",
        "--seeds",
        "1",
        "--epochs",
        "1",
        "--contexts",
        "200",
        "--sizes",
        "24,26",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("kb_rules,on_training_set,"));
    assert_eq!(text.lines().count(), 3);
}
