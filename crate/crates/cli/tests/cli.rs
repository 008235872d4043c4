use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn regplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fx(name: &str) -> String {
    fixture(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn validate_default_tree() {
    let o = regplan(&["validate", "--tree", "default"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn validate_tree_missing_branch_names_node() {
    let o = regplan(&["validate", "--tree", &fx("broken_tree.json")]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("root (question 1)") && err.contains("\"L\""), "{err}");
}

#[test]
fn validate_tree_with_repeated_question_lists_violation() {
    let o = regplan(&["validate", "--tree", &fx("repeated_tree.json")]);
    assert_eq!(code(&o), 2);
    let out = stdout(&o);
    assert!(out.contains("invalid"));
    assert!(out.contains("question 1 repeats"), "{out}");
}

#[test]
fn validate_duplicate_suite_ids() {
    let o = regplan(&["validate", "--suite", &fx("dup_suite.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("duplicate test id \"1000\""));
}

#[test]
fn unreadable_input_is_an_io_failure() {
    assert_eq!(code(&regplan(&["validate", "--tree", "no/such/tree.json"])), 3);
    assert_eq!(code(&regplan(&["classify", "--suite", "no/such/suite.json"])), 3);
    assert_eq!(code(&regplan(&["simulate", "--scenario", "no/such/scenario.json"])), 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&regplan(&["plan", "--suite", &fx("table_suite.json"), "--policy", "random"])), 2);
    assert_eq!(code(&regplan(&["score", "--suite", &fx("table_suite.json"), "--fraction", "abc"])), 2);
    assert_eq!(code(&regplan(&["score", "--suite", &fx("table_suite.json"), "--fraction", "1.5"])), 2);
}

#[test]
fn classify_explain_shows_path() {
    let o = regplan(&["classify", "--suite", &fx("table_suite.json"), "--explain"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("1020")).unwrap();
    assert!(row.ends_with("Automate; 1:L → 2:M → 3:H → 7:H"), "{row}");
    assert!(out.contains("How would you describe the reliability of the automation tool to be used?"));
}

#[test]
fn classify_flags_missing_answer() {
    let o = regplan(&["classify", "--suite", &fx("missing_answer_suite.json")]);
    assert_eq!(code(&o), 1);
    let row = stdout(&o).lines().find(|l| l.starts_with("1040")).unwrap().to_string();
    assert!(row.contains("missing answer: Q7"), "{row}");
}

#[test]
fn classify_without_active_tests_is_empty() {
    let o = regplan(&["classify", "--suite", &fx("obsolete_suite.json"), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
}

fn golden_score(format: &str, extra: &[&str]) -> Output {
    let suite = fx("table_suite.json");
    let probs = fx("table_probabilities.json");
    let mut args = vec!["score", "--suite", &suite, "--probabilities", &probs, "--format", format];
    args.extend_from_slice(extra);
    regplan(&args)
}

#[test]
fn score_reproduces_the_risk_table() {
    let o = golden_score("csv", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "id,C,N,S,NS,P,RE\n1020,4,2,3,6,4,16\n1000,5,1,2,2,2,10\n1010,5,1,3,3,2,10\n1030,3,0,0,0,0,0\n"
    );
}

#[test]
fn score_fraction_marks_top_rows() {
    let o = golden_score("csv", &["--fraction", "0.7"]);
    let marks: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    assert_eq!(marks, ["true", "true", "true", "false"]);
}

#[test]
fn score_formats_agree() {
    let csv = stdout(&golden_score("csv", &[]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&golden_score("json", &[]))).unwrap();
    let from_json: Vec<String> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| format!("{},{},{},{},{},{},{}", r["id"].as_str().unwrap(), r["C"], r["N"], r["S"], r["NS"], r["P"], r["RE"]))
        .collect();
    let from_csv: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(from_csv, from_json);

    let table = stdout(&golden_score("table", &[]));
    for (line, csv_line) in table.lines().skip(1).zip(&from_csv) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cells.join(","), *csv_line);
    }
}

#[test]
fn plan_pt_writes_file_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let args = [
        "plan", "--suite", &fx("table_suite.json"), "--policy", "pt", "--fraction", "0.7", "--out",
        out.to_str().unwrap(),
    ];
    let o = regplan(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "policy pt: automate 1, select 3, run 0, skip 0\n");
    let first = std::fs::read(&out).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(doc["summary"]["automate"], 1);

    assert_eq!(code(&regplan(&args)), 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn plan_retest_all_runs_everything() {
    let o = regplan(&["plan", "--suite", &fx("table_suite.json"), "--policy", "retest-all", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(str::to_string).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.contains(",run-manual,policy-all,")));
}

#[test]
fn plan_aborts_on_unclassifiable_tests() {
    let o = regplan(&["plan", "--suite", &fx("missing_answer_suite.json"), "--policy", "atvm"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("1040 (missing answer: Q7)"));
    // risk-only planning does not need answers
    let o = regplan(&["plan", "--suite", &fx("missing_answer_suite.json"), "--policy", "tsra"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn simulate_single_policy() {
    let o = regplan(&["simulate", "--policies", "retest-all", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().skip(1).all(|l| l.starts_with("retest-all,")));
    assert_eq!(out.lines().count(), 1 + 3 + 2);
}

#[test]
fn simulate_is_repeatable_and_echoes_seed() {
    let a = regplan(&["simulate", "--seed", "77"]);
    let b = regplan(&["simulate", "--seed", "77"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("seed 77\n"));
}

#[test]
fn ingest_writes_a_new_suite_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("suite.json");
    std::fs::copy(fixture("table_suite.json"), &input).unwrap();
    let before = std::fs::read(&input).unwrap();
    let out = dir.path().join("next.json");
    let (inp, outp, rec) = (input.to_str().unwrap(), out.to_str().unwrap(), fx("records.json"));

    let o = regplan(&["ingest", "--suite", inp, "--version", "v2", "--records", &rec, "--out", outp]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ingested 2 new defect record(s)"));
    assert_eq!(std::fs::read(&input).unwrap(), before);

    let o = regplan(&["score", "--suite", outp, "--restrict", "1030", "--format", "csv"]);
    assert_eq!(stdout(&o), "id,C,N,S,NS,P,RE\n1030,3,2,3,6,5,15\n");

    // re-ingesting the same records into the result changes nothing
    let again = dir.path().join("again.json");
    let o = regplan(&["ingest", "--suite", outp, "--version", "v2", "--records", &rec, "--out", again.to_str().unwrap()]);
    assert!(stdout(&o).contains("ingested 0 new defect record(s)"));
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&out).unwrap());

    // no leftover temporary files
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.len(), 3, "{names:?}");
}

#[test]
fn ingest_refuses_to_overwrite_its_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("suite.json");
    std::fs::copy(fixture("table_suite.json"), &input).unwrap();
    let p = input.to_str().unwrap();
    let o = regplan(&["ingest", "--suite", p, "--version", "v2", "--records", &fx("records.json"), "--out", p]);
    assert_eq!(code(&o), 2);
    let o = regplan(&["ingest", "--suite", p, "--version", "v2", "--records", &fx("records.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn ingest_rejects_unknown_test() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("r.json");
    std::fs::write(&records, r#"[{"test": "9999", "id": "D-1", "severity": 2}]"#).unwrap();
    let out = dir.path().join("out.json");
    let o = regplan(&[
        "ingest", "--suite", &fx("table_suite.json"), "--version", "v2", "--records",
        records.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("9999"));
    assert!(!out.exists());
}

#[test]
fn generated_scenarios_feed_the_simulator() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    let p = path.to_str().unwrap();
    let gen = ["generate-scenario", "--tests", "12", "--versions", "2", "--seed", "5", "--out", p];
    assert_eq!(code(&regplan(&gen)), 0);
    let first = std::fs::read(&path).unwrap();
    assert_eq!(code(&regplan(&gen)), 0);
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let o = regplan(&["simulate", "--scenario", p, "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["seed"], 5);
    assert_eq!(doc["campaigns"].as_array().unwrap().len(), 4);
}

#[test]
fn quiet_suppresses_reports() {
    let o = regplan(&["--quiet", "simulate"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
}
