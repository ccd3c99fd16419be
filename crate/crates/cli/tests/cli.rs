use std::process::{Command, Output};

fn quotlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quotlab"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn passing_scenario_exits_zero() {
    let o = quotlab(&["run", "tests/data/sign.toml", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("schema: 1\n"));
    assert!(out.contains("scenario: sign-f5 [pass]"));
    assert!(!out.contains("timing_ms"));
}

#[test]
fn wrong_expectation_exits_one() {
    let o = quotlab(&["run", "tests/data/wrong-expectation.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch: char_poly"));
    assert!(stdout(&o).contains("timing_ms"));
}

#[test]
fn empty_task_list_passes() {
    let o = quotlab(&["run", "tests/data/empty.toml", "--format", "tree", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["tasks"].as_array().unwrap().len(), 0);
}

#[test]
fn syntax_errors_exit_two_with_line_and_column() {
    let o = quotlab(&["run", "tests/data/broken.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tests/data/broken.toml:2:"), "{}", stderr(&o));
}

#[test]
fn bad_element_exits_two_with_field_path() {
    let o = quotlab(&["run", "tests/data/bad-element.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad-element.toml: action.generators[0].images.t"), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_two() {
    let o = quotlab(&["run", "tests/data/nope.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn truncation_override() {
    let o = quotlab(&["run", "tests/data/sign.toml", "--truncation", "6", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("truncation: 6"));
}

#[test]
fn corpus_list_does_not_run() {
    let o = quotlab(&["corpus", "--list", "--tag", "appendix"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<&str> = std::str::from_utf8(&o.stdout).unwrap().lines().collect();
    assert!(!names.is_empty());
    assert!(names.iter().all(|n| n.starts_with("appendix")));
}

#[test]
fn corpus_is_independent_of_job_count() {
    let a = quotlab(&["corpus", "--jobs", "1", "--no-timing", "--format", "tree"]);
    let b = quotlab(&["corpus", "--jobs", "4", "--no-timing", "--format", "tree"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn show_prints_one_artifact() {
    let o = quotlab(&["show", "remark-2-4", "witness"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "b\n");
    let o = quotlab(&["show", "remark-2-4", "1.generators"]);
    assert_eq!(stdout(&o), "[\"b^2\"]\n");
    let o = quotlab(&["show", "tests/data/sign.toml", "char_poly"]);
    assert_eq!(stdout(&o), "T^2 + 4*t^2\n");
    let o = quotlab(&["show", "remark-2-4", "no_such_artifact"]);
    assert_eq!(o.status.code(), Some(1));
}
