use quotlab::scenario::{self, render_text, render_tree, CorpusOptions, Outcome, RunOptions, Scenario};
use quotlab::Error;

#[test]
fn corpus_names_are_unique_and_sorted() {
    let names: Vec<String> = scenario::corpus().unwrap().into_iter().map(|s| s.name).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(names, sorted);
}

#[test]
fn tags_cover_the_anchors() {
    let corpus = scenario::corpus().unwrap();
    for tag in [
        "lemma-2-2",
        "remark-2-4",
        "lemma-2-5",
        "lemma-2-6",
        "lemma-2-8",
        "lemma-3-1",
        "proposition-3-2",
        "lemma-3-4",
        "remark-3-6",
        "lemma-3-8",
        "theorem-3-9",
        "section-4",
        "appendix",
    ] {
        assert!(corpus.iter().any(|s| s.has_tag(tag)), "no scenario tagged {tag}");
    }
}

#[test]
fn appendix_tag_selects_symmetric_function_scenarios() {
    let r = scenario::run_corpus(&CorpusOptions { tag: Some("appendix".into()), ..Default::default() }).unwrap();
    assert!(!r.scenarios.is_empty());
    for sc in &r.scenarios {
        assert!(sc.scenario.starts_with("appendix"), "{}", sc.scenario);
        assert!(sc.tasks.iter().all(|t| ["polarization", "sum_expansion", "verify_identity"].contains(&t.op.as_str())));
    }
    assert!(r.all_pass());
}

#[test]
fn remark_2_4_reports_witness_b() {
    let r = scenario::run(&scenario::corpus_scenario("remark-2-4").unwrap(), &RunOptions::default());
    assert_eq!(r.outcome, Outcome::Pass, "{}", render_text(&r, false));
    let cmp = r.tasks.iter().find(|t| t.op == "compare").unwrap();
    assert_eq!(cmp.artifacts["witness"], "b");
    assert_eq!(cmp.artifacts["equal"], false);
}

#[test]
fn node_swap_z4_quotient_is_generated_by_x2_plus_y2() {
    let r = scenario::run(&scenario::corpus_scenario("node-swap-z4").unwrap(), &RunOptions::default());
    assert_eq!(r.outcome, Outcome::Pass, "{}", render_text(&r, false));
    let t = r.tasks.iter().find(|t| t.op == "compare_generated").unwrap();
    assert_eq!(t.artifacts["equal"], true);
}

#[test]
fn gated_tasks_do_not_fail_the_scenario() {
    let r = scenario::run(&scenario::corpus_scenario("node-wild-branch-kernel").unwrap(), &RunOptions::default());
    assert_eq!(r.tasks[0].outcome, Outcome::Gated);
    assert_eq!(r.outcome, Outcome::Pass);
}

#[test]
fn truncation_override_reaches_the_algebra() {
    let sc = scenario::corpus_scenario("bc-sign-f5").unwrap();
    let r = scenario::run(&sc, &RunOptions { truncation: Some(6) });
    assert_eq!(r.truncation, Some(6));
    assert_eq!(r.outcome, Outcome::Pass, "{}", render_text(&r, false));
}

#[test]
fn reports_are_stable_and_versioned() {
    let sc = scenario::corpus_scenario("extraction-z4-z2").unwrap();
    let a = render_tree(&scenario::run(&sc, &RunOptions::default()), false);
    let b = render_tree(&scenario::run(&sc, &RunOptions::default()), false);
    assert_eq!(a, b);
    assert!(a.contains("\"schema\": 1"));
    assert!(!a.contains("timing_ms"));
    assert!(render_text(&scenario::run(&sc, &RunOptions::default()), true).contains("timing_ms"));
}

#[test]
fn bad_element_in_action_is_a_parse_error() {
    let src = r#"
name = "bad"
[ring]
spec = "F_5"
[algebra]
vars = ["t"]
[action]
kind = "constant"
group = "Z/2"
[[action.generators]]
element = "g^1"
images = { t = "-t +* 2" }
"#;
    let sc = Scenario::parse(src, "bad.toml").unwrap();
    match sc.build(None) {
        Err(Error::Parse { location, .. }) => assert!(location.starts_with("bad.toml: action.generators[0].images.t"), "{location}"),
        other => panic!("{other:?}"),
    }
    let r = scenario::run(&sc, &RunOptions::default());
    assert_eq!(r.outcome, Outcome::Pass, "no tasks, nothing fails");
}

#[test]
fn unknown_fields_are_rejected_with_a_line() {
    let err = Scenario::parse("name = \"x\"\nfoo = 1\n", "x.toml").unwrap_err();
    match err {
        Error::Parse { location, .. } => assert!(location.starts_with("x.toml:2:"), "{location}"),
        other => panic!("{other}"),
    }
}
