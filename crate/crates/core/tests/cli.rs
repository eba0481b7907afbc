use std::path::PathBuf;

use flowcalc::cli::{run_args, Body, Document, Status};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> flowcalc::cli::Outcome {
    let mut v = vec!["flowcalc".to_string()];
    v.extend(args.iter().map(|s| s.to_string()));
    run_args(v)
}

fn json(args: &[&str]) -> (i32, Document, String) {
    let mut v = vec!["--format", "json"];
    v.extend_from_slice(args);
    let out = run(&v);
    let doc: Document = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout));
    (out.code, doc, out.stdout)
}

#[test]
fn poset_report_lists_the_exterior_category() {
    let (code, doc, _) = json(&["poset-report", &data("fig1.poset")]);
    assert_eq!(code, 0);
    let Some(Body::PosetReport(b)) = doc.result else { panic!() };
    let chains: Vec<&str> = b.objects.iter().map(|o| o.chain.as_str()).collect();
    assert_eq!(chains, ["(0,A,B,1)", "(0,A,1)", "(0,B,1)", "(0,C,1)", "(0,1)"]);
    assert_eq!(b.arrows.len(), 5);
    assert_eq!(b.terminal.as_deref(), Some("(0,1)"));
    assert!(b.arrows.iter().all(|a| a.source_degree < a.target_degree));
}

#[test]
fn every_command_round_trips_its_json() {
    let fig1 = data("fig1.poset");
    let seg = data("segment.flow");
    let cases: Vec<Vec<&str>> = vec![
        vec!["poset-report", &fig1],
        vec!["validate", &fig1],
        vec!["validate", &seg],
        vec!["homology", &fig1],
        vec!["branch", &fig1],
        vec!["merge", &fig1],
        vec!["ball-check", &fig1],
        vec!["subdivide", "--flow", &seg, "--edge", "0", "1", "--ball", &fig1],
        vec!["check-invariance", "--flow", &seg, "--edge", "0", "1", "--ball", &fig1],
        vec!["lemma-probe", &fig1],
        vec!["homology", "--degree", "3", &fig1],
    ];
    for args in cases {
        let (_, doc, text) = json(&args);
        assert_eq!(doc.to_json(), text, "{args:?}");
    }
}

#[test]
fn check_invariance_on_the_segment_passes() {
    let (code, doc, _) = json(&["check-invariance", "--flow", &data("segment.flow"), "--edge", "0", "1", "--ball", &data("fig1.poset")]);
    assert_eq!(code, 0);
    assert_eq!(doc.status, Status::Pass);
    let Some(Body::CheckInvariance(b)) = doc.result else { panic!() };
    assert_eq!(b.cases[0].report.new_states.len(), 6);
}

#[test]
fn homology_at_the_cap_is_an_input_error() {
    let out = run(&["homology", "--degree", "3", &data("circle.flow")]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("out of range"));
    let out = run(&["--dim-cap", "4", "homology", "--degree", "3", &data("circle.flow")]);
    assert_eq!(out.code, 0);
}

#[test]
fn non_balls_fail_the_ball_check() {
    let out = run(&["ball-check", &data("circle.flow")]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("full directed ball: false"));
    let out = run(&["ball-check", &data("fork.flow")]);
    assert_eq!(out.code, 1);
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.flow");
    std::fs::write(&p, "flow f\nstate a b\ncell h : a -> b dim 1 faces d0=u d1=v\n").unwrap();
    let (code, doc, _) = json(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    let e = doc.error.unwrap();
    assert_eq!((e.line, e.column, e.kind.as_str()), (Some(3), Some(32), "dangling reference"));
}

#[test]
fn budget_comes_from_the_environment_or_flag() {
    let out = run(&["--budget", "1", "validate", &data("square.flow")]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("budget of 1"), "{}", out.stderr);
    let out = run(&["--budget", "0", "validate", &data("square.flow")]);
    assert_eq!(out.code, 2);
}

#[test]
fn dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ext.dot");
    let out = run(&["--dot", p.to_str().unwrap(), "poset-report", &data("fig1.poset")]);
    assert_eq!(out.code, 0);
    let dot = std::fs::read_to_string(&p).unwrap();
    assert!(dot.starts_with("digraph ext"));
    assert_eq!(dot.matches("->").count(), 5);
}

#[test]
fn random_invariance_mode() {
    let out = run(&["--seed", "9", "--dim-cap", "2", "check-invariance", "--random", "5"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.contains("passed 5 failed 0"));
}

#[test]
fn subdivide_reports_new_states() {
    let (code, doc, _) = json(&["subdivide", "--flow", &data("fork.flow"), "--edge", "0", "a", "--ball", &data("chain3.poset")]);
    assert_eq!(code, 0);
    let Some(Body::Subdivide(b)) = doc.result else { panic!() };
    assert_eq!(b.new_states, ["m"]);
    assert_eq!(b.flow.states.len(), 4);
}
