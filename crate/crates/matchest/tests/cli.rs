//! End-to-end checks of the command-line harness: subcommand smoke tests,
//! file outputs, exit codes, and byte-identical reruns for identical argv.

use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_matchest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn matchest")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn version_prints_schema() {
    let out = run(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("schema 1"), "{text}");
}

#[test]
fn generate_writes_graph_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("inst.graph");
    let out = run(&[
        "generate",
        "--n",
        "64",
        "--delta",
        "0.3333333333333333",
        "--world",
        "yes",
        "--seed",
        "7",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let graph_text = fs::read_to_string(&out_path).unwrap();
    assert!(
        graph_text.starts_with("96 96\n"),
        "header: {}",
        &graph_text[..16]
    );
    let truth = fs::read_to_string(dir.path().join("inst.graph.truth")).unwrap();
    assert!(truth.starts_with("world YES\n"));
    // 2 * 96 class characters on the third line.
    assert_eq!(truth.lines().nth(2).unwrap().len(), 192);
}

#[test]
fn generate_rejects_invalid_params_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bad.graph");
    let out = run(&[
        "generate",
        "--n",
        "65",
        "--delta",
        "0.3333333333333333",
        "--world",
        "yes",
        "--seed",
        "7",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let text = stderr(&out);
    assert!(text.contains("nearest valid n"), "{text}");
    assert!(text.contains("64"), "{text}");
    assert!(!out_path.exists());
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let out = run(&["estimate", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_emits_requested_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for csv in [&csv_a, &csv_b] {
        let out = run(&[
            "estimate",
            "--n",
            "256",
            "--delta",
            "0.5",
            "--delta-instance",
            "0.25",
            "--world",
            "yes",
            "--trials",
            "5",
            "--seed",
            "7",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = fs::read(&csv_a).unwrap();
    let b = fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "identical argv must produce byte-identical CSV");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 6, "header plus 5 rows:\n{text}");
    assert!(text.starts_with("seed,estimate,exact_mu,charged_queries\n"));
}

#[test]
fn estimate_reads_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.graph");
    let out = run(&[
        "generate",
        "--n",
        "256",
        "--delta",
        "0.25",
        "--world",
        "no",
        "--seed",
        "3",
        "--out",
        graph.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = dir.path().join("est.csv");
    let out = run(&[
        "estimate",
        "--graph",
        graph.to_str().unwrap(),
        "--n",
        "256",
        "--delta",
        "0.5",
        "--trials",
        "3",
        "--seed",
        "11",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn distinguish_reports_per_world_rates() {
    let out = run(&[
        "distinguish",
        "--method",
        "birthday",
        "--n",
        "256",
        "--delta",
        "0.25",
        "--trials",
        "10",
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(
        err.contains("YES:") && err.contains("NO:") && err.contains("Wilson"),
        "{err}"
    );
    let rows = String::from_utf8_lossy(&out.stdout);
    assert!(rows.starts_with("trial,world,verdict,correct,charged_queries,evidence\n"));
    assert_eq!(rows.lines().count(), 11);
}

#[test]
fn distinguish_third_root_rejects_wrong_delta() {
    let out = run(&[
        "distinguish",
        "--method",
        "third-root",
        "--n",
        "256",
        "--delta",
        "0.25",
        "--trials",
        "2",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("delta = 1/3"), "{}", stderr(&out));
}

#[test]
fn probe_executes_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("walk.plan");
    fs::write(&plan, "root random delta_bound 16\n1 1\n2 1\n3 1\n").unwrap();
    let csv = dir.path().join("transcript.csv");
    let out = run(&[
        "probe",
        "--plan",
        plan.to_str().unwrap(),
        "--n",
        "64",
        "--delta",
        "0.3333333333333333",
        "--world",
        "mixed",
        "--seed",
        "9",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("step,parent_slot,position,result\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(stderr(&out).contains("charged 3 queries"));
}

#[test]
fn probe_rejects_malformed_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("bad.plan");
    // Parent slot 3 is ahead of step 1.
    fs::write(&plan, "root 0 delta_bound 16\n3 1\n").unwrap();
    let out = run(&[
        "probe",
        "--plan",
        plan.to_str().unwrap(),
        "--n",
        "64",
        "--delta",
        "0.3333333333333333",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("parent slot"), "{}", stderr(&out));
}

#[test]
fn experiment_csv_is_reproducible_with_fixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for csv in [&csv_a, &csv_b] {
        let out = run(&[
            "experiment",
            "--n",
            "256",
            "--delta",
            "0.25",
            "--epsilon",
            "0.05",
            "--trials",
            "8",
            "--seed",
            "21",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stderr(&out).contains("star_ok_rate"));
    }
    let a = fs::read(&csv_a).unwrap();
    assert_eq!(a, fs::read(&csv_b).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "trial,world,n,delta,epsilon,q,obs_core_edges,happy,star_ok,multi_edge_viol,\
         shared_petal_viol,happy_endpoint_viol,max_d_indeg,mu_exact,verdict,verdict_correct\n"
    ));
    assert_eq!(text.lines().count(), 9);
    // The flat plan charges exactly q = n^(1+eps) probes per trial.
    let q: f64 = 256f64.powf(1.05);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[5], format!("{}", q.round() as u64));
        assert!(!fields[13].is_empty(), "mu_exact expected by default");
    }
}

#[test]
fn experiment_tree_model_requires_plan() {
    let out = run(&[
        "experiment",
        "--n",
        "256",
        "--delta",
        "0.25",
        "--trials",
        "2",
        "--model",
        "tree",
        "--seed",
        "21",
        "--csv",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--plan"), "{}", stderr(&out));
}

#[test]
fn experiment_tree_model_runs_with_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("chain.plan");
    let steps: String = (1..=32).map(|i| format!("{i} 1\n")).collect();
    fs::write(&plan, format!("root random delta_bound 512\n{steps}")).unwrap();
    let csv = dir.path().join("tree.csv");
    let out = run(&[
        "experiment",
        "--n",
        "256",
        "--delta",
        "0.25",
        "--trials",
        "4",
        "--model",
        "tree",
        "--plan",
        plan.to_str().unwrap(),
        "--no-mu",
        "--seed",
        "13",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[5], "32");
        assert!(fields[13].is_empty(), "mu_exact suppressed by --no-mu");
    }
}
