use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_geoclass"));
    c.env_remove("GEOCLASS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

const UNSOLVABLE_E: &str = "3\n1 1 2\n0 2 1\n0 0 1\n";
const UNSOLVABLE_F: &str = "3\n1 1 0\n0 2 1\n0 0 1\n";

#[test]
fn invariants_of_a_chain() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "a.txt", "3\n2 1 0\n0 1 1\n0 0 1\n");
    let o = run(&["invariants", s(&g), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["result"]["tau"], serde_json::json!([1, 0, 0]));
    assert_eq!(v["result"]["hasse"], serde_json::json!([[0, 1], [1, 2]]));
    assert_eq!(v["result"]["condition_h"], true);
    assert_eq!(v["config"]["command"], "invariants");
}

#[test]
fn invariants_of_a_sink() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "sink.txt", "1\n0\n");
    let v = json(&run(&["invariants", s(&g), "--format", "json"]));
    assert_eq!(v["result"]["tau"], serde_json::json!([-1]));
    assert_eq!(v["result"]["k0"]["free_rank"], 1);
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.txt", "2\n1 1\n1 x\n");
    let o = run(&["invariants", s(&g)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn decide_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let e = write(dir.path(), "e.txt", UNSOLVABLE_E);
    let f = write(dir.path(), "f.txt", UNSOLVABLE_F);
    assert_eq!(run(&["decide", s(&e), s(&e)]).status.code(), Some(0));

    let o = run(&["decide", s(&e), s(&f), "--relation", "ce", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["result"]["verdict"], "No");
    assert!(v["result"]["distinguisher"]["invariant"].as_str().unwrap().contains("no GL_P"));

    let o = run(&["decide", s(&e), s(&f), "--relation", "me"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no SL_P"), "{}", stdout(&o));

    let o = run(&["decide", s(&e), s(&f), "--relation", "stable", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["rule"], "lookup");

    let o = run(&["decide", s(&e), s(&f), "--relation", "stable", "--no-lookup"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn decide_json_has_a_verified_witness() {
    let dir = tempfile::tempdir().unwrap();
    let e = write(dir.path(), "e.txt", UNSOLVABLE_E);
    let p = write(dir.path(), "p.txt", "3\n1 0 0\n2 1 1\n1 0 2\n");
    let v = json(&run(&["decide", s(&e), s(&p), "--format", "json"]));
    assert_eq!(v["result"]["verdict"], "Yes");
    assert!(v["result"]["witness"]["u"].is_array());
}

#[test]
fn atlas_counts_as_csv() {
    let o = run(&["atlas", "--max-vertices", "4", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let table: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).take(5).collect();
    assert_eq!(table, ["M,graphs,inner,outer", "1,2,2,2", "2,10,8,8", "3,104,35,35", "4,3044,218,199"]);
    assert!(out.contains("relation,M,class,size,k0,k_temperatures,representative"));
}

#[test]
fn atlas_needs_long_for_five_vertices() {
    let o = run(&["atlas", "--max-vertices", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--long"));
}

#[test]
fn json_is_independent_of_thread_count() {
    let one =
        bin().args(["atlas", "--max-vertices", "4", "--format", "json"]).env("GEOCLASS_THREADS", "1").output().unwrap();
    let four = run(&["--threads", "4", "atlas", "--max-vertices", "4", "--format", "json"]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let text = bin().args(["atlas", "--max-vertices", "1"]).env("GEOCLASS_THREADS", "2").output().unwrap();
    assert!(stdout(&text).contains("threads=2"));
}

#[test]
fn moves_replay_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "2\n1 1\n1 1\n");
    let script = write(dir.path(), "s.txt", "# splice then relabel\nC 0\nPermute 3 2 1 0\n");
    let o = run(&["moves", s(&g), s(&script), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let steps = v["result"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    assert!(steps.iter().all(|st| st["tau"] == serde_json::json!([1])));
    assert_eq!(steps[2]["vertices"], 4);

    let empty = write(dir.path(), "empty.txt", "");
    let o = run(&["moves", s(&g), s(&empty)]);
    assert!(stdout(&o).ends_with("2\n1 1\n1 1\n"));
}

#[test]
fn illegal_move_names_its_clause() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "2\n1 0\n0 1\n");
    let script = write(dir.path(), "s.txt", "R 0\n");
    let o = run(&["moves", s(&g), s(&script)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("r(f) ≠ w"), "{}", stderr(&o));
}

#[test]
fn lens_text_output_is_a_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["lens", "--n", "4", "--r", "3", "--m", "1,1,1,1"]);
    assert!(o.status.success());
    let g = write(dir.path(), "lens.txt", &stdout(&o));
    let v = json(&run(&["invariants", s(&g), "--format", "json"]));
    assert_eq!(v["result"]["k0_torsion_order"], "27");
}

#[test]
fn lens_iso_and_grid() {
    let o = run(&["lens-iso", "--r", "5", "--m", "1,1,1,1", "--other", "1,2,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("stable isomorphism"));

    let o = run(&["lens", "--grid", "--n", "4", "--r", "3", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "m1,m2,m3,m4,class");
    assert_eq!(rows.len(), 1 + 16);
}

#[test]
fn usage_errors_do_not_look_like_verdicts() {
    let o = run(&["lens-iso"]);
    assert_eq!(o.status.code(), Some(64));
    let o = run(&["invariants", "--format", "csv", "/nonexistent"]);
    assert_eq!(o.status.code(), Some(3));
}
