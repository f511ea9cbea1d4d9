use std::path::PathBuf;
use std::process::{Command, Output};

use topocode::crypto_protocols::{simulate, ProtocolId};
use topocode::graph_core::Graph;
use topocode::tables::{table1, table2};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_topocode"));
    c.env_remove("TOPOCODE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).expect("golden file")
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("topocode-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn tables_match_golden_and_library() {
    for (which, t) in [("table1", table1()), ("table2", table2())] {
        let o = run(&["tables", "reproduce", "--which", which]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), golden(&format!("{which}.txt")));
        assert_eq!(stdout(&o), t.render());
        let notes = String::from_utf8(o.stderr).unwrap();
        assert_eq!(notes.lines().count(), t.notes.len());
    }
    let o = run(&["tables", "reproduce", "--which", "table1"]);
    assert!(String::from_utf8(o.stderr).unwrap().contains("erratum"));
}

#[test]
fn string_add() {
    let o = run(&["string", "add", "1013412", "2143101", "--ring", "mod10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3156513\n");
    let o = run(&["string", "sub", "1013412", "2143101"]);
    assert_eq!(stdout(&o), "9970311\n");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["string", "add", "12"]).status.code(), Some(2));
    assert_eq!(run(&["proto", "run", "--id", "nope", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&["string", "add", "12", "123"]).status.code(), Some(1));
    assert_eq!(run(&["string", "add", "1a", "12"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn seed_is_mandatory_with_env_fallback() {
    let o = run(&["proto", "run", "--id", "self-cert-1"]);
    assert_eq!(o.status.code(), Some(2));
    let with_env = bin().args(["proto", "run", "--id", "self-cert-1"]).env("TOPOCODE_SEED", "7").output().unwrap();
    let with_flag = run(&["proto", "run", "--id", "self-cert-1", "--seed", "7"]);
    assert!(with_env.status.success());
    assert_eq!(stdout(&with_env), stdout(&with_flag));
}

#[test]
fn proto_run_is_deterministic_and_matches_library() {
    let a = stdout(&run(&["proto", "run", "--id", "self-cert-1", "--seed", "7"]));
    let b = stdout(&run(&["proto", "run", "--id", "self-cert-1", "--seed", "7"]));
    assert_eq!(a, b);
    let lib = simulate(ProtocolId::SelfCert1, 7, b"topological coding").unwrap();
    assert_eq!(a, lib.transcript.to_json_lines());
    let o = run(&["proto", "run", "--id", "tkpdra", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().last().unwrap().contains("pass seed=3"));
}

#[test]
fn proto_replay_and_diff() {
    let p = tmp("t.jsonl", &stdout(&run(&["proto", "run", "--id", "plan-1", "--seed", "4"])));
    let o = run(&["proto", "replay", "--transcript", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = tmp("u.jsonl", &stdout(&run(&["proto", "run", "--id", "plan-1", "--seed", "5"])));
    let o = run(&["proto", "diff", "--a", p.to_str().unwrap(), "--b", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["proto", "diff", "--a", p.to_str().unwrap(), "--b", p.to_str().unwrap()]);
    assert_eq!(stdout(&o), "identical\n");
}

#[test]
fn proto_corruption_reports_failing_step() {
    let o = run(&["proto", "run", "--id", "tkpdra", "--seed", "3", "--corrupt", "bob.g.pub"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("TKPDRA-4"));
}

#[test]
fn label_search_finds_graceful() {
    let g = tmp("p5.json", &serde_json::to_string(&Graph::path(5)).unwrap());
    let o = run(&["label", "search", "--graph", g.to_str().unwrap(), "--spec", "graceful;labeling"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "found");
    let c = tmp("c.json", &v["coloring"].to_string());
    let o = run(&["label", "verify", "--graph", c.to_str().unwrap(), "--spec", "graceful;labeling"]);
    assert!(o.status.success());
}

#[test]
fn label_search_reports_exhausted_and_timeout() {
    // K_5 has no graceful labeling.
    let g = tmp("k5.json", &serde_json::to_string(&Graph::complete(5)).unwrap());
    let o = run(&["label", "search", "--graph", g.to_str().unwrap(), "--spec", "graceful;labeling"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"exhausted\""));
    // C_5 ∪ C_5 ∪ C_4: fourteen edges, far too many branches to finish quickly.
    let cyc = |o: usize, n: usize| (0..n).map(move |i| (o + i, o + (i + 1) % n));
    let edges = cyc(0, 5).chain(cyc(5, 5)).chain(cyc(10, 4)).collect();
    let big = tmp("c554.json", &serde_json::to_string(&Graph::new(14, edges).unwrap()).unwrap());
    let o = run(&[
        "label",
        "search",
        "--graph",
        big.to_str().unwrap(),
        "--spec",
        "graceful;labeling",
        "--timeout",
        "0.2",
        "--budget",
        "1000m",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"timeout\""), "{}", stdout(&o));
}

#[test]
fn graph_count_and_topcode() {
    let o = run(&["graph", "count", "--complete", "5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 125);
    assert_eq!(stdout(&run(&["graph", "trees", "--n", "9"])), "47\n");
    let m = tmp(
        "g.json",
        r#"{"q":5,"X":[1,3,5,4,4],"E":[3,2,1,4,4],"Y":[4,5,6,4,4]}"#,
    );
    let o = run(&["topcode", "string", "--matrix", m.to_str().unwrap()]);
    assert_eq!(stdout(&o), "135443214445644\n");
}

#[test]
fn pronbs_and_group() {
    let o = run(&["topcode", "pronbs", "--string", "123321", "--max-q", "2"]);
    assert!(o.status.success());
    let base = tmp("h.json", &serde_json::to_string(&topocode::topcode::h4147()).unwrap());
    let o = run(&["group", "laws", "--base", base.to_str().unwrap(), "--m", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let host = tmp("p2.json", &serde_json::to_string(&Graph::path(2)).unwrap());
    let a = run(&["group", "join", "--host", host.to_str().unwrap(), "--m", "7", "--seed", "2"]);
    assert!(a.status.success());
    let t = tmp("join.json", &stdout(&a));
    assert!(run(&["group", "replay", "--transcript", t.to_str().unwrap()]).status.success());
    assert_eq!(run(&["group", "join", "--host", host.to_str().unwrap(), "--m", "7"]).status.code(), Some(2));
}
