use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_succinct-pit"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_kinds_list_the_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(
        dir.path(),
        &[
            "pit",
            "--class",
            "dense:s=1",
            "--gen",
            "ssv:n=1,k=1",
            "--seed",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("comm-roabp"));
    let out = cli(dir.path(), &["gen", "--gen", "ks:n=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sssv"));
}

#[test]
fn pit_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "pit",
        "--class",
        "sparse:s=8",
        "--gen",
        "sssv:n=4,k=3",
        "--trials",
        "200",
        "--seed",
        "7",
        "--out",
        "r.json",
    ];
    assert_eq!(cli(dir.path(), &args).status.code(), Some(0));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["hits"], 200);
    assert_eq!(report["trials"], 200);
    assert_eq!(report["guarantee"], "guaranteed");
    assert!(report.get("wall_time_ms").is_none());

    let out = cli(
        dir.path(),
        &[
            "pit",
            "--class",
            "sparse:s=8",
            "--gen",
            "sssv:n=4,k=3",
            "--trials",
            "0",
            "--seed",
            "7",
        ],
    );
    assert_eq!(json(&out)["trials"], 0);
    let out = cli(
        dir.path(),
        &[
            "pit",
            "--class",
            "sparse:s=8",
            "--gen",
            "sssv:n=4,k=3",
            "--trials",
            "5",
            "--seed",
            "7",
            "--format",
            "csv",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("trial,outcome,hit,"));
}

#[test]
fn replay_reproduces_failures() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "pit",
        "--class",
        "sparse:s=1,deg=2",
        "--gen",
        "rc:n=1,r=0",
        "--trials",
        "20",
        "--seed",
        "3",
        "--out",
        "f.json",
    ];
    assert_eq!(cli(dir.path(), &args).status.code(), Some(0));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    let failures = report["failures"].as_array().unwrap().len();
    assert!(failures > 0);
    let out = cli(dir.path(), &["pit", "--replay", "f.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["replayed"], failures);
    assert_eq!(v["reproduced"], true);
}

#[test]
fn expand_reports_malformed_circuits() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"version\": 1, \"gates\": [").unwrap();
    let out = cli(dir.path(), &["expand", "--circuit", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    let out = cli(dir.path(), &["expand", "--circuit", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn expand_and_audit_read_generated_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(
        dir.path(),
        &["gen", "--gen", "ssv:n=2,k=1", "--seed", "1", "--witness"],
    );
    assert_eq!(out.status.code(), Some(0));
    let spec = json(&out);
    assert_eq!(spec["seed_arity"], 3);
    std::fs::write(dir.path().join("w.json"), spec["witness"].to_string()).unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        spec["witness"]["circuit"].to_string(),
    )
    .unwrap();

    let out = cli(dir.path(), &["expand", "--circuit", "c.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["degree"], 2);

    let out = cli(dir.path(), &["verify-succinct", "--witness", "w.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verified"], true);

    // a witness whose alpha was changed no longer matches its circuit
    let mut bad = spec["witness"].clone();
    bad["alpha"][0] = Value::from(bad["alpha"][0].as_u64().unwrap() ^ 1);
    std::fs::write(dir.path().join("bad.json"), bad.to_string()).unwrap();
    let out = cli(dir.path(), &["verify-succinct", "--witness", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verified"], false);

    let out = cli(
        dir.path(),
        &["verify-succinct", "--gen", "fs:n=2,w=2,d=2", "--seed", "4"],
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn audit_and_hitset() {
    let dir = tempfile::tempdir().unwrap();
    let f = succinct_pit::field::PrimeField::goldilocks();
    let arena = succinct_pit::circuit::coefficient_arena(4);
    let p = succinct_pit::poly::SparsePoly::parse(&f, &arena, "c1*c4 - c2*c3").unwrap();
    let mut b = succinct_pit::circuit::CircuitBuilder::new(&f, &arena);
    let out = b.sparse(&p);
    let circuit = b.finish(out).unwrap();
    std::fs::write(dir.path().join("minor.json"), circuit.to_json()).unwrap();

    let out = cli(
        dir.path(),
        &[
            "audit",
            "--circuit",
            "minor.json",
            "--gen",
            "ssv:n=2,k=1",
            "--samples",
            "30",
            "--seed",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["audit"]["outcome"], "is-distinguisher");
    let out = cli(
        dir.path(),
        &[
            "audit",
            "--circuit",
            "minor.json",
            "--gen",
            "ssv:n=2,k=2",
            "--samples",
            "30",
            "--seed",
            "1",
        ],
    );
    assert_eq!(json(&out)["audit"]["outcome"], "hit-witness");

    let out = cli(
        dir.path(),
        &[
            "hitset",
            "--gen",
            "ssv:n=1,k=1",
            "--delta",
            "1",
            "--field-prime",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["size"], 9);
    let out = cli(
        dir.path(),
        &[
            "hitset",
            "--gen",
            "ssv:n=1,k=1",
            "--delta",
            "3",
            "--field-prime",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field too small"));
}

#[test]
fn asss_without_override_explains_itself() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["gen", "--gen", "asss:n=3,k=1,D=3,s=32"]);
    assert_eq!(out.status.code(), Some(0));
    let spec = json(&out);
    assert_eq!(spec["R"], "281474976710656");
    assert_eq!(spec["materialized"], false);
    let out = cli(
        dir.path(),
        &[
            "gen",
            "--gen",
            "asss:n=3,k=1,D=3,s=32",
            "--seed",
            "1",
            "--images",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("override"));
}
