use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn qgw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgw")).args(args).env_remove("QGW_CACHE").output().unwrap()
}

fn qgw_env(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgw")).args(args).env("QGW_CACHE", cache).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn jk_tables() {
    let text = stdout(&qgw(&["jk", "--r", "1", "--d", "1", "--order", "2", "--class", "e1"]));
    assert_eq!(text, "d\tk\tvalue\n1\t0\t1\n1\t1\t2\n1\t2\t3\n");
    let csv = stdout(&qgw(&["jk", "--r", "1", "--d", "2", "--order", "2", "--class", "e1", "--format", "csv"]));
    assert_eq!(csv, "key,value\n(e1) @ d=2,1\n(L^1*e1) @ d=2,2\n(L^2*e1) @ d=2,5\n");
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&qgw(&["jk", "--d", "1", "--order", "0", "--class", "e0", "--format", "json"])))
            .unwrap();
    assert_eq!(json["rows"][0]["value"], "1");
    // a class given as an expression; H - 1 is e1
    let text = stdout(&qgw(&["jk", "--d", "1", "--class", "H - 1", "--format", "csv"]));
    assert!(text.ends_with("(L^2*H - 1) @ d=1,3\n"), "{text}");
}

#[test]
fn qk_values() {
    assert_eq!(stdout(&qgw(&["qk", "(e1, e1) @ d=2"])), "1\n");
    assert_eq!(stdout(&qgw(&["qk", "(L^2*e1, e1) @ d=1"])), "4\n");
    assert_eq!(stdout(&qgw(&["qk", "(e0, e0, e0) @ d=1"])), "1\n");
    assert_eq!(stdout(&qgw(&["qk", "(e1, e1) @ d=1", "--convention", "geometric"])), "1\n");
    let csv = stdout(&qgw(&["qk", "(L^2*e1,e1)@d=1", "--format", "csv"]));
    assert_eq!(csv, "key,value\n\"(L^2*e1, e1) @ d=1\",4\n");
}

#[test]
fn qk_trace() {
    let text = stdout(&qgw(&["qk", "(e1, e1) @ d=2", "--trace"]));
    assert!(text.starts_with("1\n"));
    assert!(text.contains("BOUNDARY-SPLIT [(e0, N) @ d=1 -- (L^2*e1, N) @ d=1] = 6"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&qgw(&["qk", "(e1, e1) @ d=2", "--trace", "--format", "json"]))).unwrap();
    let steps = json["trace"][0]["steps"].as_array().unwrap();
    assert_eq!(steps.last().unwrap()["rule"], "TRADE-H");
    assert_eq!(steps.last().unwrap()["subject"], "(e1, e1) @ d=2");
}

#[test]
fn gw_tables_and_values() {
    assert_eq!(stdout(&qgw(&["gw", "--p2-table", "3"])), "d\tN_d\n1\t1\n2\t1\n3\t12\n");
    assert_eq!(stdout(&qgw(&["gw", "--p2-table", "1", "--engine", "closed"])), "d\tN_d\n1\t1\n");
    assert_eq!(stdout(&qgw(&["gw", "(H^2,H^2) @ d=1", "--engine", "reduction"])), "1\n");
    assert_eq!(stdout(&qgw(&["gw", "(H^2,H^2,H^2,H^2,H^2) @ d=2", "--engine", "closed"])), "1\n");
    assert_eq!(stdout(&qgw(&["gw", "(H, H^2, H^2) @ d=1"])), "1\n");
    // wrong dimension
    assert_eq!(stdout(&qgw(&["gw", "(H, H^2) @ d=1"])), "0\n");
    let csv = stdout(&qgw(&["gw", "--p2-table", "2", "--format", "csv"]));
    assert_eq!(csv, "key,value\n\"(H^2, H^2) @ d=1\",1\n\"(H^2, H^2, H^2, H^2, H^2) @ d=2\",1\n");
}

#[test]
fn gw_oracle_files() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = dir.path().join("p2.json");
    // degree-one descendants of P^2
    fs::write(&oracle, r#"{"r": 2, "entries": [{"d": 1, "l": 3, "k": 0, "value": "6"}, {"d": 1, "l": 1, "k": 2, "value": "1"}, {"d": 1, "l": 2, "k": 1, "value": "-3"}]}"#).unwrap();
    let o = oracle.to_str().unwrap();
    assert_eq!(stdout(&qgw(&["gw", "(L^1*H^2) @ d=1", "--oracle", o])), "1\n");
    let missing = qgw(&["gw", "(L^1*H^2) @ d=1"]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("d=1"));
    fs::write(&oracle, r#"{"entries": []}"#).unwrap();
    assert_eq!(code(&qgw(&["gw", "(L^1*H^2) @ d=1", "--oracle", o])), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&qgw(&["qk", "(e1, ) @ d=1"])), 1);
    assert_eq!(code(&qgw(&["qk", "(e1, e1) @ d=0"])), 1);
    assert_eq!(code(&qgw(&["qk", "(e2) @ d=1"])), 1);
    assert_eq!(code(&qgw(&["jk", "--d", "0", "--class", "e1"])), 1);
    assert_eq!(code(&qgw(&["gw"])), 1);
    assert_eq!(code(&qgw(&["gw", "(H, H) @ d=1", "--engine", "closed"])), 1);
    assert_eq!(code(&qgw(&["frobnicate"])), 1);
    assert_eq!(code(&qgw(&["--help"])), 0);
    let err = qgw(&["qk", "(e1, e1 @ d=1"]);
    assert!(String::from_utf8_lossy(&err.stderr).contains("byte 8"), "{}", String::from_utf8_lossy(&err.stderr));
}

#[test]
fn cache_round_trip_and_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("qk.json");
    let c = cache.to_str().unwrap();
    let cold = stdout(&qgw(&["qk", "(e1, e1) @ d=2", "--cache", c]));
    let first = fs::read(&cache).unwrap();
    let warm = stdout(&qgw(&["qk", "(e1, e1) @ d=2", "--cache", c]));
    assert_eq!(cold, warm);
    assert_eq!(fs::read(&cache).unwrap(), first);
    stdout(&qgw_env(&["qk", "(L^2*e1, e1) @ d=1"], &cache));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&cache).unwrap()).unwrap();
    assert_eq!(json["version"], 1);
    assert_eq!(json["theory"], "qk:r=1:standard");
    assert_eq!(json["entries"]["(e1, e1) @ d=2"], "1");
    assert_eq!(json["entries"]["(L^2*e1, e1) @ d=1"], "4");
    assert_eq!(stdout(&qgw(&["cache", "verify", "--cache", c])), "verified 2 entries\n");
    let shown = stdout(&qgw(&["cache", "show", "--cache", c, "--format", "csv"]));
    assert_eq!(shown, "key,value\n\"(L^2*e1, e1) @ d=1\",4\n\"(e1, e1) @ d=2\",1\n");
    // --no-cache leaves the file alone
    stdout(&qgw(&["qk", "(e0, e0, e0) @ d=1", "--cache", c, "--no-cache"]));
    assert_eq!(shown, stdout(&qgw(&["cache", "show", "--cache", c, "--format", "csv"])));

    // a tampered value is a conflict on recompute
    let tampered =
        fs::read_to_string(&cache).unwrap().replace("\"(e1, e1) @ d=2\": \"1\"", "\"(e1, e1) @ d=2\": \"2/1\"");
    fs::write(&cache, tampered).unwrap();
    let o = qgw(&["qk", "(e1, e1) @ d=2", "--cache", c]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("conflict"));
    assert_eq!(code(&qgw(&["cache", "verify", "--cache", c])), 3);

    // a cache for the other theory is refused, as is garbage
    assert_eq!(code(&qgw(&["gw", "(H^2,H^2) @ d=1", "--cache", c])), 1);
    fs::write(&cache, "not json").unwrap();
    assert_eq!(code(&qgw(&["qk", "(e1, e1) @ d=2", "--cache", c])), 1);
}

#[test]
fn parallel_writers_keep_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("gw.json");
    let exprs: Vec<String> = (1..=6).map(|d| format!("({}) @ d={d}", vec!["H^2"; 3 * d - 1].join(", "))).collect();
    let children: Vec<_> = exprs
        .iter()
        .map(|e| {
            Command::new(env!("CARGO_BIN_EXE_qgw"))
                .args(["gw", e.as_str(), "--cache", cache.to_str().unwrap()])
                .stdout(Stdio::null())
                .spawn()
                .unwrap()
        })
        .collect();
    for mut c in children {
        assert!(c.wait().unwrap().success());
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&cache).unwrap()).unwrap();
    assert_eq!(json["entries"].as_object().unwrap().len(), 6);
    assert_eq!(stdout(&qgw(&["cache", "verify", "--cache", cache.to_str().unwrap()])), "verified 6 entries\n");
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["gw", "--p2-table", "6", "--format", "json"][..],
        &["qk", "(e1, e1, e1) @ d=2", "--trace", "--format", "json"][..],
        &["jk", "--r", "3", "--d", "2", "--order", "6", "--class", "1/3*e2 - H^2"][..],
    ] {
        assert_eq!(stdout(&qgw(args)), stdout(&qgw(args)));
    }
}
