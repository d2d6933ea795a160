use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

use semistrata::selftest::generated_pair;
use semistrata::strata::examples::gl_pair;
use semistrata::strata::Stratum;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semistrata"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn stratum_file(dir: &Path, name: &str, s: &Stratum) -> PathBuf {
    let mut v = s.to_json();
    v["field"] = serde_json::to_value(s.field().spec()).unwrap();
    write(dir, name, &v)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn witt_table_q5() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", &json!({"p": 5}));
    let (code, out) = run(&["witt", "table", "--field", s(&f), "--epsilon", "1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["order"], 16);
    let (code, _) = run(&["witt", "table", "--field", s(&f), "--epsilon", "1", "--format", "text"]);
    assert_eq!(code, 0);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(run(&["witt", "table", "--field", s(&p)]).0, 2);
    assert_eq!(run(&["stratum", "analyze", s(&p)]).0, 2);
    let even = write(dir.path(), "even.json", &json!({"p": 2}));
    assert_eq!(run(&["witt", "table", "--field", s(&even)]).0, 2);
}

#[test]
fn unknown_profile_exits_2() {
    let (code, out) = run(&["selftest", "nightly"]);
    assert_eq!(code, 2);
    assert!(out.contains("unknown selftest profile"));
}

#[test]
fn gl_example_match_reports_swap_and_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = gl_pair(24).unwrap();
    let (pa, pb) = (stratum_file(dir.path(), "a.json", &a), stratum_file(dir.path(), "b.json", &b));
    let (code, out) = run(&["stratum", "match", s(&pa), s(&pb), "--seed", "7"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "condition fails");
    assert_eq!(v["seed"], 7);
    // blocks are listed by residual factor, so ζ is the identity on labels
    // while the underlying coordinate blocks are swapped
    assert_eq!(v["result"]["zeta"], json!([0, 1]));
    assert_eq!(v["result"]["dims"], json!([[2, 2], [2, 2]]));
    assert!(v["result"]["report"].as_str().unwrap().contains("(2,0) vs (1,1)"));
    let (code, out) = run(&["stratum", "conjugate", s(&pa), s(&pb)]);
    assert_eq!(code, 5, "{out}");
}

#[test]
fn conjugate_then_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = generated_pair(3, 24).unwrap();
    let (pa, pb) = (stratum_file(dir.path(), "a.json", &a), stratum_file(dir.path(), "b.json", &b));
    let (code, out) = run(&["stratum", "conjugate", s(&pa), s(&pb), "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
    let again = run(&["stratum", "conjugate", s(&pa), s(&pb), "--seed", "3"]).1;
    assert_eq!(out, again);
    let v: Value = serde_json::from_str(&out).unwrap();
    let cert = v["result"]["certificate"].clone();
    let pc = write(dir.path(), "c.json", &cert);
    assert_eq!(run(&["stratum", "verify", s(&pa), s(&pb), s(&pc)]).0, 0);

    // change one digit of one entry of g
    let mut bad = cert.clone();
    let entry = &mut bad["g"][0][0];
    *entry = match entry.clone() {
        Value::Number(n) => json!(n.as_i64().unwrap() + 1),
        Value::String(t) => {
            let mut c: Vec<char> = t.chars().collect();
            let i = c.iter().position(|ch| ch.is_ascii_digit()).unwrap();
            c[i] = if c[i] == '9' { '8' } else { ((c[i] as u8) + 1) as char };
            json!(c.into_iter().collect::<String>())
        }
        other => panic!("unexpected entry {other}"),
    };
    let pt = write(dir.path(), "t.json", &bad);
    let (code, out) = run(&["stratum", "verify", s(&pa), s(&pb), s(&pt)]);
    assert_eq!(code, 5, "{out}");
}

#[test]
fn analyze_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = gl_pair(24).unwrap();
    let pa = stratum_file(dir.path(), "a.json", &a);
    let (code, out) = run(&["stratum", "analyze", s(&pa)]);
    assert_eq!(code, 0, "{out}");
    let (code, out) = run(&["stratum", "split", s(&pa), "--format", "text"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verdict: \"ok\""));
}
