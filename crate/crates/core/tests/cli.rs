//! End-to-end runs of the `mmnet` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn mmnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmnet")).args(args).env_remove("MMNET_BUDGET_CELLS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mmnet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn capacity_of_the_line_network() {
    let o = mmnet(&["--fixture", "line3", "--command", "capacity"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(stdout(&o).contains("0.531004406411"), "{v}");
}

#[test]
fn region_verdicts_follow_the_rates() {
    let member = mmnet(&["--fixture", "line3", "--command", "region", "--region", "prime", "--rates", "0.52,0,0"]);
    assert_eq!(member.status.code(), Some(0));
    assert!(stdout(&member).contains("\"member\""));
    let outside = mmnet(&["--fixture", "line3", "--command", "region", "--region", "prime", "--rates", "0.54,0,0"]);
    assert_eq!(outside.status.code(), Some(0));
    assert!(stdout(&outside).contains("\"non-member\""));
}

#[test]
fn output_is_reproducible() {
    let args = ["--fixture", "bsc2", "--command", "tilt", "--lambda", "2", "--n", "2"];
    let (a, b) = (mmnet(&args), mmnet(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_passes_on_a_fixture() {
    let o = mmnet(&["--fixture", "bsc2", "--command", "verify", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_writes_csv() {
    let o = mmnet(&["--fixture", "bec2", "--command", "simulate", "--n-grid", "4", "--seed-count", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("rate_bits,n,method"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn malformed_network_is_a_usage_error() {
    let path = scratch("bad.json", "{ \"nodes\": 2,\n  \"sources\": [1],, }");
    let o = mmnet(&["--network", path.to_str().unwrap(), "--command", "capacity"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn missing_network_is_a_usage_error() {
    assert_eq!(mmnet(&["--command", "capacity"]).status.code(), Some(2));
    assert_eq!(mmnet(&["--fixture", "nope", "--command", "capacity"]).status.code(), Some(2));
}

#[test]
fn oversized_enumeration_exits_with_budget_code() {
    let o = mmnet(&["--fixture", "bsc2", "--command", "tilt", "--n", "12", "--budget-cells", "100"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("mmnet-cli-out-{}.json", std::process::id()));
    let o = mmnet(&["--fixture", "line3", "--command", "capacity", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    serde_json::from_str::<serde_json::Value>(&text).unwrap();
    std::fs::remove_file(path).unwrap();
}
