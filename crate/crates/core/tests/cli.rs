use frharm::experiments::Config;
use std::process::Command;

fn frharm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_frharm")).args(args).output().expect("binary runs")
}

#[test]
fn list_filters_by_keyword() {
    let out = frharm(&["list", "signorini"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = text.lines().skip(1).filter_map(|l| l.split_whitespace().next()).collect();
    assert_eq!(ids, ["E2", "E5"]);
    let all = String::from_utf8(frharm(&["list"]).stdout).unwrap();
    assert_eq!(all.lines().count(), 7);
}

#[test]
fn printed_defaults_parse_back() {
    let out = frharm(&["print-defaults"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(Config::from_toml(&text).unwrap().to_toml(), Config::default().to_toml());
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[e1]\nnot_a_key = 1\n").unwrap();
    let out = frharm(&["run", "E6", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(frharm(&["run", "E9"]).status.code(), Some(2));
}
