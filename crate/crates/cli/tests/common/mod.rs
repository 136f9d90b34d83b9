#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixtures() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(fixture(""))
        .expect("fixture directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    out
}

pub fn finob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finob")).args(args).output().expect("binary runs")
}

pub struct Case {
    pub args: Vec<String>,
    pub exit: i32,
}

fn case(command: &str, file: &str, name: &str, extra: &[&str], exit: i32) -> Case {
    let mut args = vec![command.to_string(), "--input".into(), fixture(file).display().to_string()];
    if !name.is_empty() {
        args.extend(["--name".to_string(), name.to_string()]);
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    Case { args, exit }
}

/// Every command on the shipped fixtures, with the expected exit status.
pub fn cases() -> Vec<Case> {
    vec![
        case("verify", "rp2.json", "X", &[], 0),
        case("verify", "rp2.json", "e", &[], 0),
        case("verify", "rp2.json", "triple", &[], 0),
        case("verify", "ideal.json", "dom1", &[], 0),
        case("verify", "c2.json", "w", &[], 0),
        case("verify", "torus.json", "swap", &[], 0),
        case("verify", "bad.json", "brokenMap", &[], 2),
        case("verify", "bad.json", "notIdem", &[], 2),
        case("verify", "bad.json", "missing", &[], 1),
        case("verify", "rp2.json", "", &[], 1),
        case("homology", "rp2.json", "X", &[], 0),
        case("homology", "torus.json", "T.vu", &[], 1),
        case("instant", "ideal.json", "dom1", &[], 0),
        case("instant", "c2.json", "dom", &[], 0),
        case("obstruction", "ideal.json", "dom1", &[], 0),
        case("obstruction", "ideal.json", "dom2", &["--class-bound", "1"], 0),
        case("obstruction", "c2.json", "dom", &["--witness", "w"], 0),
        case("trim", "rp2.json", "Acyclic", &[], 0),
        case("trim", "bad.json", "Z2", &[], 2),
        case("free-replace", "rp2.json", "X", &[], 0),
        case("free-replace", "c2.json", "P0", &["--witness", "w"], 0),
        case("laurent-resolve", "rp2.json", "e", &["--window", "2"], 0),
        case("laurent-resolve", "c2.json", "e", &[], 0),
        case("laurent-resolve", "bad.json", "notIdem", &[], 1),
        case("swindle", "rp2.json", "e", &["--degree", "5"], 0),
        case("torus", "rp2.json", "triple", &[], 0),
        case("torus", "torus.json", "vu", &["--against", "uv", "--witness", "swap"], 0),
        case("torus", "torus.json", "vu", &["--against", "vu", "--witness", "swap"], 2),
        case("torus", "torus.json", "vu", &["--against", "uv"], 1),
        case("realize", "ideal.json", "I", &["--degree", "1"], 0),
        case("realize", "rp2.json", "e", &["--degree", "-1"], 1),
        case("verify", "not-a-file.json", "X", &[], 1),
    ]
}

pub fn exit_code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}
