#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn powerkg(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_powerkg")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

/// Args for `build` on the station fixture, minus `--out`.
pub fn station_build_args(corpus: usize) -> Vec<String> {
    let f = fixtures();
    let mut args = vec![
        "build".to_string(),
        "--common".into(),
        s(&f.join("station/common.tsv")),
        "--power".into(),
        s(&f.join("station/power.tsv")),
        "--train".into(),
        s(&f.join("hmm/tagged.txt")),
        "--structured".into(),
        s(&f.join("station/station.toml")),
    ];
    if corpus > 0 {
        args.push("--corpus".into());
        for _ in 0..corpus {
            args.push(s(&f.join("station/records.txt")));
        }
    }
    args
}

/// Builds the station graph with the binary into `dir`.
pub fn build_station(dir: &Path, name: &str, corpus: usize) -> PathBuf {
    let out = dir.join(name);
    let mut args = station_build_args(corpus);
    args.push("--out".into());
    args.push(s(&out));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let r = powerkg(&refs);
    assert_eq!(r.code, 0, "build failed: {}", r.stderr);
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
