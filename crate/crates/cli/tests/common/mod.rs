//! Bundled example invocations shared by the golden and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// `(golden name, arguments)`; paths are relative to the assets directory.
pub const EXAMPLES: &[(&str, &[&str])] = &[
    ("capacity-mix", &["capacity", "mix.json"]),
    ("capacity-mmix", &["capacity", "mmix.json", "--param", "mu=1.2"]),
    ("capacity-toy", &["capacity", "toy.json"]),
    ("capacity-single", &["capacity", "single.json"]),
    ("capacity-family", &["capacity", "family.json"]),
    ("distribution-toy", &["distribution", "toy.json"]),
    ("distribution-single", &["distribution", "single.json"]),
    ("distribution-mix", &["distribution", "mix.json"]),
    ("efficiency-alternating", &["efficiency", "pair.json", "alternating.trace", "--order", "1"]),
    ("efficiency-constant", &["efficiency", "pair.json", "constant.trace", "--order", "2"]),
    ("efficiency-optimal", &["efficiency", "three.json", "three-optimal.trace"]),
    ("efficiency-family", &["efficiency", "family.json", "family.trace", "--order", "2"]),
    ("count-toy", &["count", "toy.json", "--max-time", "64"]),
    ("count-single", &["count", "single.json", "--max-time", "5"]),
    ("count-family", &["count", "family.json", "--max-time", "12"]),
    ("optimize-paper", &["optimize-memory", "paper-memory-example.json"]),
    ("optimize-small-vertex", &["optimize-memory", "small-memory.json"]),
    ("optimize-small-grid", &["optimize-memory", "small-memory.json", "--mode", "grid", "--step", "1"]),
];

pub fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn run_json(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compcap"))
        .args(args)
        .arg("--json")
        .current_dir(assets())
        .output()
        .expect("spawn compcap")
}
