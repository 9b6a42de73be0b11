//! Running the binary on fixtures and comparing against goldens.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn mask_elapsed(text: &str) -> String {
    text.lines()
        .map(|l| if l.trim_start().starts_with("\"elapsed_ms\":") { "  \"elapsed_ms\": \"<masked>\"" } else { l })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Runs `rkhcm` with space-separated `args` from the fixtures directory.
pub fn run(args: &str) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rkhcm"))
        .args(args.split(' '))
        .current_dir(fixtures())
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

/// Golden file layout: the command line, exit code, masked stdout and stderr.
pub fn render(args: &str, code: i32, stdout: &str, stderr: &str) -> String {
    format!("$ rkhcm {args}\nexit: {code}\n--- stdout\n{}\n--- stderr\n{stderr}", mask_elapsed(stdout))
}

/// Reruns the command recorded in a golden file and returns the fresh rendering.
pub fn replay(golden: &str) -> Option<String> {
    let args = golden.lines().next()?.strip_prefix("$ rkhcm ")?;
    let (code, stdout, stderr) = run(args);
    Some(render(args, code, &stdout, &stderr))
}
