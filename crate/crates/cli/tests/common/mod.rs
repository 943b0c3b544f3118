#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn toy(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy").join(name)
}

pub fn prosync<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_prosync"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn transfer_args(extra: &[&str]) -> Vec<String> {
    let mut args = vec![
        "transfer".to_string(),
        "--src-textgrid".into(),
        toy("src.TextGrid").display().to_string(),
        "--tgt-plan".into(),
        toy("tgt_plan.json").display().to_string(),
        "--align".into(),
        toy("align.txt").display().to_string(),
        "--transcript".into(),
        toy("transcript.txt").display().to_string(),
        "--src-stats".into(),
        toy("src_stats.json").display().to_string(),
        "--tgt-stats".into(),
        toy("tgt_stats.json").display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}
