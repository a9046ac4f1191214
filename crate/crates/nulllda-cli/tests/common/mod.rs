//! Helpers shared by the CLI and acceptance test targets.

use std::path::Path;
use std::process::{Command, Output};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nulllda")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("failed to launch nulllda binary")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().next().unwrap_or_else(|| {
        panic!(
            "no stdout; stderr was: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });
    serde_json::from_str(line).expect("stdout is not a JSON line")
}

/// Writes a labeled CSV with c well-separated Gaussian classes, one sample
/// per row, label in the last column.
pub fn write_separated_csv(
    path: &Path,
    d: usize,
    n: usize,
    c: usize,
    seed: u64,
    separation: f64,
    header: bool,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    if header {
        let mut cols: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
        cols.push("label".into());
        text.push_str(&cols.join(","));
        text.push('\n');
    }
    for i in 0..n {
        let class = i % c;
        let mut cells: Vec<String> = (0..d)
            .map(|j| {
                let shift = if j == class { separation } else { 0.0 };
                let x: f64 = rng.sample::<f64, _>(StandardNormal) + shift;
                format!("{x:.16e}")
            })
            .collect();
        cells.push(format!("class{class}"));
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}
