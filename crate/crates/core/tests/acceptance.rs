//! Acceptance criteria 1-8, one line per criterion. Runs without the libtest
//! harness so the lines show up in plain `cargo test` output.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use taut0::selftest;

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() -> ExitCode {
    let (c1, t1) = timed(selftest::oracle_consistency);
    let (c6, t6) = timed(selftest::vcb_assembly);
    let report = selftest::run(1);

    let mut problems = Vec::new();
    for c in &report.criteria {
        println!("{c}");
        if !c.passed() {
            problems.push(format!("criterion {} failed", c.id));
        }
    }
    println!("timing: criterion 1 in {t1:?} (limit 10s), criterion 6 in {t6:?} (limit 1s)");

    if report.criteria.len() != 8 {
        problems.push(format!("expected 8 criteria, got {}", report.criteria.len()));
    }
    if report.criteria.first() != Some(&c1) || report.criteria.get(5) != Some(&c6) {
        problems.push("standalone criteria differ from the full run".to_string());
    }
    if t1 >= Duration::from_secs(10) {
        problems.push(format!("criterion 1 took {t1:?}"));
    }
    if t6 >= Duration::from_secs(1) {
        problems.push(format!("criterion 6 took {t6:?}"));
    }
    if selftest::no_map_suite(1) != selftest::no_map_suite(4) {
        problems.push("parallel no-map suite differs from serial".to_string());
    }

    if problems.is_empty() {
        println!("acceptance: PASS");
        ExitCode::SUCCESS
    } else {
        for p in &problems {
            println!("acceptance: FAIL: {p}");
        }
        ExitCode::FAILURE
    }
}
