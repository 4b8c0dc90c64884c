use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn taut0(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taut0")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

const CTX: &str = "[sections]\ncount = 2\n\n[symbols.D]\ndegree = \"e\"\n";

#[test]
fn relation_text_reparses() {
    let dir = TempDir::new().unwrap();
    let ctx = write(&dir, "c.toml", CTX);
    let ctx = ctx.to_str().unwrap();
    for args in [
        vec!["relation", "rel1", "--ctx", ctx, "--symbol", "D"],
        vec!["relation", "rel4", "--ctx", ctx, "--divisor", "D + 2 s2", "-i", "1"],
        vec!["relation", "rel8_sum", "--ctx", ctx],
        vec!["relation", "rel5", "--ctx", ctx, "--symbol", "D"],
    ] {
        let out = taut0(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        let text = text.trim();
        let curve = args[1] == "rel5";
        let mut again = vec!["expand", "--ctx", ctx, text];
        if curve {
            again.push("--curve");
        }
        let round = taut0(&again);
        assert_eq!(code(&round), 0);
        assert_eq!(stdout(&round).trim(), text, "{args:?}");
    }
}

#[test]
fn relation_check_zero() {
    let dir = TempDir::new().unwrap();
    let ctx = write(&dir, "c.toml", "[mode]\nstability = \"dm\"\n\n[sections]\ncount = 4\n");
    // rel9 cancels symbolically; rel8_psi only vanishes numerically
    let out = taut0(&["relation", "rel9", "--ctx", ctx.to_str().unwrap(), "--check-zero"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "0\n");
    let out = taut0(&["relation", "rel8_psi", "--ctx", ctx.to_str().unwrap(), "--check-zero"]);
    assert_eq!(code(&out), 1);
    let out = taut0(&["expand", "--ctx", ctx.to_str().unwrap(), "psi(1)", "--check-zero"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_exit_codes() {
    let ok = taut0(&["verify-mbar", "--relation", "rel8_psi", "--n", "5"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("verdict: zero class"));
    let nonzero = taut0(&["verify-mbar", "--expr", "psi(1)", "--n", "4"]);
    assert_eq!(code(&nonzero), 1);
    assert!(stdout(&nonzero).contains("NOT zero"));
    assert_eq!(code(&taut0(&["verify-mbar", "--relation", "rel5", "--n", "4"])), 3);
    assert_eq!(code(&taut0(&["verify-mbar", "--expr", "cls(y)", "--n", "4"])), 3);
    assert_eq!(code(&taut0(&["verify-mbar", "--relation", "rel8_psi", "--n", "3"])), 2);
    assert_eq!(code(&taut0(&["verify-mbar", "--relation", "rel99", "--n", "5"])), 2);
}

#[test]
fn verify_json_uses_rational_strings() {
    let out = taut0(&["verify-mbar", "--expr", "1/2 psi(1)", "--n", "4", "--report", "json"]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["vector"]["14|23"], "1/2");
    assert_eq!(v["nonzero_pairings"][0]["pairing"], "1/2");
    assert_eq!(v["zero_class"], false);
}

#[test]
fn verify_all_is_independent_of_jobs() {
    let serial = taut0(&["verify-mbar", "--relation", "all", "--n", "6", "--report", "json"]);
    let parallel = taut0(&["verify-mbar", "--relation", "all", "--n", "6", "--report", "json", "--jobs", "3"]);
    assert_eq!(code(&serial), 0);
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn vcb_on_the_plane() {
    let out = taut0(&["vcb", "--dim-x", "2", "--deg-k", "-3", "--markings", "0"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("rank: 2\n"), "{text}");
    assert!(text.contains("assembly defect: 0"));
    let json = taut0(&["vcb", "--dim-x", "n", "--deg-k", "k", "--markings", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["assembly_defect"]["text"], "0");
    assert_eq!(code(&taut0(&["vcb", "--dim-x", "2", "--deg-k", "0", "--markings", "0"])), 2);
}

#[test]
fn bad_context_reports_position() {
    let dir = TempDir::new().unwrap();
    let ctx = write(&dir, "bad.toml", "[sections]\ncount = 1\n\n[effectivity]\nQ = \"nonnegative\"\n");
    let out = taut0(&["relation", "rel3", "--ctx", ctx.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(code(&taut0(&["relation", "rel3", "--ctx", "/nonexistent.toml"])), 2);
    assert_eq!(code(&taut0(&["frobnicate"])), 2);
    assert_eq!(code(&taut0(&["expand", "pi_*(("])), 2);
}

#[test]
fn graph_subcommands() {
    let dir = TempDir::new().unwrap();
    let tree = write(&dir, "t.txt", "v 0 g=0 a=2\nv 1 g=0 a=3\nv 2 g=0 a=0\ne 0 1\ne 1 2\nt 0 m=1\n");
    let tree = tree.to_str().unwrap();
    let lift = taut0(&["graph", "liftings", tree, "--total", "2"]);
    assert_eq!(code(&lift), 0);
    assert!(stdout(&lift).ends_with("6 liftings\n"));
    let two = taut0(&["graph", "liftings", tree, "--total", "1", "--bounds", "0:1,0:1,0:0"]);
    assert_eq!(stdout(&two), "vertex order: [0, 1, 2]\n[0, 1, 0]\n[1, 0, 0]\n2 liftings\n");
    let contracted = taut0(&["graph", "contract", tree, "--edges", "0"]);
    assert_eq!(stdout(&contracted), "v 0 g=0 a=5\nv 2 g=0 a=0\ne 0 2\nt 0 m=1\n");
    let info = taut0(&["graph", "info", tree, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&info)).unwrap();
    assert_eq!(v["betti_number"], 0);
    assert_eq!(v["total_degree"], 5);
    let bad = write(&dir, "b.txt", "v 0 g=0\ne 0 3\n");
    assert_eq!(code(&taut0(&["graph", "info", bad.to_str().unwrap()])), 2);
}

#[test]
fn selftest_is_deterministic() {
    let first = taut0(&["selftest"]);
    let second = taut0(&["selftest", "--jobs", "2"]);
    assert_eq!(code(&first), 0, "{}", stdout(&first));
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).ends_with("8/8 criteria passed\n"));
}
