//! Exit-code and plumbing contract of the command-line binary:
//! 0 on success, 1 on failed verification, 2 on input errors.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_maxflow")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maxflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_verify_round_trip() {
    let inst = scratch("round.max");
    let status = Command::new(exe())
        .args(["gen", "random", "--nodes", "10", "--arcs", "30", "--seed", "5", "-o"])
        .arg(&inst)
        .status()
        .unwrap();
    assert!(status.success());
    for algo in ["generic", "lmes", "enhanced"] {
        let out = Command::new(exe())
            .args(["solve", "--algo", algo])
            .arg(&inst)
            .output()
            .unwrap();
        assert!(out.status.success(), "{algo}: {out:?}");
        let sol = scratch(&format!("round-{algo}.sol"));
        std::fs::write(&sol, &out.stdout).unwrap();
        let verify = Command::new(exe())
            .arg("verify")
            .arg(&inst)
            .arg(&sol)
            .output()
            .unwrap();
        assert!(verify.status.success(), "{algo} verify: {verify:?}");
        assert!(String::from_utf8_lossy(&verify.stdout).starts_with("ok "));
    }
}

#[test]
fn tampered_solution_exits_one() {
    let inst = scratch("tamper.max");
    Command::new(exe())
        .args(["gen", "pathological", "--alpha", "3", "-o"])
        .arg(&inst)
        .status()
        .unwrap();
    let out = Command::new(exe())
        .args(["solve", "--algo", "lmes"])
        .arg(&inst)
        .output()
        .unwrap();
    let tampered = String::from_utf8(out.stdout)
        .unwrap()
        .replace("s 65", "s 66");
    let sol = scratch("tamper.sol");
    std::fs::write(&sol, tampered).unwrap();
    let verify = Command::new(exe())
        .arg("verify")
        .arg(&inst)
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(1), "{verify:?}");
}

#[test]
fn input_errors_exit_two() {
    let missing = Command::new(exe())
        .args(["solve", "--algo", "generic", "/nonexistent/input.max"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2), "{missing:?}");

    let inst = scratch("badk.max");
    Command::new(exe())
        .args(["gen", "pathological", "--alpha", "3", "-o"])
        .arg(&inst)
        .status()
        .unwrap();
    let bad_k = Command::new(exe())
        .args(["solve", "--algo", "lmes", "--k", "3"])
        .arg(&inst)
        .output()
        .unwrap();
    assert_eq!(bad_k.status.code(), Some(2), "{bad_k:?}");

    let infeasible = Command::new(exe())
        .args(["gen", "random", "--nodes", "3", "--arcs", "99", "-o", "/tmp/x.max"])
        .output()
        .unwrap();
    assert_eq!(infeasible.status.code(), Some(2), "{infeasible:?}");
}

#[test]
fn bench_writes_csv() {
    let dir = std::env::temp_dir().join(format!("maxflow-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for seed in 0..3 {
        let path = dir.join(format!("r{seed}.max"));
        Command::new(exe())
            .args(["gen", "random", "--nodes", "8", "--arcs", "20"])
            .args(["--seed", &seed.to_string(), "-o"])
            .arg(&path)
            .status()
            .unwrap();
    }
    let csv_path = dir.join("bench.csv");
    let status = Command::new(exe())
        .args(["bench", "--algos", "generic,lmes,enhanced", "--corpus"])
        .arg(&dir)
        .arg("--out")
        .arg(&csv_path)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,algorithm,value,phases,pushes_saturating,pushes_large,\
         pushes_medium,pushes_other,pushes_total,relabels,contractions"
    );
    assert_eq!(lines.count(), 9, "3 instances x 3 algorithms");
    std::fs::remove_dir_all(&dir).ok();
}
