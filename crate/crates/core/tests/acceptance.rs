//! Acceptance criteria. Each prints one PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use gossip_freshness::experiments::selftest::{self, CriterionResult};

fn gate(result: gossip_freshness::Result<CriterionResult>) {
    let r = result.expect("criterion ran");
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_1_closed_forms_match_recursion() {
    gate(selftest::closed_forms_match_recursion());
}

#[test]
fn criterion_2_spot_values() {
    gate(selftest::spot_values());
}

#[test]
fn criterion_3_inequalities() {
    gate(selftest::inequalities_hold());
}

#[test]
fn criterion_4_monte_carlo_agreement() {
    gate(selftest::monte_carlo_agrees());
}

#[test]
fn criterion_5_decomposition() {
    gate(selftest::decomposition_holds());
}

#[test]
fn criterion_6_optimal_cluster_claims() {
    gate(selftest::optimal_cluster_claims());
}

#[test]
fn criterion_7_determinism() {
    gate(selftest::sweeps_are_deterministic());

    // the selftest report itself, through the CLI, twice
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_freshness"))
            .args(["selftest", "--output"])
            .arg(&path)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "selftest exited with {status}");
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    println!("[PASS] criterion 7: selftest report is byte-identical across runs ({} bytes)", a.len());
}
