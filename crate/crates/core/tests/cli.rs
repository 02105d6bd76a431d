use std::process::{Command, Output};

fn freshness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freshness"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analytic_single_point() {
    let o = freshness(&["analytic", "--n", "3", "--policy", "FC_sRC", "--lambda-g", "1", "--trace"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("0.351851851851852"), "{text}");
    assert!(text.contains("closed form): n/a"));

    let o = freshness(&[
        "analytic", "--n", "4", "--k", "2", "--policy", "DC_RC", "--cluster-policy", "FC_allRC",
        "--lambda-g", "1",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.156250000000000"));
}

#[test]
fn validation_errors_exit_1() {
    let o = freshness(&["analytic", "--n", "120", "--k", "7", "--cluster-policy", "DC_RC"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m·k ≠ n"));

    let o = freshness(&["analytic", "--n", "2", "--policy", "FC_xRC"]);
    assert_eq!(o.status.code(), Some(1));
    let o = freshness(&["sweep", "--preset", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn io_errors_exit_2() {
    let o = freshness(&["sweep", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = freshness(&[
            "sweep", "--preset", "fig4", "--cycles", "200", "--seed", "3", "--output",
            out.to_str().unwrap(), "--plot-dir", dir.path().join("plots").to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("experiment,policy_source,policy_cluster,n,k,m,lambda_e,lambda_s,lambda_c,lambda_g,p_analytic,p_oracle,p_sim,sim_ci_lo,sim_ci_hi,cycles,seed\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 4 * 16);
    let plots = std::fs::read_dir(dir.path().join("plots")).unwrap().count();
    assert_eq!(plots, 16);
}

#[test]
fn simulate_adds_columns_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("point.toml");
    std::fs::write(
        &cfg,
        "name = \"pt\"\nmode = \"single_point\"\nn = 1\npolicies = [\"DC_noRC\"]\n[[cases]]\nlambda_e = 1.0\nlambda_s = 1.0\n",
    )
    .unwrap();
    let o = freshness(&["simulate", "--config", cfg.to_str().unwrap(), "--cycles", "1000", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[10], row[11]);
    assert!(row[11].starts_with("5.0000000000000000e-1"));
    assert!(!row[12].is_empty());
    assert_eq!(row[15], "1000");
    assert_eq!(row[16], "9");
}

#[test]
fn optimal_k_reports_claims() {
    let o = freshness(&["optimal-k", "--n", "16", "--lambda-g", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("(DC_noRC,DC_noRC)"));
    assert!(text.contains("[HOLDS]"));
    assert!(!text.contains("[FAILS]"));
}
