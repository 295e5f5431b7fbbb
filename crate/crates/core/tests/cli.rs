use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robust-mimo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{text}"))
}

#[test]
fn worstcase_on_worked_example() {
    let out = cli(&["worstcase", "--f", "1", "--g", "0.46153846153846156", "--h", "2", "--epsilon", "0.5"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mse = field(&text, "worst_case_mse:");
    assert_eq!(format!("{mse:.6}"), format!("{:.6}", 4.0 / 13.0));
    assert!(text.contains("E* (1x1):\n-0.5,0"), "{text}");
}

#[test]
fn worstcase_reads_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let f = path("f.txt", "# precoder\n1 0\n0 1\n");
    let g = path("g.txt", "0.5 0\n0 0.5\n");
    let h = path("h.txt", "2 0\n0 1,1\n");
    let out = cli(&["worstcase", "--f", &f, "--g", &g, "--h", &h, "--epsilon", "0.3"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(field(&text, "worst_case_mse:") > 0.0);
    assert!(text.contains("E* (2x2):"));
}

#[test]
fn design_is_deterministic() {
    let args = ["design", "--seed", "7", "--L", "2", "--rho", "0.01", "--power-dbw", "20"];
    let a = cli(&args);
    let b = cli(&args);
    assert!(a.status.success(), "{a:?}");
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("F (2x2):") && text.contains("G (2x2):"));
    assert!(field(&text, "kkt_residual:") < 1e-7);
}

#[test]
fn design_with_baseline_methods() {
    for method in ["alternating_III", "nonrobust"] {
        let out = cli(&["design", "--seed", "3", "--L", "2", "--epsilon", "0.2", "--method", method]);
        assert!(out.status.success(), "{method}: {out:?}");
        assert!(stdout(&out).contains(&format!("method: {method}")));
    }
}

#[test]
fn design_from_channel_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    std::fs::write(&h, "1,0.5 0.2; -0.3 2,-1; 0.1 0.4,0.4").unwrap();
    let out = cli(&["design", "--channel", h.to_str().unwrap(), "--L", "2", "--rho", "0.02", "--power-dbw", "10"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("F (2x2):") && text.contains("G (2x3):"), "{text}");
}

#[test]
fn bench_writes_both_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fig3.cfg");
    std::fs::write(
        &config,
        "dims = 2\npower_dbw = 0, 20\nrho = 0.01\ntrials = 2\nseed = 5\nmethods = robust_optimal, alternating_II, nonrobust\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&["bench", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(summary.lines().count(), 1 + 2 * 3);
    assert!(results.starts_with("trial,seed,L,P_dBW,rho,method,status,"));
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["design", "--help"]).status.code(), Some(0));
    let usage = cli(&["design", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));
    assert_eq!(cli(&[]).status.code(), Some(1));
    assert_eq!(cli(&["design", "--method", "bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["bench", "--config", "/definitely/missing.cfg"]).status.code(), Some(2));
    assert_eq!(cli(&["worstcase", "--f", "1 2", "--g", "1", "--h", "2", "--epsilon", "0.1"]).status.code(), Some(2));
    assert_eq!(cli(&["design", "--L", "3", "--seed", "1", "--rho", "1.5"]).status.code(), Some(2));
}
