use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use signet::commands::{simulate_network, SimulateOptions};
use signet::network::load_network;
use signet::trajectory_csv::read_trajectory;
use signet_core::dynamics::{classify_outcome, TOL_CONV};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn signet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signet"))
        .args(args)
        .env_remove("SIGNET_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_network(dir: &tempfile::TempDir, text: &str) -> String {
    let p = dir.path().join("net.json");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_balanced_predicts_polarization() {
    let o = signet(&["analyze", path(&data("balanced.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("prediction: polarization"), "{out}");
    assert!(out.contains("mu = 0.5"), "{out}");

    let o = signet(&["analyze", path(&data("balanced.json")), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["prediction"]["behavior"], "polarization");
    assert_eq!(v["balance"]["gauge"], serde_json::json!([1, 1]));
    assert_eq!(v["index"]["name"], "mu");
}

#[test]
fn analyze_inconsistent_reports_witness_and_m_matrix_checks() {
    let o = signet(&["analyze", path(&data("inconsistent.json")), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["consistency"]["witness"], serde_json::json!([1, 2]));
    assert_eq!(v["m_matrix"]["core_is_m_matrix"], true);
    assert_eq!(v["m_matrix"]["root_reaches_all"], true);
    assert_eq!(v["prediction"]["behavior"], "neutralization");
}

#[test]
fn analyze_disconnected_fails_hypothesis() {
    let o = signet(&["analyze", path(&data("disconnected.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not strongly connected"));
}

#[test]
fn single_agent_is_a_hypothesis_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = temp_network(&dir, r#"{"n": 1, "Bc": [[0]], "Bd": [[0]]}"#);
    let o = signet(&["analyze", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("at least two agents"));
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = temp_network(
        &dir,
        r#"{"n": 2, "Bc": [[0, 1], [1, 2]], "Bd": [[0, 0], [0, 0]]}"#,
    );
    let o = signet(&["analyze", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diagonal"), "{}", stderr(&o));

    let f = temp_network(
        &dir,
        "{\n  \"n\": 2,\n  \"Bc\": [[0, 1], [1, 0]],\n  \"Bd\": [[0, 0], [0, 0]],,\n}",
    );
    let o = signet(&["analyze", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let o = signet(&["analyze", "/nonexistent/net.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let o = signet(&[
        "simulate",
        path(&data("polarized.json")),
        "--out",
        path(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert!(
        last.starts_with("polarization θ=") && last.contains("deviation="),
        "{last}"
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x1,x2,x3,y1,y2,y3\n"));
    assert!(!text.contains('\r'));

    let o = signet(&["simulate", path(&data("inconsistent.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("neutralization"));
}

#[test]
fn simulate_usage_errors() {
    let o = signet(&["simulate", path(&data("balanced.json")), "--h", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = signet(&["simulate", path(&data("balanced.json")), "--tmax", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_without_gain_needs_hypotheses() {
    let o = signet(&["simulate", path(&data("disconnected.json"))]);
    assert_eq!(o.status.code(), Some(2));

    // with an explicit gain the network is simulated anyway
    let dir = tempfile::tempdir().unwrap();
    let f = temp_network(
        &dir,
        r#"{"n": 3, "Bc": [[0,0,0],[1,0,0],[0,0,0]], "Bd": [[0,0,0],[0,0,0],[0,1,0]], "k": 1, "x0": [1, 0, 0], "y0": [0, 0, 0]}"#,
    );
    let o = signet(&["simulate", &f, "--tmax", "5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k_source"], "file");
    assert!(v.get("comparison").is_none());
}

#[test]
fn divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = temp_network(
        &dir,
        r#"{"n": 2, "Bc": [[0, 1], [1, 0]], "Bd": [[0, 0], [0, 0]], "k": 100, "x0": [1, 0], "y0": [1, 0]}"#,
    );
    let o = signet(&["simulate", &f, "--h", "0.1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));
}

#[test]
fn gain_flag_handling() {
    let o = signet(&["gain", path(&data("balanced.json")), "--delta", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("mu = 0.5") && out.contains("k = 0.55"),
        "{out}"
    );
    assert!(out.contains("Phi = W"));

    let o = signet(&["gain", path(&data("balanced.json")), "--delta", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("delta"));

    let o = signet(&["gain", path(&data("inconsistent.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("zeta ="));
    assert!(stdout(&o).contains("branch: inconsistent"));
}

#[test]
fn verify_suites() {
    let o = signet(&[
        "verify",
        "--family",
        "consistent-balanced",
        "--n",
        "4",
        "--trials",
        "25",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("25/25 trials pass"), "{}", stdout(&o));

    let o = signet(&[
        "verify",
        "--family",
        "inconsistent",
        "--n",
        "5",
        "--trials",
        "25",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("25/25 neutralization"),
        "{}",
        stdout(&o)
    );

    let o = signet(&[
        "verify",
        "--family",
        "consistent-unbalanced",
        "--n",
        "3",
        "--trials",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_usage_errors() {
    assert_eq!(signet(&["verify", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(signet(&["verify", "--n", "1"]).status.code(), Some(1));
    assert_eq!(
        signet(&["verify", "--family", "other"]).status.code(),
        Some(1)
    );
    assert_eq!(signet(&["verify", "--delta", "0.5"]).status.code(), Some(1));
    assert_eq!(signet(&["--help"]).status.code(), Some(0));
}

#[test]
fn machine_readable_output_is_deterministic() {
    let args = [
        "verify",
        "--family",
        "inconsistent",
        "--n",
        "4",
        "--trials",
        "12",
        "--seed",
        "99",
        "--json",
    ];
    let a = signet(&args);
    let b = signet(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let order: Vec<u64> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["trial"].as_u64().unwrap())
        .collect();
    assert_eq!(order, (1..=12).collect::<Vec<_>>());

    let a = signet(&["analyze", path(&data("inconsistent.json")), "--json"]);
    let b = signet(&["analyze", path(&data("inconsistent.json")), "--json"]);
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    signet(&[
        "simulate",
        path(&data("unbalanced.json")),
        "--out",
        path(&p1),
    ]);
    signet(&[
        "simulate",
        path(&data("unbalanced.json")),
        "--out",
        path(&p2),
    ]);
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
}

#[test]
fn csv_round_trip_preserves_classification() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "balanced.json",
        "polarized.json",
        "unbalanced.json",
        "inconsistent.json",
    ] {
        let net = load_network(&data(name)).unwrap();
        let csv = dir.path().join("t.csv");
        let (_, traj) = simulate_network(&net, &SimulateOptions::default(), Some(&csv)).unwrap();
        let back = read_trajectory(std::fs::File::open(&csv).unwrap(), traj.k, traj.h).unwrap();
        assert_eq!(back, traj);
        assert_eq!(
            classify_outcome(&back, TOL_CONV),
            classify_outcome(&traj, TOL_CONV)
        );
    }
}

#[test]
fn log_level_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_signet"))
        .args(["gain", path(&data("balanced.json"))])
        .env("SIGNET_LOG", "info")
        .output()
        .unwrap();
    assert!(stderr(&o).contains("loaded"), "{}", stderr(&o));
    assert!(stderr(&signet(&["gain", path(&data("balanced.json"))])).is_empty());
}
