use std::path::Path;
use std::process::{Command, Output};

use selfish_bandit_cli::schema::{parse_run_csv, RUN_HEADER};

fn bin(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfish-bandit"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .env_remove("SELFISH_BANDIT_SEED")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

const SMALL_RUN: [&str; 9] = ["run", "--learner", "wsu-ux", "--learner", "exp3", "--T", "2048", "--trials", "6"];

#[test]
fn run_is_byte_identical_and_versioned() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&bin(&SMALL_RUN, &a));
    ok(&bin(&[&SMALL_RUN[..], &["--parallelism", "4"]].concat(), &b));
    for f in ["run.csv", "pi1_path.csv", "summary.json"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    let csv = read(a.join("run.csv"));
    assert!(csv.starts_with(&RUN_HEADER.join(",")));
    assert!(csv.starts_with("schema_version,"));
    let rows = parse_run_csv(&csv).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.horizon == 2048));
}

#[test]
fn seed_variable_applies_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, env_seed: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_selfish-bandit"));
        cmd.args(["run", "--T", "1024", "--trials", "3", "--out-dir"]).arg(dir.path().join(out));
        cmd.env_remove("SELFISH_BANDIT_SEED");
        if let Some(s) = env_seed {
            cmd.env("SELFISH_BANDIT_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        ok(&cmd.output().unwrap());
        read(dir.path().join(out).join("run.csv"))
    };
    let by_env = run("env", Some("5"), None);
    assert_eq!(by_env, run("flag", None, Some("5")));
    assert_eq!(run("both", Some("6"), Some("5")), by_env);
    assert_ne!(run("other", Some("6"), None), by_env);
}

#[test]
fn summary_json_embeds_resolved_parameters() {
    let dir = tempfile::tempdir().unwrap();
    ok(&bin(&["run", "--T", "4096", "--trials", "3"], dir.path()));
    let text = read(dir.path().join("summary.json"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let cfg = &v["configs"][0];
    // powf is not correctly rounded, so allow an ulp or two against the exact powers.
    assert!((cfg["eta"].as_f64().unwrap() / (1.0 / 256.0) - 1.0).abs() < 1e-15);
    assert!((cfg["gamma"].as_f64().unwrap() / (1.0 / 16.0) - 1.0).abs() < 1e-15);
    assert_eq!(cfg["regime"], "non-trivial");
    // Keys appear in declaration order, and floats carry 17 significant digits.
    let at = |key: &str| text.find(&format!("\n  \"{key}\":")).unwrap();
    let order = ["schema_version", "command", "env", "base_seed", "trials", "configs"].map(at);
    assert!(order.windows(2).all(|w| w[0] < w[1]));
    assert!(text.contains("\"eta\": 3.9062500000000009e-3"));
}

#[test]
fn trivial_gamma_forces_linear_regret() {
    let dir = tempfile::tempdir().unwrap();
    let t = 4096u64;
    ok(&bin(&["run", "--env", "trivial", "--T", "4096", "--eta", "0.01", "--gamma", "0.4", "--trials", "5"], dir.path()));
    let rows = parse_run_csv(&read(dir.path().join("run.csv"))).unwrap();
    let mean = rows.iter().map(|r| r.pseudo_regret).sum::<f64>() / rows.len() as f64;
    assert!(mean >= 0.2 * t as f64, "{mean}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin(args, dir.path()).status.code();
    assert_eq!(code(&["run", "--T", "4096", "--eta", "0.3", "--trials", "3"]), Some(2));
    assert_eq!(code(&["claims", "--T", "4096", "--eta", "0.0001", "--trials", "3"]), Some(2));
    assert_eq!(code(&["run", "--learner", "exp4"]), Some(2));
    assert_eq!(code(&["scaling", "--T", "1024", "--T", "2048"]), Some(2));
    assert_eq!(code(&["ic-audit", "--grid", "11"]), Some(2));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, format!("{}\n", RUN_HEADER.join(","))).unwrap();
    assert_eq!(code(&["plot", "--csv", empty.to_str().unwrap()]), Some(2));
    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "a,b,c\n1,2,3\n").unwrap();
    assert_eq!(code(&["plot", "--csv", garbage.to_str().unwrap()]), Some(2));

    let bad_manifest = dir.path().join("bad.json");
    std::fs::write(&bad_manifest, r#"{"trails": 3}"#).unwrap();
    assert_eq!(code(&["run", "--config", bad_manifest.to_str().unwrap()]), Some(2));
}

#[test]
fn plot_draws_one_polyline_per_learner() {
    let dir = tempfile::tempdir().unwrap();
    ok(&bin(&["run", "--learner", "wsu-ux,exp3", "--T", "1024", "--T", "2048", "--T", "4096", "--trials", "3"], dir.path()));
    ok(&bin(&["plot"], dir.path()));
    let svg = read(dir.path().join("regret_vs_T.svg"));
    assert!(svg.starts_with("<svg"));
    assert!(!svg.contains("href"));
    // Two data polylines plus a dashed fit for each learner.
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(svg.contains("fitted T^α"));
    let path = read(dir.path().join("pi1_path.svg"));
    assert!(path.contains("T1+T2"));
}

#[test]
fn scaling_claims_audit_and_bounds_write_json() {
    let dir = tempfile::tempdir().unwrap();
    ok(&bin(&["scaling", "--T", "1024,2048,4096", "--trials", "4"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("scaling.json"))).unwrap();
    let slope = v["learners"][0]["fit"]["slope"].as_f64().unwrap();
    assert!(slope > 0.3 && slope < 1.0, "{slope}");

    ok(&bin(&["claims", "--T", "4096", "--trials", "4"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("claims.json"))).unwrap();
    let report = &v["reports"][0]["report"];
    assert_eq!(report["claim1"]["paper_target"].as_f64().unwrap(), (5.0f64 / 4.0).ln());
    assert!(report["derived"]["m_exponent"].is_number());
    assert!(report["derived"]["t_prime"].is_number());
    assert!(report["e2"]["frequency"]["ci_low"].is_number());

    let audit = || {
        ok(&bin(&["ic-audit", "--configs", "20", "--grid", "201"], dir.path()));
        read(dir.path().join("ic_audit.json"))
    };
    let first = audit();
    assert_eq!(first, audit());
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 5);
    assert_eq!(verdicts[0]["algo"], "wsu");
    assert_eq!(verdicts[0]["verdict"], "truthful");

    ok(&bin(&["bounds", "--T", "4096"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("bounds.json"))).unwrap();
    assert_eq!(v["math_helpers"]["log_bound_violations"], 0);
}
