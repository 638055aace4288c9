use std::process::{Command, Output};

fn diskflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diskflow")).args(args).env("DISKFLOW_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_bessel_passes() {
    let o = diskflow(&["verify", "--suite", "bessel"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["passed"], true);
    assert_eq!(v["config"]["command"]["suite"], "bessel");
    assert!(v["toolkit_version"].is_string());
}

#[test]
fn verify_gamma_and_spectral_pass() {
    for suite in ["gamma", "spectral"] {
        let o = diskflow(&["verify", "--suite", suite, "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stderr(&o));
        assert!(stdout(&o).lines().filter(|l| !l.starts_with('#')).skip(1).all(|l| l.ends_with("true")));
    }
}

#[test]
fn lambda_on_the_cut_is_a_usage_error() {
    let o = diskflow(&["fn-eval", "--alpha", "0.05", "--delta", "0.02", "--lambda", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("λ must avoid ℝ_{≤0}"));
}

#[test]
fn fn_eval_matches_library() {
    let o = diskflow(&["fn-eval", "--alpha", "0.05", "--delta", "0.02", "--lambda", "0.01+0.005i"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = diskflow::spectral::FlowParams::new(0.05, 0.02).unwrap();
    let pt = diskflow::spectral::SpectralPoint::new(diskflow::C64::new(0.01, 0.005)).unwrap();
    let f = diskflow::spectral::f_n_eval(&p, 1, &pt, 1e-10, Default::default()).unwrap().value;
    assert_eq!(v["data"]["value"][0].as_f64().unwrap(), f.re);
    assert_eq!(v["data"]["value"][1].as_f64().unwrap(), f.im);
}

#[test]
fn negative_delta_rejected_by_resolvent() {
    let o = diskflow(&["resolvent", "--alpha", "0.05", "--delta", "-0.01", "--lambda", "0.02"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("δ"));
}

#[test]
fn malformed_region_and_bad_flags() {
    let o = diskflow(&["zero-scan", "--alpha", "0.05", "--delta", "0.02", "--r-min", "0.1", "--r-max", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(diskflow(&["fn-eval", "--alpha", "x", "--delta", "0", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(diskflow(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(diskflow(&["sweep", "--alpha", "0.05", "--delta", "0", "--n-set", "2"]).status.code(), Some(2));
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = diskflow(&[
            "sweep", "--alpha", "0.02:0.1:5", "--delta", "-0.05:0.05:11", "--out", path.to_str().unwrap(), "--format", "csv",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        runs.push(std::fs::read_to_string(&path).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let text = &runs[0];
    assert!(text.contains("# config: "));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 55);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        let delta: f64 = cells[1].parse().unwrap();
        assert_eq!(cells[8], (delta < 0.0).to_string());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "alpha = 0.05\ndelta = 0.02\nlambda = \"0.02\"\nformat = \"csv\"\n").unwrap();
    let o = diskflow(&["--config", cfg.to_str().unwrap(), "fn-eval", "--lambda", "0.03"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let row = text.lines().last().unwrap();
    assert_eq!(row.split(',').next().unwrap().parse::<f64>().unwrap(), 0.03);
    assert!(text.contains("\"alpha\":0.05"));
}

#[test]
fn resolvent_profile_csv() {
    let o = diskflow(&["resolvent", "--alpha", "0.05", "--delta", "0.02", "--lambda", "0.02", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("r,re(omega),im(omega),re(v_r),im(v_r),re(v_theta),im(v_theta)"));
    let first = text.lines().find(|l| l.starts_with("1.0")).unwrap();
    let cells: Vec<f64> = first.split(',').map(|c| c.parse().unwrap()).collect();
    assert!(cells[3].abs() + cells[4].abs() + cells[5].abs() + cells[6].abs() < 1e-8);
}

#[test]
fn semigroup_rejects_bad_contour() {
    let o = diskflow(&["semigroup", "--alpha", "0.05", "--delta", "0.02", "--t", "5", "--b", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = diskflow(&["semigroup", "--alpha", "0.05", "--delta", "0.02", "--t", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
