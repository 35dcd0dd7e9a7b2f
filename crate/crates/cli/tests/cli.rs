use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyapunov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn gamma_exact_at_unit_nu() {
    let out = run(&[
        "gamma",
        "--lambda",
        "1",
        "--sigma",
        "1.4142135",
        "--method",
        "exact",
    ]);
    assert!(out.status.success());
    assert!(out.stderr.is_empty(), "diagnostics on success");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((num(&v, "nu") - 1.0).abs() < 1e-6);
    assert!((num(&v, "gamma") - 0.188_696_893_78).abs() < 1e-6);
    assert_eq!(v["method"], "exact_quadrature");
    assert!(num(&v, "abs_error") < 1e-8);
}

#[test]
fn gamma_large_nu_asymptote() {
    let v = json(&[
        "gamma", "--omega", "1", "--sign", "pos", "--nu", "10", "--method", "asympt",
    ]);
    // (1/(4ν))(1 − 15/(16ν²)) at ν = 10.
    assert!((num(&v, "gamma_over_omega") - 0.024_765_625).abs() < 1e-12);
}

#[test]
fn gamma_at_band_edge_is_the_constant() {
    let v = json(&[
        "gamma", "--lambda", "0", "--sigma", "1", "--method", "uniform",
    ]);
    assert!((num(&v, "gamma") - 0.289_308_259_834_239).abs() < 1e-9);
    assert!(v["gamma_over_omega"].is_null());
}

#[test]
fn parameterizations_agree() {
    let a = json(&[
        "gamma", "--lambda", "-4", "--sigma", "2", "--method", "exact",
    ]);
    let b = json(&[
        "gamma", "--omega", "2", "--sign", "neg", "--nu", "4", "--method", "exact",
    ]);
    assert!((num(&a, "gamma") / num(&b, "gamma") - 1.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["gamma", "--lambda", "1"]), 2);
    assert_eq!(
        code(&["gamma", "--lambda", "1", "--omega", "1", "--sign", "pos", "--sigma", "1"]),
        2
    );
    assert_eq!(
        code(&["gamma", "--lambda", "1", "--sigma", "1", "--nu", "2"]),
        2
    );
    assert_eq!(code(&["gamma", "--lambda", "1", "--sigma", "-1"]), 2);
    assert_eq!(
        code(&["gamma", "--lambda", "1", "--sigma", "1", "--method", "magic"]),
        2
    );
    assert_eq!(
        code(&["gamma", "--lambda", "1", "--sigma", "1", "--tol", "0"]),
        2
    );
    assert_eq!(
        code(&["mc", "--lambda", "1", "--sigma", "1", "--chains", "1"]),
        2
    );
    assert_eq!(
        code(&["sweep", "--sign", "pos", "--nu-min", "1e-3", "--nu-max", "1e-4"]),
        2
    );
    assert_eq!(
        code(&["sweep", "--sign", "pos", "--nu-min", "1", "--nu-max", "1"]),
        2
    );
    assert_eq!(code(&["validate", "--tol-scale", "0"]), 2);
    assert_eq!(code(&["--parallelism", "0", "constant-c"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
}

#[test]
fn compute_failures_exit_3() {
    let out = run(&[
        "gamma", "--omega", "1", "--sign", "pos", "--nu", "1e5", "--method", "exact",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    assert_eq!(
        code(&["gamma", "--lambda", "0", "--sigma", "1", "--method", "exact"]),
        3
    );
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_writes_a_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let p = path.to_str().unwrap();
    let args = [
        "sweep",
        "--sign",
        "pos",
        "--nu-min",
        "1e-4",
        "--nu-max",
        "1e-3",
        "--points",
        "8",
        "--methods",
        "exact,asympt",
        "--output",
        p,
    ];
    let summary = json(&args);
    assert_eq!(summary["rows"], 8);
    let first = fs::read(&path).unwrap();
    json(&args);
    assert_eq!(first, fs::read(&path).unwrap(), "output not byte-identical");

    let rows = csv_rows(&String::from_utf8(first).unwrap());
    assert_eq!(rows.len(), 9);
    assert_eq!(
        rows[0],
        [
            "nu",
            "gamma_over_omega_exact",
            "gamma_over_omega_asympt",
            "gamma_over_omega_mc",
            "mc_std_error",
            "rel_err_exact_vs_asympt"
        ]
    );
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 1e-4);
    assert_eq!(rows[8][0].parse::<f64>().unwrap(), 1e-3);
    for r in &rows[1..] {
        assert!(r[3].is_empty() && r[4].is_empty());
        let rel: f64 = r[5].parse().unwrap();
        assert!(rel > 0.0 && rel < 0.0075);
    }
}

#[test]
fn sweep_json_matches_csv() {
    let base = [
        "sweep", "--sign", "neg", "--nu-min", "40", "--nu-max", "1000", "--points", "8",
    ];
    let csv = run(&[&base[..], &["--format", "csv"]].concat());
    let js = run(&[&base[..], &["--format", "json"]].concat());
    assert!(csv.status.success() && js.status.success());
    let rows = csv_rows(&String::from_utf8(csv.stdout).unwrap());
    let objs: Vec<Value> = serde_json::from_slice(&js.stdout).unwrap();
    assert_eq!(objs.len(), rows.len() - 1);
    for (r, o) in rows[1..].iter().zip(&objs) {
        for (i, key) in rows[0].iter().enumerate() {
            match o[key].as_f64() {
                Some(v) => assert_eq!(r[i].parse::<f64>().unwrap(), v, "{key}"),
                None => assert!(r[i].is_empty() && o[key].is_null(), "{key}"),
            }
        }
        assert!(num(o, "rel_err_exact_vs_asympt") <= 0.007);
        assert_eq!(num(o, "gamma_over_omega_asympt"), 1.0);
    }
}

#[test]
fn validate_reports_observed_errors() {
    let out = run(&["validate"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(num(r, "max_rel_err_observed") > 0.0);
    }
    // Only the positive-energy small-ν window exceeds its bound, at ν = 1e-3.
    let failing: Vec<&str> = rows
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["regime"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["small_nu_pos"]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(code(&["validate", "--tol-scale", "1.1"]), 0);
    let tight = run(&["validate", "--tol-scale", "0.1"]);
    assert_eq!(tight.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&tight.stdout).unwrap();
    assert!(report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["pass"] == false));
}

#[test]
fn constant_c_text_and_json() {
    let out = run(&["constant-c"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let scaled: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((scaled - 0.3645).abs() <= 0.0005);

    let fine = json(&["constant-c", "--format", "json", "--tol", "1e-9"]);
    let coarse = json(&["constant-c", "--format", "json", "--tol", "1e-6"]);
    assert!((num(&fine, "c") - num(&coarse, "c")).abs() < 1e-6);
    assert!((num(&fine, "two_cbrt_c") - 2f64.cbrt() * num(&fine, "c")).abs() < 1e-15);
}

#[test]
fn mc_is_reproducible_and_accurate() {
    let args = [
        "mc",
        "--lambda",
        "1",
        "--sigma",
        "1.4142135623730951",
        "--chains",
        "16",
        "--length",
        "1300",
        "--seed",
        "7",
    ];
    let a = run(&args);
    assert!(a.status.success());
    let b = run(&[&args[..], &["--parallelism", "1"]].concat());
    assert_eq!(a.stdout, b.stdout, "depends on worker count");

    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let z = (num(&v, "gamma_hat") - 0.188_696_893_780_36) / num(&v, "std_error");
    assert!(z.abs() <= 4.0, "{z} standard errors off");
    assert_eq!(v["chains_used"], 16);
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# point\nlambda = -1\nsigma = 1.4142135623730951\nmethod = exact\ntol_scale = 2\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let from_file = json(&["gamma", "--config", c]);
    assert!((num(&from_file, "gamma") - 0.748_090_927_354_39).abs() < 1e-9);

    let overridden = json(&["--config", c, "gamma", "--method", "asympt"]);
    assert_eq!(overridden["method"], "asymptotic_small_nu");
    assert_eq!(num(&overridden, "lambda"), -1.0);

    // tol_scale belongs to validate and is ignored here; there it applies.
    assert_eq!(code(&["validate", "--config", c]), 0);

    fs::write(&cfg, "lambda = 1\nflux_capacitor = 3\n").unwrap();
    assert_eq!(code(&["gamma", "--config", c, "--sigma", "1"]), 2);
    assert_eq!(
        code(&[
            "gamma",
            "--config",
            dir.path().join("missing").to_str().unwrap()
        ]),
        2
    );
}
