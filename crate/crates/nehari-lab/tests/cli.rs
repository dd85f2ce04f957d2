use nehari_lab::cli::{run, EXIT_INVALID, EXIT_OK};
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nehari-lab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = invoke(args);
    assert_eq!(code, EXIT_OK, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn thresholds_young_constant_at_beta_zero() {
    let v = json(&["thresholds", "--p", "2.5", "--lambda", "1", "--beta", "0", "--n", "1024"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["C_p_beta"].as_f64().unwrap(), 0.08);
    assert_eq!(v["kappa_convention"]["kappa"].as_f64().unwrap(), 1.0);
    assert_eq!(v["grid"]["n"], 1024);
    assert!(v["build_id"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn fibering_with_explicit_coefficients() {
    let v = json(&["fibering", "--p", "3", "--coeffs", "1,1,3"]);
    let s5 = 5f64.sqrt();
    let tm = v["roots"]["t_minus"].as_f64().unwrap();
    let tp = v["roots"]["t_plus"].as_f64().unwrap();
    assert!((tm - (3.0 - s5) / 2.0).abs() < 1e-12);
    assert!((tp - (3.0 + s5) / 2.0).abs() < 1e-12);
}

#[test]
fn fibering_rejects_wrong_coefficient_count() {
    let (code, _, _) = invoke(&["fibering", "--p", "3", "--coeffs", "1,1"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn invalid_inputs_exit_two() {
    assert_eq!(invoke(&["thresholds", "--p", "5", "--lambda", "1", "--beta", "0"]).0, EXIT_INVALID);
    assert_eq!(invoke(&["thresholds", "--p", "2.5", "--lambda", "-1", "--beta", "0"]).0, EXIT_INVALID);
    assert_eq!(invoke(&["no-such-command"]).0, EXIT_INVALID);
    assert_eq!(invoke(&["solve", "--p", "3.5", "--lambda", "0.1", "--beta", "1", "--mode", "global", "--n", "256"]).0, EXIT_INVALID);
}

#[test]
fn output_is_deterministic() {
    let args = ["thresholds", "--p", "2.8", "--lambda", "0.3", "--beta", "1", "--n", "1024"];
    assert_eq!(invoke(&args).1, invoke(&args).1);
}

#[test]
fn multibump_csv_header_and_rows() {
    let (code, out, err) = invoke(&["multibump", "--p", "2.5", "--lambda", "1", "--beta", "10.5", "--N-list", "1,2", "--n", "1024"]);
    assert_eq!(code, EXIT_OK, "stderr: {err}");
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "N,spacing,t2,J,cross_term,bound");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1,"));
}

#[test]
fn multibump_overlap_is_invalid() {
    // N = 2 gives spacing 8, which must exceed 2·R0
    let (code, _, _) = invoke(&["multibump", "--p", "2.5", "--lambda", "1", "--beta", "10.5", "--R0", "4.5", "--N-list", "2", "--n", "1024"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn verify_identities_passes() {
    let (code, _, err) = invoke(&["verify", "--suite", "identities"]);
    assert_eq!(code, EXIT_OK, "stderr: {err}");
}

#[test]
fn solve_skips_global_above_three() {
    let v = json(&["solve", "--p", "3.5", "--lambda", "0.1", "--beta", "15.6", "--n", "1024"]);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["mode"], "nehari_minus");
    assert_eq!(reports[0]["nehari_class"], "Minus");
}
