//! End-to-end checks of the command-line binary: determinism, format
//! equivalence, and exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqrac"))
        .args(args)
        .env_remove("MQRAC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8")
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).expect("valid json")
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["earac", "bell", "--n", "4", "--per-pair"][..],
        &["classical", "enumerate", "--n", "4"][..],
        &["qrac", "tetrakis", "--emit-remap", "--emit-encoding"][..],
        &["diff", "--max-n", "8", "--format", "csv"][..],
    ] {
        assert_eq!(stdout(args), stdout(args), "args {args:?}");
    }
}

#[test]
fn csv_and_json_encode_identical_values() {
    let j = json(&["earac", "bell", "--n", "3"]);
    let c = stdout(&["earac", "bell", "--n", "3", "--format", "csv"]);
    let row: Vec<&str> = c.lines().nth(1).expect("data row").split(',').collect();
    assert_eq!(row[0], "bell");
    let sim_csv: f64 = row[3].parse().unwrap();
    let sim_json = j["report"]["simulated"].as_f64().unwrap();
    assert_eq!(sim_csv, sim_json);
    assert!((sim_csv - 0.784517796864).abs() < 1e-9);
    // LF line endings, no CR
    assert!(!c.contains('\r'));
}

#[test]
fn thread_flag_and_env_do_not_change_output() {
    let base = stdout(&["classical", "appendix"]);
    let flagged = {
        let out = run(&["classical", "appendix", "--threads", "1"]);
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let env = {
        let out = Command::new(env!("CARGO_BIN_EXE_mqrac"))
            .args(["classical", "appendix"])
            .env("MQRAC_THREADS", "1")
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(base, flagged);
    assert_eq!(base, env);
}

#[test]
fn ghz_report_matches_reference_value() {
    let j = json(&["earac", "ghz", "--n", "3"]);
    let sim = j["report"]["simulated"].as_f64().unwrap();
    assert!((sim - 0.788675134595).abs() < 1e-9);
    assert!(j["report"]["difference"].as_f64().unwrap() < 1e-9);
}

#[test]
fn grid9_reports_exact_two_thirds() {
    let j = json(&["earac", "grid9"]);
    assert!((j["report"]["simulated"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    assert_eq!(j["report"]["closed_form_exact"]["num"], "2");
    assert_eq!(j["report"]["closed_form_exact"]["den"], "3");
}

#[test]
fn classical_reports() {
    let j = json(&["classical", "enumerate", "--n", "3"]);
    assert_eq!(j["report"]["optimum"]["num"], "17");
    assert_eq!(j["report"]["optimum"]["den"], "24");
    assert!(j["report"]["strategy"]["first_party"].is_string());

    let j = json(&["classical", "zigzag", "--n", "10"]);
    assert_eq!(j["report"]["formula"], j["report"]["evaluated"]);
    assert_eq!(j["report"]["formula"]["num"], "2901");
    assert_eq!(j["report"]["formula"]["den"], "5120");

    let j = json(&["classical", "appendix"]);
    let rows = j["report"]["tasks"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[1]["optimum"]["num"], "3");
    assert_eq!(rows[1]["optimum"]["den"], "4");
}

#[test]
fn qrac_reports() {
    let j = json(&["qrac", "tetrakis", "--emit-remap"]);
    let r = &j["report"];
    assert!((r["quantum_value"].as_f64().unwrap() - 0.733253175473).abs() < 1e-9);
    assert_eq!(r["classical"]["num"], "21");
    assert_eq!(r["classical"]["den"], "32");
    assert_eq!(r["standard_classical"]["num"], "11");
    assert_eq!(r["standard_classical"]["den"], "16");
    let remap = r["remap"].as_array().unwrap();
    assert_eq!(remap.len(), 16);
    assert_eq!(remap[0]["from"], "0000");
    assert_eq!(remap[0]["to"], "0011");

    let j = json(&["qrac", "pentakis"]);
    let r = &j["report"];
    assert!((r["quantum_value"].as_f64().unwrap() - 0.694041885592).abs() < 1e-9);
    assert_eq!(r["classical"]["num"], "5");
    assert_eq!(r["classical"]["den"], "8");
    assert_eq!(r["standard_classical"]["num"], "21");
    assert_eq!(r["standard_classical"]["den"], "32");
}

#[test]
fn diff_peaks_at_four() {
    let j = json(&["diff", "--max-n", "12"]);
    assert_eq!(j["report"]["argmax"]["n"], 4);
    let peak = j["report"]["argmax"]["diff"].as_f64().unwrap();
    assert!((peak - 0.113).abs() < 1e-3);
    let rows = j["report"]["rows"].as_array().unwrap();
    assert_eq!(rows[0]["n"], 3);
    assert_eq!(rows[0]["extrapolated"], false);
    assert_eq!(rows[1]["extrapolated"], true);
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(run(&["earac", "ghz", "--n", "4"]).status.code(), Some(2));
    assert_eq!(run(&["earac", "bell"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    // enumeration cap
    assert_eq!(
        run(&["classical", "enumerate", "--n", "6", "--cap", "10"])
            .status
            .code(),
        Some(3)
    );
}
