use std::process::Command;

use serde_json::Value;

fn vvmf(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_vvmf")).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn json(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn dim_m0_example() {
    let (code, out, _) = vvmf(&["dim-m0", "--c", "33", "--h", "9/4", "--k1", "-4"]);
    assert_eq!(code, 0);
    let v = &json(&out)[0];
    assert_eq!(v["integral"], true);
    assert_eq!(v["rounded"], 565760);
    assert!(v["value"].as_str().unwrap().starts_with("565760.000000"));
    assert_eq!(vvmf(&["dim-m0", "--c", "33", "--h", "9/4", "--k1", "0"]).0, 1);
}

#[test]
fn solve_leading_rows() {
    let (code, out, _) = vvmf(&["solve", "--rank", "4", "--exponents", "1/40,31/40,-1/40,9/40", "--terms", "3"]);
    assert_eq!(code, 0);
    let v = &json(&out)[0];
    let rows: Vec<Vec<&str>> = v["coordinates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["coefficients"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect())
        .collect();
    assert_eq!(rows, [["1", "0", "1"], ["1", "1", "1"], ["1", "1", "1"], ["1", "1", "2"]]);
    assert_eq!(v["mlde_residual_zero"], true);
}

#[test]
fn hard_hexagon_table() {
    let (code, out, _) = vvmf(&["table", "hard-hexagon", "--terms", "10"]);
    assert_eq!(code, 0);
    let v = &json(&out)[0];
    assert_eq!(v["reference_mismatches"].as_array().unwrap().len(), 0);
    assert_eq!(v["coordinates"][0]["coefficients"][9], "7");
}

#[test]
fn exit_codes() {
    assert_eq!(vvmf(&["frobnicate"]).0, 2);
    assert_eq!(vvmf(&["solve", "--rank", "4", "--exponents", "1/40,x", "--terms", "3"]).0, 2);
    assert_eq!(vvmf(&["solve", "--rank", "4", "--exponents", "1/40,2/40,3/40,4/40"]).0, 1);
    assert_eq!(vvmf(&["--help"]).0, 0);
}

#[test]
fn output_is_deterministic_and_formats_agree() {
    let args = ["table", "rank4-quasi"];
    let (_, a, _) = vvmf(&args);
    let (_, b, _) = vvmf(&args);
    assert_eq!(a, b);
    let (_, csv, _) = vvmf(&["--format", "csv", "table", "rank4-quasi"]);
    let v = &json(&a)[0];
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("record,path,value"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.contains(&"0,coordinates.0.coefficients.2,120786"));
    assert_eq!(v["coordinates"][0]["coefficients"][2], "120786");
    let (code, pretty, _) = vvmf(&["--format", "pretty", "family", "gamma0-3", "--lambda", "-7/12", "--terms", "4"]);
    assert_eq!(code, 0);
    assert!(pretty.contains("approx"));
}

#[test]
fn check_and_scan_from_files() {
    let dir = std::env::temp_dir().join(format!("vvmf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let b = vvmf::families::builtin_instance("table3-row-1", 256).unwrap();
    let x = b.solve(8).unwrap();
    let cand = dir.join("cand.json");
    let s = dir.join("s.json");
    std::fs::write(&cand, x.to_json().to_string()).unwrap();
    std::fs::write(&s, b.smatrix.to_json().to_string()).unwrap();
    let (code, out, _) = vvmf(&["check", "--candidate", cand.to_str().unwrap(), "--smatrix", s.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)[0]["report"]["conformal"], true);

    let cfg = dir.join("scan.cfg");
    std::fs::write(
        &cfg,
        "# tiny\nneighborhood = -33/40,17/40,23/40,33/40;1;40\nn_terms = 10\ndenominator_check = false\n",
    )
    .unwrap();
    let (code, out, _) = vvmf(&["--workers", "2", "scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let recs = json(&out);
    assert_eq!(recs[0]["record"], "config");
    assert_eq!(recs.last().unwrap()["record"], "summary");
    assert_eq!(vvmf(&["scan", "--config", dir.join("missing").to_str().unwrap()]).0, 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn settings_file_and_flag_override() {
    let p = std::env::temp_dir().join(format!("vvmf-settings-{}", std::process::id()));
    std::fs::write(&p, "format = csv\nn_terms = 5\n").unwrap();
    let ps = p.to_str().unwrap();
    let (code, out, _) = vvmf(&["--settings", ps, "solve", "--rank", "2", "--exponents", "-1/60,11/60"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("record,path,value"));
    assert!(out.contains("0,coordinates.0.coefficients.4,"));
    assert!(!out.contains("0,coordinates.0.coefficients.5,"));
    let (_, out, _) = vvmf(&["--settings", ps, "--format", "json", "dim-m0", "--c", "33", "--h", "9/4", "--k1", "-4"]);
    assert!(out.starts_with('{'));
    std::fs::write(&p, "colour = blue\n").unwrap();
    assert_eq!(vvmf(&["--settings", ps, "dim-m0", "--c", "33", "--h", "9/4", "--k1", "-4"]).0, 2);
    std::fs::remove_file(&p).ok();
}
