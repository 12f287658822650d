use std::process::{Command, Output};

fn ncairy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncairy"))
        .args(args)
        .env_remove("NCAIRY_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn det_csv_header_and_agreement() {
    let o = ncairy(&["det", "--shifts", "-0.2,0.3", "--coupling", "0.5,0.2,-0.3,0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,sign,route,re_nystrom,im_nystrom,re_painleve,im_painleve,difference,nodes_used,est_error,converged"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "airy2");
    assert!(row[3].contains("e-") || row[3].contains("e+"));
    let diff: f64 = row[7].parse().unwrap();
    assert!(diff < 1e-6);
    assert!(lines.next().is_none());
    assert!(!out.contains('\r'));
}

#[test]
fn det_json_parses() {
    let o = ncairy(&["det", "--kind", "airy", "--sign", "+1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &v[0];
    assert_eq!(row["kind"], "airy");
    assert_eq!(row["converged"], true);
    let n = row["re_nystrom"].as_f64().unwrap();
    let p = row["re_painleve"].as_f64().unwrap();
    assert!((n - p).abs() < 1e-6 && n > 1.0);
}

#[test]
fn tight_tolerance_fails_with_code_one() {
    let o = ncairy(&["det", "--nodes", "6", "--tol", "1e-15", "--shifts", "-1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("routes differ"));
}

#[test]
fn bad_input_is_code_two() {
    for args in [
        &["det", "--sign", "3"][..],
        &["det", "--shifts", "0,1", "--r", "3"],
        &["det", "--coupling", "1,2,3"],
        &["f2", "--from", "2", "--to", "-2"],
        &["frobnicate"],
        &["det", "--config", "/nonexistent/ncairy.conf"],
    ] {
        let o = ncairy(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn f2_table_and_out_file() {
    let dir = std::env::temp_dir().join(format!("ncairy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f2.csv");
    let o = ncairy(&["f2", "--from", "-2", "--to", "2", "--step", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,F2");
    assert_eq!(lines.len(), 6);
    let (x, f) = lines[3].split_once(',').unwrap();
    assert_eq!(x, "0.000000000000e+00");
    assert_eq!(f.len(), "9.693728283553e-01".len());
    assert!((f.parse::<f64>().unwrap() - 0.969_372_828_355).abs() < 1e-11);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_then_flags() {
    let dir = std::env::temp_dir().join(format!("ncairy-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.conf");
    std::fs::write(&path, "format = json\nshifts = 0.4\ncoupling = 0.7\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ncairy"))
        .args(["det", "--route", "nystrom"])
        .env("NCAIRY_CONFIG", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v[0]["re_painleve"].is_null());
    let o = ncairy(&["det", "--route", "nystrom", "--config", path.to_str().unwrap(), "--format", "csv"]);
    assert!(stdout(&o).starts_with("kind,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn hm_solve_reports_pole() {
    let o = ncairy(&["hm-solve", "--coupling", "1.3", "--from", "-3", "--to", "0", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pole"));
    let out = stdout(&o);
    assert!(out.starts_with("S,re_b_11,im_b_11,re_db_11,im_db_11\n"));
    assert!(out.lines().count() >= 2);
}

#[test]
fn scan_finds_crossing_above_one() {
    let o = ncairy(&["scan", "--coupling", "1.3", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sign change at s ="));
    let o = ncairy(&["scan", "--coupling", "1.0", "--step", "0.5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no sign change"));
}

#[test]
fn verify_single_check() {
    let o = ncairy(&["verify", "--only", "special_functions"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS special_functions"));
    assert_eq!(ncairy(&["verify", "--only", "nope"]).status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        &["verify", "--only", "contour_equivalence", "--seed", "11", "--format", "json"][..],
        &["det", "--kind", "contour", "--shifts", "0.1,-0.2", "--coupling", "0.3,0.1,-0.2,0.5"],
        &["f1", "--from", "-1", "--to", "1"],
    ] {
        let a = ncairy(args);
        let b = ncairy(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
