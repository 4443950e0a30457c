use std::path::Path;
use std::process::{Command, Output};

fn flho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flho"))
        .args(args)
        .env_remove("FLHO_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn floats(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn spectrum_l2() {
    let o = flho(&["spectrum", "--l", "2", "--K", "1", "--kappa", "1", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 6);
    assert_eq!(floats(&out, "energy"), vec![1.0, 1.0, 2.5, 2.5, 3.0]);
    assert_eq!(column(&out, "multiplicity"), vec!["2", "2", "2", "2", "1"]);
    assert!(!out.contains('\r'));
}

#[test]
fn algebra_check_h1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h1.json");
    std::fs::write(&file, r#"{"dim": 3, "entries": [[0, 1, 2, 1.0]]}"#).unwrap();
    let o = flho(&["algebra", "check", "--file", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(column(&out, "verdict"), vec!["compound"]);
    assert_eq!(floats(&out, "killing_det"), vec![0.0]);

    let o = flho(&["algebra", "check", "--file", file.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["rows"][0]["verdict"], "compound");
}

#[test]
fn algebra_flex_and_contract() {
    let o = flho(&["algebra", "flex", "--hbar", "1", "--hbar1", "1", "--hbar2", "1"]);
    assert_eq!(column(&stdout(&o), "verdict"), vec!["semisimple"]);
    assert_eq!(floats(&stdout(&o), "killing_det"), vec![-8.0]);

    let o = flho(&["algebra", "contract", "--steps", "8"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let dets = floats(&out, "abs_killing_det");
    assert_eq!(dets.len(), 8);
    assert!(dets.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(column(&out, "verdict").last().unwrap(), "compound");
}

#[test]
fn limit_matches_prediction() {
    let o = flho(&["limit", "--l", "10000", "--levels", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let delta = floats(&out, "delta");
    let pred = floats(&out, "delta_predicted");
    let num = floats(&out, "delta_numerical");
    assert_eq!(delta.len(), 6);
    for ((d, p), n) in delta.iter().zip(&pred).zip(&num) {
        assert!((d - p).abs() < 1e-12);
        assert!((n - p).abs() < 1e-8);
    }
    let o = flho(&["limit", "--l", "100", "--levels", "11"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        vec!["spectrum", "--l", "30", "--K", "1.5", "--kappa", "0.7", "--vectors", "3"],
        vec!["sweep", "--l", "50", "--kappa-grid", "LOG:-2:1:0.5"],
        vec!["uncertainty", "--l", "20", "--K", "1", "--kappa", "1", "--state", "random", "--seed", "42"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut bytes = Vec::new();
        for (threads, rep) in [("1", 0), ("4", 1)] {
            let path = dir.path().join(format!("run{i}_{rep}.csv"));
            let mut a = args.clone();
            a.extend(["--threads", threads, "--out", path.to_str().unwrap()]);
            let o = flho(&a);
            assert!(o.status.success(), "{}", stderr(&o));
            bytes.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "run {i}");
    }
    let a = flho(&["uncertainty", "--l", "20", "--K", "1", "--kappa", "1", "--state", "random", "--seed", "1"]);
    let b = flho(&["uncertainty", "--l", "20", "--K", "1", "--kappa", "1", "--state", "random", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn sweep_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = flho(&[
        "sweep", "--l", "100", "--K", "1", "--kappa-grid", "LOG:-3:0:1", "--plot", "--out", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = std::fs::read_to_string(dir.path().join("sweep.gp")).unwrap();
    let data = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(data.lines().count(), 5);
    assert!(script.contains("set datafile separator \",\""));
    assert!(script.contains("set logscale x"));
    assert!(script.starts_with("# flho sweep\n"));
    // every quoted file in the script is the CSV just written
    let quoted: Vec<&str> = script.split('"').skip(1).step_by(2).collect();
    let files: Vec<&&str> = quoted.iter().filter(|q| q.ends_with(".csv")).collect();
    assert!(!files.is_empty());
    assert!(files.iter().all(|f| Path::new(f) == csv));
    assert!(script.lines().any(|l| l.starts_with("plot ")));
}

#[test]
fn every_plot_references_its_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("so3.json");
    std::fs::write(&file, r#"{"dim": 3, "entries": [[0, 1, 2, 1], [1, 2, 0, 1], [2, 0, 1, 1]]}"#).unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("spectrum", vec!["spectrum", "--l", "5", "--K", "1", "--kappa", "2"]),
        ("ground", vec!["ground", "--l", "5", "--K", "1", "--kappa", "2"]),
        ("uncertainty", vec!["uncertainty", "--l", "5", "--K", "1", "--kappa", "2"]),
        ("limit", vec!["limit", "--l", "100", "--levels", "3"]),
        ("interact", vec!["interact", "--l", "10", "--K", "1", "--kappa", "1", "--n1", "1", "--n2", "1"]),
        ("check", vec!["algebra", "check", "--file", file.to_str().unwrap()]),
        ("contract", vec!["algebra", "contract", "--steps", "4"]),
        ("constants", vec!["constants", "--hbar", "1", "--hbar1", "0.1", "--hbar2", "0.1", "--mass", "1", "--stiffness", "1"]),
    ];
    for (name, mut args) in cases {
        let csv = dir.path().join(format!("{name}.csv"));
        let csv_s = csv.to_str().unwrap().to_string();
        args.extend(["--plot", "--out", &csv_s]);
        let o = flho(&args);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let script = std::fs::read_to_string(csv.with_extension("gp")).unwrap();
        let quoted: Vec<&str> = script.split('"').skip(1).step_by(2).collect();
        assert!(quoted.contains(&csv_s.as_str()), "{name}");
        assert!(quoted.iter().filter(|q| q.contains(".csv")).all(|q| *q == csv_s), "{name}");
    }
}

#[test]
fn spectrum_vectors_side_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spec.csv");
    let o = flho(&["spectrum", "--l", "3", "--K", "1", "--kappa", "0.5", "--vectors", "2", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = std::fs::read_to_string(dir.path().join("spec.vectors.csv")).unwrap();
    assert_eq!(v.lines().count(), 1 + 2 * 7);
    let res = floats(&v, "residual");
    assert!(res.iter().all(|r| *r < 1e-10));
}

#[test]
fn exit_codes_and_diagnostics() {
    let usage = flho(&["spectrum", "--l", "2", "--K", "1"]);
    assert_eq!(usage.status.code(), Some(1));
    let err = stderr(&usage);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("flho: error code=1 kind="), "{err}");

    let bad_flag = flho(&["spectrum", "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    assert_eq!(stderr(&bad_flag).lines().count(), 1);
    assert!(stderr(&bad_flag).starts_with("flho: usage code=1"));

    let io = flho(&["algebra", "check", "--file", "/nonexistent/h1.json"]);
    assert_eq!(io.status.code(), Some(3));
    assert!(stderr(&io).starts_with("flho: error code=3 kind=io"));

    let unwritable = flho(&["spectrum", "--l", "2", "--K", "1", "--kappa", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(unwritable.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 3, "entries": [[0, 1, 2, 1], [1, 2, 0, 1], [2, 0, 1, 1], [0, 1, 0, 0.5]]}"#).unwrap();
    let jac = flho(&["algebra", "check", "--file", bad.to_str().unwrap()]);
    assert_eq!(jac.status.code(), Some(1));
    assert!(stderr(&jac).contains("kind=jacobi_violation"), "{}", stderr(&jac));

    let ok = flho(&["ground", "--l", "10", "--K", "1", "--kappa", "0.5"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn threads_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_flho"))
        .args(["sweep", "--l", "20", "--kappa-grid", "LIN:0:2:0.5"])
        .env("FLHO_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_flho"))
        .args(["sweep", "--l", "20", "--kappa-grid", "LIN:0:2:0.5"])
        .env("FLHO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn ground_and_uncertainty_reports() {
    let o = flho(&["ground", "--l", "100", "--K", "1", "--kappa", "0.001"]);
    let out = stdout(&o);
    assert_eq!(column(&out, "regime"), vec!["soft"]);
    let r = floats(&out, "e0_over_formula")[0];
    assert!((r - 1.0).abs() < 0.01);

    let o = flho(&["uncertainty", "--l", "100", "--K", "1", "--kappa", "1", "--state", "lz-top"]);
    let ratio = floats(&stdout(&o), "product_over_hbar_half")[0];
    assert!((ratio - 1.0).abs() < 1e-10);

    let o = flho(&["uncertainty", "--l", "8", "--K", "1", "--kappa", "2", "--state", "index:3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = flho(&["uncertainty", "--l", "8", "--K", "1", "--kappa", "2", "--state", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn interact_regimes() {
    let o = flho(&["interact", "--l", "100", "--K", "1", "--kappa", "1", "--n1", "1", "--n2", "1"]);
    let out = stdout(&o);
    assert!((floats(&out, "delta_numerical")[0] + 1.0).abs() < 1e-9);
    assert!((floats(&out, "delta_formula")[0] + 1.0).abs() < 1e-12);
    let o = flho(&["interact", "--l", "100", "--K", "1", "--kappa", "0.001", "--n1", "1", "--n2", "1"]);
    let out = stdout(&o);
    assert_eq!(column(&out, "regime"), vec!["soft"]);
    assert!(floats(&out, "delta_numerical")[0] > 0.0);
}

#[test]
fn matrix_export() {
    let o = flho(&["matrix", "--l", "1", "--generator", "x"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "m,m1,m0,m-1");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r0 = floats(&out, "m0");
    assert!((r0[0] - h).abs() < 1e-15 && r0[1] == 0.0 && (r0[2] - h).abs() < 1e-15);
}
