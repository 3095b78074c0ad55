use std::process::{Command, Output};

use hypflow::TrajectoryExport;

fn hypflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypflow")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn soliton_horocycle_to_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let o = hypflow(&[
        "soliton",
        "--vtilde",
        "0,1,0",
        "--a",
        "1",
        "--tau0",
        "1",
        "--nu0",
        "0",
        "--mu0",
        "0",
        "--s-max",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("HOROCYCLE"));
    let e = TrajectoryExport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((e.vtilde, e.a, e.epsilon), ([0.0, 1.0, 0.0], 1.0, 1));
    assert_eq!(e.samples.len(), 2001);
    for p in &e.samples {
        assert!((p.tau - 1.0).abs() < 1e-9 && (p.nu + p.s).abs() < 1e-8 && (p.mu - p.s).abs() < 1e-8);
    }
}

#[test]
fn soliton_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, rep) = (dir.path().join("t.csv"), dir.path().join("r.json"));
    let o =
        hypflow(&["soliton", "--preset", "fig5", "--out", csv.to_str().unwrap(), "--report", rep.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = TrajectoryExport::samples_from_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 6001);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["case_label"], "TIMELIKE_4_7");
    assert_eq!(report["consistent"], true);
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let o = hypflow(&["soliton", "--vtilde", "0,1", "--tau0", "1", "--nu0", "0", "--mu0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--vtilde"));

    let o = hypflow(&["soliton", "--vtilde", "0,1,0", "--tau0", "2", "--nu0", "0", "--mu0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--tau0"));

    let o = hypflow(&["soliton", "--vtilde", "0,1,0", "--a", "-1", "--tau0", "1", "--nu0", "0", "--mu0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--a"));

    let o = hypflow(&["figure", "fig8"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(hypflow(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(hypflow(&["verify", "--only", "13"]).status.code(), Some(2));
}

#[test]
fn figure_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    for p in [&a, &b] {
        let o = hypflow(&["figure", "fig5", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    assert!(String::from_utf8(x).unwrap().contains("TIMELIKE_4_7"));
}

#[test]
fn flow_and_oracle() {
    let o = hypflow(&["flow", "--preset", "fig1", "--s-max", "10", "--t-max", "0.2", "--dt", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("t,csf_residual,curvature_profile_distance,length\n"));
    assert_eq!(csv.lines().count(), 4);

    let o = hypflow(&["oracle", "--preset", "fig1", "--s-max", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["hausdorff"].as_f64().unwrap() <= 1e-3);

    // a check failure, not a usage error
    let o = hypflow(&["oracle", "--preset", "fig1", "--s-max", "4", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hypflow(&["oracle", "--preset", "fig1", "--s-max", "4", "--scheme", "explicit"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stability"));
}

#[test]
fn classify_sweep_reports_every_case() {
    let o = hypflow(&["classify-sweep", "--per-type", "5", "--a", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 16);
    assert!(table.lines().skip(1).all(|l| l.contains("\ttrue\t")));
}

#[test]
fn verify_subset() {
    let o = hypflow(&["verify", "--only", "1,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().filter(|l| l.ends_with("PASS")).count(), 2);
    assert!(out.contains("2/2 criteria passed"));
}
