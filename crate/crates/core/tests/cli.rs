use std::path::Path;
use std::process::{Command, Output};

fn walkfit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkfit")).args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SIMULATE_IS: [&str; 17] = [
    "simulate", "--model", "is", "--D", "1", "--vb", "2", "--lbd", "0.05", "--ldb", "0.05", "--steps", "1000", "--dt",
    "1", "--seed", "7",
];

fn simulate_to(dir: &Path, out: &str) {
    let mut args = SIMULATE_IS.to_vec();
    args.extend(["--out", out]);
    let o = walkfit(&args, dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn simulate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    simulate_to(dir.path(), "a.csv");
    simulate_to(dir.path(), "b.csv");
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,x,y\n"));
    assert_eq!(text.lines().count(), 1002);
    assert!(!text.contains('\r'));

    let levy = |out: &str| {
        walkfit(
            &["simulate", "--model", "levy", "--tau0", "2", "--gamma", "1.5", "--v", "1", "--steps", "300", "--seed", "3", "--out", out],
            dir.path(),
        )
    };
    assert!(levy("l1.csv").status.success());
    assert!(levy("l2.csv").status.success());
    assert_eq!(std::fs::read(dir.path().join("l1.csv")).unwrap(), std::fs::read(dir.path().join("l2.csv")).unwrap());
}

#[test]
fn moments_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    simulate_to(dir.path(), "t.csv");
    let o = walkfit(&["moments", "--in", "t.csv", "--lags", "25", "--out", "m.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_s,m2,m4,n_pairs"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty() && rows.len() <= 25);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(cells.len(), 4);
        let t: f64 = cells[0].parse().unwrap();
        let n: u64 = cells[3].parse().unwrap();
        assert_eq!(n, 1001 - t as u64);
    }
}

#[test]
fn classify_is_data_gives_positive_gamma() {
    let dir = tempfile::tempdir().unwrap();
    simulate_to(dir.path(), "t.csv");
    let o = walkfit(&["classify", "--in", "t.csv", "--seed", "7", "--out", "r.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let gamma = v["gamma"].as_f64().unwrap();
    assert!(gamma > 0.0, "gamma = {gamma}");
    assert_eq!(v["label"], "Intermittent");

    let o = walkfit(
        &["fit", "--model", "levy", "--in", "t.csv", "--seed", "7", "--starts", "2", "--ensemble", "8", "--out", "f.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(v["model"], "LW");
    assert_eq!(v["config_echo"]["config"]["n_starts"], 2);
}

fn assert_error(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "{}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn exit_codes_and_error_lines() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("gap.csv"), "t,x,y\n0,0,0\n1,1,0\n3,2,0\n").unwrap();
    std::fs::write(d.join("header.csv"), "time,x,y\n0,0,0\n1,1,0\n").unwrap();
    std::fs::write(d.join("nan.csv"), "t,x,y\n0,0,0\n1,NaN,0\n2,1,0\n").unwrap();

    // Usage errors.
    assert_error(&walkfit(&["frobnicate"], d), 1);
    assert_error(&walkfit(&["simulate", "--model", "is", "--bogus", "1"], d), 1);
    let mut no_seed = SIMULATE_IS[..15].to_vec();
    no_seed.extend(["--out", "x.csv"]);
    assert_error(&walkfit(&no_seed, d), 1);
    assert_error(&walkfit(&["classify", "--in", "gap.csv", "--out", "r.json"], d), 1);

    // Validation errors, each with its own message.
    let mut messages = Vec::new();
    for f in ["gap.csv", "header.csv", "nan.csv"] {
        let o = walkfit(&["moments", "--in", f, "--out", "m.csv"], d);
        assert_error(&o, 1);
        messages.push(stderr(&o));
    }
    assert!(messages[0].contains("non-uniform"));
    assert!(messages[1].contains("header"));
    assert!(messages[2].contains("non-finite"));
    let mut bad_param = SIMULATE_IS.to_vec();
    bad_param[4] = "-1";
    bad_param.extend(["--out", "x.csv"]);
    assert_error(&walkfit(&bad_param, d), 1);
    assert!(!d.join("x.csv").exists());

    // Runtime failures.
    assert_error(&walkfit(&["moments", "--in", "missing.csv", "--out", "m.csv"], d), 2);
    simulate_to(d, "t.csv");
    assert_error(&walkfit(&["moments", "--in", "t.csv", "--out", "no/such/dir/m.csv"], d), 2);
}

#[test]
fn help_documents_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = walkfit(&["simulate", "--help"], dir.path());
    assert!(o.status.success());
    let help = String::from_utf8_lossy(&o.stdout);
    for flag in ["--model", "--D", "--vb", "--lbd", "--ldb", "--tau0", "--gamma", "--v", "--steps", "--dt", "--seed", "--out"] {
        assert!(help.contains(flag), "{flag}");
    }
    let o = walkfit(&["classify", "--help"], dir.path());
    let help = String::from_utf8_lossy(&o.stdout);
    for flag in ["--in", "--seed", "--lags", "--starts", "--ensemble", "--out"] {
        assert!(help.contains(flag), "{flag}");
    }
}
