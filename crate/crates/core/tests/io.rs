use walkfit::io::{read_moments, read_report, read_trajectory, write_moments, write_report, write_trajectory};
use walkfit::*;

#[test]
fn trajectory_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (i, dt) in [1.0, 0.1, 1.0 / 3.0, 0.004].into_iter().enumerate() {
        let traj = if i % 2 == 0 {
            simulate_intermittent(&IsParams::new(1.3, 2.7, 0.1, 0.2).unwrap(), 500, dt, i as u64, None).unwrap()
        } else {
            simulate_levy(&LwParams::new(2.0, 1.3, 0.9).unwrap(), 500, dt, i as u64).unwrap()
        };
        let path = dir.path().join(format!("t{i}.csv"));
        write_trajectory(&traj, &path).unwrap();
        let back = read_trajectory(&path).unwrap();
        assert_eq!(back.xs(), traj.xs());
        assert_eq!(back.ys(), traj.ys());
        assert!((back.dt() - dt).abs() <= 1e-15 * dt);
    }
}

#[test]
fn moments_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate_levy(&LwParams::new(3.0, 1.1, 1.7).unwrap(), 3000, 0.5, 2).unwrap();
    let curve = empirical_moments(&traj, &LagGrid::default_for(&traj).unwrap()).unwrap();
    let path = dir.path().join("m.csv");
    write_moments(&curve, &path).unwrap();
    assert_eq!(read_moments(&path, 0.5).unwrap(), curve);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t_s,m2,m4,n_pairs\n"));
}

#[test]
fn report_round_trip_and_label_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate_intermittent(&IsParams::new(1.0, 2.0, 0.05, 0.05).unwrap(), 1500, 1.0, 8, None).unwrap();
    let cfg = FitConfig {
        n_starts: 2,
        max_iters: 30,
        ensemble_size: 4,
        ..FitConfig::default()
    };
    let report = classify_trajectory(&traj, &LagGrid::default_for(&traj).unwrap(), &cfg, 1).unwrap();
    let path = dir.path().join("r.json");
    write_report(&report, &path).unwrap();
    let back: ClassificationReport = read_report(&path).unwrap();
    assert_eq!(back, report);

    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let gamma = v["gamma"].as_f64().unwrap();
    let expected = if gamma > 0.0 { "Intermittent" } else { "Levy" };
    assert_eq!(v["label"], expected);
    assert_eq!(v["format_version"], 1);
}

#[test]
fn unreadable_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let missing = read_trajectory(dir.path().join("nope.csv")).unwrap_err();
    assert!(!missing.is_input_error());
    assert!(missing.to_string().contains("nope.csv"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert!(read_report::<FitReport>(&bad).unwrap_err().is_input_error());
}
