use std::process::{Command, Output};

fn logcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logcount"))
        .args(args)
        .env_remove("LOGCOUNT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = logcount(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows split into cells, without header and metadata.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(csv: &str, i: usize) -> Vec<f64> {
    rows(csv).iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn coeffs_format() {
    let csv = stdout(&["coeffs", "--t-max", "1"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,coeff_L,coeff_R,coeff_f1"));
    assert_eq!(lines.next(), Some("0,1,1,1"));
    assert!(lines.next().unwrap().starts_with("# version="));
    assert_eq!(lines.next(), None);
}

#[test]
fn coeffs_match_for_large_n_preset() {
    let csv = stdout(&["coeffs", "--gamma", "-0.51", "--delta-log", "0.612", "--t-max", "2"]);
    assert_eq!(rows(&csv)[1], ["1", "0.5", "0.5", "0.5"]);
}

#[test]
fn sensitivity_value_and_divergence() {
    let csv = stdout(&["sensitivity", "--delta-log", "0"]);
    let d2 = column(&csv, 0)[0];
    assert!((d2 - 16.587_489_214_952_586).abs() < 1e-9, "{d2}");

    let out = logcount(&["sensitivity", "--gamma", "-0.5", "--delta-log", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validation_exit_codes() {
    for args in [
        &["variance", "--mechanism", "nope", "--t-max", "4"][..],
        &["variance", "--eps", "-1", "--t-max", "4"],
        &["variance", "--t-max", "0"],
        &["simulate", "--input", "zeros:x"],
        &["coeffs", "--gamma", "nan"],
        &["frobnicate"],
    ] {
        assert_eq!(logcount(args).status.code(), Some(2), "{args:?}");
    }
    let out = logcount(&["simulate", "--input", "file:/nonexistent/input.txt"]);
    assert!(!out.status.success());
}

#[test]
fn variance_grid_is_increasing_and_round_trips() {
    let csv = stdout(&["variance", "--mechanism", "logmatrix-fast", "--t-max", "1000"]);
    let ts = column(&csv, 0);
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*ts.last().unwrap(), 1000.0);
    for row in rows(&csv) {
        let v: f64 = row[1].parse().unwrap();
        assert_eq!(format!("{v:?}"), row[1]);
    }
}

#[test]
fn compare_lists_mechanisms_deterministically() {
    let args = ["compare", "--t-max", "4096"];
    let csv = stdout(&args);
    assert_eq!(csv, stdout(&args));
    for id in ["logmatrix-fast", "logmatrix-balanced", "logmatrix-large-n", "sqrt", "hybrid-indep", "hybrid-log"] {
        assert!(rows(&csv).iter().any(|r| r[1] == id), "{id}");
    }
    assert!(csv.lines().last().unwrap().contains("reuse=finished-epochs"));
}

#[test]
fn compare_shows_epoch_jumps_only_for_hybrid() {
    let csv = stdout(&["compare", "--mechanisms", "logmatrix,hybrid-indep", "--t-max", "16384"]);
    let series = |id: &str| -> Vec<(u64, f64)> {
        rows(&csv)
            .iter()
            .filter(|r| r[1] == id)
            .map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap()))
            .collect()
    };
    let jump = |s: &[(u64, f64)], k: u32| {
        let at = |t: u64| s.iter().find(|p| p.0 == t).unwrap().1;
        at(1 << k) / at((1 << k) - 1)
    };
    let log = series("logmatrix");
    let hybrid = series("hybrid-indep");
    for k in 8..=14 {
        assert!((jump(&log, k) - 1.0).abs() < 0.02, "logmatrix k = {k}");
        assert!((jump(&hybrid, k) - 1.0).abs() > 0.05, "hybrid k = {k}");
    }
}

#[test]
fn compare_svg_and_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_logcount"))
        .args(["compare", "--t-max", "256", "--format", "svg", "-o", "plots/fig.svg"])
        .env("LOGCOUNT_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let svg = std::fs::read_to_string(dir.path().join("plots/fig.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("hybrid-log"));
}

#[test]
fn simulate_tracks_true_sums() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.txt");
    std::fs::write(&input, "1\n0\n0.5\n# comment\n1\n").unwrap();
    let spec = format!("file:{}", input.display());
    for mech in ["logmatrix", "approx", "hybrid-indep", "hybrid-log"] {
        let args = ["simulate", "--mechanism", mech, "--input", spec.as_str(), "--seed", "7"];
        let csv = stdout(&args);
        assert_eq!(csv, stdout(&args), "{mech}");
        assert_eq!(column(&csv, 2), [1.0, 1.0, 1.5, 2.5]);
        assert_eq!(column(&csv, 0), [1.0, 2.0, 3.0, 4.0]);
    }
    let out = logcount(&["simulate", "--input", "zeros:3", "--mechanism", "sqrt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_out_of_range_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.txt");
    std::fs::write(&input, "1\n2\n").unwrap();
    let out = logcount(&["simulate", "--input", &format!("file:{}", input.display())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_with_side_information_matches_plain_run() {
    let plain = stdout(&["simulate", "--input", "ones:300", "--seed", "4"]);
    let hinted = stdout(&["simulate", "--input", "ones:300", "--seed", "4", "--n0", "100", "--c-factor", "2"]);
    assert_eq!(rows(&plain), rows(&hinted));
}

#[test]
fn approx_error_shrinks() {
    let csv = stdout(&["approx-error", "--delta-log", "0", "--K", "4", "--t-max", "65536"]);
    let ts = column(&csv, 0);
    assert!(ts[0] > 16.0);
    let err = column(&csv, 3);
    assert!(err.last().unwrap() < &1e-4, "{err:?}");
    assert!(err.last().unwrap() < &err[0]);
}
