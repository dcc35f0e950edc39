//! End-to-end runs of the `expfun` binary against the bundled model files.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn expfun(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expfun"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("EXPFUN_THREADS")
        .output()
        .unwrap()
}

fn run_ok(args: &[&str], out: &Path) -> String {
    let o = expfun(args, out);
    assert!(
        o.status.success(),
        "{args:?}: {}\n{}",
        o.status,
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn read_xy(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn gamma_density_peaks_at_its_mode() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("example2_gamma.json");
    let stdout = run_ok(
        &["solve", "--spec", spec.to_str().unwrap(), "--plot"],
        dir.path(),
    );
    for key in ["residual_max", "covered_mass", "left_gap_bound"] {
        assert!(stdout.contains(key), "{stdout}");
    }
    let rows = read_xy(&dir.path().join("density.csv"));
    let (mode, _) = rows
        .iter()
        .copied()
        .fold((0.0, 0.0), |a, r| if r.1 > a.1 { r } else { a });
    // Gamma(3/2, 2): mode (s - 1)/β
    assert!((mode - 0.25).abs() < 5e-3, "mode {mode}");
    assert!(fs::read_to_string(dir.path().join("density.svg"))
        .unwrap()
        .contains("<polyline"));
}

#[test]
fn trivial_process_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(
        &spec,
        r#"{"drift": 0.0, "kill": 0.0, "tail": {"variant": "zero"}}"#,
    )
    .unwrap();
    let o = expfun(
        &["solve", "--spec", spec.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(
        err.starts_with("error: kind=invalid_spec message=\""),
        "{err}"
    );
    assert!(err.contains("does not drift to -infinity"), "{err}");
}

#[test]
fn bad_flags_and_threads_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("example1_uniform.json");
    let o = expfun(
        &["solve", "--spec", spec.to_str().unwrap(), "--delta", "1.5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_expfun"))
        .args(["solve", "--spec", spec.to_str().unwrap()])
        .arg("--out")
        .arg(dir.path())
        .env("EXPFUN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: kind=config"));
}

#[test]
fn uniform_density_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("example1_uniform.json");
    run_ok(&["solve", "--spec", spec.to_str().unwrap()], dir.path());
    let rows = read_xy(&dir.path().join("density.csv"));
    let keep = rows.len() - rows.len().div_ceil(100);
    let worst = rows[..keep]
        .iter()
        .map(|r| (r.1 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = config("example3.json");
    for dir in [&a, &b] {
        run_ok(&["validate", "--spec", spec.to_str().unwrap()], dir.path());
        run_ok(
            &[
                "mc",
                "--spec",
                spec.to_str().unwrap(),
                "--mc-samples",
                "20000",
                "--seed",
                "9",
            ],
            &dir.path().join("mc"),
        );
    }
    for file in [
        "density.csv",
        "validation.csv",
        "validation.json",
        "mc/samples.csv",
        "mc/ks.csv",
    ] {
        let (x, y) = (fs::read(a.path().join(file)), fs::read(b.path().join(file)));
        assert!(x.is_ok(), "{file} missing");
        assert_eq!(x.unwrap(), y.unwrap(), "{file}");
    }
}

#[test]
fn stable_moments_match_recursion() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("stable_drift.json");
    run_ok(
        &["moments", "--spec", spec.to_str().unwrap(), "--order", "5"],
        dir.path(),
    );
    let text = fs::read_to_string(dir.path().join("moments.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!((r[3] / r[2] - 1.0).abs() < 5e-3, "{r:?}");
        assert!((r[1] / r[2] - 1.0).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn dual_of_gamma_is_inverse_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("example2_gamma.json");
    let stdout = run_ok(
        &["transform", "--dual", "--spec", spec.to_str().unwrap()],
        dir.path(),
    );
    assert!(stdout.contains("q_star         2.5"), "{stdout}");
    let rows = read_xy(&dir.path().join("dual_density.csv"));
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    // 1/Z with Z ~ Gamma(1/2, rate 2)
    let inverse_gamma = |y: f64| (2.0 / PI).sqrt() * y.powf(-1.5) * (-2.0 / y).exp();
    let worst = rows
        .iter()
        .filter(|r| (0.5..=20.0).contains(&r.0))
        .map(|r| (r.1 - inverse_gamma(r.0)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 2e-2, "{worst}");
}

#[test]
fn tilted_drift_is_beta() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("example1_drift.json");
    run_ok(
        &["transform", "--rho", "1", "--spec", spec.to_str().unwrap()],
        dir.path(),
    );
    let model = fs::read_to_string(dir.path().join("model.json")).unwrap();
    assert!(model.contains("\"tilted\""));
    let rows = read_xy(&dir.path().join("density.csv"));
    let keep = rows.len() - rows.len().div_ceil(100);
    // Beta(2, 2)
    let worst = rows[..keep]
        .iter()
        .map(|r| (r.1 - 6.0 * r.0 * (1.0 - r.0)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn half_gaussian_ratio_reaches_root_pi() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("example2_half_gaussian.json");
    let stdout = run_ok(
        &["validate", "--spec", spec.to_str().unwrap(), "--plot"],
        dir.path(),
    );
    assert!(stdout.contains("small_x_ratio"));
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validation.json")).unwrap())
            .unwrap();
    let ratio = reports
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check"] == "small_x_ratio")
        .unwrap();
    assert!((ratio["oracle"].as_f64().unwrap() - PI.sqrt()).abs() < 1e-6);
    assert_eq!(ratio["passed"], true);
    for file in ["ratio.csv", "ratio.svg", "difference.svg", "difference.csv"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
}

#[test]
fn unresolved_limit_exits_with_validation_code() {
    // 3000 cells stop near x = 1e-2, well short of the ratio's limit
    let dir = tempfile::tempdir().unwrap();
    let spec = config("stretched_n1.json");
    let o = expfun(
        &[
            "validate",
            "--spec",
            spec.to_str().unwrap(),
            "--cells",
            "3000",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error: kind=validation_failed"), "{err}");
    assert!(dir.path().join("validation.txt").exists());
}

#[test]
fn increasing_mode_histogram_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("compound_poisson_killed.json");
    let stdout = run_ok(
        &["mc", "--increasing", "--spec", spec.to_str().unwrap()],
        dir.path(),
    );
    assert!(stdout.contains("monotone_histogram"));
    assert_eq!(
        fs::read_to_string(dir.path().join("histogram.csv"))
            .unwrap()
            .lines()
            .count(),
        25
    );
}
