use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lanesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanesim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_writes_snapshots_series_and_metadata() {
    let out = tempfile::tempdir().unwrap();
    let cfg = config("two_lane_forward.toml");
    let res = lanesim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let snap = fs::read_to_string(out.path().join("two_lane_forward_t0p7500.csv")).unwrap();
    let lines: Vec<&str> = snap.lines().collect();
    assert_eq!(lines.len(), 201);
    assert_eq!(lines[0].split(',').count(), 3);
    assert!(out.path().join("two_lane_forward_t1p5000.csv").exists());

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("two_lane_forward_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["name"], "two_lane_forward");
    assert!(meta["steps"].as_u64().unwrap() > 0);
    let files = meta["files"].as_array().unwrap();
    assert_eq!(files.len(), 4);
    let echo = fs::read_to_string(out.path().join("two_lane_forward_config.toml")).unwrap();
    assert!(echo.contains("periodic"));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("bump_nonlocal_flux.toml");
    for d in [&a, &b] {
        let res = lanesim(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn preset_runs_every_case() {
    let out = tempfile::tempdir().unwrap();
    let res = lanesim(&[
        "preset",
        "--name",
        "source_kernel_cases",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(stdout.lines().count(), 3);
    let unknown = lanesim(&["preset", "--name", "nope", "--out", out.path().to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn verify_reports_passing_checks() {
    let cfg = config("two_lane_forward.toml");
    let res = lanesim(&["verify", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.success());
    let reports: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    let checks = reports[0]["checks"].as_array().unwrap();
    for name in [
        "invariance",
        "conservation",
        "entropy",
        "bv_bound",
        "time_lipschitz",
        "cfl",
    ] {
        let c = checks.iter().find(|c| c["check_name"] == name).unwrap();
        assert_eq!(c["pass"], true, "{name}");
    }
}

#[test]
fn bad_configs_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_key.toml", "t_final = 1.0\nbogus = 3\n", "bogus"),
        (
            "bad_law.toml",
            &fs::read_to_string(config("two_lane_forward.toml"))
                .unwrap()
                .replace("linear:a=1.5", "cubic"),
            "lanes[0].velocity",
        ),
        (
            "symmetric_flux.toml",
            &fs::read_to_string(config("bump_nonlocal_flux.toml")).unwrap().replacen(
                "linear_forward",
                "linear_symmetric",
                1,
            ),
            "flux",
        ),
    ];
    for (name, text, needle) in cases {
        let p = write(dir.path(), name, text);
        let res = lanesim(&[
            "simulate",
            "--config",
            p.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&res.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let missing = lanesim(&["verify", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}
