use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &[
    "--set",
    "state=window",
    "--set",
    "n0=3",
    "--set",
    "width=1",
    "--set",
    "gbar=1",
    "--set",
    "phi=0.3",
    "--set",
    "grid_lo=-8",
    "--set",
    "grid_hi=8",
    "--set",
    "grid_count=41",
];

fn lamspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamspec"))
        .env_clear()
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn spectrum_bytes_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut first = vec!["spectrum", "--threads", "1", "--out", "a"];
    first.extend(SMALL);
    let mut second = vec!["spectrum", "--threads", "4", "--out", "b"];
    second.extend(SMALL);
    assert_eq!(code(&lamspec(dir.path(), &first)), 0);
    assert_eq!(code(&lamspec(dir.path(), &second)), 0);
    for file in ["spectrum.csv", "spectrum.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn artifacts_embed_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["spectrum", "--set", "name=run"];
    args.extend(SMALL);
    assert_eq!(code(&lamspec(dir.path(), &args)), 0);
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(csv.contains("# state=window\n"));
    assert!(csv.contains("# gbar=1.0\n"));
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n0"], 3);
    assert_eq!(meta["config"]["phi"], 0.3);
}

#[test]
fn both_solvers_write_a_crosscheck() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["spectrum", "--set", "solver=both"];
    args.extend(SMALL);
    assert_eq!(code(&lamspec(dir.path(), &args)), 0);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("spectrum.crosscheck.json")).unwrap())
            .unwrap();
    assert!(report["max_abs_deviation"].as_f64().unwrap() < 1e-8);
    assert!(report["report"]["l2_rel"].as_f64().unwrap() < 1e-6);
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.toml"),
        "state = \"fock\"\nn0 = 2\ngbar = 1.0\nname = \"from-file\"\ngrid_count = 11\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lamspec"))
        .env_clear()
        .env("LAMSPEC_NAME", "from-env")
        .env("LAMSPEC_N0", "5")
        .current_dir(dir.path())
        .args(["spectrum", "--config", "s.toml", "--set", "n0=7"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("from-env.csv")).unwrap();
    assert!(csv.contains("# n0=7\n"));
}

#[test]
fn unknown_keys_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "omega_21 = 1.0\n").unwrap();
    assert_eq!(
        code(&lamspec(dir.path(), &["spectrum", "--config", "bad.toml"])),
        2
    );
    assert_eq!(
        code(&lamspec(dir.path(), &["spectrum", "--set", "typo=1"])),
        2
    );
    let out = Command::new(env!("CARGO_BIN_EXE_lamspec"))
        .env_clear()
        .env("LAMSPEC_GAMMA3", "1")
        .current_dir(dir.path())
        .arg("spectrum")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma3"));
}

#[test]
fn invalid_values_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&lamspec(dir.path(), &["spectrum", "--set", "gamma1=-1"])),
        2
    );
    assert_eq!(
        code(&lamspec(
            dir.path(),
            &[
                "spectrum",
                "--set",
                "state=window",
                "--set",
                "n0=2",
                "--set",
                "width=3"
            ]
        )),
        2
    );
    assert_eq!(
        code(&lamspec(
            dir.path(),
            &[
                "spectrum",
                "--set",
                "state=separated",
                "--set",
                "kappas=[0, 1]"
            ]
        )),
        2
    );
    assert_eq!(
        code(&lamspec(
            dir.path(),
            &["sweep", "--kind", "w21", "--values", ""]
        )),
        2
    );
    assert_eq!(
        code(&lamspec(
            dir.path(),
            &[
                "spectrum",
                "--set",
                "state=classical",
                "--set",
                "solver=oracle"
            ]
        )),
        2
    );
}

#[test]
fn short_horizon_exits_with_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["spectrum", "--set", "solver=oracle", "--set", "t_end=6"];
    args.extend(SMALL);
    let out = lamspec(dir.path(), &args);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stationary"));
}

#[test]
fn table_reproduces_the_phase_letters() {
    let dir = tempfile::tempdir().unwrap();
    let out = lamspec(dir.path(), &["table1"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("a     b     c"));
    assert!(stdout.contains("c     d     a"));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("table1.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["passed"], true);
}

#[test]
fn table_mismatch_exits_nonzero() {
    // a weak coherent field is far from its classical limit
    let dir = tempfile::tempdir().unwrap();
    let out = lamspec(
        dir.path(),
        &["table1", "--set", "alpha=2", "--set", "sigmas=10"],
    );
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn sweeps_write_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = lamspec(
        dir.path(),
        &[
            "sweep",
            "--kind",
            "w21",
            "--set",
            "state=classical",
            "--set",
            "omega_rabi=5",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("spectrum.sweep-w21.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("value"))
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    let best = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(best.0, 1.0);

    let out = lamspec(
        dir.path(),
        &[
            "sweep",
            "--kind",
            "phase",
            "--values",
            "0,1,2",
            "--set",
            "state=fock",
            "--set",
            "n0=20",
            "--set",
            "grid_count=401",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("spectrum.sweep-phase.csv")).unwrap();
    let metrics: Vec<f64> = csv
        .lines()
        .skip_while(|l| !l.starts_with("value"))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(metrics.len(), 3);
    assert!(metrics
        .iter()
        .all(|m| (m - metrics[0]).abs() <= 1e-12 * metrics[0]));
}

#[test]
fn compare_reports_identity_and_difference() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = vec!["spectrum", "--set", "name=a"];
    a.extend(SMALL);
    let mut b = vec!["spectrum"];
    b.extend(SMALL);
    b.extend(["--set", "name=b", "--set", "phi=2.0"]);
    assert_eq!(code(&lamspec(dir.path(), &a)), 0);
    assert_eq!(code(&lamspec(dir.path(), &b)), 0);

    let out = lamspec(dir.path(), &["compare", "a.csv", "a.csv"]);
    assert_eq!(code(&out), 0);
    let same: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(same["l2_rel"], 0.0);

    let out = lamspec(dir.path(), &["compare", "a.csv", "b.csv"]);
    let diff: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(diff["l2_rel"].as_f64().unwrap() > 1e-3);

    assert_eq!(
        code(&lamspec(dir.path(), &["compare", "a.csv", "missing.csv"])),
        1
    );
}
