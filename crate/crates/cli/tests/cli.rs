use std::path::Path;
use std::process::{Command, Output};

fn tix(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tix"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

const SPEC: &str = r#"
id = "cli_synth"
length_days = 150
steps_per_day = 24
seed = 4
components = [
    { kind = "sine", amplitude = 1.5 },
    { kind = "noise", noise_std = 0.1 },
]
"#;

#[test]
fn synth_then_run_then_score() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.toml"), SPEC).unwrap();
    let out = tix(&["synth", "spec.toml", "-o", "series.csv"], d);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(d.join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 150 * 24);
    assert!(csv.starts_with("timestamp,value\n0,"));

    std::fs::write(
        d.join("run.toml"),
        "[[datasets]]\nid = \"s\"\npath = \"series.csv\"\nsteps_per_day = 24\n\
         [[imputers]]\nid = \"linear\"\n[[imputers]]\nid = \"tix_fourier\"\n",
    )
    .unwrap();
    let out = tix(
        &[
            "run",
            "run.toml",
            "--seed",
            "5",
            "--jobs",
            "2",
            "--output-dir",
            "out",
        ],
        d,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["results.json", "results.csv", "ranks.csv", "report.md"] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("out/results.json")).unwrap())
            .unwrap();
    assert_eq!(json["meta"]["seed"], 5);

    // Same seed elsewhere: identical bytes.
    let out = tix(
        &["run", "run.toml", "--seed", "5", "--output-dir", "again"],
        d,
    );
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(d.join("out/results.json")).unwrap(),
        std::fs::read(d.join("again/results.json")).unwrap()
    );

    std::fs::write(d.join("truth.csv"), "timestamp,value\n0,1\n1,3\n2,\n").unwrap();
    std::fs::write(
        d.join("pred.csv"),
        "timestamp,value,q0.1,q0.9\n0,2,0,2\n1,3,2,4\n2,0,0,0\n",
    )
    .unwrap();
    let out = tix(&["score", "truth.csv", "pred.csv", "--std", "2"], d);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let score: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(score["n_points"], 2);
    assert_eq!(score["mae"], 0.25);
    assert!(score["wql"].as_f64().unwrap() > 0.0);
}

#[test]
fn failing_dataset_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        "[[datasets]]\nid = \"gone\"\npath = \"missing.csv\"\nsteps_per_day = 24\n[[imputers]]\nid = \"linear\"\n",
    )
    .unwrap();
    let out = tix(&["run", "run.toml"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gone"));
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "datasets = []\nimputers = []\n",
    )
    .unwrap();
    assert!(!tix(&["run", "run.toml"], dir.path()).status.success());
}
