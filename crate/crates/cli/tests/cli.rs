use std::path::Path;
use std::process::{Command, Output};

fn semijulia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semijulia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn weights_not_summing_to_one_name_b() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{
  "generators": [
    {"numerator": [[0, 0], [0, 0], [1, 0]]},
    {"numerator": [[0, 0], [0, 0], [0.25, 0]]}
  ],
  "b": [0.5, 0.4],
  "a": [1, 0]
}"#,
    )
    .unwrap();
    let out = semijulia(&["run", "--config", path(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("b: "), "{}", stderr(&out));
    assert!(stderr(&out).contains("0.9"), "{}", stderr(&out));
}

#[test]
fn json_syntax_errors_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.json");
    std::fs::write(&config, "{\n  \"example\": \"circle\",\n  \"n\": 10,,\n}").unwrap();
    let out = semijulia(&["run", "--config", path(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn exceptional_start_point_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = semijulia(&[
        "run",
        "--example",
        "circle",
        "--a",
        "0,0",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exceptional"), "{}", stderr(&out));
}

#[test]
fn oversized_tree_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = semijulia(&[
        "run",
        "--example",
        "circle",
        "--method",
        "full",
        "--depth",
        "60",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("depth"), "{}", stderr(&out));
}

#[test]
fn verify_circle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = semijulia(&[
        "verify",
        "--example",
        "circle",
        "--chains",
        "2",
        "--out",
        path(dir.path()),
    ]);
    let report = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{report}{}", stderr(&out));
    assert!(report.contains("overall: PASS"));
    assert!(!report.contains("[FAIL]"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("report.txt")).unwrap(),
        report
    );
}

#[test]
fn verify_with_too_short_chains_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = semijulia(&[
        "verify",
        "--example",
        "circle",
        "--n",
        "5000",
        "--chains",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL] Markov transitions"));
}

#[test]
fn compare_on_chebyshev_reports_small_tv() {
    let dir = tempfile::tempdir().unwrap();
    let out = semijulia(&[
        "run",
        "--example",
        "chebyshev",
        "--method",
        "compare",
        "--depth",
        "16",
        "--n",
        "250000",
        "--chains",
        "4",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    let line = report
        .lines()
        .find(|l| l.contains("total variation (full vs random)"))
        .expect("TV line");
    let tv: f64 = line.split_whitespace().nth(5).unwrap().parse().unwrap();
    assert!(tv <= 0.05, "{line}");
    assert!(report.contains("Hausdorff"));
    for file in [
        "full.grid",
        "full.ppm",
        "random.grid",
        "random.ppm",
        "report.txt",
    ] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
}

#[test]
fn report_echoes_resolved_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = semijulia(&[
        "run",
        "--example",
        "annulus",
        "--n",
        "1000",
        "--chains",
        "1",
        "--nx",
        "32",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    for key in [
        "burn_in: 100",
        "b: [0.5,0.5]",
        "seeds: [0]",
        "\"ny\":32",
        "\"scale\":\"log\"",
        "max_atoms: 16777216",
    ] {
        assert!(report.contains(key), "missing {key} in\n{report}");
    }
    assert!(report.contains("invariance check"));
}

#[test]
fn identical_config_gives_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("annulus.json");
    std::fs::write(
        &config,
        r#"{"example": "annulus", "method": "compare", "depth": 6, "n": 20000, "seeds": [11, 5, 8],
            "viewport": {"width": 9, "nx": 96, "ny": 80}}"#,
    )
    .unwrap();
    let runs: Vec<_> = ["1", "2"]
        .iter()
        .map(|threads| {
            let out_dir = dir.path().join(format!("threads{threads}"));
            let out = semijulia(&[
                "run",
                "--config",
                path(&config),
                "--threads",
                threads,
                "--out",
                path(&out_dir),
            ]);
            assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
            out_dir
        })
        .collect();
    for file in ["full.grid", "full.ppm", "random.grid", "random.ppm"] {
        let first = std::fs::read(runs[0].join(file)).unwrap();
        let second = std::fs::read(runs[1].join(file)).unwrap();
        assert!(first == second, "{file} differs between runs");
    }
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"example": "circle", "n": 3000, "burn_in": 50, "chains": 1, "seed": 3}"#,
    )
    .unwrap();
    let out = semijulia(&[
        "run",
        "--config",
        path(&config),
        "--burn-in",
        "7",
        "--seed",
        "9",
        "--nx",
        "16",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert!(report.contains("burn_in: 7"));
    assert!(report.contains("n: 3000"));
    assert!(report.contains("seeds: [9]"));
}
