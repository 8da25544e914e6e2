use std::fs;
use std::path::Path;
use std::process::Command;

use ptkrein_cli::output::RunManifest;
use ptkrein_cli::{parse_config, ExitCode};

const SMALL_RUN: &str = r#"
branch = "scarf-1"
[problem]
potential = "scarf2"
v0 = 1.0
g = 1.0
mu = -1.0
[grid]
n = 60
[sweep]
axis = "gamma"
start = 0.0
stop = -0.1
step = 0.05
"#;

fn parse(text: &str) -> Result<ptkrein_cli::RunConfig, String> {
    parse_config(text, Path::new("test.toml")).map_err(|e| e.to_string())
}

#[test]
fn config_errors_name_the_field() {
    let cases = [
        (SMALL_RUN.replace("scarf2", "square"), "problem.potential"),
        (SMALL_RUN.replace("v0 = 1.0", "v0 = -1.0"), "problem.v0"),
        (SMALL_RUN.replace("g = 1.0", "g = 0.0"), "problem.g"),
        (SMALL_RUN.replace("step = 0.05", "step = 0.0"), "sweep.step"),
        (SMALL_RUN.replace("\"gamma\"", "\"omega\""), "sweep.axis"),
        (SMALL_RUN.replace("mu = -1.0\n", ""), "problem.mu"),
        (SMALL_RUN.replace("scarf-1", "scarf-7"), "branch"),
        (SMALL_RUN.replace("n = 60", "n = 20"), "grid.n"),
    ];
    for (text, field) in cases {
        let err = parse(&text).expect_err(field);
        assert!(err.contains(field), "{field}: {err}");
    }
    assert!(parse(&format!("{SMALL_RUN}\nbogus = 1\n")).is_err());
}

#[test]
fn run_writes_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse(SMALL_RUN).unwrap();
    cfg.output.dir = dir.path().to_path_buf();
    let out = ptkrein_cli::run(&cfg).unwrap();
    assert_eq!(out.exit, ExitCode::Success);
    let run = out.run.unwrap();
    assert_eq!(run.steps.len(), 3);
    assert!(run.events.is_empty());
    for name in ["branch.csv", "tracks.csv", "events.csv", "manifest.json"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let branch = fs::read_to_string(dir.path().join("branch.csv")).unwrap();
    assert_eq!(branch.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let manifest = RunManifest::from_json(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.config, cfg);
    assert_eq!(manifest.steps.len(), 3);
    assert!(manifest.truncated.is_none());
}

#[test]
fn spectrum_file_holds_the_symmetric_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse(&SMALL_RUN.replace("mu = -1.0", "mu = -1.0\ngamma = -0.5")).unwrap();
    cfg.sweep = None;
    cfg.output.dir = dir.path().to_path_buf();
    let (code, path) = ptkrein_cli::spectrum(&cfg).unwrap();
    assert_eq!(code, ExitCode::Success);
    let text = fs::read_to_string(path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2 * 59);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, SMALL_RUN.replace("scarf2", "square")).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ptkrein")).arg("run").arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(ExitCode::ConfigError.code()));

    let missing = dir.path().join("absent.toml");
    let status = Command::new(env!("CARGO_BIN_EXE_ptkrein")).arg("verify").arg(&missing).status().unwrap();
    assert_eq!(status.code(), Some(1));

    let good = dir.path().join("verify.toml");
    fs::write(
        &good,
        "branch = \"scarf-1\"\n[problem]\npotential = \"scarf2\"\nv0 = 1.0\ng = 1.0\nmu = -1.0\ngamma = -1.0\n[verify]\nns = [100]\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ptkrein")).arg("verify").arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("100"));
}
