use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_setpersist"));
    c.env_remove("SETPERSIST_THREADS");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn sorted_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn simulate_is_deterministic() {
    let dir = scratch("simulate");
    for sub in ["a", "b"] {
        let out = run(bin()
            .args(["simulate", "--model", "boolean", "--n", "3", "--resolution", "64", "--seed", "11", "--out"])
            .arg(dir.join(sub)));
        assert!(out.status.success());
    }
    let files = sorted_files(&dir.join("a"));
    assert_eq!(files.len(), 9);
    assert_eq!(files, sorted_files(&dir.join("b")));
    for f in &files {
        let a = std::fs::read(dir.join("a").join(f)).unwrap();
        let b = std::fs::read(dir.join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn bad_arguments_exit_2() {
    let out = run(bin().args(["simulate", "--model", "nonsense"]));
    assert_eq!(out.status.code(), Some(2));
    let out = run(bin().args(["simulate", "--resolution", "10"]));
    assert_eq!(out.status.code(), Some(2));
    let out = run(bin().args(["no-such-command"]));
    assert_eq!(out.status.code(), Some(2));
    let out = run(bin().args(["outlier-study", "--model", "boolean"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_variable_is_checked() {
    let dir = scratch("threads");
    let out = run(bin().env("SETPERSIST_THREADS", "zero").args(["simulate", "--n", "1"]).arg("--out").arg(&dir));
    assert_eq!(out.status.code(), Some(2));
    let out = run(bin()
        .env("SETPERSIST_THREADS", "2")
        .args(["simulate", "--n", "1", "--resolution", "64", "--out"])
        .arg(&dir));
    assert!(out.status.success());
}

#[test]
fn analyze_writes_diagrams_and_records_failures() {
    let dir = scratch("analyze");
    let sims = dir.join("sims");
    assert!(run(bin()
        .args(["simulate", "--n", "2", "--resolution", "64", "--out"])
        .arg(&sims))
    .status
    .success());

    let empty = dir.join("empty.pgm");
    let mut pgm = b"P5\n16 16\n255\n".to_vec();
    pgm.extend(std::iter::repeat_n(0u8, 256));
    std::fs::write(&empty, pgm).unwrap();

    let out_dir = dir.join("out");
    let out = run(bin()
        .args(["analyze", "--summary", "APF0,HZ1", "--svg", "--out"])
        .arg(&out_dir)
        .arg(sims.join("boolean-0000.pgm"))
        .arg(sims.join("boolean-0001.grains.json"))
        .arg(&empty));
    assert!(out.status.success(), "partial failure still succeeds");

    let pd = std::fs::read_to_string(out_dir.join("boolean-0000.pd.csv")).unwrap();
    assert!(pd.starts_with("dim,birth,death,multiplicity,essential\n"));
    assert!(pd.lines().count() > 2);
    for f in ["boolean-0000.APF0.csv", "boolean-0001.HZ1.csv", "boolean-0001.HZ1.svg"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let errors = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 2);
    assert!(errors.contains("DegenerateSet"));

    let out = run(bin().args(["analyze", "--out"]).arg(dir.join("only_empty")).arg(&empty));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gof_study_rejects_too_few_simulations() {
    let dir = scratch("gof_small");
    let out = run(bin()
        .args(["gof-study", "--model", "boolean", "--alt", "cluster", "--n", "10", "--alpha", "0.05", "--out"])
        .arg(&dir));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InsufficientSimulations"));
    assert!(!dir.join("gof_study.csv").exists());
}

#[test]
fn small_studies_write_tables() {
    let dir = scratch("studies");
    let out = run(bin()
        .args([
            "outlier-study", "--model", "boolean", "--alt", "cluster", "--n", "6", "--reps", "1",
            "--resolution", "64", "--summary", "APF0,ESF", "--out",
        ])
        .arg(&dir));
    assert!(out.status.success());
    let table = std::fs::read_to_string(dir.join("outlier_study.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("null,intruder,summary,reps,failures,detected"));

    let out = run(bin()
        .args([
            "gof-study", "--model", "boolean", "--alt", "boolean", "--n", "19", "--alpha", "0.1", "--reps", "1",
            "--resolution", "64", "--out",
        ])
        .arg(&dir));
    assert!(out.status.success());
    let records = std::fs::read_to_string(dir.join("gof_records.csv")).unwrap();
    assert_eq!(records.lines().count(), 2);

    let out = run(bin()
        .args(["envelope-plot", "--model", "boolean", "--alt", "cluster", "--n", "19", "--alpha", "0.1", "--resolution", "64", "--out"])
        .arg(&dir));
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.join("envelope.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("envelope.json")).unwrap()).unwrap();
    let p = summary["p"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
}

#[test]
fn config_file_is_merged() {
    let dir = scratch("config");
    let config = dir.join("run.json");
    std::fs::write(&config, r#"{"model": "hardcore", "n": 2, "resolution": 64, "seed": 5}"#).unwrap();
    let out = run(bin().arg("simulate").arg("--config").arg(&config).arg("--out").arg(dir.join("o")));
    assert!(out.status.success());
    assert_eq!(sorted_files(&dir.join("o")).len(), 6);
    assert!(dir.join("o").join("hardcore-0001.pgm").exists());

    std::fs::write(&config, r#"{"modle": "boolean"}"#).unwrap();
    let out = run(bin().arg("simulate").arg("--config").arg(&config));
    assert_eq!(out.status.code(), Some(2));
}
