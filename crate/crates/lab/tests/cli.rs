use std::{fs, path::Path, process::Command};

fn lab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sbp-lab")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn subcommand_with_defaults_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = lab(&["constants", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("[PASS] sigma2_identity"), "{stdout}");
    for file in ["records.jsonl", "verdicts.jsonl", "summary.csv", "run-meta.json"] {
        assert!(out.join(file).is_file(), "{file}");
    }
}

#[test]
fn config_errors_exit_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = lognormal\nreplicas = 0x\n");
    let (code, _, stderr) = lab(&["run", "--config", &cfg]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 2") && stderr.contains("replicas"), "{stderr}");
    let (code, _, _) = lab(&["cycles", "--config", &cfg]);
    assert_eq!(code, 2);
    let (code, _, stderr) = lab(&["run"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn run_errors_exit_with_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "experiment = lognormal\nn = 40\nm = 30\n");
    let (code, _, stderr) = lab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("precondition"), "{stderr}");
}

#[test]
fn hard_failures_exit_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // At n = m = 4 the exact variance of C_2 is 4 * 9/16, far outside the band around 4.
    let cfg = write_config(dir.path(), "experiment = cycles\nn = 4\nm = 4\nreplicas = 400\nm1 = 2\n");
    let (code, stdout, _) = lab(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("[FAIL] c2_mean_variance"), "{stdout}");
    assert!(out.join("records.csv").is_file());
}

#[test]
fn seed_flag_changes_records_and_workers_do_not() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = threshold\nn = 10\nreplicas = 30\n");
    let read = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["threshold", "--config", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let (code, stdout, stderr) = lab(&args);
        assert_eq!(code, 0, "{stdout}{stderr}");
        fs::read(out.join("records.jsonl")).unwrap()
    };
    let a = read("a", &["--workers", "1"]);
    let b = read("b", &["--workers", "4"]);
    let c = read("c", &["--seed", "99"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}
