use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn spikefilt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikefilt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SPIKEFILT_OUT")
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn kernels_table_covers_the_grid() {
    let dir = tempdir().unwrap();
    let out = spikefilt(&["kernels"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("kernels.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,alpha,epsilon,kappa");
    assert_eq!(lines.len(), 1 + 551);
    assert!(lines[1].starts_with("-5,"));
    assert!(lines[551].starts_with("50,"));
    assert!(!text.contains('\r'));
    let membrane = fs::read_to_string(dir.path().join("membrane.csv")).unwrap();
    assert!(membrane.lines().any(|l| l == "4,15,1"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["kind"], "kernels");
}

#[test]
fn appendix_bound_holds_on_every_row() {
    let dir = tempdir().unwrap();
    let out = spikefilt(&["verify-appendix", "--n-inputs", "5"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("appendix.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",true"), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 3 * 5 * (1 + 5));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["classify", "--runs", "2", "--epochs", "5", "--n-inputs", "50", "--seed", "9"];
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    assert!(spikefilt(&args, a.path()).status.success());
    assert!(spikefilt(&args, b.path()).status.success());
    assert_eq!(csv_files(a.path()), csv_files(b.path()));
    let c = tempdir().unwrap();
    let mut other = args.to_vec();
    other[8] = "10";
    assert!(spikefilt(&other, c.path()).status.success());
    assert_ne!(csv_files(a.path()), csv_files(c.path()));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "runs = 2\nepochs = 3\nn_inputs = 40\neta = [0.1, 0.3]\nrule = \"filt\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = spikefilt(&["rate-sweep", "--config", cfg.to_str().unwrap(), "--eta", "0.2"], &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("rate_sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("filt,0.2,"));
}

#[test]
fn invalid_input_fails_with_a_message() {
    let dir = tempdir().unwrap();
    let out = spikefilt(&["classify", "--patterns", "7"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("classes"));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "epoch = 3\n").unwrap();
    let out = spikefilt(&["mapping", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!out.status.success());

    let out = spikefilt(&["capacity", "--precision-ms", "0"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn infeasible_targets_cite_the_constraint() {
    let dir = tempdir().unwrap();
    let out = spikefilt(
        &["classify", "--classes", "1", "--patterns", "1", "--target-spikes", "16", "--epochs", "1", "--n-inputs", "5"],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("apart"), "{err}");
}
