// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

use qdarwin::cli::output::RunManifest;

const SMALL: &str = "[model]\nn_env = 60\ngamma = 0.01\n[run]\ntime_points = 12\nsamples = 20\nnm_samples = 40\n[sweep]\nratios = [1, 20]\n";

fn qdarwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdarwin")).args(args).output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_string()
}

fn sha256_hex(path: &Path) -> String {
    Sha256::digest(std::fs::read(path).unwrap())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn manifest_checksums_match_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("run");
    let o = qdarwin(&["redundancy", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = RunManifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(m.command, "redundancy");
    assert_eq!(m.threads, 2);
    assert_eq!(m.config.model.n_env, 60);
    for rec in &m.outputs {
        let path = out.join(&rec.path);
        assert_eq!(rec.sha256, sha256_hex(&path), "{}", rec.path);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), rec.rows + 1);
    }
    let header = std::fs::read_to_string(out.join("redundancy.csv")).unwrap();
    assert!(header.starts_with("t,gamma_t,h_system,mi_full,f_delta,r_delta,r_rel\n"));
}

#[test]
fn replay_reproduces_checksums() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let o = qdarwin(&["sweep", "--config", &cfg, "--seed", "5", "--out", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = first.join("manifest.json");
    let o = qdarwin(&["replay", manifest.to_str().unwrap(), "--out", second.to_str().unwrap(), "--threads", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = RunManifest::load(&manifest).unwrap();
    let b = RunManifest::load(&second.join("manifest.json")).unwrap();
    assert_eq!(b.command, "sweep");
    assert_eq!(a.seed, 5);
    assert_eq!(a.config_hash, b.config_hash);
    let sums = |m: &RunManifest| m.outputs.iter().map(|o| (o.path.clone(), o.sha256.clone())).collect::<Vec<_>>();
    assert_eq!(sums(&a), sums(&b));
}

#[test]
fn replay_refuses_config_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("run");
    assert!(qdarwin(&["dynamics", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let manifest = out.join("manifest.json");
    let o = qdarwin(&["replay", manifest.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("replay"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, "[model]\nn_env = 60\ngama = 0.01\n").unwrap();
    let o = qdarwin(&["dynamics", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gama"), "{}", stderr(&o));
    assert!(!tmp.path().join("manifest.json").exists());
}

#[test]
fn bad_flags_exit_with_usage_code() {
    for args in [
        &["dynamics", "--fractions", "some"][..],
        &["dynamics", "--seed", "-3"],
        &["wiggle"],
        &["dynamics", "--threads", "0"],
    ] {
        let tmp = tempfile::tempdir().unwrap();
        let mut all = args.to_vec();
        all.extend(["--out", tmp.path().to_str().unwrap()]);
        let o = qdarwin(&all);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unwritable_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = qdarwin(&["dynamics", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("i/o error"), "{}", stderr(&o));
}

#[test]
fn oracle_command_passes_its_own_check() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qdarwin(&["oracle", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("oracle.csv")).unwrap();
    // Three fragments at twenty times.
    assert_eq!(text.lines().count(), 61);
}
