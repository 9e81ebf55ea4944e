//! Black-box tests of the `noisekit` binary: exit codes, idempotence,
//! usage errors, and the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn noisekit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noisekit"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    noisekit().args(args).current_dir(cwd).output().expect("spawn noisekit")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).trim().to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn every_subcommand_has_help() {
    let subcommands = [
        "noise", "ladder", "eval", "slope", "fertility", "gen-train", "gen-valid", "pipeline",
        "report", "worker",
    ];
    for sub in subcommands {
        let output = noisekit().args([sub, "--help"]).output().unwrap();
        assert!(output.status.success(), "{sub} --help failed");
        assert!(!output.stdout.is_empty(), "{sub} --help printed nothing");
    }
    for sub in ["chrf", "bleu", "token-f1", "delta-qe", "faux", "win-loss"] {
        let output = noisekit().args(["eval", sub, "--help"]).output().unwrap();
        assert!(output.status.success(), "eval {sub} --help failed");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.txt", "hello world\n");

    // unknown flag (clap)
    let output = run(&["noise", "--bogus"], dir.path());
    assert_eq!(output.status.code(), Some(2));

    // key noise without layout (domain usage error)
    let output = run(
        &["noise", "--in", "in.txt", "--out", "o.jsonl", "--type", "key", "--p", "0.5"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).starts_with("error:"), "{}", stderr(&output));

    // p out of range
    let output = run(
        &["noise", "--in", "in.txt", "--out", "o.jsonl", "--type", "swap", "--p", "1.5"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));

    // bad rates list
    let output = run(
        &[
            "gen-train", "--source", "in.txt", "--task", "correction", "--size", "1",
            "--rates", "swap=0.2,zap=0.1", "--out-dir", "t", "--name", "x",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn data_errors_exit_1_with_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        &["noise", "--in", "missing.txt", "--out", "o.jsonl", "--type", "swap", "--p", "0.5"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).starts_with("error:"), "{}", stderr(&output));

    // invalid UTF-8 is rejected with a byte offset, not substituted
    std::fs::write(dir.path().join("bad.txt"), b"ok\xffline\n").unwrap();
    let output = run(
        &["noise", "--in", "bad.txt", "--out", "o.jsonl", "--type", "swap", "--p", "0.5"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("byte offset 2"), "{}", stderr(&output));
}

#[test]
fn noise_p_zero_reproduces_input_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let input = "first line here\n\nsecond – with unicode ü\n";
    write(dir.path(), "in.txt", input);
    let output = run(
        &[
            "noise", "--in", "in.txt", "--out", "o.jsonl", "--type", "swap", "--p", "0",
            "--plain-out", "o.txt",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert_eq!(std::fs::read_to_string(dir.path().join("o.txt")).unwrap(), input);
    // zero perturbation records in the JSONL
    let jsonl = std::fs::read_to_string(dir.path().join("o.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 3);
    assert!(jsonl.lines().all(|l| l.contains("\"perturbations\":[]")));
}

#[test]
fn noise_is_idempotent_given_identical_flags() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.txt", "alpha beta gamma\ndelta epsilon zeta\n");
    let args = [
        "noise", "--in", "in.txt", "--out", "o.jsonl", "--type", "key", "--p", "0.7",
        "--seed", "99", "--layout", "qwerty",
    ];
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("o.jsonl")).unwrap();
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("o.jsonl")).unwrap(), first);
}

#[test]
fn ladder_emits_ten_files_and_stable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.txt", "some words to perturb\nanother line of text\n");
    let args = ["ladder", "--in", "in.txt", "--out-dir", "lad", "--type", "key", "--seed", "4", "--layout", "qwertz"];
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));

    let lad = dir.path().join("lad");
    let jsonl_files: Vec<_> = std::fs::read_dir(&lad)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "jsonl"))
        .collect();
    assert_eq!(jsonl_files.len(), 10);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(lad.join("ladder.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["layout"], "qwertz");
    assert_eq!(manifest["layout_checksum"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["files"].as_array().unwrap().len(), 10);

    // rerun with the same flags → identical checksums
    let before = std::fs::read(lad.join("ladder.json")).unwrap();
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    assert_eq!(std::fs::read(lad.join("ladder.json")).unwrap(), before);
}

#[test]
fn eval_chrf_identical_files_print_100() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.txt", "the cat sat on the mat\nthe dog ran far away\n");
    let output = run(&["eval", "chrf", "--hyp", "a.txt", "--ref", "a.txt"], dir.path());
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), "100.0000");

    let output = run(&["eval", "bleu", "--hyp", "a.txt", "--ref", "a.txt"], dir.path());
    assert_eq!(stdout(&output), "100.0000");

    let output = run(&["eval", "token-f1", "--hyp", "a.txt", "--ref", "a.txt"], dir.path());
    assert_eq!(stdout(&output), "1.0000");
}

#[test]
fn eval_delta_qe_and_faux() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "clean.tsv", "0\t0.9\n1\t0.8\n");
    write(dir.path(), "noisy.tsv", "0\t0.7\n1\t0.6\n");
    let output = run(
        &["eval", "delta-qe", "--clean", "clean.tsv", "--noisy", "noisy.tsv"],
        dir.path(),
    );
    assert_eq!(stdout(&output), "0.2000");

    write(dir.path(), "yn.txt", "the cat sat on mat\n");
    write(dir.path(), "yc.txt", "the cat sat on the mat\n");
    let output = run(
        &["eval", "faux", "--hyp-noisy", "yn.txt", "--hyp-clean", "yc.txt", "--base", "chrf"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    let value: f64 = stdout(&output).parse().unwrap();
    assert!(value > 0.0 && value < 100.0);

    // index mismatch is a data error
    write(dir.path(), "short.tsv", "0\t0.7\n");
    let output = run(
        &["eval", "delta-qe", "--clean", "clean.tsv", "--noisy", "short.tsv"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn eval_win_loss_fractions() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "base.tsv", "0\t0.5\n1\t0.5\n2\t0.5\n3\t0.5\n");
    write(dir.path(), "chal.tsv", "0\t0.9\n1\t0.1\n2\t0.5\n3\t0.6\n");
    let output = run(
        &["eval", "win-loss", "--baseline", "base.tsv", "--challenger", "chal.tsv"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), "improved=0.5000 harmed=0.2500 tied=0.2500 n=4");
    let output = run(
        &["eval", "win-loss", "--baseline", "base.tsv", "--challenger", "chal.tsv",
          "--tie-epsilon", "-1"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn slope_on_bundled_fixture_is_exactly_minus_twenty() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/linear-trajectory.csv");
    let output = noisekit().args(["slope", "--traj", fixture]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), "-20.0000");
}

#[test]
fn slope_requires_clean_row() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.csv", "p,score\n0.5,80\n");
    let output = run(&["slope", "--traj", "t.csv"], dir.path());
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("p=0"), "{}", stderr(&output));
}

#[test]
fn fertility_modes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.txt", "ab cd\n");
    let output = run(&["fertility", "--in", "in.txt", "--tokenizer", "whitespace"], dir.path());
    assert_eq!(stdout(&output), "1.0000");
    let output = run(&["fertility", "--in", "in.txt", "--tokenizer", "char"], dir.path());
    assert_eq!(stdout(&output), "2.0000");

    write(dir.path(), "merges.txt", "a b\n");
    write(dir.path(), "bpe-in.txt", "ab ab\n");
    let output = run(
        &["fertility", "--in", "bpe-in.txt", "--tokenizer", "bpe", "--merges", "merges.txt"],
        dir.path(),
    );
    assert_eq!(stdout(&output), "1.0000");

    // bpe without merges is a usage error
    let output = run(&["fertility", "--in", "in.txt", "--tokenizer", "bpe"], dir.path());
    assert_eq!(output.status.code(), Some(2));

    // zero words is a data error
    write(dir.path(), "empty.txt", "\n\n");
    let output = run(&["fertility", "--in", "empty.txt"], dir.path());
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "in.txt", "alpha beta gamma delta\n");
    write(dir.path(), "cfg.toml", "seed = 123\nlayout = \"qwerty\"\n");

    // config supplies seed+layout
    let a = run(
        &["--config", "cfg.toml", "noise", "--in", "in.txt", "--out", "a.jsonl", "--type", "key", "--p", "1"],
        dir.path(),
    );
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    // explicit seed must override the config seed
    let b = run(
        &[
            "--config", "cfg.toml", "noise", "--in", "in.txt", "--out", "b.jsonl", "--type", "key",
            "--p", "1", "--seed", "123",
        ],
        dir.path(),
    );
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("a.jsonl")).unwrap(),
        std::fs::read(dir.path().join("b.jsonl")).unwrap(),
        "flag seed equal to config seed must produce identical output"
    );
    let c = run(
        &[
            "--config", "cfg.toml", "noise", "--in", "in.txt", "--out", "c.jsonl", "--type", "key",
            "--p", "1", "--seed", "124",
        ],
        dir.path(),
    );
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(
        std::fs::read(dir.path().join("a.jsonl")).unwrap(),
        std::fs::read(dir.path().join("c.jsonl")).unwrap()
    );

    // unknown config keys are rejected as usage errors
    write(dir.path(), "bad.toml", "seed = 1\nwhatever = 2\n");
    let output = run(
        &["--config", "bad.toml", "noise", "--in", "in.txt", "--out", "x.jsonl", "--type", "swap", "--p", "0"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn report_on_empty_run_dir_writes_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty-runs")).unwrap();
    let output = run(&["report", "--runs", "empty-runs", "--out", "rep"], dir.path());
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let csv = std::fs::read_to_string(dir.path().join("rep/robustness.csv")).unwrap();
    assert_eq!(csv, "system,metric,noise_type,clean,slope,n_points,rss\n");
}

#[test]
fn gen_train_validation_rules() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "src.txt", "uno dos tres\ncuatro cinco seis\n");

    // translation without --target is a usage error
    let output = run(
        &["gen-train", "--source", "src.txt", "--task", "translation", "--size", "1",
          "--out-dir", "t", "--name", "x"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));

    // oversized sample is a data error
    let output = run(
        &["gen-train", "--source", "src.txt", "--task", "correction", "--size", "99",
          "--out-dir", "t", "--name", "x"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1));

    // rates summing over 1 are a usage error
    let output = run(
        &["gen-train", "--source", "src.txt", "--task", "correction", "--size", "1",
          "--rates", "swap=0.8,drop=0.9", "--out-dir", "t", "--name", "x"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
}
