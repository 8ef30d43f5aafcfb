use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_aia");

fn aia(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("SOURCE_DATE_EPOCH", "1700000000").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = aia(args);
    assert!(out.status.success(), "aia {} failed:\n{}", args.join(" "), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    ok(&["synth", "--seed", "5", "--per-category", "5", "--frames", "10", "--out", p(&out)]);
    out.join("dataset.json")
}

fn train(dir: &Path, data: &Path, kind: &str) -> PathBuf {
    let out = dir.join(format!("train-{kind}"));
    ok(&["train", "--data", p(data), "--model", kind, "--epochs", "30", "--lr", "0.01", "--out", p(&out)]);
    out.join("model.json")
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a");
    let b = synth(dir.path(), "b");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ma = fs::read(dir.path().join("a/manifest.json")).unwrap();
    let mb = fs::read(dir.path().join("b/manifest.json")).unwrap();
    assert_eq!(ma, mb);
    assert!(!dir.path().join("a/.aia.lock").exists());
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d, "data");
    let tcn = train(d, &data, "tcn");
    let gru = train(d, &data, "gru");

    let attack_dir = d.join("attack");
    let stdout = ok(&[
        "attack",
        "--checkpoint",
        p(&tcn),
        "--data",
        p(&data),
        "--objective",
        "hugging",
        "--sample",
        "1",
        "--out",
        p(&attack_dir),
    ]);
    assert!(stdout.starts_with("success: "), "{stdout}");
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(attack_dir.join("attack.json")).unwrap()).unwrap();
    assert!(record["success"].is_boolean());
    assert!(record["max_perturbation"].as_f64().unwrap() <= 0.45);

    let mut sweeps = Vec::new();
    for (name, ckpt) in [("tcn", &tcn), ("gru", &gru)] {
        let out = d.join(format!("eval-{name}"));
        ok(&[
            "eval",
            "--checkpoint",
            p(ckpt),
            "--data",
            p(&data),
            "--epsilon",
            "0.3",
            "--objective",
            "hugging",
            "--objective",
            "kicking",
            "--name",
            name,
            "--out",
            p(&out),
        ]);
        let csv = fs::read_to_string(out.join("report.csv")).unwrap();
        assert!(csv.starts_with("model,objective,epsilon,successes,evaluated,success_rate\n"));
        assert_eq!(csv.lines().count(), 3);
        sweeps.push(out.join("sweep.json"));
    }

    let transfer_dir = d.join("transfer");
    let tcn_receiver = format!("tcn={}", p(&tcn));
    let gru_receiver = format!("gru={}", p(&gru));
    ok(&[
        "transfer",
        "--sweep",
        p(&sweeps[0]),
        "--sweep",
        p(&sweeps[1]),
        "--receiver",
        &tcn_receiver,
        "--receiver",
        &gru_receiver,
        "--out",
        p(&transfer_dir),
    ]);
    let csv = fs::read_to_string(transfer_dir.join("transfer.csv")).unwrap();
    for pair in ["tcn,tcn", "tcn,gru", "gru,tcn", "gru,gru"] {
        assert!(csv.lines().any(|l| l.starts_with(pair)), "{pair} missing from\n{csv}");
    }

    let export_dir = d.join("export");
    ok(&["export", "--attack", p(&attack_dir.join("attack.json")), "--out", p(&export_dir)]);
    let frames = fs::read_to_string(export_dir.join("frames.csv")).unwrap();
    assert!(frames.starts_with("sequence,frame,joint,x,y,z\n"));
    // four sequences of 10 frames and 15 joints
    assert_eq!(frames.lines().count(), 1 + 4 * 10 * 15);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(transfer_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "transfer");
    assert_eq!(manifest["started_unix"], 1700000000);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn reruns_reproduce_checkpoints_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d, "data");
    let run = |tag: &str| {
        let ckpt = d.join(format!("train-{tag}"));
        ok(&["train", "--data", p(&data), "--epochs", "10", "--out", p(&ckpt)]);
        let eval = d.join(format!("eval-{tag}"));
        ok(&[
            "eval",
            "--checkpoint",
            p(&ckpt.join("model.json")),
            "--data",
            p(&data),
            "--epsilon",
            "0.45",
            "--objective",
            "pushing",
            "--out",
            p(&eval),
        ]);
        (ckpt, eval)
    };
    let (c1, e1) = run("1");
    let (c2, e2) = run("2");
    for (a, b, f) in [
        (&c1, &c2, "model.json"),
        (&c1, &c2, "history.csv"),
        (&e1, &e2, "report.csv"),
        (&e1, &e2, "report.json"),
        (&e1, &e2, "sweep.json"),
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn empty_test_partition_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d, "data");
    let ckpt = train(d, &data, "tcn");
    let cfg = d.join("cfg.toml");
    fs::write(&cfg, "[data]\nheld_out = [\"s99s99\"]\n").unwrap();
    let out =
        aia(&["eval", "--config", p(&cfg), "--checkpoint", p(&ckpt), "--data", p(&data), "--out", p(&d.join("e"))]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("test partition is empty"), "{err}");
}

#[test]
fn bad_arguments_and_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = aia(&["synth", "--out", p(&d.join("x")), "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = d.join("bad.toml");
    fs::write(&cfg, "[attack]\nlambda = 1.5\n").unwrap();
    let out = aia(&["synth", "--config", p(&cfg), "--out", p(&d.join("y"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
    assert!(!d.join("y").exists());

    fs::write(&cfg, "[attack]\nepsilom = 0.1\n").unwrap();
    let out = aia(&["synth", "--config", p(&cfg), "--out", p(&d.join("z"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn locked_output_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join(".aia.lock"), "1\n").unwrap();
    let res = aia(&["synth", "--out", p(&out)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("locked"));
    assert!(!out.join("dataset.json").exists());
}

#[test]
fn export_of_a_dataset_record() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "data");
    let out = dir.path().join("x");
    ok(&["export", "--data", p(&data), "--record", "3", "--out", p(&out)]);
    let frames = fs::read_to_string(out.join("frames.csv")).unwrap();
    assert_eq!(frames.lines().count(), 1 + 2 * 10 * 15);
    assert!(!aia(&["export", "--data", p(&data), "--record", "999", "--out", p(&dir.path().join("y"))])
        .status
        .success());
}
