use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn adult_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/adult")
}

/// Runs the binary with an isolated cache directory.
fn fairfm(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairfm"))
        .args(args)
        .env("FAIRFM_CACHE_DIR", cache)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn toy_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = extra.to_vec();
    v.extend(["--out", out]);
    v
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fetch_copies_verifies_and_then_hits_cache() {
    let cache = TempDir::new().unwrap();
    let src = adult_dir();
    let o = fairfm(cache.path(), &["fetch", "adult", "--source", path_str(&src)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("adult.data") && out.contains("adult.schema.toml"));
    assert!(cache.path().join("adult/adult.test").is_file());

    // A bogus source proves nothing is re-read.
    let o = fairfm(cache.path(), &["fetch", "--source", "/definitely/not/here"]);
    assert!(o.status.success(), "{}", stderr(&o));

    // The cached dataset resolves by name.
    let out_dir = TempDir::new().unwrap();
    let o = fairfm(
        cache.path(),
        &["train", "--dataset", "adult", "--method", "FairLR", "--out", path_str(out_dir.path())],
    );
    // Only checks that resolution succeeded; FairLR on Adult is quick.
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("FairLR eps=- delta=- acc="));
}

#[test]
fn fetch_rejects_a_corrupted_source() {
    let cache = TempDir::new().unwrap();
    let src = TempDir::new().unwrap();
    fs::write(src.path().join("adult.data"), "39, State-gov, 77516\n").unwrap();
    fs::write(src.path().join("adult.test"), "").unwrap();
    let o = fairfm(cache.path(), &["fetch", "adult", "--source", path_str(src.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("checksum mismatch"), "{}", stderr(&o));
    assert!(!cache.path().join("adult/adult.data").exists());
}

#[test]
fn fetch_unknown_dataset_lists_supported_names() {
    let cache = TempDir::new().unwrap();
    let o = fairfm(cache.path(), &["fetch", "census"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("unknown dataset") && err.contains("adult"), "{err}");
}

#[test]
fn train_is_byte_reproducible() {
    let cache = TempDir::new().unwrap();
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let data = fixture("toy.csv");
    let schema = fixture("toy.schema.toml");
    let run = |out: &Path| {
        fairfm(
            cache.path(),
            &toy_args(
                path_str(out),
                &[
                    "train",
                    "--dataset",
                    path_str(&data),
                    "--schema",
                    path_str(&schema),
                    "--method",
                    "PDFC",
                    "--eps-s",
                    "0.5",
                    "--eps-n",
                    "2",
                    "--s-attr",
                    "age",
                    "--seed",
                    "17",
                ],
            ),
        )
    };
    let (oa, ob) = (run(a.path()), run(b.path()));
    assert!(ob.status.success());
    assert!(oa.status.success(), "{}", stderr(&oa));
    assert!(stdout(&oa).starts_with("PDFC eps=1.7 delta=- acc="), "{}", stdout(&oa));
    let ma = fs::read(a.path().join("model.json")).unwrap();
    assert_eq!(ma, fs::read(b.path().join("model.json")).unwrap());
    let model: serde_json::Value = serde_json::from_slice(&ma).unwrap();
    assert_eq!(model["budgets"]["s_index"], 0);
    assert!(model["seed"].as_u64().is_some());

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["seed"], 17);
    let sha = manifest["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);

    // A different seed gives a different model.
    let c = TempDir::new().unwrap();
    let oc = fairfm(
        cache.path(),
        &toy_args(
            path_str(c.path()),
            &["train", "--dataset", path_str(&data), "--schema", path_str(&schema), "--method", "PDFC", "--eps", "1", "--seed", "18"],
        ),
    );
    assert!(oc.status.success(), "{}", stderr(&oc));
    assert_ne!(ma, fs::read(c.path().join("model.json")).unwrap());
}

#[test]
fn config_file_fills_in_and_flags_win() {
    let cache = TempDir::new().unwrap();
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "dataset = {:?}\nschema = {:?}\nmethod = \"ADFC\"\neps = 1.0\ndelta = 1e-4\nseed = 3\n",
            fixture("toy.csv"),
            fixture("toy.schema.toml")
        ),
    )
    .unwrap();
    let from_file = dir.path().join("a");
    let o = fairfm(cache.path(), &["train", "--config", path_str(&cfg), "--seed", "4", "--out", path_str(&from_file)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let direct = dir.path().join("b");
    let o = fairfm(
        cache.path(),
        &[
            "train",
            "--dataset",
            path_str(&fixture("toy.csv")),
            "--schema",
            path_str(&fixture("toy.schema.toml")),
            "--method",
            "ADFC",
            "--eps",
            "1",
            "--delta",
            "1e-4",
            "--seed",
            "4",
            "--out",
            path_str(&direct),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(from_file.join("model.json")).unwrap(),
        fs::read(direct.join("model.json")).unwrap()
    );

    fs::write(&cfg, "epsilon = 1.0\n").unwrap();
    let o = fairfm(cache.path(), &["train", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
}

#[test]
fn adfc_without_delta_fails_before_reading_data() {
    let cache = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let target = out.path().join("never");
    let o = fairfm(
        cache.path(),
        &["train", "--dataset", "/no/such/file.csv", "--method", "ADFC", "--eps", "1", "--out", path_str(&target)],
    );
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("delta") && !err.contains("no/such"), "{err}");
    assert!(!target.exists());
}

#[test]
fn out_of_domain_budgets_are_rejected() {
    let cache = TempDir::new().unwrap();
    for args in [
        &["train", "--method", "FM", "--eps", "0"][..],
        &["train", "--method", "RelaxedFM", "--eps", "1", "--delta", "1.5"][..],
        &["train", "--method", "Ridge", "--eps", "1"][..],
    ] {
        let o = fairfm(cache.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
    }
}

#[test]
fn missing_dataset_is_reported() {
    let cache = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let o = fairfm(
        cache.path(),
        &["train", "--dataset", "/no/such/file.csv", "--method", "LR", "--out", path_str(out.path())],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/file.csv"), "{}", stderr(&o));

    // A bare name that was never fetched points at `fetch`.
    let o = fairfm(cache.path(), &["train", "--method", "LR", "--out", path_str(out.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fetch"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_reports_and_report_renders_them() {
    let cache = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let o = fairfm(
        cache.path(),
        &[
            "sweep",
            "--dataset",
            path_str(&fixture("toy.csv")),
            "--schema",
            path_str(&fixture("toy.schema.toml")),
            "--method",
            "PDFC,LR",
            "--runs",
            "2",
            "--seed",
            "5",
            "--out",
            path_str(out.path()),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    // Default grid: six ε values for PDFC plus one LR row.
    assert_eq!(table.lines().filter(|l| l.starts_with("PDFC ")).count(), 6);
    assert_eq!(table.lines().filter(|l| l.starts_with("LR ")).count(), 1);
    assert!(table.contains("runs per point: 2"));

    let csv = fs::read_to_string(out.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("method,epsilon,delta,acc_mean,acc_std,rd_mean,rd_std,undefined_rd_count\n"));
    let manifest = fs::read_to_string(out.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"sweep\""));

    let report = out.path().join("report.json");
    let o = fairfm(cache.path(), &["report", path_str(&report)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), table);
    let o = fairfm(cache.path(), &["report", path_str(&report), "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), csv);

    let o = fairfm(cache.path(), &["report", path_str(&fixture("toy.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not a sweep report"), "{}", stderr(&o));
}

#[test]
fn sweep_needs_at_least_one_method() {
    let cache = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let o = fairfm(
        cache.path(),
        &[
            "sweep",
            "--dataset",
            path_str(&fixture("toy.csv")),
            "--schema",
            path_str(&fixture("toy.schema.toml")),
            "--out",
            path_str(out.path()),
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("method"), "{}", stderr(&o));
}

#[test]
fn sweep_where_every_run_fails_exits_with_2() {
    let cache = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let o = fairfm(
        cache.path(),
        &[
            "sweep",
            "--dataset",
            path_str(&fixture("toy.csv")),
            "--schema",
            path_str(&fixture("toy.schema.toml")),
            "--method",
            "PDFC",
            "--eps",
            "1",
            "--runs",
            "2",
            "--s-attr",
            "no-such-column",
            "--out",
            path_str(out.path()),
        ],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("failed"));
    assert!(out.path().join("report.json").is_file());
}
