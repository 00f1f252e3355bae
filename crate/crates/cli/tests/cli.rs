//! End-to-end checks of the command-line pipeline: exit codes, output
//! formats, and the generate → extract → fit loop.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sscm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sscm"))
}

fn run(args: &[&str]) -> Output {
    sscm().args(args).output().expect("spawn sscm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn table1_params(mu_ds: f64, s_ds: f64, mu_asd: f64, s_asd: f64, mu_kf: f64, s_kf: f64) -> String {
    format!(
        "mu_lgDS={mu_ds}\nsigma_lgDS={s_ds}\nmu_lgASD={mu_asd}\nsigma_lgASD={s_asd}\n\
         mu_lgASA={mu_asd}\nsigma_lgASA={s_asd}\nmu_KF={mu_kf}\nsigma_KF={s_kf}\nlos=true\n"
    )
}

fn write_set_b(dir: &Path) -> PathBuf {
    let path = dir.join("b.params");
    let mut text = table1_params(-6.8, 0.675, 0.7, 0.25, 8.0, 3.0);
    text.push_str("lambda_clusters=10\n");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn generate_extract_fit_round_trip() {
    let dir = TempDir::new().unwrap();
    let params = write_set_b(dir.path());
    let ds = dir.path().join("b.csds");
    let csv = dir.path().join("b.csv");
    let fitted = dir.path().join("fitted.params");

    let out = run(&[
        "generate",
        "--params",
        params.to_str().unwrap(),
        "--count",
        "400",
        "--seed",
        "7",
        "--scs",
        "250e3",
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&[
        "extract",
        "--in",
        ds.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--threshold-db",
        "28",
        "--angle-threshold-db",
        "12",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("ds_s,asd_deg,asa_deg,kf_db,n_clusters\n"));
    assert_eq!(header.lines().count(), 401);

    let out = run(&[
        "fit",
        "--stats",
        csv.to_str().unwrap(),
        "--baseline",
        "uma-los",
        "--out",
        fitted.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&fitted).unwrap();
    let mu_lg_ds: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mu_lgDS="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu_lg_ds + 6.8).abs() < 0.2, "mu_lgDS {mu_lg_ds}");
    assert!(text.contains("los=true"));
}

#[test]
fn match_ranks_table1_catalog() {
    let dir = TempDir::new().unwrap();
    let catalog = dir.path().join("catalog");
    std::fs::create_dir(&catalog).unwrap();
    std::fs::write(
        catalog.join("a.params"),
        table1_params(-7.6, 0.7, 1.26, 0.3, 10.0, 4.0),
    )
    .unwrap();
    std::fs::write(
        catalog.join("b.params"),
        table1_params(-6.8, 0.675, 0.7, 0.25, 8.0, 3.0),
    )
    .unwrap();
    std::fs::write(
        catalog.join("c.params"),
        table1_params(-6.0, 0.65, 1.6, 0.28, 7.0, 4.0),
    )
    .unwrap();
    let query = dir.path().join("d.params");
    std::fs::write(&query, table1_params(-6.6, 0.66, 0.75, 0.24, 8.3, 2.8)).unwrap();

    let out = run(&[
        "match",
        "--catalog",
        catalog.to_str().unwrap(),
        "--query",
        query.to_str().unwrap(),
        "--top-k",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("1,b,"), "first line: {}", lines[0]);
    let distances: Vec<f64> = lines
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(distances.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn eval_reports_both_codecs() {
    let dir = TempDir::new().unwrap();
    let params = write_set_b(dir.path());
    let train = dir.path().join("train.csds");
    let test = dir.path().join("test.csds");
    for (path, seed) in [(&train, "1"), (&test, "2")] {
        let out = run(&[
            "generate",
            "--params",
            params.to_str().unwrap(),
            "--count",
            "80",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }

    let per_sample = dir.path().join("per_sample.csv");
    let out = run(&[
        "eval",
        "--train",
        train.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
        "--coeffs",
        "7",
        "--bits-per-comp",
        "4",
        "--subband",
        "16",
        "--per-sample",
        per_sample.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("codec=linear"));
    assert!(text.contains("feedback_bits=56"));
    assert!(text.contains("train_dataset=train"));
    let mean: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mean_sgcs="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mean > 0.5 && mean <= 1.0, "mean_sgcs {mean}");
    let per = std::fs::read_to_string(&per_sample).unwrap();
    assert_eq!(per.lines().count(), 81); // header + one row per sample

    let out = run(&[
        "eval",
        "--train",
        train.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
        "--coeffs",
        "2",
        "--bits-per-comp",
        "3",
        "--codec",
        "dft",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("feedback_bits=18"));
}

#[test]
fn report_encode_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let params = write_set_b(dir.path());
    let out = run(&["report", "encode", "--params", params.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let hex = stdout(&out).trim().to_string();
    assert_eq!(hex, "018c737c2b994d33");

    let out = run(&["report", "decode", "--hex", &hex]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mu: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mu_lgDS="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu + 6.8039).abs() < 1e-3, "decoded mu_lgDS {mu}");

    let out = run(&["report", "decode", "--hex", "028c737c2b994d33"]);
    assert_eq!(out.status.code(), Some(2), "wrong version must be a data error");
    let out = run(&["report", "decode", "--hex", "zz"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let params = write_set_b(dir.path());

    let out = run(&[
        "generate",
        "--params",
        params.to_str().unwrap(),
        "--count",
        "0",
        "--out",
        dir.path().join("x.csds").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());

    let out = run(&["generate"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&[
        "fit",
        "--stats",
        "nowhere.csv",
        "--baseline",
        "moon-los",
        "--out",
        "y.params",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown baseline"));

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let params = write_set_b(dir.path());
    let ds = dir.path().join("b.csds");
    let out = run(&[
        "generate",
        "--params",
        params.to_str().unwrap(),
        "--count",
        "3",
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    // truncate the dataset payload
    let bytes = std::fs::read(&ds).unwrap();
    std::fs::write(&ds, &bytes[..bytes.len() - 4]).unwrap();
    let out = run(&[
        "extract",
        "--in",
        ds.to_str().unwrap(),
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("size mismatch"));

    // parameter file with a bad key
    let bad = dir.path().join("bad.params");
    std::fs::write(&bad, "mu_lgds=-6.8\n").unwrap();
    let out = run(&[
        "generate",
        "--params",
        bad.to_str().unwrap(),
        "--count",
        "1",
        "--out",
        dir.path().join("z.csds").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("mu_lgds"));

    // generation without a cluster count
    let no_lambda = dir.path().join("nolambda.params");
    std::fs::write(&no_lambda, table1_params(-6.8, 0.675, 0.7, 0.25, 8.0, 3.0)).unwrap();
    let out = run(&[
        "generate",
        "--params",
        no_lambda.to_str().unwrap(),
        "--count",
        "1",
        "--out",
        dir.path().join("w.csds").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lambda_clusters"));
}

#[test]
fn generation_is_deterministic_across_runs() {
    let dir = TempDir::new().unwrap();
    let params = write_set_b(dir.path());
    let a = dir.path().join("a.csds");
    let b = dir.path().join("b.csds");
    for path in [&a, &b] {
        let out = run(&[
            "generate",
            "--params",
            params.to_str().unwrap(),
            "--count",
            "16",
            "--seed",
            "99",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
