use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use expsum::exp_sums::{certificate_check, kernel_profile, FrequencyDraw};
use expsum::experiments::{run_experiment, ExperimentConfig};
use expsum::group_fourier::Signal;
use expsum::omega_models::{sample_omega, size_distribution, ModelKind, OmegaModel};
use expsum::parallel::Execution;
use expsum::recovery::{basis_pursuit, measure, SolverConfig};
use expsum::tail_bounds::{evaluate, paper_example_table, table_to_csv, BoundName, BoundQuery};
use num_complex::Complex64;
use serde_json::Value;

fn expsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const TAIL2: &str = "experiment = \"tail2\"\ntrials = 1000\nmaster_seed = 1\n[params]\nN = 31\nn = 60\ndelta = 0.5\n";

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn theorem3_report() {
    let out = expsum(&[
        "bounds", "--name", "theorem3", "--N", "997", "--T", "2", "--C", "3",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 332);
    let p = v["failure_bound"].as_f64().unwrap();
    assert!((p / 1.68e-5 - 1.0).abs() < 0.01);
    let q = BoundQuery {
        modulus: Some(997),
        t: Some(2),
        c: Some(3.0),
        ..Default::default()
    };
    assert_eq!(
        stdout(&out),
        evaluate(BoundName::Theorem3, &q).unwrap().to_json() + "\n"
    );
}

#[test]
fn bounds_csv_matches_library() {
    let out = expsum(&[
        "bounds", "--name", "theorem1", "--M", "1", "--n", "100", "--delta", "0.5", "--nu", "4",
        "--format", "csv",
    ]);
    assert!(out.status.success());
    let q = BoundQuery {
        max_m: Some(1),
        n: Some(100),
        delta: Some(0.5),
        nu: Some(4),
        ..Default::default()
    };
    assert_eq!(
        stdout(&out),
        evaluate(BoundName::Theorem1, &q).unwrap().to_csv()
    );
}

#[test]
fn parameter_errors_exit_2() {
    let out = expsum(&[
        "bounds", "--name", "theorem2", "--N", "6", "--n", "50", "--delta", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("N must be prime >= 5"));
    assert_eq!(
        expsum(&["bounds", "--name", "nonsense"]).status.code(),
        Some(2)
    );
    assert_eq!(
        expsum(&["bounds", "--name", "theorem1", "--bogus", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        expsum(&[
            "bounds",
            "--name",
            "theorem1",
            "--M",
            "2000000000",
            "--n",
            "10",
            "--delta",
            "0.5"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        expsum(&["sample", "--model", "uniform_subset", "--N", "7"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn paper_table_default() {
    let out = expsum(&["paper-table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text,
        table_to_csv(&paper_example_table(997, 2, &[2.0, 3.0]).unwrap())
    );
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(
        rows[1].starts_with("2,221,")
            && rows[1].ends_with("published table prints n=242; formula gives 221")
    );
    assert!(rows[2].starts_with("3,332,"));
}

#[test]
fn sample_matches_library() {
    let out = expsum(&[
        "sample",
        "--model",
        "bernoulli_selection",
        "--N",
        "31",
        "--tau",
        "0.3",
        "--seed",
        "9",
    ]);
    let model = OmegaModel::new(ModelKind::BernoulliSelection { tau: 0.3 }, 31).unwrap();
    assert_eq!(stdout(&out), sample_omega(&model, 9).to_json() + "\n");
    let out = expsum(&[
        "sample",
        "--model",
        "occupation_range",
        "--N",
        "7",
        "--n",
        "4",
        "--distribution",
    ]);
    let model = OmegaModel::new(ModelKind::OccupationRange { n: 4 }, 7).unwrap();
    assert_eq!(stdout(&out), size_distribution(&model).to_csv());
}

#[test]
fn certify_matches_library() {
    let out = expsum(&["certify", "--N", "5", "--T", "1", "--points", "0,1,2,3,4"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let draw = FrequencyDraw::new(5, vec![0, 1, 2, 3, 4]).unwrap();
    let verdict = certificate_check(&kernel_profile(&draw), 1).unwrap();
    assert_eq!(v["holds"], verdict.holds);
    assert_eq!(v["margin"].as_f64().unwrap(), verdict.margin);
    let out = expsum(&["certify", "--N", "5", "--T", "1", "--points", "1,1,1"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["holds"], false);
}

#[test]
fn recover_from_signal_and_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let mut values = vec![Complex64::new(0.0, 0.0); 13];
    values[2] = Complex64::new(1.0, 0.5);
    values[9] = Complex64::new(-0.25, 0.0);
    let x = Signal::new(values).unwrap();
    let signal_path = dir.path().join("x.json");
    fs::write(&signal_path, x.to_json()).unwrap();
    let omega = [0usize, 1, 3, 4, 6, 7, 10, 12];
    let expected = basis_pursuit(&measure(&x, &omega).unwrap(), &SolverConfig::default())
        .unwrap()
        .to_json()
        + "\n";
    let out = expsum(&[
        "recover",
        "--signal",
        signal_path.to_str().unwrap(),
        "--omega",
        "0,1,3,4,6,7,10,12",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), expected);
    let meas_path = dir.path().join("m.json");
    fs::write(&meas_path, measure(&x, &omega).unwrap().to_json()).unwrap();
    let out = expsum(&["recover", "--measurements", meas_path.to_str().unwrap()]);
    assert_eq!(stdout(&out), expected);
    assert_eq!(
        expsum(&["recover", "--measurements", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn experiment_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TAIL2);
    let mut outputs = Vec::new();
    for (i, extra) in [
        vec![],
        vec!["--threads", "1"],
        vec!["--threads", "4"],
        vec!["--sequential"],
    ]
    .into_iter()
    .enumerate()
    {
        let out_dir = dir.path().join(format!("run{i}"));
        let mut args = vec![
            "experiment",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend(extra);
        let out = expsum(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(["summary.csv", "trials.csv"].map(|f| fs::read(out_dir.join(f)).unwrap()));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    // the written summary equals the library's
    let cfg = ExperimentConfig::from_toml(TAIL2).unwrap();
    let lib = run_experiment(&cfg, Execution::Sequential).unwrap();
    assert_eq!(outputs[0][0], lib.files[0].1.as_bytes());
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run0/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["master_seed"], 1);
}

#[test]
fn experiment_overrides_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TAIL2);
    let out_dir = dir.path().join("o");
    let out = expsum(&[
        "experiment",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
        "--trials",
        "10",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let trials = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 11);
    let bad = write_config(dir.path(), &TAIL2.replace("N = 31", "N = 4"));
    assert_eq!(
        expsum(&["experiment", "--config", &bad]).status.code(),
        Some(2)
    );
    assert_eq!(
        expsum(&["experiment", "--config", "/nonexistent.toml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        expsum(&["experiment", "--config", &config, "--trials", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        ExperimentConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert_eq!(seen, 6);
}
