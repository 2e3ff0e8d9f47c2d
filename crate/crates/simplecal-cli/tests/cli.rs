//! End-to-end tests of the `simplecal` binary.

use std::path::Path;
use std::process::{Command, Output};

use simplecal::aquifer::{
    build_zoning_simplification, forward_data, generate_data, linearize, AquiferConfig,
    AquiferState,
};
use simplecal::model::Simplification;
use simplecal::schemes::{make_filter, run_data_driven, run_optimal};
use simplecal::{Matrix64, Vector64};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simplecal"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let output = bin().args(args).current_dir(dir).output().expect("spawn");
    assert!(
        output.status.success(),
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn parse_matrix(path: &Path) -> Matrix64 {
    let text = std::fs::read_to_string(path).expect("matrix file");
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let (r, c) = header.split_once(',').unwrap();
    let (rows, cols): (usize, usize) = (r.parse().unwrap(), c.parse().unwrap());
    let values: Vec<f64> = lines
        .flat_map(|l| l.split(','))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().unwrap())
        .collect();
    Matrix64::from_row_slice(rows, cols, &values)
}

fn write_example(dir: &Path) {
    run_ok(
        &[
            "example",
            "--out",
            "example",
            "--mcmc-iters",
            "5000",
            "--mc-samples",
            "5000",
        ],
        dir,
    );
}

#[test]
fn example_writes_expected_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    let dir = tmp.path().join("example");
    for file in [
        "g.csv",
        "y.csv",
        "sigma_x.csv",
        "sigma_ed.csv",
        "sigma_ep.csv",
        "c.csv",
        "problem.spec",
        "sigma_v.csv",
        "sigma_v_opt.csv",
        "sigma_v_dat.csv",
        "densities.csv",
        "mcmc_histogram.csv",
        "audit.txt",
        "conservativeness_naive.txt",
        "conservativeness_data_driven.txt",
        "report.txt",
    ] {
        assert!(dir.join(file).exists(), "missing {file}");
    }
    // Reported prior matrices match the library.
    let sigma_v = parse_matrix(&dir.join("sigma_v.csv"));
    assert!((sigma_v[(0, 0)] - 8.582e-2).abs() < 1e-5);
    let sigma_v_opt = parse_matrix(&dir.join("sigma_v_opt.csv"));
    assert!((sigma_v_opt[(0, 0)] - 27.443e-2).abs() < 1e-5);

    // Byte-identical outputs on a second run with the same seed.
    let tmp2 = tempfile::tempdir().unwrap();
    write_example(tmp2.path());
    for file in ["report.txt", "densities.csv", "mcmc_histogram.csv", "sigma_v_dat.csv"] {
        let a = std::fs::read(dir.join(file)).unwrap();
        let b = std::fs::read(tmp2.path().join("example").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn run_optimal_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    run_ok(
        &[
            "run",
            "--spec",
            "example/problem.spec",
            "--scheme",
            "optimal",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    let mean = parse_matrix(&tmp.path().join("out/posterior_mean.csv"));
    let cov = parse_matrix(&tmp.path().join("out/posterior_cov.csv"));

    let cfg = AquiferConfig::<f64>::default();
    let model = linearize(&cfg).unwrap();
    let measured = generate_data(&cfg).unwrap();
    let at_mean = forward_data(&cfg, &AquiferState::prior_mean(&cfg)).unwrap();
    let d = Vector64::from_element(1, measured - at_mean);
    let expected = run_optimal(&model, &d).unwrap();
    assert!((mean[(0, 0)] - expected.posterior.mean()[0]).abs() < 1e-12);
    assert!((cov[(0, 0)] - expected.posterior.covariance()[(0, 0)]).abs() < 1e-12);
}

#[test]
fn run_compensated_notes_equality_with_optimal() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    let output = run_ok(
        &[
            "run",
            "--spec",
            "example/problem.spec",
            "--scheme",
            "compensated",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("matches the optimal posterior"),
        "stdout: {stdout}"
    );
}

#[test]
fn run_data_driven_with_tsvd_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    run_ok(
        &[
            "run",
            "--spec",
            "example/problem.spec",
            "--scheme",
            "data-driven",
            "--tsvd-k",
            "1",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    let cov = parse_matrix(&tmp.path().join("out/posterior_cov.csv"));

    let cfg = AquiferConfig::<f64>::default();
    let model = linearize(&cfg).unwrap();
    let simp = Simplification::new(&model, build_zoning_simplification(&cfg, false)).unwrap();
    let filter = make_filter(&model, &simp, Matrix64::identity(1, 1)).unwrap();
    let measured = generate_data(&cfg).unwrap();
    let at_mean = forward_data(&cfg, &AquiferState::prior_mean(&cfg)).unwrap();
    let d = Vector64::from_element(1, measured - at_mean);
    let expected = run_data_driven(&model, &simp, &filter, &d).unwrap();
    assert!((cov[(0, 0)] - expected.posterior.covariance()[(0, 0)]).abs() < 1e-12);
}

#[test]
fn missing_sigma_ep_file_is_exit_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("p.spec"),
        "g = 1,1: 1\ny = 1,1: 1\nsigma_x = 1,1: 1\nsigma_ed = 1,1: 1\nsigma_ep = gone.csv\nd = 1\n",
    )
    .unwrap();
    let output = bin()
        .args(["run", "--spec", "p.spec"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("sigma_ep"), "stderr: {stderr}");
}

#[test]
fn run_without_dataset_is_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("p.spec"),
        "g = 1,1: 1\ny = 1,1: 1\nsigma_x = 1,1: 1\nsigma_ed = 1,1: 1\nsigma_ep = 1,1: 0\n",
    )
    .unwrap();
    let output = bin()
        .args(["run", "--spec", "p.spec"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn singular_innovation_is_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // Zero prior and zero noise: the innovation matrix is identically zero.
    std::fs::write(
        tmp.path().join("p.spec"),
        "g = 1,1: 1\ny = 1,1: 1\nsigma_x = 1,1: 0\nsigma_ed = 1,1: 0\nsigma_ep = 1,1: 0\nd = 1\n",
    )
    .unwrap();
    let output = bin()
        .args(["run", "--spec", "p.spec"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn audit_reports_the_expected_verdict_pattern() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    let output = run_ok(&["audit", "--spec", "example/problem.spec"], tmp.path());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("optimal-simplification FAIL"), "{stdout}");
    assert!(stdout.contains("balanced-error         FAIL"), "{stdout}");
    assert!(stdout.contains("rank-condition         PASS"), "{stdout}");
    assert!(stdout.contains("prediction-structure   PASS"), "{stdout}");

    let strict = bin()
        .args(["audit", "--spec", "example/problem.spec", "--strict"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn conservativeness_verdicts_for_the_example() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    let naive = run_ok(
        &[
            "conservativeness",
            "--spec",
            "example/problem.spec",
            "--scheme",
            "naive",
            "--mc-samples",
            "20000",
            "--seed",
            "3",
        ],
        tmp.path(),
    );
    let stdout = String::from_utf8_lossy(&naive.stdout);
    assert!(stdout.contains("verdict: non-conservative"), "{stdout}");
    assert!(stdout.contains("monte carlo estimate"), "{stdout}");

    let dd = run_ok(
        &[
            "conservativeness",
            "--spec",
            "example/problem.spec",
            "--scheme",
            "data-driven",
        ],
        tmp.path(),
    );
    let stdout = String::from_utf8_lossy(&dd.stdout);
    assert!(stdout.contains("verdict: equality"), "{stdout}");

    let optimal = run_ok(
        &[
            "conservativeness",
            "--spec",
            "example/problem.spec",
            "--scheme",
            "optimal",
        ],
        tmp.path(),
    );
    let stdout = String::from_utf8_lossy(&optimal.stdout);
    assert!(stdout.contains("verdict: equality"), "{stdout}");
}

#[test]
fn filter_tsvd_writes_the_filter() {
    let tmp = tempfile::tempdir().unwrap();
    write_example(tmp.path());
    run_ok(
        &[
            "filter-tsvd",
            "--spec",
            "example/problem.spec",
            "--tsvd-k",
            "1",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    let f = parse_matrix(&tmp.path().join("out/f_tsvd.csv"));
    assert_eq!((f.nrows(), f.ncols()), (1, 1));
    assert!((f[(0, 0)].abs() - 1.0).abs() < 1e-12);
}
