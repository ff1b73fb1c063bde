//! End-to-end tests of the `odsel` binary: flag handling, file formats,
//! exit codes, and byte determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::Array1;
use odsel::slope_orthogonal_solve;
use odsel::LambdaSeq;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_odsel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_column(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().unwrap())
        .collect()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn lambda_reference_values_and_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lam.csv");
    let st = run(&[
        "lambda", "--p", "2", "--q", "0.1", "--sigma", "1", "--out-path",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let lam = read_column(&out);
    assert!((lam[0] - 1.9600).abs() < 1e-4);
    assert!((lam[1] - 1.6449).abs() < 1e-4);

    let out1 = dir.path().join("single.csv");
    run(&["lambda", "--p", "1", "--q", "0.5", "--out-path", out1.to_str().unwrap()]);
    let single = read_column(&out1);
    assert!((single[0] - 0.6745).abs() < 1e-4);

    let out2 = dir.path().join("doubled.csv");
    run(&[
        "lambda", "--p", "2", "--q", "0.1", "--sigma", "2", "--out-path",
        out2.to_str().unwrap(),
    ]);
    let doubled = read_column(&out2);
    for (d, b) in doubled.iter().zip(lam.iter()) {
        assert!((d - 2.0 * b).abs() < 1e-12);
    }
}

#[test]
fn lambda_flag_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lam.csv");
    // q outside (0,1)
    let st = run(&["lambda", "--p", "2", "--q", "1.5", "--out-path", out.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&st.stderr).is_empty());
    // gaussian adjustment without n
    let st = run(&[
        "lambda", "--p", "2", "--q", "0.1", "--adjust", "gaussian", "--out-path",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
    // unknown subcommand
    let st = run(&["frobnicate"]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn solve_one_dimensional_instance() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_file(dir.path(), "x.csv", "1.0\n");
    let y = write_file(dir.path(), "y.csv", "3.0\n");
    let lam = write_file(dir.path(), "lam.csv", "1.0\n");
    let out = dir.path().join("w.csv");
    let trace = dir.path().join("trace.csv");

    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--eps", "1e-9",
        "--out-path", out.to_str().unwrap(), "--trace-path", trace.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let w = read_column(&out);
    assert_eq!(w.len(), 1);
    assert!((w[0] - 2.0).abs() < 1e-5, "w = {}", w[0]);

    let trace_text = fs::read_to_string(&trace).unwrap();
    let header = trace_text.lines().next().unwrap();
    assert_eq!(
        header,
        "iter,rel_change_point,rel_change_ergodic,primal_obj,primal_feas,dual_obj,dual_feas,gap"
    );
    assert!(trace_text.lines().count() >= 2);
}

#[test]
fn solve_zero_response_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_file(dir.path(), "x.csv", "1.0,0.0\n0.0,1.0\n");
    let y = write_file(dir.path(), "y.csv", "0.0\n0.0\n");
    let lam = write_file(dir.path(), "lam.csv", "1.0\n0.5\n");
    let out = dir.path().join("w.csv");
    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    assert!(read_column(&out).iter().all(|v| *v == 0.0));
}

#[test]
fn solve_exit_codes_for_bad_input_and_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_file(dir.path(), "x.csv", "1.0\n");
    let y = write_file(dir.path(), "y.csv", "3.0\n");
    let y_long = write_file(dir.path(), "y2.csv", "3.0\n1.0\n");
    let lam = write_file(dir.path(), "lam.csv", "1.0\n");
    let bad = write_file(dir.path(), "bad.csv", "1.0,zzz\n");
    let out = dir.path().join("w.csv");

    // Unparseable file.
    let st = run(&[
        "solve", "--x-path", bad.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));

    // Dimension mismatch between X and y.
    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y_long.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));

    // Iteration cap: exit 3, but the solution file is still written.
    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--eps", "1e-14", "--max-iters", "3",
        "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(3));
    assert_eq!(read_column(&out).len(), 1);
}

#[test]
fn solve_orthogonal_matches_analytic_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let p = 6;
    let mut x_text = String::new();
    for i in 0..p {
        let row: Vec<&str> = (0..p).map(|j| if i == j { "1.0" } else { "0.0" }).collect();
        x_text.push_str(&row.join(","));
        x_text.push('\n');
    }
    let x = write_file(dir.path(), "x.csv", &x_text);
    let y_vals = [2.5, -1.75, 0.25, 3.0, -0.5, 1.25];
    let y_text: String = y_vals.iter().map(|v| format!("{v}\n")).collect();
    let y = write_file(dir.path(), "y.csv", &y_text);
    let lam_vals = [1.6, 1.3, 1.0, 0.8, 0.5, 0.2];
    let lam_text: String = lam_vals.iter().map(|v| format!("{v}\n")).collect();
    let lam = write_file(dir.path(), "lam.csv", &lam_text);
    let out = dir.path().join("w.csv");

    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--eps", "1e-10",
        "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));

    let oracle = slope_orthogonal_solve(
        &Array1::from_vec(y_vals.to_vec()),
        &LambdaSeq::from_slice(&lam_vals).unwrap(),
    )
    .unwrap();
    for (got, want) in read_column(&out).iter().zip(oracle.iter()) {
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }
}

#[test]
fn solve_accepts_all_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_file(dir.path(), "x.csv", "1.0\n");
    let y = write_file(dir.path(), "y.csv", "3.0\n");
    let lam = write_file(dir.path(), "lam.csv", "1.0\n");
    for algo in ["pdsp", "ladmm", "hpe"] {
        let out = dir.path().join(format!("w_{algo}.csv"));
        let st = run(&[
            "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
            "--lambda-path", lam.to_str().unwrap(), "--algo", algo, "--eps", "1e-9",
            "--out-path", out.to_str().unwrap(),
        ]);
        assert_eq!(st.status.code(), Some(0), "algo {algo}");
        let w = read_column(&out);
        assert!((w[0] - 2.0).abs() < 1e-4, "algo {algo}: w = {}", w[0]);
    }
    // The doubled extragradient mode is also reachable from the flag.
    let out = dir.path().join("w_doubled.csv");
    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--mode", "doubled", "--eps", "1e-9",
        "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    assert!((read_column(&out)[0] - 2.0).abs() < 1e-4);
}

#[test]
fn simulate_writes_records_summary_and_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("sim_a.csv");
    let out_b = dir.path().join("sim_b.csv");
    let base = [
        "simulate", "--n", "24", "--p", "16", "--s", "3", "--design", "orthogonal",
        "--reps", "4", "--seed", "9",
    ];
    for out in [&out_a, &out_b] {
        let mut args: Vec<&str> = base.to_vec();
        args.extend(["--out-path", out.to_str().unwrap()]);
        let st = run(&args);
        assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    }
    let bytes_a = fs::read(&out_a).unwrap();
    assert_eq!(bytes_a, fs::read(&out_b).unwrap());

    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rep,V,R,fdp,power,iters,status");
    let data: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 4);
    for (i, line) in data.iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[0], i.to_string());
        assert_eq!(cols[6], "converged");
    }
    let summary = text.lines().last().unwrap();
    assert!(summary.starts_with("# mean_fdr="), "summary line: {summary}");
    assert!(summary.contains("se_fdr=") && summary.contains("mean_power="));

    // A parallel run produces the same bytes: row order is fixed by rep index.
    let out_c = dir.path().join("sim_c.csv");
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--threads", "3", "--out-path", out_c.to_str().unwrap()]);
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(fs::read(&out_c).unwrap(), fs::read(&out_a).unwrap());
}

#[test]
fn simulate_global_null_reports_zero_power() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let st = run(&[
        "simulate", "--n", "20", "--p", "12", "--s", "0", "--design", "orthogonal",
        "--reps", "3", "--seed", "4", "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split(',').collect();
        let power: f64 = cols[4].parse().unwrap();
        assert_eq!(power, 0.0);
    }
}

#[test]
fn simulate_rejects_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    // orthogonal design with n < p
    let st = run(&[
        "simulate", "--n", "8", "--p", "16", "--s", "2", "--design", "orthogonal",
        "--reps", "2", "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
    // bad design name is a clap parse error
    let st = run(&[
        "simulate", "--n", "8", "--p", "4", "--s", "2", "--design", "fancy",
        "--reps", "2", "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn bench_rows_and_cross_algorithm_objective_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let st = run(&[
        "bench", "--algos", "pdsp,ladmm,hpe", "--p", "12", "--n", "20", "--s", "2",
        "--design", "orthogonal", "--repeats", "2", "--seed", "3", "--eps", "1e-8",
        "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "algo,rep,seconds,iters,status,final_obj");

    let mut by_rep: std::collections::HashMap<&str, Vec<f64>> = Default::default();
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6);
        rows += 1;
        let seconds: f64 = cols[2].parse().unwrap();
        assert!(seconds >= 0.0 && seconds.is_finite());
        assert_eq!(cols[4], "converged");
        by_rep.entry(cols[1]).or_default().push(cols[5].parse().unwrap());
    }
    assert_eq!(rows, 6); // 3 algos x 2 repeats
    for (rep, objs) in by_rep {
        let max = objs.iter().cloned().fold(f64::MIN, f64::max);
        let min = objs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            max - min <= 1e-4 * (1.0 + max.abs()),
            "rep {rep}: objective spread {} vs {}",
            min,
            max
        );
    }

    // Unknown algorithm name is rejected by flag parsing.
    let st = run(&[
        "bench", "--algos", "pdsp,quantum", "--p", "4", "--n", "8", "--s", "1",
        "--repeats", "1", "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn solution_files_round_trip_fixed_precision() {
    // Written values re-read bit-identically through the CSV layer.
    let dir = tempfile::tempdir().unwrap();
    let x = write_file(dir.path(), "x.csv", "1.0\n");
    let y = write_file(dir.path(), "y.csv", "0.7071067811865476\n");
    let lam = write_file(dir.path(), "lam.csv", "0.1\n");
    let out = dir.path().join("w.csv");
    let st = run(&[
        "solve", "--x-path", x.to_str().unwrap(), "--y-path", y.to_str().unwrap(),
        "--lambda-path", lam.to_str().unwrap(), "--eps", "1e-12",
        "--out-path", out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let parsed: f64 = text.trim().parse().unwrap();
    // Re-writing the parsed value reproduces the file text.
    assert_eq!(format!("{parsed:.16e}\n"), text);
}
