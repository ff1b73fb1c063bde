//! Command-line front end: weight-sequence generation, solving problems from
//! CSV files, Monte-Carlo simulation, and cross-solver benchmarking.
//!
//! Exit codes are a stable contract: 0 success, 2 usage or input-format
//! errors, 3 iteration cap reached (the solution file is still written),
//! 4 numerical failure (for `simulate`, also when at least 5% of
//! replications fail; the partial output is still written).
//!
//! Every numeric value is written with 17 significant digits so re-reading a
//! file reproduces the in-memory values exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::experiment::{
    aggregate, gen_instance, run_replications, DesignKind, RepStatus, SimConfig, SolverKind,
    DEFAULT_SUPPORT_TOL,
};
use crate::hpe::{hpe_solve, HpeOptions};
use crate::ladmm::{ladmm_solve, LadmmOptions};
use crate::model::ProblemData;
use crate::pdsp::{pdsp_solve, SolveResult, SolveStatus, SolverOptions};
use crate::sorted_l1::{bh_lambda, gaussian_adjusted_lambda, sorted_l1_norm, LambdaSeq};

/// Formats with 17 significant digits; round-trips any finite f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A rectangular numeric CSV: comma separators, `.` decimal point, one row
/// per line, and an optional header line detected by a non-numeric first
/// token.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvMatrix {
    pub fn read_from(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, path: &str) -> Result<Self> {
        let file_err = |message: String| Error::FileFormat {
            path: path.to_string(),
            message,
        };
        let mut header = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
            if rows.is_empty() && header.is_none() && tokens[0].parse::<f64>().is_err() {
                header = Some(tokens.into_iter().map(String::from).collect());
                continue;
            }
            let mut row = Vec::with_capacity(tokens.len());
            for tok in &tokens {
                let value: f64 = tok.parse().map_err(|_| {
                    file_err(format!("line {}: '{tok}' is not a number", lineno + 1))
                })?;
                if !value.is_finite() {
                    return Err(file_err(format!("line {}: non-finite value", lineno + 1)));
                }
                row.push(value);
            }
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(file_err(format!(
                        "line {}: expected {} columns, got {}",
                        lineno + 1,
                        first.len(),
                        row.len()
                    )));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(file_err("no data rows".to_string()));
        }
        Ok(CsvMatrix { header, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn to_array2(&self) -> Array2<f64> {
        let (n, p) = (self.n_rows(), self.n_cols());
        Array2::from_shape_fn((n, p), |(i, j)| self.rows[i][j])
    }

    /// Flattens a single-column (or single-row) matrix into a vector.
    pub fn to_array1(&self, path: &str) -> Result<Array1<f64>> {
        if self.n_cols() == 1 {
            Ok(Array1::from_iter(self.rows.iter().map(|r| r[0])))
        } else if self.n_rows() == 1 {
            Ok(Array1::from_vec(self.rows[0].clone()))
        } else {
            Err(Error::FileFormat {
                path: path.to_string(),
                message: format!(
                    "expected a vector (one column or one row), got {}x{}",
                    self.n_rows(),
                    self.n_cols()
                ),
            })
        }
    }
}

/// Writes one value per line with full precision.
pub fn write_vector(path: &Path, values: &Array1<f64>) -> Result<()> {
    let mut out = String::new();
    for v in values.iter() {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_trace(path: &Path, result: &SolveResult) -> Result<()> {
    let mut out = String::with_capacity(64 * (result.trace.len() + 1));
    out.push_str(
        "iter,rel_change_point,rel_change_ergodic,primal_obj,primal_feas,dual_obj,dual_feas,gap\n",
    );
    for rec in &result.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            rec.iter,
            fmt_f64(rec.rel_change_point),
            fmt_f64(rec.rel_change_ergodic),
            fmt_f64(rec.primal_obj),
            fmt_f64(rec.primal_feas),
            fmt_f64(rec.dual_obj),
            fmt_f64(rec.dual_feas),
            fmt_f64(rec.gap),
        );
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Pdsp,
    Ladmm,
    Hpe,
}

impl From<AlgoArg> for SolverKind {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Pdsp => SolverKind::Pdsp,
            AlgoArg::Ladmm => SolverKind::Ladmm,
            AlgoArg::Hpe => SolverKind::Hpe,
        }
    }
}

impl AlgoArg {
    fn name(&self) -> &'static str {
        match self {
            AlgoArg::Pdsp => "pdsp",
            AlgoArg::Ladmm => "ladmm",
            AlgoArg::Hpe => "hpe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Standard,
    Doubled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DesignArg {
    Gaussian,
    Orthogonal,
}

impl From<DesignArg> for DesignKind {
    fn from(d: DesignArg) -> Self {
        match d {
            DesignArg::Gaussian => DesignKind::Gaussian,
            DesignArg::Orthogonal => DesignKind::Orthogonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdjustArg {
    None,
    Gaussian,
}

#[derive(Parser, Debug)]
#[command(
    name = "odsel",
    about = "Ordered Dantzig selector: saddle-point solvers, weight sequences, and Monte-Carlo experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Benjamini-Hochberg weight sequence, one value per line.
    Lambda(LambdaArgs),
    /// Solve one problem instance read from CSV files.
    Solve(SolveArgs),
    /// Monte-Carlo FDR/power study over seeded replications.
    Simulate(SimulateArgs),
    /// Time several solvers on a battery of seeded instances.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct LambdaArgs {
    #[arg(long)]
    p: usize,
    /// Target FDR level in (0,1).
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Weight adjustment for non-orthogonal designs.
    #[arg(long, value_enum, default_value_t = AdjustArg::None)]
    adjust: AdjustArg,
    /// Sample size; required when --adjust gaussian.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "out-path")]
    out_path: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Design matrix CSV (n rows, p columns).
    #[arg(long = "x-path")]
    x_path: PathBuf,
    /// Response vector CSV (one value per line).
    #[arg(long = "y-path")]
    y_path: PathBuf,
    /// Weight sequence CSV (one value per line, non-increasing).
    #[arg(long = "lambda-path")]
    lambda_path: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Pdsp)]
    algo: AlgoArg,
    /// Extragradient flavor (pdsp only; ignored by other algorithms).
    #[arg(long, value_enum, default_value_t = ModeArg::Standard)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    max_iters: usize,
    /// Where to write the solution (one value per line).
    #[arg(long = "out-path")]
    out_path: PathBuf,
    /// Optional per-checkpoint trace CSV.
    #[arg(long = "trace-path")]
    trace_path: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Number of active signal coordinates.
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum)]
    design: DesignArg,
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = AlgoArg::Pdsp)]
    algo: AlgoArg,
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    #[arg(long = "out-path")]
    out_path: PathBuf,
    /// Worker threads; 1 = serial, 0 = one per core.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated list of solvers to time.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algos: Vec<AlgoArg>,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = DesignArg::Gaussian)]
    design: DesignArg,
    /// Number of random instances per solver.
    #[arg(long)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long = "out-path")]
    out_path: PathBuf,
    /// Worker threads; 1 = serial, 0 = one per core.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn cmd_lambda(args: &LambdaArgs) -> Result<i32> {
    let base = bh_lambda(args.p, args.q, args.sigma)?;
    let lam = match args.adjust {
        AdjustArg::None => base,
        AdjustArg::Gaussian => {
            let n = args.n.ok_or_else(|| {
                Error::invalid("--adjust gaussian requires --n (the sample size)")
            })?;
            gaussian_adjusted_lambda(&base, n)?
        }
    };
    write_vector(&args.out_path, &Array1::from_vec(lam.values().to_vec()))?;
    Ok(0)
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let x = CsvMatrix::read_from(&args.x_path)?.to_array2();
    let y = CsvMatrix::read_from(&args.y_path)?
        .to_array1(&args.y_path.display().to_string())?;
    let lam_raw = CsvMatrix::read_from(&args.lambda_path)?
        .to_array1(&args.lambda_path.display().to_string())?;
    let prob = ProblemData::new(x, y)?;
    let lam = LambdaSeq::from_slice(lam_raw.as_slice().expect("contiguous"))?;

    let result = match args.algo {
        AlgoArg::Pdsp => {
            let mut opts = match args.mode {
                ModeArg::Standard => SolverOptions::standard(prob.l()),
                ModeArg::Doubled => SolverOptions::doubled(prob.l()),
            };
            opts.eps = args.eps;
            opts.max_iters = args.max_iters;
            pdsp_solve(&prob, &lam, &lam, &opts, None)?
        }
        AlgoArg::Ladmm => {
            let mut opts = LadmmOptions::recommended(prob.l());
            opts.eps = args.eps;
            opts.max_iters = args.max_iters;
            ladmm_solve(&prob, &lam, &opts, None)?
        }
        AlgoArg::Hpe => {
            let mut opts = HpeOptions::recommended(prob.l());
            opts.eps = args.eps;
            opts.max_iters = args.max_iters;
            hpe_solve(&prob, &lam, &opts, None)?
        }
    };

    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    write_vector(&args.out_path, &result.w)?;
    if let Some(trace_path) = &args.trace_path {
        write_trace(trace_path, &result)?;
    }
    Ok(match result.status {
        SolveStatus::MaxIters => 3,
        _ => 0,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let cfg = SimConfig {
        n: args.n,
        p: args.p,
        s: args.s,
        q: args.q,
        sigma_noise: args.sigma,
        design: args.design.into(),
        reps: args.reps,
        seed: args.seed,
        solver: args.algo.into(),
        eps: args.eps,
        support_tol: DEFAULT_SUPPORT_TOL,
    };
    let records = run_replications(&cfg, args.threads)?;
    let result = aggregate(records);

    let mut out = String::new();
    out.push_str("rep,V,R,fdp,power,iters,status\n");
    for r in &result.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.rep,
            r.false_discoveries,
            r.discoveries,
            fmt_f64(r.fdp),
            fmt_f64(r.power),
            r.iterations,
            r.status.as_str(),
        );
    }
    let _ = writeln!(
        out,
        "# mean_fdr={},se_fdr={},mean_power={},se_power={}",
        fmt_f64(result.mean_fdr),
        fmt_f64(result.se_fdr),
        fmt_f64(result.mean_power),
        fmt_f64(result.se_power),
    );
    fs::write(&args.out_path, out)?;

    if result.failed * 20 >= cfg.reps {
        eprintln!(
            "error: {} of {} replications failed (5% tolerance exceeded); partial results written",
            result.failed, cfg.reps
        );
        return Ok(4);
    }
    Ok(0)
}

struct BenchRow {
    algo: &'static str,
    rep: usize,
    seconds: f64,
    iters: usize,
    status: &'static str,
    final_obj: f64,
}

fn bench_one(cfg: &SimConfig, algo: AlgoArg, rep: usize, max_iters: usize) -> BenchRow {
    let attempt = || -> Result<(f64, usize, SolveStatus, f64)> {
        let (prob, _, lam) = gen_instance(cfg, rep)?;
        let started = Instant::now();
        let result = match algo {
            AlgoArg::Pdsp => {
                let mut opts = SolverOptions::standard(prob.l());
                opts.eps = cfg.eps;
                opts.max_iters = max_iters;
                pdsp_solve(&prob, &lam, &lam, &opts, None)?
            }
            AlgoArg::Ladmm => {
                let mut opts = LadmmOptions::recommended(prob.l());
                opts.eps = cfg.eps;
                opts.max_iters = max_iters;
                ladmm_solve(&prob, &lam, &opts, None)?
            }
            AlgoArg::Hpe => {
                let mut opts = HpeOptions::recommended(prob.l());
                opts.eps = cfg.eps;
                opts.max_iters = max_iters;
                hpe_solve(&prob, &lam, &opts, None)?
            }
        };
        let seconds = started.elapsed().as_secs_f64();
        let obj = sorted_l1_norm(&result.w, &lam)?;
        Ok((seconds, result.iterations, result.status, obj))
    };
    match attempt() {
        Ok((seconds, iters, status, final_obj)) => BenchRow {
            algo: algo.name(),
            rep,
            seconds,
            iters,
            status: match status {
                SolveStatus::MaxIters => RepStatus::MaxIters.as_str(),
                _ => RepStatus::Converged.as_str(),
            },
            final_obj,
        },
        Err(_) => BenchRow {
            algo: algo.name(),
            rep,
            seconds: 0.0,
            iters: 0,
            status: RepStatus::Failed.as_str(),
            final_obj: f64::NAN,
        },
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let cfg = SimConfig {
        n: args.n,
        p: args.p,
        s: args.s,
        q: args.q,
        sigma_noise: args.sigma,
        design: args.design.into(),
        reps: args.repeats,
        seed: args.seed,
        solver: SolverKind::Pdsp, // per-row algo overrides; field unused here
        eps: args.eps,
        support_tol: DEFAULT_SUPPORT_TOL,
    };
    cfg.validate()?;

    let jobs: Vec<(AlgoArg, usize)> = args
        .algos
        .iter()
        .flat_map(|algo| (0..args.repeats).map(move |rep| (*algo, rep)))
        .collect();
    let rows: Vec<BenchRow> = if args.threads == 1 {
        jobs.iter()
            .map(|(algo, rep)| bench_one(&cfg, *algo, *rep, args.max_iters))
            .collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::invalid(format!("could not build thread pool: {e}")))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|(algo, rep)| bench_one(&cfg, *algo, *rep, args.max_iters))
                .collect()
        })
    };

    let mut out = String::new();
    out.push_str("algo,rep,seconds,iters,status,final_obj\n");
    for row in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.algo,
            row.rep,
            fmt_f64(row.seconds),
            row.iters,
            row.status,
            fmt_f64(row.final_obj),
        );
    }
    fs::write(&args.out_path, out)?;
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Lambda(args) => cmd_lambda(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NumericalFailure { .. } => 4,
        _ => 2,
    }
}

/// Parses arguments from the process environment, runs the selected command,
/// and returns the exit code for `std::process::exit`.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Clap renders help/version on stdout (code 0) and usage errors
            // on stderr (code 2).
            let _ = err.print();
            return err.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
