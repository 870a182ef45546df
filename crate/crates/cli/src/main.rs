#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use smalleig::battery::{run_check, BatteryConfig, CHECKS};
use smalleig::distspec::dist_spec;
use smalleig::driver::{forward_eig, solve, EigenReport, SolveOptions};
use smalleig::hessenberg::hess_bu;
use smalleig::scalar::Mode;
use smalleig::verify::{largest_singular_value, matching_distance, oracle_eigenvalues, pseudospectrum_grid};
use smalleig::{Complex64, ComplexMatrix, Error, HessenbergMatrix};

const EXIT_INPUT: u8 = 1;
const EXIT_RETRY: u8 = 2;
const EXIT_PRECISION: u8 = 3;

#[derive(Parser)]
#[command(name = "smalleig", version, about = "Randomized shifted-QR eigenvalues with a backward-error guarantee")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of a matrix file, written as a JSON report.
    Solve(SolveArgs),
    /// Distance from a shift to the spectrum.
    Distspec(DistspecArgs),
    /// Smallest singular value of z − M over a grid, as CSV.
    Pseudospec(PseudospecArgs),
    /// Acceptance battery at reduced trial counts plus fixture regressions.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Practical,
    Theory,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Relative backward accuracy.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.2)]
    phi: f64,
    /// Forward accuracy relative to the norm; overrides --delta with (beta/12)^n.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Practical)]
    mode: ModeArg,
    #[arg(long, default_value_t = 256)]
    m_cap: usize,
    /// Raise the deflation threshold to double-precision noise.
    #[arg(long)]
    precision_floor: bool,
    /// Include shift-search traces in the report.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct DistspecArgs {
    #[arg(long)]
    input: PathBuf,
    /// Shift as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long)]
    m: usize,
    /// Also print the oracle distance and whether the estimate is within 10% of it.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct PseudospecArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    /// `re_min,re_max,im_min,im_max`.
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: String,
    #[arg(long)]
    step: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Draws for the largest Monte Carlo checks; other counts scale with it.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
    /// Directory of fixture files; the shipped fixtures are used otherwise.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Comma-separated criteria to run, e.g. `C5,C7`; empty runs fixtures only.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::RetryBudgetExceeded { .. } => EXIT_RETRY,
        Error::PrecisionInsufficient { .. } => EXIT_PRECISION,
        _ => EXIT_INPUT,
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    ComplexMatrix::from_json_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => write_stdout(format!("{text}\n").as_bytes()),
    }
}

/// Stdout write that treats a closed pipe as success.
fn write_stdout(bytes: &[u8]) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::input(e.to_string())),
        _ => Ok(()),
    }
}

fn parse_numbers(s: &str, want: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if v.len() == want && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(Failure::input(format!("{what}: expected {want} comma-separated numbers, got {s:?}"))),
    }
}

fn parse_shift(s: &str) -> Result<Complex64, Failure> {
    match s.split(',').count() {
        1 => Ok(Complex64::new(parse_numbers(s, 1, "--s")?[0], 0.0)),
        _ => parse_numbers(s, 2, "--s").map(|v| Complex64::new(v[0], v[1])),
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    if !(a.delta > 0.0 && a.delta < 1.0) || !(a.phi > 0.0 && a.phi < 1.0) {
        return Err(Failure::input("--delta and --phi must lie in (0, 1)"));
    }
    if a.m_cap == 0 {
        return Err(Failure::input("--m-cap must be positive"));
    }
    let m = read_matrix(&a.input)?;
    let opts = SolveOptions {
        mode: match a.mode {
            ModeArg::Practical => Mode::Practical,
            ModeArg::Theory => Mode::Theory,
        },
        m_cap: a.m_cap,
        precision_floor: a.precision_floor,
        retry_budget: None,
        trace: a.trace,
    };
    let report: EigenReport = match a.beta {
        Some(beta) => forward_eig(&m, beta, a.phi, a.seed, &opts),
        None => solve(&m, a.delta, a.phi, a.seed, &opts),
    };
    write_output(a.output.as_deref(), &report.to_json())?;
    match &report.failure {
        None => Ok(()),
        Some(err) => Err(Failure { code: exit_code_for(err), message: err.to_string() }),
    }
}

fn cmd_distspec(a: &DistspecArgs) -> Result<(), Failure> {
    if a.m == 0 {
        return Err(Failure::input("--m must be at least 1"));
    }
    let s = parse_shift(&a.s)?;
    let m = read_matrix(&a.input)?;
    let h = match HessenbergMatrix::new(m.clone()) {
        Ok(h) => h,
        Err(_) => hess_bu(&m).h,
    };
    let d = dist_spec(&h, s, a.m).map_err(|e| Failure::input(e.to_string()))?;
    println!("tau = {:.12e}", d.tau);
    if a.verify {
        let eigs = oracle_eigenvalues(&m).map_err(|e| Failure::input(e.to_string()))?;
        let oracle = eigs.iter().map(|l| (s - l).norm()).fold(f64::INFINITY, f64::min);
        let inside = (0.9 * oracle..=1.1 * oracle).contains(&d.tau);
        println!("oracle d = {oracle:.12e}");
        println!("bracket [{:.6e}, {:.6e}]: {}", 0.9 * oracle, 1.1 * oracle, if inside { "inside" } else { "outside" });
    }
    Ok(())
}

fn cmd_pseudospec(a: &PseudospecArgs) -> Result<(), Failure> {
    let b = parse_numbers(&a.bbox, 4, "--box")?;
    if !(a.eps >= 0.0) {
        return Err(Failure::input("--eps must be nonnegative"));
    }
    if !(a.step > 0.0) || a.step > (b[1] - b[0]) || a.step > (b[3] - b[2]) {
        return Err(Failure::input("--step must be positive and no larger than the box"));
    }
    let m = read_matrix(&a.input)?;
    let grid =
        pseudospectrum_grid(&m, (b[0], b[1]), (b[2], b[3]), a.step).map_err(|e| Failure::input(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re", "im", "sigma_min", "in_pseudospectrum"]).map_err(|e| Failure::input(e.to_string()))?;
    for p in &grid {
        w.write_record([
            p.z.re.to_string(),
            p.z.im.to_string(),
            format!("{:e}", p.sigma_min),
            (p.sigma_min <= a.eps).to_string(),
        ])
        .map_err(|e| Failure::input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::input(e.to_string()))?;
    match &a.output {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => write_stdout(&bytes),
    }
}

/// A matrix file that also lists its exact eigenvalues.
#[derive(Deserialize)]
struct Fixture {
    eigenvalues: Vec<[f64; 2]>,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_seed() -> u64 {
    7
}

const SHIPPED: [(&str, &str); 4] = [
    ("diag3.json", include_str!("../fixtures/diag3.json")),
    ("swap.json", include_str!("../fixtures/swap.json")),
    ("rotation.json", include_str!("../fixtures/rotation.json")),
    ("triangular4.json", include_str!("../fixtures/triangular4.json")),
];

/// Oracle and solver both reproduce the listed eigenvalues.
fn check_fixture(text: &str) -> Result<String, String> {
    let m = ComplexMatrix::from_json_str(text).map_err(|e| e.to_string())?;
    let fx: Fixture = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let expected: Vec<Complex64> = fx.eigenvalues.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    let norm = largest_singular_value(&m);
    let oracle = oracle_eigenvalues(&m).map_err(|e| e.to_string())?;
    let od = matching_distance(&oracle, &expected).map_err(|e| e.to_string())?;
    if od > 1e-9 * norm.max(1.0) {
        return Err(format!("oracle differs from listed eigenvalues by {od:e}"));
    }
    let delta = 0.05;
    let report = solve(&m, delta, 0.2, fx.seed, &SolveOptions::default());
    if let Some(e) = report.failure {
        return Err(format!("solve failed: {e}"));
    }
    let sd = matching_distance(&report.eigenvalues, &expected).map_err(|e| e.to_string())?;
    if sd > delta * norm {
        return Err(format!("solver differs from listed eigenvalues by {sd:e}"));
    }
    Ok(format!("oracle {od:.1e}, solver {sd:.1e}"))
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    if a.trials == 0 {
        return Err(Failure::input("--trials must be positive"));
    }
    let cfg = BatteryConfig { scale: a.trials as f64 / 10_000.0, seed: a.seed, enforce_time: true };
    let mut failed = 0;
    let wanted = |id: &str| match &a.checks {
        None => true,
        Some(list) => list.iter().any(|c| c.trim().eq_ignore_ascii_case(id)),
    };
    for (id, check) in CHECKS.into_iter().filter(|(id, _)| wanted(id)) {
        let out = run_check(id, check, &cfg);
        println!("{}", out.line());
        failed += usize::from(!out.passed);
    }
    let fixtures: Vec<(String, String)> = match &a.fixtures {
        None => SHIPPED.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect(),
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            paths
                .into_iter()
                .map(|p| {
                    let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                    (name, fs::read_to_string(&p).unwrap_or_default())
                })
                .collect()
        }
    };
    for (name, text) in &fixtures {
        match check_fixture(text) {
            Ok(detail) => println!("fixture {name} PASS {detail}"),
            Err(detail) => {
                println!("fixture {name} FAIL {detail}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        return Err(Failure::input(format!("{failed} checks failed")));
    }
    println!("all checks passed");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Distspec(a) => cmd_distspec(a),
        Command::Pseudospec(a) => cmd_pseudospec(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
