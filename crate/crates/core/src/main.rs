use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use imkit::detect::{detect_labeled, BasisLabels, DEFAULT_M_MAX};
use imkit::imaginarity::{y_twirl, AntisymmetricGenerator};
use imkit::interferometer::{
    copy_complexity, factorized_trace, generator_unitary, InterferometerRun, DEFAULT_GRID,
};
use imkit::state::{
    computational_basis, fourier_mub, parse_density_json, qubit_beta_basis, random_density,
    FileError, MatrixFile, DEFAULT_EPS_DET, DEFAULT_EPS_PSD,
};
use imkit::sweep::{run_sweep, to_csv, AlphaGrid, SweepConfig};
use imkit::verify::{self, Level};
use imkit::{ComplexMatrix, DensityMatrix, Error, Execution, OrthonormalBasis, Tolerances};

#[derive(Parser)]
#[command(name = "imkit", version, about = "Imaginarity detection and interferometer simulation")]
struct Cli {
    /// Hermiticity, trace and orthonormality tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Smallest eigenvalue accepted as nonnegative is -tol_psd.
    #[arg(long = "tol-psd", global = true, default_value_t = DEFAULT_EPS_PSD)]
    tol_psd: f64,
    /// Hankel determinants below -tol_det count as negative.
    #[arg(long = "tol-det", global = true, default_value_t = DEFAULT_EPS_DET)]
    tol_det: f64,
    /// Seed for `--state random:D` inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the moment-based detector on a state.
    Detect {
        /// JSON state file, or `random:D` for a seeded random state.
        #[arg(long)]
        state: String,
        /// `fourier` or `beta:RAD` (qubits only).
        #[arg(long)]
        basis: String,
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        mmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal-order detection sweep over the qubit family.
    Sweep {
        /// START:STOP:COUNT.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Comma-separated radians.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        mmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a Mach-Zehnder run and write the intensity curve.
    Interfere(InterfereArgs),
    /// Run the built-in self-checks.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
}

#[derive(Args)]
struct InterfereArgs {
    #[arg(long)]
    state: String,
    /// `generator:P,Q:THETA`, `s_n:N`, or a JSON matrix file.
    #[arg(long)]
    unitary: String,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
    /// Partner basis for `s_n`: `fourier` or `beta:RAD`.
    #[arg(long, default_value = "fourier")]
    basis: String,
    /// Y-twirl the state before it enters the interferometer.
    #[arg(long)]
    twirl: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

/// Input problems map to exit code 2.
struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        let hint = match e {
            Error::NonRealMoment { .. } => {
                "; the state is probably not Hermitian to working precision, re-export it or loosen --tol"
            }
            Error::NotPsd { .. } => "; raise --tol-psd if the state came from rounded data",
            _ => "",
        };
        InputError(format!("{e}{hint}"))
    }
}

impl From<FileError> for InputError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Invalid(inner) => inner.into(),
            other => InputError(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))
}

fn load_state(spec: &str, tol: &Tolerances, seed: Option<u64>) -> Result<DensityMatrix, InputError> {
    if let Some(d) = spec.strip_prefix("random:") {
        let d = d
            .parse()
            .map_err(|_| InputError(format!("bad dimension in {spec:?}")))?;
        return Ok(random_density(d, seed.unwrap_or(0))?);
    }
    Ok(parse_density_json(&read(Path::new(spec))?, tol)?)
}

fn parse_basis(spec: &str, d: usize) -> Result<(OrthonormalBasis, String), InputError> {
    if spec == "fourier" {
        return Ok((fourier_mub(&computational_basis(d)?), "fourier".into()));
    }
    if let Some(rest) = spec.strip_prefix("beta:") {
        let beta: f64 = rest
            .parse()
            .map_err(|_| InputError(format!("bad beta in {spec:?}")))?;
        if d != 2 {
            return Err(InputError(format!("beta bases are qubit-only, state has d={d}")));
        }
        return Ok((qubit_beta_basis(beta), format!("beta:{beta}")));
    }
    Err(InputError(format!("basis must be `fourier` or `beta:RAD`, got {spec:?}")))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), InputError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print_line(text);
            Ok(())
        }
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn print_line(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn cmd_detect(
    state: &str,
    basis: &str,
    mmax: usize,
    out: Option<&Path>,
    tol: &Tolerances,
    seed: Option<u64>,
) -> Result<ExitCode, InputError> {
    let rho = load_state(state, tol, seed)?;
    let a = computational_basis(rho.dim())?;
    let (b, label) = parse_basis(basis, rho.dim())?;
    let labels = BasisLabels { a: "computational", b: &label };
    let mut report = detect_labeled(&rho, &a, &b, mmax, tol, labels)?;
    report.parameters.seed = seed;
    emit(out, &to_json(&report))?;
    Ok(if report.detected() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_sweep(alpha: &str, beta: Vec<f64>, mmax: usize, out: &Path, tol: &Tolerances) -> Result<ExitCode, InputError> {
    let config = SweepConfig {
        alpha: AlphaGrid::parse(alpha)?,
        betas: beta,
        m_max: mmax,
        tolerances: *tol,
    };
    let rows = run_sweep(&config, Execution::default())?;
    write(out, &to_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct InterfereSummary {
    visibility: f64,
    chi: f64,
    analytic_visibility: f64,
    fit_amplitude: f64,
    fit_residual: f64,
    internal_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    signed_trace: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct_circuits: Option<usize>,
}

fn parse_generator(rest: &str, d: usize) -> Result<ComplexMatrix, InputError> {
    let bad = || InputError(format!("expected generator:P,Q:THETA, got {rest:?}"));
    let (pq, theta) = rest.split_once(':').ok_or_else(bad)?;
    let (p, q) = pq.split_once(',').ok_or_else(bad)?;
    let p = p.trim().parse().map_err(|_| bad())?;
    let q = q.trim().parse().map_err(|_| bad())?;
    let theta: f64 = theta.trim().parse().map_err(|_| bad())?;
    Ok(generator_unitary(&AntisymmetricGenerator::new(d, p, q)?, theta))
}

fn cmd_interfere(args: &InterfereArgs, tol: &Tolerances, seed: Option<u64>) -> Result<ExitCode, InputError> {
    let InterfereArgs { state, unitary, grid, out, basis, twirl } = args;
    let (grid, twirl) = (*grid, *twirl);
    let mut rho = load_state(state, tol, seed)?;
    if twirl {
        rho = y_twirl(&rho);
    }
    let d = rho.dim();
    let exec = Execution::default();
    let (run, signed, circuits) = if let Some(n) = unitary.strip_prefix("s_n:") {
        let n: usize = n
            .parse()
            .map_err(|_| InputError(format!("bad copy count in {unitary:?}")))?;
        if n < 1 {
            return Err(InputError("s_n needs n >= 1".into()));
        }
        let a = computational_basis(d)?;
        let (b, _) = parse_basis(basis, d)?;
        let tau = factorized_trace(&rho, &a, &b, n)?;
        let internal = d.checked_pow(n as u32).unwrap_or(usize::MAX);
        (InterferometerRun::from_trace(internal, tau, grid, exec)?, Some([tau.re, tau.im]), None)
    } else if let Some(rest) = unitary.strip_prefix("generator:") {
        let u = parse_generator(rest, d)?;
        let circuits = copy_complexity(d, 1).direct_circuits;
        (InterferometerRun::new(&rho, &u, grid, exec)?, None, Some(circuits))
    } else {
        let file: MatrixFile = serde_json::from_str(&read(Path::new(unitary))?)
            .map_err(|e| InputError(format!("malformed matrix file: {e}")))?;
        let u = file.to_matrix()?;
        (InterferometerRun::new(&rho, &u, grid, exec)?, None, None)
    };
    write(out, &run.to_csv())?;
    let fit = run.fit();
    let summary = InterfereSummary {
        visibility: run.visibility()?,
        chi: run.chi(),
        analytic_visibility: run.abs_trace(),
        fit_amplitude: fit.amplitude,
        fit_residual: fit.max_residual,
        internal_dim: run.internal_dim,
        signed_trace: signed,
        direct_circuits: circuits,
    };
    print_line(&to_json(&summary));
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(level: LevelArg) -> ExitCode {
    let level = match level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let report = verify::run(level);
    for c in &report.checks {
        print_line(&format!(
            "{} {:<55} residual={:.3e} tol={:.1e} {:.3}s",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance,
            c.seconds
        ));
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        eprintln!("failed: {}", failed.join(", "));
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerances {
        eps: cli.tol,
        eps_psd: cli.tol_psd,
        eps_det: cli.tol_det,
        ..Tolerances::default()
    };
    let result = match cli.command {
        Command::Detect { state, basis, mmax, out } => {
            cmd_detect(&state, &basis, mmax, out.as_deref(), &tol, cli.seed)
        }
        Command::Sweep { alpha, beta, mmax, out } => cmd_sweep(&alpha, beta, mmax, &out, &tol),
        Command::Interfere(args) => cmd_interfere(&args, &tol, cli.seed),
        Command::Verify { level } => Ok(cmd_verify(level)),
    };
    match result {
        Ok(code) => code,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
