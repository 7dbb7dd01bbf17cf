use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use strato::analysis::{
    diagonal_convergence, identity_suite_with, mse_study, parseval_report, residual_rate, Claim, Perturbation,
    SuiteOptions,
};
use strato::coefficients::{build_tensor_with, read_tensor_json, write_tensor_csv, write_tensor_json, TensorOptions};
use strato::{BasisKind, BasisSpec, Calculus, CoefficientTensor, Error, IntegralSpec, Interval, WeightExponents};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Increments held in memory per simulated path.
const MAX_PATH_SAMPLES: usize = 50_000_000;

/// Multiple Fourier coefficients and expansions of iterated stochastic integrals.
#[derive(Debug, Parser)]
#[command(name = "strato", version)]
struct Cli {
    /// Worker threads for tensor builds and Monte Carlo replicas.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a table of triple coefficients C[j3][j2][j1].
    Coeffs(CoeffsArgs),
    /// Check identities and limit statements of the coefficients.
    Verify(VerifyArgs),
    /// Coupled-path mean-square error of truncated expansions.
    Mse(MseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BasisArg {
    Legendre,
    #[value(alias = "trigonometric")]
    Trig,
}

impl From<BasisArg> for BasisKind {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Legendre => BasisKind::Legendre,
            BasisArg::Trig => BasisKind::Trigonometric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum, default_value = "legendre")]
    basis: BasisArg,
    /// Start of the interval.
    #[arg(long = "t", default_value_t = 0.0, allow_negative_numbers = true)]
    t: f64,
    /// End of the interval.
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    end: f64,
    /// Weight exponents l1 l2 l3 of (t - s)^l.
    #[arg(long = "l", num_args = 3, value_names = ["L1", "L2", "L3"], default_values_t = [0, 0, 0])]
    l: Vec<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn basis(&self) -> Result<BasisSpec<f64>, Error> {
        Ok(BasisSpec::new(self.basis.into(), Interval::new(self.t, self.end)?))
    }

    fn weights(&self) -> WeightExponents {
        WeightExponents::new(self.l[0], self.l[1], self.l[2])
    }
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    #[command(flatten)]
    common: Common,
    /// Truncation bounds p1 p2 p3 (inclusive maxima of j1, j2, j3).
    #[arg(long = "p", num_args = 3, value_names = ["P1", "P2", "P3"], default_values_t = [8, 8, 8])]
    p: Vec<usize>,
    /// Largest admissible bound.
    #[arg(long, default_value_t = strato::coefficients::DEFAULT_TENSOR_CAP)]
    cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClaimArg {
    Identities,
    Residual,
    Diagonal13,
    Diagonal23,
    Middle,
    Parseval,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "identities")]
    claim: ClaimArg,
    /// Largest index of the tensor the identities are checked on.
    #[arg(long, default_value_t = 10)]
    max_index: usize,
    /// Increasing truncation orders for convergence claims.
    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32])]
    p_list: Vec<usize>,
    /// Free index of the diagonal-sum claims.
    #[arg(long, default_value_t = 0)]
    free_index: usize,
    /// Negative control: add DELTA to entry (J3, J2, J1) before checking.
    #[arg(long, hide = true, value_delimiter = ',', allow_negative_numbers = true, value_name = "J3,J2,J1,DELTA")]
    perturb: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    /// Legendre basis, constant weights.
    Theorem2,
    /// Legendre basis, binomial weights from --l.
    Theorem3,
    /// Trigonometric basis, constant weights.
    Theorem4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CalculusArg {
    Ito,
    #[value(alias = "stratonovich")]
    Strat,
}

#[derive(Debug, Args)]
struct MseArgs {
    #[command(flatten)]
    common: Common,
    /// Preset fixing the basis and weight family; overrides --basis.
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long, value_enum, default_value = "strat")]
    calculus: CalculusArg,
    /// Wiener components of the differentials, innermost first.
    #[arg(long = "i", num_args = 1..=3, value_names = ["I1", "I2", "I3"], default_values_t = [1, 2, 3])]
    components: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 2, 8])]
    p_list: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Steps of the fine path grid.
    #[arg(long, default_value_t = 100_000)]
    grid: usize,
}

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceCap { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| usage(format!("cannot start thread pool: {e}")))?;
    match cli.command {
        Command::Coeffs(args) => coeffs(args),
        Command::Verify(args) => verify(args),
        Command::Mse(args) => mse(args),
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn coeffs(args: CoeffsArgs) -> Result<(), Failure> {
    let basis = args.common.basis()?;
    let weights = args.common.weights();
    let bounds = (args.p[0], args.p[1], args.p[2]);
    if let Some((name, p)) = [("p1", bounds.0), ("p2", bounds.1), ("p3", bounds.2)]
        .into_iter()
        .find(|&(_, p)| p > args.cap)
    {
        return Err(usage(format!("{name} = {p} exceeds the coefficient cap of {} (raise it with --cap)", args.cap)));
    }
    let options = TensorOptions {
        cap: args.cap,
        ..TensorOptions::default()
    };
    let cache = std::env::var_os("STRATO_CACHE_DIR").map(PathBuf::from);
    let cached = cache.as_deref().map(|dir| dir.join(cache_name(&basis, weights, bounds)));
    let tensor = match cached.as_deref().and_then(load_cached) {
        Some(t) => t,
        None => {
            let t = build_tensor_with(&basis, weights, bounds, &options)?;
            if let Some(path) = cached.as_deref() {
                store_cached(path, &t);
            }
            t
        }
    };
    let mut out = sink(&args.common.output)?;
    match args.common.format {
        Format::Csv => write_tensor_csv(&tensor, &mut out)?,
        Format::Json => {
            write_tensor_json(&tensor, &mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    eprintln!(
        "{} entries, {} nonzero, max |C| = {:e}",
        tensor.len(),
        tensor.nonzero_count(),
        tensor.max_abs()
    );
    Ok(())
}

/// File name that pins the configuration exactly (interval ends as bits).
fn cache_name(basis: &BasisSpec<f64>, w: WeightExponents, (p1, p2, p3): (usize, usize, usize)) -> String {
    format!(
        "{}_{:016x}_{:016x}_l{}-{}-{}_p{}-{}-{}.json",
        basis.kind,
        basis.interval.start().to_bits(),
        basis.interval.end().to_bits(),
        w.l1,
        w.l2,
        w.l3,
        p1,
        p2,
        p3
    )
}

fn load_cached(path: &Path) -> Option<CoefficientTensor<f64>> {
    let file = File::open(path).ok()?;
    read_tensor_json(io::BufReader::new(file)).ok()
}

fn store_cached(path: &Path, tensor: &CoefficientTensor<f64>) {
    let result = (|| -> Result<(), Error> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("json.tmp");
        write_tensor_json(tensor, BufWriter::new(File::create(&tmp)?))?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if let Err(e) = result {
        eprintln!("warning: could not cache coefficients at {}: {e}", path.display());
    }
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let basis = args.common.basis()?;
    let weights = args.common.weights();
    let mut out = sink(&args.common.output)?;
    let passed = if args.claim == ClaimArg::Identities {
        let perturbation = match args.perturb.as_deref() {
            None => None,
            Some([j3, j2, j1, delta]) => Some(Perturbation {
                j3: index_arg(*j3)?,
                j2: index_arg(*j2)?,
                j1: index_arg(*j1)?,
                delta: *delta,
            }),
            Some(_) => return Err(usage("--perturb takes J3,J2,J1,DELTA")),
        };
        let options = SuiteOptions {
            perturbation,
            ..SuiteOptions::default()
        };
        let report = identity_suite_with(&basis, weights, args.max_index, &options)?;
        match args.common.format {
            Format::Csv => report.write_csv(&mut out)?,
            Format::Json => writeln!(out, "{}", serde_json::to_string(&report).map_err(Error::from)?)?,
        }
        for c in report.failures() {
            eprintln!(
                "FAILED {}: max error {:e} exceeds tolerance {:e}",
                c.name, c.max_error, c.tolerance
            );
        }
        report.passed()
    } else {
        let report = match args.claim {
            ClaimArg::Residual => residual_rate(&basis, weights, &args.p_list)?,
            ClaimArg::Diagonal13 => diagonal_convergence(&basis, weights, Claim::DiagonalSum13, args.free_index, &args.p_list)?,
            ClaimArg::Diagonal23 => diagonal_convergence(&basis, weights, Claim::DiagonalSum23, args.free_index, &args.p_list)?,
            ClaimArg::Middle => diagonal_convergence(&basis, weights, Claim::VanishingMiddle, args.free_index, &args.p_list)?,
            ClaimArg::Parseval => parseval_report(&basis, 0.7, &args.p_list)?,
            ClaimArg::Identities => unreachable!("handled above"),
        };
        match args.common.format {
            Format::Csv => report.write_csv(&mut out)?,
            Format::Json => writeln!(out, "{}", serde_json::to_string(&report).map_err(Error::from)?)?,
        }
        if let Some(s) = report.slope {
            eprintln!("log-log slope {s:.3}");
        }
        if !report.strictly_decreasing {
            eprintln!("FAILED {:?}: values do not decrease strictly", report.claim);
        }
        report.strictly_decreasing
    };
    out.flush()?;
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: "verification failed".into(),
        })
    }
}

fn index_arg(x: f64) -> Result<usize, Failure> {
    if x >= 0.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(usage(format!("{x} is not an index")))
    }
}

fn mse(args: MseArgs) -> Result<(), Failure> {
    if args.trials < 2 {
        return Err(usage(format!("--trials must be at least 2, got {}", args.trials)));
    }
    let mut weights = args.common.weights();
    let interval = Interval::new(args.common.t, args.common.end)?;
    let kind = match args.case {
        Some(CaseArg::Theorem2) | Some(CaseArg::Theorem4) if !weights.is_constant() => {
            return Err(usage("theorem2 and theorem4 use constant weights; drop --l or use theorem3"));
        }
        Some(CaseArg::Theorem2) | Some(CaseArg::Theorem3) => BasisKind::Legendre,
        Some(CaseArg::Theorem4) => BasisKind::Trigonometric,
        None => args.common.basis.into(),
    };
    if args.components.len() < 3 {
        weights = WeightExponents::new(weights.l1, if args.components.len() == 2 { weights.l2 } else { 0 }, 0);
    }
    let calculus = match args.calculus {
        CalculusArg::Ito => Calculus::Ito,
        CalculusArg::Strat => Calculus::Stratonovich,
    };
    let spec = IntegralSpec::new(calculus, &args.components, weights, BasisSpec::new(kind, interval))?;
    let samples = args.grid.saturating_mul(spec.dimension());
    if samples > MAX_PATH_SAMPLES {
        return Err(Error::ResourceCap {
            what: "grid steps x components",
            requested: samples,
            cap: MAX_PATH_SAMPLES,
        }
        .into());
    }
    let report = mse_study(&spec, &args.p_list, args.trials, args.grid, args.common.seed)?;
    let mut out = sink(&args.common.output)?;
    match args.common.format {
        Format::Csv => report.write_csv(&mut out)?,
        Format::Json => writeln!(out, "{}", serde_json::to_string(&report).map_err(Error::from)?)?,
    }
    out.flush()?;
    if !report.strictly_decreasing {
        eprintln!("warning: mean-square error is not strictly decreasing over {:?}", args.p_list);
    }
    Ok(())
}
