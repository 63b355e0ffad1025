//! Command-line surface. Every run writes a JSON manifest echoing its
//! configuration and the SHA-256 digests of its outputs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource
//! budget exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cholesky::Ensemble;
use crate::density;
use crate::error::{Error, Result};
use crate::fit::{self, DenominatorTemplate};
use crate::mc::{self, McConfig, McRequest, McSummary};
use crate::moments::{self, FixedKMethod, MomentJson, SymbolicJson};
use crate::poly::{rational_text, Budget};
use crate::tables;
use crate::verify::{self, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "hsmoments",
    version,
    about = "Joint determinantal moments of Hilbert–Schmidt random density matrices"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Manifest path (default: `<out>.manifest.json` beside the main
    /// output, or standard error when writing to standard output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Exact ⟨|ρ|^k |ρ^PT|^κ⟩ at integer k and κ.
    Exact(ExactArgs),
    /// Adjustment factor F_κ(k) as a rational function of k.
    Symbolic(SymbolicArgs),
    /// Recover a numerator from exact fixed-k samples and validate it.
    Fit(FitArgs),
    /// Multiprecision Monte Carlo estimates.
    Mc(McArgs),
    /// The two-rebit density of 2^8|ρ|.
    Density(DensityArgs),
    /// Check computed values against the embedded reference values.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Paired,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateArg {
    Structural,
    Dirichlet,
    Published,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    #[value(alias = "paper-tables")]
    PublishedTables,
    Identities,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct ExactArgs {
    /// two-rebit, two-qubit, rebit-retrit or qubit-qutrit.
    #[arg(long)]
    pub ensemble: Ensemble,
    /// Power of |ρ|.
    #[arg(long)]
    pub k: u32,
    /// Power of |ρ^PT|.
    #[arg(long)]
    pub kappa: u32,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Paired sums through the diagonal marginal, or the full expansion.
    #[arg(long, value_enum, default_value = "paired")]
    pub method: MethodArg,
    /// Term cap for polynomial expansions.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SymbolicArgs {
    /// two-rebit, two-qubit, rebit-retrit or qubit-qutrit.
    #[arg(long)]
    pub ensemble: Ensemble,
    /// Power of |ρ^PT|.
    #[arg(long)]
    pub kappa: u32,
    /// Term cap; required for κ above the default range (two-rebit 4,
    /// two-qubit 2, rebit-retrit 2, qubit-qutrit 1).
    #[arg(long)]
    pub budget: Option<usize>,
    /// JSON, or the canonical text form (`e : num/den` per term).
    #[arg(long, value_enum, default_value = "json")]
    pub format: SymbolicFormat,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolicFormat {
    Json,
    Text,
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    /// two-rebit, two-qubit, rebit-retrit or qubit-qutrit.
    #[arg(long)]
    pub ensemble: Ensemble,
    /// Power of |ρ^PT|.
    #[arg(long)]
    pub kappa: u32,
    /// Sample points, as an inclusive range `a..b` or a list `a,b,c`
    /// (default: exactly as many as unknowns, from 0).
    #[arg(long)]
    pub samples: Option<String>,
    /// Number of held-out points following the samples.
    #[arg(long, default_value_t = 5)]
    pub holdout: usize,
    /// Denominator template (default: structural for 4×4, dirichlet for 6×6).
    #[arg(long, value_enum)]
    pub template: Option<TemplateArg>,
    /// Term cap for polynomial expansions.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct McArgs {
    /// two-rebit, two-qubit, rebit-retrit or qubit-qutrit.
    #[arg(long)]
    pub ensemble: Ensemble,
    /// Number of sampled states.
    #[arg(long)]
    pub samples: u64,
    /// Seed of the per-chunk random streams.
    #[arg(long)]
    pub seed: u64,
    /// Working precision in bits.
    #[arg(long, default_value_t = McConfig::DEFAULT_PRECISION)]
    pub precision: u32,
    /// Bins per histogram axis.
    #[arg(long, default_value_t = McConfig::DEFAULT_BINS)]
    pub bins: usize,
    /// Samples per random stream.
    #[arg(long, default_value_t = McConfig::DEFAULT_CHUNK)]
    pub chunk_size: u64,
    /// Estimate ⟨|ρ|^k |ρ^PT|^κ⟩ for all k, κ ≤ this.
    #[arg(long, default_value_t = 2)]
    pub moments: u32,
    /// Estimate ratio-sequence entries k = 1..K.
    #[arg(long, default_value_t = 0)]
    pub ratios: u32,
    /// Write the ratio-sequence estimates as CSV (k, estimate, stderr).
    #[arg(long)]
    pub ratio_csv: Option<PathBuf>,
    /// Write the (|ρ|, |ρ^PT|) histogram as CSV.
    #[arg(long)]
    pub hist: Option<PathBuf>,
    /// Estimate the separability probability.
    #[arg(long)]
    pub sep_prob: bool,
    /// Also report exact values and z-scores where available.
    #[arg(long)]
    pub compare: bool,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DensityArgs {
    /// Compare quadrature moments n = 0..N with the exact values.
    #[arg(long)]
    pub check_moments: Option<u32>,
    /// Compare the closed form with the convolution integral on 50 points.
    #[arg(long)]
    pub check_oracle: bool,
    /// Report f(1−ε)/ε^{7/2} at ε = 10⁻², 10⁻³, 10⁻⁴.
    #[arg(long)]
    pub check_endpoint: bool,
    /// Interior grid points of the CSV output.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// CSV destination (default: standard output).
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    /// Term cap for polynomial expansions.
    #[arg(long)]
    pub budget: Option<usize>,
}

/// Record of a run, written as a JSON sidecar.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputDigest>,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub hsmoments: String,
    pub gmp: String,
    pub mpfr: String,
}

impl Versions {
    fn current() -> Self {
        use gmp_mpfr_sys::{gmp, mpfr};
        Versions {
            hsmoments: env!("CARGO_PKG_VERSION").into(),
            gmp: format!("{}.{}.{}", gmp::VERSION, gmp::VERSION_MINOR, gmp::VERSION_PATCHLEVEL),
            mpfr: format!("{}.{}.{}", mpfr::VERSION_MAJOR, mpfr::VERSION_MINOR, mpfr::VERSION_PATCHLEVEL),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Collected outputs of a command before they are written.
#[derive(Default)]
struct Outputs {
    files: Vec<(Option<PathBuf>, Vec<u8>)>,
    /// Human-readable report lines for standard error.
    report: Vec<String>,
    failed: bool,
}

impl Outputs {
    fn emit(&mut self, path: Option<&Path>, bytes: Vec<u8>) {
        self.files.push((path.map(Path::to_path_buf), bytes));
    }
}

fn budget_of(cap: Option<usize>) -> Budget {
    cap.map_or_else(Budget::from_environment, Budget::with_max_terms)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_points(s: &str) -> Result<Vec<i64>> {
    let bad = || Error::InvalidArgument(format!("bad point list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn run_exact(a: &ExactArgs, out: &mut Outputs) -> Result<()> {
    let spec = a.ensemble.spec();
    let method = match a.method {
        MethodArg::Paired => FixedKMethod::Paired,
        MethodArg::Direct => FixedKMethod::Direct,
    };
    let r = moments::joint_moment_exact(&spec, a.k, a.kappa, method, &budget_of(a.budget))?;
    let bytes = match a.format {
        Format::Json => json_bytes(&MomentJson::new(&r, None))?,
        Format::Csv => format!(
            "ensemble,k,kappa,moment,factor\n{},{},{},{},{}\n",
            r.ensemble,
            r.k,
            r.kappa,
            rational_text(&r.value),
            rational_text(&r.factor)
        )
        .into_bytes(),
    };
    out.emit(a.out.as_deref(), bytes);
    Ok(())
}

#[derive(Serialize)]
struct SymbolicOutput {
    ensemble: Ensemble,
    kappa: u32,
    #[serde(flatten)]
    factor: SymbolicJson,
}

fn run_symbolic(a: &SymbolicArgs, out: &mut Outputs) -> Result<()> {
    let limit = moments::default_max_kappa(a.ensemble);
    if a.kappa > limit && a.budget.is_none() {
        return Err(Error::BudgetExceeded(format!(
            "κ = {} is above the default range κ ≤ {limit} for {}; pass --budget to attempt it",
            a.kappa, a.ensemble
        )));
    }
    let c = moments::adjustment_factor_symbolic(&a.ensemble.spec(), a.kappa, &budget_of(a.budget))?;
    let bytes = match a.format {
        SymbolicFormat::Json => {
            json_bytes(&SymbolicOutput { ensemble: a.ensemble, kappa: a.kappa, factor: (&c).into() })?
        }
        SymbolicFormat::Text => c.function.to_text().into_bytes(),
    };
    out.emit(a.out.as_deref(), bytes);
    Ok(())
}

fn run_fit(a: &FitArgs, out: &mut Outputs) -> Result<()> {
    let spec = a.ensemble.spec();
    let template = match a.template {
        None => DenominatorTemplate::default_for(&spec),
        Some(TemplateArg::Structural) => DenominatorTemplate::Structural,
        Some(TemplateArg::Dirichlet) => DenominatorTemplate::Dirichlet,
        Some(TemplateArg::Published) => DenominatorTemplate::Published,
    };
    let unknowns = template.denominator(&spec, a.kappa)?.degree().unwrap_or(0) as i64 + 1;
    let samples = match &a.samples {
        Some(s) => parse_points(s)?,
        None => (0..unknowns).collect(),
    };
    let start = samples.iter().max().map_or(0, |m| m + 1);
    let holdout: Vec<i64> = (start..start + a.holdout as i64).collect();
    let report = fit::fit_from_engine(&spec, a.kappa, template, &samples, &holdout, &budget_of(a.budget))?;
    if !report.validation.pass {
        out.failed = true;
        out.report.push(format!("held-out points failed: {:?}", report.validation.failing_ks()));
    }
    out.emit(a.out.as_deref(), json_bytes(&report)?);
    Ok(())
}

#[derive(Serialize)]
struct Comparison {
    quantity: String,
    exact: String,
    z_score: f64,
}

#[derive(Serialize)]
struct McReport {
    #[serde(flatten)]
    summary: McSummary,
    comparisons: Vec<Comparison>,
}

fn run_mc(a: &McArgs, out: &mut Outputs) -> Result<()> {
    let config = McConfig {
        ensemble: a.ensemble,
        samples: a.samples,
        seed: a.seed,
        precision_bits: a.precision,
        bins: a.bins,
        chunk_size: a.chunk_size,
    };
    let pairs: Vec<(u32, u32)> = (0..=a.moments).flat_map(|k| (0..=a.moments).map(move |q| (k, q))).collect();
    let req = McRequest {
        pairs: pairs.clone(),
        ratio_max_k: a.ratios,
        histogram: a.hist.is_some(),
        separability: a.sep_prob,
        t_bins: None,
    };
    let result = mc::run(&config, &req)?;
    let mut comparisons = Vec::new();
    if a.compare {
        let spec = a.ensemble.spec();
        let budget = Budget::from_environment();
        for (est, &(k, q)) in result.moments.iter().zip(&pairs) {
            if q > moments::default_max_kappa(a.ensemble) {
                continue;
            }
            let exact = moments::joint_moment_exact(&spec, k, q, FixedKMethod::Paired, &budget)?.value;
            comparisons.push(Comparison {
                quantity: est.quantity.clone(),
                z_score: est.z_score(&exact),
                exact: rational_text(&exact),
            });
        }
        if let Some(seq) = tables::published_ratio_sequence(a.ensemble) {
            for (est, exact) in result.ratios.iter().zip(&seq) {
                comparisons.push(Comparison {
                    quantity: est.quantity.clone(),
                    z_score: est.z_score(exact),
                    exact: rational_text(exact),
                });
            }
        }
    }
    if let Some(path) = &a.ratio_csv {
        out.emit(Some(path), mc::estimates_csv("k", &result.ratios).into_bytes());
    }
    if let (Some(path), Some(h)) = (&a.hist, &result.histogram) {
        out.emit(Some(path), h.to_csv().into_bytes());
    }
    let report = McReport { summary: McSummary::new(&result, &req), comparisons };
    out.emit(a.out.as_deref(), json_bytes(&report)?);
    Ok(())
}

fn run_density(a: &DensityArgs, out: &mut Outputs) -> Result<()> {
    if let Some(n) = a.check_moments {
        let r = density::density_moment_check(n)?;
        let pass = r.max_deviation <= 1e-9;
        out.failed |= !pass;
        out.report.push(format!("moments n=0..{n}: max deviation {:e} {}", r.max_deviation, verdict(pass)));
    }
    if a.check_oracle {
        let rows = density::convolution_check(&density::interior_grid(50))?;
        let max = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
        let pass = max <= 1e-8;
        out.failed |= !pass;
        out.report.push(format!("convolution oracle, 50 points: max deviation {max:e} {}", verdict(pass)));
    }
    if a.check_endpoint {
        let ratios = density::endpoint_ratios(&[1e-2, 1e-3, 1e-4])?;
        let values: Vec<_> = ratios.iter().map(|(_, r)| r.clone()).collect();
        let pass = density::stable_to_significant_figures(&values, 3);
        out.failed |= !pass;
        let shown: Vec<String> = ratios.iter().map(|(e, r)| format!("ε={e:e}: {}", mc::float_text(r, 8))).collect();
        out.report.push(format!("endpoint ratio {} {}", shown.join(", "), verdict(pass)));
    }
    out.emit(a.out.as_deref(), density::density_csv(a.grid)?.into_bytes());
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_verify(a: &VerifyArgs, out: &mut Outputs) -> Result<()> {
    let suite = match a.suite {
        SuiteArg::PublishedTables => Suite::PublishedTables,
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::All => Suite::All,
    };
    let checks = verify::run_suite(suite, &budget_of(a.budget));
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{} {} ({})\n", verdict(c.pass), c.name, c.detail));
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    text.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    out.failed |= passed != checks.len();
    out.emit(None, text.into_bytes());
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) | Error::Parse(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Exact(_) => "exact",
        Command::Symbolic(_) => "symbolic",
        Command::Fit(_) => "fit",
        Command::Mc(_) => "mc",
        Command::Density(_) => "density",
        Command::Verify(_) => "verify",
    }
}

fn main_output(c: &Command) -> Option<&Path> {
    match c {
        Command::Exact(a) => a.out.as_deref(),
        Command::Symbolic(a) => a.out.as_deref(),
        Command::Fit(a) => a.out.as_deref(),
        Command::Mc(a) => a.out.as_deref(),
        Command::Density(a) => a.out.as_deref(),
        Command::Verify(_) => None,
    }
}

/// Parses `argv` (including the program name), runs the command, writes its
/// outputs and returns the exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let start = Instant::now();
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start {threads} workers: {e}");
            return EXIT_USAGE;
        }
    };
    let mut outputs = Outputs::default();
    let result = pool.install(|| match &cli.command {
        Command::Exact(a) => run_exact(a, &mut outputs),
        Command::Symbolic(a) => run_symbolic(a, &mut outputs),
        Command::Fit(a) => run_fit(a, &mut outputs),
        Command::Mc(a) => run_mc(a, &mut outputs),
        Command::Density(a) => run_density(a, &mut outputs),
        Command::Verify(a) => run_verify(a, &mut outputs),
    });
    let mut code = match &result {
        Ok(()) if outputs.failed => EXIT_FAILURE,
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(e)
        }
    };
    for line in &outputs.report {
        let _ = writeln!(stderr, "{line}");
    }
    let mut digests = Vec::new();
    for (path, bytes) in &outputs.files {
        let written = match path {
            Some(p) => std::fs::write(p, bytes).map(|_| p.display().to_string()),
            None => stdout.write_all(bytes).map(|_| "<stdout>".to_string()),
        };
        match written {
            Ok(name) => digests.push(OutputDigest { path: name, sha256: sha256_hex(bytes) }),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                code = EXIT_FAILURE;
            }
        }
    }
    let manifest = RunManifest {
        command: command_name(&cli.command).into(),
        args: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        config: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
        seed: match &cli.command {
            Command::Mc(a) => Some(a.seed),
            _ => None,
        },
        versions: Versions::current(),
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: digests,
        exit_code: code,
    };
    let manifest_path = cli.manifest.clone().or_else(|| {
        main_output(&cli.command).map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    let bytes = match json_bytes(&manifest) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = match &manifest_path {
        Some(p) => std::fs::write(p, &bytes),
        None => stderr.write_all(&bytes),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write manifest: {e}");
        return EXIT_FAILURE;
    }
    code
}
