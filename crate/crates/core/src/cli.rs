//! Command-line front end: file formats, argument parsing and the five
//! subcommands.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | bad command line |
//! | 3 | unreadable or malformed input file |
//! | 4 | series known to too low an order |
//! | 5 | rank search hit its order cap |
//! | 6 | evaluation at a pole |
//! | 7 | files or matrices with mismatched shapes or points |
//! | 8 | degenerate random draw |
//! | 9 | verification failed |
//! | 10 | zero function or empty Toeplitz profile |
//! | 11 | other numerical failure |
//! | 12 | cannot write output |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::densela::{self, ComplexMatrix, Tolerance};
use crate::error::Error;
use crate::harness::{self, InstanceSpec};
use crate::polymat::LaurentMatrix;
use crate::ranksearch::{self, RankScale, SearchOptions};
use crate::smithform::{self, CompactDecomposition, DecomposeOptions, Diagnostics, DEFAULT_SEED};
use crate::toeplitz_oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_INSUFFICIENT_ORDER: i32 = 4;
pub const EXIT_MAX_ORDER: i32 = 5;
pub const EXIT_EVAL_AT_POLE: i32 = 6;
pub const EXIT_MISMATCH: i32 = 7;
pub const EXIT_DEGENERATE: i32 = 8;
pub const EXIT_VERIFY_FAILED: i32 = 9;
pub const EXIT_EMPTY: i32 = 10;
pub const EXIT_NUMERIC: i32 = 11;
pub const EXIT_IO: i32 = 12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("mismatched shapes: {0}")]
    MismatchedShapes(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("cannot write {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error(transparent)]
    Numeric(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::MismatchedShapes(_) => EXIT_MISMATCH,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILED,
            CliError::Io { .. } => EXIT_IO,
            CliError::Numeric(e) => match e {
                Error::InsufficientSeriesOrder { .. } | Error::NormalRankRequired => {
                    EXIT_INSUFFICIENT_ORDER
                }
                Error::MaxOrderExceeded { .. } => EXIT_MAX_ORDER,
                Error::EvalAtPole => EXIT_EVAL_AT_POLE,
                Error::DimensionMismatch(_) | Error::PointMismatch(..) => EXIT_MISMATCH,
                Error::DegenerateDraw { .. } => EXIT_DEGENERATE,
                Error::ZeroFunction | Error::IncompleteProfile => EXIT_EMPTY,
                Error::NonFiniteInput | Error::InvalidSpec(_) => EXIT_PARSE,
                _ => EXIT_NUMERIC,
            },
        }
    }

    /// Short stable name printed on stderr.
    pub fn name(&self) -> &'static str {
        match self.exit_code() {
            EXIT_PARSE => "ParseError",
            EXIT_INSUFFICIENT_ORDER => "InsufficientSeriesOrder",
            EXIT_MAX_ORDER => "MaxOrderExceeded",
            EXIT_EVAL_AT_POLE => "EvalAtPole",
            EXIT_MISMATCH => "MismatchedShapes",
            EXIT_DEGENERATE => "DegenerateDraw",
            EXIT_VERIFY_FAILED => "VerificationFailed",
            EXIT_EMPTY => "EmptyProfile",
            EXIT_IO => "IoError",
            _ => "NumericalError",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `a`, `bi`, `a+bi` or `a-bi` (spaces ignored, `j` accepted for `i`).
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {s:?}, expected a+bi");
    if t.is_empty() {
        return Err(bad());
    }
    let num = |x: &str| f64::from_str(x).map_err(|_| bad());
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    // split before the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => num(x)?,
    };
    Ok(Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// One coefficient as separate real and imaginary row-major grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl Grid {
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        let grid = |f: fn(&Complex64) -> f64| {
            (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| f(&a[(i, j)])).collect())
                .collect()
        };
        Grid {
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        }
    }

    fn to_matrix(&self, rows: usize, cols: usize) -> CliResult<ComplexMatrix> {
        let shape_ok = |g: &Vec<Vec<f64>>| g.len() == rows && g.iter().all(|r| r.len() == cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(CliError::Parse(format!(
                "coefficient grid is not {rows}x{cols}"
            )));
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Coefficients of `(λ - point)^k`.
    #[default]
    Shifted,
    /// Coefficients of `λ^k`; re-expanded about `point` on load.
    Monomial,
}

fn default_true() -> bool {
    true
}

/// A matrix series on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub point: ComplexJson,
    #[serde(default)]
    pub lowest: i64,
    #[serde(default)]
    pub basis: Basis,
    #[serde(default = "default_true")]
    pub exact: bool,
    pub coeffs: Vec<Grid>,
}

impl SeriesFile {
    pub fn from_matrix(m: &LaurentMatrix) -> Self {
        SeriesFile {
            rows: m.rows(),
            cols: m.cols(),
            point: m.point().into(),
            lowest: m.lowest(),
            basis: Basis::Shifted,
            exact: m.exact(),
            coeffs: m.coeffs().iter().map(Grid::from_matrix).collect(),
        }
    }

    pub fn to_matrix(&self) -> CliResult<LaurentMatrix> {
        if self.coeffs.is_empty() {
            return Err(CliError::Parse("coeffs must not be empty".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|g| g.to_matrix(self.rows, self.cols))
            .collect::<CliResult<Vec<_>>>()?;
        let point: Complex64 = self.point.into();
        match self.basis {
            Basis::Shifted => Ok(LaurentMatrix::new(point, self.lowest, coeffs, self.exact)?),
            Basis::Monomial => {
                if self.lowest < 0 || !self.exact {
                    return Err(CliError::Parse(
                        "monomial basis needs lowest >= 0 and exact = true".into(),
                    ));
                }
                let origin = Complex64::new(0.0, 0.0);
                let m = LaurentMatrix::new(origin, self.lowest, coeffs, true)?;
                Ok(if point == origin {
                    m
                } else {
                    m.reexpand(point)?
                })
            }
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub res_rel: f64,
    pub norm_p: f64,
    pub norm_n: f64,
}

/// A decomposition on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub point: ComplexJson,
    /// `ℓ`.
    pub pole_order: usize,
    pub normal_rank: usize,
    pub sigma: Vec<i64>,
    pub e: Vec<usize>,
    pub rho: Vec<usize>,
    /// `d'` of the scaled search.
    pub stop_order: usize,
    pub nr: SeriesFile,
    pub mr_hat: SeriesFile,
    /// Highest exponent of `M̂_r` that is known; `None` when it is exact.
    pub mr_hat_valid_order: Option<i64>,
    pub n_full: Option<SeriesFile>,
    pub diagnostics: DiagnosticsJson,
}

impl DecompositionFile {
    pub fn from_decomposition(d: &CompactDecomposition, emit_full_n: bool) -> Self {
        DecompositionFile {
            point: d.point.into(),
            pole_order: d.pole_order,
            normal_rank: d.normal_rank,
            sigma: d.indices.clone(),
            e: d.multiplicities.clone(),
            rho: d.ranks.clone(),
            stop_order: d.stop_order,
            nr: SeriesFile::from_matrix(&d.nr),
            mr_hat: SeriesFile::from_matrix(&d.mr_hat),
            mr_hat_valid_order: (!d.mr_hat.exact()).then(|| d.mr_hat.highest()),
            n_full: emit_full_n.then(|| SeriesFile::from_matrix(&d.n_full)),
            diagnostics: DiagnosticsJson {
                res_rel: d.diagnostics.res_rel,
                norm_p: d.diagnostics.norm_input,
                norm_n: d.diagnostics.norm_n,
            },
        }
    }

    /// Rebuilds the decomposition. Without a stored `N(λ)`, `n_full` holds
    /// `N_r` only.
    pub fn to_decomposition(&self) -> CliResult<CompactDecomposition> {
        let nr = self.nr.to_matrix()?;
        let mr_hat = self.mr_hat.to_matrix()?;
        let n_full = match &self.n_full {
            Some(f) => f.to_matrix()?,
            None => nr.clone(),
        };
        Ok(CompactDecomposition {
            point: self.point.into(),
            pole_order: self.pole_order,
            normal_rank: self.normal_rank,
            indices: self.sigma.clone(),
            multiplicities: self.e.clone(),
            ranks: self.rho.clone(),
            stop_order: self.stop_order,
            nr,
            mr_hat,
            n_full,
            columns: (0..self.normal_rank).collect(),
            diagnostics: Diagnostics {
                res_rel: self.diagnostics.res_rel,
                norm_input: self.diagnostics.norm_p,
                norm_n: self.diagnostics.norm_n,
                mr_sigma_min: 0.0,
            },
        })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "smimc",
    version,
    about = "Compact local Smith-McMillan form of matrix series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute indices, N_r and M̂_r at a point.
    Analyze(AnalyzeArgs),
    /// Print the brute-force Toeplitz rank profile.
    Oracle(InputArgs),
    /// Check a decomposition file against its input series.
    Verify(VerifyArgs),
    /// Write a random instance with planted indices.
    Gen(GenArgs),
    /// Run one of the two accuracy experiments.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Local,
    Global,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Series file.
    pub input: PathBuf,
    /// Expansion point; defaults to the point stored in the file (0 if absent).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub point: Option<Complex64>,
    /// Relative rank tolerance.
    #[arg(long, env = "SMIMC_TOL")]
    pub tol: Option<f64>,
    /// `auto` or a fixed normal rank.
    #[arg(long, default_value = "auto")]
    pub normal_rank: String,
    /// Seed for the normal-rank sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on the stop order.
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Reference magnitude for rank decisions.
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also store the full unimodular N(λ).
    #[arg(long)]
    pub emit_full_n: bool,
    /// Decomposition file to write.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Series file.
    #[arg(long)]
    pub input: PathBuf,
    /// Decomposition file.
    #[arg(long)]
    pub decomp: PathBuf,
    /// Largest accepted relative residual.
    #[arg(long, default_value_t = 1e-10)]
    pub max_res: f64,
    /// Largest accepted relative spread of det N(λ).
    #[arg(long, default_value_t = 1e-8)]
    pub max_spread: f64,
    /// Relative rank tolerance for the certificates.
    #[arg(long, env = "SMIMC_TOL")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    Table1,
    Table2,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Start from one row of an experiment; explicit flags override it.
    #[arg(long, value_enum)]
    pub preset: Option<TableArg>,
    /// Power `i` (table1) or degree parameter `k` (table2).
    #[arg(long, default_value_t = 1)]
    pub param: usize,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Planted exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub exponents: Option<Vec<usize>>,
    /// Degree of the random transforms.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Entries are the given power of a standard normal draw.
    #[arg(long)]
    pub power: Option<i32>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Complex entries.
    #[arg(long)]
    pub complex: bool,
    /// Use identity transforms.
    #[arg(long)]
    pub identity: bool,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub table: TableArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, env = "SMIMC_TOL")]
    pub tol: Option<f64>,
    /// Write the rows as JSON.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn tolerance(rel: Option<f64>) -> Tolerance {
    Tolerance { rel, abs: 0.0 }
}

fn load_series(path: &Path, point: Option<Complex64>) -> CliResult<LaurentMatrix> {
    let m = SeriesFile::read(path)?.to_matrix()?;
    match point {
        Some(p) if p != m.point() => {
            if !m.is_polynomial() {
                return Err(CliError::MismatchedShapes(format!(
                    "series is expanded about {} and cannot be moved to {}",
                    format_complex(m.point()),
                    format_complex(p)
                )));
            }
            Ok(m.reexpand(p)?)
        }
        _ => Ok(m),
    }
}

fn decompose_options(args: &InputArgs) -> CliResult<DecomposeOptions> {
    let normal_rank = match args.normal_rank.as_str() {
        "auto" => None,
        s => Some(s.parse::<usize>().map_err(|_| {
            CliError::Parse(format!("--normal-rank {s:?}: expected auto or a count"))
        })?),
    };
    let scale = match args.scale {
        Some(ScaleArg::Local) => RankScale::Local,
        Some(ScaleArg::Global) | None => RankScale::Global,
    };
    Ok(DecomposeOptions {
        normal_rank,
        search: SearchOptions {
            tol: tolerance(args.tol),
            scale,
            max_order: args.max_order,
        },
        rank_trials: 5,
        seed: args.seed.unwrap_or(DEFAULT_SEED),
    })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<String> {
    let m = load_series(&args.input.input, args.input.point)?;
    let opts = decompose_options(&args.input)?;
    let d = smithform::decompose(&m, &opts)?;
    if let Some(path) = &args.output {
        write_json(
            path,
            &DecompositionFile::from_decomposition(&d, args.emit_full_n),
        )?;
    }
    let mut out = String::new();
    writeln!(out, "point: {}", format_complex(d.point)).unwrap();
    writeln!(out, "normal rank: {}", d.normal_rank).unwrap();
    writeln!(out, "pole order: {}", d.pole_order).unwrap();
    writeln!(out, "sigma: {}", join(&d.indices)).unwrap();
    writeln!(out, "e: {}", join(&d.multiplicities)).unwrap();
    writeln!(out, "rho: {}", join(&d.ranks)).unwrap();
    let d_prime = d.max_index().map_or("-".to_string(), |x| x.to_string());
    writeln!(out, "d': {d_prime}").unwrap();
    writeln!(out, "res_rel: {:.4e}", d.diagnostics.res_rel).unwrap();
    writeln!(out, "norm_N: {:.4e}", d.diagnostics.norm_n).unwrap();
    Ok(out)
}

pub fn cmd_oracle(args: &InputArgs) -> CliResult<String> {
    let m = load_series(&args.input, args.point)?;
    let opts = decompose_options(args)?;
    let r = match opts.normal_rank {
        Some(r) => r,
        None if !m.exact() => return Err(Error::NormalRankRequired.into()),
        None => {
            ranksearch::estimate_normal_rank(&m, opts.rank_trials, tolerance(args.tol), opts.seed)?
        }
    };
    if r == 0 {
        return Err(Error::ZeroFunction.into());
    }
    let profile = toeplitz_oracle::oracle_profile(&m, r, tolerance(args.tol), args.max_order)?;
    let ell = profile.pole_order as i64;
    let mut out = format!("{:>4}  {:>5}  {:>5}  {:>3}\n", "k", "r_k", "rho_k", "e_k");
    for t in 0..profile.ranks.len() {
        writeln!(
            out,
            "{:>4}  {:>5}  {:>5}  {:>3}",
            t as i64 - ell,
            profile.ranks[t],
            profile.increments[t],
            profile.multiplicities[t]
        )
        .unwrap();
    }
    writeln!(out, "normal rank: {r}").unwrap();
    writeln!(out, "pole order: {ell}").unwrap();
    writeln!(out, "sigma: {}", join(&profile.indices()?)).unwrap();
    let d_prime = profile
        .max_index()
        .map_or("-".to_string(), |x| x.to_string());
    writeln!(out, "d': {d_prime}").unwrap();
    Ok(out)
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn verify_checks(
    m: &LaurentMatrix,
    file: &DecompositionFile,
    max_res: f64,
    max_spread: f64,
    tol: Tolerance,
) -> CliResult<Vec<Check>> {
    let d = file.to_decomposition()?;
    let r = d.normal_rank;
    let mut checks = Vec::new();
    let sorted = d.indices.windows(2).all(|w| w[0] <= w[1]);
    checks.push(Check {
        name: "sigma sorted",
        passed: sorted && d.indices.len() == r,
        detail: format!("sigma: {}", join(&d.indices)),
    });
    let shapes_ok = d.nr.rows() == m.cols()
        && d.nr.cols() == r
        && d.mr_hat.rows() == m.rows()
        && d.mr_hat.cols() == r;
    if !shapes_ok || d.point != m.point() {
        return Err(CliError::MismatchedShapes(format!(
            "{}x{} series about {} vs N_r {}x{} and M̂_r {}x{} about {}",
            m.rows(),
            m.cols(),
            format_complex(m.point()),
            d.nr.rows(),
            d.nr.cols(),
            d.mr_hat.rows(),
            d.mr_hat.cols(),
            format_complex(d.point)
        )));
    }
    if r == 0 {
        checks.push(Check {
            name: "zero function",
            passed: m.trim_leading().is_err(),
            detail: "empty decomposition".into(),
        });
        return Ok(checks);
    }
    if !sorted {
        return Ok(checks);
    }
    let report = smithform::residual_report(m, &d)?;
    checks.push(Check {
        name: "residual",
        passed: report.res_rel <= max_res,
        detail: format!("res_rel {:.4e} (limit {max_res:.1e})", report.res_rel),
    });
    let mr0 = d.mr_hat.coeff(0)?;
    let mr_rank = densela::numerical_rank(&mr0, tol)?.rank;
    checks.push(Check {
        name: "M̂_r(λ₀) rank",
        passed: mr_rank == r,
        detail: format!("rank {mr_rank} of {r}"),
    });
    if file.n_full.is_some() {
        let n = d.n_full.cols();
        let n0 = d.n_full.coeff(0)?;
        let n_rank = densela::numerical_rank(&n0, tol)?.rank;
        checks.push(Check {
            name: "N(λ₀) rank",
            passed: n_rank == n,
            detail: format!("rank {n_rank} of {n}"),
        });
        let spread = smithform::determinant_spread(&d.n_full, 10, DEFAULT_SEED)?;
        checks.push(Check {
            name: "det N spread",
            passed: spread <= max_spread,
            detail: format!("spread {spread:.4e} (limit {max_spread:.1e})"),
        });
    }
    Ok(checks)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<String> {
    let file = DecompositionFile::read(&args.decomp)?;
    let m = load_series(&args.input, Some(file.point.into()))?;
    let checks = verify_checks(
        &m,
        &file,
        args.max_res,
        args.max_spread,
        tolerance(args.tol),
    )?;
    let mut out = String::new();
    for c in &checks {
        writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )
        .unwrap();
    }
    if checks.iter().all(|c| c.passed) {
        Ok(out)
    } else {
        Err(CliError::VerifyFailed(out.trim_end().replace('\n', "; ")))
    }
}

pub fn gen_spec(args: &GenArgs) -> InstanceSpec {
    let k = args.param;
    let base = match args.preset {
        Some(TableArg::Table1) => InstanceSpec {
            power: k as i32,
            ..InstanceSpec::new(4, 5, vec![0, 1, 3], 2)
        },
        Some(TableArg::Table2) => InstanceSpec::new(4, 5, vec![0, k + 1, k + 2], 10),
        None => InstanceSpec::new(4, 5, vec![0, 1, 3], 2),
    };
    InstanceSpec {
        rows: args.rows.unwrap_or(base.rows),
        cols: args.cols.unwrap_or(base.cols),
        exponents: args.exponents.clone().unwrap_or(base.exponents),
        transform_degree: args.degree.unwrap_or(base.transform_degree),
        power: args.power.unwrap_or(base.power),
        seed: args.seed,
        complex: args.complex,
        identity_transforms: args.identity,
    }
}

pub fn cmd_gen(args: &GenArgs) -> CliResult<String> {
    let spec = gen_spec(args);
    let inst = harness::gen_instance(&spec)?;
    write_json(&args.output, &SeriesFile::from_matrix(&inst.matrix))?;
    Ok(format!(
        "wrote {}x{} degree {} to {}\nsigma: {}\n",
        inst.matrix.rows(),
        inst.matrix.cols(),
        inst.matrix.degree(),
        args.output.display(),
        join(&inst.indices)
    ))
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<String> {
    let opts = DecomposeOptions {
        search: SearchOptions {
            tol: tolerance(args.tol),
            ..SearchOptions::default()
        },
        ..DecomposeOptions::default()
    };
    let start = Instant::now();
    let (label, rows) = match args.table {
        TableArg::Table1 => ("i", harness::run_table1(args.seed, &opts)?),
        TableArg::Table2 => ("k", harness::run_table2(args.seed, &opts)?),
    };
    let elapsed = start.elapsed();
    if let Some(path) = &args.output {
        write_json(path, &rows)?;
    }
    let ok = rows.iter().filter(|r| r.indices_ok).count();
    Ok(format!(
        "{}indices recovered: {ok}/{}\nelapsed: {:.3} s\n",
        harness::format_table(label, &rows),
        rows.len(),
        elapsed.as_secs_f64()
    ))
}

pub fn dispatch(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            e.exit_code()
        }
    }
}
