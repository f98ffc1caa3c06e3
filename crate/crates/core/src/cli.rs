//! Command-line front end: `gen`, `classify`, `check-lemmas`, `extend`.
//!
//! Results go to stdout as JSON; failures go to stderr as
//! `{"error": kind, "message": ..., "exit_code": n}`. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a verification report contains failures |
//! | 2 | usage, parse or dimension error |
//! | 3 | not an MES preserver |
//! | 4 | not invertible on `span(MES)` |
//! | 5 | inconsistent Choi discriminant |
//! | 6 | no Kronecker-form conjugation recovered |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::choi;
use crate::classify::{Classifier, Config};
use crate::error::{Error, Result};
use crate::extension;
use crate::io::{self, MatrixJson};
use crate::lemmas::{self, LemmaConfig};
use crate::states::{self, DensityOperator};
use crate::superop::{self, Sigma, Superoperator};
use crate::tensor::{self, derive_seed, Dims};

/// Exit code for reports that ran to completion but contain failures.
pub const EXIT_REPORT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "meskit", version, about = "Linear maps preserving maximally entangled states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance (overrides MESKIT_TOL, default 1e-9).
    #[arg(long, env = "MESKIT_TOL", default_value_t = tensor::DEFAULT_TOL)]
    pub tol: f64,
    /// Sample count (meaning depends on the subcommand).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a preserver and its ground-truth factors.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SigmaArg::Identity)]
        sigma: SigmaArg,
        #[arg(long, value_enum, default_value_t = Form::Adjoint)]
        form: Form,
        /// Output directory for superop.json and truth.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decompose a superoperator file into (σ, U, V).
    Classify {
        input: PathBuf,
        /// Also write the decomposition to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the numerical verification suite.
    CheckLemmas {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Extend a preserver to L(Y ⊗ Y) and report commutation residuals.
    Extend {
        input: PathBuf,
        /// σ of the input; detected from the Choi discriminant when omitted.
        #[arg(long, value_enum)]
        sigma: Option<SigmaArg>,
        /// Write the extended superoperator to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaArg {
    Identity,
    Transpose,
}

impl From<SigmaArg> for Sigma {
    fn from(s: SigmaArg) -> Self {
        match s {
            SigmaArg::Identity => Sigma::Identity,
            SigmaArg::Transpose => Sigma::Transpose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// X ↦ (U⊗V) X^σ (U⊗V)*
    Adjoint,
    /// X ↦ (U⊗V) σ(S(X)) (U⊗V)*, requires k = 1
    Swap,
    /// X ↦ tr(X) ρ
    Trace,
}

/// Exit code of a typed error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotPreserver(_) | Error::NotMes(_) => 3,
        Error::NotInvertible { .. } => 4,
        Error::InconsistentChoi { .. } | Error::SubspaceViolation { .. } | Error::PhaseAlignment { .. } => 5,
        Error::NotKronecker { .. } | Error::NoSolution { .. } | Error::AmbiguousSolution { .. } => 6,
        Error::Dimension(_)
        | Error::Index(_)
        | Error::Invalid(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::NotHermitian { .. }
        | Error::ZeroOperator
        | Error::NotUnitary { .. }
        | Error::NotOrthogonal { .. } => EXIT_USAGE,
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

/// Ground truth written next to a generated superoperator.
#[derive(Debug, Serialize)]
pub struct Truth {
    pub form: Form,
    pub dims: Dims,
    pub sigma: Option<Sigma>,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    pub u: Option<MatrixJson>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub v: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixJson>,
}

#[derive(Serialize)]
struct GenSummary {
    superop: PathBuf,
    truth: PathBuf,
    truth_data: Truth,
}

#[derive(Debug, Serialize)]
pub struct CommutationEntry {
    pub operator: String,
    pub max_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct ExtendReport {
    pub base_dims: Dims,
    pub sigma: Sigma,
    pub sigma_detected: bool,
    pub samples: usize,
    pub mes_preservation_residual: f64,
    pub commutation: Vec<CommutationEntry>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `stdout` and error reports to `stderr`. Returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{err}");
                return 0;
            }
            report_error(stderr, "usage", err.to_string().trim_end().to_owned(), EXIT_USAGE);
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(err) => {
            let code = exit_code(&err);
            report_error(stderr, err.kind(), err.to_string(), code);
            code
        }
    }
}

fn report_error(stderr: &mut dyn Write, kind: &str, message: String, exit_code: i32) {
    let report = ErrorReport {
        error: kind,
        message,
        exit_code,
    };
    let text = io::to_json_string(&report).unwrap_or_else(|_| format!("{{\"exit_code\":{exit_code}}}"));
    let _ = writeln!(stderr, "{text}");
}

fn emit<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<String> {
    let text = io::to_json_string(value)?;
    writeln!(stdout, "{text}")?;
    Ok(text)
}

fn check_common(common: &Common) -> Result<()> {
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        return Err(Error::Invalid(format!("tol must be positive, got {}", common.tol)));
    }
    if common.samples == Some(0) {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    Ok(())
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen {
            m,
            k,
            sigma,
            form,
            out,
            common,
        } => {
            check_common(&common)?;
            cmd_gen(Dims::new(m, k)?, sigma.into(), form, &out, common.seed, stdout)
        }
        Command::Classify { input, out, common } => {
            check_common(&common)?;
            let config = Config {
                tol: common.tol,
                samples: common.samples,
                seed: common.seed,
                ..Config::default()
            };
            cmd_classify(&input, &config, out.as_deref(), stdout)
        }
        Command::CheckLemmas { m, k, out, common } => {
            check_common(&common)?;
            let mut config = LemmaConfig::new(Dims::new(m, k)?);
            config.tol = common.tol;
            config.seed = common.seed;
            if let Some(samples) = common.samples {
                config.samples = samples;
            }
            cmd_check_lemmas(&config, out.as_deref(), stdout)
        }
        Command::Extend {
            input,
            sigma,
            out,
            common,
        } => {
            check_common(&common)?;
            cmd_extend(&input, sigma.map(Sigma::from), &common, out.as_deref(), stdout)
        }
    }
}

/// Builds the generated map and its ground truth.
pub fn generate(dims: Dims, sigma: Sigma, form: Form, seed: u64) -> Result<(Superoperator, Truth)> {
    let (m, n) = (dims.m(), dims.n());
    match form {
        Form::Adjoint | Form::Swap => {
            if form == Form::Swap && dims.k() != 1 {
                return Err(Error::Dimension(format!(
                    "the swap form needs m = n (k = 1), got m = {m}, k = {}",
                    dims.k()
                )));
            }
            let u = tensor::haar_unitary(m, derive_seed(seed, 0));
            let v = tensor::haar_unitary(n, derive_seed(seed, 1));
            let phi = match form {
                Form::Adjoint => superop::make_adjoint_preserver(&u, &v, sigma)?,
                _ => superop::make_swap_preserver(&u, &v, sigma)?,
            };
            let truth = Truth {
                form,
                dims,
                sigma: Some(sigma),
                u: Some(MatrixJson::from(&u)),
                v: Some(MatrixJson::from(&v)),
                rho: None,
            };
            Ok((phi, truth))
        }
        Form::Trace => {
            let rho = states::random_coisometry(dims, derive_seed(seed, 2)).pi();
            let rho = DensityOperator::new(rho, dims, tensor::DEFAULT_TOL)?;
            let phi = superop::make_trace_preserver(&rho)?;
            let truth = Truth {
                form,
                dims,
                sigma: None,
                u: None,
                v: None,
                rho: Some(MatrixJson::from(rho.matrix())),
            };
            Ok((phi, truth))
        }
    }
}

pub fn cmd_gen(dims: Dims, sigma: Sigma, form: Form, out: &Path, seed: u64, stdout: &mut dyn Write) -> Result<i32> {
    let (phi, truth) = generate(dims, sigma, form, seed)?;
    std::fs::create_dir_all(out)?;
    let superop_path = out.join("superop.json");
    let truth_path = out.join("truth.json");
    io::write_atomic(&superop_path, &io::to_json_string(&phi)?)?;
    io::write_atomic(&truth_path, &io::to_json_string(&truth)?)?;
    emit(
        stdout,
        &GenSummary {
            superop: superop_path,
            truth: truth_path,
            truth_data: truth,
        },
    )?;
    Ok(0)
}

pub fn cmd_classify(input: &Path, config: &Config, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let phi = superop::load(input)?;
    let dec = Classifier::new(config.clone()).decompose(&phi)?;
    let text = emit(stdout, &dec)?;
    if let Some(path) = out {
        io::write_atomic(path, &text)?;
    }
    Ok(0)
}

pub fn cmd_check_lemmas(config: &LemmaConfig, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let report = lemmas::check_lemmas(config)?;
    let text = emit(stdout, &report)?;
    if let Some(path) = out {
        io::write_atomic(path, &text)?;
    }
    Ok(if report.all_passed { 0 } else { EXIT_REPORT_FAILED })
}

/// Default number of random MES per commutation check in `extend`.
pub const EXTEND_DEFAULT_SAMPLES: usize = 20;

pub fn extend_report(phi: &Superoperator, sigma: Option<Sigma>, common: &Common) -> Result<(extension::ExtendedSuperoperator, ExtendReport)> {
    let dims = phi.dims();
    let tol = common.tol;
    let samples = common.samples.unwrap_or(EXTEND_DEFAULT_SAMPLES);
    if dims.k() < 2 {
        return Err(Error::Dimension(format!("extension needs k ≥ 2, got k = {}", dims.k())));
    }
    let residual = superop::mes_preservation_residual(phi, samples, tol, derive_seed(common.seed, 0));
    if !(residual < tol) {
        return Err(Error::NotPreserver(format!(
            "image of a random MES is off MES by {residual:.3e}"
        )));
    }
    let (sigma, detected) = match sigma {
        Some(s) => (s, false),
        None => (choi::detect_sigma(phi, derive_seed(common.seed, 1), tol)?, true),
    };
    let ext = extension::extend(phi, sigma)?;

    let mes_residual = superop::mes_preservation_residual(ext.superop(), samples, tol, derive_seed(common.seed, 2));

    let mut commutation = Vec::new();
    let k = dims.k();
    let mut seed_index = 3;
    let mut push = |operator: String, w: &tensor::ComplexMatrix| -> Result<()> {
        let max_residual = extension::max_commutation_residual(ext.superop(), w, samples, derive_seed(common.seed, seed_index))?;
        seed_index += 1;
        commutation.push(CommutationEntry { operator, max_residual });
        Ok(())
    };
    for j in 0..k {
        push(format!("P_{}⊗I", j + 1), &extension::p_operator_on_pair(j, dims)?)?;
    }
    for p in 0..k {
        for q in p + 1..k {
            push(format!("Q_{}{}", p + 1, q + 1), &extension::q_operator(p, q, dims)?)?;
        }
    }
    let all_passed = mes_residual < tol && commutation.iter().all(|c| c.max_residual < tol);
    let report = ExtendReport {
        base_dims: dims,
        sigma,
        sigma_detected: detected,
        samples,
        mes_preservation_residual: mes_residual,
        commutation,
        all_passed,
        output: None,
    };
    Ok((ext, report))
}

pub fn cmd_extend(
    input: &Path,
    sigma: Option<Sigma>,
    common: &Common,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let phi = superop::load(input)?;
    let (ext, mut report) = extend_report(&phi, sigma, common)?;
    if let Some(path) = out {
        io::write_atomic(path, &io::to_json_string(&ext)?)?;
        report.output = Some(path.to_path_buf());
    }
    emit(stdout, &report)?;
    Ok(if report.all_passed { 0 } else { EXIT_REPORT_FAILED })
}
