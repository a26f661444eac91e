use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use freegap::certificate::{certify, certify_convex, classify_regime, epsilon, Estimator};
use freegap::error::{Error, Result};
use freegap::harness::{
    default_ell, dump_spectrum, run_trials, trial_matrix, EigMethod, EpsilonConfig, Mixture,
    TrialConfig, POWER_NORM_TOL,
};
use freegap::kappa::{kappa_l_with, CompositionKind};
use freegap::matcore::io::{read_matrix_market, write_matrix_market, write_permutation};
use freegap::matcore::{
    birkhoff_mixture, inf_norm_star, matching_sum, random_perfect_matching, rescale_for_convex,
    sample_permutation, uniform, zero_one_norm_star, SparseMatrix,
};
use freegap::moments::{phi_moment_table, trace_table};
use freegap::quasitree::{new_simulator, Word, DEFAULT_SUPPORT_LIMIT};

#[derive(Parser)]
#[command(name = "freegap", version, about = "Spectral gap bounds for random permutations mixed with regular matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bound rho(ell0) with regime flags and epsilon
    Certify(CertifyArgs),
    /// Emit the moment table Phi(p^l1 (p*)^l2)
    Moments(MomentsArgs),
    /// Compute kappa_L and check the 4*delta envelope
    Kappa(KappaArgs),
    /// Sample permutations and compare |lambda_2| with the bound
    Trials(TrialsArgs),
    /// Dump the spectrum of one sampled P restricted to the complement of 1
    Spectrum(SpectrumArgs),
    /// Quasi-tree Monte Carlo estimate of Phi(word) or of the norm of p^ell
    Oracle(OracleArgs),
    /// Write a test matrix or permutation
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct MatrixArg {
    /// Matrix Market file holding Q
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    TraceProxy,
    Quasitree,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Mixing weight for (1-r)M + rQ; the unnormalized M + Q when omitted
    #[arg(long)]
    r: Option<f64>,
    /// Power ell0; defaults to round((1-c0) ln n / (6 ln d*))
    #[arg(long)]
    ell0: Option<usize>,
    /// Largest p in kappa_L (defaults to ell0)
    #[arg(long)]
    kappa_cap: Option<usize>,
    #[arg(long, value_enum, default_value = "trace-proxy")]
    estimator: EstimatorArg,
    /// Quasi-tree trials for the quasitree estimator
    #[arg(long, default_value_t = 8)]
    trials: usize,
    /// Power iterations per quasi-tree trial
    #[arg(long, default_value_t = 1)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Operator norm bound K (estimated when omitted)
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    c0: f64,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Largest l1 and l2 in the table
    #[arg(long)]
    ell0: usize,
    /// Use Q' = r/(1-r) Q in place of Q
    #[arg(long)]
    r: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct KappaArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Largest p in the maximum
    #[arg(long, short = 'L')]
    l: usize,
    /// Restrict to compositions with positive parts
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dense,
    PowerNorm,
}

impl From<MethodArg> for EigMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dense => EigMethod::Dense,
            MethodArg::PowerNorm => EigMethod::PowerNorm,
        }
    }
}

#[derive(Args)]
struct TrialsArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    ell0: Option<usize>,
    #[arg(long)]
    kappa_cap: Option<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "dense")]
    method: MethodArg,
    /// Relative tolerance of the power-norm estimator
    #[arg(long, default_value_t = POWER_NORM_TOL)]
    tol: f64,
    /// Also record the power-norm estimate of every sample
    #[arg(long)]
    power_norm: bool,
    /// Report exceedance of (1 + eps) rho as well, with eps built from c1
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    c0: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference radius; defaults to the trace proxy at ell0
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 20)]
    ell0: usize,
    /// CSV is written here and metadata to the same path with .json appended
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Phi,
    Norm,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    matrix: MatrixArg,
    /// Word over u U q Q p P with optional counts, rightmost letter first
    #[arg(long, default_value = "")]
    word: String,
    #[arg(long, value_enum, default_value = "phi")]
    mode: OracleMode,
    /// Power for the norm mode
    #[arg(long, default_value_t = 2)]
    ell0: usize,
    #[arg(long, default_value_t = 1)]
    iters: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SUPPORT_LIMIT)]
    support_limit: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Random perfect matching (n even)
    Matching,
    /// Average of d random perfect matchings
    MatchingSum,
    /// Random convex combination of k permutation matrices
    Birkhoff,
    /// The constant matrix J/n
    Uniform,
    /// Uniform random permutation, one 1-based image per line
    Permutation,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn json_only(f: Format) -> Result<()> {
    if f == Format::Csv {
        return Err(Error::InvalidParameter("this subcommand only writes JSON".into()));
    }
    Ok(())
}

fn resolve_ell0(q: &SparseMatrix, ell0: Option<usize>, c0: f64) -> Result<usize> {
    match ell0 {
        Some(l) => Ok(l),
        None => default_ell(q.n() as f64, zero_one_norm_star(q) as f64, c0).map_err(|e| {
            Error::InvalidParameter(format!("cannot pick a default ell0 ({e}); pass --ell0"))
        }),
    }
}

fn cmd_certify(a: CertifyArgs) -> Result<()> {
    json_only(a.output.format)?;
    let q = read_matrix_market(&a.matrix.matrix)?;
    let ell0 = resolve_ell0(&q, a.ell0, a.c0)?;
    let cap = a.kappa_cap.unwrap_or(ell0);
    let est = match a.estimator {
        EstimatorArg::TraceProxy => Estimator::TraceProxy,
        EstimatorArg::Quasitree => Estimator::QuasiTree {
            trials: a.trials,
            iters: a.iters,
            seed: a.seed,
        },
    };
    let cert = match a.r {
        Some(r) => certify_convex(&q, r, ell0, cap, est)?,
        None => certify(&q, ell0, cap, est)?,
    };
    let regime = classify_regime(&q, a.r, a.k)?;
    // ε is informational and undefined outside its domain
    let eps = epsilon(q.n() as f64, zero_one_norm_star(&q) as f64, a.c0, a.c1, a.alpha).ok();
    emit_json(
        a.output.out.as_deref(),
        &json!({ "certificate": cert, "regime": regime, "epsilon": eps }),
    )
}

fn cmd_moments(a: MomentsArgs) -> Result<()> {
    let q = read_matrix_market(&a.matrix.matrix)?;
    let q = match a.r {
        Some(r) => rescale_for_convex(&q, r)?,
        None => q,
    };
    let table = phi_moment_table(&trace_table(&q, a.ell0)?, a.ell0)?;
    match a.output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(a.output.out.as_deref(), &buf)
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> = (0..=a.ell0)
                .map(|i| (0..=a.ell0).map(|j| table.get(i, j)).collect())
                .collect();
            let rho: Vec<Option<f64>> = (0..=a.ell0).map(|l| table.rho(l)).collect();
            emit_json(
                a.output.out.as_deref(),
                &json!({ "l_max": a.ell0, "phi": rows, "rho": rho }),
            )
        }
    }
}

fn cmd_kappa(a: KappaArgs) -> Result<()> {
    json_only(a.output.format)?;
    let q = read_matrix_market(&a.matrix.matrix)?;
    let kind = if a.strict {
        CompositionKind::Strict
    } else {
        CompositionKind::Weak
    };
    let k = kappa_l_with(&q, a.l, kind)?;
    let delta = inf_norm_star(&q);
    let envelope = 4.0 * delta;
    emit_json(
        a.output.out.as_deref(),
        &json!({
            "kappa": k,
            "delta_star": delta,
            "envelope": envelope,
            "envelope_ok": k.kappa_l <= envelope * (1.0 + 1e-12),
        }),
    )
}

fn mixture(r: Option<f64>) -> Mixture {
    r.map_or(Mixture::Sum, Mixture::Convex)
}

fn cmd_trials(a: TrialsArgs) -> Result<()> {
    json_only(a.output.format)?;
    let q = read_matrix_market(&a.matrix.matrix)?;
    let ell0 = resolve_ell0(&q, a.ell0, a.c0)?;
    let mut cfg = TrialConfig::new(a.trials, a.seed, ell0);
    cfg.kappa_cap = a.kappa_cap.unwrap_or(ell0);
    cfg.method = a.method.into();
    cfg.tol = a.tol;
    cfg.with_power_norm = a.power_norm;
    cfg.epsilon = a.c1.map(|c1| EpsilonConfig {
        c0: a.c0,
        c1,
        alpha: a.alpha,
    });
    let report = run_trials(&q, mixture(a.r), &cfg)?;
    emit_json(a.output.out.as_deref(), &report)
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<()> {
    let q = read_matrix_market(&a.matrix.matrix)?;
    let mix = mixture(a.r);
    let p = trial_matrix(&q, mix, a.seed, 0)?;
    let radius = match a.radius {
        Some(r) => r,
        None => match a.r {
            Some(r) => freegap::moments::rho_ell_convex(&q, r, a.ell0)?,
            None => freegap::moments::rho_ell(&q, a.ell0)?,
        },
    };
    let dump = dump_spectrum(&p, radius)?;
    let meta = json!({
        "n": dump.n,
        "count": dump.eigenvalues.len(),
        "circle_radius": dump.circle_radius,
        "max_modulus": dump.max_modulus,
        "mixture": mix,
        "seed": a.seed,
        "ell0": a.ell0,
    });
    match a.format {
        Format::Json => emit_json(a.out.as_deref(), &dump),
        Format::Csv => {
            let mut buf = Vec::new();
            dump.write_csv(&mut buf)?;
            emit(a.out.as_deref(), &buf)?;
            if let Some(out) = &a.out {
                let mut side = out.clone().into_os_string();
                side.push(".json");
                emit_json(Some(Path::new(&side)), &meta)?;
            }
            Ok(())
        }
    }
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    json_only(a.output.format)?;
    let q = read_matrix_market(&a.matrix.matrix)?;
    let sim = new_simulator(&q, a.seed)?.with_support_limit(a.support_limit);
    match a.mode {
        OracleMode::Phi => {
            let word: Word = a.word.parse()?;
            let est = sim.estimate_phi(&word, a.trials)?;
            emit_json(
                a.output.out.as_deref(),
                &json!({ "word": word.to_string(), "seed": a.seed, "estimate": est }),
            )
        }
        OracleMode::Norm => {
            let est = sim.estimate_norm_power(a.ell0, a.trials, a.iters)?;
            emit_json(
                a.output.out.as_deref(),
                &json!({ "seed": a.seed, "estimate": est }),
            )
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    if let Kind::Permutation = a.kind {
        let p = sample_permutation(a.n, a.seed)?;
        return match &a.out {
            Some(path) => write_permutation(path, &p),
            None => emit(None, freegap::matcore::io::format_permutation(&p).as_bytes()),
        };
    }
    let m = match a.kind {
        Kind::Matching => random_perfect_matching(a.n, a.seed)?,
        Kind::MatchingSum => matching_sum(a.n, a.d, a.seed)?,
        Kind::Birkhoff => birkhoff_mixture(a.n, a.k, a.seed)?,
        Kind::Uniform => uniform(a.n)?,
        Kind::Permutation => unreachable!(),
    };
    match &a.out {
        Some(path) => write_matrix_market(path, &m),
        None => emit(None, freegap::matcore::io::format_matrix_market(&m).as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Certify(a) => cmd_certify(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Kappa(a) => cmd_kappa(a),
        Command::Trials(a) => cmd_trials(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
