//! Command-line front end.
//!
//! Subcommands: `exact` (closed-form evaluators), `simulate` (replicate
//! ensembles), `verify` (detailed balance and mixture checks over a grid)
//! and `diagnose` (growth of the number of groups under the urn).
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid parameters,
//! 3 runaway guard.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ctmc::{self, simulate_bdi, SimOptions, TrajectoryMeta};
use crate::error::{Error, Result};
use crate::formulae::{self, ModelParams};
use crate::montecarlo::{self, EngineKind, EnsembleConfig};
use crate::partitions::{self, AllelicPartition};
use crate::stationary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNAWAY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "allelic",
    version,
    about = "Birth-death-immigration dynamics on allelic partitions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a closed-form law (ESF, PSF, stationary pi, lambda, b_t).
    Exact(ExactArgs),
    /// Simulate replicate chains from the empty partition.
    Simulate(SimulateArgs),
    /// Check detailed balance, the mixture form and normalization over a grid.
    Verify(VerifyArgs),
    /// Report the growth of the number of groups along urn runs.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactKind {
    Esf,
    Psf,
    Pi,
    Lambda,
    Bt,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Which law to evaluate.
    #[arg(value_enum)]
    pub kind: ExactKind,
    /// Number of items n (non-negative integer; required for esf, psf, lambda).
    #[arg(long)]
    pub n: Option<usize>,
    /// Discount alpha, dimensionless, in [0, 1) (psf, pi).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Concentration theta, dimensionless, > -alpha (> 0 for esf and lambda).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Per-individual death rate mu, per unit time, >= 0 (> 1 for pi and lambda).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Time t >= 0, in model time units (bt).
    #[arg(long)]
    pub t: Option<f64>,
    /// Single partition to evaluate, e.g. "1^2 3^1" ("0" is the empty partition).
    #[arg(long)]
    pub partition: Option<String>,
    /// Emit a CSV table over every partition of n (or n = 0..=N for lambda).
    #[arg(long)]
    pub table: bool,
    /// Write the table to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Multiplicity,
    Branching,
    Bdi,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Multiplicity => EngineKind::Multiplicity,
            EngineArg::Branching => EngineKind::Branching,
            EngineArg::Bdi => EngineKind::Bdi,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Discount alpha, dimensionless, in [0, 1).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Concentration theta, dimensionless; must be > 0 to leave the empty start.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Per-individual death rate mu, per unit time, >= 0.
    #[arg(long)]
    pub mu: f64,
    /// Observation time t >= 0, in model time units.
    #[arg(long)]
    pub t: f64,
    /// Number of independent replicates R >= 1.
    #[arg(long, default_value_t = 10_000)]
    pub replicates: u64,
    /// Master seed (required); replicate r uses stream r of this seed.
    #[arg(long)]
    pub seed: u64,
    /// Simulation engine.
    #[arg(long, value_enum, default_value_t = EngineArg::Multiplicity)]
    pub engine: EngineArg,
    /// Worker threads (default: number of processors); output does not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Abort a replicate after this many jumps (runaway guard).
    #[arg(long, default_value_t = ctmc::DEFAULT_MAX_EVENTS)]
    pub max_events: u64,
    /// Write the trajectory of replicate 0 as CSV.
    #[arg(long)]
    pub trajectory_out: Option<PathBuf>,
    /// Write the histogram of final states as CSV (key,count,probability).
    #[arg(long)]
    pub histogram_out: Option<PathBuf>,
    /// Write the JSON summary here instead of standard output.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Use only this alpha, in (0, 1) (default grid 0.1, 0.5, 0.9).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Use only this theta > -alpha (default grid -alpha/2, 0.5, 2).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Use only this mu, per unit time, > 1 (default grid 1.2, 2, 5).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Largest item count for the partition-level checks (at most 14).
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Largest item count for the item-count balance check.
    #[arg(long, default_value_t = 200)]
    pub s_max: usize,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Perturb pi at one state so the checks must fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Discount alpha, dimensionless, in [0, 1).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Concentration theta, dimensionless, > -alpha (> 0 when alpha = 0).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Number of urn steps per run, >= 10.
    #[arg(long, default_value_t = 100_000)]
    pub n_max: usize,
    /// Number of independent runs, >= 1.
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    /// Master seed (required).
    #[arg(long)]
    pub seed: u64,
    /// Exponent of the power normalization K_n / n^exponent (default: alpha).
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Worker threads (default: number of processors).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing normal output to `stdout` and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Exact(a) => cmd_exact(&a, stdout).map(|_| EXIT_OK),
        Command::Simulate(a) => cmd_simulate(&a, stdout).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Diagnose(a) => cmd_diagnose(&a, stdout).map(|_| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Runaway { .. } => EXIT_RUNAWAY,
                _ => EXIT_INVALID,
            }
        }
    }
}

/// Formats `v` with 12 significant digits, trailing zeros trimmed.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{v:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::domain(format!("{kind} requires --{flag}")))
}

fn open_out(
    path: &Option<PathBuf>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            body(&mut f)?;
            f.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn write_partition_table(
    out: &mut dyn Write,
    header: &str,
    rows: &[(AllelicPartition, f64)],
) -> Result<()> {
    writeln!(out, "# allelic {}", crate::VERSION)?;
    writeln!(out, "# {header}")?;
    writeln!(out, "partition,probability")?;
    for (m, p) in rows {
        writeln!(out, "{m},{}", format_sig12(*p))?;
    }
    Ok(())
}

pub fn cmd_exact(a: &ExactArgs, stdout: &mut dyn Write) -> Result<()> {
    let single = a
        .partition
        .as_deref()
        .map(AllelicPartition::decode)
        .transpose()?;
    match a.kind {
        ExactKind::Esf | ExactKind::Psf => {
            let n = need(a.n, "n", "exact esf/psf")?;
            let theta = need(a.theta, "theta", "exact esf/psf")?;
            let alpha = if a.kind == ExactKind::Esf {
                0.0
            } else {
                a.alpha
            };
            if a.kind == ExactKind::Esf && !(theta > 0.0) {
                return Err(Error::domain(format!(
                    "ESF requires theta > 0, got {theta}"
                )));
            }
            let params = ModelParams::new(alpha, theta, 0.0)?;
            let eval = |m: &AllelicPartition| formulae::psf(n, &params, m);
            if let (Some(m), false) = (&single, a.table) {
                writeln!(stdout, "{}", format_sig12(eval(m)?))?;
                return Ok(());
            }
            let rows = partitions::enumerate(n)?
                .into_iter()
                .map(|m| eval(&m).map(|p| (m, p)))
                .collect::<Result<Vec<_>>>()?;
            let header =
                format!("kind={:?} n={n} alpha={alpha} theta={theta}", a.kind).to_lowercase();
            open_out(&a.out, stdout, |w| write_partition_table(w, &header, &rows))
        }
        ExactKind::Pi => {
            let theta = need(a.theta, "theta", "exact pi")?;
            let mu = need(a.mu, "mu", "exact pi")?;
            let params = ModelParams::new(a.alpha, theta, mu)?;
            params.require_reversible()?;
            if let (Some(m), false) = (&single, a.table) {
                writeln!(stdout, "{}", format_sig12(stationary::pi_pmf(m, &params)?))?;
                return Ok(());
            }
            let n = need(a.n, "n", "exact pi --table")?;
            let rows = partitions::enumerate(n)?
                .into_iter()
                .map(|m| stationary::pi_pmf(&m, &params).map(|p| (m, p)))
                .collect::<Result<Vec<_>>>()?;
            let header = format!("kind=pi n={n} alpha={} theta={theta} mu={mu}", a.alpha);
            open_out(&a.out, stdout, |w| write_partition_table(w, &header, &rows))
        }
        ExactKind::Lambda => {
            let theta = need(a.theta, "theta", "exact lambda")?;
            let mu = need(a.mu, "mu", "exact lambda")?;
            let n = need(a.n, "n", "exact lambda")?;
            if !a.table {
                writeln!(
                    stdout,
                    "{}",
                    format_sig12(stationary::lambda_pmf(n, theta, mu)?)
                )?;
                return Ok(());
            }
            let rows = (0..=n)
                .map(|j| stationary::lambda_pmf(j, theta, mu).map(|p| (j, p)))
                .collect::<Result<Vec<_>>>()?;
            open_out(&a.out, stdout, |w| {
                writeln!(w, "# allelic {}", crate::VERSION)?;
                writeln!(w, "# kind=lambda theta={theta} mu={mu}")?;
                writeln!(w, "n,probability")?;
                for (j, p) in &rows {
                    writeln!(w, "{j},{}", format_sig12(*p))?;
                }
                Ok(())
            })
        }
        ExactKind::Bt => {
            let mu = need(a.mu, "mu", "exact bt")?;
            let t = need(a.t, "t", "exact bt")?;
            writeln!(stdout, "{}", format_sig12(formulae::b_t(mu, t)?))?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct ParamsOut {
    alpha: f64,
    theta: f64,
    mu: f64,
}

impl From<&ModelParams> for ParamsOut {
    fn from(p: &ModelParams) -> Self {
        Self {
            alpha: p.alpha(),
            theta: p.theta(),
            mu: p.mu(),
        }
    }
}

/// JSON summary of a `simulate` run.
#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    version: &'static str,
    engine: EngineKind,
    params: ParamsOut,
    t: f64,
    seed: u64,
    replicates: u64,
    b_t: f64,
    s_mean: f64,
    s_var: f64,
    k_mean: Option<f64>,
    k_var: Option<f64>,
    /// TV between the empirical law of S(t) and NBin(theta, b_t).
    tv_s: f64,
    /// TV between the empirical law of M(t) and the Poisson product (alpha = 0),
    /// on partitions with s <= 12 and the rest lumped together.
    tv_m: Option<f64>,
    /// TV to the stationary law pi on s <= 12 (mu > 1, alpha > 0); a reference
    /// for large t only.
    tv_pi: Option<f64>,
}

/// Item-count cutoff for partition-level TV reports.
pub const TV_PARTITION_CUTOFF: usize = 12;

pub fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.alpha, a.theta, a.mu)?;
    if !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(Error::domain(format!(
            "--t must be finite and >= 0, got {}",
            a.t
        )));
    }
    crate::ctmc::gillespie_refuse_empty_start(&params)?;
    let engine: EngineKind = a.engine.into();
    let sim = SimOptions {
        max_events: a.max_events,
    };
    let mut cfg = EnsembleConfig::new(params, a.t, a.replicates, a.seed, engine);
    cfg.workers = a.workers;
    cfg.sim = sim;
    let res = montecarlo::run_ensemble(&cfg)?;

    let header = vec![format!(
        "engine={engine} alpha={} theta={} mu={} t={}",
        a.alpha, a.theta, a.mu, a.t
    )];

    if let Some(path) = &a.trajectory_out {
        let mut rng = montecarlo::replicate_rng(a.seed, 0);
        let mut w = BufWriter::new(File::create(path)?);
        match engine {
            EngineKind::Bdi => {
                let traj = simulate_bdi(&params, a.t, sim, &mut rng)?;
                writeln!(w, "# allelic {}", crate::VERSION)?;
                writeln!(w, "# {} seed={} horizon={}", header[0], a.seed, a.t)?;
                writeln!(w, "time,s")?;
                for (t, n) in &traj.jumps {
                    writeln!(w, "{t},{n}")?;
                }
            }
            EngineKind::Multiplicity | EngineKind::Branching => {
                let empty = AllelicPartition::empty();
                let traj = if engine == EngineKind::Multiplicity {
                    ctmc::simulate_from(&params, empty, a.t, sim, &mut rng)?
                } else {
                    ctmc::simulate_branching_from(&params, empty, a.t, sim, &mut rng)?
                };
                let meta = TrajectoryMeta {
                    params: &params,
                    seed: a.seed,
                    engine: &engine.to_string(),
                };
                traj.write_csv(&mut w, &meta)?;
            }
        }
        w.flush()?;
    }

    if let Some(path) = &a.histogram_out {
        let mut w = BufWriter::new(File::create(path)?);
        match &res.partitions {
            Some(parts) => parts.write_csv(&mut w, &header)?,
            None => res.sizes.write_csv(&mut w, &header)?,
        }
        w.flush()?;
    }

    let summary = summarize(&params, a, engine, &res)?;
    let json = serde_json::to_string_pretty(&summary)?;
    write_text(&a.summary_out, stdout, &json)
}

fn write_text(path: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    open_out(path, stdout, |w| {
        writeln!(w, "{text}")?;
        Ok(())
    })
}

fn summarize(
    params: &ModelParams,
    a: &SimulateArgs,
    engine: EngineKind,
    res: &montecarlo::EnsembleResult,
) -> Result<SimulationSummary> {
    let b = formulae::b_t(params.mu(), a.t)?;
    let tv_s = tv_sizes(&res.sizes.probabilities(), params.theta(), b)?;
    let tv_m = match (&res.partitions, params.alpha() == 0.0) {
        (Some(parts), true) => Some(tv_partitions(parts, |m| {
            formulae::poisson_product_prob(m, params.theta(), b)
        })?),
        _ => None,
    };
    let tv_pi = match &res.partitions {
        Some(parts) if params.mu() > 1.0 && params.alpha() > 0.0 => {
            Some(tv_partitions(parts, |m| stationary::pi_pmf(m, params))?)
        }
        _ => None,
    };
    Ok(SimulationSummary {
        version: crate::VERSION,
        engine,
        params: params.into(),
        t: a.t,
        seed: a.seed,
        replicates: a.replicates,
        b_t: b,
        s_mean: res.sizes.mean(),
        s_var: res.sizes.variance(),
        k_mean: res.groups.as_ref().map(|g| g.mean()),
        k_var: res.groups.as_ref().map(|g| g.variance()),
        tv_s,
        tv_m,
        tv_pi,
    })
}

/// TV between an empirical item-count law and `NBin(theta, b)`.
pub fn tv_sizes(emp: &BTreeMap<usize, f64>, theta: f64, b: f64) -> Result<f64> {
    let top = emp.keys().next_back().copied().unwrap_or(0);
    let exact = (0..=top)
        .map(|n| Ok((n, formulae::neg_bin_pmf(n, theta, b)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(montecarlo::tv_distance(emp, &exact))
}

/// TV between an empirical partition law and `exact`, on `s <= 12` with the
/// remaining mass of each side lumped into one atom.
pub fn tv_partitions(
    emp: &montecarlo::EmpiricalDistribution<AllelicPartition>,
    exact: impl Fn(&AllelicPartition) -> Result<f64>,
) -> Result<f64> {
    let p = montecarlo::restrict(&emp.probabilities(), |m| m.size() <= TV_PARTITION_CUTOFF);
    let q = partitions::enumerate_up_to(TV_PARTITION_CUTOFF)?
        .into_iter()
        .map(|m| exact(&m).map(|v| (m, v)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(montecarlo::tv_distance(&p, &q))
}

/// One line of a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub check: &'static str,
    pub alpha: f64,
    pub theta: f64,
    pub mu: f64,
    pub truncation: usize,
    pub max_residual: f64,
    pub worst_state: String,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub version: &'static str,
    pub passed: bool,
    pub records: Vec<VerificationRecord>,
}

pub const TOL_BALANCE_S: f64 = 1e-12;
pub const TOL_BALANCE_M: f64 = 1e-11;
pub const TOL_MIXTURE: f64 = 1e-12;
pub const TOL_NORMALIZATION: f64 = 1e-8;
pub const TOL_SERIES: f64 = 1e-10;
/// Truncation for the normalization check `sum pi = sum lambda`.
pub const NORMALIZATION_TRUNCATION: usize = 14;
/// Terms in the partial sum of `alpha_i mu^-i`.
pub const SERIES_TERMS: usize = 10_000;

/// The default verification grid: alpha in {0.1, 0.5, 0.9}, theta in
/// {-alpha/2, 0.5, 2}, mu in {1.2, 2, 5}.
pub fn verification_grid(
    alpha: Option<f64>,
    theta: Option<f64>,
    mu: Option<f64>,
) -> Result<Vec<ModelParams>> {
    let alphas = alpha.map_or_else(|| vec![0.1, 0.5, 0.9], |a| vec![a]);
    let mus = mu.map_or_else(|| vec![1.2, 2.0, 5.0], |m| vec![m]);
    let mut out = Vec::new();
    for &a in &alphas {
        let thetas = theta.map_or_else(|| vec![-a / 2.0, 0.5, 2.0], |t| vec![t]);
        for &t in &thetas {
            for &m in &mus {
                let p = ModelParams::new(a, t, m)?;
                p.require_reversible()?;
                if a == 0.0 {
                    return Err(Error::domain("verification of pi requires alpha in (0, 1)"));
                }
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Runs every check at one parameter point. `fault` perturbs pi at `1^1 2^1`.
pub fn verify_point(
    params: &ModelParams,
    n_max: usize,
    s_max: usize,
    fault: bool,
) -> Result<Vec<VerificationRecord>> {
    let (alpha, theta, mu) = (params.alpha(), params.theta(), params.mu());
    let faulty = AllelicPartition::from_multiplicities([(1, 1), (2, 1)])?;
    let pi = |m: &AllelicPartition| -> Result<f64> {
        let v = stationary::pi_pmf(m, params)?;
        Ok(if fault && *m == faulty { v * 1.001 } else { v })
    };
    let record = |check, truncation, max_residual: f64, worst_state: String, tolerance: f64| {
        VerificationRecord {
            check,
            alpha,
            theta,
            mu,
            truncation,
            max_residual,
            worst_state,
            tolerance,
            passed: max_residual < tolerance,
        }
    };
    let mut out = Vec::new();

    let s = stationary::balance_residual_s(
        |n| Ok(stationary::lambda_signed(n, theta, mu)?.to_f64()),
        params,
        s_max,
    )?;
    out.push(record(
        "detailed_balance_s",
        s_max,
        s.max_residual,
        s.worst_state,
        TOL_BALANCE_S,
    ));

    let m = stationary::balance_residual_m(pi, params, n_max)?;
    out.push(record(
        "detailed_balance_m",
        n_max,
        m.max_residual,
        m.worst_state,
        TOL_BALANCE_M,
    ));

    let mut worst = (0.0f64, AllelicPartition::empty());
    for state in partitions::enumerate_up_to(n_max)? {
        let closed = pi(&state)?;
        let mixed = stationary::pi_via_mixture(&state, params, n_max)?;
        let r = if closed == mixed {
            0.0
        } else {
            ((closed - mixed) / closed).abs()
        };
        if !(r <= worst.0) {
            worst = (r, state);
        }
    }
    out.push(record(
        "mixture_equality",
        n_max,
        worst.0,
        worst.1.encode(),
        TOL_MIXTURE,
    ));

    let nt = NORMALIZATION_TRUNCATION;
    let mut sum_pi = 0.0;
    for state in partitions::enumerate_up_to(nt)? {
        sum_pi += pi(&state)?;
    }
    let mut sum_lambda = 0.0;
    for n in 0..=nt {
        sum_lambda += stationary::lambda_signed(n, theta, mu)?.to_f64();
    }
    out.push(record(
        "normalization",
        nt,
        (sum_pi - sum_lambda).abs(),
        String::new(),
        TOL_NORMALIZATION,
    ));

    let weights = formulae::alpha_weights(alpha, SERIES_TERMS)?;
    let partial: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * mu.powi(-(i as i32 + 1)))
        .sum();
    out.push(record(
        "series_identity",
        SERIES_TERMS,
        (partial - stationary::alpha_series_sum(alpha, mu)).abs(),
        String::new(),
        TOL_SERIES,
    ));
    Ok(out)
}

pub fn run_verification(a: &VerifyArgs) -> Result<VerificationReport> {
    let grid = verification_grid(a.alpha, a.theta, a.mu)?;
    let mut records = Vec::new();
    for params in &grid {
        records.extend(verify_point(params, a.n_max, a.s_max, a.inject_fault)?);
    }
    Ok(VerificationReport {
        version: crate::VERSION,
        passed: records.iter().all(|r| r.passed),
        records,
    })
}

pub fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let report = run_verification(a)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_text(&a.out, stdout, &json)?;
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

pub fn cmd_diagnose(a: &DiagnoseArgs, stdout: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.alpha, a.theta, 0.0)?;
    let exponent = a.exponent.unwrap_or(a.alpha);
    let rows = montecarlo::growth_report(&params, a.n_max, a.runs, a.seed, exponent, a.workers)?;
    let header = vec![format!(
        "alpha={} theta={} n_max={} runs={} seed={} exponent={exponent}",
        a.alpha, a.theta, a.n_max, a.runs, a.seed
    )];
    open_out(&a.out, stdout, |w| {
        montecarlo::write_growth_csv(w, &rows, &header)
    })
}
