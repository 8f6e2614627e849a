//! Argument definitions and subcommand drivers.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cuspsum_core::cuspforms::MAX_TABLE_LEN;
use cuspsum_core::{ExperimentConfig, RationalTwist};

use crate::cache::{self, TableSource, CACHE_DIR_ENV, FILE_NAME};
use crate::config::{pick, require, FileConfig};
use crate::error::CliError;
use crate::output::{csv_header, report_record, Format, Value};
use crate::runner;
use crate::sweep::{self, SweepPlan};
use crate::verify::{self, Suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "cuspsum", version, about = "Mean squares of short twisted sums of Ramanujan tau coefficients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or refresh the TAUC coefficient cache.
    Tau(TauArgs),
    /// Run one experiment and print its report.
    MeanSquare(MeanSquareArgs),
    /// Run a geometric M ladder crossed with a list of moduli.
    Sweep(SweepArgs),
    /// Run self-checks against independent oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct TauArgs {
    /// Number of coefficients.
    pub n_max: usize,
    /// Cache file [default: $CUSPSUM_CACHE_DIR/tau.tauc].
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Print `n tau(n)` for n up to n_max.
    #[arg(long)]
    pub dump: bool,
    /// Rebuild even when the cache is valid.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct MeanSquareArgs {
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long)]
    pub delta_exp: Option<f64>,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub h: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Ramp length as a fraction of Delta.
    #[arg(long)]
    pub ramp: Option<f64>,
    /// Overrides Delta = min(k^2 M^0.55, M).
    #[arg(long)]
    pub big_delta: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Constant multiplying the error budget.
    #[arg(long)]
    pub constant: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the main term.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add the wall-clock time to JSON output.
    #[arg(long)]
    pub timing: bool,
    /// Flat JSON object keyed by flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cache directory [default: $CUSPSUM_CACHE_DIR].
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "M-start")]
    pub m_start: Option<f64>,
    #[arg(long = "M-factor")]
    pub m_factor: Option<f64>,
    #[arg(long = "M-count")]
    pub m_count: Option<usize>,
    /// Comma-separated moduli.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub k: Option<Vec<u64>>,
    #[arg(long)]
    pub h: Option<u64>,
    #[arg(long)]
    pub delta_exp: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub ramp: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub constant: Option<f64>,
    /// Rows needing more coefficients fail individually.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated suites.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub suite: Vec<Suite>,
    /// M values for the voronoi suite.
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Option<Vec<f64>>,
    /// Moduli for the voronoi suite.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u64>>,
    /// Seed for the identity suite.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Table length for the tau suite.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Tau(a) => cmd_tau(&a, out),
        Command::MeanSquare(a) => cmd_mean_square(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::Write { path: PathBuf::from("<stdout>"), source: e })
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_format(s: Option<String>) -> Result<Option<Format>, CliError> {
    s.map(|s| Format::from_str(&s, true).map_err(|_| CliError::Usage(format!("unknown format \"{s}\""))))
        .transpose()
}

fn cmd_tau(a: &TauArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.n_max == 0 {
        return Err(CliError::Usage("n_max must be at least 1".into()));
    }
    let path = match &a.cache {
        Some(p) => p.clone(),
        None => std::env::var_os(CACHE_DIR_ENV)
            .map(|d| Path::new(&d).join(FILE_NAME))
            .ok_or_else(|| CliError::Usage(format!("give --cache or set {CACHE_DIR_ENV}")))?,
    };
    let existing = if path.exists() && !a.force { Some(cache::read(&path)?) } else { None };
    let (tau, status) = match existing {
        Some(tau) if tau.len() >= a.n_max => (tau, "reused"),
        _ => {
            let table = cache::build(a.n_max)?;
            let tau = table.tau_values().to_vec();
            cache::write(&path, &tau)?;
            (tau, "built")
        }
    };
    emit(
        out,
        &format!("{}: {} coefficients, sha256 {} ({status})", path.display(), tau.len(), cache::checksum(&tau)),
    )?;
    if a.dump {
        for (i, t) in tau.iter().take(a.n_max).enumerate() {
            emit(out, &format!("{} {t}", i + 1))?;
        }
    }
    Ok(())
}

const MEAN_SQUARE_KEYS: &[&str] = &[
    "M", "delta-exp", "k", "h", "eps", "ramp", "big-delta", "tol", "constant", "format", "jobs", "timing", "cache-dir",
];

fn cmd_mean_square(a: &MeanSquareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load(a.config.as_deref(), MEAN_SQUARE_KEYS)?;
    let m = require(pick(a.m, file.f64("M")?), "M")?;
    let delta_exp = require(pick(a.delta_exp, file.f64("delta-exp")?), "delta-exp")?;
    let k = require(pick(a.k, file.u64("k")?), "k")?;
    let h = require(pick(a.h, file.u64("h")?), "h")?;
    let format = pick(a.format, parse_format(file.string("format")?)?).unwrap_or(Format::Csv);
    let jobs = pick(a.jobs, file.u64("jobs")?.map(|j| j as usize)).unwrap_or_else(default_jobs);
    let timing = a.timing || file.bool("timing")?.unwrap_or(false);
    let cache_dir = pick(a.cache_dir.clone(), file.string("cache-dir")?.map(PathBuf::from));

    let twist = RationalTwist::new(h, k).map_err(CliError::from_core)?;
    let mut b = ExperimentConfig::builder(m, delta_exp, twist);
    if let Some(v) = pick(a.eps, file.f64("eps")?) {
        b = b.eps(v);
    }
    if let Some(v) = pick(a.ramp, file.f64("ramp")?) {
        b = b.ramp_fraction(v);
    }
    if let Some(v) = pick(a.big_delta, file.f64("big-delta")?) {
        b = b.delta(v);
    }
    if let Some(v) = pick(a.tol, file.f64("tol")?) {
        b = b.tolerance(v);
    }
    if let Some(v) = pick(a.constant, file.f64("constant")?) {
        b = b.constant(v);
    }
    let cfg = b.build().map_err(CliError::from_core)?;
    let need = cfg.required_table_len();
    if need > MAX_TABLE_LEN {
        return Err(CliError::Resource(format!("needs {need} coefficients, above the limit {MAX_TABLE_LEN}")));
    }
    let pool = runner::pool(jobs)?;
    let loaded = TableSource::from_env(cache_dir).table(need)?;
    let report = runner::run(&loaded.table, &cfg, Some(&pool))?;
    let mut record = report_record(&report, loaded.table.n_max(), &loaded.checksum);
    if timing {
        if let Some(t) = report.runtime {
            record.set("runtime_seconds", Value::Num(t.as_secs_f64()));
        }
    }
    if format == Format::Csv {
        emit(out, &csv_header("mean-square"))?;
    }
    emit(out, &record.line(format))
}

const SWEEP_KEYS: &[&str] = &[
    "M-start", "M-factor", "M-count", "k", "h", "delta-exp", "eps", "ramp", "tol", "constant", "n-max", "jobs",
    "format", "cache-dir",
];

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load(a.config.as_deref(), SWEEP_KEYS)?;
    let plan = SweepPlan {
        m_start: require(pick(a.m_start, file.f64("M-start")?), "M-start")?,
        m_factor: require(pick(a.m_factor, file.f64("M-factor")?), "M-factor")?,
        m_count: require(pick(a.m_count, file.u64("M-count")?.map(|c| c as usize)), "M-count")?,
        ks: require(pick(a.k.clone(), file.u64_list("k")?), "k")?,
        h: pick(a.h, file.u64("h")?).unwrap_or(1),
        delta_exp: require(pick(a.delta_exp, file.f64("delta-exp")?), "delta-exp")?,
        eps: pick(a.eps, file.f64("eps")?),
        ramp: pick(a.ramp, file.f64("ramp")?),
        tol: pick(a.tol, file.f64("tol")?),
        constant: pick(a.constant, file.f64("constant")?),
        n_max: pick(a.n_max, file.u64("n-max")?.map(|n| n as usize)).unwrap_or(MAX_TABLE_LEN),
    };
    let jobs = pick(a.jobs, file.u64("jobs")?.map(|j| j as usize)).unwrap_or_else(default_jobs);
    let format = pick(a.format, parse_format(file.string("format")?)?).unwrap_or(Format::Csv);
    let cache_dir = pick(a.cache_dir.clone(), file.string("cache-dir")?.map(PathBuf::from));

    let result = sweep::run(&plan, &TableSource::from_env(cache_dir), jobs)?;
    if format == Format::Csv {
        emit(out, &csv_header("sweep"))?;
    }
    for r in &result.records {
        emit(out, &r.line(format))?;
    }
    if result.failed > 0 {
        return Err(CliError::PartialSweep { failed: result.failed, total: result.rows });
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut opts = VerifyOptions::default();
    if let Some(m) = &a.m {
        opts.voronoi_m = m.clone();
    }
    if let Some(k) = &a.k {
        opts.voronoi_k = k.clone();
    }
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    if let Some(n) = a.n_max {
        if n == 0 || n > MAX_TABLE_LEN {
            return Err(CliError::Usage(format!("--n-max must lie in 1..={MAX_TABLE_LEN}")));
        }
        opts.tau_n_max = n;
    }
    let source = TableSource::from_env(a.cache_dir.clone());
    let mut suites = a.suite.clone();
    suites.dedup();
    let (mut total, mut failed) = (0, 0);
    for suite in suites {
        for c in verify::run_suite(suite, &opts, &source)? {
            total += 1;
            failed += usize::from(!c.passed);
            emit(out, &c.to_string())?;
        }
    }
    emit(out, &format!("{} of {total} checks passed", total - failed))?;
    if failed > 0 {
        return Err(CliError::VerifyFailed { failed });
    }
    Ok(())
}
