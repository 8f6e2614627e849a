//! Timed single runs, with the main-term sum optionally spread over a thread pool.

use std::time::Instant;

use cuspsum_core::meansquare::{lhs_exact, MainTerm, MeanSquareReport};
use cuspsum_core::{CoefficientTable, ExperimentConfig};
use rayon::prelude::*;

use crate::error::CliError;

/// Thread pool with exactly `jobs` workers.
pub fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Resource(format!("cannot start {jobs} worker threads: {e}")))
}

/// `S` with terms computed in parallel and summed in ascending order, so the
/// value is bit-identical to the sequential sum.
pub fn main_term_parallel(term: &MainTerm<'_>, pool: &rayon::ThreadPool) -> Result<f64, cuspsum_core::Error> {
    let last = term.last_index();
    let terms: Vec<f64> = pool.install(|| (1..=last).into_par_iter().map(|n| term.term(n)).collect::<Result<_, _>>())?;
    Ok(MainTerm::sum_terms(terms))
}

/// Evaluates one configuration and records its wall-clock time.
pub fn run(
    table: &CoefficientTable,
    cfg: &ExperimentConfig,
    pool: Option<&rayon::ThreadPool>,
) -> Result<MeanSquareReport, CliError> {
    let start = Instant::now();
    let lhs = lhs_exact(table, cfg).map_err(CliError::from_core)?;
    let term = MainTerm::new(table, cfg).map_err(CliError::from_core)?;
    let s = match pool {
        Some(p) => main_term_parallel(&term, p),
        None => term.total(),
    }
    .map_err(CliError::from_core)?;
    let mut report = MeanSquareReport::assemble(cfg, lhs, s);
    report.runtime = Some(start.elapsed());
    Ok(report)
}
