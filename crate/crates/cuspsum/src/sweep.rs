//! Geometric `M` ladders crossed with a list of moduli.

use cuspsum_core::cuspforms::MAX_TABLE_LEN;
use cuspsum_core::fit::loglog_slope;
use cuspsum_core::meansquare::MeanSquareReport;
use cuspsum_core::{ExperimentConfig, RationalTwist};
use rayon::prelude::*;

use crate::cache::TableSource;
use crate::error::CliError;
use crate::output::{report_record, Record, Value};
use crate::runner;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub m_start: f64,
    pub m_factor: f64,
    pub m_count: usize,
    pub ks: Vec<u64>,
    pub h: u64,
    pub delta_exp: f64,
    pub eps: Option<f64>,
    pub ramp: Option<f64>,
    pub tol: Option<f64>,
    pub constant: Option<f64>,
    /// Rows needing more coefficients than this fail individually.
    pub n_max: usize,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.ks.is_empty() {
            return Err(CliError::Usage("the k list is empty".into()));
        }
        if self.ks.contains(&0) {
            return Err(CliError::Usage("k must be positive".into()));
        }
        if !(self.m_start >= 1.0 && self.m_start.is_finite()) {
            return Err(CliError::Usage("--M-start must be at least 1".into()));
        }
        if !(self.m_factor > 0.0 && self.m_factor.is_finite()) {
            return Err(CliError::Usage("--M-factor must be positive".into()));
        }
        if self.m_count == 0 {
            return Err(CliError::Usage("--M-count must be at least 1".into()));
        }
        if self.n_max == 0 || self.n_max > MAX_TABLE_LEN {
            return Err(CliError::Usage(format!("--n-max must lie in 1..={MAX_TABLE_LEN}")));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Vec<f64> {
        (0..self.m_count).map(|i| self.m_start * self.m_factor.powi(i as i32)).collect()
    }

    /// `(M, k)` pairs in output order with their configurations.
    pub fn configs(&self) -> Vec<(f64, u64, Result<ExperimentConfig, String>)> {
        let mut ks = self.ks.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut ladder = self.ladder();
        ladder.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for &m in &ladder {
            for &k in &ks {
                out.push((m, k, self.config(m, k)));
            }
        }
        out
    }

    fn config(&self, m: f64, k: u64) -> Result<ExperimentConfig, String> {
        let twist = RationalTwist::new(self.h, k).map_err(|e| e.to_string())?;
        let mut b = ExperimentConfig::builder(m, self.delta_exp, twist);
        if let Some(v) = self.eps {
            b = b.eps(v);
        }
        if let Some(v) = self.ramp {
            b = b.ramp_fraction(v);
        }
        if let Some(v) = self.tol {
            b = b.tolerance(v);
        }
        if let Some(v) = self.constant {
            b = b.constant(v);
        }
        let cfg = b.build().map_err(|e| e.to_string())?;
        let need = cfg.required_table_len();
        if need > self.n_max {
            return Err(format!("needs coefficients up to n = {need}, above the table limit {}", self.n_max));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    /// Row records in `(M, k)` order followed by slope records.
    pub records: Vec<Record>,
    pub rows: usize,
    pub failed: usize,
}

pub fn run(plan: &SweepPlan, source: &TableSource, jobs: usize) -> Result<SweepOutput, CliError> {
    plan.validate()?;
    let configs = plan.configs();
    let need = configs.iter().filter_map(|(_, _, c)| c.as_ref().ok()).map(|c| c.required_table_len()).max();
    let loaded = need.map(|n| source.table(n)).transpose()?;
    let pool = runner::pool(jobs)?;
    let outcomes: Vec<Result<MeanSquareReport, String>> = pool.install(|| {
        configs
            .par_iter()
            .map(|(_, _, cfg)| {
                let cfg = cfg.as_ref().map_err(Clone::clone)?;
                let t = loaded.as_ref().expect("table loaded for every valid row");
                runner::run(&t.table, cfg, None).map_err(|e| e.to_string())
            })
            .collect()
    });
    let mut records = Vec::with_capacity(configs.len());
    let mut done = Vec::new();
    let mut failed = 0;
    for ((m, k, _), outcome) in configs.iter().zip(outcomes) {
        match outcome {
            Ok(report) => {
                let t = loaded.as_ref().unwrap();
                records.push(report_record(&report, t.table.n_max(), &t.checksum));
                done.push(report);
            }
            Err(msg) => {
                failed += 1;
                let mut r = Record::new("run");
                r.set("M", Value::Num(*m))
                    .set("delta_exp", Value::Num(plan.delta_exp))
                    .set("h", Value::Int(plan.h))
                    .set("k", Value::Int(*k))
                    .set("error", Value::Str(msg));
                records.push(r);
            }
        }
    }
    records.extend(slope_records(&done));
    Ok(SweepOutput { records, rows: configs.len(), failed })
}

type Quantity = (&'static str, fn(&MeanSquareReport) -> f64);

const SLOPE_QUANTITIES: [Quantity; 5] = [
    ("lhs", |r| r.lhs),
    ("S", |r| r.main_term_s),
    ("discrepancy", |r| r.discrepancy()),
    ("budget_total", |r| r.error_budget.total),
    ("lhs_over_delta_root_M", |r| r.lhs / (r.config.delta * r.config.m.sqrt())),
];

/// Log-log slopes against `M`, one record per `k` and quantity with at
/// least two positive points.
pub fn slope_records(reports: &[MeanSquareReport]) -> Vec<Record> {
    let mut ks: Vec<u64> = reports.iter().map(|r| r.config.k()).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut out = Vec::new();
    for k in ks {
        let rows: Vec<&MeanSquareReport> = reports.iter().filter(|r| r.config.k() == k).collect();
        for (name, f) in SLOPE_QUANTITIES {
            let (ms, vs): (Vec<f64>, Vec<f64>) =
                rows.iter().map(|r| (r.config.m, f(r))).filter(|&(_, v)| v > 0.0 && v.is_finite()).unzip();
            if ms.len() < 2 {
                continue;
            }
            if let Some(slope) = loglog_slope(&ms, &vs) {
                let mut r = Record::new("slope");
                r.set("delta_exp", Value::Num(rows[0].config.delta_exp))
                    .set("h", Value::Int(rows[0].config.h()))
                    .set("k", Value::Int(k))
                    .set("quantity", Value::Str(name.to_string()))
                    .set("slope", Value::Num(slope))
                    .set("points", Value::Int(ms.len() as u64));
                out.push(r);
            }
        }
    }
    out
}
