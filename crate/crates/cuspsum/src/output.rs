//! CSV and JSON records. Every float is written with 17 significant digits.

use std::fmt::Write as _;

use cuspsum_core::meansquare::{MeanSquareReport, Regime, Warning};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of every CSV table. Consumers must tolerate appended columns.
pub const COLUMNS: &[&str] = &[
    "kind",
    "M",
    "delta_exp",
    "T",
    "h",
    "k",
    "eps",
    "Delta",
    "ramp",
    "tol",
    "constant",
    "lhs",
    "S",
    "ratio",
    "discrepancy",
    "split_point",
    "budget_off_diagonal",
    "budget_window",
    "budget_cross",
    "budget_total",
    "regime",
    "boundary_with",
    "bound_small_modulus",
    "bound_intermediate",
    "bound_large_modulus",
    "bound_combined",
    "breakpoints",
    "warnings",
    "table_n_max",
    "table_sha256",
    "quantity",
    "slope",
    "points",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Str(String),
    Null,
}

impl Value {
    fn opt(v: Option<f64>) -> Value {
        v.map_or(Value::Null, Value::Num)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One output record: named fields in [`COLUMNS`] order, plus JSON-only extras.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        let mut r = Record::default();
        r.set("kind", Value::Str(kind.to_string()));
        r
    }

    pub fn set(&mut self, name: &'static str, v: Value) -> &mut Self {
        match self.fields.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = v,
            None => self.fields.push((name, v)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn csv_line(&self) -> String {
        let cells: Vec<String> = COLUMNS.iter().map(|c| self.get(c).map_or(String::new(), csv_cell)).collect();
        cells.join(",")
    }

    /// A single-line JSON object: the CSV columns in order, then extras.
    pub fn json_line(&self) -> String {
        let mut out = String::from("{");
        let mut first = true;
        let mut push = |name: &str, v: &Value| {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}:{}", serde_json::Value::from(name), json_cell(v));
        };
        for c in COLUMNS {
            push(c, self.get(c).unwrap_or(&Value::Null));
        }
        for (n, v) in self.fields.iter().filter(|(n, _)| !COLUMNS.contains(n)) {
            push(n, v);
        }
        out.push('}');
        out
    }

    pub fn line(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv_line(),
            Format::Json => self.json_line(),
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Num(x) if x.is_finite() => format_float(*x),
        Value::Num(_) | Value::Null => String::new(),
        Value::Int(i) => i.to_string(),
        Value::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::Str(s) => s.clone(),
    }
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::Num(x) if x.is_finite() => format_float(*x),
        Value::Num(_) | Value::Null => "null".to_string(),
        Value::Int(i) => i.to_string(),
        Value::Str(s) => serde_json::Value::from(s.as_str()).to_string(),
    }
}

/// The `#` schema line followed by the column names.
pub fn csv_header(table: &str) -> String {
    format!(
        "# cuspsum {table} schema v{SCHEMA_VERSION} (cuspsum {ARTIFACT_VERSION}); M, T, Delta, split_point in units of x; \
         lhs, S, budget and bound columns in units of |a(n)|^2 x; slope rows hold log-log slopes against M; \
         columns may be appended in later versions\n{}",
        COLUMNS.join(",")
    )
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::SmallModulus => "small-modulus",
        Regime::Intermediate => "intermediate",
        Regime::LargeModulus => "large-modulus",
    }
}

fn warning_name(w: Warning) -> &'static str {
    match w {
        Warning::LargeModulus => "k-above-M^0.4",
    }
}

/// Config echo plus every report field.
pub fn report_record(report: &MeanSquareReport, table_n_max: usize, checksum: &str) -> Record {
    let c = &report.config;
    let mut r = Record::new("run");
    r.set("M", Value::Num(c.m))
        .set("delta_exp", Value::Num(c.delta_exp))
        .set("T", Value::Num(c.t))
        .set("h", Value::Int(c.h()))
        .set("k", Value::Int(c.k()))
        .set("eps", Value::Num(c.eps))
        .set("Delta", Value::Num(c.delta))
        .set("ramp", Value::Num(c.ramp_fraction))
        .set("tol", Value::Num(c.tolerance))
        .set("constant", Value::Num(c.constant))
        .set("lhs", Value::Num(report.lhs))
        .set("S", Value::Num(report.main_term_s))
        .set("ratio", Value::opt(report.ratio))
        .set("discrepancy", Value::Num(report.discrepancy()))
        .set("split_point", Value::Num(report.split_point))
        .set("budget_off_diagonal", Value::Num(report.error_budget.off_diagonal))
        .set("budget_window", Value::Num(report.error_budget.window))
        .set("budget_cross", Value::Num(report.error_budget.cross))
        .set("budget_total", Value::Num(report.error_budget.total))
        .set("regime", Value::Str(regime_name(report.corollary.regime).to_string()))
        .set(
            "boundary_with",
            report.corollary.boundary_with.map_or(Value::Null, |b| Value::Str(regime_name(b).to_string())),
        )
        .set("bound_small_modulus", Value::Num(report.corollary.delta_root_m))
        .set("bound_intermediate", Value::Num(report.corollary.delta_t))
        .set("bound_large_modulus", Value::Num(report.corollary.delta_k2))
        .set("bound_combined", Value::Num(report.corollary.combined))
        .set("breakpoints", Value::Int(report.breakpoint_count as u64))
        .set(
            "warnings",
            Value::Str(report.warnings.iter().map(|w| warning_name(*w)).collect::<Vec<_>>().join(";")),
        )
        .set("table_n_max", Value::Int(table_n_max as u64))
        .set("table_sha256", Value::Str(checksum.to_string()));
    r.set("schema_version", Value::Int(SCHEMA_VERSION as u64))
        .set("artifact_version", Value::Str(ARTIFACT_VERSION.to_string()));
    r
}
