use std::io::Write;

use serde::Serialize;

use super::CheckReport;
use crate::error::{Error, Result};
use crate::quadrature::Exponent;
use crate::spectrum::WeightConfig;

/// Column order of the CSV report.
pub const CSV_HEADER: [&str; 13] = [
    "check_id",
    "d",
    "alphas",
    "rho",
    "p",
    "n",
    "ell_or_tau",
    "f_id",
    "lhs",
    "rhs",
    "margin",
    "empirical_constant",
    "passed",
];

/// One evaluated cell; inapplicable fields stay `None` and print empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub check_id: String,
    pub d: usize,
    pub alphas: String,
    pub rho: f64,
    pub p: Option<Exponent>,
    pub n: Option<usize>,
    pub ell_or_tau: Option<f64>,
    pub f_id: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub empirical_constant: Option<f64>,
    pub passed: bool,
}

impl ReportRow {
    pub fn new(check_id: &str, cfg: &WeightConfig, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            check_id: check_id.to_string(),
            d: cfg.dim(),
            alphas: cfg.alpha_label(),
            rho: cfg.rho(),
            p: None,
            n: None,
            ell_or_tau: None,
            f_id: None,
            lhs,
            rhs,
            margin,
            empirical_constant: None,
            passed: false,
        }
    }

    pub fn p(mut self, p: Exponent) -> Self {
        self.p = Some(p);
        self
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn at(mut self, ell_or_tau: f64) -> Self {
        self.ell_or_tau = Some(ell_or_tau);
        self
    }

    pub fn f_id(mut self, id: &str) -> Self {
        self.f_id = Some(id.to_string());
        self
    }

    pub fn constant(mut self, c: f64) -> Self {
        self.empirical_constant = Some(c);
        self
    }

    fn record(&self) -> [String; 13] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.check_id.clone(),
            self.d.to_string(),
            self.alphas.clone(),
            self.rho.to_string(),
            self.p.map(|p| p.to_string()).unwrap_or_default(),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            opt(self.ell_or_tau),
            self.f_id.clone().unwrap_or_default(),
            self.lhs.to_string(),
            self.rhs.to_string(),
            self.margin.to_string(),
            opt(self.empirical_constant),
            self.passed.to_string(),
        ]
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Usage(format!("report output failed: {e}"))
}

/// All rows of `reports`, in order, as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for row in reports.iter().flat_map(|r| &r.rows) {
        w.write_record(row.record()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reports with their rows as pretty JSON.
pub fn write_json<W: Write>(reports: &[CheckReport], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, reports).map_err(io_err)?;
    writeln!(out).map_err(io_err)
}
