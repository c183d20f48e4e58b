//! Verification harness: every identity, bound and inequality is turned into
//! rows of `(lhs, rhs, margin)` and aggregated into [`CheckReport`]s.
//!
//! Margins are normalized, `(rhs - lhs) / max(|lhs|, |rhs|, scale)`, so a
//! margin of `-1e-9` means a relative violation of one part in a billion.
//! Identities report `-residual`.

mod converse;
mod lemmas;
mod opnorm;
mod report;
mod suite;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use converse::{
    kfunc_rows, verify_converse_suite, verify_direct, verify_direct_suite, verify_proposition,
    verify_proposition_suite, verify_theorem1,
};
pub use lemmas::{check_lemma, LemmaId, LemmaGrid};
pub use opnorm::{
    adversary_suite, estimate_operator_norm, norm_monotonicity_report, operator_norm_report,
    OperatorKind,
};
pub use report::{write_csv, write_json, ReportRow, CSV_HEADER};
pub use suite::{build_suite, SuiteFunction, SuiteSelector, KINK_BAND, RANDOM_DEGREE};

use crate::error::{Error, Result};
use crate::quadrature::Exponent;
use crate::spectrum::WeightConfig;

/// Tolerances by check class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Algebraic identities (relative residual).
    pub identity: f64,
    /// Inequalities whose sides go through quadrature.
    pub quadrature: f64,
    /// Identities involving a numerical integral.
    pub integral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            quadrature: 1e-9,
            integral: 1e-6,
        }
    }
}

/// How a check decides pass/fail from its worst margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// `margin > 0`.
    Strict,
    /// `margin >= -tol`.
    Within(f64),
}

impl Verdict {
    pub fn accepts(self, margin: f64) -> bool {
        match self {
            Verdict::Strict => margin > 0.0,
            Verdict::Within(tol) => margin >= -tol,
        }
    }
}

/// Outcome of one check over its grid.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub grid: String,
    pub worst_margin: f64,
    pub empirical_constant: Option<f64>,
    pub passed: bool,
    /// Informational checks never fail a run.
    pub asserted: bool,
    /// Wall time; left out of the written reports so they stay reproducible.
    #[serde(skip)]
    pub runtime_ms: u64,
    pub rows: Vec<ReportRow>,
}

impl CheckReport {
    /// Aggregate rows; the verdict is applied to every row and to the minimum.
    pub fn from_rows(
        check_id: &str,
        grid: String,
        verdict: Verdict,
        mut rows: Vec<ReportRow>,
        started: Instant,
    ) -> Self {
        for r in &mut rows {
            r.passed = verdict.accepts(r.margin);
        }
        let worst_margin = rows
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, |a, b| if b.is_nan() || b < a { b } else { a });
        let empirical_constant = rows
            .iter()
            .filter_map(|r| r.empirical_constant)
            .reduce(f64::max);
        Self {
            check_id: check_id.to_string(),
            grid,
            worst_margin,
            empirical_constant,
            passed: rows.iter().all(|r| r.passed),
            asserted: true,
            runtime_ms: started.elapsed().as_millis() as u64,
            rows,
        }
    }

    pub fn informational(mut self) -> Self {
        self.asserted = false;
        self
    }

    /// Rows that did not pass.
    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.passed)
    }
}

/// `(rhs - lhs) / max(|lhs|, |rhs|, scale)`.
pub fn normalized_margin(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let denom = lhs.abs().max(rhs.abs()).max(scale);
    if denom == 0.0 {
        0.0
    } else {
        (rhs - lhs) / denom
    }
}

/// Range of `n` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub start: usize,
    pub stop: usize,
    /// Doubling ladder instead of unit steps.
    pub dyadic: bool,
}

impl NRange {
    pub fn dyadic(start: usize, stop: usize) -> Self {
        Self {
            start,
            stop,
            dyadic: true,
        }
    }

    pub fn linear(start: usize, stop: usize) -> Self {
        Self {
            start,
            stop,
            dyadic: false,
        }
    }

    pub fn values(&self) -> Result<Vec<usize>> {
        if self.start == 0 || self.start > self.stop {
            return Err(Error::Usage(format!(
                "invalid n range {}..{}",
                self.start, self.stop
            )));
        }
        let mut out = Vec::new();
        let mut n = self.start;
        while n <= self.stop {
            out.push(n);
            n = if self.dyadic { n * 2 } else { n + 1 };
        }
        Ok(out)
    }
}

/// Knobs shared by every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessOptions {
    pub tol: Tolerances,
    pub seed: u64,
    /// Range parameters of the L6 bounds: `delta n <= l` and `tau <= sqrt(b n)`.
    pub delta: f64,
    pub b: f64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            seed: 20_240_917,
            delta: 0.25,
            b: 4.0,
        }
    }
}

/// A weight together with the exponents it is checked at.
#[derive(Debug, Clone, PartialEq)]
pub struct SuitePlan {
    pub cfg: WeightConfig,
    pub ps: Vec<Exponent>,
}

/// Weights and exponents of the published function-suite runs.
pub fn default_plans() -> Vec<SuitePlan> {
    let all = vec![Exponent::ONE, Exponent::TWO, Exponent::Infinity];
    vec![
        SuitePlan {
            cfg: WeightConfig::unweighted(1),
            ps: all.clone(),
        },
        SuitePlan {
            cfg: WeightConfig::interval(1.5, 0.5).expect("valid weight"),
            ps: all,
        },
        SuitePlan {
            cfg: WeightConfig::unweighted(2),
            ps: vec![Exponent::TWO],
        },
    ]
}

/// Every check with its published defaults, sorted by `check_id`.
pub fn report_all(opts: &HarnessOptions) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for id in LemmaId::ALL {
        reports.push(check_lemma(id, &LemmaGrid::defaults(id), opts)?);
    }
    let direct_n = NRange::dyadic(4, 64).values()?;
    for plan in default_plans() {
        let suite = build_suite(&plan.cfg, SuiteSelector::Full, opts.seed)?;
        reports.push(verify_direct_suite(&suite, &plan.ps, &direct_n, opts)?);
        reports.extend(verify_converse_suite(&suite, &plan.ps, &direct_n, opts)?);
        reports.extend(kfunc_rows(&suite, &[Exponent::TWO], &direct_n, opts)?);
    }
    let unweighted = WeightConfig::unweighted(1);
    let suite = build_suite(&unweighted, SuiteSelector::Full, opts.seed)?;
    let prop_n = NRange::dyadic(4, 128).values()?;
    reports.extend(verify_proposition_suite(&suite, &[Exponent::TWO], &prop_n, opts)?);
    let op_n = NRange::dyadic(4, 64).values()?;
    for kind in [OperatorKind::PartialSum, OperatorKind::Cesaro] {
        for p in [Exponent::TWO, Exponent::finite(3.0)?] {
            reports.push(operator_norm_report(kind, &unweighted, p, &op_n, opts)?);
        }
    }
    Ok(merge_and_sort(reports))
}

/// Merge reports sharing a `check_id` and sort by it.
pub fn merge_and_sort(reports: Vec<CheckReport>) -> Vec<CheckReport> {
    let mut merged: Vec<CheckReport> = Vec::new();
    for r in reports {
        if let Some(m) = merged
            .iter_mut()
            .find(|m| m.check_id == r.check_id && m.asserted == r.asserted)
        {
            m.grid = format!("{}; {}", m.grid, r.grid);
            m.worst_margin = m.worst_margin.min(r.worst_margin);
            m.empirical_constant = match (m.empirical_constant, r.empirical_constant) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            m.passed &= r.passed;
            m.runtime_ms += r.runtime_ms;
            m.rows.extend(r.rows);
        } else {
            merged.push(r);
        }
    }
    merged.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    merged
}

/// True when every asserted check passed.
pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().filter(|r| r.asserted).all(|r| r.passed)
}
