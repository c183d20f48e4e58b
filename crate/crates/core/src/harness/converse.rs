use std::time::Instant;

use rayon::prelude::*;

use super::opnorm::{estimate_operator_norm, OperatorKind};
use super::{normalized_margin, CheckReport, HarnessOptions, ReportRow, SuiteFunction, Verdict};
use crate::error::{Error, Result};
use crate::function::ProjectedFunction;
use crate::kfunc::{k_exact_p2, k_lower, k_upper};
use crate::operator::apply_durrmeyer_spectral;
use crate::quadrature::Exponent;
use crate::spectrum::WeightConfig;
use crate::sum::NeumaierSum;

/// `K(f, t)_p`: exact over the band at `p = 2`, the candidate upper bound otherwise.
fn k_value(f: &ProjectedFunction, t: f64, p: Exponent) -> Result<f64> {
    if p.is_two() {
        k_exact_p2(f.coeffs(), t)
    } else {
        k_upper(f, t, p)
    }
}

/// `||M_k f - f||_p`.
fn approx_error(f: &ProjectedFunction, k: usize, p: Exponent) -> Result<f64> {
    let m = apply_durrmeyer_spectral(f.coeffs().cfg(), k, f.coeffs())?;
    f.distance(&m, p)
}

fn cells<'a>(
    suite: &'a [SuiteFunction],
    ps: &'a [Exponent],
    ns: &'a [usize],
) -> Vec<(&'a SuiteFunction, Exponent, usize)> {
    let mut out = Vec::new();
    for sf in suite {
        for &p in ps {
            for &n in ns {
                out.push((sf, p, n));
            }
        }
    }
    out
}

fn grid_desc(suite: &[SuiteFunction], ps: &[Exponent], ns: &[usize]) -> String {
    let cfg = suite.first().map(|s| s.f.coeffs().cfg().clone());
    let ps: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
    format!(
        "alpha = {}; {} functions; p in {{{}}}; n in {:?}",
        cfg.map(|c| c.alpha_label()).unwrap_or_default(),
        suite.len(),
        ps.join(","),
        ns
    )
}

fn check_inputs(suite: &[SuiteFunction], ns: &[usize]) -> Result<()> {
    if suite.is_empty() || ns.is_empty() {
        return Err(Error::Usage("empty function suite or n range".into()));
    }
    if ns.contains(&0) {
        return Err(Error::Usage("n must be positive".into()));
    }
    Ok(())
}

fn direct_row(sf: &SuiteFunction, p: Exponent, n: usize) -> Result<ReportRow> {
    let cfg = sf.f.coeffs().cfg();
    let lhs = approx_error(&sf.f, n, p)?;
    let k = k_value(&sf.f, 1.0 / n as f64, p)?;
    let scale = sf.f.norm(p)?;
    let row = ReportRow::new("DIRECT", cfg, lhs, 2.0 * k, normalized_margin(lhs, 2.0 * k, scale))
        .p(p)
        .n(n)
        .f_id(&sf.id);
    Ok(if k > 0.0 { row.constant(lhs / k) } else { row })
}

/// Direct estimate `||M_n f - f||_p <= 2 K(f, 1/n)_p` for one function.
pub fn verify_direct(
    sf: &SuiteFunction,
    p: Exponent,
    n: usize,
    opts: &HarnessOptions,
) -> Result<CheckReport> {
    let started = Instant::now();
    let row = direct_row(sf, p, n)?;
    let grid = format!("{}; p = {p}; n = {n}", sf.id);
    Ok(CheckReport::from_rows("DIRECT", grid, Verdict::Within(opts.tol.quadrature), vec![row], started))
}

/// Direct estimate over a suite.
pub fn verify_direct_suite(
    suite: &[SuiteFunction],
    ps: &[Exponent],
    ns: &[usize],
    opts: &HarnessOptions,
) -> Result<CheckReport> {
    check_inputs(suite, ns)?;
    let started = Instant::now();
    let rows = cells(suite, ps, ns)
        .par_iter()
        .map(|&(sf, p, n)| direct_row(sf, p, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::from_rows(
        "DIRECT",
        grid_desc(suite, ps, ns),
        Verdict::Within(opts.tol.quadrature),
        rows,
        started,
    ))
}

/// Rows for the theorem (always) and the remark (when `n >= |rho|`).
fn theorem1_rows(sf: &SuiteFunction, p: Exponent, n: usize) -> Result<Vec<ReportRow>> {
    let cfg = sf.f.coeffs().cfg();
    let nf = n as f64;
    let rho = cfg.rho();
    let errs: Vec<f64> = (n..=2 * n)
        .map(|k| approx_error(&sf.f, k, p))
        .collect::<Result<_>>()?;
    let ends = errs[0] + errs[n];
    let tail: NeumaierSum = errs[1..].iter().copied().collect();
    let avg = 4.0 / nf * tail.value();
    let k = k_value(&sf.f, 1.0 / nf, p)?;
    let scale = sf.f.norm(p)?;
    let row = |id: &str, rhs: f64| {
        ReportRow::new(id, cfg, k, rhs, normalized_margin(k, rhs, scale))
            .p(p)
            .n(n)
            .f_id(&sf.id)
    };
    let mut rows = vec![row("THM1", (4.0 + 2.0 * rho / nf) * ends + avg)];
    if nf >= rho.abs() {
        rows.push(row("REMARK", 6.0 * ends + avg));
    }
    Ok(rows)
}

/// The converse inequality with constant `4 + 2 rho / n` (and 6 when
/// `n >= |rho|`) for one function; `K` is exact only at `p = 2`.
pub fn verify_theorem1(
    sf: &SuiteFunction,
    p: Exponent,
    n: usize,
    opts: &HarnessOptions,
) -> Result<Vec<CheckReport>> {
    let started = Instant::now();
    let rows = theorem1_rows(sf, p, n)?;
    Ok(split_by_id(rows, format!("{}; p = {p}; n = {n}", sf.id), opts, started))
}

fn split_by_id(rows: Vec<ReportRow>, grid: String, opts: &HarnessOptions, started: Instant) -> Vec<CheckReport> {
    let mut ids: Vec<String> = rows.iter().map(|r| r.check_id.clone()).collect();
    ids.dedup();
    ids.sort();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let mine = rows.iter().filter(|r| r.check_id == id).cloned().collect();
            CheckReport::from_rows(&id, grid.clone(), Verdict::Within(opts.tol.quadrature), mine, started)
        })
        .collect()
}

/// Theorem and remark over a suite.
pub fn verify_converse_suite(
    suite: &[SuiteFunction],
    ps: &[Exponent],
    ns: &[usize],
    opts: &HarnessOptions,
) -> Result<Vec<CheckReport>> {
    check_inputs(suite, ns)?;
    let started = Instant::now();
    let rows: Vec<ReportRow> = cells(suite, ps, ns)
        .par_iter()
        .map(|&(sf, p, n)| theorem1_rows(sf, p, n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(split_by_id(rows, grid_desc(suite, ps, ns), opts, started))
}

fn require_pollard_setting(cfg: &WeightConfig, p: Exponent) -> Result<()> {
    if *cfg != WeightConfig::unweighted(1) {
        return Err(Error::Domain(
            "the proposition is stated for d = 1 without weight".into(),
        ));
    }
    match p {
        Exponent::Finite(v) if v > 4.0 / 3.0 && v < 4.0 => Ok(()),
        _ => Err(Error::Domain(format!("the proposition needs 4/3 < p < 4, got p = {p}"))),
    }
}

/// `K(f, 1/n)_p <= (1 + 2 sigma) ||M_n f - f||_p`. At `p = 2`, `sigma = 1`
/// and the row is asserted; otherwise `sigma` is the empirical partial-sum
/// norm and the row is informational. Returns `None` when `M_n f = f` up to
/// rounding (the ratio is 0/0).
pub fn verify_proposition(
    sf: &SuiteFunction,
    p: Exponent,
    n: usize,
    sigma: f64,
) -> Result<Option<ReportRow>> {
    let cfg = sf.f.coeffs().cfg();
    require_pollard_setting(cfg, p)?;
    let err = approx_error(&sf.f, n, p)?;
    let scale = sf.f.norm(p)?;
    if err <= 1e-12 * scale {
        return Ok(None);
    }
    let k = k_value(&sf.f, 1.0 / n as f64, p)?;
    let bound = 1.0 + 2.0 * sigma;
    let id = if p.is_two() { "PROP" } else { "PROP-EMPIRICAL" };
    Ok(Some(
        ReportRow::new(id, cfg, k, bound * err, normalized_margin(k, bound * err, scale))
            .p(p)
            .n(n)
            .f_id(&sf.id)
            .constant(k / err),
    ))
}

/// Proposition over a suite. At `p != 2` the partial-sum norm is estimated
/// on the same `n` values first.
pub fn verify_proposition_suite(
    suite: &[SuiteFunction],
    ps: &[Exponent],
    ns: &[usize],
    opts: &HarnessOptions,
) -> Result<Vec<CheckReport>> {
    check_inputs(suite, ns)?;
    let started = Instant::now();
    let cfg = suite[0].f.coeffs().cfg().clone();
    let mut sigmas = Vec::new();
    for &p in ps {
        require_pollard_setting(&cfg, p)?;
        let sigma = if p.is_two() {
            1.0
        } else {
            ns.par_iter()
                .map(|&n| estimate_operator_norm(OperatorKind::PartialSum, &cfg, p, n, opts.seed))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(1.0, f64::max)
        };
        sigmas.push((p, sigma));
    }
    let sigma_of = |p: Exponent| sigmas.iter().find(|(q, _)| *q == p).map_or(1.0, |s| s.1);
    let rows: Vec<ReportRow> = cells(suite, ps, ns)
        .par_iter()
        .map(|&(sf, p, n)| verify_proposition(sf, p, n, sigma_of(p)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let grid = grid_desc(suite, ps, ns);
    let verdict = Verdict::Within(opts.tol.quadrature);
    let (asserted, empirical): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.check_id == "PROP");
    let mut out = Vec::new();
    if !asserted.is_empty() {
        out.push(CheckReport::from_rows("PROP", grid.clone(), verdict, asserted, started));
    }
    if !empirical.is_empty() {
        out.push(CheckReport::from_rows("PROP-EMPIRICAL", grid, verdict, empirical, started).informational());
    }
    Ok(out)
}

fn kfunc_cell(sf: &SuiteFunction, p: Exponent, n: usize) -> Result<Vec<ReportRow>> {
    let cfg = sf.f.coeffs().cfg();
    let t = 1.0 / n as f64;
    let scale = sf.f.norm(p)?;
    let lower = k_lower(&sf.f, n, p)?;
    let upper = k_upper(&sf.f, t, p)?;
    let row = |id: &str, lhs: f64, rhs: f64| {
        ReportRow::new(id, cfg, lhs, rhs, normalized_margin(lhs, rhs, scale))
            .p(p)
            .n(n)
            .f_id(&sf.id)
    };
    if p.is_two() {
        let exact = k_exact_p2(sf.f.coeffs(), t)?;
        Ok(vec![
            row("K-LOWER", lower, exact).constant(exact),
            row("K-UPPER", exact, upper).constant(exact),
        ])
    } else {
        Ok(vec![row("K-BRACKET", lower, upper)])
    }
}

/// K-functional brackets over a suite: `k_lower <= k_exact <= k_upper` at
/// `p = 2`, `k_lower <= k_upper` elsewhere.
pub fn kfunc_rows(
    suite: &[SuiteFunction],
    ps: &[Exponent],
    ns: &[usize],
    opts: &HarnessOptions,
) -> Result<Vec<CheckReport>> {
    check_inputs(suite, ns)?;
    let started = Instant::now();
    let rows: Vec<ReportRow> = cells(suite, ps, ns)
        .par_iter()
        .map(|&(sf, p, n)| kfunc_cell(sf, p, n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(split_by_id(rows, grid_desc(suite, ps, ns), opts, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{build_suite, SuiteSelector};
    use crate::spectrum::eigenvalue_mu;

    #[test]
    fn eigenfunction_cells_match_closed_forms() {
        let cfg = WeightConfig::unweighted(1);
        let suite = build_suite(&cfg, SuiteSelector::Eigen, 1).unwrap();
        let phi3 = suite.iter().find(|s| s.id == "phi3").unwrap();
        let row = direct_row(phi3, Exponent::TWO, 8).unwrap();
        let mu = eigenvalue_mu(&cfg, 8, 3).unwrap();
        assert!((row.lhs - (1.0 - mu)).abs() < 1e-14);
        let lam = 3.0 * (3.0 + cfg.rho());
        assert!((row.rhs - 2.0 * (lam / 8.0f64).min(1.0)).abs() < 1e-8);
        let rows = theorem1_rows(phi3, Exponent::TWO, 8).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.margin >= 0.0));
        let prop = verify_proposition(phi3, Exponent::TWO, 8, 1.0).unwrap().unwrap();
        assert!(prop.margin >= 0.0);
    }

    #[test]
    fn proposition_preconditions() {
        let cfg = WeightConfig::interval(0.5, 0.0).unwrap();
        let suite = build_suite(&cfg, SuiteSelector::Eigen, 1).unwrap();
        assert!(verify_proposition(&suite[0], Exponent::TWO, 4, 1.0).is_err());
        let plain = build_suite(&WeightConfig::unweighted(1), SuiteSelector::Eigen, 1).unwrap();
        assert!(verify_proposition(&plain[0], Exponent::finite(4.0).unwrap(), 4, 1.0).is_err());
        assert!(verify_proposition(&plain[0], Exponent::ONE, 4, 1.0).is_err());
    }

    #[test]
    fn constant_is_skipped_and_trivial() {
        use crate::function::TestFunction;
        use crate::orthopoly::OrthoBasis;
        use std::sync::Arc;
        let cfg = WeightConfig::unweighted(1);
        let basis = Arc::new(OrthoBasis::new(&cfg, 4).unwrap());
        let sf = SuiteFunction {
            id: "const".into(),
            f: ProjectedFunction::new(TestFunction::Constant(2.0), basis).unwrap(),
        };
        assert!(verify_proposition(&sf, Exponent::TWO, 4, 1.0).unwrap().is_none());
        let opts = HarnessOptions::default();
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinity] {
            assert!(verify_direct(&sf, p, 4, &opts).unwrap().passed);
            assert!(verify_theorem1(&sf, p, 4, &opts).unwrap().iter().all(|r| r.passed));
        }
    }
}
