use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{normalized_margin, CheckReport, HarnessOptions, ReportRow, SuiteFunction, Verdict};
use crate::error::{Error, Result};
use crate::function::{expansion_norm, TestFunction};
use crate::orthopoly::{cesaro_mean, partial_sum, OrthoBasis, SpectralCoefficients};
use crate::quadrature::Exponent;
use crate::spectrum::WeightConfig;

/// Operators whose norms are estimated empirically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `S_n`, partial sums of the orthogonal expansion.
    PartialSum,
    /// First-order Cesàro means.
    Cesaro,
}

impl OperatorKind {
    pub fn check_id(self) -> &'static str {
        match self {
            OperatorKind::PartialSum => "SIGMA",
            OperatorKind::Cesaro => "KAPPA",
        }
    }

    fn apply(self, c: &SpectralCoefficients, n: usize) -> Result<SpectralCoefficients> {
        match self {
            OperatorKind::PartialSum => partial_sum(c, n),
            OperatorKind::Cesaro => cesaro_mean(c, n),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::PartialSum => "partial_sum",
            OperatorKind::Cesaro => "cesaro",
        })
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "partial_sum" => Ok(OperatorKind::PartialSum),
            "cesaro" => Ok(OperatorKind::Cesaro),
            other => Err(Error::Usage(format!("unknown operator {other:?}"))),
        }
    }
}

/// Roots of `x -> sum_{l <= n} phi_l(x0) phi_l(x)` in `(0, 1)`, found on a
/// grid clustered at the endpoints and refined by bisection.
fn kernel_roots(basis: &OrthoBasis, x0: f64, n: usize) -> Result<Vec<f64>> {
    let at = basis.eval_all(&[x0], n);
    let kernel = |x: f64| {
        let v = basis.eval_all(&[x], n);
        at.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
    };
    const CELLS: usize = 4096;
    let grid = |i: usize| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / CELLS as f64).cos());
    let mut roots = Vec::new();
    let (mut a, mut fa) = (grid(0), kernel(grid(0)));
    for i in 1..=CELLS {
        let b = grid(i);
        let fb = kernel(b);
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = kernel(mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Ok(roots)
}

/// Fejér-smoothed projection of `sign K_n(x0, .)`, the function that
/// maximizes `|S_n f(x0)|` among `|f| <= 1`.
fn kernel_sign(basis: &OrthoBasis, x0: f64, n: usize) -> Result<SpectralCoefficients> {
    let roots = kernel_roots(basis, x0, n)?;
    let at = basis.eval_all(&[x0], n);
    let sign = |x: &[f64]| {
        let v = basis.eval_all(x, n);
        if at.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    };
    let c = basis.project_piecewise(sign, &roots, 0)?;
    let clean = SpectralCoefficients::new(basis.cfg().clone(), c.blocks().to_vec())?;
    cesaro_mean(&clean, basis.max_degree())
}

/// Adversarial inputs of degree `band`: sign patterns, endpoint bumps
/// `x^band` and `(1 - x)^band`, and seeded random coefficient vectors. On the
/// interval the smoothed sign of the order-`n` kernel at a few points is added.
pub fn adversary_suite(
    basis: &OrthoBasis,
    n: usize,
    seed: u64,
) -> Result<Vec<(String, SpectralCoefficients)>> {
    let cfg = basis.cfg();
    let band = basis.max_degree();
    let size = |l: usize| if cfg.dim() == 1 { 1 } else { l + 1 };
    let pattern = |sign: &dyn Fn(usize) -> f64| {
        let blocks = (0..=band).map(|l| vec![sign(l); size(l)]).collect();
        SpectralCoefficients::new(cfg.clone(), blocks)
    };
    let mut out = vec![
        ("ones".to_string(), pattern(&|_| 1.0)?),
        ("alternating".to_string(), pattern(&|l| if l % 2 == 0 { 1.0 } else { -1.0 })?),
        ("pairs".to_string(), pattern(&|l| if l % 4 < 2 { 1.0 } else { -1.0 })?),
    ];
    let power = (band - band % 2) as f64;
    for (id, center) in [("bump1", 0.0), ("bump0", 1.0)] {
        let f = TestFunction::AbsPower { center, power };
        out.push((id.to_string(), f.project(basis)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..4 {
        let decay = i >= 2;
        let blocks = (0..=band)
            .map(|l| {
                let s = if decay { 1.0 / (1.0 + l as f64) } else { 1.0 };
                (0..size(l)).map(|_| s * rng.gen_range(-1.0..1.0)).collect()
            })
            .collect();
        out.push((format!("random{i}"), SpectralCoefficients::new(cfg.clone(), blocks)?));
    }
    if cfg.dim() == 1 && n < band {
        for x0 in [0.0, 0.25, 0.5, 1.0] {
            out.push((format!("kernel-sign{x0}"), kernel_sign(basis, x0, n)?));
        }
    }
    Ok(out)
}

/// Largest `||T_n f||_p / ||f||_p` over the adversary suite at degree
/// `2n + 8`: an empirical lower bound for the operator norm.
pub fn estimate_operator_norm(
    kind: OperatorKind,
    cfg: &WeightConfig,
    p: Exponent,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if kind == OperatorKind::PartialSum && cfg.dim() != 1 {
        return Err(Error::Domain("partial-sum norms are estimated for d = 1 only".into()));
    }
    let basis = OrthoBasis::new(cfg, 2 * n + 8)?;
    let mut best: f64 = 0.0;
    for (_, f) in adversary_suite(&basis, n, seed ^ n as u64)? {
        let den = expansion_norm(&basis, &f, p)?;
        if den > 0.0 {
            best = best.max(expansion_norm(&basis, &kind.apply(&f, n)?, p)? / den);
        }
    }
    Ok(best)
}

/// Per-`n` rows of the empirical norm. At `p = 2` the bound 1 is asserted;
/// elsewhere the rows compare against 1.05 times the lower-half sup and are
/// informational.
pub fn operator_norm_report(
    kind: OperatorKind,
    cfg: &WeightConfig,
    p: Exponent,
    ns: &[usize],
    opts: &HarnessOptions,
) -> Result<CheckReport> {
    if ns.is_empty() {
        return Err(Error::Usage("empty n range".into()));
    }
    let started = Instant::now();
    let ratios = ns
        .par_iter()
        .map(|&n| estimate_operator_norm(kind, cfg, p, n, opts.seed))
        .collect::<Result<Vec<f64>>>()?;
    let half = (ns.len() / 2).max(1);
    let bound = if p.is_two() {
        1.0
    } else {
        1.05 * ratios[..half].iter().cloned().fold(0.0, f64::max)
    };
    let sup = ratios.iter().cloned().fold(0.0, f64::max);
    let rows = ns
        .iter()
        .zip(&ratios)
        .map(|(&n, &r)| {
            ReportRow::new(kind.check_id(), cfg, r, bound, normalized_margin(r, bound, 0.0))
                .p(p)
                .n(n)
                .constant(sup)
        })
        .collect();
    let verdict = if p.is_two() {
        Verdict::Within(opts.tol.identity)
    } else {
        Verdict::Within(0.0)
    };
    let grid = format!("{kind}; alpha = {}; p = {p}; n in {ns:?}", cfg.alpha_label());
    let report = CheckReport::from_rows(kind.check_id(), grid, verdict, rows, started);
    Ok(if p.is_two() { report } else { report.informational() })
}

/// `||f||_p <= ||f||_q` for `p < q` after normalizing the weight to a
/// probability measure, for consecutive exponents of `ps`.
pub fn norm_monotonicity_report(
    suite: &[SuiteFunction],
    ps: &[Exponent],
    opts: &HarnessOptions,
) -> Result<CheckReport> {
    let mut ps = ps.to_vec();
    ps.sort_by(|a, b| a.value().total_cmp(&b.value()));
    ps.dedup();
    if suite.is_empty() || ps.len() < 2 {
        return Err(Error::Usage("norm monotonicity needs a suite and two exponents".into()));
    }
    let started = Instant::now();
    let rows = suite
        .par_iter()
        .map(|sf| {
            let cfg = sf.f.coeffs().cfg();
            let mass = cfg.weight_integral();
            let normalized = |p: Exponent| -> Result<f64> {
                let v = sf.f.norm(p)?;
                Ok(match p {
                    Exponent::Finite(q) => v / mass.powf(1.0 / q),
                    Exponent::Infinity => v,
                })
            };
            let values = ps.iter().map(|&p| normalized(p)).collect::<Result<Vec<_>>>()?;
            Ok(ps
                .windows(2)
                .zip(values.windows(2))
                .map(|(pq, v)| {
                    ReportRow::new("NORM-HOLDER", cfg, v[0], v[1], normalized_margin(v[0], v[1], 0.0))
                        .p(pq[0])
                        .at(pq[1].value())
                        .f_id(&sf.id)
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let labels: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
    let grid = format!("{} functions; p in {{{}}}", suite.len(), labels.join(","));
    Ok(CheckReport::from_rows("NORM-HOLDER", grid, Verdict::Within(opts.tol.quadrature), rows, started))
}
