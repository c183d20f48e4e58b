//! `L_{p, w_alpha}` norms for `1 <= p <= infinity`.
//!
//! For `p < infinity` on the interval, sign changes of the integrand are
//! located on a dense sampling grid and bisected, and the rule is split there
//! as well as at any caller-supplied kinks; `|f|^p` is then smooth on every
//! piece. The sup norm ignores the weight and is taken over a Chebyshev grid
//! with golden-section refinement of the largest local maxima.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{rule_for, QuadratureRule};
use crate::error::{Error, Result};
use crate::spectrum::WeightConfig;
use crate::sum::NeumaierSum;

/// Norm exponent `p` in `[1, infinity]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "String")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = Error;
    fn try_from(r: ExponentRepr) -> Result<Self> {
        match r {
            ExponentRepr::Number(p) => Exponent::finite(p),
            ExponentRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Exponent> for String {
    fn from(p: Exponent) -> String {
        p.to_string()
    }
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(Error::Domain(format!("norm exponent p = {p} must lie in [1, inf]")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_two(self) -> bool {
        self == Exponent::TWO
    }

    fn even_integer(self) -> Option<u32> {
        match self {
            Exponent::Finite(p) if p.fract() == 0.0 && p as u32 % 2 == 0 => Some(p as u32),
            _ => None,
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("cannot parse norm exponent {t:?}")))
                .and_then(Exponent::finite),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// `(sum_i w_i |v_i|^p)^{1/p}` for values sampled at the nodes of `rule`;
/// for `p = infinity` the values are treated as a sampling grid.
pub fn lp_norm_sampled(values: &[f64], rule: &QuadratureRule, p: Exponent) -> Result<f64> {
    if values.len() != rule.len() {
        return Err(Error::Usage(format!(
            "{} samples for a rule with {} nodes",
            values.len(),
            rule.len()
        )));
    }
    Ok(match p {
        Exponent::Infinity => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        Exponent::Finite(p) => {
            let mut acc = NeumaierSum::new();
            for (v, w) in values.iter().zip(rule.weights()) {
                acc.add(w * abs_pow(*v, p));
            }
            acc.value().max(0.0).powf(p.recip())
        }
    })
}

/// `lp_norm_sampled` with `f` evaluated at the nodes of `rule`.
pub fn lp_norm<F: Fn(&[f64]) -> f64>(f: F, rule: &QuadratureRule, p: Exponent) -> f64 {
    let values: Vec<f64> = rule.nodes().map(f).collect();
    lp_norm_sampled(&values, rule, p).expect("sample count matches by construction")
}

fn abs_pow(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// Sampling grid for sup norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SupGrid {
    dim: usize,
    points: Vec<f64>,
}

/// Points of the interval Chebyshev grid.
pub const SUP_GRID_POINTS: usize = 4097;
/// Points per axis of the collapsed triangle grid.
pub const SUP_GRID_TRIANGLE_AXIS: usize = 385;
const ENDPOINT_CELLS: usize = 16;
const REFINED_MAXIMA: usize = 12;

fn chebyshev_lobatto(count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / last).cos()))
        .collect()
}

impl SupGrid {
    /// Chebyshev grid on `[0, 1]`, four times finer in the cells next to the
    /// endpoints, plus each kink and points just either side of it.
    pub fn interval(kinks: &[f64]) -> Self {
        let base = chebyshev_lobatto(SUP_GRID_POINTS);
        let cells = base.len() - 1;
        let mut pts = Vec::with_capacity(base.len() + 6 * ENDPOINT_CELLS + 3 * kinks.len());
        for (i, w) in base.windows(2).enumerate() {
            pts.push(w[0]);
            if i < ENDPOINT_CELLS || i >= cells - ENDPOINT_CELLS {
                for j in 1..4 {
                    pts.push(w[0] + (w[1] - w[0]) * j as f64 / 4.0);
                }
            }
        }
        pts.push(1.0);
        for &k in kinks.iter().filter(|k| (0.0..=1.0).contains(*k)) {
            let eps = 1e-12;
            pts.extend([k, (k - eps).max(0.0), (k + eps).min(1.0)]);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Self { dim: 1, points: pts }
    }

    /// Tensor Chebyshev grid in the collapsed coordinates `(u, v)`, mapped
    /// onto the triangle by `x = (u, (1 - u) v)`, plus lines at `x_1 = kink`.
    pub fn triangle(kinks: &[f64]) -> Self {
        let mut us = chebyshev_lobatto(SUP_GRID_TRIANGLE_AXIS);
        for &k in kinks.iter().filter(|k| (0.0..=1.0).contains(*k)) {
            us.extend([k, (k - 1e-12).max(0.0), (k + 1e-12).min(1.0)]);
        }
        us.sort_by(f64::total_cmp);
        us.dedup();
        let vs = chebyshev_lobatto(SUP_GRID_TRIANGLE_AXIS);
        let mut points = Vec::with_capacity(2 * us.len() * vs.len());
        for &u in &us {
            for &v in &vs {
                points.push(u);
                points.push((1.0 - u) * v);
            }
        }
        Self { dim: 2, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }
}

/// `max |f|` over the grid; on the interval the largest local maxima are
/// refined by golden-section search between their grid neighbours.
pub fn sup_norm<F: Fn(&[f64]) -> f64>(f: F, grid: &SupGrid) -> f64 {
    let vals: Vec<f64> = grid.points().map(|x| f(x).abs()).collect();
    let mut best = vals.iter().fold(0.0f64, |m, v| m.max(*v));
    if grid.dim != 1 || vals.len() < 3 {
        return best;
    }
    let xs = &grid.points;
    let mut peaks: Vec<usize> = (1..vals.len() - 1)
        .filter(|&i| vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1])
        .collect();
    peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    for &i in peaks.iter().take(REFINED_MAXIMA) {
        let g = |x: f64| f(&[x]).abs();
        best = best.max(golden_max(g, xs[i - 1], xs[i + 1]));
    }
    best
}

fn golden_max<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if g1 >= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        }
    }
    g1.max(g2)
}

const ROOT_SCAN_POINTS: usize = 2049;

/// `||f||_{p, w_alpha}` on `[0, 1]` for an `f` that is a polynomial of degree
/// at most `degree` between consecutive `kinks` (or smooth enough to be
/// integrated like one).
pub fn norm_interval<F: Fn(f64) -> f64>(
    cfg: &WeightConfig,
    f: F,
    p: Exponent,
    kinks: &[f64],
    degree: usize,
) -> Result<f64> {
    if cfg.dim() != 1 {
        return Err(Error::Usage("norm_interval needs d = 1".into()));
    }
    let p = match p {
        Exponent::Infinity => return Ok(sup_norm(|x| f(x[0]), &SupGrid::interval(kinks))),
        Exponent::Finite(p) => p,
    };
    let mut breaks: Vec<f64> = kinks.to_vec();
    if Exponent::Finite(p).even_integer().is_none() {
        breaks.extend(sign_changes(&f, kinks));
    }
    let power_degree = (p.ceil() as usize).max(1) * degree;
    let rule = rule_for(cfg, power_degree + 16, &breaks)?;
    Ok(lp_norm(|x| f(x[0]), &rule, Exponent::Finite(p)))
}

/// Sign changes of `f` found on a Chebyshev scan and bisected to machine precision.
fn sign_changes<F: Fn(f64) -> f64>(f: &F, kinks: &[f64]) -> Vec<f64> {
    let mut xs = chebyshev_lobatto(ROOT_SCAN_POINTS);
    xs.extend(kinks.iter().filter(|k| (0.0..=1.0).contains(*k)));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() - 1 {
        let (mut lo, mut hi) = (xs[i], xs[i + 1]);
        let (flo, fhi) = (vals[i], vals[i + 1]);
        if flo == 0.0 || flo.signum() == fhi.signum() || fhi == 0.0 {
            continue;
        }
        let neg_at_lo = flo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (f(mid) < 0.0) == neg_at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// `||f||_{p, w_alpha}` on the triangle; `x1_kinks` are lines `x_1 = c` where
/// `f` is not smooth. No root splitting is done in two dimensions.
pub fn norm_triangle<F: Fn(&[f64]) -> f64>(
    cfg: &WeightConfig,
    f: F,
    p: Exponent,
    x1_kinks: &[f64],
    degree: usize,
) -> Result<f64> {
    if cfg.dim() != 2 {
        return Err(Error::Usage("norm_triangle needs d = 2".into()));
    }
    match p {
        Exponent::Infinity => Ok(sup_norm(f, &SupGrid::triangle(x1_kinks))),
        Exponent::Finite(pv) => {
            let rule = rule_for(cfg, (pv.ceil() as usize).max(1) * degree + 16, x1_kinks)?;
            Ok(lp_norm(f, &rule, p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_jacobi_rule;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn legendre() -> WeightConfig {
        WeightConfig::unweighted(1)
    }

    #[test]
    fn parses_exponents() {
        assert_eq!("1".parse::<Exponent>().unwrap(), Exponent::ONE);
        assert_eq!(" inf ".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("x".parse::<Exponent>().is_err());
        let json = serde_json::to_string(&vec![Exponent::TWO, Exponent::Infinity]).unwrap();
        assert_eq!(json, r#"["2","inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(r#"[1, "2", "inf", 3.5]"#).unwrap();
        assert_eq!(back[0], Exponent::ONE);
        assert_eq!(back[2], Exponent::Infinity);
    }

    #[test]
    fn norm_examples() {
        let r = gauss_jacobi_rule(0.0, 0.0, 8).unwrap();
        assert_relative_eq!(lp_norm(|_| 1.0, &r, Exponent::TWO), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            lp_norm(|x| x[0], &r, Exponent::TWO),
            1.0 / 3f64.sqrt(),
            max_relative = 1e-14
        );
        let r = gauss_jacobi_rule(0.5, 1.5, 8).unwrap();
        let mass: f64 = r.weights().iter().sum();
        for p in [1.0, 2.0, 3.7] {
            assert_relative_eq!(
                lp_norm(|_| -2.5, &r, Exponent::Finite(p)),
                2.5 * mass.powf(1.0 / p),
                max_relative = 1e-13
            );
        }
        let grid = SupGrid::interval(&[]);
        assert_eq!(sup_norm(|_| -2.5, &grid), 2.5);
    }

    #[test]
    fn sampled_norm_checks_lengths() {
        let r = gauss_jacobi_rule(0.0, 0.0, 3).unwrap();
        assert!(matches!(
            lp_norm_sampled(&[1.0, 2.0], &r, Exponent::ONE),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn root_splitting_integrates_abs_exactly() {
        // int_0^1 |x - 1/3| dx = (1/9 + 4/9) / 2
        let v = norm_interval(&legendre(), |x| x - 1.0 / 3.0, Exponent::ONE, &[], 1).unwrap();
        assert_relative_eq!(v, 5.0 / 18.0, max_relative = 1e-14);
        // shifted T_5, checked against a rule split at its known roots
        let t5 = |x: f64| {
            let t = 2.0 * x - 1.0;
            16.0 * t.powi(5) - 20.0 * t.powi(3) + 5.0 * t
        };
        let v = norm_interval(&legendre(), t5, Exponent::ONE, &[], 5).unwrap();
        let roots: Vec<f64> = (0..5)
            .map(|k| 0.5 * (1.0 + ((2 * k + 1) as f64 * std::f64::consts::PI / 10.0).cos()))
            .collect();
        let r = crate::quadrature::split_interval_rule(0.0, 0.0, &roots, 6).unwrap();
        assert_relative_eq!(v, r.integrate(|x| t5(x[0]).abs()), max_relative = 1e-13);
    }

    #[test]
    fn sup_norm_finds_interior_peak() {
        let grid = SupGrid::interval(&[]);
        let f = |x: &[f64]| 1.0 - 0.9 * (x[0] - 0.123_456_789).powi(2);
        assert_relative_eq!(sup_norm(f, &grid), 1.0, max_relative = 1e-13);
        let tri = SupGrid::triangle(&[]);
        assert_relative_eq!(sup_norm(|x| x[0] + x[1], &tri), 1.0, max_relative = 1e-15);
        assert!(tri.points().all(|x| x[0] >= 0.0 && x[1] >= 0.0 && x[0] + x[1] <= 1.0 + 1e-15));
    }

    #[test]
    fn doubling_rule_size_is_stable() {
        let f = |x: f64| (3.0 * x).sin() * (-x).exp();
        let cfg = WeightConfig::interval(-0.5, 0.5).unwrap();
        for p in [Exponent::ONE, Exponent::TWO, Exponent::Finite(3.0)] {
            let a = norm_interval(&cfg, f, p, &[], 16).unwrap();
            let b = norm_interval(&cfg, f, p, &[], 32).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn triangle_norms() {
        let cfg = WeightConfig::unweighted(2);
        // int_S x_1^2 = 2!/4! = 1/12
        let v = norm_triangle(&cfg, |x| x[0], Exponent::TWO, &[], 1).unwrap();
        assert_relative_eq!(v, (1.0f64 / 12.0).sqrt(), max_relative = 1e-14);
        let v = norm_triangle(&cfg, |x| x[0] - x[1], Exponent::Infinity, &[], 1).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn holder_and_triangle_inequality(
            c in prop::collection::vec(-1.0f64..1.0, 6),
            d in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let poly = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
            let cfg = WeightConfig::interval(0.0, 0.0).unwrap();
            let norms: Vec<f64> = [Exponent::ONE, Exponent::TWO, Exponent::Finite(3.0), Exponent::Infinity]
                .iter()
                .map(|&p| norm_interval(&cfg, |x| poly(&c, x), p, &[], 5).unwrap())
                .collect();
            // unit-mass weight: norms are nondecreasing in p
            for w in norms.windows(2) {
                prop_assert!(w[0] <= w[1] * (1.0 + 1e-12) + 1e-300);
            }
            for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinity] {
                let s = norm_interval(&cfg, |x| poly(&c, x) + poly(&d, x), p, &[], 5).unwrap();
                let a = norm_interval(&cfg, |x| poly(&c, x), p, &[], 5).unwrap();
                let b = norm_interval(&cfg, |x| poly(&d, x), p, &[], 5).unwrap();
                prop_assert!(s <= (a + b) * (1.0 + 1e-12));
            }
        }
    }
}
