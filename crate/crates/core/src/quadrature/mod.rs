//! Gauss–Jacobi rules on `[0, 1]`, Duffy-collapsed rules on the triangle,
//! and weighted `L_p` norms.
//!
//! Univariate rules come from the Golub–Welsch eigenproblem for the Jacobi
//! matrix, followed by a Newton polish of each node against the orthonormal
//! recurrence. Weights use the Christoffel form `1 / sum_k p_k(x)^2`, which
//! keeps the tiny endpoint weights accurate.

mod norm;

pub use norm::{
    lp_norm, lp_norm_sampled, norm_interval, norm_triangle, sup_norm, Exponent, SupGrid,
    SUP_GRID_POINTS, SUP_GRID_TRIANGLE_AXIS,
};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special_fn::log_gamma_unchecked;
use crate::spectrum::WeightConfig;
use crate::sum::NeumaierSum;

/// Nodes and positive weights integrating against a Jacobi weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exact_degree: usize,
    tag: WeightConfig,
}

impl QuadratureRule {
    fn from_parts(
        dim: usize,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        exact_degree: usize,
        tag: WeightConfig,
    ) -> Self {
        debug_assert_eq!(nodes.len(), dim * weights.len());
        Self {
            dim,
            nodes,
            weights,
            exact_degree,
            tag,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Coordinates of node `i`.
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total polynomial degree integrated exactly against the tagged weight.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    /// The weight this rule was built for.
    pub fn weight_tag(&self) -> &WeightConfig {
        &self.tag
    }

    /// Fails with a usage error unless the rule was built for `cfg`.
    pub fn ensure_tag(&self, cfg: &WeightConfig) -> Result<()> {
        if &self.tag == cfg {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "rule built for d = {}, alpha = [{}] used with d = {}, alpha = [{}]",
                self.tag.dim(),
                self.tag.alpha_label(),
                cfg.dim(),
                cfg.alpha_label()
            )))
        }
    }

    /// `sum_i w_i f(x_i)` with compensated accumulation.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = NeumaierSum::new();
        for (x, w) in self.nodes().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.value()
    }

    /// Concatenate rules for disjoint pieces of the same domain.
    fn concat(pieces: Vec<QuadratureRule>, tag: WeightConfig) -> Self {
        let dim = tag.dim();
        let exact = pieces.iter().map(|r| r.exact_degree).min().unwrap_or(0);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for r in pieces {
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Self::from_parts(dim, nodes, weights, exact, tag)
    }
}

/// Orthonormal three-term recurrence for `x^a (1 - x)^b` on `[0, 1]`:
///
/// ```text
/// off[k] p_{k+1}(x) = (x - diag[k]) p_k(x) - off[k-1] p_{k-1}(x),   p_0 = mass^{-1/2}
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRecurrence {
    pub a: f64,
    pub b: f64,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub mass: f64,
}

impl JacobiRecurrence {
    /// Coefficients for degrees `0..len`; `off[len - 1]` links `p_{len-1}` to `p_len`.
    pub fn new(a: f64, b: f64, len: usize) -> Result<Self> {
        if !(a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidWeight(format!(
                "Jacobi exponents ({a}, {b}) must exceed -1"
            )));
        }
        // Symmetric form on [-1, 1] for (1 - t)^al (1 + t)^be, with x = (1 + t) / 2.
        let (al, be) = (b, a);
        let s = al + be;
        let mut diag = Vec::with_capacity(len);
        let mut off = Vec::with_capacity(len);
        for k in 0..len {
            let kf = k as f64;
            let d = if k == 0 {
                (be - al) / (s + 2.0)
            } else {
                (be * be - al * al) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
            };
            diag.push(0.5 * (1.0 + d));
            let j = kf + 1.0;
            let b2 = if k == 0 {
                4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                let t = 2.0 * j + s;
                4.0 * j * (j + al) * (j + be) * (j + s) / (t * t * (t + 1.0) * (t - 1.0))
            };
            off.push(0.5 * b2.sqrt());
        }
        let mass = (log_gamma_unchecked(a + 1.0) + log_gamma_unchecked(b + 1.0)
            - log_gamma_unchecked(a + b + 2.0))
        .exp();
        Ok(Self {
            a,
            b,
            diag,
            off,
            mass,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Writes `p_0(x), ..., p_{out.len()-1}(x)`; needs `out.len() <= len()`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = self.mass.sqrt().recip();
        if out.len() > 1 {
            out[1] = (x - self.diag[0]) * out[0] / self.off[0];
        }
        for k in 1..out.len() - 1 {
            out[k + 1] = ((x - self.diag[k]) * out[k] - self.off[k - 1] * out[k - 1]) / self.off[k];
        }
    }

    /// `(p_m(x), p_m'(x), sum_{k<m} p_k(x)^2)` for `m = len()`.
    fn top_with_derivative(&self, x: f64) -> (f64, f64, f64) {
        let m = self.len();
        let (mut p_prev, mut p) = (0.0, self.mass.sqrt().recip());
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut christoffel = 0.0;
        for k in 0..m {
            christoffel += p * p;
            let back = if k == 0 { 0.0 } else { self.off[k - 1] };
            let p_next = ((x - self.diag[k]) * p - back * p_prev) / self.off[k];
            let d_next = (p + (x - self.diag[k]) * d - back * d_prev) / self.off[k];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d, christoffel)
    }
}

/// `m`-node Gauss–Jacobi rule for `x^a (1 - x)^b` on `[0, 1]`, exact to degree `2m - 1`.
pub fn gauss_jacobi_rule(a: f64, b: f64, m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::Construction("a rule needs at least one node".into()));
    }
    let rec = JacobiRecurrence::new(a, b, m)?;
    let tag = WeightConfig::interval(a, b)?;
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            rec.diag[i]
        } else if i + 1 == j {
            rec.off[i]
        } else if j + 1 == i {
            rec.off[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Construction(format!(
            "tridiagonal eigensolver did not converge for (a, b, m) = ({a}, {b}, {m})"
        ))
    })?;
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(m);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = rec.top_with_derivative(*x);
            let step = p / dp;
            if !step.is_finite() || step.abs() > 1e-8 {
                break;
            }
            let next = *x - step;
            if !(0.0..=1.0).contains(&next) {
                break;
            }
            *x = next;
            if step.abs() <= f64::EPSILON * x.abs() {
                break;
            }
        }
        let (_, _, christoffel) = rec.top_with_derivative(*x);
        weights.push(christoffel.recip());
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Construction(format!(
            "non-positive weight in Gauss–Jacobi rule ({a}, {b}, {m})"
        )));
    }
    Ok(QuadratureRule::from_parts(1, nodes, weights, 2 * m - 1, tag))
}

type RuleKey = (u64, u64, usize);

/// Shared, memoized Gauss–Jacobi rules; construction is the dominant cost of
/// repeated norm evaluations.
pub fn cached_gauss_jacobi(a: f64, b: f64, m: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    let key = (a.to_bits(), b.to_bits(), m);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_jacobi_rule(a, b, m)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&rule));
    Ok(rule)
}

/// Rule for `x^a (1 - x)^b` on `[0, 1]` split at the interior `breaks`.
///
/// The first piece carries the `x^a` singularity exactly (Gauss–Jacobi in the
/// local variable) and the last piece the `(1 - x)^b` one; the remaining
/// weight factor on each piece is smooth and folded into the weights. Use
/// this for integrands with kinks or jumps at known locations.
///
/// A non-integer exponent makes the folded cofactor non-polynomial, so each
/// piece then gets at least [`MIN_SPLIT_NODES`] nodes.
pub fn split_interval_rule(a: f64, b: f64, breaks: &[f64], m: usize) -> Result<QuadratureRule> {
    let tag = WeightConfig::interval(a, b)?;
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|c| *c > 0.0 && *c < 1.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    if cuts.is_empty() {
        return cached_gauss_jacobi(a, b, m).map(|r| (*r).clone());
    }
    let m = if a.fract() != 0.0 || b.fract() != 0.0 {
        m.max(MIN_SPLIT_NODES)
    } else {
        m
    };
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(0.0);
    edges.extend(&cuts);
    edges.push(1.0);
    let last = edges.len() - 2;
    let mut pieces = Vec::with_capacity(edges.len() - 1);
    for (i, w) in edges.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let h = hi - lo;
        let (local, scale): (Arc<QuadratureRule>, f64) = if i == 0 {
            (cached_gauss_jacobi(a, 0.0, m)?, h.powf(a + 1.0))
        } else if i == last {
            (cached_gauss_jacobi(0.0, b, m)?, h.powf(b + 1.0))
        } else {
            (cached_gauss_jacobi(0.0, 0.0, m)?, h)
        };
        let mut nodes = Vec::with_capacity(local.len());
        let mut weights = Vec::with_capacity(local.len());
        for (y, wy) in local.nodes().zip(local.weights()) {
            let x = lo + h * y[0];
            let cofactor = if i == 0 {
                pow_or_one(1.0 - x, b)
            } else if i == last {
                pow_or_one(x, a)
            } else {
                pow_or_one(x, a) * pow_or_one(1.0 - x, b)
            };
            nodes.push(x);
            weights.push(wy * scale * cofactor);
        }
        pieces.push(QuadratureRule::from_parts(
            1,
            nodes,
            weights,
            2 * m - 1,
            tag.clone(),
        ));
    }
    Ok(QuadratureRule::concat(pieces, tag))
}

/// Node floor per piece of a split rule with non-integer weight exponents.
pub const MIN_SPLIT_NODES: usize = 48;

fn pow_or_one(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        x.powf(a)
    }
}

/// Rule for `w_alpha` on the unit triangle exact for total degree `<= degree`.
///
/// Uses the collapse `x_1 = u`, `x_2 = (1 - u) v`, under which the weight
/// factors as `u^{a1} (1 - u)^{a2 + a3 + 1}` times `v^{a2} (1 - v)^{a3}`.
pub fn simplex_rule_2d(cfg: &WeightConfig, degree: usize) -> Result<QuadratureRule> {
    simplex_rule_2d_split(cfg, degree, &[])
}

/// Triangle rule whose `u = x_1` factor is split at `x1_breaks`, for integrands
/// with kinks along lines `x_1 = c`.
pub fn simplex_rule_2d_split(
    cfg: &WeightConfig,
    degree: usize,
    x1_breaks: &[f64],
) -> Result<QuadratureRule> {
    if cfg.dim() != 2 {
        return Err(Error::Usage(format!(
            "simplex_rule_2d needs d = 2, got d = {}",
            cfg.dim()
        )));
    }
    let al = cfg.alphas();
    let q = degree / 2 + 1;
    let u_rule = split_interval_rule(al[0], al[1] + al[2] + 1.0, x1_breaks, q)?;
    let v_rule = cached_gauss_jacobi(al[1], al[2], q)?;
    let mut nodes = Vec::with_capacity(2 * u_rule.len() * v_rule.len());
    let mut weights = Vec::with_capacity(u_rule.len() * v_rule.len());
    for (u, wu) in u_rule.nodes().zip(u_rule.weights()) {
        for (v, wv) in v_rule.nodes().zip(v_rule.weights()) {
            nodes.push(u[0]);
            nodes.push((1.0 - u[0]) * v[0]);
            weights.push(wu * wv);
        }
    }
    Ok(QuadratureRule::from_parts(
        2,
        nodes,
        weights,
        2 * q - 1,
        cfg.clone(),
    ))
}

/// Rule for `cfg` (d = 1 or 2) exact to total degree `degree`, split at `breaks`
/// (in `x` for d = 1, in `x_1` for d = 2).
pub fn rule_for(cfg: &WeightConfig, degree: usize, breaks: &[f64]) -> Result<QuadratureRule> {
    match cfg.dim() {
        1 => split_interval_rule(cfg.alphas()[0], cfg.alphas()[1], breaks, degree / 2 + 1),
        2 => simplex_rule_2d_split(cfg, degree, breaks),
        d => Err(Error::Usage(format!(
            "quadrature is implemented for d = 1 and d = 2, got d = {d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn beta(a: f64, b: f64) -> f64 {
        (log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)).exp()
    }

    #[test]
    fn legendre_examples() {
        let r = gauss_jacobi_rule(0.0, 0.0, 2).unwrap();
        assert_relative_eq!(r.weights().iter().sum::<f64>(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.integrate(|x| x[0]), 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.integrate(|x| x[0].powi(3)), 0.25, max_relative = 1e-15);
        assert_eq!(r.exact_degree(), 3);
        for m in [1, 5, 17, 64] {
            let r = gauss_jacobi_rule(0.0, 0.0, m).unwrap();
            assert_relative_eq!(r.weights().iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn chebyshev_second_kind_moment() {
        for m in [3, 4, 10] {
            let r = gauss_jacobi_rule(0.5, 0.5, m).unwrap();
            assert_relative_eq!(r.integrate(|x| x[0]), PI / 16.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn monomial_moments_are_exact_to_degree() {
        for &(a, b) in &[(0.0, 0.0), (-0.5, -0.5), (0.5, -0.5), (2.0, 0.3), (-0.9, 4.5)] {
            for m in [1, 4, 12, 40] {
                let r = gauss_jacobi_rule(a, b, m).unwrap();
                for k in 0..=(2 * m - 1) {
                    let exact = beta(a + k as f64 + 1.0, b + 1.0);
                    let got = r.integrate(|x| x[0].powi(k as i32));
                    assert_relative_eq!(got, exact, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn large_rules_stay_accurate() {
        let r = gauss_jacobi_rule(-0.5, 1.5, 300).unwrap();
        assert_relative_eq!(
            r.weights().iter().sum::<f64>(),
            beta(0.5, 2.5),
            max_relative = 1e-12
        );
        assert!(r.nodes().all(|x| x[0] > 0.0 && x[0] < 1.0));
        assert!(r.nodes().zip(r.nodes().skip(1)).all(|(x, y)| x[0] < y[0]));
        assert_relative_eq!(
            r.integrate(|x| x[0].powi(37)),
            beta(37.5, 2.5),
            max_relative = 1e-11
        );
    }

    #[test]
    fn triangle_examples() {
        let cfg = WeightConfig::unweighted(2);
        let r = simplex_rule_2d(&cfg, 1).unwrap();
        assert_relative_eq!(r.weights().iter().sum::<f64>(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(r.integrate(|x| x[0]), 1.0 / 6.0, max_relative = 1e-14);
        let cfg = WeightConfig::triangle(1.0, 0.0, 0.0).unwrap();
        let r = simplex_rule_2d(&cfg, 2).unwrap();
        assert_relative_eq!(r.integrate(|x| x[0]), 1.0 / 12.0, max_relative = 1e-14);
    }

    #[test]
    fn triangle_dirichlet_moments() {
        let cfg = WeightConfig::triangle(0.5, -0.5, 1.5).unwrap();
        let deg = 9;
        let r = simplex_rule_2d(&cfg, deg).unwrap();
        assert!(r.exact_degree() >= deg);
        let al = cfg.alphas();
        for i in 0..=deg {
            for j in 0..=(deg - i) {
                let log_exact = log_gamma_unchecked(al[0] + i as f64 + 1.0)
                    + log_gamma_unchecked(al[1] + j as f64 + 1.0)
                    + log_gamma_unchecked(al[2] + 1.0)
                    - log_gamma_unchecked(cfg.rho() + (i + j) as f64 + 1.0);
                let got = r.integrate(|x| x[0].powi(i as i32) * x[1].powi(j as i32));
                assert_relative_eq!(got, log_exact.exp(), max_relative = 1e-10);
            }
        }
        assert_relative_eq!(
            r.weights().iter().sum::<f64>(),
            cfg.weight_integral(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn split_rule_integrates_kinks() {
        // int_0^1 |x - 0.3| dx = 0.3^2/2 + 0.7^2/2
        let r = split_interval_rule(0.0, 0.0, &[0.3], 4).unwrap();
        assert_relative_eq!(r.integrate(|x| (x[0] - 0.3).abs()), 0.29, max_relative = 1e-14);
        // int_0^1 x^{1/2} (1 - x)^{-1/2} 1[x > 0.7] dx via the incomplete beta complement
        let cfg_rule = split_interval_rule(0.5, -0.5, &[0.7], 40).unwrap();
        let full = gauss_jacobi_rule(0.5, -0.5, 40).unwrap();
        assert_relative_eq!(
            cfg_rule.weights().iter().sum::<f64>(),
            full.weights().iter().sum::<f64>(),
            max_relative = 1e-13
        );
        let upper = cfg_rule.integrate(|x| if x[0] > 0.7 { 1.0 } else { 0.0 });
        // antiderivative of sqrt(x/(1-x)): asin(sqrt x) - sqrt(x (1 - x))
        let g = |x: f64| x.sqrt().asin() - (x * (1.0 - x)).sqrt();
        assert_relative_eq!(upper, g(1.0) - g(0.7), max_relative = 1e-12);
    }

    #[test]
    fn mismatched_tag_is_usage_error() {
        let r = gauss_jacobi_rule(0.0, 0.0, 4).unwrap();
        assert!(r.ensure_tag(&WeightConfig::unweighted(1)).is_ok());
        assert!(matches!(
            r.ensure_tag(&WeightConfig::interval(0.5, 0.0).unwrap()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gauss_jacobi_rule(-1.0, 0.0, 3).is_err());
        assert!(gauss_jacobi_rule(0.0, 0.0, 0).is_err());
        assert!(simplex_rule_2d(&WeightConfig::unweighted(1), 3).is_err());
    }

    proptest! {
        #[test]
        fn weights_positive_and_mass_exact(a in -0.95f64..5.0, b in -0.95f64..5.0, m in 1usize..60) {
            let r = gauss_jacobi_rule(a, b, m).unwrap();
            prop_assert!(r.weights().iter().all(|w| *w > 0.0));
            let mass = beta(a + 1.0, b + 1.0);
            prop_assert!((r.weights().iter().sum::<f64>() - mass).abs() <= 1e-12 * mass);
        }
    }
}
