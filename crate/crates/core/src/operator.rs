//! The Durrmeyer operator `M_{n,alpha}` in Bernstein-basis and spectral form,
//! the differential operator `P_alpha(D)`, the multiplier operator `Q_n`, and
//! the auxiliary function `g_n` of the converse estimate.
//!
//! Spectral operators act blockwise by scalars. A coefficient vector with
//! energy above its stored band (`tail_energy > 0`) is rejected whenever the
//! operator would need that missing content.

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::orthopoly::SpectralCoefficients;
use crate::polynomial::Polynomial;
use crate::quadrature::{rule_for, QuadratureRule};
use crate::special_fn::log_gamma_unchecked;
use crate::spectrum::{log_eigenvalue_mu, mu_row, nu_row, t_n, WeightConfig};
use crate::sum::NeumaierSum;

/// Multi-index `k = (k_1, ..., k_d)` with `|k| <= n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BernsteinIndex {
    n: usize,
    k: Vec<usize>,
}

impl BernsteinIndex {
    pub fn new(n: usize, k: Vec<usize>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::Usage("a Bernstein index needs d >= 1 entries".into()));
        }
        let total: usize = k.iter().sum();
        if total > n {
            return Err(Error::Range(format!("|k| = {total} exceeds n = {n}")));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    /// `n - |k|`, the exponent of `1 - |x|`.
    pub fn rest(&self) -> usize {
        self.n - self.k.iter().sum::<usize>()
    }

    /// All indices of order `n` in dimension `dim`, lexicographic.
    pub fn all(n: usize, dim: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur = vec![0; dim];
        fn rec(pos: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<BernsteinIndex>) {
            if pos == cur.len() {
                out.push(BernsteinIndex { n, k: cur.clone() });
                return;
            }
            for v in 0..=left {
                cur[pos] = v;
                rec(pos + 1, left - v, n, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, n, n, &mut cur, &mut out);
        out
    }

    fn log_multinomial(&self) -> f64 {
        log_gamma_unchecked(self.n as f64 + 1.0)
            - self
                .k
                .iter()
                .map(|&ki| log_gamma_unchecked(ki as f64 + 1.0))
                .sum::<f64>()
            - log_gamma_unchecked(self.rest() as f64 + 1.0)
    }
}

fn log_power(x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * x.ln()
    }
}

fn bernstein_with(idx: &BernsteinIndex, log_multinomial: f64, x: &[f64]) -> f64 {
    let last = (1.0 - x.iter().take(idx.k.len()).sum::<f64>()).max(0.0);
    let mut log = log_multinomial + log_power(last, idx.rest());
    for (xi, &ki) in x.iter().zip(&idx.k) {
        log += log_power(xi.max(0.0), ki);
    }
    log.exp()
}

/// `p_{n,k}(x) = multinomial(n; k) x^k (1 - |x|)^{n - |k|}`.
pub fn bernstein_basis(idx: &BernsteinIndex, x: &[f64]) -> f64 {
    bernstein_with(idx, idx.log_multinomial(), x)
}

fn log_basis_moment(cfg: &WeightConfig, idx: &BernsteinIndex) -> f64 {
    let al = cfg.alphas();
    let d = cfg.dim();
    let mut log = idx.log_multinomial() + log_gamma_unchecked(idx.rest() as f64 + al[d] + 1.0)
        - log_gamma_unchecked(idx.n as f64 + cfg.rho() + 1.0);
    for (&ki, a) in idx.k.iter().zip(&al[..d]) {
        log += log_gamma_unchecked(ki as f64 + a + 1.0);
    }
    log
}

/// `int_S p_{n,k} w_alpha`, from the Dirichlet integral.
pub fn basis_moment(cfg: &WeightConfig, n: usize, k: &[usize]) -> Result<f64> {
    let idx = BernsteinIndex::new(n, k.to_vec())?;
    if k.len() != cfg.dim() {
        return Err(Error::Usage(format!(
            "index of length {} for dimension {}",
            k.len(),
            cfg.dim()
        )));
    }
    Ok(log_basis_moment(cfg, &idx).exp())
}

/// Precomputed Bernstein indices and normalizing moments for one `(alpha, n)`.
#[derive(Debug, Clone)]
pub struct DurrmeyerPlan {
    cfg: WeightConfig,
    n: usize,
    indices: Vec<BernsteinIndex>,
    log_multinomials: Vec<f64>,
    log_moments: Vec<f64>,
    rule: Option<QuadratureRule>,
}

/// Extra rule degree beyond `n + deg f` for the inner integrals.
pub const RULE_PADDING: usize = 8;

impl DurrmeyerPlan {
    pub fn new(cfg: &WeightConfig, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range("M_n needs n >= 1".into()));
        }
        let indices = BernsteinIndex::all(n, cfg.dim());
        let log_multinomials = indices.iter().map(BernsteinIndex::log_multinomial).collect();
        let log_moments = indices.iter().map(|i| log_basis_moment(cfg, i)).collect();
        Ok(Self {
            cfg: cfg.clone(),
            n,
            indices,
            log_multinomials,
            log_moments,
            rule: None,
        })
    }

    /// Use `rule` for every inner integral instead of choosing one per function.
    pub fn with_rule(mut self, rule: QuadratureRule) -> Result<Self> {
        rule.ensure_tag(&self.cfg)?;
        self.rule = Some(rule);
        Ok(self)
    }

    pub fn cfg(&self) -> &WeightConfig {
        &self.cfg
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[BernsteinIndex] {
        &self.indices
    }

    /// `int_S p_{n,k} w_alpha` in index order.
    pub fn moments(&self) -> Vec<f64> {
        self.log_moments.iter().map(|l| l.exp()).collect()
    }

    fn inner_rule(&self, f: &TestFunction) -> Result<QuadratureRule> {
        if let Some(rule) = &self.rule {
            if let Some(deg) = f.polynomial_degree() {
                if rule.exact_degree() < self.n + deg {
                    return Err(Error::Usage(format!(
                        "rule exact to degree {} cannot integrate p_(n,k) f of degree {}",
                        rule.exact_degree(),
                        self.n + deg
                    )));
                }
            }
            return Ok(rule.clone());
        }
        let deg = f.piece_degree().unwrap_or(2 * self.n);
        rule_for(&self.cfg, self.n + deg + RULE_PADDING, &f.kinks())
    }

    /// `a_k = int f p_{n,k} w / int p_{n,k} w`, so that `M_n f = sum_k a_k p_{n,k}`.
    pub fn bernstein_coefficients(&self, f: &TestFunction) -> Result<Vec<f64>> {
        let rule = self.inner_rule(f)?;
        let mut sums = vec![NeumaierSum::new(); self.indices.len()];
        for (x, w) in rule.nodes().zip(rule.weights()) {
            let wf = w * f.eval(x);
            if wf == 0.0 {
                continue;
            }
            for ((acc, idx), lm) in sums.iter_mut().zip(&self.indices).zip(&self.log_multinomials) {
                acc.add(wf * bernstein_with(idx, *lm, x));
            }
        }
        Ok(sums
            .iter()
            .zip(&self.log_moments)
            .map(|(s, lm)| s.value() * (-lm).exp())
            .collect())
    }

    /// `sum_k a_k p_{n,k}(x)`.
    pub fn eval_bernstein(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        let mut acc = NeumaierSum::new();
        for ((a, idx), lm) in coeffs.iter().zip(&self.indices).zip(&self.log_multinomials) {
            acc.add(a * bernstein_with(idx, *lm, x));
        }
        acc.value()
    }
}

/// `(M_{n,alpha} f)(x)` from the Bernstein-basis definition.
pub fn apply_durrmeyer(plan: &DurrmeyerPlan, f: &TestFunction, x: &[f64]) -> Result<f64> {
    let a = plan.bernstein_coefficients(f)?;
    Ok(plan.eval_bernstein(&a, x))
}

fn require_band(coeffs: &SpectralCoefficients, needed: usize, what: &str) -> Result<()> {
    if coeffs.tail_energy() > 0.0 && needed > coeffs.max_degree() {
        Err(Error::BandExceeded(format!(
            "{what} needs degrees up to {needed}, coefficients stop at {} with nonzero tail",
            coeffs.max_degree()
        )))
    } else {
        Ok(())
    }
}

/// Block `l` times `mu_{n,l}` for `l <= n`, zero above.
pub fn apply_durrmeyer_spectral(
    cfg: &WeightConfig,
    n: usize,
    coeffs: &SpectralCoefficients,
) -> Result<SpectralCoefficients> {
    require_band(coeffs, n, "M_n")?;
    let mu = mu_row(cfg, n);
    Ok(coeffs.scaled(|l| mu.get(l).copied().unwrap_or(0.0)))
}

/// `M_n f - f`; the tail of `f` is carried over unchanged.
pub fn durrmeyer_error(
    cfg: &WeightConfig,
    n: usize,
    coeffs: &SpectralCoefficients,
) -> Result<SpectralCoefficients> {
    require_band(coeffs, n, "M_n")?;
    let mu = mu_row(cfg, n);
    Ok(coeffs
        .scaled(|l| mu.get(l).copied().unwrap_or(0.0) - 1.0)
        .with_tail(coeffs.tail_energy()))
}

/// `P_alpha(D)`: block `l` times `-l (l + rho)`.
pub fn apply_p_spectral(
    cfg: &WeightConfig,
    coeffs: &SpectralCoefficients,
) -> Result<SpectralCoefficients> {
    require_band(coeffs, usize::MAX, "P(D)")?;
    let rho = cfg.rho();
    Ok(coeffs.scaled(|l| {
        let l = l as f64;
        -l * (l + rho)
    }))
}

/// `Q_n = sum_{l=1}^{n} nu_{n,l} P_l`.
pub fn apply_q(
    cfg: &WeightConfig,
    n: usize,
    coeffs: &SpectralCoefficients,
) -> Result<SpectralCoefficients> {
    require_band(coeffs, n, "Q_n")?;
    let nu = nu_row(cfg, n);
    Ok(coeffs.scaled(|l| nu.get(l).copied().unwrap_or(0.0)))
}

/// `g_n = (1 / t_n) sum_{k=n+1}^{2n} M_k f / (k (k + rho))` and `t_n`.
pub fn build_g_n(
    cfg: &WeightConfig,
    n: usize,
    coeffs: &SpectralCoefficients,
) -> Result<(SpectralCoefficients, f64)> {
    if n == 0 {
        return Err(Error::Range("g_n needs n >= 1".into()));
    }
    require_band(coeffs, 2 * n, "g_n")?;
    let t = t_n(cfg, n);
    let top = coeffs.max_degree().min(2 * n);
    let rho = cfg.rho();
    let mut factor = vec![NeumaierSum::new(); top + 1];
    for k in ((n + 1)..=(2 * n)).rev() {
        let kf = k as f64;
        let mu = mu_row(cfg, k);
        let wk = 1.0 / (kf * (kf + rho) * t);
        for (l, acc) in factor.iter_mut().enumerate() {
            acc.add(wk * mu.get(l).copied().unwrap_or(0.0));
        }
    }
    let g = coeffs.scaled(|l| factor.get(l).map_or(0.0, NeumaierSum::value));
    Ok((g, t))
}

/// `(x (1 - x) g')'`, the unweighted interval form of `P(D)`.
pub fn diff_operator_1d(g: &Polynomial) -> Polynomial {
    let x = Polynomial::x();
    let one_minus_x = Polynomial::new(vec![1.0, -1.0]);
    (&(&x * &one_minus_x) * &g.derivative()).derivative()
}

/// Partial sum `sum_{l=n+1}^{upper} j (j + rho) mu_{l,j} / (l (l + rho))`, which
/// telescopes to `1 - mu_{n,j}` as `upper` grows.
pub fn eigen_series_partial(cfg: &WeightConfig, n: usize, j: usize, upper: usize) -> f64 {
    let rho = cfg.rho();
    let jf = j as f64;
    let lam = jf * (jf + rho);
    let mut acc = NeumaierSum::new();
    for l in ((n + 1).max(j)..=upper).rev() {
        let lf = l as f64;
        let mu = log_eigenvalue_mu(cfg, l, j).map_or(0.0, f64::exp);
        acc.add(lam * mu / (lf * (lf + rho)));
    }
    acc.value()
}
