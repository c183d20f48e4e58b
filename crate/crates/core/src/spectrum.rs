//! Eigenvalues `mu_{n,l}` of the Durrmeyer operator, the multipliers
//! `nu_{n,l}`, and their continuous extensions in the degree parameter.
//!
//! With `rho = d + sum(alpha_i)` the eigenvalue on the degree-`l` eigenspace is
//!
//! ```text
//! mu_{n,l} = n! / (n - l)! * Gamma(n + rho + 1) / Gamma(n + l + rho + 1)
//!          = prod_{i=1}^{l} (n - i + 1) / (n + rho + i),
//! ```
//!
//! and the multiplier linking `(1/n) P(D) M_n` to `M_n - I` is
//! `nu_{n,l} = l (l + rho) mu_{n,l} / (n (1 - mu_{n,l}))`.
//!
//! Integer-index eigenvalues are evaluated as a compensated sum of
//! `ln(1 - (2i - 1 + rho) / (n + rho + i))`, which keeps `1 - mu` accurate
//! when `mu` is close to one. The continuous extensions go through
//! [`gamma_ratio_log`](crate::special_fn::gamma_ratio_log).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{
    digamma_unchecked, gamma_ratio_log_unchecked, log_gamma_unchecked, tetragamma_unchecked,
    trigamma_unchecked,
};
use crate::sum::{compensated_sum, NeumaierSum};

/// `1 - mu` below this threshold is reported as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-14;

/// Dimension and Jacobi exponents of the weight
/// `w(x) = x_1^a_1 ... x_d^a_d (1 - |x|)^a_{d+1}` on the standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeight", into = "RawWeight")]
pub struct WeightConfig {
    dim: usize,
    alphas: Vec<f64>,
    rho: f64,
}

#[derive(Serialize, Deserialize)]
struct RawWeight {
    d: usize,
    alphas: Vec<f64>,
}

impl TryFrom<RawWeight> for WeightConfig {
    type Error = Error;
    fn try_from(raw: RawWeight) -> Result<Self> {
        WeightConfig::new(raw.d, raw.alphas)
    }
}

impl From<WeightConfig> for RawWeight {
    fn from(cfg: WeightConfig) -> Self {
        RawWeight {
            d: cfg.dim,
            alphas: cfg.alphas,
        }
    }
}

impl WeightConfig {
    pub fn new(dim: usize, alphas: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidWeight("dimension must be at least 1".into()));
        }
        if alphas.len() != dim + 1 {
            return Err(Error::InvalidWeight(format!(
                "dimension {dim} needs {} exponents, got {}",
                dim + 1,
                alphas.len()
            )));
        }
        if let Some((i, a)) = alphas
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > -1.0))
        {
            return Err(Error::InvalidWeight(format!(
                "alpha_{} = {a} violates alpha_i > -1",
                i + 1
            )));
        }
        let rho = dim as f64 + alphas.iter().sum::<f64>();
        Ok(Self { dim, alphas, rho })
    }

    /// Weight `x^a (1 - x)^b` on `[0, 1]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(1, vec![a, b])
    }

    /// Weight `x_1^a x_2^b (1 - x_1 - x_2)^c` on the unit triangle.
    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(2, vec![a, b, c])
    }

    /// Lebesgue measure on the `d`-simplex.
    pub fn unweighted(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim + 1]).expect("zero exponents are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Symmetric interval weight `(x (1 - x))^((rho - 1) / 2)`, whose aggregate
    /// parameter is exactly `rho`. Spectral quantities depend on the weight
    /// only through `rho`, so sweeps over `rho` use this.
    pub fn with_rho(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > -1.0) {
            return Err(Error::InvalidWeight(format!("rho = {rho} must exceed -1")));
        }
        let a = (rho - 1.0) / 2.0;
        let mut cfg = Self::interval(a, a)?;
        cfg.rho = rho;
        Ok(cfg)
    }

    /// Evaluate `w(x)`; `x` has `dim` coordinates.
    pub fn weight(&self, x: &[f64]) -> f64 {
        let last = 1.0 - x.iter().take(self.dim).sum::<f64>();
        let mut w = pow_nonneg(last, self.alphas[self.dim]);
        for (xi, a) in x.iter().zip(&self.alphas[..self.dim]) {
            w *= pow_nonneg(*xi, *a);
        }
        w
    }

    /// Logarithm of `int_S w` (a Dirichlet integral).
    pub fn log_weight_integral(&self) -> f64 {
        let num: f64 = self
            .alphas
            .iter()
            .map(|a| log_gamma_unchecked(a + 1.0))
            .sum();
        num - log_gamma_unchecked(self.rho + 1.0)
    }

    /// `int_S w(x) dx`.
    pub fn weight_integral(&self) -> f64 {
        self.log_weight_integral().exp()
    }

    /// Short label such as `0;0.5` used in reports.
    pub fn alpha_label(&self) -> String {
        self.alphas
            .iter()
            .map(|a| format!("{a}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn pow_nonneg(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        x.max(0.0).powf(a)
    }
}

fn check_index(n: usize, ell: usize) -> Result<()> {
    if ell > n {
        Err(Error::Range(format!("degree {ell} exceeds n = {n}")))
    } else {
        Ok(())
    }
}

fn log_mu_unchecked(rho: f64, n: usize, ell: usize) -> f64 {
    let nf = n as f64;
    compensated_sum((1..=ell).map(|i| {
        let i = i as f64;
        (-(2.0 * i - 1.0 + rho) / (nf + rho + i)).ln_1p()
    }))
}

/// `ln mu_{n,l}`; stays finite where `mu` itself underflows.
pub fn log_eigenvalue_mu(cfg: &WeightConfig, n: usize, ell: usize) -> Result<f64> {
    check_index(n, ell)?;
    Ok(log_mu_unchecked(cfg.rho, n, ell))
}

/// Eigenvalue `mu_{n,l}` of `M_{n,alpha}` on the degree-`l` eigenspace.
pub fn eigenvalue_mu(cfg: &WeightConfig, n: usize, ell: usize) -> Result<f64> {
    log_eigenvalue_mu(cfg, n, ell).map(f64::exp)
}

/// `ln mu_{n,l}` for `l = 0..=n`.
pub fn log_mu_row(cfg: &WeightConfig, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let rho = cfg.rho;
    let mut acc = NeumaierSum::new();
    let mut row = Vec::with_capacity(n + 1);
    row.push(0.0);
    for i in 1..=n {
        let i = i as f64;
        acc.add((-(2.0 * i - 1.0 + rho) / (nf + rho + i)).ln_1p());
        row.push(acc.value());
    }
    row
}

/// `mu_{n,l}` for `l = 0..=n`.
pub fn mu_row(cfg: &WeightConfig, n: usize) -> Vec<f64> {
    log_mu_row(cfg, n).into_iter().map(f64::exp).collect()
}

fn log_nu_from_log_mu(rho: f64, n: usize, ell: usize, log_mu: f64) -> f64 {
    let l = ell as f64;
    (l * (l + rho)).ln() + log_mu - (n as f64).ln() - (-log_mu.exp_m1()).ln()
}

/// `ln nu_{n,l}` for `1 <= l <= n`.
pub fn log_multiplier_nu(cfg: &WeightConfig, n: usize, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::Range(
            "nu_{n,0} is undefined since mu_{n,0} = 1".into(),
        ));
    }
    check_index(n, ell)?;
    let log_mu = log_mu_unchecked(cfg.rho, n, ell);
    Ok(log_nu_from_log_mu(cfg.rho, n, ell, log_mu))
}

/// Multiplier `nu_{n,l} = l (l + rho) mu_{n,l} / (n (1 - mu_{n,l}))`, `1 <= l <= n`.
pub fn multiplier_nu(cfg: &WeightConfig, n: usize, ell: usize) -> Result<f64> {
    log_multiplier_nu(cfg, n, ell).map(f64::exp)
}

/// `ln nu_{n,l}` for `l = 0..=n`; entry 0 is `-inf` (the `l = 0` block is annihilated).
pub fn log_nu_row(cfg: &WeightConfig, n: usize) -> Vec<f64> {
    let log_mu = log_mu_row(cfg, n);
    let mut row = vec![f64::NEG_INFINITY; n + 1];
    for ell in 1..=n {
        row[ell] = log_nu_from_log_mu(cfg.rho, n, ell, log_mu[ell]);
    }
    row
}

/// `nu_{n,l}` for `l = 0..=n`; entry 0 is 0.
pub fn nu_row(cfg: &WeightConfig, n: usize) -> Vec<f64> {
    log_nu_row(cfg, n).into_iter().map(f64::exp).collect()
}

/// `t_n = sum_{k=n+1}^{2n} 1 / (k (k + rho))`.
pub fn t_n(cfg: &WeightConfig, n: usize) -> f64 {
    tail_sum(cfg, n, 2 * n)
}

/// `sum_{l=n+1}^{upper} 1 / (l (l + rho))`.
pub fn tail_sum(cfg: &WeightConfig, n: usize, upper: usize) -> f64 {
    let rho = cfg.rho;
    compensated_sum(((n + 1)..=upper).rev().map(|l| {
        let l = l as f64;
        1.0 / (l * (l + rho))
    }))
}

fn check_tau(n: usize, tau: f64, open_right: bool) -> Result<()> {
    let nf = n as f64;
    let ok = tau.is_finite() && tau > 0.0 && if open_right { tau < nf } else { tau <= nf };
    if ok {
        Ok(())
    } else {
        let interval = if open_right { "(0, n)" } else { "(0, n]" };
        Err(Error::Range(format!("tau = {tau} outside {interval} for n = {n}")))
    }
}

/// `ln mu_n(tau) = ln[Gamma(n+1) Gamma(n+rho+1) / (Gamma(n-tau+1) Gamma(n+tau+rho+1))]`.
pub fn log_mu_continuous(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    check_tau(n, tau, false)?;
    let nf = n as f64;
    let rho = cfg.rho;
    Ok(gamma_ratio_log_unchecked(nf + 1.0, nf - tau + 1.0)
        + gamma_ratio_log_unchecked(nf + rho + 1.0, nf + tau + rho + 1.0))
}

/// Continuous extension `mu_n(tau)`, `tau` in `(0, n]`.
pub fn mu_continuous(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    log_mu_continuous(cfg, n, tau).map(f64::exp)
}

/// `C_n(tau) = psi(n + tau + rho + 1) - psi(n - tau + 1)`, so that `mu_n' = -mu_n C_n`.
pub fn c_n(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    check_tau(n, tau, false)?;
    let nf = n as f64;
    Ok(digamma_unchecked(nf + tau + cfg.rho + 1.0) - digamma_unchecked(nf - tau + 1.0))
}

/// `C_n'(tau) = psi'(n + tau + rho + 1) + psi'(n - tau + 1)`.
pub fn c_n_prime(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    check_tau(n, tau, false)?;
    let nf = n as f64;
    Ok(trigamma_unchecked(nf + tau + cfg.rho + 1.0) + trigamma_unchecked(nf - tau + 1.0))
}

/// `C_n''(tau) = psi''(n + tau + rho + 1) - psi''(n - tau + 1)`.
pub fn c_n_second(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    check_tau(n, tau, false)?;
    let nf = n as f64;
    Ok(tetragamma_unchecked(nf + tau + cfg.rho + 1.0) - tetragamma_unchecked(nf - tau + 1.0))
}

/// Values shared by `nu_n` and its derivatives at one `tau`.
struct NuParts {
    tau: f64,
    rho: f64,
    n: f64,
    mu: f64,
    one_minus_mu: f64,
}

impl NuParts {
    fn new(cfg: &WeightConfig, n: usize, tau: f64) -> Result<Self> {
        check_tau(n, tau, true)?;
        let log_mu = log_mu_continuous(cfg, n, tau)?;
        let one_minus_mu = -log_mu.exp_m1();
        if one_minus_mu < DEGENERACY_FLOOR {
            return Err(Error::Degenerate(format!(
                "1 - mu_n(tau) = {one_minus_mu:e} at n = {n}, tau = {tau}, rho = {}",
                cfg.rho
            )));
        }
        Ok(Self {
            tau,
            rho: cfg.rho,
            n: n as f64,
            mu: log_mu.exp(),
            one_minus_mu,
        })
    }
}

/// `nu_n(tau) = tau (tau + rho) mu_n(tau) / (n (1 - mu_n(tau)))`, `tau` in `(0, n)`.
pub fn nu_continuous(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    let p = NuParts::new(cfg, n, tau)?;
    Ok(p.tau * (p.tau + p.rho) * p.mu / (p.n * p.one_minus_mu))
}

/// First derivative of `nu_n` in closed form:
/// `(2 tau + rho) mu / (n (1 - mu)) - tau (tau + rho) mu C_n / (n (1 - mu)^2)`.
pub fn nu_prime(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    let p = NuParts::new(cfg, n, tau)?;
    let c = c_n(cfg, n, tau)?;
    let (t, r, q) = (p.tau, p.rho, p.one_minus_mu);
    Ok((2.0 * t + r) * p.mu / (p.n * q) - t * (t + r) * p.mu * c / (p.n * q * q))
}

/// Second derivative of `nu_n` in closed form (uses `C_n` and `C_n'`).
pub fn nu_second(cfg: &WeightConfig, n: usize, tau: f64) -> Result<f64> {
    let p = NuParts::new(cfg, n, tau)?;
    let c = c_n(cfg, n, tau)?;
    let dc = c_n_prime(cfg, n, tau)?;
    let (t, r, q, mu, nf) = (p.tau, p.rho, p.one_minus_mu, p.mu, p.n);
    let tt = t * (t + r);
    Ok(2.0 * mu / (nf * q) - 2.0 * (2.0 * t + r) * mu * c / (nf * q * q) - tt * mu * dc / (nf * q * q)
        + tt * (1.0 + mu) * mu * c * c / (nf * q * q * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rho(r: f64) -> WeightConfig {
        WeightConfig::with_rho(r).unwrap()
    }

    /// mu_{n,l} as an explicit product of ratios.
    fn mu_product_oracle(rho: f64, n: usize, ell: usize) -> f64 {
        (1..=ell)
            .map(|i| (n - i + 1) as f64 / (n as f64 + rho + i as f64))
            .product()
    }

    #[test]
    fn weight_validation() {
        assert!(WeightConfig::interval(-1.0, 0.0).is_err());
        assert!(WeightConfig::new(2, vec![0.0, 0.0]).is_err());
        assert!(WeightConfig::new(0, vec![0.0]).is_err());
        let cfg = WeightConfig::triangle(0.5, -0.5, 1.0).unwrap();
        assert_eq!(cfg.rho(), 3.0);
        assert_relative_eq!(WeightConfig::unweighted(2).weight_integral(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(
            WeightConfig::interval(0.5, 0.5).unwrap().weight_integral(),
            std::f64::consts::PI / 8.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn weight_config_json_round_trip_validates() {
        let cfg = WeightConfig::triangle(0.5, 0.0, 1.0).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<WeightConfig>(&json).unwrap(), cfg);
        assert!(serde_json::from_str::<WeightConfig>(r#"{"d":1,"alphas":[-1.0,0.0]}"#).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let cfg = rho(1.0);
        assert_eq!(eigenvalue_mu(&cfg, 10, 0).unwrap(), 1.0);
        assert_relative_eq!(eigenvalue_mu(&cfg, 10, 1).unwrap(), 10.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(
            eigenvalue_mu(&cfg, 5, 5).unwrap(),
            86_400.0 / 39_916_800.0,
            max_relative = 1e-14
        );
        assert!(matches!(eigenvalue_mu(&cfg, 3, 4), Err(Error::Range(_))));
    }

    #[test]
    fn eigenvalues_match_product_oracle() {
        for &r in &[-0.9, 0.0, 0.5, 2.0, 6.0] {
            for n in [1usize, 7, 40, 200] {
                for ell in 0..=n {
                    let want = mu_product_oracle(r, n, ell);
                    if want < 1e-280 {
                        continue;
                    }
                    let got = eigenvalue_mu(&rho(r), n, ell).unwrap();
                    assert_relative_eq!(got, want, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigenvalues_lie_in_unit_interval_and_decrease() {
        for &r in &[-0.5, 0.0, 3.0] {
            let row = mu_row(&rho(r), 60);
            assert_eq!(row[0], 1.0);
            for w in row.windows(2) {
                assert!(w[1] < w[0] && w[1] > 0.0);
            }
        }
    }

    #[test]
    fn row_matches_pointwise() {
        let cfg = rho(2.5);
        let row = log_mu_row(&cfg, 300);
        for ell in [0, 1, 17, 150, 300] {
            let single = log_eigenvalue_mu(&cfg, 300, ell).unwrap();
            assert!((row[ell] - single).abs() <= 1e-12 * single.abs().max(1.0));
        }
    }

    #[test]
    fn multiplier_examples() {
        for &r in &[-0.9, -0.3, 0.0, 1.0, 7.5] {
            for n in [1usize, 2, 10, 1000, 100_000] {
                let nu1 = multiplier_nu(&rho(r), n, 1).unwrap();
                assert!((nu1 - 1.0).abs() < 1e-13, "rho {r} n {n}: {nu1}");
            }
        }
        assert_relative_eq!(multiplier_nu(&rho(0.0), 2, 2).unwrap(), 0.4, max_relative = 1e-14);
        let cfg = rho(1.0);
        let last = multiplier_nu(&cfg, 10, 10).unwrap();
        assert!(last > 0.0 && last < multiplier_nu(&cfg, 10, 9).unwrap());
        assert!(multiplier_nu(&cfg, 10, 0).is_err());
        assert!(multiplier_nu(&cfg, 10, 11).is_err());
    }

    #[test]
    fn multiplier_identity() {
        for &r in &[-0.9, 0.0, 1.0, 6.0] {
            let cfg = rho(r);
            for k in 2..=200usize {
                let cur = mu_row(&cfg, k);
                let prev = mu_row(&cfg, k - 1);
                for ell in 1..k {
                    let factor = (ell as f64 * (ell as f64 + r)) / (k as f64 * (k as f64 + r));
                    let resid = cur[ell] - prev[ell] - factor * cur[ell];
                    assert!(resid.abs() <= 1e-12 * cur[ell], "rho {r} k {k} l {ell}");
                }
            }
        }
    }

    #[test]
    fn continuous_extension_examples() {
        let cfg = rho(1.0);
        assert_relative_eq!(
            mu_continuous(&cfg, 10, 3.0).unwrap(),
            eigenvalue_mu(&cfg, 10, 3).unwrap(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            mu_continuous(&rho(0.0), 4, 4.0).unwrap(),
            576.0 / 40_320.0,
            max_relative = 1e-13
        );
        assert!((mu_continuous(&cfg, 10, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        assert!(mu_continuous(&cfg, 10, 0.0).is_err());
        assert!(mu_continuous(&cfg, 10, 10.5).is_err());
    }

    #[test]
    fn c_n_examples() {
        assert_relative_eq!(c_n(&rho(0.0), 2, 1.0).unwrap(), 0.5 + 1.0 / 3.0, max_relative = 1e-14);
        assert!(c_n(&rho(0.0), 7, 1e-13).unwrap().abs() < 1e-11);
        let (n, tau, r) = (50usize, 10.0, 1.0);
        let c = c_n(&rho(r), n, tau).unwrap();
        let lo = (1.0 + (2.0 * tau + r) / (n as f64 - tau + 1.0)).ln();
        let hi = (1.0 + (2.0 * tau + r) / (n as f64 - tau)).ln();
        assert!(lo < c && c < hi);
        // 40-digit reference
        assert!((c - 0.417_720_816_638_312_650_344_327_2).abs() < 1e-14);
    }

    #[test]
    fn nu_continuous_matches_integer_multipliers() {
        let cfg = rho(1.0);
        for ell in 1..20 {
            assert_relative_eq!(
                nu_continuous(&cfg, 20, ell as f64).unwrap(),
                multiplier_nu(&cfg, 20, ell).unwrap(),
                max_relative = 1e-10
            );
        }
        assert!(nu_continuous(&cfg, 20, 20.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cfg = rho(1.0);
        let (n, tau) = (20usize, 5.0);
        let h = 1e-4;
        let f = |t| nu_continuous(&cfg, n, t).unwrap();
        let fd1 = (f(tau + h) - f(tau - h)) / (2.0 * h);
        let d1 = nu_prime(&cfg, n, tau).unwrap();
        assert!((fd1 - d1).abs() <= 1e-5 * d1.abs());
        let fd2 = (f(tau + h) - 2.0 * f(tau) + f(tau - h)) / (h * h);
        let d2 = nu_second(&cfg, n, tau).unwrap();
        assert!((fd2 - d2).abs() <= 1e-4 * d2.abs(), "{fd2} vs {d2}");
    }

    #[test]
    fn mu_derivative_is_minus_mu_c() {
        let h = 1e-5;
        for &r in &[0.0, 1.0, 3.0] {
            let cfg = rho(r);
            let n = 40;
            for i in 0..=20 {
                let tau = 1.0 + (n as f64 - 2.0) * i as f64 / 20.0;
                let fd = (mu_continuous(&cfg, n, tau + h).unwrap()
                    - mu_continuous(&cfg, n, tau - h).unwrap())
                    / (2.0 * h);
                let exact = -mu_continuous(&cfg, n, tau).unwrap() * c_n(&cfg, n, tau).unwrap();
                assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "rho {r} tau {tau}");
            }
        }
    }

    #[test]
    fn c_n_derivatives_match_finite_differences() {
        let cfg = rho(0.5);
        let (n, h) = (30usize, 1e-4);
        for tau in [0.5, 3.0, 14.2, 28.0] {
            let fd1 = (c_n(&cfg, n, tau + h).unwrap() - c_n(&cfg, n, tau - h).unwrap()) / (2.0 * h);
            let d1 = c_n_prime(&cfg, n, tau).unwrap();
            assert!((fd1 - d1).abs() <= 1e-7 * d1.abs());
            let fd2 = (c_n_prime(&cfg, n, tau + h).unwrap() - c_n_prime(&cfg, n, tau - h).unwrap())
                / (2.0 * h);
            let d2 = c_n_second(&cfg, n, tau).unwrap();
            assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(1e-6));
        }
    }

    #[test]
    fn tail_sum_bounded_by_one_over_n() {
        for &r in &[0.0, 0.5, 4.0] {
            let cfg = rho(r);
            for n in [1usize, 3, 10, 100, 1000] {
                let s = tail_sum(&cfg, n, 1_000_000);
                assert!(s <= 1.0 / n as f64, "rho {r} n {n}");
            }
        }
        let cfg = rho(0.0);
        let direct: f64 = (6..=10).map(|k| 1.0 / (k * k) as f64).sum();
        assert_relative_eq!(t_n(&cfg, 5), direct, max_relative = 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn multipliers_strictly_decrease(r in -0.99f64..8.0, n in 2usize..400) {
            let row = log_nu_row(&rho(r), n);
            for ell in 1..n {
                proptest::prop_assert!(row[ell] > row[ell + 1]);
            }
        }
    }
}
