use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{normalized_margin, CheckReport, HarnessOptions, NRange, ReportRow, Verdict};
use crate::error::{Error, Result};
use crate::operator::{
    apply_durrmeyer_spectral, apply_p_spectral, apply_q, build_g_n, durrmeyer_error,
    eigen_series_partial,
};
use crate::orthopoly::{cesaro_mean, SpectralCoefficients};
use crate::quadrature::cached_gauss_jacobi;
use crate::special_fn::log_gamma_unchecked;
use crate::spectrum::{
    c_n, c_n_prime, c_n_second, log_mu_row, log_nu_row, nu_prime, nu_row, nu_second, tail_sum,
    WeightConfig,
};

/// The lemma-level checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaId {
    /// `nu_{n,l} > nu_{n,l+1}`.
    L1,
    /// `xi_{n,l} > xi_{n,l+1}`.
    L1Xi,
    /// `l (nu_{n,l} - nu_{n,l+1})` stays bounded.
    L3,
    /// `sum (l+1) |second difference of nu|` stays bounded.
    L4,
    /// Bounds on `C_n`, `C_n'`, `C_n''` and the logarithmic bracket of `C_n`.
    L5,
    /// `n^2 nu_{n,l}`, `tau |nu_n'|`, `tau^2 |nu_n''|` stay bounded.
    L6,
    /// Second difference of `nu` as an integral of `nu_n''` against the hat function.
    Hat,
    /// `Q_n` as a combination of Cesàro means.
    Eq24,
    /// `mu_{k,l} - mu_{k-1,l} = l (l + rho) mu_{k,l} / (k (k + rho))`.
    MultId,
    /// `(1/n) P(D) M_n f = Q_n (M_n f - f)`.
    QId,
    /// `P(D) g_n = (M_n f - M_{2n} f) / t_n`.
    Telescope,
    /// `sum_{l > n} 1 / (l (l + rho)) <= 1/n`.
    TailSum,
    /// Partial sums of `sum_{l > n} P(D) M_l f / (l (l + rho))` against `M_n f - f`.
    Eq4,
}

const RHO_FULL: [f64; 7] = [-0.9, -0.5, 0.0, 0.5, 1.0, 2.5, 6.0];

impl LemmaId {
    pub const ALL: [LemmaId; 13] = [
        LemmaId::L1,
        LemmaId::L1Xi,
        LemmaId::L3,
        LemmaId::L4,
        LemmaId::L5,
        LemmaId::L6,
        LemmaId::Hat,
        LemmaId::Eq24,
        LemmaId::MultId,
        LemmaId::QId,
        LemmaId::Telescope,
        LemmaId::TailSum,
        LemmaId::Eq4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::L1 => "L1",
            LemmaId::L1Xi => "L1-XI",
            LemmaId::L3 => "L3",
            LemmaId::L4 => "L4",
            LemmaId::L5 => "L5",
            LemmaId::L6 => "L6",
            LemmaId::Hat => "HAT",
            LemmaId::Eq24 => "EQ24",
            LemmaId::MultId => "MULT-ID",
            LemmaId::QId => "Q-ID",
            LemmaId::Telescope => "TELESCOPE",
            LemmaId::TailSum => "TAIL-SUM",
            LemmaId::Eq4 => "EQ4",
        }
    }

    /// Checks of the continuous extension, stated for `rho >= 0` only.
    pub fn requires_nonnegative_rho(self) -> bool {
        matches!(
            self,
            LemmaId::L3 | LemmaId::L4 | LemmaId::L5 | LemmaId::L6 | LemmaId::Hat | LemmaId::TailSum
        )
    }

    /// Smallest `n` the check is defined for.
    pub fn min_n(self) -> usize {
        match self {
            LemmaId::L1 | LemmaId::MultId => 2,
            LemmaId::L1Xi | LemmaId::L4 | LemmaId::L6 | LemmaId::Hat => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown lemma id {s:?}")))
    }
}

/// Values of `rho` and `n` a lemma is swept over.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaGrid {
    pub rhos: Vec<f64>,
    pub ns: Vec<usize>,
}

impl LemmaGrid {
    /// Published grid of each check.
    pub fn defaults(id: LemmaId) -> Self {
        let values = |r: NRange| r.values().expect("static range");
        let (rhos, ns): (&[f64], Vec<usize>) = match id {
            LemmaId::L1 => (&RHO_FULL, values(NRange::linear(2, 512))),
            LemmaId::L1Xi => (&RHO_FULL, values(NRange::linear(3, 512))),
            LemmaId::L3 | LemmaId::L4 | LemmaId::L6 => {
                (&[0.0, 1.0, 3.0], values(NRange::dyadic(8, 2048)))
            }
            LemmaId::L5 => (&[0.0, 0.5, 1.0, 3.0], values(NRange::dyadic(8, 256))),
            LemmaId::Hat => (
                &[0.0, 0.5, 1.0, 3.0],
                vec![3, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64],
            ),
            LemmaId::Eq24 => (&RHO_FULL, values(NRange::linear(1, 64))),
            LemmaId::MultId => (&RHO_FULL, values(NRange::linear(2, 200))),
            LemmaId::QId => (&RHO_FULL, values(NRange::linear(1, 32))),
            LemmaId::Telescope => (&RHO_FULL, values(NRange::linear(1, 16))),
            LemmaId::TailSum => (&[0.0, 0.5, 1.0, 3.0, 6.0], values(NRange::dyadic(1, 1024))),
            LemmaId::Eq4 => (&RHO_FULL, vec![1, 4, 16, 64]),
        };
        Self {
            rhos: rhos.to_vec(),
            ns,
        }
    }
}

/// Worst cell seen so far.
#[derive(Debug, Clone, Copy)]
struct Cell {
    margin: f64,
    n: usize,
    at: Option<f64>,
    lhs: f64,
    rhs: f64,
}

impl Cell {
    fn new(n: usize, at: Option<f64>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            margin,
            n,
            at,
            lhs,
            rhs,
        }
    }

    /// Inequality `lhs <= rhs` (or `<`), normalized margin.
    fn ineq(n: usize, at: Option<f64>, lhs: f64, rhs: f64) -> Self {
        Self::new(n, at, lhs, rhs, normalized_margin(lhs, rhs, 0.0))
    }

    /// Identity `lhs = rhs` with residual scaled by `scale`.
    fn ident(n: usize, at: Option<f64>, lhs: f64, rhs: f64, scale: f64) -> Self {
        let r = if scale > 0.0 { (lhs - rhs).abs() / scale } else { (lhs - rhs).abs() };
        Self::new(n, at, lhs, rhs, -r)
    }

    fn row(self, id: &str, cfg: &WeightConfig) -> ReportRow {
        let r = ReportRow::new(id, cfg, self.lhs, self.rhs, self.margin).n(self.n);
        match self.at {
            Some(t) => r.at(t),
            None => r,
        }
    }
}

#[derive(Default)]
struct Worst(Option<Cell>);

impl Worst {
    /// Keep the smaller margin; NaN counts as the worst possible.
    fn push(&mut self, c: Cell) {
        let replace = match self.0 {
            None => true,
            Some(w) => !w.margin.is_nan() && (c.margin.is_nan() || c.margin < w.margin),
        };
        if replace {
            self.0 = Some(c);
        }
    }

    fn get(self, id: &str) -> Result<Cell> {
        self.0
            .ok_or_else(|| Error::Usage(format!("{id}: no admissible grid point")))
    }
}

/// Upper-half sup against 1.05 times the lower-half sup.
fn stabilization(ns: &[usize], sups: &[f64]) -> Result<(Cell, f64)> {
    if sups.len() < 2 {
        return Err(Error::Usage(
            "a boundedness check needs at least two values of n".into(),
        ));
    }
    let half = sups.len() / 2;
    let lower = sups[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (i_up, upper) = sups[half..]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let all = lower.max(upper);
    Ok((Cell::ineq(ns[half + i_up], None, upper, 1.05 * lower), all))
}

/// Interior grid `hi * i / (points + 1)`, `i = 1..=points`, shifted by `lo`.
fn open_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (1..=points).map(move |i| lo + (hi - lo) * i as f64 / (points + 1) as f64)
}

/// Closed grid on `[lo, hi]`.
fn closed_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

fn random_coeffs(cfg: &WeightConfig, band: usize, seed: u64) -> SpectralCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = (0..=band)
        .map(|l| {
            let size = if cfg.dim() == 1 { 1 } else { l + 1 };
            (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect()
        })
        .collect();
    SpectralCoefficients::new(cfg.clone(), blocks).expect("block sizes match")
}

fn cell_seed(opts: &HarnessOptions, rho_index: usize, n: usize) -> u64 {
    opts.seed ^ ((rho_index as u64) << 40) ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

type Rows = Result<Vec<ReportRow>>;

fn check_l1(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let mut worst = Worst::default();
    for &n in ns {
        let row = log_nu_row(cfg, n);
        for l in 1..n {
            let m = -(row[l + 1] - row[l]).exp_m1();
            worst.push(Cell::new(n, Some(l as f64), row[l + 1].exp(), row[l].exp(), m));
        }
    }
    Ok(vec![worst.get("L1")?.row("L1", cfg)])
}

/// `xi_{n,l}` as (sign, log magnitude).
fn log_xi(rho: f64, n: usize, l: usize) -> (f64, f64) {
    let (nf, lf) = (n as f64, l as f64);
    let bracket = nf - lf * (lf + rho + 1.0);
    let mag = log_gamma_unchecked(nf - lf) + log_gamma_unchecked(nf + lf + rho + 1.0);
    let sign = if bracket > 0.0 {
        1.0
    } else if bracket < 0.0 {
        -1.0
    } else {
        0.0
    };
    (sign, mag + bracket.abs().ln())
}

/// Values are reported scaled by the larger of `|xi_{n,l}|`, `|xi_{n,l+1}|`.
fn check_l1_xi(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let rho = cfg.rho();
    let mut worst = Worst::default();
    for &n in ns {
        let mut prev = log_xi(rho, n, 1);
        for l in 1..=(n - 2) {
            let next = log_xi(rho, n, l + 1);
            let top = prev.1.max(next.1);
            let a = if prev.0 == 0.0 { 0.0 } else { prev.0 * (prev.1 - top).exp() };
            let b = if next.0 == 0.0 { 0.0 } else { next.0 * (next.1 - top).exp() };
            worst.push(Cell::new(n, Some(l as f64), b, a, a - b));
            prev = next;
        }
    }
    Ok(vec![worst.get("L1-XI")?.row("L1-XI", cfg)])
}

fn stabilized_row(id: &str, cfg: &WeightConfig, ns: &[usize], sups: &[f64]) -> Result<ReportRow> {
    let (cell, sup) = stabilization(ns, sups)?;
    Ok(cell.row(id, cfg).constant(sup))
}

fn check_l3(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let sups: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let nu = nu_row(cfg, n);
            (1..n)
                .map(|l| l as f64 * (nu[l] - nu[l + 1]))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(vec![stabilized_row("L3", cfg, ns, &sups)?])
}

/// `sum_{l=1}^{n-2} (l+1) |nu_{n,l+2} - 2 nu_{n,l+1} + nu_{n,l}|`.
pub(crate) fn l4_sum(cfg: &WeightConfig, n: usize) -> f64 {
    let nu = nu_row(cfg, n);
    crate::sum::compensated_sum(
        (1..=n.saturating_sub(2)).map(|l| (l + 1) as f64 * (nu[l + 2] - 2.0 * nu[l + 1] + nu[l]).abs()),
    )
}

fn check_l4(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let sups: Vec<f64> = ns.iter().map(|&n| l4_sum(cfg, n)).collect();
    Ok(vec![stabilized_row("L4", cfg, ns, &sups)?])
}

const TAU_POINTS: usize = 200;

fn check_l5(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let rho = cfg.rho();
    let items = [
        "L5a",
        "L5b",
        "L5c",
        "L5d",
        "L5e",
        "L5-darboux-lower",
        "L5-darboux-upper",
        "L5e-corrected",
    ];
    let mut worst: Vec<Worst> = items.iter().map(|_| Worst::default()).collect();
    for &n in ns {
        let nf = n as f64;
        for tau in open_grid(0.0, nf, TAU_POINTS) {
            let at = Some(tau);
            let c = c_n(cfg, n, tau)?;
            let dc = c_n_prime(cfg, n, tau)?;
            let ddc = c_n_second(cfg, n, tau)?;
            let s = 2.0 * tau + rho;
            worst[0].push(Cell::ineq(n, at, c, s / (nf - tau)));
            worst[2].push(Cell::ineq(n, at, dc, (2.0 * nf + rho) / ((nf + tau + rho) * (nf - tau))));
            worst[3].push(Cell::ineq(
                n,
                at,
                (2.0 * nf + rho + 2.0) / ((nf + tau + rho + 1.0) * (nf - tau + 1.0)),
                dc,
            ));
            let e = 2.0 * (s - 1.0) * (2.0 * nf + rho + 1.0)
                / ((nf + tau + rho).powi(2) * (nf - tau + 1.0).powi(2));
            worst[4].push(Cell::ineq(n, at, e, ddc));
            // same bound from the sharp bracket -1/(x-1)^2 <= psi''(x) <= -1/x^2
            worst[7].push(Cell::ineq(n, at, 0.5 * e, ddc));
            worst[5].push(Cell::ineq(n, at, (s / (nf - tau + 1.0)).ln_1p(), c));
            worst[6].push(Cell::ineq(n, at, c, (s / (nf - tau)).ln_1p()));
        }
        if nf > rho {
            for tau in open_grid(0.0, (nf - rho) / 3.0, TAU_POINTS) {
                let c = c_n(cfg, n, tau)?;
                let s = 2.0 * tau + rho;
                worst[1].push(Cell::ineq(n, Some(tau), s / (2.0 * (nf - tau + 1.0)), c));
            }
        }
    }
    items
        .iter()
        .zip(worst)
        .map(|(id, w)| Ok(w.get(id)?.row(id, cfg)))
        .collect()
}

fn check_l6(cfg: &WeightConfig, ns: &[usize], delta: f64, b: f64) -> Rows {
    if !(delta > 0.0 && delta <= 1.0 && b > 0.0) {
        return Err(Error::Usage(format!(
            "L6 needs 0 < delta <= 1 and b > 0, got delta = {delta}, b = {b}"
        )));
    }
    let ns: Vec<usize> = ns
        .iter()
        .copied()
        .filter(|&n| {
            let r = (b * n as f64).sqrt();
            n >= 3 && r >= 1.0 && r <= n as f64 - 1.0
        })
        .collect();
    let mut s0 = Vec::new();
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    for &n in &ns {
        let nf = n as f64;
        let nu = nu_row(cfg, n);
        let first = ((delta * nf).ceil() as usize).max(1);
        s0.push((first..=n).map(|l| nf * nf * nu[l]).fold(f64::NEG_INFINITY, f64::max));
        let mut sup_a = f64::NEG_INFINITY;
        for tau in closed_grid(1.0, nf - 1.0, 2 * TAU_POINTS) {
            sup_a = sup_a.max(tau * nu_prime(cfg, n, tau)?.abs());
        }
        sa.push(sup_a);
        let mut sup_b = f64::NEG_INFINITY;
        for tau in closed_grid(1.0, (b * nf).sqrt(), TAU_POINTS) {
            sup_b = sup_b.max(tau * tau * nu_second(cfg, n, tau)?.abs());
        }
        sb.push(sup_b);
    }
    Ok(vec![
        stabilized_row("L6-0", cfg, &ns, &s0)?,
        stabilized_row("L6a", cfg, &ns, &sa)?,
        stabilized_row("L6b", cfg, &ns, &sb)?,
    ])
}

const HAT_NODES: usize = 24;

/// Residuals are relative to `|nu_l| + 2 |nu_{l+1}| + |nu_{l+2}|`.
fn check_hat(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let rule = cached_gauss_jacobi(0.0, 0.0, HAT_NODES)?;
    let mut worst = Worst::default();
    for &n in ns {
        let nu = nu_row(cfg, n);
        for l in 1..=(n - 2) {
            let lf = l as f64;
            let mut acc = crate::sum::NeumaierSum::new();
            for (x, w) in rule.nodes().zip(rule.weights()) {
                let s = x[0];
                acc.add(w * s * nu_second(cfg, n, lf + s)?);
                acc.add(w * s * nu_second(cfg, n, lf + 2.0 - s)?);
            }
            let diff = nu[l + 2] - 2.0 * nu[l + 1] + nu[l];
            let scale = nu[l].abs() + 2.0 * nu[l + 1].abs() + nu[l + 2].abs();
            worst.push(Cell::ident(n, Some(lf), diff, acc.value(), scale));
        }
    }
    Ok(vec![worst.get("HAT")?.row("HAT", cfg)])
}

/// `Q_n f` assembled from Cesàro means; `n = 1` uses the generic second
/// difference with `nu` set to zero outside `[1, n]`.
pub fn q_from_cesaro(
    cfg: &WeightConfig,
    n: usize,
    f: &SpectralCoefficients,
) -> Result<SpectralCoefficients> {
    let nu_raw = nu_row(cfg, n);
    let nu = |l: usize| if (1..=n).contains(&l) { nu_raw[l] } else { 0.0 };
    let mut terms: Vec<(usize, f64)> = Vec::new();
    if n == 1 {
        for l in 0..=1 {
            terms.push((l, (l + 1) as f64 * (nu(l + 2) - 2.0 * nu(l + 1) + nu(l))));
        }
    } else {
        for l in 1..=(n - 2) {
            terms.push((l, (l + 1) as f64 * (nu(l + 2) - 2.0 * nu(l + 1) + nu(l))));
        }
        terms.push((n - 1, n as f64 * (nu(n - 1) - 2.0 * nu(n))));
        terms.push((n, (n + 1) as f64 * nu(n)));
        terms.push((0, nu(2) - 2.0 * nu(1)));
    }
    let mut acc = SpectralCoefficients::zeros(cfg, f.max_degree());
    for (l, coef) in terms {
        let s = cesaro_mean(f, l)?;
        acc = acc.combine(1.0, &s.padded(f.max_degree()), coef)?;
    }
    Ok(acc)
}

fn coefficient_cell(n: usize, lhs: &SpectralCoefficients, rhs: &SpectralCoefficients) -> Cell {
    let scale = lhs.max_abs().max(rhs.max_abs());
    let r = lhs.max_abs_diff(rhs);
    Cell::new(n, None, lhs.max_abs(), rhs.max_abs(), if scale > 0.0 { -r / scale } else { -r })
}

fn check_eq24(cfg: &WeightConfig, ns: &[usize], seeds: impl Fn(usize) -> u64) -> Rows {
    let mut worst = Worst::default();
    for &n in ns {
        let f = random_coeffs(cfg, n + 2, seeds(n));
        worst.push(coefficient_cell(n, &q_from_cesaro(cfg, n, &f)?, &apply_q(cfg, n, &f)?));
    }
    Ok(vec![worst.get("EQ24")?.row("EQ24", cfg)])
}

fn check_mult_id(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let rho = cfg.rho();
    let mut worst = Worst::default();
    for &k in ns {
        let kf = k as f64;
        let cur = log_mu_row(cfg, k);
        let prev = log_mu_row(cfg, k - 1);
        for l in 1..k {
            let lf = l as f64;
            // mu_{k,l} (1 - l(l+rho)/(k(k+rho))) against mu_{k-1,l}, both over mu_{k,l}
            let factor = (kf - lf) * (kf + lf + rho) / (kf * (kf + rho));
            let ratio = (prev[l] - cur[l]).exp();
            worst.push(Cell::new(k, Some(lf), factor, ratio, -(factor - ratio).abs()));
        }
    }
    Ok(vec![worst.get("MULT-ID")?.row("MULT-ID", cfg)])
}

fn check_q_id(cfg: &WeightConfig, ns: &[usize], seeds: impl Fn(usize) -> u64) -> Rows {
    let mut worst = Worst::default();
    for &n in ns {
        let f = random_coeffs(cfg, n + 3, seeds(n));
        let lhs = apply_p_spectral(cfg, &apply_durrmeyer_spectral(cfg, n, &f)?)?
            .scaled(|_| 1.0 / n as f64);
        let rhs = apply_q(cfg, n, &durrmeyer_error(cfg, n, &f)?)?;
        worst.push(coefficient_cell(n, &lhs, &rhs));
    }
    Ok(vec![worst.get("Q-ID")?.row("Q-ID", cfg)])
}

fn check_telescope(cfg: &WeightConfig, ns: &[usize], seeds: impl Fn(usize) -> u64) -> Rows {
    let mut worst = Worst::default();
    for &n in ns {
        let f = random_coeffs(cfg, 2 * n + 2, seeds(n));
        let (g, t) = build_g_n(cfg, n, &f)?;
        let lhs = apply_p_spectral(cfg, &g)?;
        let rhs = apply_durrmeyer_spectral(cfg, n, &f)?
            .combine(1.0 / t, &apply_durrmeyer_spectral(cfg, 2 * n, &f)?, -1.0 / t)?;
        worst.push(coefficient_cell(n, &lhs, &rhs));
    }
    Ok(vec![worst.get("TELESCOPE")?.row("TELESCOPE", cfg)])
}

/// Upper summation limit of the tail-sum check.
pub const TAIL_SUM_UPPER: usize = 1_000_000;

fn check_tail_sum(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let mut worst = Worst::default();
    for &n in ns {
        worst.push(Cell::ineq(n, None, tail_sum(cfg, n, TAIL_SUM_UPPER), 1.0 / n as f64));
    }
    Ok(vec![worst.get("TAIL-SUM")?.row("TAIL-SUM", cfg)])
}

/// Number of terms summed beyond `n` in the series check.
pub const EQ4_TERMS: usize = 4096;

fn check_eq4(cfg: &WeightConfig, ns: &[usize]) -> Rows {
    let mut worst = Worst::default();
    for &n in ns {
        let upper = n + EQ4_TERMS;
        let top = log_mu_row(cfg, upper);
        let low = log_mu_row(cfg, n);
        for j in 0..=10 {
            let partial = eigen_series_partial(cfg, n, j, upper);
            let mu_n = low.get(j).map_or(0.0, |v| v.exp());
            let expected = top[j].exp() - mu_n;
            let scale = partial.abs().max(expected.abs());
            worst.push(Cell::ident(n, Some(j as f64), partial, expected, scale));
        }
    }
    Ok(vec![worst.get("EQ4")?.row("EQ4", cfg)])
}

/// Run one lemma-level check over `grid`, one row per sub-item and `rho`.
pub fn check_lemma(id: LemmaId, grid: &LemmaGrid, opts: &HarnessOptions) -> Result<CheckReport> {
    let started = Instant::now();
    if grid.rhos.is_empty() {
        return Err(Error::Usage(format!("{id}: empty rho grid")));
    }
    if id.requires_nonnegative_rho() {
        if let Some(r) = grid.rhos.iter().find(|r| **r < 0.0) {
            return Err(Error::Domain(format!("{id} requires rho >= 0, got {r}")));
        }
    }
    let ns: Vec<usize> = grid.ns.iter().copied().filter(|&n| n >= id.min_n()).collect();
    if ns.is_empty() {
        return Err(Error::Usage(format!(
            "{id}: no n >= {} in the requested range",
            id.min_n()
        )));
    }
    let per_rho: Vec<Vec<ReportRow>> = grid
        .rhos
        .par_iter()
        .enumerate()
        .map(|(i, &rho)| {
            let cfg = WeightConfig::with_rho(rho)?;
            let seeds = |n: usize| cell_seed(opts, i, n);
            match id {
                LemmaId::L1 => check_l1(&cfg, &ns),
                LemmaId::L1Xi => check_l1_xi(&cfg, &ns),
                LemmaId::L3 => check_l3(&cfg, &ns),
                LemmaId::L4 => check_l4(&cfg, &ns),
                LemmaId::L5 => check_l5(&cfg, &ns),
                LemmaId::L6 => check_l6(&cfg, &ns, opts.delta, opts.b),
                LemmaId::Hat => check_hat(&cfg, &ns),
                LemmaId::Eq24 => check_eq24(&cfg, &ns, seeds),
                LemmaId::MultId => check_mult_id(&cfg, &ns),
                LemmaId::QId => check_q_id(&cfg, &ns, seeds),
                LemmaId::Telescope => check_telescope(&cfg, &ns, seeds),
                LemmaId::TailSum => check_tail_sum(&cfg, &ns),
                LemmaId::Eq4 => check_eq4(&cfg, &ns),
            }
        })
        .collect::<Result<_>>()?;
    let verdict = match id {
        LemmaId::L1 | LemmaId::L1Xi | LemmaId::L5 | LemmaId::TailSum => Verdict::Strict,
        LemmaId::L3 | LemmaId::L4 | LemmaId::L6 => Verdict::Within(0.0),
        LemmaId::Hat => Verdict::Within(opts.tol.integral),
        _ => Verdict::Within(opts.tol.identity),
    };
    let grid_desc = format!(
        "rho in {:?}; n in {}..={} ({} values)",
        grid.rhos,
        ns[0],
        ns[ns.len() - 1],
        ns.len()
    );
    let rows = per_rho.into_iter().flatten().collect();
    Ok(CheckReport::from_rows(id.as_str(), grid_desc, verdict, rows, started))
}
