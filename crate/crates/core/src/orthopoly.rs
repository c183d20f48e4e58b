//! Orthonormal bases of the eigenspaces `V_l` and coefficient-space operations.
//!
//! On the interval the basis is the orthonormal Jacobi family for
//! `x^a (1 - x)^b`. On the triangle it is the collapsed-coordinate
//! (Koornwinder) product
//!
//! ```text
//! phi_{l,i}(x) = s^i q_i(x_2 / s) * h^{(i)}_{l-i}(x_1),   s = 1 - x_1,
//! ```
//!
//! with `q_i` orthonormal for `v^{a2} (1 - v)^{a3}` and `h^{(i)}` orthonormal
//! for `u^{a1} (1 - u)^{a2 + a3 + 1 + 2i}`. The factor `s^i q_i(x_2 / s)` is
//! generated by a homogenized recurrence, so nothing is divided by `s`.
//! Block `l` holds the `l + 1` functions `phi_{l,0}, ..., phi_{l,l}`.

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::{rule_for, JacobiRecurrence};
use crate::spectrum::WeightConfig;
use crate::sum::NeumaierSum;

/// Coefficients of a function against the orthonormal eigenbasis, grouped by degree.
///
/// `tail_energy` is the squared `L_2` norm of the part of the function above
/// the stored band; it is zero for band-limited functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    cfg: WeightConfig,
    blocks: Vec<Vec<f64>>,
    tail_energy: f64,
}

fn block_len(dim: usize, ell: usize) -> usize {
    if dim == 1 {
        1
    } else {
        ell + 1
    }
}

impl SpectralCoefficients {
    /// Validates block sizes: one coefficient per degree for d = 1, `l + 1` for d = 2.
    pub fn new(cfg: WeightConfig, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Usage("at least the degree-0 block is required".into()));
        }
        if cfg.dim() > 2 {
            return Err(Error::Usage(format!(
                "coefficient blocks are defined for d <= 2, got d = {}",
                cfg.dim()
            )));
        }
        for (ell, b) in blocks.iter().enumerate() {
            let want = block_len(cfg.dim(), ell);
            if b.len() != want {
                return Err(Error::Usage(format!(
                    "block {ell} has {} coefficients, expected {want}",
                    b.len()
                )));
            }
        }
        Ok(Self {
            cfg,
            blocks,
            tail_energy: 0.0,
        })
    }

    pub fn zeros(cfg: &WeightConfig, max_degree: usize) -> Self {
        let blocks = (0..=max_degree)
            .map(|l| vec![0.0; block_len(cfg.dim(), l)])
            .collect();
        Self {
            cfg: cfg.clone(),
            blocks,
            tail_energy: 0.0,
        }
    }

    /// The single basis function `phi_{ell, j}` as a coefficient vector.
    pub fn unit(cfg: &WeightConfig, ell: usize, j: usize) -> Result<Self> {
        let mut c = Self::zeros(cfg, ell);
        let slot = c.blocks[ell]
            .get_mut(j)
            .ok_or_else(|| Error::Range(format!("intra-degree index {j} out of range")))?;
        *slot = 1.0;
        Ok(c)
    }

    pub(crate) fn with_tail(mut self, tail_energy: f64) -> Self {
        self.tail_energy = tail_energy.max(0.0);
        self
    }

    pub fn cfg(&self) -> &WeightConfig {
        &self.cfg
    }

    pub fn max_degree(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, ell: usize) -> &[f64] {
        self.blocks.get(ell).map_or(&[], Vec::as_slice)
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn tail_energy(&self) -> f64 {
        self.tail_energy
    }

    /// Largest degree with a nonzero coefficient (0 for the zero function).
    pub fn effective_degree(&self) -> usize {
        self.blocks
            .iter()
            .rposition(|b| b.iter().any(|c| *c != 0.0))
            .unwrap_or(0)
    }

    /// `||P_l f||_2^2`.
    pub fn block_energy(&self, ell: usize) -> f64 {
        self.block(ell).iter().map(|c| c * c).sum()
    }

    /// `||f||_{2, w}` by Parseval, including the tail.
    pub fn l2_norm(&self) -> f64 {
        let mut acc: NeumaierSum = (0..self.blocks.len()).map(|l| self.block_energy(l)).collect();
        acc.add(self.tail_energy);
        acc.value().sqrt()
    }

    /// Multiply block `l` by `factor(l)`; drops the tail.
    pub fn scaled<F: Fn(usize) -> f64>(&self, factor: F) -> Self {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(l, b)| {
                let s = factor(l);
                b.iter().map(|c| c * s).collect()
            })
            .collect();
        Self {
            cfg: self.cfg.clone(),
            blocks,
            tail_energy: 0.0,
        }
    }

    /// Keep blocks `0..=n`, dropping the rest and the tail.
    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.padded(n);
        out.blocks.truncate(n + 1);
        out.tail_energy = 0.0;
        out
    }

    /// Same function with zero blocks appended up to degree `n`.
    pub fn padded(&self, n: usize) -> Self {
        let mut out = self.clone();
        for l in out.blocks.len()..=n {
            out.blocks.push(vec![0.0; block_len(self.cfg.dim(), l)]);
        }
        out
    }

    fn check_same_weight(&self, other: &Self) -> Result<()> {
        if self.cfg == other.cfg {
            Ok(())
        } else {
            Err(Error::Usage("coefficient vectors for different weights".into()))
        }
    }

    /// `a * self + b * other`. Tails combine only when at most one is nonzero
    /// (the band-limited part cannot interfere with the tail).
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_weight(other)?;
        if self.tail_energy > 0.0 && other.tail_energy > 0.0 {
            return Err(Error::Usage(
                "cannot combine two functions that both have content above the band".into(),
            ));
        }
        let n = self.max_degree().max(other.max_degree());
        let (x, y) = (self.padded(n), other.padded(n));
        let blocks = x
            .blocks
            .iter()
            .zip(&y.blocks)
            .map(|(p, q)| p.iter().zip(q).map(|(u, v)| a * u + b * v).collect())
            .collect();
        Ok(Self {
            cfg: self.cfg.clone(),
            blocks,
            tail_energy: a * a * self.tail_energy + b * b * other.tail_energy,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Largest absolute coefficient difference (blocks padded with zeros).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.max_degree().max(other.max_degree());
        let (x, y) = (self.padded(n), other.padded(n));
        x.blocks
            .iter()
            .flatten()
            .zip(y.blocks.iter().flatten())
            .fold(0.0, |m, (u, v)| m.max((u - v).abs()))
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coefficients in flat order: degree-major, intra-degree index minor.
    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flatten().copied()
    }
}

/// `S_n f`: keep the blocks of degree at most `n`. Orders above the band are
/// fine for band-limited input and an error when `f` has a tail.
pub fn partial_sum(coeffs: &SpectralCoefficients, n: usize) -> Result<SpectralCoefficients> {
    if n > coeffs.max_degree() && coeffs.tail_energy() > 0.0 {
        return Err(Error::BandExceeded(format!(
            "partial sum of order {n} exceeds the stored band {}",
            coeffs.max_degree()
        )));
    }
    Ok(coeffs.truncated(n.min(coeffs.max_degree())))
}

/// First-order Cesàro mean `(1 / (n + 1)) sum_{k=0}^{n} S_k f`, in closed form:
/// block `l <= n` is scaled by `(n + 1 - l) / (n + 1)`.
pub fn cesaro_mean(coeffs: &SpectralCoefficients, n: usize) -> Result<SpectralCoefficients> {
    let s = partial_sum(coeffs, n)?;
    let m = (n + 1) as f64;
    Ok(s.scaled(|l| (m - l as f64) / m))
}

#[derive(Debug, Clone)]
enum Family {
    Interval(JacobiRecurrence),
    Triangle {
        v: JacobiRecurrence,
        u: Vec<JacobiRecurrence>,
    },
}

/// Orthonormal eigenbasis up to a fixed degree for one weight.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    cfg: WeightConfig,
    max_degree: usize,
    family: Family,
}

impl OrthoBasis {
    pub fn new(cfg: &WeightConfig, max_degree: usize) -> Result<Self> {
        let al = cfg.alphas();
        let family = match cfg.dim() {
            1 => Family::Interval(JacobiRecurrence::new(al[0], al[1], max_degree + 1)?),
            2 => {
                let v = JacobiRecurrence::new(al[1], al[2], max_degree + 1)?;
                let u = (0..=max_degree)
                    .map(|i| {
                        JacobiRecurrence::new(
                            al[0],
                            al[1] + al[2] + 1.0 + 2.0 * i as f64,
                            max_degree - i + 1,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Family::Triangle { v, u }
            }
            d => {
                return Err(Error::Usage(format!(
                    "orthonormal bases are built for d = 1 and d = 2, got d = {d}"
                )))
            }
        };
        Ok(Self {
            cfg: cfg.clone(),
            max_degree,
            family,
        })
    }

    pub fn cfg(&self) -> &WeightConfig {
        &self.cfg
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of basis functions of degree at most `n`.
    pub fn count_up_to(&self, n: usize) -> usize {
        match self.cfg.dim() {
            1 => n + 1,
            _ => (n + 1) * (n + 2) / 2,
        }
    }

    fn offset(&self, ell: usize) -> usize {
        match self.cfg.dim() {
            1 => ell,
            _ => ell * (ell + 1) / 2,
        }
    }

    /// Values of every basis function of degree at most `n` at `x`, in flat order.
    pub fn eval_all_into(&self, x: &[f64], n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.count_up_to(n), 0.0);
        match &self.family {
            Family::Interval(rec) => rec.eval_into(x[0], out),
            Family::Triangle { v, u } => {
                let (x1, x2) = (x[0], x[1]);
                let s = 1.0 - x1;
                let mut h = vec![0.0; n + 1];
                let (mut g_prev, mut g) = (0.0, v.mass.sqrt().recip());
                for i in 0..=n {
                    let hs = &mut h[..n - i + 1];
                    u[i].eval_into(x1, hs);
                    for (j, hj) in hs.iter().enumerate() {
                        let ell = i + j;
                        out[ell * (ell + 1) / 2 + i] = g * hj;
                    }
                    if i < n {
                        let back = if i == 0 { 0.0 } else { v.off[i - 1] * s * s };
                        let next = ((x2 - v.diag[i] * s) * g - back * g_prev) / v.off[i];
                        g_prev = g;
                        g = next;
                    }
                }
            }
        }
    }

    pub fn eval_all(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut out = Vec::new();
        self.eval_all_into(x, n, &mut out);
        out
    }

    /// `phi_{ell, j}(x)`.
    pub fn basis_eval(&self, ell: usize, j: usize, x: &[f64]) -> Result<f64> {
        if ell > self.max_degree {
            return Err(Error::Range(format!(
                "degree {ell} exceeds the basis band {}",
                self.max_degree
            )));
        }
        if j >= block_len(self.cfg.dim(), ell) {
            return Err(Error::Range(format!(
                "intra-degree index {j} out of range for degree {ell}"
            )));
        }
        Ok(self.eval_all(x, ell)[self.offset(ell) + j])
    }

    fn check_coeffs(&self, coeffs: &SpectralCoefficients) -> Result<()> {
        if coeffs.cfg() != &self.cfg {
            return Err(Error::Usage("coefficients belong to a different weight".into()));
        }
        if coeffs.effective_degree() > self.max_degree {
            return Err(Error::BandExceeded(format!(
                "coefficients reach degree {}, basis stops at {}",
                coeffs.effective_degree(),
                self.max_degree
            )));
        }
        Ok(())
    }

    /// `sum_{l, j} c_{l,j} phi_{l,j}(x)`.
    pub fn evaluate(&self, coeffs: &SpectralCoefficients, x: &[f64]) -> Result<f64> {
        self.check_coeffs(coeffs)?;
        let n = coeffs.effective_degree();
        let vals = self.eval_all(x, n);
        Ok(vals.iter().zip(coeffs.flat()).map(|(v, c)| v * c).sum())
    }

    /// Evaluator closure with a reusable scratch buffer, for many points.
    pub fn evaluator<'a>(
        &'a self,
        coeffs: &'a SpectralCoefficients,
    ) -> Result<impl Fn(&[f64]) -> f64 + 'a> {
        self.check_coeffs(coeffs)?;
        let n = coeffs.effective_degree();
        let flat: Vec<f64> = coeffs.flat().take(self.count_up_to(n)).collect();
        Ok(move |x: &[f64]| {
            let vals = self.eval_all(x, n);
            let mut acc = NeumaierSum::new();
            for (v, c) in vals.iter().zip(&flat) {
                acc.add(v * c);
            }
            acc.value()
        })
    }

    /// Inner products `<f, phi_{l,j}>_w` for all `l <= max_degree`.
    ///
    /// `f` must be a polynomial of degree at most `piece_degree` between
    /// consecutive `kinks` (lines `x_1 = c` on the triangle); the rule is
    /// split there and is exact for every inner product. When `f` is not a
    /// single polynomial of degree `<= max_degree`, the energy above the band
    /// is recorded from `||f||_2^2 - sum c^2`.
    pub fn project_piecewise<F: Fn(&[f64]) -> f64>(
        &self,
        f: F,
        kinks: &[f64],
        piece_degree: usize,
    ) -> Result<SpectralCoefficients> {
        let band_limited = kinks.is_empty() && piece_degree <= self.max_degree;
        let degree = if band_limited {
            self.max_degree + piece_degree
        } else {
            self.max_degree + piece_degree.max(self.max_degree)
        };
        let rule = rule_for(&self.cfg, degree, kinks)?;
        let count = self.count_up_to(self.max_degree);
        let mut sums = vec![NeumaierSum::new(); count];
        let mut energy = NeumaierSum::new();
        let mut vals = Vec::with_capacity(count);
        for (x, w) in rule.nodes().zip(rule.weights()) {
            let fx = f(x);
            energy.add(w * fx * fx);
            self.eval_all_into(x, self.max_degree, &mut vals);
            for (acc, v) in sums.iter_mut().zip(&vals) {
                acc.add(w * fx * v);
            }
        }
        let flat: Vec<f64> = sums.iter().map(NeumaierSum::value).collect();
        let mut blocks = Vec::with_capacity(self.max_degree + 1);
        for ell in 0..=self.max_degree {
            let o = self.offset(ell);
            blocks.push(flat[o..o + block_len(self.cfg.dim(), ell)].to_vec());
        }
        let coeffs = SpectralCoefficients::new(self.cfg.clone(), blocks)?;
        if band_limited {
            return Ok(coeffs);
        }
        let captured: f64 = flat.iter().map(|c| c * c).sum();
        Ok(coeffs.with_tail(energy.value() - captured))
    }

    /// Monomial form of `phi_ell` on the interval.
    pub fn monomial_form(&self, ell: usize) -> Result<Polynomial> {
        let Family::Interval(rec) = &self.family else {
            return Err(Error::Usage("monomial form is available for d = 1 only".into()));
        };
        if ell > self.max_degree {
            return Err(Error::Range(format!("degree {ell} beyond basis band")));
        }
        let mut prev = Polynomial::constant(0.0);
        let mut cur = Polynomial::constant(rec.mass.sqrt().recip());
        for k in 0..ell {
            let shifted = &(&Polynomial::x() * &cur) - &cur.scale(rec.diag[k]);
            let back = if k == 0 { 0.0 } else { rec.off[k - 1] };
            let next = (&shifted - &prev.scale(back)).scale(rec.off[k].recip());
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }
}
