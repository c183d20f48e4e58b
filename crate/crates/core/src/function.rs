use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orthopoly::{OrthoBasis, SpectralCoefficients};
use crate::polynomial::Polynomial;
use crate::quadrature::{norm_interval, norm_triangle, Exponent};
use crate::spectrum::WeightConfig;

/// Functions driving the inequality checks. On the triangle the univariate
/// variants act on the first coordinate `x_1`.
#[derive(Debug, Clone)]
pub enum TestFunction {
    Constant(f64),
    /// Polynomial in `x_1`.
    Polynomial(Polynomial),
    /// Finite expansion in an orthonormal eigenbasis.
    Expansion(Arc<OrthoBasis>, SpectralCoefficients),
    /// `|x_1 - center|^power`.
    AbsPower { center: f64, power: f64 },
    /// Indicator of `x_1 >= at`.
    Step { at: f64 },
}

impl TestFunction {
    pub fn expansion(basis: Arc<OrthoBasis>, coeffs: SpectralCoefficients) -> Result<Self> {
        if coeffs.cfg() != basis.cfg() {
            return Err(Error::Usage("expansion and basis use different weights".into()));
        }
        if coeffs.effective_degree() > basis.max_degree() {
            return Err(Error::BandExceeded(format!(
                "expansion of degree {} on a basis of degree {}",
                coeffs.effective_degree(),
                basis.max_degree()
            )));
        }
        Ok(TestFunction::Expansion(basis, coeffs))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Polynomial(p) => p.eval(x[0]),
            TestFunction::Expansion(basis, c) => {
                basis.evaluate(c, x).expect("validated at construction")
            }
            TestFunction::AbsPower { center, power } => (x[0] - center).abs().powf(*power),
            TestFunction::Step { at } => {
                if x[0] >= *at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Total degree when the function is a single polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            TestFunction::Constant(_) => Some(0),
            TestFunction::Polynomial(p) => Some(p.degree()),
            TestFunction::Expansion(_, c) => Some(c.effective_degree()),
            TestFunction::AbsPower { power, .. }
                if power.fract() == 0.0 && (*power as u64) % 2 == 0 =>
            {
                Some(*power as usize)
            }
            _ => None,
        }
    }

    /// Points `x_1 = c` where the function is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        if self.polynomial_degree().is_some() {
            return Vec::new();
        }
        match self {
            TestFunction::AbsPower { center, .. } => vec![*center],
            TestFunction::Step { at } => vec![*at],
            _ => Vec::new(),
        }
    }

    /// Degree of the polynomial pieces between kinks; `None` if the pieces
    /// are not polynomials.
    pub fn piece_degree(&self) -> Option<usize> {
        match self {
            TestFunction::AbsPower { power, .. } if power.fract() == 0.0 => Some(*power as usize),
            TestFunction::Step { .. } => Some(0),
            _ => self.polynomial_degree(),
        }
    }

    /// Coefficients against `basis` up to its band, with the energy above
    /// the band recorded as the tail.
    pub fn project(&self, basis: &OrthoBasis) -> Result<SpectralCoefficients> {
        if let TestFunction::Expansion(own, c) = self {
            if own.cfg() == basis.cfg() {
                return Ok(if c.max_degree() >= basis.max_degree() {
                    c.truncated(basis.max_degree())
                } else {
                    c.padded(basis.max_degree())
                });
            }
        }
        let piece = self.piece_degree().unwrap_or(basis.max_degree());
        basis.project_piecewise(|x| self.eval(x), &self.kinks(), piece)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "const({c})"),
            TestFunction::Polynomial(p) => write!(f, "poly(deg {})", p.degree()),
            TestFunction::Expansion(_, c) => write!(f, "expansion(deg {})", c.effective_degree()),
            TestFunction::AbsPower { center, power } => write!(f, "|x-{center}|^{power}"),
            TestFunction::Step { at } => write!(f, "step({at})"),
        }
    }
}

/// A test function together with its coefficients on a fixed basis; computes
/// `||f - g||_p` and `||g||_p` for band-limited `g`.
///
/// At `p = 2` everything goes through Parseval (including the tail energy of
/// `f`). Otherwise the functions are sampled: band-limited `f` is evaluated
/// through its expansion, anything else pointwise with the rule split at its
/// kinks.
#[derive(Debug, Clone)]
pub struct ProjectedFunction {
    f: TestFunction,
    basis: Arc<OrthoBasis>,
    coeffs: SpectralCoefficients,
}

impl ProjectedFunction {
    pub fn new(f: TestFunction, basis: Arc<OrthoBasis>) -> Result<Self> {
        let coeffs = f.project(&basis)?;
        Ok(Self { f, basis, coeffs })
    }

    pub fn function(&self) -> &TestFunction {
        &self.f
    }

    pub fn basis(&self) -> &Arc<OrthoBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &SpectralCoefficients {
        &self.coeffs
    }

    /// True when the stored coefficients represent `f` exactly.
    pub fn is_band_limited(&self) -> bool {
        self.coeffs.tail_energy() == 0.0 && self.f.polynomial_degree().is_some()
    }

    /// `||g||_{p, w}` for band-limited `g`.
    pub fn norm_of(&self, g: &SpectralCoefficients, p: Exponent) -> Result<f64> {
        expansion_norm(&self.basis, g, p)
    }

    /// `||f - g||_{p, w}` for band-limited `g`.
    pub fn distance(&self, g: &SpectralCoefficients, p: Exponent) -> Result<f64> {
        if g.tail_energy() > 0.0 {
            return Err(Error::Usage("the comparison function must be band-limited".into()));
        }
        let diff = self.coeffs.sub(g)?;
        if p.is_two() || self.is_band_limited() {
            return self.norm_of(&diff, p);
        }
        let eval = self.basis.evaluator(g)?;
        let degree = g.effective_degree().max(self.f.piece_degree().unwrap_or(0));
        sampled_norm(self.basis.cfg(), |x| self.f.eval(x) - eval(x), &self.f.kinks(), degree, p)
    }

    /// `||f||_{p, w}`.
    pub fn norm(&self, p: Exponent) -> Result<f64> {
        self.distance(&SpectralCoefficients::zeros(self.basis.cfg(), 0), p)
    }
}

fn sampled_norm<F: Fn(&[f64]) -> f64>(
    cfg: &WeightConfig,
    h: F,
    kinks: &[f64],
    degree: usize,
    p: Exponent,
) -> Result<f64> {
    match cfg.dim() {
        1 => norm_interval(cfg, |x| h(&[x]), p, kinks, degree),
        _ => norm_triangle(cfg, h, p, kinks, degree),
    }
}

/// `||g||_{p, w}` for an expansion on `basis`; Parseval at `p = 2`.
pub fn expansion_norm(basis: &OrthoBasis, g: &SpectralCoefficients, p: Exponent) -> Result<f64> {
    if p.is_two() {
        return Ok(g.l2_norm());
    }
    if g.tail_energy() > 0.0 {
        return Err(Error::BandExceeded("cannot sample a function with a tail".into()));
    }
    let eval = basis.evaluator(g)?;
    sampled_norm(basis.cfg(), eval, &[], g.effective_degree(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kinks_and_degrees() {
        let f = TestFunction::AbsPower {
            center: 0.3,
            power: 1.0,
        };
        assert_eq!(f.kinks(), vec![0.3]);
        assert_eq!(f.piece_degree(), Some(1));
        assert_eq!(f.polynomial_degree(), None);
        let g = TestFunction::AbsPower {
            center: 0.3,
            power: 2.0,
        };
        assert!(g.kinks().is_empty());
        assert_eq!(TestFunction::Step { at: 0.7 }.eval(&[0.7]), 1.0);
        assert_eq!(TestFunction::Step { at: 0.7 }.eval(&[0.69]), 0.0);
    }

    #[test]
    fn projection_of_polynomial_matches_expansion() {
        let cfg = WeightConfig::interval(0.5, 0.0).unwrap();
        let basis = Arc::new(OrthoBasis::new(&cfg, 6).unwrap());
        let p = TestFunction::Polynomial(Polynomial::new(vec![0.5, -1.0, 0.0, 2.0]));
        let c = p.project(&basis).unwrap();
        assert_eq!(c.tail_energy(), 0.0);
        let e = TestFunction::expansion(Arc::clone(&basis), c.clone()).unwrap();
        for x in [0.0, 0.4, 1.0] {
            assert_relative_eq!(e.eval(&[x]), p.eval(&[x]), epsilon = 1e-13);
        }
        assert_eq!(e.project(&basis).unwrap(), c);
    }

    #[test]
    fn projected_norms_agree_across_methods() {
        let cfg = WeightConfig::interval(0.5, -0.5).unwrap();
        let basis = Arc::new(OrthoBasis::new(&cfg, 128).unwrap());
        let f = ProjectedFunction::new(
            TestFunction::AbsPower {
                center: 0.3,
                power: 1.0,
            },
            Arc::clone(&basis),
        )
        .unwrap();
        let rule = crate::quadrature::split_interval_rule(0.5, -0.5, &[0.3], 40).unwrap();
        let l1 = rule.integrate(|x| (x[0] - 0.3).abs());
        let l2 = rule.integrate(|x| (x[0] - 0.3).powi(2)).sqrt();
        assert_relative_eq!(f.norm(Exponent::ONE).unwrap(), l1, max_relative = 1e-13);
        assert_relative_eq!(f.norm(Exponent::TWO).unwrap(), l2, max_relative = 1e-12);
        assert_relative_eq!(f.norm(Exponent::Infinity).unwrap(), 0.7, max_relative = 1e-15);
        // distance to a band-limited g: sampled and Parseval agree at p = 2
        let g = f.coeffs().truncated(5);
        let by_parseval = f.distance(&g, Exponent::TWO).unwrap();
        let eval = basis.evaluator(&g).unwrap();
        let sampled = crate::quadrature::norm_interval(
            &cfg,
            |x| (x - 0.3).abs() - eval(&[x]),
            Exponent::TWO,
            &[0.3],
            5,
        )
        .unwrap();
        assert_relative_eq!(by_parseval, sampled, max_relative = 1e-9);
    }
}
