use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{ProjectedFunction, TestFunction};
use crate::orthopoly::{OrthoBasis, SpectralCoefficients};
use crate::spectrum::WeightConfig;

/// Degree of the random polynomials.
pub const RANDOM_DEGREE: usize = 8;
/// Number of random polynomials.
pub const RANDOM_COUNT: usize = 20;
/// Degrees of the eigenfunctions in the suite.
pub const EIGEN_DEGREES: [usize; 5] = [1, 2, 3, 5, 8];
/// Spectral band for functions that are not polynomials.
pub const KINK_BAND: usize = 256;

/// Which part of the function suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteSelector {
    Full,
    Random,
    Eigen,
    Kink,
}

impl FromStr for SuiteSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "all" => Ok(SuiteSelector::Full),
            "random" => Ok(SuiteSelector::Random),
            "eigen" => Ok(SuiteSelector::Eigen),
            "kink" => Ok(SuiteSelector::Kink),
            other => Err(Error::Usage(format!(
                "unknown suite {other:?} (expected full, random, eigen or kink)"
            ))),
        }
    }
}

impl fmt::Display for SuiteSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SuiteSelector::Full => "full",
            SuiteSelector::Random => "random",
            SuiteSelector::Eigen => "eigen",
            SuiteSelector::Kink => "kink",
        })
    }
}

/// A named suite member with its coefficients on a fixed basis.
#[derive(Debug, Clone)]
pub struct SuiteFunction {
    pub id: String,
    pub f: ProjectedFunction,
}

fn random_expansion(basis: &Arc<OrthoBasis>, rng: &mut ChaCha8Rng) -> Result<TestFunction> {
    let cfg = basis.cfg();
    let blocks = (0..=RANDOM_DEGREE)
        .map(|l| {
            let size = if cfg.dim() == 1 { 1 } else { l + 1 };
            (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect()
        })
        .collect();
    TestFunction::expansion(Arc::clone(basis), SpectralCoefficients::new(cfg.clone(), blocks)?)
}

/// Twenty seeded random polynomials of degree 8 (random eigen-coefficients),
/// the eigenfunctions `phi_1, phi_2, phi_3, phi_5, phi_8`, and on the interval
/// `|x - 0.3|`, `|x - 0.55|^3` and the step at `0.7`.
pub fn build_suite(cfg: &WeightConfig, which: SuiteSelector, seed: u64) -> Result<Vec<SuiteFunction>> {
    let mut out = Vec::new();
    let poly_basis = Arc::new(OrthoBasis::new(cfg, RANDOM_DEGREE)?);
    let wants = |s: SuiteSelector| which == SuiteSelector::Full || which == s;
    if wants(SuiteSelector::Random) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..RANDOM_COUNT {
            let f = random_expansion(&poly_basis, &mut rng)?;
            out.push(SuiteFunction {
                id: format!("rand{i:02}"),
                f: ProjectedFunction::new(f, Arc::clone(&poly_basis))?,
            });
        }
    }
    if wants(SuiteSelector::Eigen) {
        for ell in EIGEN_DEGREES {
            let c = SpectralCoefficients::unit(cfg, ell, 0)?.padded(RANDOM_DEGREE);
            let f = TestFunction::expansion(Arc::clone(&poly_basis), c)?;
            out.push(SuiteFunction {
                id: format!("phi{ell}"),
                f: ProjectedFunction::new(f, Arc::clone(&poly_basis))?,
            });
        }
    }
    if wants(SuiteSelector::Kink) && cfg.dim() == 1 {
        let basis = Arc::new(OrthoBasis::new(cfg, KINK_BAND)?);
        let kinks = [
            ("abs0.3", TestFunction::AbsPower { center: 0.3, power: 1.0 }),
            ("abs3-0.55", TestFunction::AbsPower { center: 0.55, power: 3.0 }),
            ("step0.7", TestFunction::Step { at: 0.7 }),
        ];
        for (id, f) in kinks {
            out.push(SuiteFunction {
                id: id.to_string(),
                f: ProjectedFunction::new(f, Arc::clone(&basis))?,
            });
        }
    }
    Ok(out)
}
