pub mod error;
pub mod function;
pub mod harness;
pub mod kfunc;
pub mod special_fn;
pub mod operator;
pub mod orthopoly;
pub mod polynomial;
pub mod quadrature;
pub mod spectrum;
mod sum;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/expansions.md")]
    mod expansions {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/kfunc.md")]
    mod kfunc {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
