//! Natural densities of subsets of ℕ.

pub mod chains;
pub mod constructions;
pub mod limits;
pub mod nullmod;
pub mod quotient;
pub mod rational;
pub mod sets;

pub use rational::Rational;
pub use sets::SetExpr;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/limits.md")]
    mod limits {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/nullmod.md")]
    mod nullmod {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/quotients.md")]
    mod quotients {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
