//! Core of the heat-flow laboratory: exact score-moment calculus,
//! sum-of-squares sign certificates for entropy derivatives, Gaussian
//! mixture densities, numerical functionals and the complete-monotonicity
//! scanner.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, reports and
//! the command line live in the `gcmc` crate.

#![no_std]
#![forbid(unsafe_code)]
// Whenever std is in the dependency graph its inherent float methods shadow `num_traits::Float`.
#![allow(unused_imports)]

extern crate alloc;

pub mod certificates;
pub mod densities;
pub mod error;
pub mod functionals;
pub mod moments;
pub mod monotonicity;
pub mod rational;
pub mod sequences;

pub use error::{Error, Result};
pub use moments::{Calculus, Monomial, MomentExpr};
pub use rational::{rationalize, Rational};
