//! Numerical convex analysis: Legendre-Fenchel conjugates, log-concave
//! probability measures, and checks of entropy, variance and transport
//! inequalities with quantified margins.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod conjugate;
pub mod error;
pub mod func;
pub mod grid;
pub mod inequality;
pub mod interp;
pub mod measure;
pub mod potential;
pub mod quadrature;
pub mod regularity;
pub mod report;
pub mod suite;
pub mod supconv;
pub mod transport;

pub use error::{Error, Result};
