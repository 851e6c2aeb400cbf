//! Polynomial chaos surrogates for models of *dependent* random variables.
//!
//! The crate builds PCE interpolants with three interchangeable strategies:
//! numerically orthogonalized bases (Gram-Schmidt via weighted QR), tensor
//! bases of a dominating product measure, and probabilistic transforms
//! (Nataf/Rosenblatt) to independent coordinates. Interpolation nodes are
//! weighted Leja sequences selected by truncated row-pivoted LU
//! factorization of a preconditioned Vandermonde matrix.

pub mod basis;
pub mod error;
pub mod leja;
pub mod measure;
pub mod models;
pub mod multi_index;
pub mod surrogate;
pub mod transform;
pub mod univariate;

pub use error::{PceError, Result};
