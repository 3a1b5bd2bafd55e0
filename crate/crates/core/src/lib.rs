//! Compact local Smith-McMillan form of rational matrices.
//!
//! Given the Laurent coefficients of `R(λ)` about a point λ₀, the crate
//! computes the structural indices of λ₀ as a pole/zero of `R`, a unimodular
//! right factor, the left factor and the root polynomials, using a block
//! Toeplitz rank search that records its column transformations. A
//! brute-force Toeplitz rank oracle is included for cross-checking.

pub mod cli;
pub mod densela;
pub mod error;
pub mod harness;
pub mod polymat;
pub mod ranksearch;
pub mod smithform;
pub mod toeplitz_oracle;

pub use densela::{ComplexMatrix, Tolerance};
pub use error::{Error, Result};
pub use polymat::{LaurentMatrix, PolyMatrix};
pub use ranksearch::{RankScale, RankSearchTrace, SearchOptions};
pub use smithform::{decompose, CompactDecomposition, DecomposeOptions};
pub use toeplitz_oracle::ToeplitzProfile;
