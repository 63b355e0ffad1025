//! Joint Hilbert–Schmidt determinantal moments of random density matrices.
//!
//! The crate computes `⟨|ρ|^k |ρ^PT|^κ⟩` for generic two-rebit, two-qubit,
//! rebit-retrit and qubit-qutrit density matrices distributed according to the
//! Hilbert–Schmidt (flat) measure:
//!
//! - exactly at fixed integer `(k, κ)`, by expanding `|ρ^PT|^κ` in Cholesky
//!   coordinates and integrating monomials against the induced Dirichlet law
//!   ([`moments::joint_moment_exact`]);
//! - symbolically in `k`, as a rational adjustment factor multiplying the
//!   baseline moment `⟨|ρ|^k⟩` ([`moments::adjustment_factor_symbolic`]);
//! - by exact rational fitting from finitely many fixed-`k` samples ([`fit`]);
//! - by multiprecision Monte Carlo over Ginibre-sampled states ([`mc`]).
//!
//! [`density`] holds the univariate density of `2^8 |ρ|` for two rebits.

pub mod cholesky;
pub mod cli;
pub mod density;
pub mod error;
pub mod expansion;
pub mod fit;
pub mod matrix;
pub mod mc;
pub mod moments;
pub mod poly;
pub mod polyk;
pub mod roots;
pub mod tables;
pub mod verify;

pub use cholesky::{Ensemble, EnsembleSpec};
pub use error::{Error, Result};
pub use rug::{Integer, Rational};
