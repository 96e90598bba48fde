//! Exact finite-probability engine and Monte Carlo layer for progressively
//! enlarged filtrations generated by a default time.
//!
//! The exact engine works on finite trees with rational weights: it builds the
//! product space carrying the default time, the enlarged filtration and its
//! stopped σ-algebras, computes compensators and drifts, and decides the
//! martingale representation property by exact rank tests. The Monte Carlo
//! layer simulates the conditional-CDF model in continuous time.

pub mod calculus;
pub mod cli;
pub mod enlargement;
pub mod error;
pub mod finite_prob;
pub mod models;
pub mod montecarlo;
pub mod representation;

pub use error::{Error, Result};
