//! Numerical certification of the weighted dual Hardy inequality on finite
//! dyadic trees.
//!
//! The crate evaluates both sides of the inequality
//!
//! ```text
//! Σ_I α_I f_I^p ≤ (p')^p (φ^p)_{I0}
//! ```
//!
//! under the testing condition `A_I ≤ v_I`, replays the Bellman-function
//! telescoping argument node by node, probes the best constant numerically,
//! and cross-checks the Bellman function as the value function of a
//! controlled diffusion by Monte Carlo.
//!
//! Module map:
//!
//! - [`exponent`]: the exponent `p`, its conjugate and `C(p)`.
//! - [`tree`]: heap-ordered dyadic trees and their bottom-up aggregates.
//! - [`hardy`]: both sides of the inequality, necessity and duality.
//! - [`bellman`]: the Bellman function, its derivatives and the main
//!   midpoint inequality.
//! - [`probe`]: saturating weights and maximisation of the Hardy ratio.
//! - [`control`]: the stochastic control problem and its Monte Carlo checks.
//! - [`sampling`]: random domain points, tuples and instances.
//! - [`cli`]: instance files, command dispatch and CSV output.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bellman;
pub mod cli;
pub mod control;
pub mod error;
pub mod exponent;
pub mod hardy;
pub mod probe;
pub mod sampling;
pub mod tree;

pub use error::{Error, Result};
pub use exponent::PExponent;
pub use tree::{NodeAggregates, TreeInstance};
