//! Parallel exhaustive search without coordination.
//!
//! `k` identical searchers with independent randomness look for a treasure
//! hidden in one of infinitely many ordered boxes, opening one box per step
//! and never communicating. This crate provides:
//!
//! - [`strategy`]: per-step box samplers, including the nested-pool sampler
//!   that draws two fresh boxes from `{1, ..., i(k+1)}` in phase `i`, and
//!   the sequential, round-robin and block-random baselines;
//! - [`matrix`]: exact survival probabilities `N(x, t)`, `θ(k, x)` with a
//!   certified tail, and speed-up curves;
//! - [`sim`]: a seeded Monte Carlo engine with crash schedules and
//!   per-searcher box reorderings;
//! - [`bounds`]: numeric checks of the Gamma-ratio tail bound, the
//!   water-filling optimum and the continuous lower-bound construction.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(v > 0.0)` also rejects NaN

pub mod bounds;
pub mod error;
pub mod matrix;
pub mod numeric;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod special;
pub mod strategy;

pub use error::{Error, Result};
pub use strategy::{BoxIndex, SearchParams, StrategyKind};

/// Asymptotic speed-up `(k+1)^2 / 4k` of the nested-pool sampler, which no
/// non-coordinating strategy can beat.
pub fn optimal_speedup(k: u32) -> f64 {
    let k = f64::from(k);
    (k + 1.0) * (k + 1.0) / (4.0 * k)
}
