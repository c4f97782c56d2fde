//! Numeric checks of the analytical bounds on the nested-pool sampler.
//!
//! - [`gamma_ratio_product`] and [`product_tail_sum`]: the two-step survival
//!   product `Π_{i=x}^t i/(i+δ)` and the tail sum it controls, whose limit
//!   is at most `1/(δk - 1)`;
//! - [`waterfill`]: the closed-form minimizer behind the lower bound;
//! - [`lower`]: the continuous lower-bound construction with weights
//!   `ω(x) ∝ x^{1-a}`;
//! - [`verify`]: the whole battery as named pass/fail checks.

pub mod lower;
pub mod verify;
pub mod waterfill;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedSum;
use crate::special::ln_gamma_ratio;

pub use lower::{lowerbound_value, optimal_continuous_n, solve_gamma, LowerBound, LowerBoundConfig};
pub use waterfill::{rebalance_pair, waterfill_closed_form, waterfill_objective, WaterFillProblem, WaterFillSolution};

/// `Π_{i=x}^t i / (i + δ) = Γ(t+1) Γ(x+δ) / (Γ(t+1+δ) Γ(x))`.
pub fn gamma_ratio_product(x: u64, t: u64, delta: f64) -> Result<f64> {
    if x == 0 {
        return Err(invalid("x", "must be at least 1"));
    }
    if t < x {
        return Err(invalid("t", format!("must be at least x = {x}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "must be positive"));
    }
    Ok((ln_gamma_ratio(x as f64, delta) - ln_gamma_ratio(t as f64 + 1.0, delta)).exp())
}

/// `Γ(n + α) / (Γ(n) n^α)`, which tends to 1.
pub fn gamma_asymptotic_ratio(n: f64, alpha: f64) -> f64 {
    (ln_gamma_ratio(n, alpha) - alpha * n.ln()).exp()
}

/// `(1/x) Σ_{t>=x} (Π_{i=x}^t i/(i+δ))^k` with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub x: u64,
    pub delta: f64,
    pub k: u32,
    pub value: f64,
    pub truncation_t: u64,
    /// Bound on the error of `value`.
    pub tail_bound: f64,
    /// Limiting bound `1 / (δk - 1)`.
    pub limit_bound: f64,
}

/// Sums the normalized tail series to within `tolerance`.
///
/// With `P(t)` the running product, `δ/(i+δ) <= ln(1 + δ/i) <= δ/i` gives
/// `(T/t)^δ <= P(t)/P(T) <= ((T+1+δ)/(t+1+δ))^δ`, and comparing sums with
/// integrals puts the remainder after `T` between
/// `P(T)^k T (T/(T+1))^{δk-1} / (δk - 1)` and `P(T)^k (T+1+δ) / (δk - 1)`.
/// The reported value adds the midpoint; `tail_bound` is the half-width.
pub fn product_tail_sum(x: u64, delta: f64, k: u32, tolerance: f64) -> Result<TailSum> {
    product_tail_sum_with_cap(x, delta, k, tolerance, crate::matrix::DEFAULT_STEP_CAP)
}

pub fn product_tail_sum_with_cap(x: u64, delta: f64, k: u32, tolerance: f64, step_cap: u64) -> Result<TailSum> {
    if x == 0 {
        return Err(invalid("x", "must be at least 1"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "must be positive"));
    }
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance", "must be positive"));
    }
    let excess = delta * f64::from(k) - 1.0;
    if excess <= 0.0 {
        return Err(Error::Diverges {
            delta_k: delta * f64::from(k),
        });
    }
    let xf = x as f64;
    let k_exp = k as i32;
    let mut acc = CompensatedSum::new();
    let mut product = 1.0f64;
    let mut t = x;
    loop {
        let tf = t as f64;
        product *= tf / (tf + delta);
        let term = product.powi(k_exp);
        acc.add(term);
        let lo = term * tf * (excess * (-1.0 / (tf + 1.0)).ln_1p()).exp() / excess;
        let hi = term * (tf + 1.0 + delta) / excess;
        let half = 0.5 * (hi - lo) / xf;
        if half <= tolerance || term == 0.0 {
            acc.add(0.5 * (lo + hi));
            return Ok(TailSum {
                x,
                delta,
                k,
                value: acc.value() / xf,
                truncation_t: t,
                tail_bound: half,
                limit_bound: 1.0 / excess,
            });
        }
        if t - x >= step_cap {
            return Err(Error::StepCapReached {
                step_cap,
                tail_bound: half,
                target: tolerance,
            });
        }
        t += 1;
    }
}

/// `(2/(k+1)) (1 + 1/(δk - 1))` at `δ = 2/(k-1)`: the limiting bound on
/// `θ(k)` assembled from the block structure and the tail sum.
pub fn theta_upper_bound(k: u32) -> Option<f64> {
    if k < 2 {
        return None;
    }
    let kf = f64::from(k);
    let delta = 2.0 / (kf - 1.0);
    Some(2.0 / (kf + 1.0) * (1.0 + 1.0 / (delta * kf - 1.0)))
}

/// `4k / (k+1)^2`
pub fn theta_optimum(k: u32) -> f64 {
    let kf = f64::from(k);
    4.0 * kf / ((kf + 1.0) * (kf + 1.0))
}
