//! Exact single-searcher survival probabilities `N(x, t)` and the quantities
//! derived from them.
//!
//! `N(x, t)` is the probability that one searcher has not opened box `x`
//! during steps `1..=t`. With `k` independent searchers the fleet misses `x`
//! with probability `N(x, t)^k`, so the expected discovery time is
//! `Σ_{t >= 0} N(x, t)^k` and `θ(k, x)` is that sum divided by `x`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{format_sig, CompensatedSum};
use crate::strategy::{SearchParams, StrategyKind};

/// Default cap on the number of steps `theta` will sum.
pub const DEFAULT_STEP_CAP: u64 = 2_000_000_000;

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn check_x(x: u64) -> Result<()> {
    if x == 0 {
        Err(invalid("x", "boxes are numbered from 1"))
    } else {
        Ok(())
    }
}

/// Index of the `(k+1)`-box block containing `x`; rows inside a block are equal.
pub fn block_of(params: SearchParams, x: u64) -> u64 {
    x.div_ceil(params.block_size())
}

/// First step at which box `x` can be drawn by the nested-pool sampler.
fn first_exposure(params: SearchParams, x: u64) -> u64 {
    2 * block_of(params, x) - 1
}

/// `N(x, t)` for the nested-pool sampler, by the one-step recurrence in `f64`.
pub fn n_value_algorithm1(params: SearchParams, x: u64, t: u64) -> Result<f64> {
    check_x(x)?;
    let mut n = 1.0;
    for step in first_exposure(params, x)..=t {
        let m = params.pool_size(step) as f64;
        n *= (m - 1.0) / m;
    }
    Ok(n)
}

/// `N(x, t)` for the nested-pool sampler in exact rational arithmetic.
pub fn n_value_algorithm1_exact(params: SearchParams, x: u64, t: u64) -> Result<BigRational> {
    check_x(x)?;
    let mut n = BigRational::one();
    for step in first_exposure(params, x)..=t {
        let m = params.pool_size(step);
        n *= ratio(m - 1, m);
    }
    Ok(n)
}

fn check_block_len(block_len: u64) -> Result<()> {
    if block_len == 0 {
        Err(invalid("block_len", "block length must be at least 1"))
    } else {
        Ok(())
    }
}

/// Boxes still closed (out of `block_len`) in the block of `x` after `t` steps.
fn block_random_remaining(block_len: u64, x: u64, t: u64) -> u64 {
    let start = (x.div_ceil(block_len) - 1) * block_len;
    block_len - t.saturating_sub(start).min(block_len)
}

pub fn n_value_block_random(block_len: u64, x: u64, t: u64) -> Result<f64> {
    check_block_len(block_len)?;
    check_x(x)?;
    Ok(block_random_remaining(block_len, x, t) as f64 / block_len as f64)
}

pub fn n_value_block_random_exact(block_len: u64, x: u64, t: u64) -> Result<BigRational> {
    check_block_len(block_len)?;
    check_x(x)?;
    Ok(ratio(block_random_remaining(block_len, x, t), block_len))
}

/// Read-only view of the N-matrix of a built-in randomized or sequential strategy.
///
/// The round-robin partition has no single-searcher matrix (each searcher's
/// row depends on its id), so it is rejected here; its fleet discovery time
/// is available from [`expected_time`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NMatrixView {
    strategy: StrategyKind,
    params: SearchParams,
}

impl NMatrixView {
    pub fn new(strategy: StrategyKind, params: SearchParams) -> Result<Self> {
        strategy.validate()?;
        if strategy == StrategyKind::CoordinatedPartition {
            return Err(invalid(
                "strategy",
                "coordinated partition has no single-searcher N-matrix",
            ));
        }
        Ok(Self { strategy, params })
    }

    pub fn strategy(&self) -> StrategyKind {
        self.strategy
    }

    pub fn params(&self) -> SearchParams {
        self.params
    }

    pub fn value(&self, x: u64, t: u64) -> Result<f64> {
        match self.strategy {
            StrategyKind::Algorithm1 => n_value_algorithm1(self.params, x, t),
            StrategyKind::BlockRandom { block_len } => n_value_block_random(block_len, x, t),
            StrategyKind::SoloExhaustive => n_value_block_random(1, x, t),
            StrategyKind::CoordinatedPartition => unreachable!("rejected in new"),
        }
    }

    pub fn exact(&self, x: u64, t: u64) -> Result<BigRational> {
        match self.strategy {
            StrategyKind::Algorithm1 => n_value_algorithm1_exact(self.params, x, t),
            StrategyKind::BlockRandom { block_len } => n_value_block_random_exact(block_len, x, t),
            StrategyKind::SoloExhaustive => n_value_block_random_exact(1, x, t),
            StrategyKind::CoordinatedPartition => unreachable!("rejected in new"),
        }
    }

    /// Column `t` over `x = 1..=x_max`, computed incrementally per block.
    pub fn exact_column(&self, t: u64, x_max: u64) -> Result<Vec<BigRational>> {
        match self.strategy {
            StrategyKind::Algorithm1 => {
                let mut rows = Vec::with_capacity(x_max as usize);
                let mut cached: Option<(u64, BigRational)> = None;
                for x in 1..=x_max {
                    let block = block_of(self.params, x);
                    let value = match &cached {
                        Some((b, v)) if *b == block => v.clone(),
                        _ => {
                            let v = n_value_algorithm1_exact(self.params, x, t)?;
                            cached = Some((block, v.clone()));
                            v
                        }
                    };
                    rows.push(value);
                }
                Ok(rows)
            }
            _ => (1..=x_max).map(|x| self.exact(x, t)).collect(),
        }
    }

    /// Smallest `x_max` such that `N(x, t) = 1` for every `x > x_max`.
    pub fn support_bound(&self, t: u64) -> u64 {
        match self.strategy {
            StrategyKind::Algorithm1 => {
                if t == 0 {
                    0
                } else {
                    self.params.pool_limit(t)
                }
            }
            StrategyKind::BlockRandom { block_len } => t.div_ceil(block_len) * block_len,
            StrategyKind::SoloExhaustive => t,
            StrategyKind::CoordinatedPartition => unreachable!("rejected in new"),
        }
    }
}

fn check_support(view: &NMatrixView, t: u64, x_max: u64) -> Result<()> {
    let required = view.support_bound(t);
    if x_max < required {
        return Err(Error::BelowSupport { x_max, required, t });
    }
    Ok(())
}

/// `|Σ_{x=1}^{x_max} (1 - N(x, t)) - t|` in `f64`.
pub fn column_sum_check(view: &NMatrixView, t: u64, x_max: u64) -> Result<f64> {
    check_support(view, t, x_max)?;
    let mut acc = CompensatedSum::new();
    for x in 1..=x_max {
        acc.add(1.0 - view.value(x, t)?);
    }
    Ok((acc.value() - t as f64).abs())
}

/// Exact version of [`column_sum_check`]; zero for every non-revisiting strategy.
pub fn column_sum_check_exact(view: &NMatrixView, t: u64, x_max: u64) -> Result<BigRational> {
    check_support(view, t, x_max)?;
    if view.strategy() == StrategyKind::Algorithm1 {
        return Ok(algorithm1_column_gap(view.params(), t, x_max));
    }
    let one = BigRational::one();
    let opened = view
        .exact_column(t, x_max)?
        .into_iter()
        .fold(BigRational::zero(), |acc, n| acc + (&one - n));
    Ok((opened - BigRational::from_integer(BigInt::from(t))).abs())
}

/// Exact column gap for the nested-pool sampler over the common
/// denominator `D = Π_{s=1}^t m(s)`.
///
/// A row first exposed at step `j` has `N D = Π_{s<j} m(s) · Π_{s=j}^t (m(s) - 1)`,
/// so the whole column needs only integer products and sums.
fn algorithm1_column_gap(params: SearchParams, t: u64, x_max: u64) -> BigRational {
    let m: Vec<BigInt> = (1..=t).map(|s| BigInt::from(params.pool_size(s))).collect();
    // prefix[j] = Π_{s<j} m(s), suffix[j] = Π_{s=j}^t (m(s) - 1), indexed by step.
    let mut prefix = vec![BigInt::one(); t as usize + 2];
    for s in 1..=t as usize {
        prefix[s + 1] = &prefix[s] * &m[s - 1];
    }
    let mut suffix = vec![BigInt::one(); t as usize + 2];
    for s in (1..=t as usize).rev() {
        suffix[s] = &suffix[s + 1] * (&m[s - 1] - 1);
    }
    let denominator = prefix[t as usize + 1].clone();
    let size = params.block_size();
    let mut opened = BigInt::zero();
    let mut block = 1u64;
    while 2 * block - 1 <= t && (block - 1) * size < x_max {
        let first = (2 * block - 1) as usize;
        let rows = (block * size).min(x_max) - (block - 1) * size;
        let scaled = &prefix[first] * &suffix[first];
        opened += (&denominator - scaled) * BigInt::from(rows);
        block += 1;
    }
    let gap = opened - &denominator * BigInt::from(t);
    BigRational::new(gap.abs(), denominator)
}

/// `θ(k, x)` together with how it was truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub k: u32,
    pub x: u64,
    pub theta: f64,
    /// Last step included in the sum.
    pub truncation_t: u64,
    /// Bound on `|theta - θ(k, x)|`; the sum runs exactly to
    /// `truncation_t` and the rest is the midpoint of a certified enclosure.
    pub tail_bound: f64,
}

impl ThetaEstimate {
    pub fn speedup(&self) -> f64 {
        1.0 / self.theta
    }

    pub fn expected_time(&self) -> f64 {
        self.theta * self.x as f64
    }
}

/// Sum over a whole block of rows of the nested-pool sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BlockSum {
    /// `Σ_{t=0}^{truncation_t} N(x, t)^k` plus the midpoint of the tail enclosure.
    sum: f64,
    truncation_t: u64,
    /// Half-width of the tail enclosure, so `|sum - Σ_t N(x, t)^k| <= tail`.
    tail: f64,
}

/// Encloses `Σ_{t > 2u} N(x, t)^k` given `n = N(x, 2u)`, `u >= block`.
///
/// Two consecutive steps multiply `N` by `i / (i + δ)`, and
/// `δ/(i+δ) <= ln(1 + δ/i) <= δ/i` gives
/// `(u/v)^δ <= N(x, 2v) / N(x, 2u) <= ((u+1+δ)/(v+1+δ))^δ` for `v >= u`.
/// With `p = δk`, comparing sums with integrals and using
/// `N(x, 2v) <= N(x, 2v-1) <= N(x, 2v-2)` encloses the tail in
/// `[2 n^k u (u/(u+1))^{p-1} / (p-1), n^k + 2 n^k (u+1+δ) / (p-1)]`.
fn tail_enclosure(n_pow_k: f64, u: f64, delta: f64, p: f64) -> (f64, f64) {
    let lo = 2.0 * n_pow_k * u * ((p - 1.0) * (-1.0 / (u + 1.0)).ln_1p()).exp() / (p - 1.0);
    let hi = n_pow_k + 2.0 * n_pow_k * (u + 1.0 + delta) / (p - 1.0);
    (lo, hi)
}

/// Sums `N(x, t)^k` over `t` for every `x` in `block` until the tail
/// enclosure is narrower than `2 target`.
fn block_sum(params: SearchParams, block: u64, target: f64, step_cap: u64) -> Result<BlockSum> {
    let k = params.k() as i32;
    let first = 2 * block - 1;
    // N = 1 for t = 0..first-1.
    let mut acc = CompensatedSum::new();
    acc.add(first as f64);
    let mut n = 1.0f64;
    let tail_rate = params.delta().map(|d| (d, d * f64::from(params.k())));
    let mut t = first;
    loop {
        let m = params.pool_size(t) as f64;
        n *= (m - 1.0) / m;
        let n_pow_k = n.powi(k);
        acc.add(n_pow_k);
        if n == 0.0 {
            // Only a solo searcher empties its pool; everything after is zero.
            return Ok(BlockSum {
                sum: acc.value(),
                truncation_t: t,
                tail: 0.0,
            });
        }
        if t.is_multiple_of(2) {
            if let Some((delta, p)) = tail_rate {
                let (lo, hi) = tail_enclosure(n_pow_k, (t / 2) as f64, delta, p);
                let half = 0.5 * (hi - lo);
                if half <= target {
                    acc.add(0.5 * (lo + hi));
                    return Ok(BlockSum {
                        sum: acc.value(),
                        truncation_t: t,
                        tail: half,
                    });
                }
                if t >= step_cap {
                    return Err(Error::StepCapReached {
                        step_cap,
                        tail_bound: half,
                        target,
                    });
                }
            }
        }
        t += 1;
    }
}

/// `θ(k, x)` of the nested-pool sampler to within `epsilon`.
pub fn theta(params: SearchParams, x: u64, epsilon: f64) -> Result<ThetaEstimate> {
    theta_with_cap(params, x, epsilon, DEFAULT_STEP_CAP)
}

pub fn theta_with_cap(params: SearchParams, x: u64, epsilon: f64, step_cap: u64) -> Result<ThetaEstimate> {
    check_x(x)?;
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let xf = x as f64;
    let b = block_sum(params, block_of(params, x), epsilon * xf, step_cap)?;
    Ok(ThetaEstimate {
        k: params.k(),
        x,
        theta: b.sum / xf,
        truncation_t: b.truncation_t,
        tail_bound: b.tail / xf,
    })
}

/// `Σ_{t=0}^{t_max} N(x, t)^k` exactly, for rational cross-checks of `theta`.
pub fn expected_time_prefix_exact(params: SearchParams, x: u64, t_max: u64) -> Result<BigRational> {
    check_x(x)?;
    let k = params.k();
    let mut acc = BigRational::zero();
    let mut n = BigRational::one();
    let first = first_exposure(params, x);
    for t in 0..=t_max {
        if t >= first {
            let m = params.pool_size(t);
            n *= ratio(m - 1, m);
        }
        acc += Pow::pow(&n, k);
    }
    Ok(acc)
}

/// Expected fleet discovery time `E[T]` for treasure `x` when `params.k()`
/// searchers all run `strategy`.
pub fn expected_time(strategy: StrategyKind, params: SearchParams, x: u64, epsilon: f64) -> Result<ThetaEstimate> {
    check_x(x)?;
    strategy.validate()?;
    let k = params.k();
    let exact = |time: f64, truncation_t: u64| ThetaEstimate {
        k,
        x,
        theta: time / x as f64,
        truncation_t,
        tail_bound: 0.0,
    };
    match strategy {
        StrategyKind::Algorithm1 => theta(params, x, epsilon),
        StrategyKind::SoloExhaustive => Ok(exact(x as f64, x)),
        StrategyKind::CoordinatedPartition => {
            let t = x.div_ceil(u64::from(k));
            Ok(exact(t as f64, t))
        }
        StrategyKind::BlockRandom { block_len } => {
            let start = (x.div_ceil(block_len) - 1) * block_len;
            let mut acc = CompensatedSum::new();
            acc.add(start as f64 + 1.0);
            for j in 1..block_len {
                acc.add(((block_len - j) as f64 / block_len as f64).powi(k as i32));
            }
            Ok(exact(acc.value(), start + block_len))
        }
    }
}

/// One row of a speed-up curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub k: u32,
    pub x: u64,
    pub theta: f64,
    pub speedup: f64,
    pub truncation_t: u64,
    pub tail_bound: f64,
    /// Largest `θ` over `x .. x + 2(k+1)`, when window reporting is on.
    pub window_theta: Option<f64>,
}

impl SpeedupRow {
    pub fn window_speedup(&self) -> Option<f64> {
        self.window_theta.map(|t| 1.0 / t)
    }
}

/// Width of the window used to approximate the lim sup of `θ(k, x)`.
pub fn window_len(params: SearchParams) -> u64 {
    2 * params.block_size()
}

/// Speed-up `1/θ(k, x)` for each `x`, in increasing `x` order.
///
/// Block sums are shared between the `x` values of one block and computed in
/// parallel; the output does not depend on scheduling.
pub fn speedup_curve(params: SearchParams, xs: &[u64], epsilon: f64, window: bool) -> Result<Vec<SpeedupRow>> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let mut xs = xs.to_vec();
    xs.sort_unstable();
    if let Some(&0) = xs.first() {
        return Err(invalid("x", "boxes are numbered from 1"));
    }
    let span = if window { window_len(params) - 1 } else { 0 };
    // The tail target is per-x; use the smallest x touching each block.
    let mut blocks: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in &xs {
        for y in x..=x + span {
            blocks
                .entry(block_of(params, y))
                .and_modify(|m| *m = (*m).min(y))
                .or_insert(y);
        }
    }
    let sums: Vec<(u64, BlockSum)> = blocks
        .into_par_iter()
        .map(|(block, min_x)| block_sum(params, block, epsilon * min_x as f64, DEFAULT_STEP_CAP).map(|s| (block, s)))
        .collect::<Result<_>>()?;
    let sums: BTreeMap<u64, BlockSum> = sums.into_iter().collect();
    let theta_at = |y: u64| {
        let s = &sums[&block_of(params, y)];
        (s.sum / y as f64, s)
    };
    Ok(xs
        .into_iter()
        .map(|x| {
            let (theta, s) = theta_at(x);
            let window_theta = window.then(|| (x..=x + span).map(|y| theta_at(y).0).fold(f64::MIN, f64::max));
            SpeedupRow {
                k: params.k(),
                x,
                theta,
                speedup: 1.0 / theta,
                truncation_t: s.truncation_t,
                tail_bound: s.tail / x as f64,
                window_theta,
            }
        })
        .collect())
}

pub const THETA_CSV_HEADER: &str = "k,x,theta,speedup,truncation_t,tail_bound";

pub fn theta_csv(rows: &[SpeedupRow]) -> String {
    let mut out = String::from(THETA_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k,
            r.x,
            format_sig(r.theta, 12),
            format_sig(r.speedup, 12),
            r.truncation_t,
            format_sig(r.tail_bound, 12)
        ));
    }
    out
}

/// Renders an exact probability as `p/q`, or `0`/`1`.
pub fn render_rational(value: &BigRational) -> String {
    if value.is_integer() {
        value.to_integer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: u32) -> SearchParams {
        SearchParams::new(k).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn algorithm1_k2_table() {
        let k2 = p(2);
        let row1 = [q(1, 1), q(2, 3), q(1, 3), q(1, 4), q(1, 6)];
        let row4 = [q(1, 1), q(1, 1), q(1, 1), q(3, 4), q(1, 2)];
        for t in 0..5u64 {
            for x in 1..=3 {
                assert_eq!(n_value_algorithm1_exact(k2, x, t).unwrap(), row1[t as usize]);
            }
            for x in 4..=6 {
                assert_eq!(n_value_algorithm1_exact(k2, x, t).unwrap(), row4[t as usize]);
            }
        }
        assert!((n_value_algorithm1(k2, 4, 4).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn solo_pool_exhaustion() {
        assert_eq!(n_value_algorithm1_exact(p(1), 1, 2).unwrap(), BigRational::zero());
        assert_eq!(n_value_algorithm1_exact(p(1), 1, 1).unwrap(), q(1, 2));
        assert_eq!(n_value_algorithm1(p(1), 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn rejects_box_zero() {
        assert!(n_value_algorithm1(p(2), 0, 1).is_err());
        assert!(n_value_block_random(3, 0, 1).is_err());
        assert!(n_value_block_random(0, 1, 1).is_err());
    }

    #[test]
    fn block_random_table() {
        assert_eq!(n_value_block_random_exact(3, 1, 1).unwrap(), q(2, 3));
        assert_eq!(n_value_block_random_exact(3, 1, 2).unwrap(), q(1, 3));
        assert_eq!(n_value_block_random_exact(3, 1, 3).unwrap(), q(0, 1));
        assert_eq!(n_value_block_random_exact(3, 4, 3).unwrap(), q(1, 1));
        assert_eq!(n_value_block_random_exact(3, 4, 4).unwrap(), q(2, 3));
        assert_eq!(n_value_block_random_exact(3, 4, 6).unwrap(), q(0, 1));
        for x in 1..20 {
            for t in 0..25 {
                let want = if t < x { 1.0 } else { 0.0 };
                assert_eq!(n_value_block_random(1, x, t).unwrap(), want);
            }
        }
    }

    #[test]
    fn column_sum_examples() {
        let view = NMatrixView::new(StrategyKind::Algorithm1, p(2)).unwrap();
        assert!(column_sum_check_exact(&view, 4, 6).unwrap().is_zero());
        for k in [1, 2, 3, 7] {
            let v = NMatrixView::new(StrategyKind::Algorithm1, p(k)).unwrap();
            assert!(column_sum_check_exact(&v, 0, 1).unwrap().is_zero());
        }
        let v3 = NMatrixView::new(StrategyKind::Algorithm1, p(3)).unwrap();
        assert!(column_sum_check_exact(&v3, 9, 20).unwrap().is_zero());
        assert!(column_sum_check(&v3, 9, 20).unwrap() < 1e-12);
        assert!(matches!(
            column_sum_check_exact(&v3, 9, 19),
            Err(Error::BelowSupport { required: 20, .. })
        ));
        let block = NMatrixView::new(StrategyKind::block_random(), p(2)).unwrap();
        for t in 0..20 {
            assert!(column_sum_check_exact(&block, t, 21).unwrap().is_zero());
        }
    }

    #[test]
    fn column_gap_paths_agree() {
        for k in [1u32, 2, 4] {
            let view = NMatrixView::new(StrategyKind::Algorithm1, p(k)).unwrap();
            for t in [0u64, 1, 2, 7, 30] {
                for extra in [0u64, 1, 5] {
                    let x_max = view.support_bound(t) + extra;
                    let one = BigRational::one();
                    let by_rows = view
                        .exact_column(t, x_max)
                        .unwrap()
                        .into_iter()
                        .fold(BigRational::zero(), |acc, n| acc + (&one - n));
                    let gap = (by_rows - BigRational::from_integer(BigInt::from(t))).abs();
                    assert_eq!(gap, algorithm1_column_gap(p(k), t, x_max), "k={k} t={t}");
                    assert!(gap.is_zero());
                }
            }
        }
    }

    #[test]
    fn coordinated_has_no_view() {
        assert!(NMatrixView::new(StrategyKind::CoordinatedPartition, p(2)).is_err());
    }

    #[test]
    fn solo_theta_matches_enumeration() {
        // A solo searcher opens the pair {2j-1, 2j} at steps 2j-1, 2j in random order.
        for x in 1..=50u64 {
            let j = x.div_ceil(2);
            let expected = (2 * j - 1) as f64 + 0.5;
            let est = theta(p(1), x, 1e-9).unwrap();
            assert!((est.expected_time() - expected).abs() < 1e-12, "x={x}");
            assert_eq!(est.tail_bound, 0.0);
            let xf = x as f64;
            assert!(est.theta >= 1.0 - 1.0 / xf && est.theta <= 1.0 + 3.0 / xf);
        }
    }

    #[test]
    fn theta_agrees_with_rational_prefix() {
        let params = p(2);
        let est = theta(params, 3, 1e-9).unwrap();
        let prefix = expected_time_prefix_exact(params, 3, 200).unwrap();
        // First terms by hand: 1 + 4/9 + 1/9 + 1/16 + 1/36
        let head = expected_time_prefix_exact(params, 3, 4).unwrap();
        assert_eq!(head, q(1, 1) + q(4, 9) + q(1, 9) + q(1, 16) + q(1, 36));
        let prefix_theta = rational_to_f64(&prefix) / 3.0;
        // The prefix up to t = 200 misses a tail; theta's own tail is < 1e-9.
        assert!(est.theta >= prefix_theta - 1e-12);
        assert!(est.theta - prefix_theta < 1e-3);
        let long = expected_time_prefix_exact(params, 3, 2000).unwrap();
        assert!(rational_to_f64(&long) / 3.0 <= est.theta + est.tail_bound);
    }

    #[test]
    fn theta_error_bound_is_honest() {
        // Compare a loose estimate against a much tighter one.
        for k in [2u32, 3, 5, 8] {
            for x in [1u64, 7, 40, 1000] {
                let loose = theta(p(k), x, 1e-3).unwrap();
                let tight = theta(p(k), x, 1e-12).unwrap();
                let gap = (tight.theta - loose.theta).abs();
                assert!(gap <= loose.tail_bound + tight.tail_bound, "k={k} x={x}");
                assert!(loose.tail_bound <= 1e-3);
            }
        }
    }

    #[test]
    fn theta_matches_long_direct_sum() {
        // Direct summation far beyond the truncation point.
        for (k, x) in [(3u32, 20u64), (5, 12)] {
            let params = p(k);
            let est = theta(params, x, 1e-6).unwrap();
            let mut n = 1.0f64;
            let mut total = CompensatedSum::new();
            for t in 0..20_000_000u64 {
                if t >= first_exposure(params, x) {
                    let m = params.pool_size(t) as f64;
                    n *= (m - 1.0) / m;
                }
                total.add(n.powi(k as i32));
            }
            // What the direct sum still misses is below its own upper tail bound.
            let (_, rest) = tail_enclosure(
                n.powi(k as i32),
                1e7 - 0.5,
                params.delta().unwrap(),
                params.delta().unwrap() * f64::from(k),
            );
            let direct = total.value() / x as f64;
            assert!(direct <= est.theta + est.tail_bound, "k={k}");
            assert!(direct + rest / x as f64 >= est.theta - est.tail_bound, "k={k}");
        }
    }

    #[test]
    fn theta_window_for_two_searchers() {
        let est = theta(p(2), 9999, 1e-7).unwrap();
        assert!((0.87..=0.91).contains(&est.theta), "{}", est.theta);
    }

    #[test]
    fn step_cap_is_reported() {
        assert!(matches!(
            theta_with_cap(p(8), 10_000, 1e-9, 1000),
            Err(Error::StepCapReached { .. })
        ));
        assert!(theta(p(2), 5, 0.0).is_err());
    }

    #[test]
    fn speedup_curve_orders_and_windows() {
        let rows = speedup_curve(p(3), &[40, 10, 25], 1e-8, true).unwrap();
        let xs: Vec<u64> = rows.iter().map(|r| r.x).collect();
        assert_eq!(xs, vec![10, 25, 40]);
        for r in &rows {
            let direct = theta(p(3), r.x, 1e-8).unwrap();
            assert!((direct.theta - r.theta).abs() < 1e-7);
            let w = r.window_theta.unwrap();
            let brute = (r.x..r.x + 8)
                .map(|y| theta(p(3), y, 1e-8).unwrap().theta)
                .fold(0.0, f64::max);
            assert!((w - brute).abs() < 1e-7);
            assert!(w >= r.theta);
        }
    }

    #[test]
    fn expected_time_of_baselines() {
        let e = expected_time(StrategyKind::CoordinatedPartition, p(3), 8, 1e-9).unwrap();
        assert_eq!(e.expected_time(), 3.0);
        let e = expected_time(StrategyKind::SoloExhaustive, p(1), 7, 1e-9).unwrap();
        assert_eq!(e.expected_time(), 7.0);
        // One searcher, blocks of 3: box 1 is found at step 1, 2 or 3 uniformly.
        let e = expected_time(StrategyKind::block_random(), p(1), 1, 1e-9).unwrap();
        assert!((e.expected_time() - 2.0).abs() < 1e-12);
        let e = expected_time(StrategyKind::block_random(), p(2), 5, 1e-9).unwrap();
        assert!((e.expected_time() - (4.0 + 4.0 / 9.0 + 1.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn render() {
        assert_eq!(render_rational(&q(2, 3)), "2/3");
        assert_eq!(render_rational(&q(4, 4)), "1");
        assert_eq!(render_rational(&q(0, 5)), "0");
    }

    #[test]
    fn csv_header_and_digits() {
        let rows = speedup_curve(p(2), &[3], 1e-9, false).unwrap();
        let csv = theta_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(THETA_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("2,3,"));
    }
}
