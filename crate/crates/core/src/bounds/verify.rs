//! The numeric checks of this module and of the N-matrix, as a flat list of
//! named pass/fail entries.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::lower::{lowerbound_value, solve_gamma, weighted_average_integral, LowerBoundConfig};
use super::waterfill::{rebalance_pair, waterfill_closed_form, waterfill_grid_search, WaterFillProblem};
use super::{gamma_asymptotic_ratio, gamma_ratio_product, product_tail_sum, theta_optimum, theta_upper_bound};
use crate::error::Result;
use crate::matrix::{column_sum_check_exact, n_value_algorithm1, speedup_curve, NMatrixView};
use crate::rng::SearchRng;
use crate::strategy::{SearchParams, StrategyKind};

pub const NOT_APPLICABLE: &str = "not applicable: k >= 2 required";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// Distance to the bound, positive when the check passes.
    pub margin: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = bound - value;
        Self {
            name: name.into(),
            value,
            bound,
            margin,
            passed: margin >= 0.0,
            note: None,
        }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = value - bound;
        Self {
            name: name.into(),
            value,
            bound,
            margin,
            passed: margin >= 0.0,
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            bound: f64::NAN,
            margin: f64::NAN,
            passed: true,
            note: Some(NOT_APPLICABLE.to_string()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Treasure index for the finite-x checks.
    pub x: u64,
    /// Tail tolerance for `θ` and the tail sums.
    pub epsilon: f64,
    /// Largest `t` in the exact column identity.
    pub column_t_max: u64,
    /// Largest `x'` and `t'` in the product-formula comparison.
    pub product_max: u64,
    pub waterfill_instances: usize,
    pub grid_step: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            x: 10_000,
            epsilon: 1e-9,
            column_t_max: 200,
            product_max: 60,
            waterfill_instances: 100,
            grid_step: 1e-6,
            seed: 0,
        }
    }
}

/// Runs the checks that do not depend on `k`, then the per-`k` checks in
/// the order given.
pub fn verify_bounds(ks: &[u32], options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = global_checks(options)?;
    for &k in ks {
        checks.extend(checks_for_k(k, options)?);
    }
    Ok(checks)
}

pub fn failures(checks: &[Check]) -> Vec<&Check> {
    checks.iter().filter(|c| !c.passed).collect()
}

pub fn global_checks(options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let identity = (2..=50u32)
        .map(|k| (theta_upper_bound(k).unwrap_or(f64::NAN) - theta_optimum(k)).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most("theta_chain_identity_k2_50", identity, 1e-12));

    let direct: f64 = (100..=10_000u64).map(|i| i as f64 / (i as f64 + 2.0 / 3.0)).product();
    let via_gamma = gamma_ratio_product(100, 10_000, 2.0 / 3.0)?;
    out.push(Check::at_most(
        "gamma_product_vs_direct",
        ((via_gamma - direct) / direct).abs(),
        1e-10,
    ));

    let asymptotic = [0.5, 1.0, 2.0]
        .iter()
        .map(|&alpha| (gamma_asymptotic_ratio(1e6, alpha) - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most("gamma_asymptotic_n1e6", asymptotic, 1e-3));

    let (worst_gap, worst_residual) = waterfill_battery(options)?;
    out.push(Check::at_most("waterfill_vs_grid", worst_gap, 1e-4));
    out.push(Check::at_most("waterfill_feasibility", worst_residual, 1e-10));

    let pair_cases = [
        (1.0, 16.0, 1.0, 3u32),
        (1.0, 1.0, 2.0, 2),
        (3.0, 3.0, 1.0, 2),
        (16.0, 1.0, 1.8, 3),
    ];
    let mut pair_gap = 0.0f64;
    for (a1, a2, total, k) in pair_cases {
        let (f1, _) = rebalance_pair(a1, a2, total, k)?;
        let obj = |f: f64| a1 * f.powi(k as i32) + a2 * (total - f).powi(k as i32);
        let (lo, hi) = ((total - 1.0f64).max(0.0), total.min(1.0));
        let steps = 1_000_000u32;
        let best = (0..=steps)
            .map(|i| obj(lo + (hi - lo) * f64::from(i) / f64::from(steps)))
            .fold(f64::INFINITY, f64::min);
        pair_gap = pair_gap.max((obj(f1) - best).abs());
    }
    out.push(Check::at_most("rebalance_pair_vs_grid", pair_gap, 1e-4));

    let bracket = LowerBoundConfig::new(2, 2.5, 1.0)?;
    let gamma = solve_gamma(2, 2.5, 1.0, 10.0)?;
    let (lo, hi) = bracket.gamma_bracket(10.0);
    out.push(Check::at_least(
        "gamma_inside_bracket",
        (gamma - lo).min(hi - gamma),
        0.0,
    ));

    Ok(out)
}

/// Largest objective gap to the grid optimum and largest feasibility
/// residual over random instances with `n <= 4`, `k ∈ {2, 3}`.
fn waterfill_battery(options: &VerifyOptions) -> Result<(f64, f64)> {
    let mut rng = SearchRng::seed_from_u64(options.seed);
    let mut gap = 0.0f64;
    let mut residual = 0.0f64;
    for _ in 0..options.waterfill_instances {
        let n = rng.gen_range(1..=4usize);
        let k = rng.gen_range(2..=3u32);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let budget = rng.gen_range(0.0..n as f64);
        let problem = WaterFillProblem::new(a, budget, k)?;
        let solution = waterfill_closed_form(&problem)?;
        let (_, grid) = waterfill_grid_search(&problem, options.grid_step)?;
        gap = gap.max((solution.objective - grid).abs());
        if solution.objective > grid + 1e-12 {
            gap = gap.max(f64::INFINITY);
        }
        let outside = solution.f.iter().any(|f| !(0.0..=1.0).contains(f));
        residual = residual.max(if outside { f64::INFINITY } else { solution.residual });
    }
    Ok((gap, residual))
}

pub fn checks_for_k(k: u32, options: &VerifyOptions) -> Result<Vec<Check>> {
    let params = SearchParams::new(k)?;
    let mut out = Vec::new();

    let view = NMatrixView::new(StrategyKind::Algorithm1, params)?;
    let x_max = view.support_bound(options.column_t_max);
    let mut worst = 0.0f64;
    for t in 0..=options.column_t_max {
        let gap = crate::matrix::rational_to_f64(&column_sum_check_exact(&view, t, x_max)?);
        worst = worst.max(gap);
    }
    out.push(Check::at_most(format!("k{k}_column_identity_exact"), worst, 0.0));

    let Some(delta) = params.delta() else {
        let row = &speedup_curve(params, &[1000], options.epsilon, false)?[0];
        out.push(Check::at_most(
            format!("k{k}_theta_near_one_x1000"),
            (row.theta - 1.0).abs(),
            0.03,
        ));
        for name in [
            "product_formula",
            "product_tail_sum",
            "theta_window_vs_limit",
            "lowerbound_near_optimum",
            "lowerbound_quadrature",
            "lowerbound_exact_profile",
            "lowerbound_dominance",
        ] {
            out.push(Check::skipped(format!("k{k}_{name}")));
        }
        return Ok(out);
    };

    // N((k+1)x', 2t') against Π_{i=x'}^{t'} i/(i+δ).
    let mut product_gap = 0.0f64;
    for xp in 1..=options.product_max {
        for tp in xp..=options.product_max {
            let recurrence = n_value_algorithm1(params, u64::from(k + 1) * xp, 2 * tp)?;
            let closed = gamma_ratio_product(xp, tp, delta)?;
            product_gap = product_gap.max(((recurrence - closed) / closed).abs());
        }
    }
    out.push(Check::at_most(format!("k{k}_product_formula"), product_gap, 1e-12));

    let tail = product_tail_sum(options.x, delta, k, options.epsilon)?;
    out.push(
        Check::at_most(
            format!("k{k}_product_tail_sum"),
            tail.value + tail.tail_bound,
            tail.limit_bound * 1.01,
        )
        .with_note(format!("limit 1/(δk-1) = {}", tail.limit_bound)),
    );

    let row = &speedup_curve(params, &[options.x], options.epsilon, true)?[0];
    let window_theta = row.window_theta.unwrap_or(row.theta);
    let optimum = theta_optimum(k);
    out.push(Check::at_most(
        format!("k{k}_theta_window_vs_limit"),
        ((window_theta - optimum) / optimum).abs(),
        0.02,
    ));

    let near = lowerbound_value(&LowerBoundConfig::new(k, 2.001, 1.0)?)?;
    out.push(Check::at_most(
        format!("k{k}_lowerbound_near_optimum"),
        ((near.value - optimum) / optimum).abs(),
        0.01,
    ));

    let config = LowerBoundConfig::new(k, 3.0, 1.0)?;
    let at_three = lowerbound_value(&config)?;
    out.push(Check::at_most(
        format!("k{k}_lowerbound_quadrature"),
        at_three.quadrature_rel_error(),
        1e-6,
    ));
    let exact_profile = weighted_average_integral(&config)?;
    out.push(Check::at_least(
        format!("k{k}_lowerbound_exact_profile"),
        exact_profile.value,
        at_three.value,
    ));

    out.push(Check::at_most(
        format!("k{k}_lowerbound_dominance"),
        near.value,
        window_theta * 1.02,
    ));

    Ok(out)
}
