//! Minimizing `Σ a_i f_i^k` over `f_i ∈ [0, 1]` with total deficit
//! `Σ (1 - f_i) = T`.
//!
//! The optimum is `f_i = min(1, α / a_i^{1/(k-1)})` for the unique `α`
//! meeting the budget. The deficit is continuous and strictly decreasing
//! in `α` on `[0, max a_i^{1/(k-1)}]`, so bisection always brackets it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const BISECTION_CAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFillProblem {
    a: Vec<f64>,
    budget: f64,
    k: u32,
}

impl WaterFillProblem {
    pub fn new(a: Vec<f64>, budget: f64, k: u32) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("a", "need at least one weight"));
        }
        if let Some(w) = a.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid("a", format!("weights must be positive and finite, got {w}")));
        }
        if !(0.0..=a.len() as f64).contains(&budget) {
            return Err(invalid("budget", format!("T = {budget} outside [0, {}]", a.len())));
        }
        if k < 2 {
            return Err(invalid("k", "exponent must be at least 2"));
        }
        Ok(Self { a, budget, k })
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    fn root(&self, w: f64) -> f64 {
        w.powf(1.0 / f64::from(self.k - 1))
    }

    fn fill(&self, alpha: f64) -> Vec<f64> {
        self.a.iter().map(|&w| (alpha / self.root(w)).min(1.0)).collect()
    }

    /// `Σ (1 - f_i)` for the fill level `alpha`.
    pub fn deficit(&self, alpha: f64) -> f64 {
        self.fill(alpha).iter().map(|f| 1.0 - f).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFillSolution {
    pub f: Vec<f64>,
    pub alpha: f64,
    pub objective: f64,
    /// `|Σ (1 - f_i) - T|`
    pub residual: f64,
}

pub fn waterfill_objective(problem: &WaterFillProblem, f: &[f64]) -> f64 {
    let k = problem.k as i32;
    problem.a.iter().zip(f).map(|(a, f)| a * f.powi(k)).sum()
}

pub fn waterfill_closed_form(problem: &WaterFillProblem) -> Result<WaterFillSolution> {
    let mut lo = 0.0f64;
    let mut hi = problem.a.iter().map(|&w| problem.root(w)).fold(0.0, f64::max);
    if problem.budget == 0.0 {
        lo = hi;
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if problem.deficit(mid) > problem.budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the endpoint whose deficit is closer to the budget.
    let alpha = if (problem.deficit(lo) - problem.budget).abs() <= (problem.deficit(hi) - problem.budget).abs() {
        lo
    } else {
        hi
    };
    let f = problem.fill(alpha);
    let residual = (f.iter().map(|v| 1.0 - v).sum::<f64>() - problem.budget).abs();
    Ok(WaterFillSolution {
        objective: waterfill_objective(problem, &f),
        f,
        alpha,
        residual,
    })
}

/// Brute-force minimizer over a grid of the first `n - 1` coordinates, the
/// last one fixed by the budget.
///
/// The grid starts at spacing `1/100` over the whole cube and is refined
/// tenfold around the incumbent (half-width two old steps) until the spacing
/// reaches `final_step`. The objective is convex on a convex feasible set,
/// so the incumbent stays next to the optimum.
pub fn waterfill_grid_search(problem: &WaterFillProblem, final_step: f64) -> Result<(Vec<f64>, f64)> {
    if !(final_step > 0.0) {
        return Err(invalid("final_step", "must be positive"));
    }
    let n = problem.a.len();
    let free = n - 1;
    let full = n as f64 - problem.budget;
    let complete = |head: &[f64]| -> Option<Vec<f64>> {
        let last = full - head.iter().sum::<f64>();
        if !(-1e-12..=1.0 + 1e-12).contains(&last) {
            return None;
        }
        let mut f = head.to_vec();
        f.push(last.clamp(0.0, 1.0));
        Some(f)
    };
    let mut step = 0.01f64;
    let mut center = vec![0.5; free];
    let mut half = 0.5f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        let axes: Vec<Vec<f64>> = center
            .iter()
            .map(|&c| {
                let lo = (c - half).max(0.0);
                let hi = (c + half).min(1.0);
                let count = ((hi - lo) / step).round() as usize;
                (0..=count).map(|i| (lo + i as f64 * step).min(1.0)).collect()
            })
            .collect();
        let mut index = vec![0usize; free];
        let mut head = vec![0.0; free];
        loop {
            for (h, (axis, &i)) in head.iter_mut().zip(axes.iter().zip(&index)) {
                *h = axis[i];
            }
            if let Some(f) = complete(&head) {
                let value = waterfill_objective(problem, &f);
                if best.as_ref().is_none_or(|(_, b)| value < *b) {
                    best = Some((f, value));
                }
            }
            // odometer over the free coordinates
            let mut d = 0;
            while d < free {
                index[d] += 1;
                if index[d] < axes[d].len() {
                    break;
                }
                index[d] = 0;
                d += 1;
            }
            if d == free {
                break;
            }
        }
        if step <= final_step * (1.0 + 1e-9) {
            break;
        }
        let (f, _) = best
            .as_ref()
            .ok_or_else(|| invalid("budget", "no feasible grid point"))?;
        center = f[..free].to_vec();
        half = 2.0 * step;
        step /= 10.0;
    }
    best.ok_or_else(|| invalid("budget", "no feasible grid point"))
}

/// Minimizes `a1 f1^k + a2 f2^k` subject to `f1 + f2 = total`, `f1, f2 ∈ [0, 1]`.
///
/// The stationary point is `f1 = r/(1+r) total` with `r = (a2/a1)^{1/(k-1)}`;
/// the objective is convex in `f1`, so the minimizer is that point clamped to
/// the feasible interval `[max(0, total-1), min(1, total)]`.
pub fn rebalance_pair(a1: f64, a2: f64, total: f64, k: u32) -> Result<(f64, f64)> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(invalid("a", "weights must be positive"));
    }
    if !(0.0..=2.0).contains(&total) {
        return Err(invalid("total", format!("{total} outside [0, 2]")));
    }
    if k < 2 {
        return Err(invalid("k", "exponent must be at least 2"));
    }
    let r = (a2 / a1).powf(1.0 / f64::from(k - 1));
    let stationary = r / (1.0 + r) * total;
    let f1 = stationary.clamp((total - 1.0).max(0.0), total.min(1.0));
    Ok((f1, total - f1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(a: &[f64], budget: f64, k: u32) -> WaterFillProblem {
        WaterFillProblem::new(a.to_vec(), budget, k).unwrap()
    }

    #[test]
    fn equal_weights_split_evenly() {
        for n in 1..6 {
            let p = problem(&vec![2.5; n], n as f64 / 2.0, 3);
            let s = waterfill_closed_form(&p).unwrap();
            assert!(s.f.iter().all(|f| (f - 0.5).abs() < 1e-12), "{s:?}");
        }
    }

    #[test]
    fn zero_budget_keeps_everything_full() {
        let p = problem(&[1.0, 4.0, 0.5], 0.0, 2);
        let s = waterfill_closed_form(&p).unwrap();
        assert!(s.f.iter().all(|&f| f == 1.0));
        assert!((s.objective - 5.5).abs() < 1e-15);
    }

    #[test]
    fn full_budget_empties_everything() {
        let p = problem(&[1.0, 4.0, 0.5], 3.0, 2);
        let s = waterfill_closed_form(&p).unwrap();
        assert!(s.f.iter().all(|&f| f < 1e-12));
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn two_weights_against_grid() {
        // a = (1, 8), k = 2, T = 1/2: grid over f1 with f2 = 1.5 - f1.
        let p = problem(&[1.0, 8.0], 0.5, 2);
        let s = waterfill_closed_form(&p).unwrap();
        let steps = 1_000_000;
        let best = (0..=steps)
            .map(|i| i as f64 / steps as f64)
            .filter(|f1| (1.5 - f1) >= 0.0 && (1.5 - f1) <= 1.0)
            .map(|f1| waterfill_objective(&p, &[f1, 1.5 - f1]))
            .fold(f64::INFINITY, f64::min);
        assert!((s.objective - best).abs() < 1e-4, "{} vs {best}", s.objective);
        assert!(s.objective <= best + 1e-12);
    }

    #[test]
    fn objective_edges() {
        let p = problem(&[1.0, 2.0, 3.0], 1.0, 3);
        assert_eq!(waterfill_objective(&p, &[0.0; 3]), 0.0);
        assert_eq!(waterfill_objective(&p, &[1.0; 3]), 6.0);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(WaterFillProblem::new(vec![1.0, -1.0], 0.5, 2).is_err());
        assert!(WaterFillProblem::new(vec![1.0, 1.0], 2.5, 2).is_err());
        assert!(WaterFillProblem::new(vec![1.0, 1.0], -0.1, 2).is_err());
        assert!(WaterFillProblem::new(vec![1.0], 0.5, 1).is_err());
        assert!(WaterFillProblem::new(vec![], 0.0, 2).is_err());
    }

    #[test]
    fn pair_examples() {
        assert_eq!(rebalance_pair(3.0, 3.0, 1.0, 2).unwrap(), (0.5, 0.5));
        assert_eq!(rebalance_pair(1.0, 1.0, 2.0, 4).unwrap(), (1.0, 1.0));
        assert!(rebalance_pair(1.0, 1.0, 2.5, 2).is_err());
        assert!(rebalance_pair(0.0, 1.0, 1.0, 2).is_err());
    }

    #[test]
    fn pair_against_grid() {
        let cases = [
            (1.0, 16.0, 1.0, 3u32),
            (16.0, 1.0, 1.8, 3),
            (1.0, 2.0, 0.3, 2),
            (5.0, 0.1, 1.9, 4),
        ];
        for (a1, a2, total, k) in cases {
            let (f1, f2) = rebalance_pair(a1, a2, total, k).unwrap();
            assert!((f1 + f2 - total).abs() < 1e-15);
            let obj = |f1: f64| a1 * f1.powi(k as i32) + a2 * (total - f1).powi(k as i32);
            let steps = 1_000_000;
            let (lo, hi) = ((total - 1.0f64).max(0.0), total.min(1.0));
            let best = (0..=steps)
                .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
                .map(obj)
                .fold(f64::INFINITY, f64::min);
            assert!(
                (obj(f1) - best).abs() < 1e-4 && obj(f1) <= best + 1e-12,
                "{a1} {a2} {total} {k}"
            );
        }
    }

    #[test]
    fn alpha_is_monotone_and_continuous_in_budget() {
        let p0 = problem(&[0.7, 2.0, 5.0, 1.3], 0.0, 3);
        let grid = 2000;
        let mut prev: Option<f64> = None;
        for i in 0..=grid {
            let budget = 4.0 * i as f64 / grid as f64;
            let p = WaterFillProblem::new(p0.weights().to_vec(), budget, 3).unwrap();
            let alpha = waterfill_closed_form(&p).unwrap().alpha;
            if let Some(prev) = prev {
                assert!(alpha <= prev + 1e-12);
                // |dα/dT| = 1 / Σ_active a_i^{-1/(k-1)} <= max a_i^{1/(k-1)}
                let lipschitz = 5.0f64.sqrt();
                assert!(prev - alpha <= lipschitz * 4.0 / grid as f64 + 1e-9);
            }
            prev = Some(alpha);
        }
    }

    #[test]
    fn grid_search_agrees_with_closed_form() {
        let p = problem(&[1.0, 8.0], 0.5, 2);
        let (f, value) = waterfill_grid_search(&p, 1e-6).unwrap();
        let s = waterfill_closed_form(&p).unwrap();
        assert!(
            (value - s.objective).abs() < 1e-4 && s.objective <= value + 1e-12,
            "{f:?}"
        );
        let p = problem(&[0.4, 3.0, 1.1], 1.7, 3);
        let (_, value) = waterfill_grid_search(&p, 1e-6).unwrap();
        let s = waterfill_closed_form(&p).unwrap();
        assert!((value - s.objective).abs() < 1e-4 && s.objective <= value + 1e-12);
        let p = problem(&[2.0], 0.25, 2);
        assert_eq!(waterfill_grid_search(&p, 1e-6).unwrap().0, vec![0.75]);
    }

    #[test]
    fn random_feasible_points_never_beat_closed_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = crate::rng::SearchRng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=6);
            let k = rng.gen_range(2..=4);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..10.0)).collect();
            // A random feasible point: scale a random deficit vector onto the budget.
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let budget = rng.gen_range(0.0..n as f64);
            let total: f64 = raw.iter().sum();
            let mut deficit: Vec<f64> = raw.iter().map(|r| r / total * budget).collect();
            // Push any overflow above 1 onto the others.
            for _ in 0..n {
                let over: f64 = deficit.iter().map(|d| (d - 1.0).max(0.0)).sum();
                if over <= 0.0 {
                    break;
                }
                let room: f64 = deficit.iter().map(|d| (1.0 - d).max(0.0)).sum();
                for d in deficit.iter_mut() {
                    *d = if *d > 1.0 { 1.0 } else { *d + (1.0 - *d) / room * over };
                }
            }
            let p = WaterFillProblem::new(a, budget, k).unwrap();
            let f: Vec<f64> = deficit.iter().map(|d| (1.0 - d).clamp(0.0, 1.0)).collect();
            let s = waterfill_closed_form(&p).unwrap();
            assert!(s.residual <= 1e-10);
            assert!(s.objective <= waterfill_objective(&p, &f) + 1e-9);
        }
    }
}
