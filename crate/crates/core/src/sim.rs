//! Monte Carlo engine for fleets of independent searchers.
//!
//! A trial runs every searcher step-synchronously until one of them opens
//! the treasure box or the step cap is hit. Searchers may crash at a given
//! step, and each may see the boxes through its own index map `σ_s`: it
//! samples in its perceived numbering and finds the treasure when it opens
//! perceived box `σ_s(x)`. Perceived boxes with no preimage are extra boxes
//! and never hold the treasure.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{format_sig, CompensatedSum};
use crate::rng::{derive_seed, trial_seed, SearchRng};
use crate::strategy::{BoxIndex, SearchParams, StrategyKind};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sublinear number of extra boxes a searcher sees before true box `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rate")]
pub enum ExtraRate {
    /// `r(i) = ceil(sqrt(i))`
    Sqrt,
    /// `r(i) = scale * i^exponent` with `0 <= exponent < 1`
    Power { exponent: f64, scale: f64 },
}

impl ExtraRate {
    fn extra(&self, i: BoxIndex) -> u64 {
        match *self {
            ExtraRate::Sqrt => {
                let r = (i as f64).sqrt().ceil() as u64;
                // Correct float rounding around perfect squares.
                if r > 0 && (r - 1) * (r - 1) >= i {
                    r - 1
                } else if r * r < i {
                    r + 1
                } else {
                    r
                }
            }
            ExtraRate::Power { exponent, scale } => (scale * (i as f64).powf(exponent)).floor() as u64,
        }
    }
}

/// A searcher's private renumbering `σ_s` of the true boxes.
///
/// Every kind is injective with `σ_s(i) / i -> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Perturbation {
    Identity,
    /// `σ(i) = i + c`
    Shift {
        c: u64,
    },
    /// `σ(i) = i + floor(r(i))`
    ExtraBoxes {
        rate: ExtraRate,
    },
    /// Seeded permutation inside consecutive windows of `window + 1` boxes,
    /// so no box moves more than `window` places.
    LocalShuffle {
        window: u64,
        seed: u64,
    },
}

impl Perturbation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Perturbation::ExtraBoxes {
                rate: ExtraRate::Power { exponent, scale },
            } => {
                if !(0.0..1.0).contains(&exponent) {
                    return Err(Error::Perturbation(format!(
                        "extra-box exponent {exponent} must lie in [0, 1) for r(i)/i -> 0"
                    )));
                }
                if !(scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::Perturbation(format!(
                        "extra-box scale {scale} must be finite and >= 0"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Perceived index `σ(i)` of true box `i`.
    pub fn map(&self, i: BoxIndex) -> BoxIndex {
        debug_assert!(i >= 1);
        match *self {
            Perturbation::Identity => i,
            Perturbation::Shift { c } => i + c,
            Perturbation::ExtraBoxes { rate } => i + rate.extra(i),
            Perturbation::LocalShuffle { window, seed } => {
                let width = window + 1;
                let chunk = (i - 1) / width;
                let mut order: Vec<u64> = (0..width).collect();
                order.shuffle(&mut SearchRng::seed_from_u64(derive_seed(seed, chunk)));
                chunk * width + order[((i - 1) % width) as usize] + 1
            }
        }
    }

    /// The same perturbation family instantiated for searcher `s`; only
    /// seeded kinds differ between searchers.
    pub fn for_searcher(&self, searcher_id: u32) -> Perturbation {
        match *self {
            Perturbation::LocalShuffle { window, seed } => Perturbation::LocalShuffle {
                window,
                seed: derive_seed(seed, u64::from(searcher_id)),
            },
            other => other,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Perturbation::Identity => "identity".into(),
            Perturbation::Shift { c } => format!("shift-{c}"),
            Perturbation::ExtraBoxes { rate: ExtraRate::Sqrt } => "extra-sqrt".into(),
            Perturbation::ExtraBoxes {
                rate: ExtraRate::Power { exponent, scale },
            } => format!("extra-power-{exponent}-{scale}"),
            Perturbation::LocalShuffle { window, .. } => format!("local-shuffle-{window}"),
        }
    }
}

/// Steps at which searchers stop peeking.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashSchedule {
    entries: Vec<(u32, u64)>,
}

impl CrashSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(entries: Vec<(u32, u64)>) -> Result<Self> {
        let mut ids: Vec<u32> = entries.iter().map(|e| e.0).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("crashes", "at most one crash per searcher"));
        }
        if entries.iter().any(|e| e.1 == 0) {
            return Err(invalid("crashes", "crash times start at 1"));
        }
        Ok(Self { entries })
    }

    /// Searchers `1..=count` crash at `time`.
    pub fn first_n_at(count: u32, time: u64) -> Result<Self> {
        Self::new((1..=count).map(|s| (s, time)).collect())
    }

    pub fn entries(&self) -> &[(u32, u64)] {
        &self.entries
    }

    pub fn crash_time(&self, searcher_id: u32) -> Option<u64> {
        self.entries.iter().find(|e| e.0 == searcher_id).map(|e| e.1)
    }
}

/// Inputs of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Fleet size the strategy is designed for.
    pub params: SearchParams,
    /// Number of searchers actually launched; usually `params.k()`.
    pub searchers: u32,
    pub strategy: StrategyKind,
    pub treasure: BoxIndex,
    pub seed: u64,
    pub step_cap: u64,
    pub crashes: CrashSchedule,
    /// Empty, or one map per searcher.
    pub perturbations: Vec<Perturbation>,
}

impl TrialConfig {
    pub fn new(params: SearchParams, strategy: StrategyKind, treasure: BoxIndex, seed: u64) -> Self {
        Self {
            params,
            searchers: params.k(),
            strategy,
            treasure,
            seed,
            step_cap: default_step_cap(params, treasure),
            crashes: CrashSchedule::none(),
            perturbations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.strategy.validate()?;
        if self.treasure == 0 {
            return Err(invalid("treasure", "boxes are numbered from 1"));
        }
        if self.searchers == 0 {
            return Err(invalid("searchers", "need at least one searcher"));
        }
        if self.step_cap == 0 {
            return Err(invalid("step_cap", "must be at least 1"));
        }
        if let Some(&(id, _)) = self.crashes.entries().iter().find(|e| e.0 == 0 || e.0 > self.searchers) {
            return Err(Error::InvalidSearcherId { id, k: self.searchers });
        }
        if !self.perturbations.is_empty() && self.perturbations.len() != self.searchers as usize {
            return Err(invalid(
                "perturbations",
                format!(
                    "expected 0 or {} entries, got {}",
                    self.searchers,
                    self.perturbations.len()
                ),
            ));
        }
        self.perturbations.iter().try_for_each(Perturbation::validate)
    }

    fn with_seed(&self, seed: u64) -> TrialConfig {
        TrialConfig { seed, ..self.clone() }
    }
}

/// `50 x (k + 1)` steps.
pub fn default_step_cap(params: SearchParams, treasure: BoxIndex) -> u64 {
    50 * treasure.max(1) * params.block_size()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Step at which the treasure was first opened; `None` if the cap was hit.
    pub time: Option<u64>,
    pub first_finder: Option<u32>,
}

impl TrialOutcome {
    pub fn is_discovery(&self) -> bool {
        self.time.is_some()
    }
}

/// Simulates one trial. Deterministic in `config`.
pub fn run_trial(config: &TrialConfig) -> Result<TrialOutcome> {
    config.validate()?;
    let mut fleet = (1..=config.searchers)
        .map(|id| {
            let sampler = config.strategy.sampler(config.params, id, config.seed)?;
            let target = config
                .perturbations
                .get(id as usize - 1)
                .map_or(config.treasure, |p| p.map(config.treasure));
            let crash = config.crashes.crash_time(id).unwrap_or(u64::MAX);
            Ok((id, sampler, target, crash))
        })
        .collect::<Result<Vec<_>>>()?;
    let last_alive_step = fleet.iter().map(|s| s.3 - 1).max().unwrap_or(0);
    let horizon = config.step_cap.min(last_alive_step);
    for t in 1..=horizon {
        for (id, sampler, target, crash) in fleet.iter_mut() {
            if t >= *crash {
                continue;
            }
            if sampler.next_box() == *target {
                return Ok(TrialOutcome {
                    time: Some(t),
                    first_finder: Some(*id),
                });
            }
        }
    }
    Ok(TrialOutcome {
        time: None,
        first_finder: None,
    })
}

/// Runs `trials` trials whose seeds derive from `template.seed` and the
/// trial index. The result is in trial order whatever the thread count.
pub fn run_trials(template: &TrialConfig, trials: u64) -> Result<Vec<TrialOutcome>> {
    template.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|i| run_trial(&template.with_seed(trial_seed(template.seed, i))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub trials: u64,
    pub treasure: BoxIndex,
    /// Mean over discovering trials.
    pub mean_time: f64,
    pub stderr: f64,
    /// `x / mean_time`
    pub speedup: f64,
    /// 95% interval on the mean time.
    pub ci95: (f64, f64),
    /// The interval above mapped through `x / t`.
    pub speedup_ci95: (f64, f64),
    pub non_discovery_count: u64,
}

impl RunStats {
    pub fn overlaps(&self, other: &RunStats) -> bool {
        self.ci95.0 <= other.ci95.1 && other.ci95.0 <= self.ci95.1
    }
}

/// Aggregates outcomes; trials that hit the cap are counted, not averaged.
pub fn summarize(outcomes: &[TrialOutcome], treasure: BoxIndex) -> RunStats {
    let times: Vec<f64> = outcomes.iter().filter_map(|o| o.time).map(|t| t as f64).collect();
    let n = times.len() as f64;
    let mean = times.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = if times.len() > 1 {
        times
            .iter()
            .map(|t| (t - mean) * (t - mean))
            .collect::<CompensatedSum>()
            .value()
            / (n - 1.0)
    } else {
        0.0
    };
    let stderr = (var / n).sqrt();
    let ci95 = (mean - Z95 * stderr, mean + Z95 * stderr);
    let x = treasure as f64;
    RunStats {
        trials: outcomes.len() as u64,
        treasure,
        mean_time: mean,
        stderr,
        speedup: x / mean,
        ci95,
        speedup_ci95: (x / ci95.1, if ci95.0 > 0.0 { x / ci95.0 } else { f64::INFINITY }),
        non_discovery_count: (outcomes.len() - times.len()) as u64,
    }
}

/// Mean discovery time and speed-up over `trials` seeded trials.
///
/// Fails with [`Error::NonDiscovery`] if any trial hit the step cap.
pub fn estimate_speedup(template: &TrialConfig, trials: u64) -> Result<RunStats> {
    if trials < 2 {
        return Err(invalid("trials", "need at least 2 trials for a standard error"));
    }
    let outcomes = run_trials(template, trials)?;
    let stats = summarize(&outcomes, template.treasure);
    if stats.non_discovery_count > 0 {
        return Err(Error::NonDiscovery {
            count: stats.non_discovery_count,
            trials,
        });
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashReport {
    pub k: u32,
    pub k_prime: u32,
    pub x: BoxIndex,
    /// `k` searchers running the `(k - k')` design, searchers `1..=k'` crashed at step 1.
    pub crashed: RunStats,
    /// `k - k'` healthy searchers running the same design.
    pub reference: RunStats,
    pub ci_overlap: bool,
}

/// Compares a fleet that loses `k_prime` of its `k` searchers at step 1 with
/// a healthy fleet of the surviving size.
///
/// The crashed searchers are the lowest ids, so survivors draw from
/// different streams than the reference fleet.
pub fn crash_experiment(k: u32, k_prime: u32, x: BoxIndex, trials: u64, seed: u64) -> Result<CrashReport> {
    if k_prime >= k {
        return Err(invalid("k_prime", format!("must be below k = {k}")));
    }
    let design = SearchParams::new(k - k_prime)?;
    let mut crashed = TrialConfig::new(design, StrategyKind::Algorithm1, x, seed);
    crashed.searchers = k;
    crashed.crashes = CrashSchedule::first_n_at(k_prime, 1)?;
    let reference = TrialConfig::new(design, StrategyKind::Algorithm1, x, seed);
    let crashed = estimate_speedup(&crashed, trials)?;
    let reference = estimate_speedup(&reference, trials)?;
    Ok(CrashReport {
        k,
        k_prime,
        x,
        ci_overlap: crashed.overlaps(&reference),
        crashed,
        reference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub perturbation: Perturbation,
    pub label: String,
    pub stats: RunStats,
    /// `perturbed speed-up / baseline speed-up - 1`
    pub relative_change: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub k: u32,
    pub x: BoxIndex,
    pub tolerance: f64,
    pub baseline: RunStats,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !r.violation)
    }
}

/// Runs the nested-pool sampler with and without each reordering, using the
/// same base seed so every comparison shares its random draws. A row is a
/// violation when its speed-up falls below `(1 - tolerance)` times baseline.
pub fn robustness_experiment(
    params: SearchParams,
    x: BoxIndex,
    perturbations: &[Perturbation],
    trials: u64,
    tolerance: f64,
    seed: u64,
) -> Result<RobustnessReport> {
    perturbations.iter().try_for_each(Perturbation::validate)?;
    let base = TrialConfig::new(params, StrategyKind::Algorithm1, x, seed);
    let baseline = estimate_speedup(&base, trials)?;
    let rows = perturbations
        .iter()
        .map(|p| {
            let mut cfg = base.clone();
            cfg.perturbations = (1..=params.k()).map(|s| p.for_searcher(s)).collect();
            // Extra boxes push the treasure further out in perceived order.
            let reach = cfg.perturbations.iter().map(|q| q.map(x)).max().unwrap_or(x);
            cfg.step_cap = default_step_cap(params, reach);
            let stats = estimate_speedup(&cfg, trials)?;
            let relative_change = stats.speedup / baseline.speedup - 1.0;
            Ok(RobustnessRow {
                perturbation: *p,
                label: p.label(),
                violation: stats.speedup < baseline.speedup * (1.0 - tolerance),
                relative_change,
                stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessReport {
        k: params.k(),
        x,
        tolerance,
        baseline,
        rows,
    })
}

pub const SWEEP_CSV_HEADER: &str = "k,x,strategy,perturbation,trials,mean_time,stderr,speedup";

pub fn sweep_csv_row(k: u32, strategy: StrategyKind, perturbation: &str, stats: &RunStats) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        k,
        stats.treasure,
        strategy,
        perturbation,
        stats.trials,
        format_sig(stats.mean_time, 12),
        format_sig(stats.stderr, 12),
        format_sig(stats.speedup, 12)
    )
}
