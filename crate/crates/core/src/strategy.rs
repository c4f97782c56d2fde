//! Search strategies as per-step box samplers.
//!
//! Boxes are 1-indexed. Every sampler emits one box per step and never
//! revisits a box.

use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{searcher_rng, SearchRng};

pub type BoxIndex = u64;

/// Fleet size and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchParams {
    k: u32,
}

impl SearchParams {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "the fleet needs at least one searcher"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Size of each increment of the nested candidate pools, `k + 1`.
    pub fn block_size(&self) -> u64 {
        u64::from(self.k) + 1
    }

    /// Decay exponent `2 / (k - 1)` of the two-step survival ratio; `None` for a solo searcher.
    pub fn delta(&self) -> Option<f64> {
        (self.k >= 2).then(|| 2.0 / f64::from(self.k - 1))
    }

    pub fn delta_exact(&self) -> Option<Ratio<u64>> {
        (self.k >= 2).then(|| Ratio::new(2, u64::from(self.k - 1)))
    }

    /// Largest index of the pool `I_{ceil(t/2)}` sampled at step `t`.
    pub fn pool_limit(&self, t: u64) -> u64 {
        t.div_ceil(2) * self.block_size()
    }

    /// Number of unvisited candidates available at step `t >= 1`.
    pub fn pool_size(&self, t: u64) -> u64 {
        debug_assert!(t >= 1);
        self.pool_limit(t) - (t - 1)
    }
}

/// Fleet-level strategy template. Searcher ids are assigned when the
/// per-searcher sampler is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StrategyKind {
    Algorithm1,
    CoordinatedPartition,
    SoloExhaustive,
    BlockRandom { block_len: u64 },
}

impl StrategyKind {
    pub const DEFAULT_BLOCK_LEN: u64 = 3;

    pub fn block_random() -> Self {
        StrategyKind::BlockRandom {
            block_len: Self::DEFAULT_BLOCK_LEN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyKind::BlockRandom { block_len: 0 } => Err(invalid("block_len", "block length must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Builds the sampler searcher `searcher_id` (1-based) runs within a trial.
    ///
    /// `params` is the fleet size the strategy is designed for; a fleet may
    /// hold more searchers than that (e.g. spares that crash), except under
    /// the round-robin partition where ids must lie in `1..=k`.
    pub fn sampler(&self, params: SearchParams, searcher_id: u32, trial_seed: u64) -> Result<Sampler> {
        self.validate()?;
        let out_of_range = match self {
            StrategyKind::CoordinatedPartition => searcher_id > params.k(),
            _ => false,
        };
        if searcher_id == 0 || out_of_range {
            return Err(Error::InvalidSearcherId {
                id: searcher_id,
                k: params.k(),
            });
        }
        let rng = searcher_rng(trial_seed, searcher_id);
        Ok(match *self {
            StrategyKind::Algorithm1 => Sampler::Algorithm1 {
                state: SearcherState::new(rng),
                params,
            },
            StrategyKind::CoordinatedPartition => Sampler::Coordinated {
                searcher_id,
                params,
                step: 0,
            },
            StrategyKind::SoloExhaustive => Sampler::Solo { step: 0 },
            StrategyKind::BlockRandom { block_len } => Sampler::BlockRandom {
                state: SearcherState::new(rng),
                block_len,
            },
        })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Algorithm1 => f.write_str("algorithm1"),
            StrategyKind::CoordinatedPartition => f.write_str("coordinated-partition"),
            StrategyKind::SoloExhaustive => f.write_str("solo-exhaustive"),
            StrategyKind::BlockRandom { block_len } => write!(f, "block-random-{block_len}"),
        }
    }
}

/// Boxes a searcher has opened, stored densely from index 1.
#[derive(Debug, Clone, Default)]
pub struct VisitedSet {
    marks: Vec<bool>,
    len: usize,
}

impl VisitedSet {
    pub fn contains(&self, index: BoxIndex) -> bool {
        index >= 1 && self.marks.get(index as usize - 1).copied().unwrap_or(false)
    }

    fn insert(&mut self, index: BoxIndex) {
        let slot = index as usize - 1;
        if slot >= self.marks.len() {
            self.marks.resize(slot + 1, false);
        }
        debug_assert!(!self.marks[slot], "box {index} revisited");
        self.marks[slot] = true;
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = BoxIndex> + '_ {
        self.marks
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i as BoxIndex + 1)
    }
}

/// One searcher's bookkeeping for incremental sampling without replacement.
///
/// `pool` holds the unvisited members of the current candidate set, so a
/// uniform draw is a single index plus `swap_remove`.
#[derive(Debug, Clone)]
pub struct SearcherState {
    visited: VisitedSet,
    pool: Vec<BoxIndex>,
    admitted: BoxIndex,
    step: u64,
    rng: SearchRng,
}

impl SearcherState {
    pub fn new(rng: SearchRng) -> Self {
        Self {
            visited: VisitedSet::default(),
            pool: Vec::new(),
            admitted: 0,
            step: 0,
            rng,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn visited(&self) -> &VisitedSet {
        &self.visited
    }

    /// Unvisited candidates of the current pool.
    pub fn candidates(&self) -> &[BoxIndex] {
        &self.pool
    }

    fn admit_up_to(&mut self, limit: BoxIndex) {
        if limit > self.admitted {
            self.pool.extend(self.admitted + 1..=limit);
            self.admitted = limit;
        }
    }

    fn draw(&mut self) -> BoxIndex {
        let slot = self.rng.gen_range(0..self.pool.len());
        let chosen = self.pool.swap_remove(slot);
        self.visited.insert(chosen);
        self.step += 1;
        chosen
    }
}

/// Step `t = state.step_count() + 1` of the nested-pool sampler: a uniform
/// unvisited index from `{1, ..., ceil(t/2) (k+1)}`.
pub fn next_box_algorithm1(state: &mut SearcherState, params: SearchParams) -> BoxIndex {
    let t = state.step + 1;
    state.admit_up_to(params.pool_limit(t));
    debug_assert_eq!(state.pool.len() as u64, params.pool_size(t));
    state.draw()
}

/// Box opened by searcher `searcher_id` at step `t` when the fleet splits the
/// boxes round-robin.
pub fn next_box_coordinated(searcher_id: u32, t: u64, params: SearchParams) -> Result<BoxIndex> {
    if searcher_id == 0 || searcher_id > params.k() {
        return Err(Error::InvalidSearcherId {
            id: searcher_id,
            k: params.k(),
        });
    }
    if t == 0 {
        return Err(invalid("t", "steps start at 1"));
    }
    Ok(u64::from(searcher_id) + (t - 1) * u64::from(params.k()))
}

/// Works through consecutive blocks of `block_len` boxes, uniformly at random
/// within the current block.
pub fn next_box_block_random(state: &mut SearcherState, block_len: u64) -> BoxIndex {
    debug_assert!(block_len >= 1);
    if state.pool.is_empty() {
        let block = state.step / block_len;
        state.admit_up_to((block + 1) * block_len);
    }
    state.draw()
}

pub fn next_box_solo_exhaustive(t: u64) -> BoxIndex {
    t
}

/// A searcher's strategy bound to its state.
#[derive(Debug, Clone)]
pub enum Sampler {
    Algorithm1 {
        state: SearcherState,
        params: SearchParams,
    },
    Coordinated {
        searcher_id: u32,
        params: SearchParams,
        step: u64,
    },
    Solo {
        step: u64,
    },
    BlockRandom {
        state: SearcherState,
        block_len: u64,
    },
}

impl Sampler {
    pub fn next_box(&mut self) -> BoxIndex {
        match self {
            Sampler::Algorithm1 { state, params } => next_box_algorithm1(state, *params),
            Sampler::Coordinated {
                searcher_id,
                params,
                step,
            } => {
                *step += 1;
                u64::from(*searcher_id) + (*step - 1) * u64::from(params.k())
            }
            Sampler::Solo { step } => {
                *step += 1;
                next_box_solo_exhaustive(*step)
            }
            Sampler::BlockRandom { state, block_len } => next_box_block_random(state, *block_len),
        }
    }

    pub fn step_count(&self) -> u64 {
        match self {
            Sampler::Algorithm1 { state, .. } | Sampler::BlockRandom { state, .. } => state.step,
            Sampler::Coordinated { step, .. } | Sampler::Solo { step } => *step,
        }
    }
}

impl Iterator for Sampler {
    type Item = BoxIndex;

    fn next(&mut self) -> Option<BoxIndex> {
        Some(self.next_box())
    }
}
