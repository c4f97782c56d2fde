use std::collections::HashSet;

use parsearch::sim::{run_trial, Perturbation, TrialConfig};
use parsearch::{SearchParams, StrategyKind};
use proptest::prelude::*;

fn strategies() -> impl Strategy<Value = StrategyKind> {
    prop_oneof![
        Just(StrategyKind::Algorithm1),
        Just(StrategyKind::SoloExhaustive),
        (1u64..10).prop_map(|block_len| StrategyKind::BlockRandom { block_len }),
    ]
}

proptest! {
    #[test]
    fn no_box_is_opened_twice(k in 1u32..8, strategy in strategies(), seed: u64, steps in 1usize..2000) {
        let params = SearchParams::new(k).unwrap();
        let mut sampler = strategy.sampler(params, 1, seed).unwrap();
        let mut seen = HashSet::new();
        for _ in 0..steps {
            prop_assert!(seen.insert(sampler.next_box()));
        }
    }

    #[test]
    fn nested_pool_stays_in_its_pool(k in 1u32..8, seed: u64) {
        let params = SearchParams::new(k).unwrap();
        let mut sampler = StrategyKind::Algorithm1.sampler(params, 1, seed).unwrap();
        for t in 1..=500u64 {
            prop_assert!(sampler.next_box() <= params.pool_limit(t));
        }
    }

    #[test]
    fn trials_replay_from_their_seed(k in 1u32..5, x in 1u64..300, seed: u64) {
        let config = TrialConfig::new(SearchParams::new(k).unwrap(), StrategyKind::Algorithm1, x, seed);
        let first = run_trial(&config).unwrap();
        prop_assert_eq!(first, run_trial(&config).unwrap());
        prop_assert!(first.time.unwrap() >= 1);
    }

    #[test]
    fn shift_maps_are_injective(c in 0u64..50, start in 1u64..1_000_000) {
        let shift = Perturbation::Shift { c };
        let images: HashSet<u64> = (start..start + 200).map(|i| shift.map(i)).collect();
        prop_assert_eq!(images.len(), 200);
    }
}
