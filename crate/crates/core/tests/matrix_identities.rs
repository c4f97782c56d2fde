use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use parsearch::bounds::gamma_ratio_product;
use parsearch::matrix::{column_sum_check_exact, n_value_algorithm1, n_value_algorithm1_exact, NMatrixView};
use parsearch::{SearchParams, StrategyKind};
use proptest::prelude::*;

fn params(k: u32) -> SearchParams {
    SearchParams::new(k).unwrap()
}

#[test]
fn column_identity_exact_up_to_200() {
    for k in [1u32, 2, 3, 5, 10] {
        let view = NMatrixView::new(StrategyKind::Algorithm1, params(k)).unwrap();
        let x_max = view.support_bound(200);
        for t in 0..=200 {
            assert!(
                column_sum_check_exact(&view, t, x_max).unwrap().is_zero(),
                "k={k} t={t}"
            );
        }
    }
}

#[test]
fn two_step_product_in_floating_point() {
    for k in [2u32, 3, 5] {
        let p = params(k);
        let delta = p.delta().unwrap();
        for xp in 1..=60u64 {
            for tp in xp..=60 {
                let n = n_value_algorithm1(p, u64::from(k + 1) * xp, 2 * tp).unwrap();
                let g = gamma_ratio_product(xp, tp, delta).unwrap();
                assert!(((n - g) / g).abs() <= 1e-12, "k={k} x'={xp} t'={tp}: {n} vs {g}");
            }
        }
    }
}

#[test]
fn two_step_product_exact() {
    // i/(i+δ) = i(k-1) / (i(k-1) + 2)
    for k in [2u32, 3, 5] {
        let p = params(k);
        let km1 = i64::from(k - 1);
        for xp in 1..=60u64 {
            let mut product = BigRational::one();
            for tp in xp..=60 {
                let i = tp as i64 * km1;
                product *= BigRational::new(BigInt::from(i), BigInt::from(i + 2));
                let n = n_value_algorithm1_exact(p, u64::from(k + 1) * xp, 2 * tp).unwrap();
                assert_eq!(n, product, "k={k} x'={xp} t'={tp}");
            }
        }
    }
}

proptest! {
    #[test]
    fn rows_are_non_increasing(k in 1u32..12, x in 1u64..400, t in 0u64..400) {
        let p = params(k);
        prop_assert!(n_value_algorithm1(p, x, t + 1).unwrap() <= n_value_algorithm1(p, x, t).unwrap());
    }

    #[test]
    fn rows_within_a_block_agree(k in 1u32..12, block in 1u64..100, t in 0u64..300) {
        let p = params(k);
        let first = (block - 1) * p.block_size() + 1;
        let row = n_value_algorithm1_exact(p, first, t).unwrap();
        for x in first..first + p.block_size() {
            prop_assert_eq!(&n_value_algorithm1_exact(p, x, t).unwrap(), &row);
        }
    }

    #[test]
    fn values_are_probabilities(k in 1u32..12, x in 1u64..500, t in 0u64..500) {
        let n = n_value_algorithm1(params(k), x, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&n));
    }

    #[test]
    fn column_identity_random(k in 1u32..20, t in 0u64..120, len in 1u64..8) {
        for strategy in [StrategyKind::Algorithm1, StrategyKind::BlockRandom { block_len: len }, StrategyKind::SoloExhaustive] {
            let view = NMatrixView::new(strategy, params(k)).unwrap();
            let x_max = view.support_bound(t) + 3;
            prop_assert!(column_sum_check_exact(&view, t, x_max).unwrap().is_zero());
        }
    }
}
