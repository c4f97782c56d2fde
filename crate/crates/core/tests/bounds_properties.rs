use parsearch::bounds::lower::weighted_average_integral;
use parsearch::bounds::{
    lowerbound_value, rebalance_pair, solve_gamma, theta_optimum, waterfill_closed_form, waterfill_objective,
    LowerBoundConfig, WaterFillProblem,
};
use parsearch::matrix::speedup_curve;
use parsearch::SearchParams;
use proptest::collection::vec;
use proptest::prelude::*;

#[test]
fn lower_bound_stays_below_achieved_theta() {
    for k in [2u32, 3, 5] {
        let near = lowerbound_value(&LowerBoundConfig::new(k, 2.001, 1.0).unwrap()).unwrap();
        let row = &speedup_curve(SearchParams::new(k).unwrap(), &[10_000], 1e-9, true).unwrap()[0];
        assert!(near.value <= row.window_theta.unwrap() * 1.02, "k={k}");
        assert!(((near.value - theta_optimum(k)) / theta_optimum(k)).abs() < 0.01);
    }
}

#[test]
fn exact_profile_is_at_least_the_closed_form() {
    for (k, a) in [(2u32, 3.0), (3, 3.0), (5, 2.5), (2, 4.0)] {
        let config = LowerBoundConfig::new(k, a, 1.0).unwrap();
        let closed = lowerbound_value(&config).unwrap();
        assert!(closed.quadrature_rel_error() < 1e-6, "k={k} a={a}");
        assert!(
            weighted_average_integral(&config).unwrap().value >= closed.value,
            "k={k} a={a}"
        );
    }
}

proptest! {
    #[test]
    fn waterfill_is_feasible(
        a in vec(0.01f64..100.0, 1..8),
        share in 0.0f64..=1.0,
        k in 2u32..6,
    ) {
        let budget = share * a.len() as f64;
        let problem = WaterFillProblem::new(a, budget, k).unwrap();
        let s = waterfill_closed_form(&problem).unwrap();
        prop_assert!(s.residual <= 1e-10);
        prop_assert!(s.f.iter().all(|f| (0.0..=1.0).contains(f)));
        prop_assert!((s.objective - waterfill_objective(&problem, &s.f)).abs() <= 1e-12 * s.objective.max(1.0));
    }

    #[test]
    fn waterfill_beats_pairwise_moves(
        a in vec(0.1f64..10.0, 2..6),
        share in 0.05f64..0.95,
        k in 2u32..5,
        i in 0usize..6,
        j in 0usize..6,
    ) {
        let n = a.len();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let problem = WaterFillProblem::new(a.clone(), share * n as f64, k).unwrap();
        let s = waterfill_closed_form(&problem).unwrap();
        let (fi, fj) = rebalance_pair(a[i], a[j], s.f[i] + s.f[j], k).unwrap();
        let mut moved = s.f.clone();
        moved[i] = fi;
        moved[j] = fj;
        prop_assert!(s.objective <= waterfill_objective(&problem, &moved) + 1e-9);
    }

    #[test]
    fn gamma_stays_in_bracket(k in 2u32..10, a in 2.01f64..6.0, s in 0.1f64..10.0, t in 0.001f64..1e6) {
        let config = LowerBoundConfig::new(k, a, s).unwrap();
        let g = solve_gamma(k, a, s, t).unwrap();
        let (lo, hi) = config.gamma_bracket(t);
        prop_assert!(g >= lo * (1.0 - 1e-12) && g <= hi * (1.0 + 1e-12), "{} {} {}", lo, g, hi);
    }
}
