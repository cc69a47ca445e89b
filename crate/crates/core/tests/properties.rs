use harvest_core::fmt::f17;
use harvest_core::game::{self, best_response, game_payoff, GameConfig, NashSettings, StrategyProfile};
use harvest_core::limitp::{self, ReplicaConfig};
use harvest_core::nondurable::{self, ConstantSharePlan};
use harvest_core::ModelParams;
use proptest::prelude::*;

fn model(theta: f64) -> ModelParams {
    ModelParams::new(0.15, 0.0, 10.0, theta, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn revenue_vanishes_at_both_ends(m in 1usize..12, r in 0.0f64..0.5, rho in 0.0f64..0.3) {
        let p = ModelParams::new(r, rho, 10.0, 10.0 / m as f64, 1.0).unwrap();
        for a in [0.0, 1.0] {
            let plan = ConstantSharePlan::new(a, p.round_time).unwrap();
            let g = nondurable::aggregate_revenue_closed(&plan, &p).unwrap();
            prop_assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn f17_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
        let s = f17(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn cournot_harvests_more_than_collusion(players in 2usize..200, rounds in 1usize..8) {
        let cournot = limitp::replica_cournot_share(players, rounds).unwrap();
        let collusive = limitp::replica_collusive_share(rounds).unwrap();
        prop_assert!(cournot > collusive, "{cournot} <= {collusive}");
    }

    #[test]
    fn sustainability_gap_falls_with_discounting(players in 2usize..20, rho in 1e-3f64..5.0, step in 1e-4f64..1.0) {
        let cfg = ReplicaConfig { players, ..ReplicaConfig::default() };
        let g = GameConfig::new(players, vec![1.0, 1.0], 1.0).unwrap();
        let profits = limitp::deviation_profit(&cfg, &g).unwrap();
        let a = limitp::sustainability_gap(&profits, rho, 1.0);
        let b = limitp::sustainability_gap(&profits, rho + step, 1.0);
        prop_assert!(b < a, "gap rose from {a} to {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn oracle_matches_closed_form(m in 1usize..6, alpha in 0.02f64..0.98) {
        let p = model(10.0 / m as f64);
        let plan = ConstantSharePlan::new(alpha, p.round_time).unwrap();
        let closed = nondurable::aggregate_revenue_closed(&plan, &p).unwrap();
        let oracle = nondurable::aggregate_revenue_oracle(&plan, &p, 4096).unwrap();
        prop_assert!((closed - oracle).abs() / closed.abs().max(1.0) <= 1e-8, "{closed} vs {oracle}");
    }

    #[test]
    fn nash_survives_random_deviations(players in 1usize..5, g2 in 0.9f64..1.4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let cfg = GameConfig::new(players, vec![1.0, g2], 1.0).unwrap();
        let eq = game::solve_nash(&cfg, &NashSettings::default()).unwrap();
        prop_assert!(eq.converged);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for i in 0..players {
            let base = game_payoff(i, &eq.profile, &cfg).unwrap();
            let others: f64 = eq.profile.total() - eq.profile.shares[i].iter().sum::<f64>();
            let cap = (1.0 - others).max(0.0);
            for _ in 0..50 {
                let a: f64 = rng.random::<f64>() * cap;
                let b: f64 = rng.random::<f64>() * (cap - a);
                let mut rows = eq.profile.shares.clone();
                rows[i] = vec![a, b];
                let moved = StrategyProfile::new(rows).unwrap();
                let dev = game_payoff(i, &moved, &cfg).unwrap();
                prop_assert!(dev <= base + 1e-8, "player {i}: {dev} > {base}");
            }
            // and the best reply cannot do better either
            let br = best_response(i, &eq.profile, &cfg).unwrap();
            prop_assert!(br.payoff <= base + 1e-8);
        }
    }
}
