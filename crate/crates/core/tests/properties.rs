use proptest::prelude::*;

use relaysched_core::feasibility::{check_result, CheckOptions};
use relaysched_core::greedy::{greedy, greedy_n, greedy_n_with, GreedyNOptions};
use relaysched_core::ilp::{build_model_with, solve_bruteforce, solve_exact, ModelOptions, ProblemKind, SolveOptions};
use relaysched_core::metrics::{delays, sweep_fairness};
use relaysched_core::simulator::{apply_penetration, recompute_with_backups, PenetrationConfig, Replanner};
use relaysched_core::synth::tiny_instance;
use relaysched_core::{FairnessWeight, LinearModel};

fn kinds() -> Vec<ProblemKind> {
    let half = FairnessWeight::new(1, 2).unwrap();
    vec![
        ProblemKind::Cspv,
        ProblemKind::fair(FairnessWeight::ZERO),
        ProblemKind::fair(half),
        ProblemKind::fair(FairnessWeight::ONE),
        ProblemKind::delay_fair(half, 2.0, 0.0).unwrap(),
        ProblemKind::delay_fair(half, 5.0, 0.0).unwrap(),
    ]
}

fn exact(m: &LinearModel) -> relaysched_core::Result<relaysched_core::SolveResult> {
    solve_exact(m, &SolveOptions::default())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn exact_matches_enumeration(seed in any::<u64>(), exclusive in any::<bool>(), reachable in any::<bool>()) {
        let (s, c) = tiny_instance(seed, 25);
        let opts = ModelOptions { vehicle_exclusive: exclusive, reachable_sensors_only: reachable, ..ModelOptions::default() };
        for kind in kinds() {
            let m = build_model_with(&s, &c, kind, &opts).unwrap();
            let a = exact(&m).unwrap();
            let b = solve_bruteforce(&m).unwrap();
            prop_assert!(a.stats.proven_optimal);
            prop_assert_eq!(m.exact_objective(&a.schedule), m.exact_objective(&b.schedule), "{:?}", kind);
            prop_assert_eq!(a.objective_value, b.objective_value);
            let check = CheckOptions {
                vehicle_exclusive: exclusive,
                delay_limit_s: kind.delay().map(|d| d.seconds()),
            };
            prop_assert!(check_result(&s, &a, &check).is_empty());
            prop_assert!(check_result(&s, &b, &check).is_empty());
        }
    }

    #[test]
    fn baselines_are_feasible_and_dominated(seed in any::<u64>()) {
        let (s, c) = tiny_instance(seed, 25);
        let g = greedy(&s, &c);
        let gn = greedy_n(&s, &c);
        let gr = greedy_n_with(&s, &c, &GreedyNOptions { reclaim_excluded_units: true });
        let check = CheckOptions { vehicle_exclusive: true, ..CheckOptions::default() };
        for r in [&g, &gn, &gr] {
            prop_assert!(check_result(&s, r, &check).is_empty(), "{:?}", check_result(&s, r, &check));
        }
        prop_assert!(gn.throughput() >= g.throughput());
        prop_assert!(g.schedule.iter().all(|t| gn.schedule.contains(t)));

        let m = build_model_with(&s, &c, ProblemKind::Cspv, &ModelOptions::default()).unwrap();
        let opt = exact(&m).unwrap();
        prop_assert!(opt.throughput() >= gn.throughput());
        let excl = ModelOptions { vehicle_exclusive: true, ..ModelOptions::default() };
        let opt_excl = exact(&build_model_with(&s, &c, ProblemKind::Cspv, &excl).unwrap()).unwrap();
        prop_assert!(opt_excl.throughput() >= gn.throughput());
        prop_assert!(opt.throughput() >= opt_excl.throughput());
    }

    #[test]
    fn weight_sweep_is_monotone(seed in any::<u64>()) {
        let (s, c) = tiny_instance(seed, 25);
        let grid = FairnessWeight::grid(20);
        let out = sweep_fairness(&s, &c, ProblemKind::Cspv, &grid, &ModelOptions::default(), exact).unwrap();
        for w in out.rows.windows(2) {
            prop_assert!(w[0].throughput_term <= w[1].throughput_term);
            prop_assert!(w[0].gap_term <= w[1].gap_term);
        }
        prop_assert!(out.rows.iter().any(|r| r.weight == out.selected));
    }

    #[test]
    fn delay_bounded_solutions_respect_bound(seed in any::<u64>(), tol in prop_oneof![Just(0.0), Just(0.1)]) {
        let (s, c) = tiny_instance(seed, 25);
        let half = FairnessWeight::new(1, 2).unwrap();
        for bound in [1.0, 3.0, 6.0] {
            let kind = ProblemKind::delay_fair(half, bound, tol).unwrap();
            let m = build_model_with(&s, &c, kind, &ModelOptions::default()).unwrap();
            let r = exact(&m).unwrap();
            for d in delays(&r.schedule, &s).unwrap() {
                prop_assert!(d < bound * (1.0 + tol));
            }
        }
    }

    #[test]
    fn recomputation_never_loses_units(seed in any::<u64>(), pen_seed in any::<u64>(), rate in 0.0..=1.0f64) {
        let (s, c) = tiny_instance(seed, 25);
        let m = build_model_with(&s, &c, ProblemKind::Cspv, &ModelOptions::default()).unwrap();
        let plan = exact(&m).unwrap();
        let cfg = PenetrationConfig::new(rate, pen_seed, true).unwrap();
        let dropped = apply_penetration(&plan, &cfg, &s).unwrap();
        prop_assert!(dropped.realized.iter().all(|t| !dropped.no_show_vehicles.contains(&t.vehicle)));
        let replanners = [Replanner::Greedy, Replanner::Exact { kind: ProblemKind::Cspv, options: SolveOptions::default() }];
        for rp in &replanners {
            let re = recompute_with_backups(&dropped, &s, &c, rp).unwrap();
            prop_assert!(re.realized.len() >= dropped.realized.len());
            prop_assert!(dropped.realized.iter().all(|t| re.realized.contains(t)));
            prop_assert!(re.realized.iter().all(|t| !re.no_show_vehicles.contains(&t.vehicle)));
            prop_assert!(re.realized_metrics.total_spend <= s.params.c_max);
            let max_planned = plan.schedule.per_sensor_counts(s.n_sensors()).into_iter().max().unwrap_or(0);
            prop_assert!(dropped.realized_metrics.fairness_gap_units <= max_planned);
        }
    }

    #[test]
    fn exact_matches_enumeration_with_commitments(seed in any::<u64>(), pen_seed in any::<u64>(), rate in 0.0..=1.0f64) {
        let (s, c) = tiny_instance(seed, 25);
        let plan = solve_bruteforce(&build_model_with(&s, &c, ProblemKind::Cspv, &ModelOptions::default()).unwrap()).unwrap();
        let dropped = apply_penetration(&plan, &PenetrationConfig::new(rate, pen_seed, true).unwrap(), &s).unwrap();
        let opts = ModelOptions {
            fixed: dropped.realized.iter().copied().collect(),
            excluded_vehicles: dropped.no_show_vehicles.clone(),
            ..ModelOptions::default()
        };
        for kind in kinds() {
            let m = build_model_with(&s, &c, kind, &opts).unwrap();
            match (exact(&m), solve_bruteforce(&m)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.objective_value, b.objective_value);
                    prop_assert!(dropped.realized.iter().all(|t| a.schedule.contains(t)));
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?}: exact {:?}, enumeration {:?}", kind, a.is_ok(), b.is_ok()),
            }
        }
    }
}
