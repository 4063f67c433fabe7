mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use satpath::dynamics::{run_dynamics, ExplorerPolicy};
use satpath::io::{game_to_json, parse_game, parse_trace, write_trace, OutputFormat, Trace};
use satpath::sampling::{dirichlet_uniform, random_profile, rng_from_seed};
use satpath::satisficing::{build_z_lambda, in_nob, in_worse, is_accessible};
use satpath::{
    construct_path, deviation_gap, find_nash, find_subgame_nash, satisfaction_report, verify_nash, verify_path,
    Execution, MixedStrategy, SolverConfig, StrategyProfile, WorseSearchConfig,
};

use common::{brute_gap, brute_reward, game_from_seed};

const EPS: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reward_and_gap_match_enumeration(seed in any::<u64>(), pure_prob in 0.0..1.0f64) {
        let game = game_from_seed(seed, (1, 4), (1, 4));
        let x = random_profile(&game, pure_prob, &mut rng_from_seed(seed ^ 1));
        for i in 0..game.num_players() {
            let r = satpath::expected_reward(&game, &x, i).unwrap();
            prop_assert!((r - brute_reward(&game, &x, i)).abs() <= 1e-12);
            let g = deviation_gap(&game, &x, i).unwrap();
            prop_assert!(g >= 0.0);
            prop_assert!((g - brute_gap(&game, &x, i).max(0.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn pure_profiles_read_the_table(seed in any::<u64>()) {
        let game = game_from_seed(seed, (1, 4), (1, 4));
        let mut rng = rng_from_seed(seed);
        let actions: Vec<usize> = game.action_counts().iter().map(|&k| rand::Rng::random_range(&mut rng, 0..k)).collect();
        let x = StrategyProfile::pure(&game, &actions).unwrap();
        for i in 0..game.num_players() {
            prop_assert_eq!(satpath::expected_reward(&game, &x, i).unwrap(), game.payoff(i, &actions));
        }
    }

    #[test]
    fn set_inclusions(seed in any::<u64>(), pure_prob in 0.0..1.0f64) {
        let game = game_from_seed(seed, (2, 4), (2, 3));
        let mut rng = rng_from_seed(seed ^ 2);
        let x = random_profile(&game, pure_prob, &mut rng);
        let rep = satisfaction_report(&game, &x, EPS).unwrap();
        // y keeps the satisfied players half the time so Access is often hit.
        let mut y = random_profile(&game, pure_prob, &mut rng);
        if seed % 2 == 0 {
            for &i in &rep.satisfied {
                y.set_strategy(i, x.strategy(i).clone());
            }
        }
        let acc = is_accessible(&x, &y, &rep).unwrap();
        let nob = in_nob(&game, &x, &y, EPS).unwrap();
        let worse = in_worse(&game, &x, &y, EPS).unwrap();
        prop_assert!(!worse || nob);
        prop_assert!(!nob || acc);
        prop_assert!(is_accessible(&x, &x, &rep).unwrap());
        prop_assert!(in_nob(&game, &x, &x, EPS).unwrap());
    }

    #[test]
    fn solver_output_is_an_equilibrium(seed in any::<u64>()) {
        let game = game_from_seed(seed, (2, 3), (2, 3));
        let config = SolverConfig::default();
        let z = find_nash(&game, &config).unwrap();
        prop_assert!(verify_nash(&game, &z, config.tolerance).unwrap());
        let again = find_nash(&game, &config).unwrap();
        prop_assert!(z.bit_eq(&again));
        let seq = find_nash(&game, &SolverConfig { execution: Execution::Sequential, ..config }).unwrap();
        prop_assert!(z.bit_eq(&seq));
    }

    #[test]
    fn subgame_keeps_frozen_players(seed in any::<u64>(), mask in 1u32..7) {
        let game = game_from_seed(seed, (3, 3), (2, 3));
        let x = random_profile(&game, 0.5, &mut rng_from_seed(seed ^ 3));
        let frozen: BTreeMap<usize, MixedStrategy> = (0..3)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| (i, x.strategy(i).clone()))
            .collect();
        let z = find_subgame_nash(&game, &frozen, &SolverConfig::default()).unwrap();
        let rep = satisfaction_report(&game, &z, EPS).unwrap();
        for i in 0..3 {
            if let Some(s) = frozen.get(&i) {
                prop_assert!(z.strategy(i).bit_eq(s));
            } else {
                prop_assert!(rep.is_satisfied(i));
            }
        }
    }

    #[test]
    fn paths_are_valid_and_reproducible(seed in any::<u64>()) {
        let game = game_from_seed(seed, (2, 3), (2, 3));
        let x1 = random_profile(&game, 0.5, &mut rng_from_seed(seed ^ 4));
        let worse = WorseSearchConfig { rng_seed: seed, ..Default::default() };
        let solver = SolverConfig::default();
        let path = construct_path(&game, &x1, EPS, &worse, &solver).unwrap();
        let v = verify_path(&game, &path.profiles(), EPS, true, true).unwrap();
        prop_assert!(v.passed, "{:?}", v.violation);
        let again = construct_path(&game, &x1, EPS, &worse, &solver).unwrap();
        prop_assert_eq!(&path, &again);
        let seq = construct_path(
            &game,
            &x1,
            EPS,
            &WorseSearchConfig { execution: Execution::Sequential, ..worse },
            &SolverConfig { execution: Execution::Sequential, ..solver },
        ).unwrap();
        prop_assert_eq!(&path, &seq);
    }

    #[test]
    fn trajectories_satisfy_the_constraint(seed in any::<u64>(), kind in 0usize..3) {
        let game = game_from_seed(seed, (2, 3), (2, 3));
        let x1 = random_profile(&game, 0.5, &mut rng_from_seed(seed ^ 5));
        let explorer = [
            ExplorerPolicy::DirichletUniform,
            ExplorerPolicy::PureUniform,
            ExplorerPolicy::MixtureWithCurrent { mixture_weight: 0.5 },
        ][kind];
        let traj = run_dynamics(&game, &x1, 1e-6, 100, explorer, seed).unwrap();
        prop_assert!(verify_path(&game, &traj.profiles, 1e-6, false, false).unwrap().passed);
        if let Some(h) = traj.hit_step {
            prop_assert_eq!(h, traj.len());
        }
    }

    #[test]
    fn z_lambda_endpoints(seed in any::<u64>()) {
        let game = game_from_seed(seed, (2, 4), (2, 3));
        let mut rng = rng_from_seed(seed ^ 6);
        let x_k = random_profile(&game, 0.5, &mut rng);
        let x_star = random_profile(&game, 0.5, &mut rng);
        let w = random_profile(&game, 0.0, &mut rng);
        let unsat: Vec<usize> = (0..game.num_players()).filter(|i| (seed >> i) & 1 == 1).collect();
        let z0 = build_z_lambda(&x_star, &w, &unsat, &x_k, 0.0).unwrap();
        let z1 = build_z_lambda(&x_star, &w, &unsat, &x_k, 1.0).unwrap();
        for i in 0..game.num_players() {
            if unsat.contains(&i) {
                prop_assert!(z0.strategy(i).bit_eq(x_star.strategy(i)));
                prop_assert!(z1.strategy(i).bit_eq(w.strategy(i)));
            } else {
                prop_assert!(z0.strategy(i).bit_eq(x_k.strategy(i)));
            }
        }
    }

    #[test]
    fn game_json_round_trips(seed in any::<u64>()) {
        let game = game_from_seed(seed, (1, 4), (1, 4));
        let back = parse_game(&game_to_json(&game, Some("g"))).unwrap();
        prop_assert_eq!(back, game);
    }

    #[test]
    fn traces_round_trip(seed in any::<u64>(), csv in any::<bool>()) {
        let game = game_from_seed(seed, (2, 3), (2, 3));
        let mut rng = rng_from_seed(seed ^ 7);
        let mut x1 = random_profile(&game, 0.5, &mut rng);
        x1.set_strategy(0, dirichlet_uniform(game.action_counts()[0], &mut rng));
        let traj = run_dynamics(&game, &x1, 1e-6, 30, ExplorerPolicy::DirichletUniform, seed).unwrap();
        let format = if csv { OutputFormat::Csv } else { OutputFormat::Json };
        let mut buf = Vec::new();
        write_trace(Trace::Trajectory(&traj), format, &mut buf).unwrap();
        let parsed = parse_trace(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(parsed.profiles.len(), traj.profiles.len());
        for (a, b) in parsed.profiles.iter().zip(&traj.profiles) {
            prop_assert!(a.bit_eq(b));
        }
    }
}
