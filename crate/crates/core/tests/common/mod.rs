//! Independent oracles and corpus builders shared by integration tests.
//!
//! The oracles here enumerate action profiles directly and never call the
//! library's contraction code.

#![allow(dead_code)]

use rand::Rng;
use satpath::exec::derive_seed;
use satpath::io::generate_random_game;
use satpath::sampling::{random_profile, rng_from_seed};
use satpath::{Game, StrategyProfile};

/// All pure action profiles in table order (last player fastest).
pub fn all_profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &k in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Σ_a r^i(a) Π_j x^j(a^j) by brute-force enumeration.
pub fn brute_reward(game: &Game, x: &StrategyProfile, player: usize) -> f64 {
    let counts = game.action_counts();
    all_profiles(counts)
        .iter()
        .enumerate()
        .map(|(flat, a)| {
            let w: f64 = a
                .iter()
                .enumerate()
                .map(|(j, &aj)| x.strategy(j).probs()[aj])
                .product();
            game.payoffs(player)[flat] * w
        })
        .sum()
}

/// `R^i(δ_a, x^{-i})` for each `a`, by enumeration.
pub fn brute_pure_payoffs(game: &Game, x: &StrategyProfile, player: usize) -> Vec<f64> {
    let counts = game.action_counts();
    let mut out = vec![0.0; counts[player]];
    for (flat, a) in all_profiles(counts).iter().enumerate() {
        let w: f64 = a
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != player)
            .map(|(j, &aj)| x.strategy(j).probs()[aj])
            .product();
        out[a[player]] += game.payoffs(player)[flat] * w;
    }
    out
}

pub fn brute_gap(game: &Game, x: &StrategyProfile, player: usize) -> f64 {
    let pure = brute_pure_payoffs(game, x, player);
    let best = pure.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    best - brute_reward(game, x, player)
}

/// Closed-form equilibrium oracle for 2×2 games.
#[derive(Debug, Clone, PartialEq)]
pub enum TwoByTwo {
    /// Pure equilibria as (row, col).
    Pure(Vec<(usize, usize)>),
    /// Unique fully mixed equilibrium: P(row 0), P(col 0).
    Mixed(f64, f64),
}

pub fn two_by_two_oracle(game: &Game) -> TwoByTwo {
    let a = |r: usize, c: usize| game.payoffs(0)[r * 2 + c];
    let b = |r: usize, c: usize| game.payoffs(1)[r * 2 + c];
    let mut pure = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            if a(r, c) >= a(1 - r, c) && b(r, c) >= b(r, 1 - c) {
                pure.push((r, c));
            }
        }
    }
    if !pure.is_empty() {
        return TwoByTwo::Pure(pure);
    }
    let q = (a(1, 1) - a(0, 1)) / (a(0, 0) - a(0, 1) - a(1, 0) + a(1, 1));
    let p = (b(1, 1) - b(1, 0)) / (b(0, 0) - b(1, 0) - b(0, 1) + b(1, 1));
    TwoByTwo::Mixed(p, q)
}

/// One entry of the constructor corpus.
pub struct Instance {
    pub game_index: u64,
    pub profile_index: u64,
    pub game: Game,
    pub x1: StrategyProfile,
    pub worse_seed: u64,
}

/// Random games with n ∈ {2,3,4}, |A^i| ∈ {2,3}, payoffs U[-1,1], and
/// `per_game` initial profiles each (every player independently pure or
/// interior with probability ½).
pub fn corpus(master: u64, games: u64, per_game: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    for g in 0..games {
        let mut rng = rng_from_seed(derive_seed(master, g, 0));
        let n = rng.random_range(2..=4usize);
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3usize)).collect();
        let game = generate_random_game(n, &counts, derive_seed(master, g, 1)).unwrap();
        for k in 0..per_game {
            let mut r = rng_from_seed(derive_seed(master, g, 100 + k));
            let x1 = random_profile(&game, 0.5, &mut r);
            out.push(Instance {
                game_index: g,
                profile_index: k,
                game: game.clone(),
                x1,
                worse_seed: derive_seed(master ^ 0xABCD, g, k),
            });
        }
    }
    out
}

/// Random game with the given shape from a seed.
pub fn game_from_seed(seed: u64, n_range: (usize, usize), a_range: (usize, usize)) -> Game {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(n_range.0..=n_range.1);
    let counts: Vec<usize> = (0..n).map(|_| rng.random_range(a_range.0..=a_range.1)).collect();
    generate_random_game(n, &counts, seed.wrapping_add(1)).unwrap()
}
