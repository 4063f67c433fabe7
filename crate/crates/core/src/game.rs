//! Finite normal-form games, mixed strategies and deviation gaps.
//!
//! Payoff tensors are stored flat, row-major over action profiles with the
//! last player's action varying fastest. For two players with two actions
//! each the order is `(0,0), (0,1), (1,0), (1,1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of players.
pub const MAX_PLAYERS: usize = 6;
/// Largest supported action count per player.
pub const MAX_ACTIONS: usize = 6;
/// Tolerance on the sum of a mixed strategy.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Default satisfaction tolerance for exact best responding.
pub const DEFAULT_SAT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    action_counts: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

impl Game {
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 {
            return Err(Error::invalid("a game needs at least one player"));
        }
        if n > MAX_PLAYERS {
            return Err(Error::invalid(format!(
                "{n} players exceeds the supported maximum of {MAX_PLAYERS}"
            )));
        }
        for (i, &k) in action_counts.iter().enumerate() {
            if k == 0 {
                return Err(Error::invalid(format!("player {i} has no actions")));
            }
            if k > MAX_ACTIONS {
                return Err(Error::invalid(format!(
                    "player {i} has {k} actions, supported maximum is {MAX_ACTIONS}"
                )));
            }
        }
        if payoffs.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} payoff arrays, got {}",
                payoffs.len()
            )));
        }
        let size: usize = action_counts.iter().product();
        for (i, p) in payoffs.iter().enumerate() {
            if p.len() != size {
                return Err(Error::invalid(format!(
                    "payoff array {i} has length {}, expected {size}",
                    p.len()
                )));
            }
            if let Some(pos) = p.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "payoff array {i} has non-finite entry at {pos}"
                )));
            }
        }
        Ok(Game {
            action_counts,
            payoffs,
        })
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_profiles(&self) -> usize {
        self.action_counts.iter().product()
    }

    /// Flat payoff table of `player`.
    pub fn payoffs(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn all_payoffs(&self) -> &[Vec<f64>] {
        &self.payoffs
    }

    /// Flat index of a pure action profile.
    pub fn flat_index(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.num_players());
        actions
            .iter()
            .zip(&self.action_counts)
            .fold(0, |idx, (&a, &k)| idx * k + a)
    }

    pub fn payoff(&self, player: usize, actions: &[usize]) -> f64 {
        self.payoffs[player][self.flat_index(actions)]
    }

    /// Largest absolute payoff over all players.
    pub fn max_abs_payoff(&self) -> f64 {
        self.payoffs
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `max r^i - min r^i` over players; bounds every deviation gap.
    pub fn payoff_spread(&self) -> f64 {
        self.payoffs
            .iter()
            .map(|p| {
                let (lo, hi) = p
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players() {
            return Err(Error::invalid(format!(
                "player {player} out of range for a {}-player game",
                self.num_players()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.num_players() != self.num_players() {
            return Err(Error::invalid(format!(
                "profile has {} strategies, game has {} players",
                profile.num_players(),
                self.num_players()
            )));
        }
        for (i, (s, &k)) in profile.iter().zip(&self.action_counts).enumerate() {
            if s.len() != k {
                return Err(Error::invalid(format!(
                    "player {i} strategy has {} entries, expected {k}",
                    s.len()
                )));
            }
        }
        Ok(())
    }
}

/// Contracts a flat row-major tensor against per-axis weights. Axes with
/// `None` are kept; the result is the row-major tensor over kept axes.
pub(crate) fn contract(tensor: &[f64], dims: &[usize], weights: &[Option<&[f64]>]) -> Vec<f64> {
    let mut cur = tensor.to_vec();
    let mut outer: usize = dims.iter().product();
    let mut tail = 1usize;
    for axis in (0..dims.len()).rev() {
        let d = dims[axis];
        outer /= d;
        match weights[axis] {
            None => tail *= d,
            Some(w) => {
                let mut next = vec![0.0; outer * tail];
                for o in 0..outer {
                    let src = &cur[o * d * tail..(o + 1) * d * tail];
                    let dst = &mut next[o * tail..(o + 1) * tail];
                    for (a, &wa) in w.iter().enumerate() {
                        if wa == 0.0 {
                            continue;
                        }
                        let row = &src[a * tail..(a + 1) * tail];
                        for (acc, &v) in dst.iter_mut().zip(row) {
                            *acc += wa * v;
                        }
                    }
                }
                cur = next;
            }
        }
    }
    cur
}

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("mixed strategy over zero actions"));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!(
                "mixed strategy has invalid probability {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!(
                "mixed strategy sums to {sum}, not 1"
            )));
        }
        Ok(MixedStrategy(probs))
    }

    /// The vertex `δ_action`.
    pub fn pure(num_actions: usize, action: usize) -> Self {
        assert!(action < num_actions, "action {action} out of range");
        let mut v = vec![0.0; num_actions];
        v[action] = 1.0;
        MixedStrategy(v)
    }

    pub fn uniform(num_actions: usize) -> Self {
        assert!(num_actions > 0);
        MixedStrategy(vec![1.0 / num_actions as f64; num_actions])
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid("weights must be nonnegative with positive sum"));
        }
        MixedStrategy::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices with strictly positive probability.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(a, _)| a)
            .collect()
    }

    /// `Some(a)` when this strategy is the vertex `δ_a`.
    pub fn as_pure(&self) -> Option<usize> {
        let s = self.support();
        (s.len() == 1 && self.0[s[0]] == 1.0).then(|| s[0])
    }

    /// Bitwise equality of the stored probabilities.
    pub fn bit_eq(&self, other: &MixedStrategy) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// `(1 - t) * self + t * other`.
    pub fn mix(&self, other: &MixedStrategy, t: f64) -> MixedStrategy {
        assert_eq!(self.len(), other.len());
        MixedStrategy(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MixedStrategy::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<MixedStrategy>);

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        StrategyProfile(strategies)
    }

    pub fn pure(game: &Game, actions: &[usize]) -> Result<Self> {
        if actions.len() != game.num_players() {
            return Err(Error::invalid("pure profile length mismatch"));
        }
        let mut out = Vec::with_capacity(actions.len());
        for (i, (&a, &k)) in actions.iter().zip(game.action_counts()).enumerate() {
            if a >= k {
                return Err(Error::invalid(format!(
                    "action {a} out of range for player {i}"
                )));
            }
            out.push(MixedStrategy::pure(k, a));
        }
        Ok(StrategyProfile(out))
    }

    pub fn uniform(game: &Game) -> Self {
        StrategyProfile(
            game.action_counts()
                .iter()
                .map(|&k| MixedStrategy::uniform(k))
                .collect(),
        )
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn strategy(&self, player: usize) -> &MixedStrategy {
        &self.0[player]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MixedStrategy> {
        self.0.iter()
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.0
    }

    /// Copy of `self` with `player`'s strategy replaced.
    pub fn with_strategy(&self, player: usize, s: MixedStrategy) -> Self {
        let mut out = self.clone();
        out.0[player] = s;
        out
    }

    pub fn set_strategy(&mut self, player: usize, s: MixedStrategy) {
        self.0[player] = s;
    }

    pub fn same_shape(&self, other: &StrategyProfile) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.len() == b.len())
    }

    pub fn bit_eq(&self, other: &StrategyProfile) -> bool {
        self.same_shape(other) && self.0.iter().zip(&other.0).all(|(a, b)| a.bit_eq(b))
    }

    /// Max absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &StrategyProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .flat_map(|(a, b)| a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Euclidean distance over all coordinates.
    pub fn l2_dist(&self, other: &StrategyProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .flat_map(|(a, b)| a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).powi(2)))
            .sum::<f64>()
            .sqrt()
    }
}

/// Per-player gaps and the satisfied/unsatisfied partition at a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionReport {
    pub gaps: Vec<f64>,
    pub satisfied: Vec<usize>,
    pub unsatisfied: Vec<usize>,
    pub epsilon: f64,
}

impl SatisfactionReport {
    pub fn is_satisfied(&self, player: usize) -> bool {
        self.gaps[player] <= self.epsilon
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_nash(&self) -> bool {
        self.unsatisfied.is_empty()
    }
}

fn weights_of(profile: &StrategyProfile) -> Vec<Option<&[f64]>> {
    profile.iter().map(|s| Some(s.probs())).collect()
}

/// `R^i(x)`: exact expectation of `player`'s payoff under `profile`.
pub fn expected_reward(game: &Game, profile: &StrategyProfile, player: usize) -> Result<f64> {
    game.check_player(player)?;
    game.check_profile(profile)?;
    let w = weights_of(profile);
    Ok(contract(game.payoffs(player), game.action_counts(), &w)[0])
}

/// Entry `a` is `R^i(δ_a, x^{-i})`.
pub fn pure_action_payoffs(
    game: &Game,
    profile: &StrategyProfile,
    player: usize,
) -> Result<Vec<f64>> {
    game.check_player(player)?;
    game.check_profile(profile)?;
    Ok(pure_payoffs_unchecked(game, profile, player))
}

pub(crate) fn pure_payoffs_unchecked(game: &Game, profile: &StrategyProfile, player: usize) -> Vec<f64> {
    let mut w = weights_of(profile);
    w[player] = None;
    contract(game.payoffs(player), game.action_counts(), &w)
}

fn gap_unchecked(game: &Game, profile: &StrategyProfile, player: usize) -> f64 {
    let pure = pure_payoffs_unchecked(game, profile, player);
    let best = pure.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let current: f64 = pure
        .iter()
        .zip(profile.strategy(player).probs())
        .map(|(u, p)| u * p)
        .sum();
    (best - current).max(0.0)
}

/// `F^i(x) = max_a R^i(δ_a, x^{-i}) - R^i(x)`, clamped at zero.
pub fn deviation_gap(game: &Game, profile: &StrategyProfile, player: usize) -> Result<f64> {
    game.check_player(player)?;
    game.check_profile(profile)?;
    Ok(gap_unchecked(game, profile, player))
}

/// All players' gaps.
pub fn deviation_gaps(game: &Game, profile: &StrategyProfile) -> Result<Vec<f64>> {
    game.check_profile(profile)?;
    Ok((0..game.num_players())
        .map(|i| gap_unchecked(game, profile, i))
        .collect())
}

pub fn satisfaction_report(
    game: &Game,
    profile: &StrategyProfile,
    epsilon: f64,
) -> Result<SatisfactionReport> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let gaps = deviation_gaps(game, profile)?;
    let (satisfied, unsatisfied) = (0..gaps.len()).partition(|&i| gaps[i] <= epsilon);
    Ok(SatisfactionReport {
        gaps,
        satisfied,
        unsatisfied,
        epsilon,
    })
}

pub fn is_eps_best_response(
    game: &Game,
    profile: &StrategyProfile,
    player: usize,
    epsilon: f64,
) -> Result<bool> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(deviation_gap(game, profile, player)? <= epsilon)
}

/// Small named games used throughout tests and the CLI.
pub mod fixtures {
    use super::Game;

    /// Heads = 0, tails = 1. Player 0 wants to match.
    pub fn matching_pennies() -> Game {
        let r0 = vec![1.0, -1.0, -1.0, 1.0];
        let r1 = r0.iter().map(|v| -v).collect();
        Game::new(vec![2, 2], vec![r0, r1]).unwrap()
    }

    /// Cooperate = 0, defect = 1; T=5, R=3, P=1, S=0.
    pub fn prisoners_dilemma() -> Game {
        Game::new(
            vec![2, 2],
            vec![vec![3.0, 0.0, 5.0, 1.0], vec![3.0, 5.0, 0.0, 1.0]],
        )
        .unwrap()
    }

    /// Rock = 0, paper = 1, scissors = 2; win +1, loss -1, tie 0.
    pub fn rock_paper_scissors() -> Game {
        let beats = |a: usize, b: usize| (a + 3 - b) % 3 == 1;
        let mut r0 = Vec::with_capacity(9);
        for a in 0..3 {
            for b in 0..3 {
                r0.push(if a == b {
                    0.0
                } else if beats(a, b) {
                    1.0
                } else {
                    -1.0
                });
            }
        }
        let r1 = r0.iter().map(|v: &f64| -v).collect();
        Game::new(vec![3, 3], vec![r0, r1]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn pure(game: &Game, a: &[usize]) -> StrategyProfile {
        StrategyProfile::pure(game, a).unwrap()
    }

    fn profile(v: Vec<Vec<f64>>) -> StrategyProfile {
        StrategyProfile::new(v.into_iter().map(|s| MixedStrategy::new(s).unwrap()).collect())
    }

    #[test]
    fn flat_index_last_player_fastest() {
        let g = Game::new(vec![2, 3], vec![(0..6).map(f64::from).collect(), vec![0.0; 6]]).unwrap();
        assert_eq!(g.flat_index(&[0, 2]), 2);
        assert_eq!(g.flat_index(&[1, 0]), 3);
        assert_eq!(g.payoff(0, &[1, 2]), 5.0);
    }

    #[test]
    fn expected_reward_examples() {
        let mp = matching_pennies();
        let u = StrategyProfile::uniform(&mp);
        assert_eq!(expected_reward(&mp, &u, 0).unwrap(), 0.0);
        assert_eq!(expected_reward(&mp, &u, 1).unwrap(), 0.0);
        assert_eq!(expected_reward(&mp, &pure(&mp, &[0, 0]), 0).unwrap(), 1.0);
        let pd = prisoners_dilemma();
        assert_eq!(expected_reward(&pd, &pure(&pd, &[1, 1]), 0).unwrap(), 1.0);
    }

    #[test]
    fn pure_action_payoff_examples() {
        let mp = matching_pennies();
        let u = StrategyProfile::uniform(&mp);
        assert_eq!(pure_action_payoffs(&mp, &u, 0).unwrap(), vec![0.0, 0.0]);
        let hh = pure(&mp, &[0, 0]);
        assert_eq!(pure_action_payoffs(&mp, &hh, 0).unwrap(), vec![1.0, -1.0]);
        let pd = prisoners_dilemma();
        let cc = pure(&pd, &[0, 0]);
        assert_eq!(pure_action_payoffs(&pd, &cc, 0).unwrap(), vec![3.0, 5.0]);
    }

    #[test]
    fn deviation_gap_examples() {
        let mp = matching_pennies();
        let hh = pure(&mp, &[0, 0]);
        assert_eq!(deviation_gap(&mp, &hh, 0).unwrap(), 0.0);
        assert_eq!(deviation_gap(&mp, &hh, 1).unwrap(), 2.0);
        let rps = rock_paper_scissors();
        let u = StrategyProfile::uniform(&rps);
        for i in 0..2 {
            assert!(deviation_gap(&rps, &u, i).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn satisfaction_report_examples() {
        let mp = matching_pennies();
        let r = satisfaction_report(&mp, &pure(&mp, &[0, 0]), 1e-9).unwrap();
        assert_eq!(r.satisfied, vec![0]);
        assert_eq!(r.unsatisfied, vec![1]);

        let rps = rock_paper_scissors();
        let r = satisfaction_report(&rps, &StrategyProfile::uniform(&rps), 1e-9).unwrap();
        assert_eq!(r.satisfied, vec![0, 1]);

        let pd = prisoners_dilemma();
        let r = satisfaction_report(&pd, &pure(&pd, &[0, 0]), 1e-9).unwrap();
        assert!(r.satisfied.is_empty());
        assert_eq!(r.gaps, vec![2.0, 2.0]);
    }

    #[test]
    fn eps_best_response_examples() {
        let mp = matching_pennies();
        let hh = pure(&mp, &[0, 0]);
        assert!(is_eps_best_response(&mp, &hh, 0, 0.0).unwrap());
        assert!(!is_eps_best_response(&mp, &hh, 1, 0.0).unwrap());
        assert!(is_eps_best_response(&mp, &hh, 1, 2.0).unwrap());
        assert!(is_eps_best_response(&mp, &hh, 1, -1.0).is_err());
    }

    #[test]
    fn input_errors() {
        let mp = matching_pennies();
        let bad = profile(vec![vec![1.0, 0.0]]);
        assert!(matches!(expected_reward(&mp, &bad, 0), Err(Error::InvalidInput(_))));
        let hh = pure(&mp, &[0, 0]);
        assert!(matches!(expected_reward(&mp, &hh, 2), Err(Error::InvalidInput(_))));
        let wrong_dim = profile(vec![vec![1.0], vec![0.5, 0.5]]);
        assert!(deviation_gap(&mp, &wrong_dim, 1).is_err());
    }

    #[test]
    fn game_validation() {
        assert!(Game::new(vec![], vec![]).is_err());
        assert!(Game::new(vec![2, 0], vec![vec![], vec![]]).is_err());
        assert!(Game::new(vec![2], vec![vec![1.0]]).is_err());
        assert!(Game::new(vec![2], vec![vec![1.0, f64::NAN]]).is_err());
        assert!(Game::new(vec![7], vec![vec![0.0; 7]]).is_err());
        assert!(Game::new(vec![1; 7], vec![vec![0.0]; 7]).is_err());
    }

    #[test]
    fn strategy_validation() {
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![-0.1, 1.1]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        assert_eq!(MixedStrategy::pure(3, 2).as_pure(), Some(2));
        assert_eq!(MixedStrategy::uniform(2).as_pure(), None);
        let s: std::result::Result<MixedStrategy, _> = serde_json::from_str("[0.3, 0.3]");
        assert!(s.is_err());
    }

    #[test]
    fn contraction_matches_enumeration() {
        let g = Game::new(
            vec![2, 3, 2],
            vec![(0..12).map(|v| (v * v % 7) as f64 - 3.0).collect(); 3],
        )
        .unwrap();
        let x = profile(vec![vec![0.3, 0.7], vec![0.2, 0.5, 0.3], vec![0.9, 0.1]]);
        let mut brute = 0.0;
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    brute += g.payoff(1, &[a, b, c])
                        * x.strategy(0).probs()[a]
                        * x.strategy(1).probs()[b]
                        * x.strategy(2).probs()[c];
                }
            }
        }
        assert!((expected_reward(&g, &x, 1).unwrap() - brute).abs() < 1e-14);
        let middle = pure_action_payoffs(&g, &x, 1).unwrap();
        for (b, v) in middle.iter().enumerate() {
            let mut want = 0.0;
            for a in 0..2 {
                for c in 0..2 {
                    want += g.payoff(1, &[a, b, c])
                        * x.strategy(0).probs()[a]
                        * x.strategy(2).probs()[c];
                }
            }
            assert!((v - want).abs() < 1e-14);
        }
    }
}
