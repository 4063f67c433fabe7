//! Support-enumeration Nash solver for small n-player games.
//!
//! A profile with supports `S^1, ..., S^n` is an equilibrium iff every
//! supported action of a player earns the same expected payoff, no
//! unsupported action earns more, and each strategy lies on its simplex.
//! Two-player support systems are linear and solved directly; for three or
//! more players the indifference system is multilinear and is solved by a
//! damped Newton iteration with an analytic Jacobian.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, derive_seed, Execution};
use crate::game::{contract, deviation_gaps, Game, MixedStrategy, StrategyProfile};
use crate::sampling::rng_from_seed;

const NEWTON_MAX_ITERS: usize = 200;
const NEWTON_BLOWUP: f64 = 1e6;

/// Per-player nonempty action subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportProfile {
    supports: Vec<Vec<usize>>,
}

impl SupportProfile {
    /// Supports are sorted and deduplicated.
    pub fn new(game: &Game, mut supports: Vec<Vec<usize>>) -> Result<Self> {
        if supports.len() != game.num_players() {
            return Err(Error::invalid("support profile length mismatch"));
        }
        for (i, (s, &k)) in supports.iter_mut().zip(game.action_counts()).enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::invalid(format!("empty support for player {i}")));
            }
            if s.iter().any(|&a| a >= k) {
                return Err(Error::invalid(format!("support of player {i} out of range")));
            }
        }
        Ok(SupportProfile { supports })
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn total_size(&self) -> usize {
        self.supports.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Acceptance tolerance on deviation gaps and negative probabilities.
    pub tolerance: f64,
    /// Largest per-player support size considered; `None` means unlimited.
    pub max_support_size: Option<usize>,
    /// Acceptance threshold on the indifference system residual.
    pub residual_tolerance: f64,
    /// When false, the parallel search may return any equilibrium of the
    /// smallest support level rather than the first in enumeration order.
    pub deterministic_order: bool,
    /// Extra seeded Newton starts per support, used only in the fallback
    /// pass after the uniform-start pass finds nothing.
    pub newton_restarts: usize,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-9,
            max_support_size: None,
            residual_tolerance: 1e-8,
            deterministic_order: true,
            newton_restarts: 8,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.residual_tolerance > 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        if self.max_support_size == Some(0) {
            return Err(Error::invalid("max_support_size must be at least 1"));
        }
        Ok(())
    }
}

/// `true` iff every player's deviation gap is at most `epsilon`.
pub fn verify_nash(game: &Game, profile: &StrategyProfile, epsilon: f64) -> Result<bool> {
    Ok(max_gap(game, profile)? <= epsilon)
}

pub fn max_gap(game: &Game, profile: &StrategyProfile) -> Result<f64> {
    Ok(deviation_gaps(game, profile)?.into_iter().fold(0.0, f64::max))
}

/// Raw solution of a support system before acceptance checks.
struct RawSolution {
    probs: Vec<Vec<f64>>,
    residual: f64,
}

/// Outcome of solving one support system.
struct Candidate {
    profile: StrategyProfile,
    max_gap: f64,
    accepted: bool,
}

/// Solves the indifference system on `support` from the uniform-on-support
/// start and returns the profile if it passes every acceptance check.
pub fn solve_on_support(
    game: &Game,
    support: &SupportProfile,
    config: &SolverConfig,
) -> Result<Option<StrategyProfile>> {
    config.validate()?;
    if support.supports.len() != game.num_players() {
        return Err(Error::invalid("support profile does not match game"));
    }
    Ok(candidate(game, support, config, 0)
        .filter(|c| c.accepted)
        .map(|c| c.profile))
}

fn candidate(
    game: &Game,
    support: &SupportProfile,
    config: &SolverConfig,
    restarts: usize,
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for start in 0..=restarts {
        let raw = match game.num_players() {
            1 => solve_single(game, support),
            2 => solve_bimatrix(game, support),
            _ => solve_newton(game, support, start),
        };
        let Some(raw) = raw else { continue };
        let c = check(game, support, config, raw);
        if c.accepted {
            return Some(c);
        }
        if best.as_ref().is_none_or(|b| c.max_gap < b.max_gap) {
            best = Some(c);
        }
        if game.num_players() <= 2 {
            break;
        }
    }
    best
}

fn check(game: &Game, support: &SupportProfile, config: &SolverConfig, raw: RawSolution) -> Candidate {
    let mut feasible = raw.residual <= config.residual_tolerance;
    let mut strategies = Vec::with_capacity(raw.probs.len());
    for (i, p) in raw.probs.into_iter().enumerate() {
        if p.iter().any(|&v| v < -config.tolerance || !v.is_finite()) {
            feasible = false;
        }
        let clamped: Vec<f64> = p.iter().map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 }).collect();
        let s = MixedStrategy::from_weights(clamped).unwrap_or_else(|_| {
            let k = game.action_counts()[i];
            let mut w = vec![0.0; k];
            for &a in &support.supports[i] {
                w[a] = 1.0;
            }
            MixedStrategy::from_weights(w).expect("support is nonempty")
        });
        strategies.push(s);
    }
    let profile = StrategyProfile::new(strategies);
    let max_gap = deviation_gaps(game, &profile)
        .expect("shapes built from game")
        .into_iter()
        .fold(0.0, f64::max);
    // The gap check covers both indifference on the support and the absence
    // of a profitable unsupported action.
    let accepted = feasible && max_gap <= config.tolerance;
    Candidate {
        profile,
        max_gap,
        accepted,
    }
}

fn solve_single(game: &Game, support: &SupportProfile) -> Option<RawSolution> {
    let s = &support.supports[0];
    let u = game.payoffs(0);
    let (lo, hi) = s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(u[a]), hi.max(u[a])));
    let mut p = vec![0.0; game.action_counts()[0]];
    for &a in s {
        p[a] = 1.0 / s.len() as f64;
    }
    Some(RawSolution {
        probs: vec![p],
        residual: hi - lo,
    })
}

/// Least-squares solve via SVD; returns solution and max-abs residual.
fn lstsq(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let svd = m.clone().svd(true, true);
    let z = svd.solve(rhs, 1e-12).ok()?;
    let r = (m * &z - rhs).amax();
    r.is_finite().then_some((z, r))
}

/// Each player's indifference conditions pin down the opponent's mix, so the
/// two linear systems decouple and one pass reaches the fixed point.
fn solve_bimatrix(game: &Game, support: &SupportProfile) -> Option<RawSolution> {
    let counts = game.action_counts();
    let mut probs = vec![Vec::new(), Vec::new()];
    let mut residual: f64 = 0.0;
    for i in 0..2 {
        let j = 1 - i;
        let (si, sj) = (&support.supports[i], &support.supports[j]);
        let rows = si.len() + 1;
        let cols = sj.len() + 1;
        let mut m = DMatrix::<f64>::zeros(rows, cols);
        let mut rhs = DVector::<f64>::zeros(rows);
        for (r, &a) in si.iter().enumerate() {
            for (c, &b) in sj.iter().enumerate() {
                let acts = if i == 0 { [a, b] } else { [b, a] };
                m[(r, c)] = game.payoff(i, &acts);
            }
            m[(r, cols - 1)] = -1.0;
        }
        for c in 0..sj.len() {
            m[(rows - 1, c)] = 1.0;
        }
        rhs[rows - 1] = 1.0;
        let (z, r) = lstsq(&m, &rhs)?;
        residual = residual.max(r);
        let mut p = vec![0.0; counts[j]];
        for (c, &b) in sj.iter().enumerate() {
            p[b] = z[c];
        }
        probs[j] = p;
    }
    Some(RawSolution { probs, residual })
}

/// Indexing of the stacked unknown vector: player-major, support order.
struct Layout {
    offsets: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(support: &SupportProfile) -> Self {
        let mut offsets = Vec::with_capacity(support.supports.len());
        let mut total = 0;
        for s in &support.supports {
            offsets.push(total);
            total += s.len();
        }
        Layout { offsets, total }
    }
}

fn expand(game: &Game, support: &SupportProfile, layout: &Layout, z: &[f64]) -> Vec<Vec<f64>> {
    support
        .supports
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut p = vec![0.0; game.action_counts()[i]];
            for (m, &a) in s.iter().enumerate() {
                p[a] = z[layout.offsets[i] + m];
            }
            p
        })
        .collect()
}

/// Residual of the stacked system: for each player, payoff differences
/// `U(s_m) - U(s_0)` followed by the normalization `Σ p - 1`.
fn residual(game: &Game, support: &SupportProfile, layout: &Layout, probs: &[Vec<f64>]) -> DVector<f64> {
    let dims = game.action_counts();
    let mut f = DVector::zeros(layout.total);
    for (i, s) in support.supports.iter().enumerate() {
        let w: Vec<Option<&[f64]>> = probs
            .iter()
            .enumerate()
            .map(|(j, p)| (j != i).then_some(p.as_slice()))
            .collect();
        let u = contract(game.payoffs(i), dims, &w);
        let o = layout.offsets[i];
        for m in 1..s.len() {
            f[o + m - 1] = u[s[m]] - u[s[0]];
        }
        f[o + s.len() - 1] = s.iter().map(|&a| probs[i][a]).sum::<f64>() - 1.0;
    }
    f
}

/// `∂/∂p_j(b) [U_i(s_m) - U_i(s_0)]` is the same difference with player `j`
/// fixed at `δ_b`, read off the two-axis payoff slice of players `i` and `j`.
fn jacobian(game: &Game, support: &SupportProfile, layout: &Layout, probs: &[Vec<f64>]) -> DMatrix<f64> {
    let dims = game.action_counts();
    let n = game.num_players();
    let mut jac = DMatrix::zeros(layout.total, layout.total);
    for (i, si) in support.supports.iter().enumerate() {
        let oi = layout.offsets[i];
        for (m, _) in si.iter().enumerate() {
            jac[(oi + si.len() - 1, oi + m)] = 1.0;
        }
        if si.len() < 2 {
            continue;
        }
        for (j, sj) in support.supports.iter().enumerate() {
            if j == i {
                continue;
            }
            let w: Vec<Option<&[f64]>> = (0..n)
                .map(|k| (k != i && k != j).then(|| probs[k].as_slice()))
                .collect();
            let slice = contract(game.payoffs(i), dims, &w);
            let at = |a: usize, b: usize| {
                if i < j {
                    slice[a * dims[j] + b]
                } else {
                    slice[b * dims[i] + a]
                }
            };
            let oj = layout.offsets[j];
            for m in 1..si.len() {
                for (c, &b) in sj.iter().enumerate() {
                    jac[(oi + m - 1, oj + c)] = at(si[m], b) - at(si[0], b);
                }
            }
        }
    }
    jac
}

fn newton_start(game: &Game, support: &SupportProfile, layout: &Layout, start: usize) -> Vec<f64> {
    let mut z = vec![0.0; layout.total];
    if start == 0 {
        for (i, s) in support.supports.iter().enumerate() {
            for m in 0..s.len() {
                z[layout.offsets[i] + m] = 1.0 / s.len() as f64;
            }
        }
        return z;
    }
    let key = support
        .supports
        .iter()
        .flatten()
        .fold(game.num_profiles() as u64, |h, &a| h.wrapping_mul(31).wrapping_add(a as u64 + 1));
    let mut rng = rng_from_seed(derive_seed(key, start as u64, support.total_size() as u64));
    for (i, s) in support.supports.iter().enumerate() {
        let d = crate::sampling::dirichlet_uniform(s.len(), &mut rng);
        for (m, p) in d.probs().iter().enumerate() {
            z[layout.offsets[i] + m] = *p;
        }
    }
    z
}

fn solve_newton(game: &Game, support: &SupportProfile, start: usize) -> Option<RawSolution> {
    let layout = Layout::new(support);
    let mut z = newton_start(game, support, &layout, start);
    let mut probs = expand(game, support, &layout, &z);
    let mut f = residual(game, support, &layout, &probs);
    let mut norm = f.amax();
    for _ in 0..NEWTON_MAX_ITERS {
        if norm <= 1e-14 {
            break;
        }
        let jac = jacobian(game, support, &layout, &probs);
        let neg = -&f;
        let step = match jac.clone().lu().solve(&neg) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => jac.svd(true, true).solve(&neg, 1e-12).ok()?,
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let tp = expand(game, support, &layout, &trial);
            let tf = residual(game, support, &layout, &tp);
            let tn = tf.amax();
            if tn.is_finite() && tn < norm * (1.0 - 1e-4 * t) {
                z = trial;
                probs = tp;
                f = tf;
                norm = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || z.iter().any(|v| v.abs() > NEWTON_BLOWUP) {
            break;
        }
    }
    Some(RawSolution {
        probs,
        residual: norm,
    })
}

/// Nonempty subsets of `0..k` with at most `max` elements, ordered by size
/// then lexicographically.
fn subsets(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1 << k))
        .map(|mask| (0..k).filter(|a| mask & (1 << a) != 0).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.len() <= max)
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// All support profiles with the given total size, in lexicographic order of
/// each player's position in its own (size, lex) subset list.
fn level(per_player: &[Vec<Vec<usize>>], total: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(
        per_player: &[Vec<Vec<usize>>],
        i: usize,
        remaining: usize,
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if i == per_player.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest_min = per_player.len() - i - 1;
        for s in &per_player[i] {
            if s.len() + rest_min > remaining {
                continue;
            }
            cur.push(s.clone());
            rec(per_player, i + 1, remaining - s.len(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(per_player, 0, total, &mut Vec::new(), &mut out);
    out
}

/// Enumerates support profiles (smallest total size first) and returns the
/// first verified equilibrium.
pub fn find_nash(game: &Game, config: &SolverConfig) -> Result<StrategyProfile> {
    config.validate()?;
    let counts = game.action_counts();
    let per_player: Vec<Vec<Vec<usize>>> = counts
        .iter()
        .map(|&k| subsets(k, config.max_support_size.unwrap_or(k)))
        .collect();
    let max_total: usize = per_player
        .iter()
        .map(|l| l.last().map_or(0, Vec::len))
        .sum();
    let n = game.num_players();

    let attempt = |supports: &Vec<Vec<usize>>, restarts: usize| {
        let sp = SupportProfile {
            supports: supports.clone(),
        };
        candidate(game, &sp, config, restarts)
    };

    for total in n..=max_total {
        let lvl = level(&per_player, total);
        let hit = if config.deterministic_order || !config.execution.is_parallel() {
            exec::find_map_first(config.execution, &lvl, |s| {
                attempt(s, 0).filter(|c| c.accepted).map(|c| c.profile)
            })
        } else {
            find_map_any(&lvl, |s| attempt(s, 0).filter(|c| c.accepted).map(|c| c.profile))
        };
        if let Some(p) = hit {
            return Ok(p);
        }
    }

    // Fallback: seeded Newton restarts, keeping the best rejected candidate
    // for the error report.
    let mut best: Option<Candidate> = None;
    for total in n..=max_total {
        let lvl = level(&per_player, total);
        let results = exec::map_collect(config.execution, &lvl, |s| attempt(s, config.newton_restarts));
        for c in results.into_iter().flatten() {
            if c.accepted {
                return Ok(c.profile);
            }
            if best.as_ref().is_none_or(|b| c.max_gap < b.max_gap) {
                best = Some(c);
            }
        }
    }
    Err(Error::SolverIncomplete {
        best_gap: best.as_ref().map_or(f64::INFINITY, |c| c.max_gap),
        best: best.map(|c| c.profile),
    })
}

#[cfg(feature = "parallel")]
fn find_map_any<T, R, F>(items: &[T], f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().find_map_any(f)
}

#[cfg(not(feature = "parallel"))]
fn find_map_any<T, R, F>(items: &[T], f: F) -> Option<R>
where
    F: Fn(&T) -> Option<R>,
{
    items.iter().find_map(f)
}

/// Game among the free players with frozen players' strategies averaged out.
pub fn reduced_game(game: &Game, frozen: &BTreeMap<usize, MixedStrategy>) -> Result<(Game, Vec<usize>)> {
    let n = game.num_players();
    for (&i, s) in frozen {
        if i >= n {
            return Err(Error::invalid(format!("frozen player {i} out of range")));
        }
        if s.len() != game.action_counts()[i] {
            return Err(Error::invalid(format!(
                "frozen strategy of player {i} has wrong dimension"
            )));
        }
    }
    let free: Vec<usize> = (0..n).filter(|i| !frozen.contains_key(i)).collect();
    if free.is_empty() {
        return Err(Error::invalid("subgame has no free players"));
    }
    let weights: Vec<Option<&[f64]>> = (0..n).map(|i| frozen.get(&i).map(|s| s.probs())).collect();
    let payoffs = free
        .iter()
        .map(|&i| contract(game.payoffs(i), game.action_counts(), &weights))
        .collect();
    let counts = free.iter().map(|&i| game.action_counts()[i]).collect();
    Ok((Game::new(counts, payoffs)?, free))
}

/// Solves the game induced by freezing `frozen` players and reinserts the
/// frozen strategies verbatim.
pub fn find_subgame_nash(
    game: &Game,
    frozen: &BTreeMap<usize, MixedStrategy>,
    config: &SolverConfig,
) -> Result<StrategyProfile> {
    let (sub, free) = reduced_game(game, frozen)?;
    let sub_eq = find_nash(&sub, config)?;
    let mut full: Vec<Option<MixedStrategy>> = vec![None; game.num_players()];
    for (&i, s) in frozen {
        full[i] = Some(s.clone());
    }
    for (k, &i) in free.iter().enumerate() {
        full[i] = Some(sub_eq.strategy(k).clone());
    }
    Ok(StrategyProfile::new(full.into_iter().map(|s| s.expect("every slot filled")).collect()))
}
