//! Utilities behind the equilibrium-on-boundary argument: the fully mixed
//! perturbation `w_ξ`, the segment `z_λ` from `x⋆` to `w_ξ`, and the payoff
//! difference polynomial `g(λ)` whose identical vanishing drives the proof.

use crate::error::{Error, Result};
use crate::game::{pure_action_payoffs, Game, MixedStrategy, SatisfactionReport, StrategyProfile};

/// `w^i = (1 - ξ) x^i + ξ Uniform(A^i)` for unsatisfied `i`, `x^i` otherwise.
pub fn build_w_xi(game: &Game, x_k: &StrategyProfile, report_k: &SatisfactionReport, xi: f64) -> Result<StrategyProfile> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::invalid(format!("xi must lie in (0, 1), got {xi}")));
    }
    game.check_profile(x_k)?;
    let mut w = x_k.clone();
    for &i in &report_k.unsatisfied {
        let k = game.action_counts()[i];
        let floor = xi / k as f64;
        let probs = x_k
            .strategy(i)
            .probs()
            .iter()
            .map(|p| (1.0 - xi) * p + floor)
            .collect();
        w.set_strategy(i, MixedStrategy::new(probs)?);
    }
    Ok(w)
}

/// `z^i_λ = (1 - λ) x⋆^i + λ w^i` on `unsat_set`, `x_k^i` elsewhere.
pub fn build_z_lambda(
    x_star: &StrategyProfile,
    w_xi: &StrategyProfile,
    unsat_set: &[usize],
    x_k: &StrategyProfile,
    lambda: f64,
) -> Result<StrategyProfile> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if !x_star.same_shape(w_xi) || !x_star.same_shape(x_k) {
        return Err(Error::invalid("profiles have different shapes"));
    }
    if unsat_set.iter().any(|&i| i >= x_k.num_players()) {
        return Err(Error::invalid("unsatisfied player out of range"));
    }
    let mut z = x_k.clone();
    for &i in unsat_set {
        let probs = x_star
            .strategy(i)
            .probs()
            .iter()
            .zip(w_xi.strategy(i).probs())
            .map(|(s, w)| (1.0 - lambda) * s + lambda * w)
            .collect();
        z.set_strategy(i, MixedStrategy::new(probs)?);
    }
    Ok(z)
}

fn nodes(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Monomial coefficients of the interpolant through `(xs, ys)`, via divided
/// differences.
fn interpolate(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for k in (level..n).rev() {
            dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - level]);
        }
    }
    // Expand the Newton form by Horner's scheme on coefficient vectors.
    let mut coeffs = vec![0.0; n];
    for k in (0..n).rev() {
        // coeffs <- coeffs * (λ - xs[k]) + dd[k]
        let mut next = vec![0.0; n];
        for (d, &c) in coeffs.iter().enumerate() {
            if d + 1 < n {
                next[d + 1] += c;
            }
            next[d] -= c * xs[k];
        }
        next[0] += dd[k];
        coeffs = next;
    }
    coeffs
}

pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Coefficients (constant term first, length `n`) of
/// `g(λ) = R^i(δ_a, z_λ^{-i}) - R^i(δ_{a'}, z_λ^{-i})`,
/// recovered from equispaced samples on `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn indifference_poly(
    game: &Game,
    x_star: &StrategyProfile,
    w_xi: &StrategyProfile,
    unsat_set: &[usize],
    x_k: &StrategyProfile,
    player: usize,
    a: usize,
    a_prime: usize,
) -> Result<Vec<f64>> {
    if player >= game.num_players() {
        return Err(Error::invalid(format!("player {player} out of range")));
    }
    let k = game.action_counts()[player];
    if a >= k || a_prime >= k {
        return Err(Error::invalid("action out of range"));
    }
    if a == a_prime {
        return Err(Error::invalid("indifference polynomial needs two distinct actions"));
    }
    let xs = nodes(game.num_players());
    let mut ys = Vec::with_capacity(xs.len());
    for &lambda in &xs {
        let z = build_z_lambda(x_star, w_xi, unsat_set, x_k, lambda)?;
        let u = pure_action_payoffs(game, &z, player)?;
        ys.push(u[a] - u[a_prime]);
    }
    Ok(interpolate(&xs, &ys))
}

/// Flags a polynomial that must be identically zero: more distinct observed
/// roots than its nominal degree (`coeffs.len() - 1`), each within
/// `tolerance`.
pub fn zero_poly_check(coeffs: &[f64], roots_observed: &[f64], tolerance: f64) -> bool {
    let mut roots = roots_observed.to_vec();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup();
    let degree = coeffs.len().saturating_sub(1);
    roots.len() > degree && roots.iter().all(|&r| eval_poly(coeffs, r).abs() <= tolerance)
}
