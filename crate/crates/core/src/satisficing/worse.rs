use serde::{Deserialize, Serialize};

use super::lemma::build_w_xi;
use super::sets::in_worse_with;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{satisfaction_report, Game, MixedStrategy, StrategyProfile};
use crate::sampling::{dirichlet_uniform, rng_from_seed};

/// Dirichlet candidates are generated and tested in chunks of this size.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorseSearchConfig {
    /// Total number of candidates examined.
    pub budget: usize,
    pub xi_grid: Vec<f64>,
    pub rng_seed: u64,
    pub include_pure_candidates: bool,
    pub execution: Execution,
}

impl Default for WorseSearchConfig {
    fn default() -> Self {
        WorseSearchConfig {
            budget: 5_000,
            xi_grid: vec![0.5, 0.1, 0.01],
            rng_seed: 0,
            include_pure_candidates: true,
            execution: Execution::default(),
        }
    }
}

impl WorseSearchConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::invalid("worse-search budget must be at least 1"));
        }
        if let Some(xi) = self.xi_grid.iter().find(|&&xi| !(xi > 0.0 && xi < 1.0)) {
            return Err(Error::invalid(format!("xi {xi} is outside (0, 1)")));
        }
        Ok(())
    }
}

/// Deterministic candidates: single-player pure deviations, joint pure
/// assignments of all unsatisfied players, then `w_ξ` mixtures (joint first,
/// then one player at a time).
fn structured_candidates(
    game: &Game,
    x: &StrategyProfile,
    unsat: &[usize],
    report: &crate::game::SatisfactionReport,
    config: &WorseSearchConfig,
    limit: usize,
) -> Result<Vec<StrategyProfile>> {
    let counts = game.action_counts();
    let mut out = Vec::new();
    if config.include_pure_candidates {
        for &i in unsat {
            for a in 0..counts[i] {
                let s = MixedStrategy::pure(counts[i], a);
                if !s.bit_eq(x.strategy(i)) {
                    out.push(x.with_strategy(i, s));
                }
            }
        }
        if unsat.len() > 1 {
            let mut actions = vec![0usize; unsat.len()];
            'odometer: loop {
                if out.len() >= limit {
                    break;
                }
                let mut y = x.clone();
                for (&i, &a) in unsat.iter().zip(&actions) {
                    y.set_strategy(i, MixedStrategy::pure(counts[i], a));
                }
                out.push(y);
                for k in (0..unsat.len()).rev() {
                    actions[k] += 1;
                    if actions[k] < counts[unsat[k]] {
                        continue 'odometer;
                    }
                    actions[k] = 0;
                }
                break;
            }
        }
    }
    for &xi in &config.xi_grid {
        out.push(build_w_xi(game, x, report, xi)?);
        if unsat.len() > 1 {
            for &i in unsat {
                let u = MixedStrategy::uniform(counts[i]);
                out.push(x.with_strategy(i, x.strategy(i).mix(&u, xi)));
            }
        }
    }
    out.truncate(limit);
    Ok(out)
}

/// Searches `Access(x)` for a member of `Worse(x)`: structured candidates
/// first, then seeded joint Dirichlet(1, ..., 1) redraws of the unsatisfied
/// players. Returns `None` when nobody is satisfied, nobody is unsatisfied,
/// or the budget runs out.
pub fn find_worse_candidate(
    game: &Game,
    x: &StrategyProfile,
    epsilon: f64,
    config: &WorseSearchConfig,
) -> Result<Option<StrategyProfile>> {
    config.validate()?;
    let report = satisfaction_report(game, x, epsilon)?;
    if report.satisfied.is_empty() || report.unsatisfied.is_empty() {
        return Ok(None);
    }
    let unsat = report.unsatisfied.clone();
    let hit = |y: &StrategyProfile| -> Option<StrategyProfile> {
        in_worse_with(game, &report, x, y)
            .ok()
            .and_then(|w| w.then(|| y.clone()))
    };

    let structured = structured_candidates(game, x, &unsat, &report, config, config.budget)?;
    if let Some(y) = exec::find_map_first(config.execution, &structured, hit) {
        return Ok(Some(y));
    }

    let counts = game.action_counts();
    let mut remaining = config.budget - structured.len();
    let mut rng = rng_from_seed(config.rng_seed);
    while remaining > 0 {
        let n = remaining.min(CHUNK);
        let chunk: Vec<StrategyProfile> = (0..n)
            .map(|_| {
                let mut y = x.clone();
                for &i in &unsat {
                    y.set_strategy(i, dirichlet_uniform(counts[i], &mut rng));
                }
                y
            })
            .collect();
        if let Some(y) = exec::find_map_first(config.execution, &chunk, hit) {
            return Ok(Some(y));
        }
        remaining -= n;
    }
    Ok(None)
}
