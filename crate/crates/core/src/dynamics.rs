//! Win-stay/lose-shift satisficing dynamics.
//!
//! Satisfied players keep their strategy bit for bit; unsatisfied players
//! redraw from an explorer distribution. Every simulated trajectory is
//! therefore a satisficing path.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, derive_seed, Execution};
use crate::game::{satisfaction_report, Game, SatisfactionReport, StrategyProfile};
use crate::sampling::{dirichlet_uniform, pure_uniform, rng_from_seed};

/// Default satisfaction tolerance for the dynamics.
pub const DEFAULT_DYNAMICS_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplorerPolicy {
    #[default]
    DirichletUniform,
    PureUniform,
    /// `(1 - w) * current + w * Dirichlet(1, ..., 1)`.
    MixtureWithCurrent { mixture_weight: f64 },
}

impl ExplorerPolicy {
    fn validate(self) -> Result<()> {
        if let ExplorerPolicy::MixtureWithCurrent { mixture_weight } = self {
            if !(0.0..=1.0).contains(&mixture_weight) {
                return Err(Error::invalid(format!(
                    "mixture weight {mixture_weight} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub profiles: Vec<StrategyProfile>,
    pub reports: Vec<SatisfactionReport>,
    /// 1-based index of the first ε-Nash profile, if any.
    pub hit_step: Option<usize>,
    pub seed: u64,
    pub epsilon: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

fn step_with_report<R: Rng + ?Sized>(
    game: &Game,
    profile: &StrategyProfile,
    report: &SatisfactionReport,
    explorer: ExplorerPolicy,
    rng: &mut R,
) -> StrategyProfile {
    let mut next = profile.clone();
    for &i in &report.unsatisfied {
        let k = game.action_counts()[i];
        let s = match explorer {
            ExplorerPolicy::DirichletUniform => dirichlet_uniform(k, rng),
            ExplorerPolicy::PureUniform => pure_uniform(k, rng),
            ExplorerPolicy::MixtureWithCurrent { mixture_weight } => profile
                .strategy(i)
                .mix(&dirichlet_uniform(k, rng), mixture_weight),
        };
        next.set_strategy(i, s);
    }
    next
}

/// One synchronous update: satisfied players stay, unsatisfied players
/// resample from `explorer`.
pub fn satisficing_step<R: Rng + ?Sized>(
    game: &Game,
    profile: &StrategyProfile,
    epsilon: f64,
    explorer: ExplorerPolicy,
    rng: &mut R,
) -> Result<StrategyProfile> {
    explorer.validate()?;
    let report = satisfaction_report(game, profile, epsilon)?;
    Ok(step_with_report(game, profile, &report, explorer, rng))
}

/// Iterates [`satisficing_step`] for at most `max_steps` updates, stopping at
/// the first ε-Nash profile.
pub fn run_dynamics(
    game: &Game,
    x1: &StrategyProfile,
    epsilon: f64,
    max_steps: usize,
    explorer: ExplorerPolicy,
    seed: u64,
) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::invalid("max_steps must be at least 1"));
    }
    explorer.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut profiles = vec![x1.clone()];
    let mut reports = vec![satisfaction_report(game, x1, epsilon)?];
    let mut hit_step = None;
    for t in 0..=max_steps {
        let report = &reports[t];
        if report.is_nash() {
            hit_step = Some(t + 1);
            break;
        }
        if t == max_steps {
            break;
        }
        let next = step_with_report(game, &profiles[t], report, explorer, &mut rng);
        let next_report = satisfaction_report(game, &next, epsilon)?;
        profiles.push(next);
        reports.push(next_report);
    }
    Ok(Trajectory {
        profiles,
        reports,
        hit_step,
        seed,
        epsilon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub game: usize,
    pub trials: usize,
    pub hits: usize,
    pub hit_frequency: f64,
    /// Mean and median of the number of updates until the hit (`hit_step - 1`),
    /// over trials that hit.
    pub mean_hitting_time: Option<f64>,
    pub median_hitting_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub trials_per_game: usize,
    pub epsilon: f64,
    pub explorer: ExplorerPolicy,
    pub max_steps: usize,
    pub master_seed: u64,
    /// Probability that a trial's initial strategy for a player is a vertex.
    pub initial_pure_prob: f64,
    pub execution: Execution,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            trials_per_game: 100,
            epsilon: DEFAULT_DYNAMICS_EPS,
            explorer: ExplorerPolicy::default(),
            max_steps: 1_000,
            master_seed: 0,
            initial_pure_prob: 0.5,
            execution: Execution::default(),
        }
    }
}

/// Runs `trials_per_game` seeded trajectories per game and summarizes
/// hitting statistics. Trial `i` of game `g` uses seed
/// `derive_seed(master_seed, g, i)` for both its initial profile and its
/// dynamics, so the result does not depend on execution order.
pub fn batch_experiment(games: &[Game], config: &BatchConfig) -> Result<Vec<GameSummary>> {
    if config.trials_per_game == 0 {
        return Err(Error::invalid("trials_per_game must be at least 1"));
    }
    if config.max_steps == 0 {
        return Err(Error::invalid("max_steps must be at least 1"));
    }
    config.explorer.validate()?;
    let jobs: Vec<(usize, usize)> = (0..games.len())
        .flat_map(|g| (0..config.trials_per_game).map(move |i| (g, i)))
        .collect();
    let outcomes = exec::map_collect(config.execution, &jobs, |&(g, i)| -> Result<Option<usize>> {
        let seed = derive_seed(config.master_seed, g as u64, i as u64);
        let mut init_rng = rng_from_seed(seed ^ 0x5A5A_5A5A_5A5A_5A5A);
        let x1 = crate::sampling::random_profile(&games[g], config.initial_pure_prob, &mut init_rng);
        let traj = run_dynamics(&games[g], &x1, config.epsilon, config.max_steps, config.explorer, seed)?;
        Ok(traj.hit_step.map(|h| h - 1))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut summaries = Vec::with_capacity(games.len());
    for (g, chunk) in outcomes.chunks(config.trials_per_game.max(1)).enumerate() {
        let mut times: Vec<f64> = chunk.iter().flatten().map(|&t| t as f64).collect();
        times.sort_by(f64::total_cmp);
        let hits = times.len();
        let mean = (hits > 0).then(|| times.iter().sum::<f64>() / hits as f64);
        let median = (hits > 0).then(|| {
            if hits % 2 == 1 {
                times[hits / 2]
            } else {
                0.5 * (times[hits / 2 - 1] + times[hits / 2])
            }
        });
        summaries.push(GameSummary {
            game: g,
            trials: config.trials_per_game,
            hits,
            hit_frequency: hits as f64 / config.trials_per_game as f64,
            mean_hitting_time: mean,
            median_hitting_time: median,
        });
    }
    Ok(summaries)
}
