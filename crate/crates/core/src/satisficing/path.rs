use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::worse::{find_worse_candidate, WorseSearchConfig};
use crate::error::{Error, Result};
use crate::exec::derive_seed;
use crate::game::{satisfaction_report, Game, SatisfactionReport, StrategyProfile};
use crate::nash::{find_nash, find_subgame_nash, max_gap, SolverConfig};

/// Number of ×10 budget escalations tried after a failed Case-2 check.
pub const MAX_ESCALATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Initial,
    WorseStep,
    Case1Jump,
    Case2Jump,
    /// A step produced by stochastic dynamics rather than the constructor.
    Simulated,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Initial => "initial",
            StepKind::WorseStep => "worse_step",
            StepKind::Case1Jump => "case1_jump",
            StepKind::Case2Jump => "case2_jump",
            StepKind::Simulated => "simulated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "initial" => StepKind::Initial,
            "worse_step" => StepKind::WorseStep,
            "case1_jump" => StepKind::Case1Jump,
            "case2_jump" => StepKind::Case2Jump,
            "simulated" => StepKind::Simulated,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub profile: StrategyProfile,
    pub step_kind: StepKind,
    pub report: SatisfactionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisficingPath {
    pub steps: Vec<PathStep>,
    pub epsilon: f64,
    pub terminal_gap: f64,
    /// Budget escalations used while building the path.
    pub escalations: usize,
}

impl SatisficingPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn profiles(&self) -> Vec<StrategyProfile> {
        self.steps.iter().map(|s| s.profile.clone()).collect()
    }

    pub fn last(&self) -> &PathStep {
        self.steps.last().expect("paths are nonempty")
    }
}

fn push(game: &Game, steps: &mut Vec<PathStep>, profile: StrategyProfile, kind: StepKind, epsilon: f64) -> Result<()> {
    let report = satisfaction_report(game, &profile, epsilon)?;
    steps.push(PathStep {
        profile,
        step_kind: kind,
        report,
    });
    Ok(())
}

fn finish(steps: Vec<PathStep>, epsilon: f64, escalations: usize) -> SatisficingPath {
    let terminal_gap = steps.last().map_or(0.0, |s| s.report.max_gap());
    SatisficingPath {
        steps,
        epsilon,
        terminal_gap,
        escalations,
    }
}

/// Builds a satisficing path from `x1` to a Nash equilibrium.
///
/// While some player is satisfied and a Worse profile can be found, move to
/// it; the unsatisfied set grows strictly each time. If everybody is then
/// unsatisfied, jump to an equilibrium of the whole game. Otherwise freeze
/// the satisfied players, solve the subgame of the rest, and jump there.
/// The Case-2 profile is always checked; a failed check means the Worse
/// search missed a member, and the search is retried at ten times the
/// budget, up to [`MAX_ESCALATIONS`] times.
pub fn construct_path(
    game: &Game,
    x1: &StrategyProfile,
    epsilon: f64,
    worse_config: &WorseSearchConfig,
    solver_config: &SolverConfig,
) -> Result<SatisficingPath> {
    worse_config.validate()?;
    let mut steps = Vec::new();
    push(game, &mut steps, x1.clone(), StepKind::Initial, epsilon)?;
    if steps[0].report.is_nash() {
        return Ok(finish(steps, epsilon, 0));
    }

    let n = game.num_players();
    let mut escalations = 0usize;
    loop {
        let current = steps.last().expect("nonempty");
        if current.report.unsatisfied.len() == n {
            let z = find_nash(game, solver_config)?;
            let gap = max_gap(game, &z)?;
            if gap > epsilon {
                return Err(Error::SolverIncomplete {
                    best: Some(z),
                    best_gap: gap,
                });
            }
            push(game, &mut steps, z, StepKind::Case1Jump, epsilon)?;
            return Ok(finish(steps, epsilon, escalations));
        }

        let x = current.profile.clone();
        let mut cfg = worse_config.clone();
        cfg.budget = worse_config
            .budget
            .saturating_mul(10usize.saturating_pow(escalations as u32));
        cfg.rng_seed = derive_seed(worse_config.rng_seed, steps.len() as u64, escalations as u64);
        if let Some(y) = find_worse_candidate(game, &x, epsilon, &cfg)? {
            push(game, &mut steps, y, StepKind::WorseStep, epsilon)?;
            continue;
        }

        let frozen: BTreeMap<usize, _> = current
            .report
            .satisfied
            .iter()
            .map(|&i| (i, x.strategy(i).clone()))
            .collect();
        let x_star = find_subgame_nash(game, &frozen, solver_config)?;
        let gap = max_gap(game, &x_star)?;
        if gap <= epsilon {
            push(game, &mut steps, x_star, StepKind::Case2Jump, epsilon)?;
            return Ok(finish(steps, epsilon, escalations));
        }
        if escalations == MAX_ESCALATIONS {
            return Err(Error::WorseSearchIncomplete {
                partial: Box::new(finish(steps, epsilon, escalations)),
                escalations,
                terminal_gap: gap,
            });
        }
        escalations += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Player `player` was satisfied at step `step` (1-based) and its
    /// strategy changed at `step + 1`.
    Constraint { step: usize, player: usize, gap: f64 },
    TerminalNotNash { gap: f64 },
    TooLong { length: usize, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathVerification {
    pub passed: bool,
    pub violation: Option<Violation>,
    pub length: usize,
    pub terminal_gap: f64,
}

/// Checks the pairwise satisfaction constraint on every consecutive pair,
/// optionally that the last profile is ε-Nash and that `T ≤ n + 1`.
pub fn verify_path(
    game: &Game,
    path: &[StrategyProfile],
    epsilon: f64,
    require_terminal_nash: bool,
    require_length_bound: bool,
) -> Result<PathVerification> {
    if path.is_empty() {
        return Err(Error::invalid("cannot verify an empty path"));
    }
    let mut reports = Vec::with_capacity(path.len());
    for p in path {
        reports.push(satisfaction_report(game, p, epsilon)?);
    }
    let terminal_gap = reports.last().expect("nonempty").max_gap();
    let done = |violation: Option<Violation>| PathVerification {
        passed: violation.is_none(),
        violation,
        length: path.len(),
        terminal_gap,
    };
    for t in 0..path.len() - 1 {
        for &i in &reports[t].satisfied {
            if !path[t].strategy(i).bit_eq(path[t + 1].strategy(i)) {
                return Ok(done(Some(Violation::Constraint {
                    step: t + 1,
                    player: i,
                    gap: reports[t].gaps[i],
                })));
            }
        }
    }
    if require_terminal_nash && terminal_gap > epsilon {
        return Ok(done(Some(Violation::TerminalNotNash { gap: terminal_gap })));
    }
    let bound = game.num_players() + 1;
    if require_length_bound && path.len() > bound {
        return Ok(done(Some(Violation::TooLong {
            length: path.len(),
            bound,
        })));
    }
    Ok(done(None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::*;
    use crate::game::MixedStrategy;
    use crate::nash::verify_nash;

    const EPS: f64 = 1e-9;

    fn build(game: &Game, x1: &StrategyProfile) -> SatisficingPath {
        construct_path(game, x1, EPS, &WorseSearchConfig::default(), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn equilibrium_start_is_trivial() {
        let rps = rock_paper_scissors();
        let p = build(&rps, &StrategyProfile::uniform(&rps));
        assert_eq!(p.len(), 1);
        assert_eq!(p.steps[0].step_kind, StepKind::Initial);
    }

    #[test]
    fn matching_pennies_from_heads_heads() {
        let mp = matching_pennies();
        let hh = StrategyProfile::pure(&mp, &[0, 0]).unwrap();
        let p = build(&mp, &hh);
        assert!(p.len() <= 3);
        let kinds: Vec<_> = p.steps.iter().map(|s| s.step_kind).collect();
        assert_eq!(kinds, vec![StepKind::Initial, StepKind::WorseStep, StepKind::Case1Jump]);
        let last = &p.last().profile;
        assert!(last.max_abs_diff(&StrategyProfile::uniform(&mp)) < 1e-9);
        assert!(p.terminal_gap <= 1e-9);
        let v = verify_path(&mp, &p.profiles(), EPS, true, true).unwrap();
        assert!(v.passed, "{v:?}");
    }

    #[test]
    fn prisoners_dilemma_jumps_immediately() {
        let pd = prisoners_dilemma();
        let cc = StrategyProfile::pure(&pd, &[0, 0]).unwrap();
        let p = build(&pd, &cc);
        assert_eq!(p.len(), 2);
        assert_eq!(p.steps[1].step_kind, StepKind::Case1Jump);
        assert!(p.steps[1].profile.bit_eq(&StrategyProfile::pure(&pd, &[1, 1]).unwrap()));
    }

    #[test]
    fn case_two_with_dominant_player() {
        // Player 0 has a strictly dominant action, so Worse is empty.
        let g = Game::new(
            vec![2, 2],
            vec![vec![2.0, 1.0, 0.0, -1.0], vec![0.0, 1.0, 0.5, 0.0]],
        )
        .unwrap();
        let x = StrategyProfile::pure(&g, &[0, 0]).unwrap();
        let p = build(&g, &x);
        assert_eq!(p.len(), 2);
        assert_eq!(p.steps[1].step_kind, StepKind::Case2Jump);
        assert!(p.steps[1].profile.strategy(0).bit_eq(x.strategy(0)));
        assert!(verify_nash(&g, &p.steps[1].profile, EPS).unwrap());
    }

    #[test]
    fn verify_path_examples() {
        let mp = matching_pennies();
        let x = StrategyProfile::pure(&mp, &[0, 0]).unwrap();
        let constant = vec![x.clone(); 4];
        let v = verify_path(&mp, &constant, EPS, false, false).unwrap();
        assert!(v.passed);

        let pd = prisoners_dilemma();
        let cc = StrategyProfile::pure(&pd, &[0, 0]).unwrap();
        let any = StrategyProfile::new(vec![
            MixedStrategy::new(vec![0.3, 0.7]).unwrap(),
            MixedStrategy::new(vec![0.6, 0.4]).unwrap(),
        ]);
        assert!(verify_path(&pd, &[cc, any], EPS, false, false).unwrap().passed);

        let moved = StrategyProfile::new(vec![
            MixedStrategy::uniform(2),
            MixedStrategy::pure(2, 1),
        ]);
        let v = verify_path(&mp, &[x.clone(), moved], EPS, false, false).unwrap();
        assert!(!v.passed);
        assert!(matches!(v.violation, Some(Violation::Constraint { step: 1, player: 0, .. })));

        let v = verify_path(&mp, std::slice::from_ref(&x), EPS, true, false).unwrap();
        assert!(matches!(v.violation, Some(Violation::TerminalNotNash { .. })));
        let v = verify_path(&mp, &vec![x.clone(); 4], EPS, false, true).unwrap();
        assert!(matches!(v.violation, Some(Violation::TooLong { length: 4, bound: 3 })));
        assert!(verify_path(&mp, &[], EPS, false, false).is_err());
        let bad = StrategyProfile::new(vec![MixedStrategy::uniform(2)]);
        assert!(verify_path(&mp, &[x, bad], EPS, false, false).is_err());
    }
}
