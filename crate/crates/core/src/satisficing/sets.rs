use crate::error::{Error, Result};
use crate::game::{deviation_gap, satisfaction_report, Game, SatisfactionReport, StrategyProfile};

fn check_shape(x: &StrategyProfile, y: &StrategyProfile) -> Result<()> {
    if !x.same_shape(y) {
        return Err(Error::invalid("profiles have different shapes"));
    }
    Ok(())
}

/// `y ∈ Access(x)`: every player satisfied at `x` keeps its stored
/// probabilities bit for bit.
pub fn is_accessible(x: &StrategyProfile, y: &StrategyProfile, report_x: &SatisfactionReport) -> Result<bool> {
    check_shape(x, y)?;
    if report_x.gaps.len() != x.num_players() {
        return Err(Error::invalid("report does not match profile"));
    }
    Ok(report_x
        .satisfied
        .iter()
        .all(|&i| x.strategy(i).bit_eq(y.strategy(i))))
}

/// Accessible, and every player unsatisfied at `x` stays unsatisfied at `y`.
pub(crate) fn in_nob_with(game: &Game, report_x: &SatisfactionReport, x: &StrategyProfile, y: &StrategyProfile) -> Result<bool> {
    if !is_accessible(x, y, report_x)? {
        return Ok(false);
    }
    for &i in &report_x.unsatisfied {
        if deviation_gap(game, y, i)? <= report_x.epsilon {
            return Ok(false);
        }
    }
    Ok(true)
}

/// In NoB, and some player satisfied at `x` becomes unsatisfied at `y`.
pub(crate) fn in_worse_with(game: &Game, report_x: &SatisfactionReport, x: &StrategyProfile, y: &StrategyProfile) -> Result<bool> {
    if !in_nob_with(game, report_x, x, y)? {
        return Ok(false);
    }
    for &i in &report_x.satisfied {
        if deviation_gap(game, y, i)? > report_x.epsilon {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn in_nob(game: &Game, x: &StrategyProfile, y: &StrategyProfile, epsilon: f64) -> Result<bool> {
    check_shape(x, y)?;
    let report = satisfaction_report(game, x, epsilon)?;
    game.check_profile(y)?;
    in_nob_with(game, &report, x, y)
}

pub fn in_worse(game: &Game, x: &StrategyProfile, y: &StrategyProfile, epsilon: f64) -> Result<bool> {
    check_shape(x, y)?;
    let report = satisfaction_report(game, x, epsilon)?;
    game.check_profile(y)?;
    in_worse_with(game, &report, x, y)
}
