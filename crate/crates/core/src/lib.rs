//! Satisficing paths to Nash equilibrium in finite normal-form games.
//!
//! - [`game`]: payoff tensors, mixed strategies, expected rewards and
//!   deviation gaps.
//! - [`nash`]: support-enumeration equilibrium solver, including subgames
//!   obtained by freezing some players.
//! - [`satisficing`]: Access/NoB/Worse membership, the path constructor and
//!   the path verifier.
//! - [`dynamics`]: win-stay/lose-shift simulation and batch statistics.
//! - [`io`]: game documents, random games and trace files.
//!
//! With the default `parallel` feature, support enumeration, the Worse
//! search and batch experiments run on rayon; results are identical to the
//! sequential path.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod game;
pub mod io;
pub mod nash;
pub mod sampling;
pub mod satisficing;

pub use error::{Error, Result};
pub use exec::Execution;
pub use game::{
    deviation_gap, expected_reward, is_eps_best_response, pure_action_payoffs, satisfaction_report, Game,
    MixedStrategy, SatisfactionReport, StrategyProfile,
};
pub use nash::{find_nash, find_subgame_nash, solve_on_support, verify_nash, SolverConfig, SupportProfile};
pub use satisficing::{construct_path, verify_path, SatisficingPath, WorseSearchConfig};
