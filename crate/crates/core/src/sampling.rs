//! Seeded sampling on probability simplices.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::game::{Game, MixedStrategy, StrategyProfile};

/// Generator used for every seeded stream in the crate.
pub type SeedRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dirichlet(1, ..., 1) draw, i.e. uniform on the simplex. Uses normalized
/// unit exponentials (Gamma(1) variates).
pub fn dirichlet_uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> MixedStrategy {
    if k == 1 {
        return MixedStrategy::pure(1, 0);
    }
    loop {
        let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        if let Ok(s) = MixedStrategy::from_weights(w) {
            return s;
        }
    }
}

/// Uniformly chosen vertex of the simplex.
pub fn pure_uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> MixedStrategy {
    MixedStrategy::pure(k, rng.random_range(0..k))
}

/// Each player independently plays a uniformly random vertex with probability
/// `pure_prob`, otherwise a uniform draw from the simplex interior.
pub fn random_profile<R: Rng + ?Sized>(game: &Game, pure_prob: f64, rng: &mut R) -> StrategyProfile {
    StrategyProfile::new(
        game.action_counts()
            .iter()
            .map(|&k| {
                if rng.random_bool(pure_prob) {
                    pure_uniform(k, rng)
                } else {
                    dirichlet_uniform(k, rng)
                }
            })
            .collect(),
    )
}
