//! Seeded random game corpora.
//!
//! All randomness in the crate comes from ChaCha8 seeded with a `u64`
//! (`ChaCha8Rng::seed_from_u64`), which produces the same stream on every
//! platform.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{validate_game, GameGraph, RawGame, RawTransition, StateSet};

pub type GameRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GameRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomGameConfig {
    pub min_states: usize,
    pub max_states: usize,
    /// Upper bound on `|Γ₁(v)|` and `|Γ₂(v)|`; each state draws from `1..=max`.
    pub max_actions: usize,
}

impl Default for RandomGameConfig {
    fn default() -> Self {
        RandomGameConfig {
            min_states: 2,
            max_states: 6,
            max_actions: 3,
        }
    }
}

/// A game with states `s0, s1, …`, player-1 actions `a0, …` and player-2
/// actions `b0, …`; every successor is drawn uniformly.
pub fn random_game(rng: &mut GameRng, cfg: &RandomGameConfig) -> GameGraph {
    let n = rng.gen_range(cfg.min_states..=cfg.max_states);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut p1_actions = BTreeMap::new();
    let mut p2_actions = BTreeMap::new();
    let mut transitions = Vec::new();
    for s in &states {
        let k1 = rng.gen_range(1..=cfg.max_actions);
        let k2 = rng.gen_range(1..=cfg.max_actions);
        let a1: Vec<String> = (0..k1).map(|i| format!("a{i}")).collect();
        let a2: Vec<String> = (0..k2).map(|i| format!("b{i}")).collect();
        for a in &a1 {
            for b in &a2 {
                transitions.push(RawTransition {
                    from: s.clone(),
                    p1: a.clone(),
                    p2: b.clone(),
                    to: states[rng.gen_range(0..n)].clone(),
                });
            }
        }
        p1_actions.insert(s.clone(), a1);
        p2_actions.insert(s.clone(), a2);
    }
    validate_game(&RawGame {
        states,
        p1_actions,
        p2_actions,
        transitions,
        objective: None,
    })
    .expect("generated game is well formed")
}

/// Each state joins the set independently with probability 1/2.
pub fn random_subset(rng: &mut GameRng, g: &GameGraph) -> StateSet {
    let mut s = g.empty_set();
    for v in 0..g.num_states() {
        s.set(v, rng.gen_bool(0.5));
    }
    s
}

/// A uniformly chosen subset of exactly `min(size, |V|)` states.
pub fn random_subset_of_size(rng: &mut GameRng, g: &GameGraph, size: usize) -> StateSet {
    let mut all: Vec<usize> = (0..g.num_states()).collect();
    all.shuffle(rng);
    let mut s = g.empty_set();
    for v in all.into_iter().take(size) {
        s.insert(v);
    }
    s
}
