//! Brute-force oracles shared by the integration tests.
//!
//! Everything here enumerates supports or strategies directly and never calls
//! the crate's operators, solvers or verifier.

#![allow(dead_code)]

use congame::game::{GameGraph, ObjectiveKind, StateSet};
use congame::random::{random_game, rng, GameRng, RandomGameConfig};

/// Nonempty subsets of `0..k` as bitmasks.
pub fn supports(k: usize) -> impl Iterator<Item = u32> {
    1..(1u32 << k)
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// Some support surely lands in `x` against every opponent action.
pub fn pre1(g: &GameGraph, x: &StateSet) -> StateSet {
    let mut out = g.empty_set();
    for v in 0..g.num_states() {
        out.set(
            v,
            supports(g.num_p1(v))
                .any(|s| members(s).all(|a| (0..g.num_p2(v)).all(|b| x.contains(g.succ(v, a, b))))),
        );
    }
    out
}

/// Some support stays in `y` surely and hits `x` against every opponent action.
pub fn apre1(g: &GameGraph, y: &StateSet, x: &StateSet) -> StateSet {
    let mut out = g.empty_set();
    for v in 0..g.num_states() {
        out.set(
            v,
            supports(g.num_p1(v)).any(|s| {
                let stays = members(s).all(|a| (0..g.num_p2(v)).all(|b| y.contains(g.succ(v, a, b))));
                let hits = (0..g.num_p2(v)).all(|b| members(s).any(|a| x.contains(g.succ(v, a, b))));
                stays && hits
            }),
        );
    }
    out
}

/// Some support stays in `z` surely, and against every opponent action that
/// can leave `y` it can also hit `x`.
pub fn afpre1(g: &GameGraph, z: &StateSet, y: &StateSet, x: &StateSet) -> StateSet {
    let mut out = g.empty_set();
    for v in 0..g.num_states() {
        out.set(
            v,
            supports(g.num_p1(v)).any(|s| {
                let stays = members(s).all(|a| (0..g.num_p2(v)).all(|b| z.contains(g.succ(v, a, b))));
                let fair = (0..g.num_p2(v)).all(|b| {
                    let leaves = members(s).any(|a| !y.contains(g.succ(v, a, b)));
                    !leaves || members(s).any(|a| x.contains(g.succ(v, a, b)))
                });
                stays && fair
            }),
        );
    }
    out
}

/// Reachability sets (reflexive) of a finite graph.
fn reach_sets(succ: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = succ.len();
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &succ[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Whether the finite Markov chain with edge lists `succ` satisfies the
/// objective with probability one from each state.
pub fn chain_wins(succ: &[Vec<usize>], kind: ObjectiveKind, target: &StateSet) -> Vec<bool> {
    let n = succ.len();
    let reach = reach_sets(succ);
    let bottom: Vec<bool> = (0..n)
        .map(|u| (0..n).all(|w| !reach[u][w] || reach[w][u]))
        .collect();
    (0..n)
        .map(|v| {
            (0..n).filter(|&u| reach[v][u]).all(|u| match kind {
                ObjectiveKind::Safety => target.contains(u),
                ObjectiveKind::Buchi => {
                    !bottom[u] || (0..n).any(|w| reach[u][w] && target.contains(w))
                }
                ObjectiveKind::Cobuchi => {
                    !bottom[u] || (0..n).all(|w| !reach[u][w] || target.contains(w))
                }
            })
        })
        .collect()
}

/// States won with probability one by player 1 playing the fixed supports
/// `sup[v]` (bitmasks), against every memoryless deterministic opponent.
pub fn memoryless_wins(g: &GameGraph, sup: &[u32], kind: ObjectiveKind, target: &StateSet) -> StateSet {
    let n = g.num_states();
    let mut won = vec![true; n];
    let mut choice = vec![0usize; n];
    loop {
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|v| members(sup[v]).map(|a| g.succ(v, a, choice[v])).collect())
            .collect();
        for (v, w) in chain_wins(&succ, kind, target).into_iter().enumerate() {
            won[v] &= w;
        }
        // next opponent choice in mixed-radix order
        let mut i = 0;
        loop {
            if i == n {
                let mut out = g.empty_set();
                for (v, w) in won.iter().enumerate() {
                    out.set(v, *w);
                }
                return out;
            }
            choice[i] += 1;
            if choice[i] < g.num_p2(i) {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Union over all memoryless uniform-support strategies of the states they win.
pub fn memoryless_region(g: &GameGraph, kind: ObjectiveKind, target: &StateSet) -> StateSet {
    let n = g.num_states();
    let mut sup: Vec<u32> = vec![1; n];
    let mut out = g.empty_set();
    loop {
        out.union_with(&memoryless_wins(g, &sup, kind, target));
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            sup[i] += 1;
            if sup[i] < (1 << g.num_p1(i)) {
                break;
            }
            sup[i] = 1;
            i += 1;
        }
    }
}

pub fn small_config() -> RandomGameConfig {
    RandomGameConfig {
        min_states: 2,
        max_states: 4,
        max_actions: 2,
    }
}

/// `count` random games drawn from one seeded stream, with the generator
/// left positioned after each game for drawing targets.
pub fn corpus(seed: u64, count: usize, cfg: &RandomGameConfig) -> (GameRng, Vec<GameGraph>) {
    let mut r = rng(seed);
    let games = (0..count).map(|_| random_game(&mut r, cfg)).collect();
    (r, games)
}
