//! Qualitative one-step operators.
//!
//! `a_set`/`b_set` are the per-state action-set functions; `pre1`, `apre1`
//! and `afpre1` are the predecessor operators built on them. All of them work
//! on supports only: a distribution's probabilities never matter for almost-sure
//! one-step questions, only which actions it plays.

use crate::game::{ActionSet, GameGraph, Player, StateSet};

/// Player-1 actions at `v` that land in `y` against every opponent action
/// outside `gamma2`.
pub fn a_set(g: &GameGraph, v: usize, y: &StateSet, gamma2: &ActionSet) -> ActionSet {
    let mut out = g.empty_actions(v, Player::One);
    for a in 0..g.num_p1(v) {
        let ok = (0..g.num_p2(v)).all(|b| y.contains(g.succ(v, a, b)) || gamma2.contains(b));
        out.set(a, ok);
    }
    out
}

/// Opponent actions at `v` against which some action of `gamma1` reaches `x`.
pub fn b_set(g: &GameGraph, v: usize, x: &StateSet, gamma1: &ActionSet) -> ActionSet {
    let mut out = g.empty_actions(v, Player::Two);
    for b in 0..g.num_p2(v) {
        let ok = gamma1.ones().any(|a| x.contains(g.succ(v, a, b)));
        out.set(b, ok);
    }
    out
}

/// States where player 1 reaches `x` with probability one in one step.
pub fn pre1(g: &GameGraph, x: &StateSet) -> StateSet {
    let mut out = g.empty_set();
    for v in 0..g.num_states() {
        let none = g.empty_actions(v, Player::Two);
        out.set(v, !a_set(g, v, x, &none).is_clear());
    }
    out
}

/// States where player 1 stays in `y` surely and reaches `x` with positive
/// probability. Uses the maximal safe support `a_set(v, y, ∅)`.
pub fn apre1(g: &GameGraph, y: &StateSet, x: &StateSet) -> StateSet {
    let mut out = g.empty_set();
    for v in 0..g.num_states() {
        let none = g.empty_actions(v, Player::Two);
        let safe = a_set(g, v, y, &none);
        let hit = b_set(g, v, x, &safe);
        out.set(v, hit.count_ones(..) == g.num_p2(v));
    }
    out
}

/// Greatest fixpoint of `γ ↦ a_set(v,z,∅) ∩ a_set(v, y, b_set(v, x, γ))`,
/// iterated downward from `a_set(v,z,∅)`.
pub fn afpre_action_fixpoint(
    g: &GameGraph,
    v: usize,
    z: &StateSet,
    y: &StateSet,
    x: &StateSet,
) -> ActionSet {
    afpre_action_iterates(g, v, z, y, x)
        .pop()
        .expect("at least the initial iterate")
}

/// Every iterate of [`afpre_action_fixpoint`], starting with `a_set(v,z,∅)`
/// and ending with the fixpoint.
pub fn afpre_action_iterates(
    g: &GameGraph,
    v: usize,
    z: &StateSet,
    y: &StateSet,
    x: &StateSet,
) -> Vec<ActionSet> {
    let none = g.empty_actions(v, Player::Two);
    let stay = a_set(g, v, z, &none);
    let mut iterates = vec![stay.clone()];
    // each strict step removes an action
    for _ in 0..=g.num_p1(v) {
        let cur = iterates.last().unwrap();
        let mut next = a_set(g, v, y, &b_set(g, v, x, cur));
        next.intersect_with(&stay);
        if &next == cur {
            return iterates;
        }
        iterates.push(next);
    }
    unreachable!("action fixpoint is monotone and bounded by |Γ₁(v)|")
}

/// States where player 1 stays in `z` surely and, whenever it leaves `y`
/// with positive probability, also reaches `x` with positive probability.
pub fn afpre1(g: &GameGraph, z: &StateSet, y: &StateSet, x: &StateSet) -> StateSet {
    let mut out = g.empty_set();
    for v in 0..g.num_states() {
        out.set(v, !afpre_action_fixpoint(g, v, z, y, x).is_clear());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn a_set_buchi_example() {
        let (g, _) = examples::buchi_game();
        let a = g.state("A").unwrap();
        let c = g.state_set(&["C"]).unwrap();
        let none = g.empty_actions(a, Player::Two);
        assert_eq!(g.action_names(a, Player::One, &a_set(&g, a, &c, &none)), ["a"]);
    }

    #[test]
    fn a_set_vacuous_cases() {
        let (g, _) = examples::cobuchi_game();
        let s2 = g.state("S2").unwrap();
        let none = g.empty_actions(s2, Player::Two);
        let all2 = g.all_actions(s2, Player::Two);
        let x1 = g.state_set(&["S0", "S1", "S2", "S3"]).unwrap();
        assert_eq!(a_set(&g, s2, &g.full_set(), &none).count_ones(..), 4);
        assert_eq!(a_set(&g, s2, &x1, &all2).count_ones(..), 4);
    }

    #[test]
    fn b_set_examples() {
        let (g, _) = examples::cobuchi_game();
        let s2 = g.state("S2").unwrap();
        let x0 = g.state_set(&["S0", "S1"]).unwrap();
        let all1 = g.all_actions(s2, Player::One);
        assert_eq!(
            g.action_names(s2, Player::Two, &b_set(&g, s2, &x0, &all1)),
            ["d", "e", "f"]
        );
        let none = g.empty_actions(s2, Player::One);
        assert!(b_set(&g, s2, &x0, &none).is_clear());

        let (g, _) = examples::buchi_game();
        let b = g.state("B").unwrap();
        let c = g.state_set(&["C"]).unwrap();
        let ga = g.action_set(b, Player::One, &["a"]).unwrap();
        assert_eq!(g.action_names(b, Player::Two, &b_set(&g, b, &c, &ga)), ["a", "b"]);
    }

    #[test]
    fn pre1_examples() {
        let (g, _) = examples::buchi_game();
        let c = g.state_set(&["C"]).unwrap();
        assert_eq!(g.set_names(&pre1(&g, &c)), ["A", "B", "C"]);
        assert_eq!(pre1(&g, &g.full_set()), g.full_set());
        assert_eq!(pre1(&g, &g.empty_set()), g.empty_set());
    }

    #[test]
    fn apre1_examples() {
        let (g, _) = examples::buchi_game();
        let c = g.state_set(&["C"]).unwrap();
        assert_eq!(g.set_names(&apre1(&g, &g.full_set(), &c)), ["A", "B", "C"]);
        assert_eq!(apre1(&g, &g.full_set(), &g.full_set()), g.full_set());

        let (g, _) = examples::cobuchi_game();
        let x0 = g.state_set(&["S0", "S1"]).unwrap();
        let r = apre1(&g, &g.full_set(), &x0);
        assert!(!r.contains(g.state("S4").unwrap()));
    }

    #[test]
    fn afpre_examples() {
        let (g, _) = examples::cobuchi_game();
        let s2 = g.state("S2").unwrap();
        let x0 = g.state_set(&["S0", "S1"]).unwrap();
        let x1 = g.state_set(&["S0", "S1", "S2", "S3"]).unwrap();
        let w = g.full_set();
        let fix = afpre_action_fixpoint(&g, s2, &w, &x1, &x0);
        assert_eq!(g.action_names(s2, Player::One, &fix), ["a", "b", "x", "y"]);
        assert_eq!(
            afpre_action_fixpoint(&g, s2, &w, &w, &w),
            g.all_actions(s2, Player::One)
        );
        let r = afpre1(&g, &w, &x1, &x0);
        assert!(r.contains(s2));
        assert!(r.contains(g.state("S3").unwrap()));
        assert!(afpre1(&g, &g.empty_set(), &x1, &x0).is_clear());
        // S4's only successor is S2: nothing stays inside {S0,S1}
        let s4 = g.state("S4").unwrap();
        assert!(afpre_action_fixpoint(&g, s4, &x0, &x1, &x0).is_clear());
    }
}
