//! Almost-sure winning regions for safety, Büchi and co-Büchi objectives.
//!
//! Each solver returns a [`RankDecomposition`]: the winning region together
//! with the increasing chain `X₀ ⊆ X₁ ⊆ … ⊆ X_k = W` that template synthesis
//! reads its live groups from. Ranks are 0-based. For Büchi, `X₀ = ∅` and
//! `X₁ = I ∩ pre₁(W)`; for co-Büchi, `X₀` is the safety core `W(□I)` inside
//! the final outer set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameGraph, Objective, ObjectiveKind, StateSet};
use crate::predecessor::{afpre1, apre1, pre1};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDecomposition {
    pub winning: StateSet,
    pub ranks: Vec<StateSet>,
    /// Index of the first rank containing each state; `None` outside `winning`.
    pub rank_of: Vec<Option<usize>>,
}

impl RankDecomposition {
    fn from_chain(g: &GameGraph, ranks: Vec<StateSet>) -> Self {
        let winning = ranks.last().cloned().unwrap_or_else(|| g.empty_set());
        let mut rank_of = vec![None; g.num_states()];
        for (i, x) in ranks.iter().enumerate() {
            for v in x.ones() {
                rank_of[v].get_or_insert(i);
            }
        }
        RankDecomposition {
            winning,
            ranks,
            rank_of,
        }
    }

    /// Rank cell `Uᵢ = Xᵢ \ Xᵢ₋₁` (with `U₀ = X₀`).
    pub fn cell(&self, i: usize) -> StateSet {
        let mut c = self.ranks[i].clone();
        if i > 0 {
            c.difference_with(&self.ranks[i - 1]);
        }
        c
    }

    pub fn to_json(&self, g: &GameGraph) -> RanksJson {
        RanksJson {
            winning: g.set_names(&self.winning),
            ranks: self.ranks.iter().map(|r| g.set_names(r)).collect(),
            rank_of: self
                .rank_of
                .iter()
                .enumerate()
                .filter_map(|(v, r)| r.map(|r| (g.state_name(v).to_string(), r)))
                .collect(),
        }
    }
}

/// JSON form of a rank decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RanksJson {
    pub winning: Vec<String>,
    pub ranks: Vec<Vec<String>>,
    pub rank_of: BTreeMap<String, usize>,
}

fn cap(g: &GameGraph) -> usize {
    g.num_states() + 1
}

/// Greatest fixpoint of `X ↦ I ∩ pre₁(X)` from `X = I`.
pub fn solve_safety(g: &GameGraph, target: &StateSet) -> Result<RankDecomposition> {
    let winning = safety_core(g, target)?;
    Ok(RankDecomposition::from_chain(g, vec![winning]))
}

fn safety_core(g: &GameGraph, target: &StateSet) -> Result<StateSet> {
    let mut x = target.clone();
    for _ in 0..cap(g) {
        let mut next = pre1(g, &x);
        next.intersect_with(target);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "safety fixpoint",
        rounds: cap(g),
    })
}

/// Outer greatest fixpoint over `W` around the least-fixpoint chain
/// `X₁ = I ∩ pre₁(W)`, `Xᵢ₊₁ = (¬I ∩ Apre₁(W, Xᵢ)) ∪ X₁`.
pub fn solve_buchi(g: &GameGraph, target: &StateSet) -> Result<RankDecomposition> {
    let not_target = g.complement(target);
    let mut w = g.full_set();
    for _ in 0..cap(g) {
        let mut x1 = pre1(g, &w);
        x1.intersect_with(target);
        let mut chain = vec![g.empty_set()];
        if !x1.is_clear() {
            chain.push(x1.clone());
        }
        let mut x = x1.clone();
        let mut converged = false;
        for _ in 0..cap(g) {
            let mut next = apre1(g, &w, &x);
            next.intersect_with(&not_target);
            next.union_with(&x1);
            if next == x {
                converged = true;
                break;
            }
            chain.push(next.clone());
            x = next;
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "Büchi inner fixpoint",
                rounds: cap(g),
            });
        }
        if x == w {
            return Ok(RankDecomposition::from_chain(g, chain));
        }
        w = x;
    }
    Err(Error::NonConvergence {
        what: "Büchi outer fixpoint",
        rounds: cap(g),
    })
}

/// Outer greatest fixpoint over `Z`. Rank 0 is the safety core of `I ∩ Z`;
/// each further rank is the greatest `Y` with
/// `Y = Xᵢ ∪ (I ∩ Z ∩ AFpre₁(Z, Y, Xᵢ)) ∪ (¬I ∩ Z ∩ Apre₁(Z, Xᵢ))`,
/// found by shrinking from `Y = Z`.
pub fn solve_cobuchi(g: &GameGraph, target: &StateSet) -> Result<RankDecomposition> {
    let not_target = g.complement(target);
    let mut z = g.full_set();
    for _ in 0..cap(g) {
        let mut safe_target = target.clone();
        safe_target.intersect_with(&z);
        let x0 = safety_core(g, &safe_target)?;
        let mut chain = vec![x0.clone()];
        let mut x = x0;
        let mut converged = false;
        for _ in 0..cap(g) {
            let mut leaving = apre1(g, &z, &x);
            leaving.intersect_with(&not_target);
            leaving.intersect_with(&z);
            let next = cobuchi_layer(g, target, &z, &x, &leaving)?;
            if next == x {
                converged = true;
                break;
            }
            chain.push(next.clone());
            x = next;
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "co-Büchi rank chain",
                rounds: cap(g),
            });
        }
        if x == z {
            return Ok(RankDecomposition::from_chain(g, chain));
        }
        z = x;
    }
    Err(Error::NonConvergence {
        what: "co-Büchi outer fixpoint",
        rounds: cap(g),
    })
}

fn cobuchi_layer(
    g: &GameGraph,
    target: &StateSet,
    z: &StateSet,
    x: &StateSet,
    leaving: &StateSet,
) -> Result<StateSet> {
    let mut y = z.clone();
    for _ in 0..cap(g) {
        let mut next = afpre1(g, z, &y, x);
        next.intersect_with(target);
        next.intersect_with(z);
        next.union_with(x);
        next.union_with(leaving);
        if next == y {
            return Ok(y);
        }
        y = next;
    }
    Err(Error::NonConvergence {
        what: "co-Büchi inner fixpoint",
        rounds: cap(g),
    })
}

/// Dispatches on the objective kind.
pub fn solve(g: &GameGraph, objective: &Objective) -> Result<RankDecomposition> {
    match objective.kind {
        ObjectiveKind::Safety => solve_safety(g, &objective.target),
        ObjectiveKind::Buchi => solve_buchi(g, &objective.target),
        ObjectiveKind::Cobuchi => solve_cobuchi(g, &objective.target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn names(g: &GameGraph, d: &RankDecomposition) -> Vec<Vec<String>> {
        d.ranks.iter().map(|r| g.set_names(r)).collect()
    }

    #[test]
    fn buchi_example_ranks() {
        let (g, obj) = examples::buchi_game();
        let d = solve_buchi(&g, &obj.target).unwrap();
        assert_eq!(
            names(&g, &d),
            vec![vec![], vec!["C".to_string()], vec!["A".into(), "B".into(), "C".into()]]
        );
        assert_eq!(d.winning, g.full_set());
        assert_eq!(d.rank_of, vec![Some(2), Some(2), Some(1)]);
    }

    #[test]
    fn buchi_full_and_empty_targets() {
        let (g, _) = examples::buchi_game();
        let d = solve_buchi(&g, &g.full_set()).unwrap();
        assert_eq!(d.ranks, vec![g.empty_set(), g.full_set()]);
        let d = solve_buchi(&g, &g.empty_set()).unwrap();
        assert!(d.winning.is_clear());
    }

    #[test]
    fn cobuchi_example_ranks() {
        let (g, obj) = examples::cobuchi_game();
        let d = solve_cobuchi(&g, &obj.target).unwrap();
        assert_eq!(
            names(&g, &d),
            vec![
                vec!["S0", "S1"],
                vec!["S0", "S1", "S2", "S3"],
                vec!["S0", "S1", "S2", "S3", "S4"],
            ]
        );
    }

    #[test]
    fn cobuchi_full_target() {
        let (g, _) = examples::cobuchi_game();
        let d = solve_cobuchi(&g, &g.full_set()).unwrap();
        assert_eq!(d.ranks, vec![g.full_set()]);
    }

    #[test]
    fn safety_examples() {
        let (g, obj) = examples::cobuchi_game();
        let d = solve_safety(&g, &obj.target).unwrap();
        assert_eq!(g.set_names(&d.winning), ["S0", "S1"]);
        assert_eq!(solve_safety(&g, &g.full_set()).unwrap().winning, g.full_set());
        assert!(solve_safety(&g, &g.empty_set()).unwrap().winning.is_clear());
    }

    #[test]
    fn ranks_json_is_sorted() {
        let (g, obj) = examples::buchi_game();
        let d = solve_buchi(&g, &obj.target).unwrap();
        let j = serde_json::to_string(&d.to_json(&g)).unwrap();
        assert_eq!(
            j,
            r#"{"winning":["A","B","C"],"ranks":[[],["C"],["A","B","C"]],"rank_of":{"A":2,"B":2,"C":1}}"#
        );
    }
}
