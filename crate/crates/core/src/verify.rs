//! Exact qualitative check of memoryless strategies.
//!
//! Fixing player 1's mixed action at every state turns the game into a Markov
//! decision process controlled by the opponent: at `v` the opponent picks `b`
//! and the successor is `δ(v, a, b)` for some `a` in the support. Almost-sure
//! questions only depend on these supports, so everything here is graph
//! reachability plus maximal end components.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::game::{ActionSet, GameGraph, Objective, ObjectiveKind, Player, StateSet};
use crate::strategy::{Schedule, ScheduleStrategy};

/// The opponent-controlled process induced by fixed player-1 supports.
struct InducedMdp<'g> {
    g: &'g GameGraph,
    support: Vec<ActionSet>,
}

impl<'g> InducedMdp<'g> {
    fn new(g: &'g GameGraph, s: &ScheduleStrategy) -> Result<Self> {
        let mut support = Vec::with_capacity(g.num_states());
        for v in 0..g.num_states() {
            let mut sup = g.empty_actions(v, Player::One);
            for (a, sched) in s.schedules(v).iter().enumerate() {
                match sched {
                    Schedule::Constant { p } => sup.set(a, *p > 0.0),
                    Schedule::Geometric { .. } => {
                        return Err(Error::NonConstantSchedule {
                            state: g.state_name(v).to_string(),
                            action: g.p1_actions(v)[a].clone(),
                        })
                    }
                }
            }
            support.push(sup);
        }
        Ok(InducedMdp { g, support })
    }

    fn successors(&self, v: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.support[v].ones().map(move |a| self.g.succ(v, a, b))
    }

    /// States from which some path (any opponent choice, any supported
    /// action) reaches `target`.
    fn can_reach(&self, target: &StateSet) -> StateSet {
        let n = self.g.num_states();
        let mut preds = vec![Vec::new(); n];
        for v in 0..n {
            for b in 0..self.g.num_p2(v) {
                for w in self.successors(v, b) {
                    preds[w].push(v);
                }
            }
        }
        let mut seen = target.clone();
        let mut stack: Vec<usize> = target.ones().collect();
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                if !seen.put(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Maximal end components inside `allowed`, returned as state sets.
    fn mecs(&self, allowed: &StateSet) -> Vec<StateSet> {
        let g = self.g;
        let n = g.num_states();
        let mut alive = allowed.clone();
        let mut enabled: Vec<ActionSet> = (0..n)
            .map(|v| g.empty_actions(v, Player::Two))
            .collect();
        for v in alive.ones() {
            for b in 0..g.num_p2(v) {
                enabled[v].set(b, self.successors(v, b).all(|w| alive.contains(w)));
            }
        }
        loop {
            let comp = self.components(&alive, &enabled);
            let mut changed = false;
            for v in alive.clone().ones() {
                let bs: Vec<usize> = enabled[v].ones().collect();
                for b in bs {
                    if self.successors(v, b).any(|w| comp[w] != comp[v]) {
                        enabled[v].set(b, false);
                        changed = true;
                    }
                }
                if enabled[v].is_clear() {
                    alive.set(v, false);
                    changed = true;
                }
            }
            // Actions into removed states must go too.
            for v in alive.ones() {
                let bs: Vec<usize> = enabled[v].ones().collect();
                for b in bs {
                    if !self.successors(v, b).all(|w| alive.contains(w)) {
                        enabled[v].set(b, false);
                        changed = true;
                    }
                }
            }
            if !changed {
                let mut out: Vec<StateSet> = Vec::new();
                let mut by_comp = std::collections::BTreeMap::new();
                for v in alive.ones() {
                    by_comp
                        .entry(comp[v])
                        .or_insert_with(|| g.empty_set())
                        .insert(v);
                }
                out.extend(by_comp.into_values());
                return out;
            }
        }
    }

    /// SCC index per alive state over the enabled edges; `usize::MAX` elsewhere.
    fn components(&self, alive: &StateSet, enabled: &[ActionSet]) -> Vec<usize> {
        let n = self.g.num_states();
        let mut graph = DiGraph::<usize, ()>::with_capacity(n, 0);
        let nodes: Vec<_> = (0..n).map(|v| graph.add_node(v)).collect();
        for v in alive.ones() {
            for b in enabled[v].ones() {
                for w in self.successors(v, b) {
                    graph.add_edge(nodes[v], nodes[w], ());
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        for (i, scc) in tarjan_scc(&graph).into_iter().enumerate() {
            for node in scc {
                let v = graph[node];
                if alive.contains(v) {
                    comp[v] = i;
                }
            }
        }
        comp
    }
}

/// States from which the memoryless strategy `s` satisfies `objective` with
/// probability one against every opponent.
///
/// - safety: `¬I` is unreachable;
/// - Büchi: no end component inside `¬I` is reachable;
/// - co-Büchi: no end component touching `¬I` is reachable.
pub fn verify_memoryless(
    g: &GameGraph,
    s: &ScheduleStrategy,
    objective: &Objective,
) -> Result<StateSet> {
    let mdp = InducedMdp::new(g, s)?;
    let bad = g.complement(&objective.target);
    let losing_core = match objective.kind {
        ObjectiveKind::Safety => bad,
        ObjectiveKind::Buchi => union(g, mdp.mecs(&bad)),
        ObjectiveKind::Cobuchi => union(
            g,
            mdp.mecs(&g.full_set())
                .into_iter()
                .filter(|m| !m.is_disjoint(&bad)),
        ),
    };
    Ok(g.complement(&mdp.can_reach(&losing_core)))
}

fn union(g: &GameGraph, sets: impl IntoIterator<Item = StateSet>) -> StateSet {
    let mut out = g.empty_set();
    for s in sets {
        out.union_with(&s);
    }
    out
}
