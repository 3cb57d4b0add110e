//! Concurrent game graphs, objectives, action distributions and plays.
//!
//! States and actions are identified by strings but stored by index. Every
//! index order is the lexicographic order of the identifiers, so all set
//! iteration downstream (fixpoints, templates, JSON output) is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Set of states, indexed by state position in [`GameGraph::states`].
pub type StateSet = FixedBitSet;
/// Set of actions of one player at one state, indexed by action position.
pub type ActionSet = FixedBitSet;

/// Tolerance used when checking that probabilities sum to one.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

/// A finite concurrent game with a deterministic joint transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    states: Vec<String>,
    index: BTreeMap<String, usize>,
    p1_actions: Vec<Vec<String>>,
    p2_actions: Vec<Vec<String>>,
    // delta[v][a * |Γ₂(v)| + b]
    delta: Vec<Vec<usize>>,
}

impl GameGraph {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, v: usize) -> &str {
        &self.states[v]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn state(&self, name: &str) -> Result<usize> {
        self.state_index(name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn p1_actions(&self, v: usize) -> &[String] {
        &self.p1_actions[v]
    }

    pub fn p2_actions(&self, v: usize) -> &[String] {
        &self.p2_actions[v]
    }

    pub fn actions(&self, v: usize, player: Player) -> &[String] {
        match player {
            Player::One => &self.p1_actions[v],
            Player::Two => &self.p2_actions[v],
        }
    }

    pub fn num_p1(&self, v: usize) -> usize {
        self.p1_actions[v].len()
    }

    pub fn num_p2(&self, v: usize) -> usize {
        self.p2_actions[v].len()
    }

    pub fn action_index(&self, v: usize, player: Player, name: &str) -> Result<usize> {
        self.actions(v, player)
            .binary_search_by(|a| a.as_str().cmp(name))
            .map_err(|_| Error::UnknownAction {
                state: self.states[v].clone(),
                action: name.to_string(),
            })
    }

    /// Successor `δ(v, a, b)`.
    #[inline]
    pub fn succ(&self, v: usize, a: usize, b: usize) -> usize {
        self.delta[v][a * self.p2_actions[v].len() + b]
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    pub fn empty_set(&self) -> StateSet {
        FixedBitSet::with_capacity(self.num_states())
    }

    pub fn full_set(&self) -> StateSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn complement(&self, set: &StateSet) -> StateSet {
        let mut c = set.clone();
        c.toggle_range(..);
        c
    }

    pub fn state_set<S: AsRef<str>>(&self, names: &[S]) -> Result<StateSet> {
        let mut set = self.empty_set();
        for n in names {
            set.insert(self.state(n.as_ref())?);
        }
        Ok(set)
    }

    /// Names of the members of `set`, in index (lexicographic) order.
    pub fn set_names(&self, set: &StateSet) -> Vec<String> {
        set.ones().map(|v| self.states[v].clone()).collect()
    }

    pub fn empty_actions(&self, v: usize, player: Player) -> ActionSet {
        FixedBitSet::with_capacity(self.actions(v, player).len())
    }

    pub fn all_actions(&self, v: usize, player: Player) -> ActionSet {
        let mut s = self.empty_actions(v, player);
        s.insert_range(..);
        s
    }

    pub fn action_set<S: AsRef<str>>(
        &self,
        v: usize,
        player: Player,
        names: &[S],
    ) -> Result<ActionSet> {
        let mut set = self.empty_actions(v, player);
        for n in names {
            set.insert(self.action_index(v, player, n.as_ref())?);
        }
        Ok(set)
    }

    pub fn action_names(&self, v: usize, player: Player, set: &ActionSet) -> Vec<String> {
        let names = self.actions(v, player);
        set.ones().map(|a| names[a].clone()).collect()
    }

    /// Canonical raw description, optionally carrying an objective.
    pub fn to_raw(&self, objective: Option<&Objective>) -> RawGame {
        let mut transitions = Vec::with_capacity(self.num_transitions());
        for v in 0..self.num_states() {
            for a in 0..self.num_p1(v) {
                for b in 0..self.num_p2(v) {
                    transitions.push(RawTransition {
                        from: self.states[v].clone(),
                        p1: self.p1_actions[v][a].clone(),
                        p2: self.p2_actions[v][b].clone(),
                        to: self.states[self.succ(v, a, b)].clone(),
                    });
                }
            }
        }
        RawGame {
            states: self.states.clone(),
            p1_actions: self
                .states
                .iter()
                .cloned()
                .zip(self.p1_actions.iter().cloned())
                .collect(),
            p2_actions: self
                .states
                .iter()
                .cloned()
                .zip(self.p2_actions.iter().cloned())
                .collect(),
            transitions,
            objective: objective.map(|o| RawObjective {
                kind: o.kind,
                target: self.set_names(&o.target),
            }),
        }
    }

    pub fn to_json(&self, objective: Option<&Objective>) -> String {
        serde_json::to_string_pretty(&self.to_raw(objective)).expect("game serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Safety,
    Buchi,
    Cobuchi,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Safety => "safety",
            ObjectiveKind::Buchi => "buchi",
            ObjectiveKind::Cobuchi => "cobuchi",
        })
    }
}

/// Safety (`□I`), Büchi (`□◇I`) or co-Büchi (`◇□I`) objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub target: StateSet,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, target: StateSet) -> Self {
        Objective { kind, target }
    }

    pub fn from_raw(g: &GameGraph, raw: &RawObjective) -> Result<Self> {
        Ok(Objective {
            kind: raw.kind,
            target: g.state_set(&raw.target)?,
        })
    }

    pub fn to_raw(&self, g: &GameGraph) -> RawObjective {
        RawObjective {
            kind: self.kind,
            target: g.set_names(&self.target),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTransition {
    pub from: String,
    pub p1: String,
    pub p2: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawObjective {
    pub kind: ObjectiveKind,
    pub target: Vec<String>,
}

/// The on-disk concurrent game format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGame {
    pub states: Vec<String>,
    pub p1_actions: BTreeMap<String, Vec<String>>,
    pub p2_actions: BTreeMap<String, Vec<String>>,
    pub transitions: Vec<RawTransition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<RawObjective>,
}

fn sorted_unique(items: &[String]) -> Result<Vec<String>> {
    let set: BTreeSet<&String> = items.iter().collect();
    if set.len() != items.len() {
        let mut seen = BTreeSet::new();
        let dup = items.iter().find(|s| !seen.insert(*s)).unwrap();
        return Err(Error::DuplicateIdentifier(dup.clone()));
    }
    Ok(set.into_iter().cloned().collect())
}

/// Checks a raw description and builds the indexed game.
pub fn validate_game(raw: &RawGame) -> Result<GameGraph> {
    let states = sorted_unique(&raw.states)?;
    let index: BTreeMap<String, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    for name in raw.p1_actions.keys().chain(raw.p2_actions.keys()) {
        if !index.contains_key(name) {
            return Err(Error::UnknownState(name.clone()));
        }
    }

    let mut p1_actions = Vec::with_capacity(states.len());
    let mut p2_actions = Vec::with_capacity(states.len());
    for s in &states {
        for (player, map, out) in [
            (1u8, &raw.p1_actions, &mut p1_actions),
            (2u8, &raw.p2_actions, &mut p2_actions),
        ] {
            let acts = map.get(s).map(|a| sorted_unique(a)).transpose()?;
            match acts {
                Some(a) if !a.is_empty() => out.push(a),
                _ => {
                    return Err(Error::EmptyActionSet {
                        state: s.clone(),
                        player,
                    })
                }
            }
        }
    }

    let mut delta: Vec<Vec<Option<usize>>> = (0..states.len())
        .map(|v| vec![None; p1_actions[v].len() * p2_actions[v].len()])
        .collect();
    for t in &raw.transitions {
        let v = *index
            .get(&t.from)
            .ok_or_else(|| Error::UnknownState(t.from.clone()))?;
        let w = *index
            .get(&t.to)
            .ok_or_else(|| Error::UnknownState(t.to.clone()))?;
        let find = |acts: &[String], name: &str| {
            acts.binary_search_by(|x| x.as_str().cmp(name))
                .map_err(|_| Error::UnknownAction {
                    state: t.from.clone(),
                    action: name.to_string(),
                })
        };
        let a = find(&p1_actions[v], &t.p1)?;
        let b = find(&p2_actions[v], &t.p2)?;
        let slot = &mut delta[v][a * p2_actions[v].len() + b];
        if slot.is_some() {
            return Err(Error::DuplicateTransition {
                state: t.from.clone(),
                p1: t.p1.clone(),
                p2: t.p2.clone(),
            });
        }
        *slot = Some(w);
    }

    let mut full = Vec::with_capacity(states.len());
    for (v, row) in delta.into_iter().enumerate() {
        let n2 = p2_actions[v].len();
        let mut out = Vec::with_capacity(row.len());
        for (i, succ) in row.into_iter().enumerate() {
            match succ {
                Some(w) => out.push(w),
                None => {
                    return Err(Error::MissingTransition {
                        state: states[v].clone(),
                        p1: p1_actions[v][i / n2].clone(),
                        p2: p2_actions[v][i % n2].clone(),
                    })
                }
            }
        }
        full.push(out);
    }

    Ok(GameGraph {
        states,
        index,
        p1_actions,
        p2_actions,
        delta: full,
    })
}

/// Parses a game file, returning the game and its objective if present.
pub fn parse_game(json: &str) -> Result<(GameGraph, Option<Objective>)> {
    let raw: RawGame = serde_json::from_str(json)?;
    let g = validate_game(&raw)?;
    let obj = raw
        .objective
        .as_ref()
        .map(|o| Objective::from_raw(&g, o))
        .transpose()?;
    Ok((g, obj))
}

/// A mixed action for one player at one state, stored densely over the
/// state's action list. Zero entries are outside the support.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> std::result::Result<Self, String> {
        if probs.is_empty() {
            return Err("empty action set".into());
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(format!("invalid probability {p}"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(format!("probabilities sum to {total}"));
        }
        Ok(ActionDistribution { probs })
    }

    pub fn uniform(n: usize) -> Self {
        ActionDistribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Uniform over the members of `support` (which must be nonempty).
    pub fn uniform_on(support: &ActionSet) -> Self {
        let k = support.count_ones(..) as f64;
        ActionDistribution {
            probs: (0..support.len())
                .map(|a| if support.contains(a) { 1.0 / k } else { 0.0 })
                .collect(),
        }
    }

    pub fn point(n: usize, a: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[a] = 1.0;
        ActionDistribution { probs }
    }

    /// Builds a distribution at `v` from an action-name map.
    pub fn from_named(
        g: &GameGraph,
        v: usize,
        player: Player,
        named: &BTreeMap<String, f64>,
    ) -> Result<Self> {
        let mut probs = vec![0.0; g.actions(v, player).len()];
        for (name, p) in named {
            probs[g.action_index(v, player, name)?] = *p;
        }
        Self::new(probs).map_err(|reason| Error::InvalidDistribution {
            state: g.state_name(v).to_string(),
            reason,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, a: usize) -> f64 {
        self.probs[a]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> ActionSet {
        let mut s = FixedBitSet::with_capacity(self.probs.len());
        for (a, p) in self.probs.iter().enumerate() {
            if *p > 0.0 {
                s.insert(a);
            }
        }
        s
    }

    pub fn mass(&self, set: &ActionSet) -> f64 {
        set.ones().map(|a| self.probs[a]).sum()
    }
}

/// Probability of moving from `v` into `x` in one round under `d1`, `d2`.
pub fn one_round_prob(
    g: &GameGraph,
    v: usize,
    d1: &ActionDistribution,
    d2: &ActionDistribution,
    x: &StateSet,
) -> f64 {
    debug_assert_eq!(d1.len(), g.num_p1(v));
    debug_assert_eq!(d2.len(), g.num_p2(v));
    let mut total = 0.0;
    for (a, pa) in d1.probs.iter().enumerate() {
        if *pa == 0.0 {
            continue;
        }
        for (b, pb) in d2.probs.iter().enumerate() {
            if x.contains(g.succ(v, a, b)) {
                total += pa * pb;
            }
        }
    }
    total
}

/// One round of a play: state, both actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub state: usize,
    pub p1: usize,
    pub p2: usize,
}

/// A finite play prefix `v₀ (a₀,b₀) v₁ … vₙ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayPrefix {
    steps: Vec<Step>,
    last: usize,
}

impl PlayPrefix {
    pub fn new(start: usize) -> Self {
        PlayPrefix {
            steps: Vec::new(),
            last: start,
        }
    }

    pub fn last(&self) -> usize {
        self.last
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Extends the play by one round and returns the new last state.
    pub fn push(&mut self, g: &GameGraph, a: usize, b: usize) -> usize {
        let v = self.last;
        self.steps.push(Step {
            state: v,
            p1: a,
            p2: b,
        });
        self.last = g.succ(v, a, b);
        self.last
    }

    /// Visited states `v₀ … vₙ`.
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps
            .iter()
            .map(|s| s.state)
            .chain(std::iter::once(self.last))
    }

    /// Checks that the recorded successor chain agrees with `δ`.
    pub fn is_consistent(&self, g: &GameGraph) -> bool {
        let mut next = self.steps.iter().skip(1).map(|s| s.state).chain([self.last]);
        self.steps
            .iter()
            .all(|s| Some(g.succ(s.state, s.p1, s.p2)) == next.next())
    }
}
