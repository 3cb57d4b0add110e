//! Strategy templates: unsafe actions, live groups over a rank partition,
//! and colive actions.
//!
//! A randomized strategy follows a template when
//! - it never plays an action of `S(v)`;
//! - for every partition cell `U` visited infinitely often, the sum over visits
//!   `j` with `ρⱼ ∈ U` of `minProb(π(ρ≤ⱼ), H(ρⱼ))` diverges;
//! - for every state `v` visited infinitely often, the total probability it
//!   puts on `C(v)` over visits to `v` is finite.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionDistribution, ActionSet, GameGraph, Player, StateSet};
use crate::predecessor::{a_set, afpre_action_fixpoint, apre1, b_set};
use crate::solver::{solve_buchi, solve_cobuchi, solve_safety, RankDecomposition};

/// `S(v)`: actions that must never be played.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyFunction {
    pub unsafe_actions: Vec<ActionSet>,
}

/// `(H, P)`: live groups per state and the ordered partition cells they guard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LivenessTuple {
    /// Sorted and deduplicated; empty groups are kept.
    pub groups: Vec<Vec<ActionSet>>,
    pub partition: Vec<StateSet>,
}

/// `C(v)`: actions that may only be played with summable probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColiveFunction {
    pub colive: Vec<ActionSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub winning: StateSet,
    pub safety: SafetyFunction,
    pub liveness: LivenessTuple,
    pub colive: ColiveFunction,
    pub objective_tag: String,
}

impl Template {
    pub fn unsafe_at(&self, v: usize) -> &ActionSet {
        &self.safety.unsafe_actions[v]
    }

    pub fn colive_at(&self, v: usize) -> &ActionSet {
        &self.colive.colive[v]
    }

    pub fn groups_at(&self, v: usize) -> &[ActionSet] {
        &self.liveness.groups[v]
    }

    pub fn partition(&self) -> &[StateSet] {
        &self.liveness.partition
    }

    /// Whether `v` lies in some partition cell (so its groups are binding).
    pub fn in_partition(&self, v: usize) -> bool {
        self.liveness.partition.iter().any(|c| c.contains(v))
    }

    /// Actions that are neither unsafe nor colive.
    pub fn free_actions(&self, v: usize) -> ActionSet {
        let mut free = self.unsafe_at(v).clone();
        free.union_with(self.colive_at(v));
        free.toggle_range(..);
        free
    }

    /// Checks that the template's per-state vectors fit `g`.
    pub fn check_shape(&self, g: &GameGraph) -> Result<()> {
        let n = g.num_states();
        let lens_ok = self.winning.len() == n
            && self.safety.unsafe_actions.len() == n
            && self.colive.colive.len() == n
            && self.liveness.groups.len() == n
            && self.liveness.partition.iter().all(|c| c.len() == n);
        if !lens_ok {
            return Err(Error::GameMismatch("state count differs".into()));
        }
        for v in 0..n {
            let k = g.num_p1(v);
            let ok = self.unsafe_at(v).len() == k
                && self.colive_at(v).len() == k
                && self.groups_at(v).iter().all(|h| h.len() == k);
            if !ok {
                return Err(Error::GameMismatch(format!(
                    "action count differs at `{}`",
                    g.state_name(v)
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, g: &GameGraph) -> TemplateJson {
        let names = |v: usize, set: &ActionSet| g.action_names(v, Player::One, set);
        let per_state = |sets: &[ActionSet]| -> BTreeMap<String, Vec<String>> {
            sets.iter()
                .enumerate()
                .filter(|(_, s)| !s.is_clear())
                .map(|(v, s)| (g.state_name(v).to_string(), names(v, s)))
                .collect()
        };
        TemplateJson {
            winning: g.set_names(&self.winning),
            unsafe_actions: per_state(&self.safety.unsafe_actions),
            live: self
                .liveness
                .groups
                .iter()
                .enumerate()
                .filter(|(_, gs)| !gs.is_empty())
                .map(|(v, gs)| {
                    (
                        g.state_name(v).to_string(),
                        gs.iter().map(|h| names(v, h)).collect(),
                    )
                })
                .collect(),
            partition: self
                .liveness
                .partition
                .iter()
                .map(|c| g.set_names(c))
                .collect(),
            colive: per_state(&self.colive.colive),
            objective_tag: self.objective_tag.clone(),
        }
    }

    pub fn from_json(g: &GameGraph, j: &TemplateJson) -> Result<Template> {
        let mismatch = |e: Error| Error::GameMismatch(e.to_string());
        let state = |name: &str| g.state(name).map_err(mismatch);
        let per_state = |map: &BTreeMap<String, Vec<String>>| -> Result<Vec<ActionSet>> {
            let mut out: Vec<ActionSet> = (0..g.num_states())
                .map(|v| g.empty_actions(v, Player::One))
                .collect();
            for (s, acts) in map {
                let v = state(s)?;
                out[v] = g.action_set(v, Player::One, acts).map_err(mismatch)?;
            }
            Ok(out)
        };
        let mut groups = vec![Vec::new(); g.num_states()];
        for (s, gs) in &j.live {
            let v = state(s)?;
            let sets = gs
                .iter()
                .map(|h| g.action_set(v, Player::One, h).map_err(mismatch))
                .collect::<Result<Vec<_>>>()?;
            groups[v] = normalize_groups(sets);
        }
        Ok(Template {
            winning: g.state_set(&j.winning).map_err(mismatch)?,
            safety: SafetyFunction {
                unsafe_actions: per_state(&j.unsafe_actions)?,
            },
            liveness: LivenessTuple {
                groups,
                partition: j
                    .partition
                    .iter()
                    .map(|c| g.state_set(c).map_err(mismatch))
                    .collect::<Result<_>>()?,
            },
            colive: ColiveFunction {
                colive: per_state(&j.colive)?,
            },
            objective_tag: j.objective_tag.clone(),
        })
    }
}

/// On-disk template format. Keys are sorted; only states with a nonempty
/// entry appear in `unsafe`, `live` and `colive`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateJson {
    pub winning: Vec<String>,
    #[serde(rename = "unsafe")]
    pub unsafe_actions: BTreeMap<String, Vec<String>>,
    pub live: BTreeMap<String, Vec<Vec<String>>>,
    pub partition: Vec<Vec<String>>,
    pub colive: BTreeMap<String, Vec<String>>,
    pub objective_tag: String,
}

/// Sorts groups by their member lists and drops duplicates.
pub fn normalize_groups(mut groups: Vec<ActionSet>) -> Vec<ActionSet> {
    groups.sort_by_cached_key(|h| h.ones().collect::<Vec<_>>());
    groups.dedup();
    groups
}

/// `S(v) = Γ₁(v) \ A_W(∅)` on `W`, empty elsewhere.
pub fn safety_template(g: &GameGraph, winning: &StateSet) -> SafetyFunction {
    let unsafe_actions = (0..g.num_states())
        .map(|v| {
            if winning.contains(v) {
                let mut s = a_set(g, v, winning, &g.empty_actions(v, Player::Two));
                s.toggle_range(..);
                s
            } else {
                g.empty_actions(v, Player::One)
            }
        })
        .collect();
    SafetyFunction { unsafe_actions }
}

/// The single group `Γ₁(v) \ S(v)`.
fn trivial_group(v: usize, safety: &SafetyFunction) -> Vec<ActionSet> {
    let mut h = safety.unsafe_actions[v].clone();
    h.toggle_range(..);
    vec![h]
}

/// One group per opponent action: the non-unsafe actions landing in `x`.
fn rank_groups(g: &GameGraph, v: usize, safety: &SafetyFunction, x: &StateSet) -> Vec<ActionSet> {
    normalize_groups(rank_groups_per_action(g, v, safety, x))
}

/// Same as [`rank_groups`] but indexed by opponent action, before sorting.
fn rank_groups_per_action(
    g: &GameGraph,
    v: usize,
    safety: &SafetyFunction,
    x: &StateSet,
) -> Vec<ActionSet> {
    (0..g.num_p2(v))
        .map(|b| {
            let mut h = g.empty_actions(v, Player::One);
            for a in 0..g.num_p1(v) {
                if !safety.unsafe_actions[v].contains(a) && x.contains(g.succ(v, a, b)) {
                    h.insert(a);
                }
            }
            h
        })
        .collect()
}

fn no_colive(g: &GameGraph) -> ColiveFunction {
    ColiveFunction {
        colive: (0..g.num_states())
            .map(|v| g.empty_actions(v, Player::One))
            .collect(),
    }
}

/// Template for `□I`: unsafe actions only, trivial groups everywhere.
pub fn safety_objective_template(g: &GameGraph, target: &StateSet) -> Result<Template> {
    let decomp = solve_safety(g, target)?;
    let safety = safety_template(g, &decomp.winning);
    let groups = (0..g.num_states())
        .map(|v| trivial_group(v, &safety))
        .collect();
    Ok(Template {
        winning: decomp.winning,
        safety,
        liveness: LivenessTuple {
            groups,
            partition: Vec::new(),
        },
        colive: no_colive(g),
        objective_tag: "safety".into(),
    })
}

/// Template for `□◇I`: unsafe actions on the winning region plus live groups
/// over the rank cells reached by iterating `Apre₁(W, ·)` from `I ∩ W`.
pub fn buchi_template(g: &GameGraph, target: &StateSet) -> Result<Template> {
    let decomp = solve_buchi(g, target)?;
    buchi_template_from(g, target, &decomp)
}

pub fn buchi_template_from(
    g: &GameGraph,
    target: &StateSet,
    decomp: &RankDecomposition,
) -> Result<Template> {
    let w = &decomp.winning;
    let safety = safety_template(g, w);
    let mut groups: Vec<Vec<ActionSet>> = vec![Vec::new(); g.num_states()];
    let mut partition = Vec::new();

    let mut reached = target.clone();
    reached.intersect_with(w);
    let mut rounds = 0;
    while &reached != w {
        rounds += 1;
        if rounds > g.num_states() {
            return Err(Error::NonConvergence {
                what: "live-group construction",
                rounds,
            });
        }
        let mut next = apre1(g, w, &reached);
        next.intersect_with(w);
        next.union_with(&reached);
        let mut cell = next.clone();
        cell.difference_with(&reached);
        if cell.is_clear() {
            return Err(Error::NonConvergence {
                what: "live-group construction",
                rounds,
            });
        }
        for v in cell.ones() {
            groups[v] = rank_groups(g, v, &safety, &reached);
        }
        partition.push(cell);
        reached = next;
    }
    for v in 0..g.num_states() {
        if !w.contains(v) || target.contains(v) {
            groups[v] = trivial_group(v, &safety);
        }
    }
    Ok(Template {
        winning: w.clone(),
        safety,
        liveness: LivenessTuple { groups, partition },
        colive: no_colive(g),
        objective_tag: "buchi".into(),
    })
}

/// Template for `◇□I`: unsafe actions on the winning region, colive actions
/// on the safety core `X₀` (those that may leave `X₀`), and per-opponent-action
/// live groups on every higher rank cell pointing one rank down.
///
/// Target states above rank 0 get groups only for the opponent actions that
/// can push their action fixpoint out of the current rank, and the actions
/// outside that fixpoint become colive there.
pub fn cobuchi_template(g: &GameGraph, target: &StateSet) -> Result<Template> {
    let decomp = solve_cobuchi(g, target)?;
    cobuchi_template_from(g, target, &decomp)
}

pub fn cobuchi_template_from(
    g: &GameGraph,
    target: &StateSet,
    decomp: &RankDecomposition,
) -> Result<Template> {
    let w = &decomp.winning;
    let safety = safety_template(g, w);
    let core = decomp.ranks.first().cloned().unwrap_or_else(|| g.empty_set());
    let mut colive = no_colive(g);
    let mut groups: Vec<Vec<ActionSet>> = vec![Vec::new(); g.num_states()];

    for v in core.ones() {
        let mut c = a_set(g, v, &core, &g.empty_actions(v, Player::Two));
        c.union_with(&safety.unsafe_actions[v]);
        c.toggle_range(..);
        colive.colive[v] = c;
    }
    for v in 0..g.num_states() {
        if core.contains(v) || !w.contains(v) {
            groups[v] = trivial_group(v, &safety);
        }
    }
    let mut partition = Vec::new();
    for i in 1..decomp.ranks.len() {
        let (upper, lower) = (&decomp.ranks[i], &decomp.ranks[i - 1]);
        let cell = decomp.cell(i);
        for v in cell.ones() {
            if !target.contains(v) {
                groups[v] = rank_groups(g, v, &safety, lower);
                continue;
            }
            // Target states entered through AFpre₁(W, Xᵢ, Xᵢ₋₁). Only actions of
            // the action fixpoint γ keep "leave Xᵢ ⇒ reach Xᵢ₋₁"; the rest are
            // colive. Opponent actions outside B(γ) keep γ inside Xᵢ, so they
            // need no group.
            let gamma = afpre_action_fixpoint(g, v, w, upper, lower);
            let forced = b_set(g, v, lower, &gamma);
            let all = rank_groups_per_action(g, v, &safety, lower);
            groups[v] = normalize_groups(
                all.into_iter()
                    .enumerate()
                    .filter(|(b, _)| forced.contains(*b))
                    .map(|(_, h)| h)
                    .collect(),
            );
            let mut c = gamma;
            c.union_with(&safety.unsafe_actions[v]);
            c.toggle_range(..);
            colive.colive[v] = c;
        }
        partition.push(cell);
    }
    Ok(Template {
        winning: w.clone(),
        safety,
        liveness: LivenessTuple { groups, partition },
        colive,
        objective_tag: "cobuchi".into(),
    })
}

/// Template for any objective kind.
pub fn synthesize(g: &GameGraph, objective: &crate::game::Objective) -> Result<Template> {
    use crate::game::ObjectiveKind::*;
    match objective.kind {
        Safety => safety_objective_template(g, &objective.target),
        Buchi => buchi_template(g, &objective.target),
        Cobuchi => cobuchi_template(g, &objective.target),
    }
}

/// `minProb(d, H) = min_{h ∈ H} Σ_{a ∈ h} d(a)`. An empty group gives 0;
/// an empty collection imposes nothing and gives 1.
pub fn min_prob(d: &ActionDistribution, groups: &[ActionSet]) -> f64 {
    groups
        .iter()
        .map(|h| d.mass(h))
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))))
        .unwrap_or(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictClause {
    /// (i) every action at a winning state is unsafe.
    NoSafeAction,
    /// (ii) every action is unsafe or colive.
    NoFreeAction,
    /// (iii) a live group has no action left outside `S ∪ C`.
    GroupExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictViolation {
    pub state: usize,
    pub clause: ConflictClause,
    /// The restricted set for (i)/(ii), the offending group for (iii).
    pub witness: ActionSet,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConflictReport {
    pub violations: Vec<ConflictViolation>,
}

impl ConflictReport {
    pub fn is_conflict_free(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self, g: &GameGraph) -> Vec<ConflictJson> {
        self.violations
            .iter()
            .map(|c| ConflictJson {
                state: g.state_name(c.state).to_string(),
                clause: c.clause,
                witness: g.action_names(c.state, Player::One, &c.witness),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictJson {
    pub state: String,
    pub clause: ConflictClause,
    pub witness: Vec<String>,
}

/// Checks, for every winning state, that some action is not unsafe, some
/// action is neither unsafe nor colive, and (on partition cells) that every
/// live group keeps a member outside `S ∪ C`.
pub fn check_conflict_free(g: &GameGraph, t: &Template) -> ConflictReport {
    let mut violations = Vec::new();
    for v in t.winning.ones() {
        let k = g.num_p1(v);
        let unsafe_v = t.unsafe_at(v);
        if unsafe_v.count_ones(..) == k {
            violations.push(ConflictViolation {
                state: v,
                clause: ConflictClause::NoSafeAction,
                witness: unsafe_v.clone(),
            });
        }
        let free = t.free_actions(v);
        if free.is_clear() {
            let mut blocked = unsafe_v.clone();
            blocked.union_with(t.colive_at(v));
            violations.push(ConflictViolation {
                state: v,
                clause: ConflictClause::NoFreeAction,
                witness: blocked,
            });
        }
        if t.in_partition(v) {
            for h in t.groups_at(v) {
                if h.is_disjoint(&free) {
                    violations.push(ConflictViolation {
                        state: v,
                        clause: ConflictClause::GroupExhausted,
                        witness: h.clone(),
                    });
                }
            }
        }
    }
    ConflictReport { violations }
}
