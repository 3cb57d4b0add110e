//! Alternating turn-based games to concurrent games.
//!
//! A player-1 edge `(u, a, v)` followed by a player-2 edge `(v, b, w)` becomes
//! the concurrent transition `δ(u, a, b) = w`. Player-1 states without
//! outgoing edges get the self-loop action `loop` for both players.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{validate_game, GameGraph, Objective, ObjectiveKind, RawGame, RawTransition};

pub const LOOP_ACTION: &str = "loop";
pub const DEFAULT_TRANSITION_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TbState {
    pub id: String,
    pub owner: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TbTransition {
    pub from: String,
    pub label: String,
    pub to: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WinningKind {
    Transitions,
    States,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WinningItem {
    Transition(TbTransition),
    State(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TbWinning {
    pub kind: WinningKind,
    pub items: Vec<WinningItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnBasedGame {
    pub states: Vec<TbState>,
    pub transitions: Vec<TbTransition>,
    pub winning: TbWinning,
    pub objective_kind: ObjectiveKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvertStats {
    pub p1_states: usize,
    pub merged_transitions: usize,
    pub self_loops_added: usize,
    pub objective_states: usize,
}

#[derive(Debug, Clone)]
pub struct Conversion {
    pub game: GameGraph,
    pub objective: Objective,
    pub stats: ConvertStats,
}

type Edges<'a> = BTreeMap<&'a str, Vec<(&'a str, &'a str)>>;

pub fn convert(tb: &TurnBasedGame) -> Result<Conversion> {
    convert_with_limit(tb, DEFAULT_TRANSITION_LIMIT)
}

pub fn convert_with_limit(tb: &TurnBasedGame, limit: usize) -> Result<Conversion> {
    if tb.transitions.len() > limit {
        return Err(Error::TooLarge {
            count: tb.transitions.len(),
            limit,
        });
    }
    let mut owner: BTreeMap<&str, u8> = BTreeMap::new();
    for s in &tb.states {
        if s.owner != 1 && s.owner != 2 {
            return Err(Error::InvalidArgument(format!(
                "state `{}` has owner {}, expected 1 or 2",
                s.id, s.owner
            )));
        }
        if owner.insert(&s.id, s.owner).is_some() {
            return Err(Error::DuplicateIdentifier(s.id.clone()));
        }
    }
    let owner_of = |s: &str| owner.get(s).copied().ok_or_else(|| Error::UnknownState(s.into()));

    let mut out: Edges = BTreeMap::new();
    for t in &tb.transitions {
        if owner_of(&t.from)? == owner_of(&t.to)? {
            return Err(Error::NotAlternating {
                from: t.from.clone(),
                to: t.to.clone(),
            });
        }
        let edges = out.entry(&t.from).or_default();
        if edges.iter().any(|(l, _)| *l == t.label) {
            return Err(Error::NondeterministicLabel {
                state: t.from.clone(),
                label: t.label.clone(),
            });
        }
        edges.push((&t.label, &t.to));
    }

    let (win_edges, win_states) = winning_sets(tb, &owner_of)?;

    let mut raw = RawGame {
        states: Vec::new(),
        p1_actions: BTreeMap::new(),
        p2_actions: BTreeMap::new(),
        transitions: Vec::new(),
        objective: None,
    };
    let mut target: BTreeSet<String> = BTreeSet::new();
    let mut stats = ConvertStats {
        p1_states: 0,
        merged_transitions: 0,
        self_loops_added: 0,
        objective_states: 0,
    };
    let empty = Vec::new();
    for s in tb.states.iter().filter(|s| s.owner == 1) {
        let u = s.id.as_str();
        stats.p1_states += 1;
        raw.states.push(u.to_string());
        if win_states.contains(u) {
            target.insert(u.to_string());
        }
        let moves = out.get(u).unwrap_or(&empty);
        if moves.is_empty() {
            stats.self_loops_added += 1;
            raw.p1_actions.insert(u.into(), vec![LOOP_ACTION.into()]);
            raw.p2_actions.insert(u.into(), vec![LOOP_ACTION.into()]);
            raw.transitions.push(RawTransition {
                from: u.into(),
                p1: LOOP_ACTION.into(),
                p2: LOOP_ACTION.into(),
                to: u.into(),
            });
            continue;
        }
        let mut b_labels: Option<BTreeSet<&str>> = None;
        for (a, v) in moves {
            let replies = out.get(v).unwrap_or(&empty);
            let labels: BTreeSet<&str> = replies.iter().map(|(b, _)| *b).collect();
            if labels.is_empty() || b_labels.as_ref().is_some_and(|l| *l != labels) {
                return Err(Error::NonRectangularActions(u.into()));
            }
            b_labels = Some(labels);
            for (b, w) in replies {
                stats.merged_transitions += 1;
                raw.transitions.push(RawTransition {
                    from: u.into(),
                    p1: a.to_string(),
                    p2: b.to_string(),
                    to: w.to_string(),
                });
                let first = (u, *a, *v);
                let second = (*v, *b, *w);
                if win_edges.contains(&first)
                    || win_edges.contains(&second)
                    || win_states.contains(v)
                {
                    target.insert(w.to_string());
                }
            }
        }
        raw.p1_actions
            .insert(u.into(), moves.iter().map(|(a, _)| a.to_string()).collect());
        raw.p2_actions.insert(
            u.into(),
            b_labels.unwrap().into_iter().map(String::from).collect(),
        );
    }
    let game = validate_game(&raw)?;
    let target: Vec<String> = target.into_iter().collect();
    stats.objective_states = target.len();
    let objective = Objective::new(tb.objective_kind, game.state_set(&target)?);
    Ok(Conversion {
        game,
        objective,
        stats,
    })
}

type EdgeKey<'a> = (&'a str, &'a str, &'a str);

fn winning_sets<'a>(
    tb: &'a TurnBasedGame,
    owner_of: &impl Fn(&str) -> Result<u8>,
) -> Result<(BTreeSet<EdgeKey<'a>>, BTreeSet<&'a str>)> {
    let mut edges = BTreeSet::new();
    let mut states = BTreeSet::new();
    for item in &tb.winning.items {
        match (tb.winning.kind, item) {
            (WinningKind::Transitions, WinningItem::Transition(t)) => {
                if !tb.transitions.contains(t) {
                    return Err(Error::InvalidArgument(format!(
                        "winning transition {} -{}-> {} is not in the game",
                        t.from, t.label, t.to
                    )));
                }
                edges.insert((t.from.as_str(), t.label.as_str(), t.to.as_str()));
            }
            (WinningKind::States, WinningItem::State(s)) => {
                owner_of(s)?;
                states.insert(s.as_str());
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "winning items do not match the winning kind".into(),
                ))
            }
        }
    }
    Ok((edges, states))
}

/// Statistics of [`convert`] without keeping the game.
pub fn convert_stats(tb: &TurnBasedGame) -> Result<ConvertStats> {
    convert(tb).map(|c| c.stats)
}
