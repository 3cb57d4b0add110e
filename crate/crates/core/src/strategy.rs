//! Counting strategies: per-action schedules over visit counts, extraction
//! from a template, and analytic compliance checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionDistribution, ActionSet, GameGraph, Player};
use crate::template::{check_conflict_free, Template};

/// Weight of one action as a function of the 0-based visit index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    Constant { p: f64 },
    /// `c · rⁿ` with `0 < r < 1`.
    Geometric { c: f64, r: f64 },
}

impl Schedule {
    pub const ZERO: Schedule = Schedule::Constant { p: 0.0 };

    pub fn weight(&self, n: u64) -> f64 {
        match *self {
            Schedule::Constant { p } => p,
            Schedule::Geometric { c, r } => c * r.powf(n as f64),
        }
    }

    pub fn is_positive(&self) -> bool {
        match *self {
            Schedule::Constant { p } => p > 0.0,
            Schedule::Geometric { c, .. } => c > 0.0,
        }
    }

    /// Per-visit decay factor: 1 for a positive constant, `r` for a geometric
    /// schedule, 0 for a schedule that never plays.
    pub fn rate(&self) -> f64 {
        match *self {
            _ if !self.is_positive() => 0.0,
            Schedule::Constant { .. } => 1.0,
            Schedule::Geometric { r, .. } => r,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            Schedule::Constant { p } if !p.is_finite() || p < 0.0 => {
                Err(format!("constant weight {p} is not a finite nonnegative number"))
            }
            Schedule::Geometric { c, r } if !c.is_finite() || c <= 0.0 => {
                Err(format!("geometric coefficient {c} must be positive (ratio {r})"))
            }
            Schedule::Geometric { r, .. } if !(r > 0.0 && r < 1.0) => {
                Err(format!("geometric ratio {r} must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}

/// A counting strategy: `schedules[v][a]` is the weight schedule of action
/// `a` at state `v`. Weights are renormalized over all actions at each visit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleStrategy {
    schedules: Vec<Vec<Schedule>>,
}

pub type StrategyJson = BTreeMap<String, BTreeMap<String, Schedule>>;

impl ScheduleStrategy {
    /// Validates shapes and schedules; every state needs a positive schedule.
    pub fn new(g: &GameGraph, schedules: Vec<Vec<Schedule>>) -> Result<Self> {
        if schedules.len() != g.num_states() {
            return Err(Error::GameMismatch("state count differs".into()));
        }
        for (v, row) in schedules.iter().enumerate() {
            let invalid = |reason: String| Error::InvalidSchedule {
                state: g.state_name(v).to_string(),
                reason,
            };
            if row.len() != g.num_p1(v) {
                return Err(invalid(format!(
                    "{} schedules for {} actions",
                    row.len(),
                    g.num_p1(v)
                )));
            }
            for s in row {
                s.validate().map_err(invalid)?;
            }
            if !row.iter().any(Schedule::is_positive) {
                return Err(invalid("no action has positive weight".into()));
            }
        }
        Ok(ScheduleStrategy { schedules })
    }

    /// A memoryless strategy playing `dists[v]` at every visit.
    pub fn from_distributions(g: &GameGraph, dists: &[ActionDistribution]) -> Result<Self> {
        let schedules = dists
            .iter()
            .map(|d| d.probs().iter().map(|&p| Schedule::Constant { p }).collect())
            .collect();
        Self::new(g, schedules)
    }

    pub fn schedules(&self, v: usize) -> &[Schedule] {
        &self.schedules[v]
    }

    pub fn schedule(&self, v: usize, a: usize) -> Schedule {
        self.schedules[v][a]
    }

    pub fn is_memoryless(&self) -> bool {
        self.schedules
            .iter()
            .flatten()
            .all(|s| matches!(s, Schedule::Constant { .. }))
    }

    /// Distribution at the `n`-th visit (0-based) to `v`.
    ///
    /// Weights are rescaled by the largest decay rate before normalizing, so
    /// long runs of purely geometric schedules do not underflow to zero.
    pub fn distribution(&self, v: usize, n: u64) -> ActionDistribution {
        let row = &self.schedules[v];
        let top = row.iter().map(Schedule::rate).fold(0.0, f64::max);
        let weights: Vec<f64> = row
            .iter()
            .map(|s| match *s {
                _ if !s.is_positive() => 0.0,
                Schedule::Constant { p } => p,
                Schedule::Geometric { c, r } => c * (r / top).powf(n as f64),
            })
            .collect();
        let total: f64 = weights.iter().sum();
        ActionDistribution::new(weights.iter().map(|w| w / total).collect())
            .expect("positive weights normalize")
    }

    pub fn to_json(&self, g: &GameGraph) -> StrategyJson {
        self.schedules
            .iter()
            .enumerate()
            .map(|(v, row)| {
                let acts = row
                    .iter()
                    .enumerate()
                    .map(|(a, s)| (g.p1_actions(v)[a].clone(), *s))
                    .collect();
                (g.state_name(v).to_string(), acts)
            })
            .collect()
    }

    /// Parses the JSON form. Unlisted actions get weight zero; an unlisted
    /// state is rejected because it would have no playable action.
    pub fn from_json(g: &GameGraph, j: &StrategyJson) -> Result<Self> {
        let mut schedules: Vec<Vec<Schedule>> = (0..g.num_states())
            .map(|v| vec![Schedule::ZERO; g.num_p1(v)])
            .collect();
        for (state, acts) in j {
            let v = g.state(state)?;
            for (name, s) in acts {
                schedules[v][g.action_index(v, Player::One, name)?] = *s;
            }
        }
        Self::new(g, schedules)
    }
}

pub const DEFAULT_EPS_LIVE: f64 = 0.1;
pub const DEFAULT_COLIVE_BASE: f64 = 0.25;
pub const COLIVE_RATIO: f64 = 0.5;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// Builds a counting strategy that follows `t`.
///
/// At a winning state: weight 0 on `S(v)`, `Geometric(colive_base, 1/2)` on
/// `C(v) \ S(v)`, and constant weights on the free actions `R`. Each live
/// group not covering `R` picks its smallest free member as representative
/// (groups covering `R` get all free mass anyway); the free weights
/// are `M·((1-λ)/|R| + λ·reps(a)/|H|)` with `λ = (1+ε)/2`, where `M` is large
/// enough that the colive mass never pushes a group below `ε/|H|`.
/// Outside the winning region the strategy is uniform.
pub fn extract_strategy(
    g: &GameGraph,
    t: &Template,
    eps_live: f64,
    colive_base: f64,
) -> Result<ScheduleStrategy> {
    check_unit("eps_live", eps_live)?;
    check_unit("colive_base", colive_base)?;
    t.check_shape(g)?;
    let report = check_conflict_free(g, t);
    if !report.is_conflict_free() {
        return Err(Error::Conflict(report.violations.len()));
    }
    let lambda = (1.0 + eps_live) / 2.0;
    let mut schedules = Vec::with_capacity(g.num_states());
    for v in 0..g.num_states() {
        let k = g.num_p1(v);
        if !t.winning.contains(v) {
            schedules.push(vec![Schedule::Constant { p: 1.0 / k as f64 }; k]);
            continue;
        }
        let free = t.free_actions(v);
        let mut colive = t.colive_at(v).clone();
        colive.difference_with(t.unsafe_at(v));

        let groups: Vec<&ActionSet> = t
            .groups_at(v)
            .iter()
            .filter(|h| !h.is_disjoint(&free) && !h.is_superset(&free))
            .collect();
        let mut reps = vec![0usize; k];
        for h in &groups {
            let rep = h.intersection(&free).next().expect("group meets free actions");
            reps[rep] += 1;
        }
        let colive_mass = colive_base * colive.count_ones(..) as f64;
        let scale = (eps_live * colive_mass / (lambda - eps_live)).max(1.0);
        let nfree = free.count_ones(..) as f64;

        let row = (0..k)
            .map(|a| {
                if free.contains(a) {
                    let share = if groups.is_empty() {
                        1.0 / nfree
                    } else {
                        (1.0 - lambda) / nfree + lambda * reps[a] as f64 / groups.len() as f64
                    };
                    Schedule::Constant { p: scale * share }
                } else if colive.contains(a) {
                    Schedule::Geometric {
                        c: colive_base,
                        r: COLIVE_RATIO,
                    }
                } else {
                    Schedule::ZERO
                }
            })
            .collect();
        schedules.push(row);
    }
    ScheduleStrategy::new(g, schedules)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplianceClause {
    /// Positive weight on an unsafe action.
    Unsafe,
    /// Non-summable weight on a colive action.
    Colive,
    /// A live group that is never played.
    Live,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComplianceVerdict {
    Compliant,
    NonCompliant {
        state: usize,
        clause: ComplianceClause,
        /// The offending action, or the group that is never played.
        witness: ActionSet,
    },
    /// A live group whose normalized mass decays to zero. Whether the sum over
    /// its cell still diverges depends on the rest of the play.
    Unknown { state: usize, group: ActionSet },
}

impl ComplianceVerdict {
    pub fn is_compliant(&self) -> bool {
        matches!(self, ComplianceVerdict::Compliant)
    }

    pub fn to_json(&self, g: &GameGraph) -> VerdictJson {
        let names = |v: usize, s: &ActionSet| g.action_names(v, Player::One, s);
        match self {
            ComplianceVerdict::Compliant => VerdictJson::Compliant,
            ComplianceVerdict::NonCompliant {
                state,
                clause,
                witness,
            } => VerdictJson::NonCompliant {
                state: g.state_name(*state).to_string(),
                clause: *clause,
                witness: names(*state, witness),
            },
            ComplianceVerdict::Unknown { state, group } => VerdictJson::Unknown {
                state: g.state_name(*state).to_string(),
                reason: "vanishing_group".into(),
                witness: names(*state, group),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum VerdictJson {
    Compliant,
    NonCompliant {
        state: String,
        clause: ComplianceClause,
        witness: Vec<String>,
    },
    Unknown {
        state: String,
        reason: String,
        witness: Vec<String>,
    },
}

fn single(len: usize, a: usize) -> ActionSet {
    let mut s = ActionSet::with_capacity(len);
    s.insert(a);
    s
}

fn check_state(t: &Template, s: &ScheduleStrategy, v: usize) -> ComplianceVerdict {
    let row = s.schedules(v);
    let k = row.len();
    if let Some(a) = t.unsafe_at(v).ones().find(|&a| row[a].is_positive()) {
        return ComplianceVerdict::NonCompliant {
            state: v,
            clause: ComplianceClause::Unsafe,
            witness: single(k, a),
        };
    }
    let non_summable = |a: &usize| matches!(row[*a], Schedule::Constant { p } if p > 0.0);
    if let Some(a) = t.colive_at(v).ones().find(non_summable) {
        return ComplianceVerdict::NonCompliant {
            state: v,
            clause: ComplianceClause::Colive,
            witness: single(k, a),
        };
    }
    if !t.in_partition(v) {
        return ComplianceVerdict::Compliant;
    }
    let top = row.iter().map(Schedule::rate).fold(0.0, f64::max);
    let mut vanishing = None;
    for h in t.groups_at(v) {
        let best = h.ones().map(|a| row[a].rate()).fold(0.0, f64::max);
        if best == 0.0 {
            return ComplianceVerdict::NonCompliant {
                state: v,
                clause: ComplianceClause::Live,
                witness: h.clone(),
            };
        }
        if best < top && vanishing.is_none() {
            vanishing = Some(h.clone());
        }
    }
    match vanishing {
        Some(group) => ComplianceVerdict::Unknown { state: v, group },
        None => ComplianceVerdict::Compliant,
    }
}

/// Decides, per state, whether `s` follows `t`: no weight on unsafe actions,
/// only geometric schedules on colive actions, and on partition states every
/// live group keeps normalized mass bounded away from zero. Reports the first
/// non-compliant state if any, otherwise the first undecided one.
pub fn check_compliance(g: &GameGraph, t: &Template, s: &ScheduleStrategy) -> ComplianceVerdict {
    let mut unknown = None;
    for v in 0..g.num_states() {
        match check_state(t, s, v) {
            ComplianceVerdict::Compliant => {}
            u @ ComplianceVerdict::Unknown { .. } => {
                unknown.get_or_insert(u);
            }
            bad => return bad,
        }
    }
    unknown.unwrap_or(ComplianceVerdict::Compliant)
}
