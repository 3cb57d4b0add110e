//! Runtime adaptation inside a template: learn the opponent's per-state mix
//! and shift free probability mass toward rewarding actions, while keeping the
//! template's three constraint families at every step.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{ActionDistribution, GameGraph, Player, StateSet};
use crate::random::rng;
use crate::simulate::{sample, EpisodeLog, OpponentPolicy, SimStep};
use crate::template::Template;

/// Laplace-smoothed counts of opponent actions per state.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentModel {
    alpha: f64,
    counts: Vec<Vec<u64>>,
}

impl OpponentModel {
    pub fn new(g: &GameGraph, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(OpponentModel {
            alpha,
            counts: (0..g.num_states()).map(|v| vec![0; g.num_p2(v)]).collect(),
        })
    }

    pub fn update(&mut self, g: &GameGraph, v: usize, b: usize) -> Result<()> {
        match self.counts.get_mut(v).and_then(|c| c.get_mut(b)) {
            Some(c) => {
                *c += 1;
                Ok(())
            }
            None => Err(Error::UnknownAction {
                state: g.states().get(v).cloned().unwrap_or_else(|| v.to_string()),
                action: format!("#{b}"),
            }),
        }
    }

    pub fn update_named(&mut self, g: &GameGraph, v: usize, b: &str) -> Result<()> {
        let b = g.action_index(v, Player::Two, b)?;
        self.update(g, v, b)
    }

    pub fn visits(&self, v: usize) -> u64 {
        self.counts[v].iter().sum()
    }

    /// `(count(b) + α) / (total + α·|Γ₂(v)|)`.
    pub fn estimate(&self, v: usize) -> ActionDistribution {
        let c = &self.counts[v];
        let denom = self.visits(v) as f64 + self.alpha * c.len() as f64;
        ActionDistribution::new(c.iter().map(|&k| (k as f64 + self.alpha) / denom).collect())
            .expect("smoothed estimate is a distribution")
    }
}

/// Reward collected on entering each state.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSpec {
    weights: Vec<f64>,
}

impl RewardSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("reward {w} is not finite")));
        }
        Ok(RewardSpec { weights })
    }

    /// Reads `{"state": weight}`; unlisted states are worth 0.
    pub fn from_json(g: &GameGraph, j: &BTreeMap<String, f64>) -> Result<Self> {
        let mut weights = vec![0.0; g.num_states()];
        for (s, w) in j {
            weights[g.state(s)?] = *w;
        }
        Self::new(weights)
    }

    pub fn of(&self, v: usize) -> f64 {
        self.weights[v]
    }

    /// Total reward of the states entered during an episode.
    pub fn total(&self, log: &EpisodeLog) -> f64 {
        log.steps.iter().map(|s| self.of(s.next)).sum()
    }
}

/// `Σ_b m̂(b)·r(δ(v, a, b))` for every action `a`.
fn action_values(g: &GameGraph, v: usize, m: &OpponentModel, r: &RewardSpec) -> Vec<f64> {
    let est = m.estimate(v);
    (0..g.num_p1(v))
        .map(|a| {
            (0..g.num_p2(v))
                .map(|b| est.prob(b) * r.of(g.succ(v, a, b)))
                .sum()
        })
        .collect()
}

/// Colive mass allowed at the `n`-th visit.
pub fn colive_cap(colive_budget: f64, visit_n: u64) -> f64 {
    colive_budget * 0.5f64.powf(visit_n as f64)
}

/// Greedy one-step reward maximization under the template constraints.
///
/// Each live group first receives its floor `ε/|H(v)|` on its best-valued
/// member (non-colive members first). The remaining mass goes down the
/// actions in order of value; colive actions take at most what is left of
/// `colive_budget·2^{-n}`.
#[allow(clippy::too_many_arguments)]
pub fn adapt_step(
    g: &GameGraph,
    t: &Template,
    v: usize,
    visit_n: u64,
    m: &OpponentModel,
    r: &RewardSpec,
    eps_live: f64,
    colive_budget: f64,
) -> Result<ActionDistribution> {
    if !t.winning.contains(v) {
        return Err(Error::InvalidArgument(format!(
            "`{}` is outside the winning region",
            g.state_name(v)
        )));
    }
    let k = g.num_p1(v);
    let infeasible = |why: &str| Error::Infeasible(format!("{}: {why}", g.state_name(v)));
    let values = action_values(g, v, m, r);
    let unsafe_v = t.unsafe_at(v);
    let colive = t.colive_at(v);
    let cap = colive_cap(colive_budget, visit_n);

    let mut order: Vec<usize> = (0..k).filter(|&a| !unsafe_v.contains(a)).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));

    let mut d = vec![0.0; k];
    let mut colive_spent = 0.0;
    let groups = t.groups_at(v);
    if !groups.is_empty() {
        let floor = eps_live / groups.len() as f64;
        for h in groups {
            let pick = order
                .iter()
                .copied()
                .filter(|&a| h.contains(a))
                .min_by_key(|&a| colive.contains(a))
                .ok_or_else(|| infeasible("a live group has no safe action"))?;
            if colive.contains(pick) {
                colive_spent += floor;
            }
            d[pick] += floor;
        }
    }
    if colive_spent > cap + 1e-12 {
        return Err(infeasible("group floors exceed the colive budget"));
    }
    let mut left = 1.0 - d.iter().sum::<f64>();
    for &a in &order {
        if left <= 0.0 {
            break;
        }
        let give = if colive.contains(a) {
            left.min((cap - colive_spent).max(0.0))
        } else {
            left
        };
        d[a] += give;
        if colive.contains(a) {
            colive_spent += give;
        }
        left -= give;
    }
    if left > 1e-12 {
        return Err(infeasible("no free action absorbs the remaining mass"));
    }
    ActionDistribution::new(d).map_err(|reason| Error::InvalidDistribution {
        state: g.state_name(v).to_string(),
        reason,
    })
}

/// Counts of per-step template constraint violations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ViolationCounters {
    pub unsafe_mass: usize,
    pub colive_over_cap: usize,
    pub group_floor: usize,
}

impl ViolationCounters {
    pub fn total(&self) -> usize {
        self.unsafe_mass + self.colive_over_cap + self.group_floor
    }

    /// Checks one emitted distribution at a winning state.
    pub fn check(&mut self, t: &Template, v: usize, d: &ActionDistribution, cap: f64, eps_live: f64) {
        const TOL: f64 = 1e-9;
        if d.mass(t.unsafe_at(v)) > 0.0 {
            self.unsafe_mass += 1;
        }
        if d.mass(t.colive_at(v)) > cap + TOL {
            self.colive_over_cap += 1;
        }
        let groups = t.groups_at(v);
        if groups
            .iter()
            .any(|h| d.mass(h) < eps_live / groups.len() as f64 - TOL)
        {
            self.group_floor += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    pub eps_live: f64,
    pub colive_budget: f64,
    pub alpha: f64,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub state: usize,
    pub chosen_action: usize,
    pub opponent_action: usize,
    pub reward: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptRun {
    pub log: EpisodeLog,
    pub trace: Vec<TraceRow>,
    pub violations: ViolationCounters,
    pub cumulative: f64,
}

impl AdaptRun {
    /// `step,state,chosen_action,opponent_action,reward,cumulative`.
    pub fn trace_csv(&self, g: &GameGraph) -> String {
        let mut out = String::from("step,state,chosen_action,opponent_action,reward,cumulative\n");
        for row in &self.trace {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.step,
                g.state_name(row.state),
                g.p1_actions(row.state)[row.chosen_action],
                g.p2_actions(row.state)[row.opponent_action],
                row.reward,
                row.cumulative
            )
            .unwrap();
        }
        out
    }
}

/// Interleaves play, opponent-model updates and [`adapt_step`]. Outside the
/// winning region player 1 plays uniformly. The reward of a step is the
/// reward of the state it enters.
pub fn run_adaptive(
    g: &GameGraph,
    t: &Template,
    reward: &RewardSpec,
    opponent: &OpponentPolicy,
    target: &StateSet,
    start: usize,
    cfg: &AdaptConfig,
) -> Result<AdaptRun> {
    if cfg.horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    t.check_shape(g)?;
    let mut r = rng(cfg.seed);
    let mut model = OpponentModel::new(g, cfg.alpha)?;
    let mut visit_n = vec![0u64; g.num_states()];
    let mut log = EpisodeLog::new(g, cfg.seed, start);
    let mut trace = Vec::with_capacity(cfg.horizon);
    let mut violations = ViolationCounters::default();
    let mut cumulative = 0.0;
    let mut v = start;
    for step in 0..cfg.horizon {
        let n = visit_n[v];
        visit_n[v] += 1;
        let d = if t.winning.contains(v) {
            let d = adapt_step(g, t, v, n, &model, reward, cfg.eps_live, cfg.colive_budget)?;
            violations.check(t, v, &d, colive_cap(cfg.colive_budget, n), cfg.eps_live);
            d
        } else {
            ActionDistribution::uniform(g.num_p1(v))
        };
        let a = sample(&d, &mut r);
        let b = opponent.choose(g, v, &d, &mut r);
        model.update(g, v, b)?;
        let next = g.succ(v, a, b);
        log.record(
            SimStep {
                state: v,
                p1: a,
                p2: b,
                next,
            },
            target,
        );
        let rew = reward.of(next);
        cumulative += rew;
        trace.push(TraceRow {
            step,
            state: v,
            chosen_action: a,
            opponent_action: b,
            reward: rew,
            cumulative,
        });
        v = next;
    }
    Ok(AdaptRun {
        log,
        trace,
        violations,
        cumulative,
    })
}
