//! Seeded Monte-Carlo plays of a counting strategy against simple opponents.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionDistribution, GameGraph, Player, StateSet};
use crate::random::{rng, GameRng};
use crate::solver::RankDecomposition;
use crate::strategy::ScheduleStrategy;

#[derive(Debug, Clone, PartialEq)]
pub enum OpponentPolicy {
    Uniform,
    /// A fixed mixed action per state.
    Fixed(Vec<ActionDistribution>),
    /// One-step adversary: picks the action maximizing the expected rank of
    /// the successor (states outside the winning region count as worst).
    /// Ties go to the lexicographically smallest action.
    Greedy { rank_of: Vec<Option<usize>> },
}

impl OpponentPolicy {
    pub fn greedy(decomp: &RankDecomposition) -> Self {
        OpponentPolicy::Greedy {
            rank_of: decomp.rank_of.clone(),
        }
    }

    /// Reads `{"state": {"action": p}}`; unlisted states play uniformly.
    pub fn fixed_from_json(g: &GameGraph, j: &BTreeMap<String, BTreeMap<String, f64>>) -> Result<Self> {
        let mut dists: Vec<_> = (0..g.num_states())
            .map(|v| ActionDistribution::uniform(g.num_p2(v)))
            .collect();
        for (s, named) in j {
            let v = g.state(s)?;
            dists[v] = ActionDistribution::from_named(g, v, Player::Two, named)?;
        }
        Ok(OpponentPolicy::Fixed(dists))
    }

    /// Opponent action at `v` given player 1's current mixed action.
    pub fn choose(&self, g: &GameGraph, v: usize, p1: &ActionDistribution, r: &mut GameRng) -> usize {
        match self {
            OpponentPolicy::Uniform => sample(&ActionDistribution::uniform(g.num_p2(v)), r),
            OpponentPolicy::Fixed(d) => sample(&d[v], r),
            OpponentPolicy::Greedy { rank_of } => {
                let worst = rank_of.iter().flatten().max().map_or(1, |m| m + 1) as f64;
                let score = |w: usize| rank_of[w].map_or(worst, |r| r as f64);
                let mut best = (0, f64::NEG_INFINITY);
                for b in 0..g.num_p2(v) {
                    let e: f64 = p1
                        .probs()
                        .iter()
                        .enumerate()
                        .map(|(a, p)| p * score(g.succ(v, a, b)))
                        .sum();
                    if e > best.1 {
                        best = (b, e);
                    }
                }
                best.0
            }
        }
    }
}

pub fn sample(d: &ActionDistribution, r: &mut GameRng) -> usize {
    WeightedIndex::new(d.probs())
        .expect("distribution has positive mass")
        .sample(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimStep {
    pub state: usize,
    pub p1: usize,
    pub p2: usize,
    pub next: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeLog {
    pub seed: u64,
    pub start: usize,
    pub steps: Vec<SimStep>,
    /// Visits per state over `v₀ … v_horizon`.
    pub visits: Vec<usize>,
    pub visits_in_target: usize,
    /// Length of the longest suffix of `v₁ … v_horizon` inside the target.
    pub target_suffix: usize,
}

impl EpisodeLog {
    pub fn new(g: &GameGraph, seed: u64, start: usize) -> Self {
        let mut visits = vec![0; g.num_states()];
        visits[start] += 1;
        EpisodeLog {
            seed,
            start,
            steps: Vec::new(),
            visits,
            visits_in_target: 0,
            target_suffix: 0,
        }
    }

    /// Records a step and updates the statistics for `target`.
    pub fn record(&mut self, step: SimStep, target: &StateSet) {
        if self.steps.is_empty() && target.contains(self.start) {
            self.visits_in_target += 1;
        }
        self.steps.push(step);
        self.visits[step.next] += 1;
        if target.contains(step.next) {
            self.visits_in_target += 1;
            self.target_suffix += 1;
        } else {
            self.target_suffix = 0;
        }
    }

    pub fn is_consistent(&self, g: &GameGraph) -> bool {
        let mut at = self.start;
        self.steps.iter().all(|s| {
            let ok = s.state == at && g.succ(s.state, s.p1, s.p2) == s.next;
            at = s.next;
            ok
        })
    }

    pub fn to_json(&self, g: &GameGraph, episode: usize) -> EpisodeJson {
        EpisodeJson {
            episode,
            seed: self.seed,
            start: g.state_name(self.start).to_string(),
            steps: self
                .steps
                .iter()
                .map(|s| {
                    [
                        g.state_name(s.state).to_string(),
                        g.p1_actions(s.state)[s.p1].clone(),
                        g.p2_actions(s.state)[s.p2].clone(),
                        g.state_name(s.next).to_string(),
                    ]
                })
                .collect(),
            visits: self
                .visits
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(v, c)| (g.state_name(v).to_string(), *c))
                .collect(),
            visits_in_target: self.visits_in_target,
            target_suffix: self.target_suffix,
        }
    }
}

/// One line of the JSON-lines episode log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeJson {
    pub episode: usize,
    pub seed: u64,
    pub start: String,
    /// `[state, p1 action, p2 action, next state]`.
    pub steps: Vec<[String; 4]>,
    pub visits: BTreeMap<String, usize>,
    pub visits_in_target: usize,
    pub target_suffix: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub horizon: usize,
    pub episodes: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.episodes == 0 {
            return Err(Error::InvalidArgument(
                "horizon and episodes must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Plays one episode with its own generator.
pub fn run_episode(
    g: &GameGraph,
    s: &ScheduleStrategy,
    opponent: &OpponentPolicy,
    target: &StateSet,
    start: usize,
    horizon: usize,
    seed: u64,
) -> EpisodeLog {
    let mut r = rng(seed);
    let mut log = EpisodeLog::new(g, seed, start);
    let mut visit_n = vec![0u64; g.num_states()];
    let mut v = start;
    for _ in 0..horizon {
        let d = s.distribution(v, visit_n[v]);
        visit_n[v] += 1;
        let a = sample(&d, &mut r);
        let b = opponent.choose(g, v, &d, &mut r);
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
        v = next;
    }
    log
}

/// Episode `i` uses seed `cfg.seed + i`. Episodes run in parallel on the
/// current rayon pool and come back in index order.
pub fn simulate(
    g: &GameGraph,
    s: &ScheduleStrategy,
    opponent: &OpponentPolicy,
    target: &StateSet,
    start: usize,
    cfg: &SimConfig,
) -> Result<Vec<EpisodeLog>> {
    cfg.validate()?;
    if start >= g.num_states() {
        return Err(Error::InvalidArgument(format!("start state {start} out of range")));
    }
    Ok((0..cfg.episodes)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            run_episode(g, s, opponent, target, start, cfg.horizon, seed)
        })
        .collect())
}

/// Runs `f` on a pool of `jobs` threads (all cores when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        b = b.num_threads(j);
    }
    let pool = b
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
