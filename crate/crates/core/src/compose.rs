//! Composition of templates for several objectives on one game, the
//! counter-product reduction for conjunctions of Büchi objectives, and the
//! incremental conflict experiment.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    validate_game, ActionSet, GameGraph, Objective, ObjectiveKind, RawGame, RawTransition,
    StateSet,
};
use crate::random::{random_game, random_subset_of_size, rng, RandomGameConfig};
use crate::solver::solve_buchi;
use crate::strategy::{
    check_compliance, extract_strategy, Schedule, ScheduleStrategy, DEFAULT_COLIVE_BASE,
    DEFAULT_EPS_LIVE,
};
use crate::template::{
    buchi_template_from, check_conflict_free, normalize_groups, synthesize, ColiveFunction,
    ConflictJson, ConflictReport, LivenessTuple, SafetyFunction, Template, TemplateJson,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedTemplate {
    pub parts: Vec<Template>,
    pub merged: Template,
    pub conflicts: ConflictReport,
}

impl ComposedTemplate {
    pub fn to_json(&self, g: &GameGraph) -> ComposedJson {
        ComposedJson {
            parts: self.parts.len(),
            merged: self.merged.to_json(g),
            conflicts: self.conflicts.to_json(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedJson {
    pub parts: usize,
    pub merged: TemplateJson,
    pub conflicts: Vec<ConflictJson>,
}

/// Merges templates over the same game: unions of unsafe and colive actions,
/// union of live groups, concatenated partitions, intersected winning regions.
pub fn compose(g: &GameGraph, templates: &[Template]) -> Result<ComposedTemplate> {
    let first = templates
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to compose".into()))?;
    for t in templates {
        t.check_shape(g)?;
    }
    let mut winning = first.winning.clone();
    let mut unsafe_actions = first.safety.unsafe_actions.clone();
    let mut colive = first.colive.colive.clone();
    let mut groups = first.liveness.groups.clone();
    let mut partition = first.liveness.partition.clone();
    for t in &templates[1..] {
        winning.intersect_with(&t.winning);
        for v in 0..g.num_states() {
            unsafe_actions[v].union_with(t.unsafe_at(v));
            colive[v].union_with(t.colive_at(v));
            groups[v].extend(t.groups_at(v).iter().cloned());
        }
        partition.extend(t.partition().iter().cloned());
    }
    let merged = Template {
        winning,
        safety: SafetyFunction { unsafe_actions },
        liveness: LivenessTuple {
            groups: groups.into_iter().map(normalize_groups).collect(),
            partition,
        },
        colive: ColiveFunction { colive },
        objective_tag: templates
            .iter()
            .map(|t| t.objective_tag.as_str())
            .collect::<Vec<_>>()
            .join("+"),
    };
    let conflicts = check_conflict_free(g, &merged);
    Ok(ComposedTemplate {
        parts: templates.to_vec(),
        merged,
        conflicts,
    })
}

/// The game `G × {0 … k-1}` whose counter moves from `c` to `c+1 mod k` when
/// the current state lies in `Iᶜ`. Visiting `{(v, 0) | v ∈ I⁰}` infinitely
/// often is equivalent to visiting every `Iᶜ` infinitely often.
#[derive(Debug, Clone)]
pub struct CounterProduct {
    pub game: GameGraph,
    pub target: StateSet,
    /// `index[c][v]` is the product state `(v, c)`.
    pub index: Vec<Vec<usize>>,
}

fn product_name(g: &GameGraph, v: usize, c: usize) -> String {
    format!("{}#{c}", g.state_name(v))
}

pub fn counter_product(g: &GameGraph, targets: &[StateSet]) -> Result<CounterProduct> {
    let k = targets.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no Büchi targets".into()));
    }
    let n = g.num_states();
    let mut raw = RawGame {
        states: Vec::with_capacity(n * k),
        p1_actions: Default::default(),
        p2_actions: Default::default(),
        transitions: Vec::new(),
        objective: None,
    };
    for c in 0..k {
        for v in 0..n {
            let name = product_name(g, v, c);
            raw.states.push(name.clone());
            raw.p1_actions.insert(name.clone(), g.p1_actions(v).to_vec());
            raw.p2_actions.insert(name.clone(), g.p2_actions(v).to_vec());
            let next_c = if targets[c].contains(v) { (c + 1) % k } else { c };
            for a in 0..g.num_p1(v) {
                for b in 0..g.num_p2(v) {
                    raw.transitions.push(RawTransition {
                        from: name.clone(),
                        p1: g.p1_actions(v)[a].clone(),
                        p2: g.p2_actions(v)[b].clone(),
                        to: product_name(g, g.succ(v, a, b), next_c),
                    });
                }
            }
        }
    }
    let game = validate_game(&raw)?;
    let index: Vec<Vec<usize>> = (0..k)
        .map(|c| {
            (0..n)
                .map(|v| game.state_index(&product_name(g, v, c)).expect("product state"))
                .collect()
        })
        .collect();
    let mut target = game.empty_set();
    for v in targets[0].ones() {
        target.insert(index[0][v]);
    }
    Ok(CounterProduct {
        game,
        target,
        index,
    })
}

/// States of `g` winning every Büchi target at once.
pub fn generalized_buchi_winning(g: &GameGraph, targets: &[StateSet]) -> Result<StateSet> {
    let p = counter_product(g, targets)?;
    let d = solve_buchi(&p.game, &p.target)?;
    let mut w = g.empty_set();
    for v in 0..g.num_states() {
        w.set(v, d.winning.contains(p.index[0][v]));
    }
    Ok(w)
}

/// Template for a conjunction of Büchi objectives, read off the product
/// template: winning states and unsafe actions from counter 0, live groups
/// united over all counter values, partition cells projected to `g`.
pub fn generalized_buchi_template(g: &GameGraph, targets: &[StateSet]) -> Result<Template> {
    let p = counter_product(g, targets)?;
    let d = solve_buchi(&p.game, &p.target)?;
    let pt = buchi_template_from(&p.game, &p.target, &d)?;
    let n = g.num_states();
    let mut winning = g.empty_set();
    let mut unsafe_actions = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for v in 0..n {
        let v0 = p.index[0][v];
        winning.set(v, pt.winning.contains(v0));
        unsafe_actions.push(pt.unsafe_at(v0).clone());
        let all: Vec<ActionSet> = p
            .index
            .iter()
            .flat_map(|layer| pt.groups_at(layer[v]).iter().cloned())
            .collect();
        groups.push(normalize_groups(all));
    }
    let mut partition: Vec<StateSet> = Vec::new();
    for cell in pt.partition() {
        let mut proj = g.empty_set();
        for v in 0..n {
            proj.set(v, p.index.iter().any(|layer| cell.contains(layer[v])));
        }
        if !partition.contains(&proj) {
            partition.push(proj);
        }
    }
    Ok(Template {
        winning,
        safety: SafetyFunction { unsafe_actions },
        liveness: LivenessTuple { groups, partition },
        colive: ColiveFunction {
            colive: (0..n)
                .map(|v| g.empty_actions(v, crate::game::Player::One))
                .collect(),
        },
        objective_tag: "generalized_buchi".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncrementalStep {
    pub objectives_added: usize,
    /// Target size of the objective added at this step.
    pub objective_size: usize,
    pub conflict: bool,
    /// The conflict was removed by re-solving the Büchi conjunction.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncrementalResult {
    pub composed: ComposedTemplate,
    pub steps: Vec<IncrementalStep>,
    /// Some conflict involved a co-Büchi objective and was left in place.
    pub unsound: bool,
}

impl IncrementalResult {
    pub fn rows(&self) -> Vec<ConflictHeatmapRow> {
        let mut rows: Vec<_> = self
            .steps
            .iter()
            .map(|s| ConflictHeatmapRow {
                objective_size: s.objective_size,
                objectives_added: s.objectives_added,
                conflict_fraction: if s.conflict { 1.0 } else { 0.0 },
            })
            .collect();
        rows.sort_by_key(|r| (r.objective_size, r.objectives_added));
        rows
    }
}

/// Adds objectives one by one, composing all templates so far after each
/// addition. A conflict among Büchi objectives only is resolved through the
/// counter product; any other conflict is recorded and kept.
pub fn incremental_synthesize(g: &GameGraph, objectives: &[Objective]) -> Result<IncrementalResult> {
    if objectives.is_empty() {
        return Err(Error::InvalidArgument("no objectives".into()));
    }
    let mut templates = Vec::new();
    let mut steps = Vec::new();
    let mut unsound = false;
    let mut composed = None;
    for (i, obj) in objectives.iter().enumerate() {
        if obj.kind == ObjectiveKind::Safety {
            return Err(Error::UnsupportedObjective(
                "safety objectives must be folded into the game first".into(),
            ));
        }
        templates.push(synthesize(g, obj)?);
        let mut c = compose(g, &templates)?;
        let conflict = !c.conflicts.is_conflict_free();
        let mut resolved = false;
        if conflict {
            let seen = &objectives[..=i];
            if seen.iter().all(|o| o.kind == ObjectiveKind::Buchi) {
                let targets: Vec<StateSet> = seen.iter().map(|o| o.target.clone()).collect();
                c.merged = generalized_buchi_template(g, &targets)?;
                c.conflicts = check_conflict_free(g, &c.merged);
                resolved = c.conflicts.is_conflict_free();
            } else {
                unsound = true;
            }
        }
        steps.push(IncrementalStep {
            objectives_added: i + 1,
            objective_size: obj.target.count_ones(..),
            conflict,
            resolved,
        });
        composed = Some(c);
    }
    Ok(IncrementalResult {
        composed: composed.expect("at least one objective"),
        steps,
        unsound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictHeatmapRow {
    pub objective_size: usize,
    pub objectives_added: usize,
    pub conflict_fraction: f64,
}

pub const HEATMAP_HEADER: &str = "objective_size,objectives_added,conflict_fraction";

pub fn heatmap_csv(rows: &[ConflictHeatmapRow]) -> String {
    let mut out = format!("{HEATMAP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6}",
            r.objective_size, r.objectives_added, r.conflict_fraction
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub games: usize,
    pub max_objectives: usize,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub game: RandomGameConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            games: 200,
            max_objectives: 4,
            sizes: vec![1, 2, 3],
            seed: 0,
            game: RandomGameConfig {
                min_states: 3,
                ..RandomGameConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    /// Sorted by `(objective_size, objectives_added)`.
    pub rows: Vec<ConflictHeatmapRow>,
    /// Strategies found compliant with a merged template.
    pub soundness_checks: usize,
    /// ... of which some part rejected.
    pub soundness_violations: usize,
    pub resolved: usize,
    pub unsound_runs: usize,
}

struct Instance {
    steps: Vec<IncrementalStep>,
    checks: usize,
    violations: usize,
    unsound: bool,
}

/// Memoryless strategy with random weights, some of them zero.
fn random_constant_strategy(g: &GameGraph, r: &mut crate::random::GameRng) -> ScheduleStrategy {
    let schedules = (0..g.num_states())
        .map(|v| {
            let k = g.num_p1(v);
            let keep = r.gen_range(0..k);
            (0..k)
                .map(|a| {
                    let p = if a == keep || r.gen_bool(0.6) {
                        r.gen_range(0.1..1.0)
                    } else {
                        0.0
                    };
                    Schedule::Constant { p }
                })
                .collect()
        })
        .collect();
    ScheduleStrategy::new(g, schedules).expect("one positive weight per state")
}

fn run_instance(cfg: &BatchConfig, game_idx: usize, size: usize) -> Result<Instance> {
    let seed = cfg
        .seed
        .wrapping_add((game_idx as u64) << 8)
        .wrapping_add(size as u64);
    let mut r = rng(seed);
    let g = random_game(&mut r, &cfg.game);
    let objectives: Vec<Objective> = (0..cfg.max_objectives)
        .map(|_| {
            let kind = if r.gen_bool(0.5) {
                ObjectiveKind::Buchi
            } else {
                ObjectiveKind::Cobuchi
            };
            Objective::new(kind, random_subset_of_size(&mut r, &g, size))
        })
        .collect();
    let result = incremental_synthesize(&g, &objectives)?;

    // merged-compliant ⇒ part-compliant, on the plain (unresolved) compositions
    let (mut checks, mut violations) = (0, 0);
    for k in 1..=objectives.len() {
        let parts = objectives[..k]
            .iter()
            .map(|o| synthesize(&g, o))
            .collect::<Result<Vec<_>>>()?;
        let c = compose(&g, &parts)?;
        let mut candidates = vec![random_constant_strategy(&g, &mut r)];
        if c.conflicts.is_conflict_free() {
            candidates.push(extract_strategy(
                &g,
                &c.merged,
                DEFAULT_EPS_LIVE,
                DEFAULT_COLIVE_BASE,
            )?);
        }
        for s in &candidates {
            if check_compliance(&g, &c.merged, s).is_compliant() {
                checks += 1;
                if parts.iter().any(|p| !check_compliance(&g, p, s).is_compliant()) {
                    violations += 1;
                }
            }
        }
    }
    Ok(Instance {
        steps: result.steps,
        checks,
        violations,
        unsound: result.unsound,
    })
}

/// Runs the incremental experiment on `games` random games for every
/// objective size, in parallel on the current rayon pool. The result only
/// depends on the configuration.
pub fn conflict_batch(cfg: &BatchConfig) -> Result<BatchReport> {
    if cfg.games == 0 || cfg.max_objectives == 0 || cfg.sizes.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let jobs: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&s| (0..cfg.games).map(move |i| (s, i)))
        .collect();
    let instances = jobs
        .par_iter()
        .map(|&(s, i)| run_instance(cfg, i, s).map(|inst| (s, inst)))
        .collect::<Result<Vec<_>>>()?;

    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rows = Vec::new();
    for &s in &sizes {
        for k in 1..=cfg.max_objectives {
            let hits = instances
                .iter()
                .filter(|(size, inst)| *size == s && inst.steps[k - 1].conflict)
                .count();
            rows.push(ConflictHeatmapRow {
                objective_size: s,
                objectives_added: k,
                conflict_fraction: hits as f64 / cfg.games as f64,
            });
        }
    }
    Ok(BatchReport {
        rows,
        soundness_checks: instances.iter().map(|(_, i)| i.checks).sum(),
        soundness_violations: instances.iter().map(|(_, i)| i.violations).sum(),
        resolved: instances
            .iter()
            .flat_map(|(_, i)| &i.steps)
            .filter(|s| s.resolved)
            .count(),
        unsound_runs: instances.iter().filter(|(_, i)| i.unsound).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::template::buchi_template;

    #[test]
    fn single_part_is_identity() {
        let (g, obj) = examples::cobuchi_game();
        let t = synthesize(&g, &obj).unwrap();
        let c = compose(&g, std::slice::from_ref(&t)).unwrap();
        assert_eq!(c.merged, t);
        assert!(c.conflicts.is_conflict_free());
    }

    #[test]
    fn two_buchi_templates_on_example() {
        let (g, _) = examples::buchi_game();
        let t1 = buchi_template(&g, &g.state_set(&["C"]).unwrap()).unwrap();
        let t2 = buchi_template(&g, &g.state_set(&["A"]).unwrap()).unwrap();
        let c = compose(&g, &[t1.clone(), t2.clone()]).unwrap();
        assert_eq!(c.merged.partition().len(), t1.partition().len() + t2.partition().len());
        assert_eq!(c.merged.objective_tag, "buchi+buchi");
    }

    #[test]
    fn mismatched_game_is_rejected() {
        let (g, obj) = examples::buchi_game();
        let (h, obj2) = examples::cobuchi_game();
        let t1 = synthesize(&g, &obj).unwrap();
        let t2 = synthesize(&h, &obj2).unwrap();
        assert!(matches!(compose(&g, &[t1, t2]), Err(Error::GameMismatch(_))));
    }

    #[test]
    fn product_shape() {
        let (g, _) = examples::buchi_game();
        let targets = [g.state_set(&["C"]).unwrap(), g.state_set(&["B"]).unwrap()];
        let p = counter_product(&g, &targets).unwrap();
        assert_eq!(p.game.num_states(), 6);
        assert_eq!(p.game.set_names(&p.target), ["C#0"]);
        // C is absorbing, so B is never revisited once C is reached
        let w = generalized_buchi_winning(&g, &targets).unwrap();
        assert!(w.is_clear());
    }

    #[test]
    fn single_objective_has_no_conflict() {
        let (g, obj) = examples::cobuchi_game();
        let r = incremental_synthesize(&g, &[obj]).unwrap();
        assert_eq!(r.steps.len(), 1);
        assert!(!r.steps[0].conflict);
        assert_eq!(r.rows()[0].conflict_fraction, 0.0);
    }

    #[test]
    fn safety_is_unsupported() {
        let (g, obj) = examples::safety_gadget();
        assert!(matches!(
            incremental_synthesize(&g, &[obj]),
            Err(Error::UnsupportedObjective(_))
        ));
    }

    #[test]
    fn csv_format() {
        let rows = [ConflictHeatmapRow {
            objective_size: 1,
            objectives_added: 2,
            conflict_fraction: 0.125,
        }];
        assert_eq!(heatmap_csv(&rows), format!("{HEATMAP_HEADER}\n1,2,0.125000\n"));
    }

    #[test]
    fn small_batch_is_deterministic() {
        let cfg = BatchConfig {
            games: 8,
            ..BatchConfig::default()
        };
        let a = conflict_batch(&cfg).unwrap();
        let b = conflict_batch(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 12);
        assert_eq!(a.soundness_violations, 0);
    }
}
