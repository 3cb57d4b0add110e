mod common;

use congame::game::{ObjectiveKind, StateSet};
use congame::predecessor::pre1;
use congame::random::{random_game, random_subset, rng, RandomGameConfig};
use congame::solver::{solve_buchi, solve_cobuchi, solve_safety};
use proptest::prelude::*;

fn corpus_targets(seed: u64, count: usize) -> Vec<(congame::game::GameGraph, StateSet)> {
    let cfg = common::small_config();
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let g = random_game(&mut r, &cfg);
            let t = random_subset(&mut r, &g);
            (g, t)
        })
        .collect()
}

#[test]
fn safety_matches_memoryless_enumeration() {
    for (g, t) in corpus_targets(1, 150) {
        let w = solve_safety(&g, &t).unwrap().winning;
        assert_eq!(w, common::memoryless_region(&g, ObjectiveKind::Safety, &t));
    }
}

#[test]
fn buchi_matches_memoryless_enumeration() {
    for (g, t) in corpus_targets(2, 150) {
        let w = solve_buchi(&g, &t).unwrap().winning;
        assert_eq!(
            w,
            common::memoryless_region(&g, ObjectiveKind::Buchi, &t),
            "{}",
            g.to_json(None)
        );
    }
}

#[test]
fn cobuchi_contains_memoryless_wins() {
    // Memoryless strategies may not suffice here, so only inclusion is exact.
    for (g, t) in corpus_targets(3, 150) {
        let w = solve_cobuchi(&g, &t).unwrap().winning;
        let m = common::memoryless_region(&g, ObjectiveKind::Cobuchi, &t);
        assert!(m.is_subset(&w), "{}", g.to_json(None));
    }
}

#[test]
fn wider_actions_buchi() {
    let cfg = RandomGameConfig {
        min_states: 2,
        max_states: 3,
        max_actions: 3,
    };
    let mut r = rng(4);
    for _ in 0..60 {
        let g = random_game(&mut r, &cfg);
        let t = random_subset(&mut r, &g);
        let w = solve_buchi(&g, &t).unwrap().winning;
        assert_eq!(w, common::memoryless_region(&g, ObjectiveKind::Buchi, &t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_chains_are_increasing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_game(&mut r, &RandomGameConfig::default());
        let t = random_subset(&mut r, &g);
        for d in [solve_buchi(&g, &t).unwrap(), solve_cobuchi(&g, &t).unwrap()] {
            for pair in d.ranks.windows(2) {
                prop_assert!(pair[0].is_subset(&pair[1]) && pair[0] != pair[1]);
            }
            prop_assert_eq!(d.ranks.last().unwrap(), &d.winning);
            for v in 0..g.num_states() {
                prop_assert_eq!(d.rank_of[v].is_some(), d.winning.contains(v));
            }
        }
    }

    #[test]
    fn region_relationships(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_game(&mut r, &RandomGameConfig::default());
        let t = random_subset(&mut r, &g);
        let safe = solve_safety(&g, &t).unwrap().winning;
        let buchi = solve_buchi(&g, &t).unwrap().winning;
        let cobuchi = solve_cobuchi(&g, &t).unwrap().winning;
        prop_assert!(safe.is_subset(&t));
        prop_assert!(safe.is_subset(&pre1(&g, &safe)));
        // □I ⇒ ◇□I ⇒ □◇I
        prop_assert!(safe.is_subset(&cobuchi));
        prop_assert!(cobuchi.is_subset(&buchi));
        // winning regions are closed under some surely-staying action
        prop_assert!(buchi.is_subset(&pre1(&g, &buchi)));
        prop_assert!(cobuchi.is_subset(&pre1(&g, &cobuchi)));
    }
}
