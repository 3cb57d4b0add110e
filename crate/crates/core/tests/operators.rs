mod common;

use congame::predecessor::{a_set, afpre1, apre1, b_set, pre1};
use congame::random::{random_game, random_subset, rng, RandomGameConfig};
use congame::game::Player;
use proptest::prelude::*;

#[test]
fn operators_match_support_enumeration() {
    let mut r = rng(7);
    let cfg = RandomGameConfig::default();
    for _ in 0..300 {
        let g = random_game(&mut r, &cfg);
        let x = random_subset(&mut r, &g);
        let mut y = random_subset(&mut r, &g);
        y.union_with(&x);
        let mut z = random_subset(&mut r, &g);
        z.union_with(&y);
        assert_eq!(pre1(&g, &x), common::pre1(&g, &x));
        assert_eq!(apre1(&g, &y, &x), common::apre1(&g, &y, &x));
        assert_eq!(afpre1(&g, &z, &y, &x), common::afpre1(&g, &z, &y, &x));
        // unrestricted arguments too
        let w = random_subset(&mut r, &g);
        assert_eq!(apre1(&g, &x, &w), common::apre1(&g, &x, &w));
        assert_eq!(afpre1(&g, &w, &x, &y), common::afpre1(&g, &w, &x, &y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn operators_are_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_game(&mut r, &RandomGameConfig::default());
        let small = random_subset(&mut r, &g);
        let mut big = random_subset(&mut r, &g);
        big.union_with(&small);
        prop_assert!(pre1(&g, &small).is_subset(&pre1(&g, &big)));
        prop_assert!(apre1(&g, &big, &small).is_subset(&apre1(&g, &big, &big)));
        prop_assert!(apre1(&g, &small, &small).is_subset(&apre1(&g, &big, &small)));
        prop_assert!(afpre1(&g, &small, &big, &small).is_subset(&afpre1(&g, &big, &big, &small)));
        // pre₁ ⊆ Apre₁(X, X) ⊆ AFpre₁(Z, Y, X) when X ⊆ Y ⊆ Z
        prop_assert!(pre1(&g, &small).is_subset(&apre1(&g, &small, &small)));
    }

    #[test]
    fn set_functions_are_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_game(&mut r, &RandomGameConfig::default());
        let x = random_subset(&mut r, &g);
        let mut y = random_subset(&mut r, &g);
        y.union_with(&x);
        for v in 0..g.num_states() {
            let none = g.empty_actions(v, Player::Two);
            let all1 = g.all_actions(v, Player::One);
            prop_assert!(a_set(&g, v, &x, &none).is_subset(&a_set(&g, v, &y, &none)));
            prop_assert_eq!(a_set(&g, v, &x, &g.all_actions(v, Player::Two)), all1.clone());
            prop_assert!(b_set(&g, v, &x, &all1).is_subset(&b_set(&g, v, &y, &all1)));
            prop_assert!(b_set(&g, v, &x, &g.empty_actions(v, Player::One)).is_clear());
        }
    }
}
