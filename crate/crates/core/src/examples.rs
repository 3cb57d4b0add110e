//! Small reference games shipped with the crate (the JSON lives in `fixtures/`).

use crate::game::{parse_game, GameGraph, Objective};

pub const BUCHI_EXAMPLE_JSON: &str = include_str!("../fixtures/buchi_example.json");
pub const COBUCHI_EXAMPLE_JSON: &str = include_str!("../fixtures/cobuchi_example.json");
pub const SAFETY_GADGET_JSON: &str = include_str!("../fixtures/safety_gadget.json");
pub const TB_PAIR_JSON: &str = include_str!("../fixtures/tb_pair.json");
pub const BUCHI_NONMAX_STRATEGY_JSON: &str = include_str!("../fixtures/buchi_nonmax_strategy.json");
pub const COBUCHI_NONMAX_STRATEGY_JSON: &str =
    include_str!("../fixtures/cobuchi_nonmax_strategy.json");

fn load(json: &str) -> (GameGraph, Objective) {
    let (g, obj) = parse_game(json).expect("bundled fixture is valid");
    (g, obj.expect("bundled fixture has an objective"))
}

/// Three states `A, B, C`, both players choose from `{a, b}`; action `a` at
/// `A` or `B` moves to `C`, `b` swaps `A`/`B`; `C` is absorbing. Target `{C}`.
pub fn buchi_game() -> (GameGraph, Objective) {
    load(BUCHI_EXAMPLE_JSON)
}

/// Five states; `S2` is a 4×3 matrix game, `S0`/`S1` are absorbing and
/// `S3`/`S4` return to `S2`. Target `{S0, S1, S2, S3}`.
pub fn cobuchi_game() -> (GameGraph, Objective) {
    load(COBUCHI_EXAMPLE_JSON)
}

/// Two states: at `g` action `s` stays, `u` falls into the sink `t`. Target `{g}`.
pub fn safety_gadget() -> (GameGraph, Objective) {
    load(SAFETY_GADGET_JSON)
}
