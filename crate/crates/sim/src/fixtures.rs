//! Benchmark trees: a flat `and` of independent determiners, a deep chain of
//! nested `oneof`s, and a general tree mixing both.

use dialplan_core::pddl::Effect;

pub const FLAT: &str = include_str!("../fixtures/flat.json");
pub const DEEP_CHAIN: &str = include_str!("../fixtures/deep_chain.json");
pub const GENERAL: &str = include_str!("../fixtures/general.json");

pub const NAMES: [&str; 3] = ["flat", "deep-chain", "general"];

pub fn load(text: &str) -> Result<Effect, serde_json::Error> {
    serde_json::from_str(text)
}

/// Bundled tree by name.
pub fn named(name: &str) -> Option<Effect> {
    let text = match name {
        "flat" => FLAT,
        "deep-chain" => DEEP_CHAIN,
        "general" => GENERAL,
        _ => return None,
    };
    Some(load(text).expect("bundled fixture parses"))
}
