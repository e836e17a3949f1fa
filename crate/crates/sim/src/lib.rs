//! Simulated determination latency for four evaluation strategies.
//!
//! Every `oneof` node gets a LogNormal(0,1) determiner time and outcomes are
//! drawn uniformly top-down. Strategy totals are computed analytically:
//!
//! * parallel-nested: leaf 0, `oneof` own time plus the selected child, `and` max
//! * sequential-nested: as above with `and` summing
//! * parallel-flat: max over every `oneof` in the tree
//! * sequential-flat: sum over every `oneof` in the tree

pub mod bench;
pub mod fixtures;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use dialplan_core::effects::ChoiceMap;
use dialplan_core::pddl::{Effect, NodePath};
use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

pub use bench::{histogram, run_bench, BenchResult, Histogram};
pub use tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    ParallelNested,
    ParallelFlat,
    SequentialNested,
    SequentialFlat,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] =
        [Self::ParallelNested, Self::ParallelFlat, Self::SequentialNested, Self::SequentialFlat];

    pub fn name(self) -> &'static str {
        match self {
            Self::ParallelNested => "parallel-nested",
            Self::ParallelFlat => "parallel-flat",
            Self::SequentialNested => "sequential-nested",
            Self::SequentialFlat => "sequential-flat",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("no determiner time for oneof {0}")]
    MissingTime(NodePath),
    #[error("no outcome chosen for oneof {0}")]
    MissingChoice(NodePath),
}

/// Determiner time per `oneof`, keyed by position.
pub type Times = BTreeMap<NodePath, f64>;

/// One sampled trial with the totals of all four strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrial {
    pub tree: String,
    pub seed: u64,
    pub trial: u64,
    pub times: Times,
    pub outcome: ChoiceMap,
    pub totals: BTreeMap<StrategyKind, f64>,
}

/// Draws a time for every `oneof` (pre-order), then picks outcomes top-down.
pub fn sample_trial(tree: &Effect, rng: &mut impl Rng) -> (Times, ChoiceMap) {
    let t = Tree::new(tree);
    let (times, picks) = t.sample(rng);
    let paths = t.oneof_paths();
    let times = paths.iter().cloned().zip(times).collect();
    let choice = paths.iter().zip(picks).filter_map(|(p, c)| Some((p.clone(), c?))).collect();
    (times, choice)
}

/// Total determination time of `kind` for the given times and outcome.
pub fn strategy_time(kind: StrategyKind, tree: &Effect, times: &Times, outcome: &ChoiceMap) -> Result<f64, SimError> {
    let t = Tree::new(tree);
    let paths = t.oneof_paths();
    let nested = matches!(kind, StrategyKind::ParallelNested | StrategyKind::SequentialNested);
    let mut tv = vec![f64::NAN; paths.len()];
    let mut cv = vec![None; paths.len()];
    for (i, p) in paths.iter().enumerate() {
        match times.get(p) {
            Some(&x) => tv[i] = x,
            None if !nested => return Err(SimError::MissingTime(p.clone())),
            None => {}
        }
        cv[i] = outcome.get(p).copied();
    }
    t.total(kind, &tv, &cv)
}

pub(crate) fn lognormal() -> LogNormal<f64> {
    LogNormal::new(0.0, 1.0).expect("valid parameters")
}

pub(crate) fn draw(d: &LogNormal<f64>, rng: &mut impl Rng) -> f64 {
    d.sample(rng)
}
