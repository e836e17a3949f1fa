//! Realization semantics of effect trees.
//!
//! A realization picks exactly one outcome at every `oneof` it reaches and
//! every child of every `and`; its add and delete sets are the positive and
//! negative leaves of the selected subtree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{ActionDef, Effect, NodePath};

/// Selected outcome index per reached `oneof`, keyed by node path.
pub type ChoiceMap = BTreeMap<NodePath, usize>;

pub type State = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Realization {
    pub adds: BTreeSet<String>,
    pub dels: BTreeSet<String>,
    pub choice: ChoiceMap,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EffectError {
    #[error("fluent {fluent} is both added and deleted by one realization")]
    Conflict { fluent: String },
    #[error("no choice given for oneof at {node}")]
    MissingChoice { node: NodePath },
    #[error("choice {index} is out of range for oneof at {node}")]
    InvalidChoice { node: NodePath, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("action {action}: {source}")]
pub struct ActionEffectError {
    pub action: String,
    #[source]
    pub source: EffectError,
}

#[derive(Clone, Default)]
struct Partial {
    adds: BTreeSet<String>,
    dels: BTreeSet<String>,
    choice: ChoiceMap,
}

impl Partial {
    fn merge(&self, other: &Partial) -> Partial {
        let mut p = self.clone();
        p.adds.extend(other.adds.iter().cloned());
        p.dels.extend(other.dels.iter().cloned());
        p.choice.extend(other.choice.iter().map(|(k, v)| (k.clone(), *v)));
        p
    }

    fn finish(self) -> Result<Realization, EffectError> {
        if let Some(f) = self.adds.intersection(&self.dels).next() {
            return Err(EffectError::Conflict { fluent: f.clone() });
        }
        Ok(Realization { adds: self.adds, dels: self.dels, choice: self.choice })
    }
}

fn enumerate(e: &Effect, path: &NodePath) -> Vec<Partial> {
    match e {
        Effect::Lit(l) => {
            let mut p = Partial::default();
            if l.positive {
                p.adds.insert(l.fluent.clone());
            } else {
                p.dels.insert(l.fluent.clone());
            }
            vec![p]
        }
        Effect::And(cs) => cs.iter().enumerate().fold(vec![Partial::default()], |acc, (i, c)| {
            let sub = enumerate(c, &path.child(i));
            acc.iter().flat_map(|a| sub.iter().map(move |s| a.merge(s))).collect()
        }),
        Effect::OneOf(o) => o
            .outcomes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                enumerate(&c.effect, &path.child(i)).into_iter().map(move |mut p| {
                    p.choice.insert(path.clone(), i);
                    p
                })
            })
            .collect(),
    }
}

/// All realizations of `e`, one per distinct choice map, in a fixed order.
pub fn enumerate_realizations(e: &Effect) -> Result<Vec<Realization>, EffectError> {
    enumerate(e, &NodePath::root()).into_iter().map(Partial::finish).collect()
}

pub fn action_realizations(a: &ActionDef) -> Result<Vec<Realization>, ActionEffectError> {
    enumerate_realizations(&a.effect)
        .map_err(|source| ActionEffectError { action: a.name.clone(), source })
}

/// The realization selected by `choice`. Entries for unreached nodes are ignored.
pub fn resolve(e: &Effect, choice: &ChoiceMap) -> Result<Realization, EffectError> {
    fn go(e: &Effect, path: &NodePath, choice: &ChoiceMap, acc: &mut Partial) -> Result<(), EffectError> {
        match e {
            Effect::Lit(l) => {
                if l.positive {
                    acc.adds.insert(l.fluent.clone());
                } else {
                    acc.dels.insert(l.fluent.clone());
                }
            }
            Effect::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    go(c, &path.child(i), choice, acc)?;
                }
            }
            Effect::OneOf(o) => {
                let &index = choice
                    .get(path)
                    .ok_or_else(|| EffectError::MissingChoice { node: path.clone() })?;
                let c = o
                    .outcomes
                    .get(index)
                    .ok_or_else(|| EffectError::InvalidChoice { node: path.clone(), index })?;
                acc.choice.insert(path.clone(), index);
                go(&c.effect, &path.child(index), choice, acc)?;
            }
        }
        Ok(())
    }
    let mut acc = Partial::default();
    go(e, &NodePath::root(), choice, &mut acc)?;
    acc.finish()
}

/// `(state \ dels) ∪ adds`
pub fn apply(state: &State, r: &Realization) -> State {
    state
        .iter()
        .filter(|f| !r.dels.contains(*f))
        .cloned()
        .chain(r.adds.iter().cloned())
        .collect()
}

/// One selected outcome, named by labels rather than positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeStep {
    pub oneof: String,
    pub outcome: String,
}

impl fmt::Display for OutcomeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.oneof, self.outcome)
    }
}

/// Label path of a choice map over `action`'s effect, in pre-order.
pub fn outcome_path(action: &ActionDef, choice: &ChoiceMap) -> Vec<OutcomeStep> {
    action
        .effect
        .oneofs()
        .into_iter()
        .filter_map(|(path, o)| {
            let &i = choice.get(&path)?;
            Some(OutcomeStep { oneof: o.key(&action.name, &path), outcome: o.outcome_label(i).into_owned() })
        })
        .collect()
}

/// Inverse of [`outcome_path`].
pub fn choice_from_path(action: &ActionDef, steps: &[OutcomeStep]) -> Option<ChoiceMap> {
    let oneofs = action.effect.oneofs();
    let mut choice = ChoiceMap::new();
    for s in steps {
        let (path, o) = oneofs.iter().find(|(p, o)| o.key(&action.name, p) == s.oneof)?;
        choice.insert(path.clone(), o.outcome_index(&s.outcome)?);
    }
    Some(choice)
}
