//! Random effect trees and a direct realization-count recursion.

use std::collections::{BTreeMap, BTreeSet};

use dialplan_core::pddl::{Effect, Literal, NodePath};
use rand::Rng;

/// Number of realizations: a leaf has one, `and` multiplies, `oneof` adds.
pub fn count(e: &Effect) -> u128 {
    match e {
        Effect::Lit(_) => 1,
        Effect::And(cs) => cs.iter().map(count).product(),
        Effect::OneOf(o) => o.outcomes.iter().map(|c| count(&c.effect)).sum(),
    }
}

/// Random tree of depth at most `depth`. Every leaf uses a fresh fluent, so
/// no realization can add and delete the same fluent.
pub fn random_tree(rng: &mut impl Rng, depth: usize) -> Effect {
    let mut next = 0usize;
    gen(rng, depth, &mut next, 0)
}

fn gen(rng: &mut impl Rng, depth: usize, next: &mut usize, level: usize) -> Effect {
    let leaf = depth == 0 || (level > 0 && rng.random_bool(0.3));
    if leaf {
        let f = format!("p{next}");
        *next += 1;
        return Effect::Lit(if rng.random_bool(0.5) { Literal::pos(f) } else { Literal::neg(f) });
    }
    let arity = rng.random_range(1..=3);
    let children: Vec<Effect> = (0..arity).map(|_| gen(rng, depth - 1, next, level + 1)).collect();
    if rng.random_bool(0.5) {
        Effect::And(children)
    } else if rng.random_bool(0.5) {
        let labeled = children.into_iter().enumerate().map(|(i, c)| (format!("c{i}"), c));
        *next += 1;
        Effect::labeled_oneof(format!("n{next}"), labeled)
    } else {
        Effect::oneof(children)
    }
}

/// A choice for every `oneof` in the tree, reached or not, keyed by position.
pub fn random_full_choice(rng: &mut impl Rng, e: &Effect) -> BTreeMap<NodePath, usize> {
    fn go(rng: &mut impl Rng, e: &Effect, at: Vec<usize>, out: &mut BTreeMap<NodePath, usize>) {
        match e {
            Effect::Lit(_) => {}
            Effect::And(cs) => cs.iter().enumerate().for_each(|(i, c)| go(rng, c, [at.clone(), vec![i]].concat(), out)),
            Effect::OneOf(o) => {
                out.insert(NodePath(at.clone()), rng.random_range(0..o.outcomes.len()));
                for (i, c) in o.outcomes.iter().enumerate() {
                    go(rng, &c.effect, [at.clone(), vec![i]].concat(), out);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    go(rng, e, Vec::new(), &mut out);
    out
}

/// Add and delete sets reached by following `choice` from the root, plus the
/// positions of the `oneof` nodes actually visited.
pub fn walk(e: &Effect, choice: &BTreeMap<NodePath, usize>) -> (BTreeSet<String>, BTreeSet<String>, BTreeSet<NodePath>) {
    let mut acc = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    let mut stack = vec![(e, Vec::new())];
    while let Some((e, at)) = stack.pop() {
        match e {
            Effect::Lit(l) if l.positive => {
                acc.0.insert(l.fluent.clone());
            }
            Effect::Lit(l) => {
                acc.1.insert(l.fluent.clone());
            }
            Effect::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    stack.push((c, [at.clone(), vec![i]].concat()));
                }
            }
            Effect::OneOf(o) => {
                let p = NodePath(at.clone());
                let i = choice[&p];
                acc.2.insert(p);
                stack.push((&o.outcomes[i].effect, [at, vec![i]].concat()));
            }
        }
    }
    acc
}

pub fn depth(e: &Effect) -> usize {
    match e {
        Effect::Lit(_) => 0,
        Effect::And(cs) => 1 + cs.iter().map(depth).max().unwrap_or(0),
        Effect::OneOf(o) => 1 + o.outcomes.iter().map(|c| depth(&c.effect)).max().unwrap_or(0),
    }
}
