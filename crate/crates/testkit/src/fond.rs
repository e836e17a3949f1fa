//! Random small FOND problems and an exhaustive strong-cyclic oracle that
//! works over every one of the 2^n states with plain bitmasks.

use dialplan_core::pddl::{ActionDef, DomainDef, Effect, Literal, ProblemDef};
use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::Rng;

pub const MAX_FLUENTS: usize = 6;
pub const MAX_ACTIONS: usize = 5;
pub const MAX_OUTCOMES: usize = 3;

pub fn random_problem(rng: &mut impl Rng) -> (DomainDef, ProblemDef) {
    let n = rng.random_range(1..=MAX_FLUENTS);
    let fluents: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    let lit = |f: &str, pos: bool| if pos { Literal::pos(f) } else { Literal::neg(f) };

    let mut actions = Vec::new();
    for a in 0..rng.random_range(1..=MAX_ACTIONS) {
        let mut pre = IndexSet::new();
        for f in &fluents {
            if rng.random_bool(0.25) {
                pre.insert(lit(f, rng.random_bool(0.5)));
            }
        }
        // fluents touched unconditionally vs. per outcome are kept disjoint
        let mut pool = fluents.clone();
        pool.shuffle(rng);
        let shared = rng.random_range(0..=pool.len().min(1));
        let common: Vec<Effect> = pool[..shared].iter().map(|f| Effect::Lit(lit(f, rng.random_bool(0.5)))).collect();
        let rest = &pool[shared..];
        let outcomes = rng.random_range(1..=MAX_OUTCOMES);
        let mut branches = Vec::new();
        for _ in 0..outcomes {
            let mut picks: Vec<&String> = rest.iter().filter(|_| rng.random_bool(0.4)).collect();
            if picks.is_empty() && !rest.is_empty() {
                picks.push(&rest[rng.random_range(0..rest.len())]);
            }
            branches.push(Effect::And(picks.into_iter().map(|f| Effect::Lit(lit(f, rng.random_bool(0.5)))).collect()));
        }
        let effect = match (outcomes, common.is_empty()) {
            (1, _) => Effect::And(common.into_iter().chain(branches).collect()),
            (_, true) => Effect::oneof(branches),
            (_, false) => Effect::And(common.into_iter().chain([Effect::oneof(branches)]).collect()),
        };
        actions.push(ActionDef { name: format!("a{a}"), precondition: pre, effect });
    }

    let init: IndexSet<String> = fluents.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
    let mut goal: IndexSet<String> = fluents.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
    if goal.is_empty() {
        goal.insert(fluents[rng.random_range(0..n)].clone());
    }
    let d = DomainDef {
        name: "random".into(),
        requirements: vec![":strips".into(), ":non-deterministic".into()],
        predicates: fluents.iter().cloned().collect(),
        actions,
    };
    let p = ProblemDef { name: "random-problem".into(), domain: "random".into(), init, goal };
    (d, p)
}

struct Op {
    pos: u32,
    neg: u32,
    outs: Vec<(u32, u32)>,
}

/// (add, del) masks for every realization of `e`.
fn masks(e: &Effect, bit: &dyn Fn(&str) -> u32) -> Vec<(u32, u32)> {
    match e {
        Effect::Lit(l) if l.positive => vec![(bit(&l.fluent), 0)],
        Effect::Lit(l) => vec![(0, bit(&l.fluent))],
        Effect::And(cs) => cs.iter().fold(vec![(0, 0)], |acc, c| {
            let sub = masks(c, bit);
            acc.iter().flat_map(|&(a, d)| sub.iter().map(move |&(a2, d2)| (a | a2, d | d2))).collect()
        }),
        Effect::OneOf(o) => o.outcomes.iter().flat_map(|c| masks(&c.effect, bit)).collect(),
    }
}

/// Whether a strong-cyclic policy exists, by greatest-fixpoint elimination
/// over the full state space. Panics on more than 16 predicates.
pub fn strong_cyclic_solvable(d: &DomainDef, p: &ProblemDef) -> bool {
    let preds: Vec<&String> = d.predicates.iter().collect();
    assert!(preds.len() <= 16, "oracle is exhaustive; keep instances small");
    let bit = |f: &str| preds.iter().position(|p| *p == f).map_or(0, |i| 1u32 << i);
    let ops: Vec<Op> = d
        .actions
        .iter()
        .map(|a| {
            let pos = a.precondition.iter().filter(|l| l.positive).fold(0, |m, l| m | bit(&l.fluent));
            let neg = a.precondition.iter().filter(|l| !l.positive).fold(0, |m, l| m | bit(&l.fluent));
            Op { pos, neg, outs: masks(&a.effect, &bit) }
        })
        .collect();
    let total = 1usize << preds.len();
    let goal = p.goal.iter().fold(0, |m, g| m | bit(g));
    let init = p.init.iter().fold(0, |m, f| m | bit(f)) as usize;

    let mut keep = vec![true; total];
    loop {
        // least fixpoint: states with a safe action that can move closer
        let mut good: Vec<bool> = (0..total).map(|s| keep[s] && s as u32 & goal == goal).collect();
        loop {
            let mut grew = false;
            for s in 0..total {
                if good[s] || !keep[s] {
                    continue;
                }
                let st = s as u32;
                let ok = ops.iter().any(|op| {
                    st & op.pos == op.pos
                        && st & op.neg == 0
                        && op.outs.iter().all(|&(a, dl)| keep[((st & !dl) | a) as usize])
                        && op.outs.iter().any(|&(a, dl)| good[((st & !dl) | a) as usize])
                });
                if ok {
                    good[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if good == keep {
            return keep[init];
        }
        keep = good;
    }
}
