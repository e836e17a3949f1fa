//! Order-insensitive view of a domain, for structural comparison.

use std::collections::{BTreeMap, BTreeSet};

use crate::effects::{action_realizations, outcome_path, ActionEffectError, OutcomeStep};
use crate::pddl::{DomainDef, Literal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSig {
    pub adds: BTreeSet<String>,
    pub dels: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSig {
    pub precondition: BTreeSet<Literal>,
    /// Outcome label path → add/del sets of that realization.
    pub outcomes: BTreeMap<Vec<OutcomeStep>, OutcomeSig>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSig {
    pub predicates: BTreeSet<String>,
    pub actions: BTreeMap<String, ActionSig>,
}

pub fn signature(d: &DomainDef) -> Result<DomainSig, ActionEffectError> {
    let mut actions = BTreeMap::new();
    for a in &d.actions {
        let outcomes = action_realizations(a)?
            .into_iter()
            .map(|r| (outcome_path(a, &r.choice), OutcomeSig { adds: r.adds, dels: r.dels }))
            .collect();
        actions.insert(a.name.clone(), ActionSig { precondition: a.precondition.iter().cloned().collect(), outcomes });
    }
    Ok(DomainSig { predicates: d.predicates.iter().cloned().collect(), actions })
}

/// Human-readable differences between two signatures; empty when equal.
pub fn diff(expected: &DomainSig, actual: &DomainSig) -> Vec<String> {
    let mut out = Vec::new();
    let set_diff = |what: &str, e: &BTreeSet<String>, a: &BTreeSet<String>, out: &mut Vec<String>| {
        for x in e.difference(a) {
            out.push(format!("{what}: missing {x}"));
        }
        for x in a.difference(e) {
            out.push(format!("{what}: unexpected {x}"));
        }
    };
    set_diff("predicates", &expected.predicates, &actual.predicates, &mut out);
    let ek: BTreeSet<String> = expected.actions.keys().cloned().collect();
    let ak: BTreeSet<String> = actual.actions.keys().cloned().collect();
    set_diff("actions", &ek, &ak, &mut out);
    for (name, e) in &expected.actions {
        let Some(a) = actual.actions.get(name) else { continue };
        let lits = |s: &BTreeSet<Literal>| s.iter().map(|l| l.to_string()).collect::<BTreeSet<_>>();
        set_diff(&format!("{name} precondition"), &lits(&e.precondition), &lits(&a.precondition), &mut out);
        let paths = |m: &BTreeMap<Vec<OutcomeStep>, OutcomeSig>| {
            m.keys()
                .map(|p| p.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","))
                .collect::<BTreeSet<_>>()
        };
        set_diff(&format!("{name} outcomes"), &paths(&e.outcomes), &paths(&a.outcomes), &mut out);
        for (p, eo) in &e.outcomes {
            let Some(ao) = a.outcomes.get(p) else { continue };
            let label = p.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
            set_diff(&format!("{name} {label} adds"), &eo.adds, &ao.adds, &mut out);
            set_diff(&format!("{name} {label} dels"), &eo.dels, &ao.dels, &mut out);
        }
    }
    out
}
