//! Scripted conversations and per-step invariant checks.

use std::sync::atomic::AtomicUsize;
use std::sync::Arc;

use dialplan_core::determiners::{Counting, Registry};
use dialplan_core::executor::{check_alignment, Engine, Snapshot};

/// Car Inspection (4 parts): an unrecognized opener (fallback), a part
/// reported up front, a hand-over of initiative, then answers to the agent's
/// questions including one it cannot parse.
pub const CAR_INSPECTION_SCRIPT: [&str; 7] = ["hello there", "oil low", "you ask", "passed", "hmm", "worn", "good"];

/// Alignment of state and context, and applicability of the node's action.
pub fn check_invariants(engine: &Engine, s: &Snapshot) -> Result<(), String> {
    check_alignment(&s.state, &s.context, &engine.manifest).map_err(|e| e.to_string())?;
    let node = engine.controller.node(s.node).ok_or_else(|| format!("node {} missing", s.node))?;
    if node.goal {
        return Ok(());
    }
    let name = node.action.as_deref().ok_or_else(|| format!("node {} has no action", s.node))?;
    let a = engine.domain.action(name).ok_or_else(|| format!("unknown action {name}"))?;
    if !a.applicable(&s.state) {
        return Err(format!("precondition of {name} fails at node {}", s.node));
    }
    Ok(())
}

/// Wraps every registered determiner in a counter.
pub fn counting(reg: &Registry) -> (Registry, Vec<(String, Arc<AtomicUsize>)>) {
    let mut out = Registry::new();
    let mut keys: Vec<String> = reg.keys().map(str::to_string).collect();
    keys.sort();
    let mut counters = Vec::new();
    for k in keys {
        let (c, n) = Counting::new(reg.get(&k).expect("listed key").clone());
        out.insert(k.clone(), Arc::new(c));
        counters.push((k, n));
    }
    (out, counters)
}
