//! Plan execution: context store, precondition-scoped context filtering and
//! the execute-then-determine step.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::determiners::{DeterminerError, DeterminerInput, Env, Registry};
use crate::effects::{apply, ChoiceMap, EffectError, OutcomeStep, Realization, State};
use crate::manifest::{ActionBinding, ExecutionManifest};
use crate::pddl::{ActionDef, DomainDef, Effect, NodePath, ProblemDef};
use crate::planner::Controller;

/// Fluent → value. A missing entry is ⊥.
pub type Context = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `and` children one after another, in order.
    Sequential,
    /// `and` children on the rayon pool.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Agent,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub action: String,
    pub outcome: Vec<OutcomeStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub state: State,
    pub context: Context,
    pub node: usize,
    pub step: u64,
    pub history: Vec<HistoryEntry>,
}

/// Outcome of a determination pass over one effect tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Determination {
    pub realization: Realization,
    /// Values supplied by determiners for added fluents.
    pub values: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminationResult {
    pub realization: Realization,
    /// `None` marks a fluent reset to ⊥.
    pub updates: BTreeMap<String, Option<Value>>,
    pub raw: Value,
}

/// What the execute phase produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Exchange {
    pub payload: Value,
    pub utterances: Vec<Utterance>,
}

/// Handed to the execute callback.
pub struct ExecRequest<'a> {
    pub action: &'a str,
    pub binding: &'a ActionBinding,
    pub context: &'a Context,
    pub env: &'a Env,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("conversation complete")]
    Complete,
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("node {node}: action {action} is not in the domain or manifest")]
    UnknownAction { node: usize, action: String },
    #[error("node {node}: precondition of {action} does not hold")]
    Precondition { node: usize, action: String },
    #[error("callback failed: {0}")]
    Callback(String),
    #[error("no determiner registered for {0}")]
    Unbound(String),
    #[error("determiner {oneof} failed: {source}")]
    Determiner { oneof: String, source: DeterminerError },
    #[error("determiner {oneof} selected unknown outcome {outcome}")]
    UnknownOutcome { oneof: String, outcome: String },
    #[error(transparent)]
    Effect(#[from] EffectError),
    #[error("plan desync at node {node}: no edge for outcome {outcome}")]
    Desync { node: usize, outcome: String },
    #[error("alignment broken: {0}")]
    Alignment(String),
}

/// Copy of the context restricted to the positive precondition fluents of `a`.
pub fn filter_context(a: &ActionDef, c: &Context, m: &ExecutionManifest) -> Result<Context, ExecError> {
    let mut out = Context::new();
    for l in a.precondition.iter().filter(|l| l.positive) {
        if !m.variables.contains_key(&l.fluent) {
            continue;
        }
        let v = c
            .get(&l.fluent)
            .ok_or_else(|| ExecError::Alignment(format!("{} is required by {} but has no value", l.fluent, a.name)))?;
        out.insert(l.fluent.clone(), v.clone());
    }
    Ok(out)
}

/// Variable-keyed view of a (filtered) context.
pub fn env_of(c: &Context, m: &ExecutionManifest) -> Env {
    c.iter().filter_map(|(f, v)| Some((m.variables.get(f)?.clone(), v.clone()))).collect()
}

/// Checks that exactly the bound fluents of `state` carry a value.
pub fn check_alignment(state: &State, c: &Context, m: &ExecutionManifest) -> Result<(), ExecError> {
    if let Some(f) = c.keys().find(|f| !state.contains(*f) || !m.variables.contains_key(*f)) {
        return Err(ExecError::Alignment(format!("{f} has a value but is not a bound fluent of the state")));
    }
    if let Some(f) = state.iter().find(|f| m.variables.contains_key(*f) && !c.contains_key(*f)) {
        return Err(ExecError::Alignment(format!("{f} holds but has no value")));
    }
    Ok(())
}

/// Resolves `action`'s effect top-down, consulting a determiner at each
/// reached `oneof` and descending only into the selected child.
pub fn determine(
    action: &ActionDef,
    registry: &Registry,
    variables: &indexmap::IndexMap<String, String>,
    payload: &Value,
    env: &Env,
    schedule: Schedule,
) -> Result<Determination, ExecError> {
    let cx = Cx { action: &action.name, registry, variables, payload, env, schedule };
    let part = cx.go(&action.effect, NodePath::root(), &BTreeMap::new())?;
    if let Some(f) = part.adds.intersection(&part.dels).next() {
        return Err(EffectError::Conflict { fluent: f.clone() }.into());
    }
    Ok(Determination {
        realization: Realization { adds: part.adds, dels: part.dels, choice: part.choice },
        values: part.values,
    })
}

struct Cx<'a> {
    action: &'a str,
    registry: &'a Registry,
    variables: &'a indexmap::IndexMap<String, String>,
    payload: &'a Value,
    env: &'a Env,
    schedule: Schedule,
}

#[derive(Default)]
struct Part {
    adds: BTreeSet<String>,
    dels: BTreeSet<String>,
    choice: ChoiceMap,
    values: BTreeMap<String, Value>,
}

impl Part {
    fn merge(mut self, o: Part) -> Part {
        self.adds.extend(o.adds);
        self.dels.extend(o.dels);
        self.choice.extend(o.choice);
        self.values.extend(o.values);
        self
    }
}

impl Cx<'_> {
    /// `extracted` holds variable values from the nearest enclosing determiner.
    fn go(&self, e: &Effect, path: NodePath, extracted: &BTreeMap<String, Value>) -> Result<Part, ExecError> {
        match e {
            Effect::Lit(l) => {
                let mut p = Part::default();
                if l.positive {
                    let v = self.variables.get(&l.fluent).and_then(|var| extracted.get(var));
                    if let Some(v) = v {
                        p.values.insert(l.fluent.clone(), v.clone());
                    }
                    p.adds.insert(l.fluent.clone());
                } else {
                    p.dels.insert(l.fluent.clone());
                }
                Ok(p)
            }
            Effect::And(cs) => {
                let parts: Vec<Result<Part, ExecError>> = match self.schedule {
                    Schedule::Sequential => {
                        let mut out = Vec::new();
                        for (i, c) in cs.iter().enumerate() {
                            let r = self.go(c, path.child(i), extracted);
                            let failed = r.is_err();
                            out.push(r);
                            if failed {
                                break;
                            }
                        }
                        out
                    }
                    Schedule::Parallel => {
                        cs.par_iter().enumerate().map(|(i, c)| self.go(c, path.child(i), extracted)).collect()
                    }
                };
                parts.into_iter().try_fold(Part::default(), |acc, p| Ok(acc.merge(p?)))
            }
            Effect::OneOf(o) => {
                let key = o.key(self.action, &path);
                let d = self.registry.get(&key).ok_or_else(|| ExecError::Unbound(key.clone()))?;
                let sel = d
                    .determine(&DeterminerInput { payload: self.payload, env: self.env })
                    .map_err(|source| ExecError::Determiner { oneof: key.clone(), source })?;
                let i = o
                    .outcome_index(&sel.outcome)
                    .ok_or_else(|| ExecError::UnknownOutcome { oneof: key.clone(), outcome: sel.outcome.clone() })?;
                let mut inner = extracted.clone();
                inner.extend(sel.values);
                let mut p = self.go(&o.outcomes[i].effect, path.child(i), &inner)?;
                p.choice.insert(path, i);
                Ok(p)
            }
        }
    }
}

/// Context changes implied by a determination. Added bound fluents take the
/// determiner's value, else keep the value they already had, else `true`.
pub fn context_updates(
    d: &Determination,
    state: &State,
    context: &Context,
    m: &ExecutionManifest,
) -> BTreeMap<String, Option<Value>> {
    let mut out = BTreeMap::new();
    for f in &d.realization.dels {
        if m.variables.contains_key(f) {
            out.insert(f.clone(), None);
        }
    }
    for f in &d.realization.adds {
        if !m.variables.contains_key(f) {
            continue;
        }
        let v = d
            .values
            .get(f)
            .cloned()
            .or_else(|| state.contains(f).then(|| context.get(f).cloned()).flatten())
            .unwrap_or(Value::Bool(true));
        out.insert(f.clone(), Some(v));
    }
    out
}

pub fn apply_updates(context: &Context, updates: &BTreeMap<String, Option<Value>>) -> Context {
    let mut c = context.clone();
    for (f, v) in updates {
        match v {
            Some(v) => c.insert(f.clone(), v.clone()),
            None => c.remove(f),
        };
    }
    c
}

/// Everything produced by one successful step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub snapshot: Snapshot,
    pub action: String,
    pub outcome: Vec<OutcomeStep>,
    pub result: DeterminationResult,
    pub utterances: Vec<Utterance>,
}

/// A solved agent ready to execute.
#[derive(Clone)]
pub struct Engine {
    pub domain: DomainDef,
    pub problem: ProblemDef,
    pub controller: Controller,
    pub manifest: ExecutionManifest,
    pub registry: Registry,
    pub schedule: Schedule,
}

impl Engine {
    pub fn initial(&self) -> Snapshot {
        let state: State = self.problem.init.iter().cloned().collect();
        let context = self
            .manifest
            .initial_context
            .iter()
            .filter(|(f, _)| state.contains(*f))
            .map(|(f, v)| (f.clone(), v.clone()))
            .collect();
        let mut context: Context = context;
        // bound fluents true initially without a declared value
        for f in &state {
            if self.manifest.variables.contains_key(f) && !context.contains_key(f) {
                context.insert(f.clone(), Value::Bool(true));
            }
        }
        Snapshot { state, context, node: self.controller.n0, step: 0, history: Vec::new() }
    }

    pub fn is_complete(&self, s: &Snapshot) -> bool {
        self.controller.node(s.node).is_some_and(|n| n.goal)
    }

    /// Action at the snapshot's node with its binding.
    pub fn current_action(&self, s: &Snapshot) -> Result<(&ActionDef, &ActionBinding), ExecError> {
        let node = self.controller.node(s.node).ok_or(ExecError::UnknownNode(s.node))?;
        if node.goal {
            return Err(ExecError::Complete);
        }
        let name = node.action.as_deref().unwrap_or_default();
        let unknown = || ExecError::UnknownAction { node: s.node, action: name.to_string() };
        let a = self.domain.action(name).ok_or_else(unknown)?;
        let b = self.manifest.actions.get(name).ok_or_else(unknown)?;
        Ok((a, b))
    }

    /// Filtered context and variable view for the current action.
    pub fn scope(&self, s: &Snapshot) -> Result<(Context, Env), ExecError> {
        let (a, _) = self.current_action(s)?;
        let c = filter_context(a, &s.context, &self.manifest)?;
        let env = env_of(&c, &self.manifest);
        Ok((c, env))
    }

    /// Runs one execute-then-determine step. Pure: the input snapshot is never
    /// modified, so a failed step leaves the caller's state untouched.
    pub fn step(
        &self,
        s: &Snapshot,
        exec: &mut dyn FnMut(&ExecRequest<'_>) -> Result<Exchange, String>,
    ) -> Result<StepResult, ExecError> {
        let (a, binding) = self.current_action(s)?;
        if !a.applicable(&s.state) {
            return Err(ExecError::Precondition { node: s.node, action: a.name.clone() });
        }
        let context = filter_context(a, &s.context, &self.manifest)?;
        let env = env_of(&context, &self.manifest);
        let ex = exec(&ExecRequest { action: &a.name, binding, context: &context, env: &env })
            .map_err(ExecError::Callback)?;
        let d = determine(a, &self.registry, &self.manifest.variables, &ex.payload, &env, self.schedule)?;
        self.advance(s, a, d, ex)
    }

    /// Applies a known determination, as `step` does after determining.
    pub fn advance(
        &self,
        s: &Snapshot,
        a: &ActionDef,
        d: Determination,
        ex: Exchange,
    ) -> Result<StepResult, ExecError> {
        let outcome = crate::effects::outcome_path(a, &d.realization.choice);
        let next = self.controller.successor(s.node, &d.realization.choice).ok_or_else(|| ExecError::Desync {
            node: s.node,
            outcome: crate::planner::path_key(&outcome),
        })?;
        let updates = context_updates(&d, &s.state, &s.context, &self.manifest);
        let state = apply(&s.state, &d.realization);
        let context = apply_updates(&s.context, &updates);
        check_alignment(&state, &context, &self.manifest)?;
        let mut history = s.history.clone();
        history.push(HistoryEntry { action: a.name.clone(), outcome: outcome.clone(), utterances: ex.utterances.clone() });
        let snapshot = Snapshot { state, context, node: next, step: s.step + 1, history };
        if let Some(n) = self.controller.node(next).filter(|n| !n.goal) {
            let pre_ok = n.action.as_deref().and_then(|x| self.domain.action(x)).is_some_and(|x| x.applicable(&snapshot.state));
            if !pre_ok {
                return Err(ExecError::Precondition { node: next, action: n.action.clone().unwrap_or_default() });
            }
        }
        Ok(StepResult {
            snapshot,
            action: a.name.clone(),
            outcome,
            result: DeterminationResult { realization: d.realization, updates, raw: ex.payload },
            utterances: ex.utterances,
        })
    }
}
