//! Compiles an [`AgentSpec`] into a FOND domain/problem pair and an
//! [`ExecutionManifest`].
//!
//! Encoding summary:
//! - entity/json variable `v` → `have_v`, plus `maybe-have_v` when the spec
//!   uses the uncertain status anywhere (or sets `three-valued`);
//!   a flag variable is a fluent of the same name
//! - every action is one `labeled-oneof` named `resolve-<action>`
//! - goal outcomes add `GOAL`; the problem goal is `{GOAL}`
//! - a start action makes every other action require `STARTED`
//! - forced followups add a `can-do_<action>` gate to every action
//! - `max-applications = k` adds one-hot `tries-left_<action>_<i>` guards

use indexmap::{IndexMap, IndexSet};
use serde_json::Value;

use crate::determiners::{DeterminerBinding, DeterminerConfig, Intent, ResponseCase, Rule};
use crate::manifest::{ActionBinding, Callback, ExecutionManifest};
use crate::pddl::{ActionDef, DomainDef, Effect, Literal, ProblemDef};
use crate::spec::{has_errors, ActionKind, ActionSpec, AgentSpec, Diagnostic, Knowledge, OutcomeSpec, Setting, ValueKind};

pub const GOAL: &str = "GOAL";
pub const STARTED: &str = "STARTED";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("spec has {} error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
    #[error("name collision after mangling: {0}")]
    Collision(String),
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub domain: DomainDef,
    pub problem: ProblemDef,
    pub manifest: ExecutionManifest,
}

pub fn have(var: &str) -> String {
    format!("have_{var}")
}

pub fn maybe_have(var: &str) -> String {
    format!("maybe-have_{var}")
}

struct Ctx<'a> {
    spec: &'a AgentSpec,
    three: bool,
    forced: bool,
    has_start: bool,
    /// spec action name → PDDL name, all actions in compilation order
    pddl: IndexMap<String, String>,
}

impl Ctx<'_> {
    fn full(&self, name: &str) -> String {
        let p = self.spec.prefix();
        if p.is_empty() {
            name.to_string()
        } else {
            format!("{p}-{name}")
        }
    }

    fn can_do(&self, pddl: &str) -> String {
        format!("can-do_{pddl}")
    }

    fn status(&self, var: &str, k: Knowledge) -> Vec<Literal> {
        let (h, m) = (have(var), maybe_have(var));
        let mut out = match k {
            Knowledge::Known => vec![Literal::pos(h)],
            Knowledge::Unknown => vec![Literal::neg(h)],
            Knowledge::Uncertain => vec![Literal::neg(h)],
        };
        if self.three {
            out.push(if k == Knowledge::Uncertain { Literal::pos(m) } else { Literal::neg(m) });
        }
        out
    }

    fn setting(&self, var: &str, s: Setting) -> Vec<Literal> {
        match s {
            Setting::Flag(true) => vec![Literal::pos(var)],
            Setting::Flag(false) => vec![Literal::neg(var)],
            Setting::Status(k) => self.status(var, k),
        }
    }

    /// Gate literals closing an outcome: re-enable everything, or only `follow`.
    fn gates(&self, follow: Option<&str>) -> Vec<Literal> {
        if !self.forced {
            return Vec::new();
        }
        self.pddl
            .values()
            .map(|a| {
                let f = self.can_do(a);
                match follow {
                    Some(g) if g != a => Literal::neg(f),
                    _ => Literal::pos(f),
                }
            })
            .collect()
    }

    fn base_pre(&self, pddl: &str) -> Vec<Literal> {
        if self.forced {
            vec![Literal::pos(self.can_do(pddl))]
        } else {
            Vec::new()
        }
    }
}

struct Emitted {
    actions: Vec<ActionDef>,
    bindings: Vec<(String, ActionBinding)>,
    determiners: Vec<(String, DeterminerBinding)>,
    guards: Vec<(String, bool)>,
}

fn label_of(action: &str, o: &OutcomeSpec) -> String {
    let suffix = o
        .check
        .as_ref()
        .map(|c| format!("check-{}-eq-{}", c.variable, c.value))
        .unwrap_or_default();
    match &o.name {
        Some(n) => format!("{action}_{n}__{suffix}"),
        None => format!("{action}-outcome-fallback__{suffix}"),
    }
}

fn outcomes_with_fallback(a: &ActionSpec) -> Vec<OutcomeSpec> {
    let mut outs = a.outcomes.clone();
    if a.kind == ActionKind::Dialogue && !outs.iter().any(OutcomeSpec::is_fallback) {
        outs.push(OutcomeSpec::default());
    }
    outs
}

fn determiner_for(a: &ActionSpec, outs: &[OutcomeSpec], labels: &[String]) -> DeterminerConfig {
    let fallback = outs.iter().position(OutcomeSpec::is_fallback).map(|i| labels[i].clone());
    let trivial = outs.len() == 1 && outs[0].phrases.is_empty() && outs[0].when.is_none() && outs[0].response.is_empty();
    match a.kind {
        ActionKind::Dialogue => DeterminerConfig::KeywordIntent {
            intents: outs
                .iter()
                .zip(labels)
                .filter(|(o, _)| !o.is_fallback())
                .map(|(o, l)| Intent { outcome: l.clone(), phrases: o.phrases.clone() })
                .collect(),
            fallback: fallback.unwrap_or_else(|| labels[0].clone()),
        },
        _ if trivial => DeterminerConfig::OrderedCondition {
            rules: vec![Rule { outcome: labels[0].clone(), when: None }],
            no_match_is_error: false,
        },
        ActionKind::System => DeterminerConfig::OrderedCondition {
            rules: outs.iter().zip(labels).map(|(o, l)| Rule { outcome: l.clone(), when: o.when.clone() }).collect(),
            no_match_is_error: a.no_match_is_error,
        },
        ActionKind::Web => DeterminerConfig::ResponseMap {
            field: a.response_field.clone().unwrap_or_else(|| "status".into()),
            cases: outs
                .iter()
                .zip(labels)
                .flat_map(|(o, l)| o.response.iter().map(move |v| ResponseCase { value: v.clone(), outcome: l.clone() }))
                .collect(),
            fallback,
        },
    }
}

fn callback_for(a: &ActionSpec, outs: &[OutcomeSpec]) -> Callback {
    match a.kind {
        ActionKind::Dialogue => Callback::Utterance {
            template: a.utterance.clone().unwrap_or_default(),
            awaits_input: outs.iter().any(|o| !o.is_fallback()),
        },
        ActionKind::Web => Callback::Endpoint { template: a.endpoint.clone().unwrap_or_default(), mock: a.mock.clone() },
        ActionKind::System => Callback::Internal,
    }
}

fn declared_action(cx: &Ctx, a: &ActionSpec) -> Emitted {
    let pddl = cx.pddl[&a.name].clone();
    let opener = a.start;
    let outs = outcomes_with_fallback(a);
    let labels: Vec<String> = outs.iter().map(|o| label_of(&a.name, o)).collect();

    let mut pre = cx.base_pre(&pddl);
    for (var, s) in &a.needs {
        pre.extend(cx.setting(var, *s));
    }
    if cx.has_start && !opener {
        pre.push(Literal::pos(STARTED));
    }

    let branches: Vec<(String, Effect)> = outs
        .iter()
        .zip(&labels)
        .map(|(o, l)| {
            let mut lits = Vec::new();
            if let Some(c) = &o.check {
                lits.extend(cx.status(&c.variable, Knowledge::Known));
            }
            for (var, s) in &o.updates {
                lits.extend(cx.setting(var, *s));
            }
            if o.goal {
                lits.push(Literal::pos(GOAL));
            }
            if opener {
                lits.push(Literal::pos(STARTED));
            }
            let follow = o.follow.as_ref().map(|f| cx.pddl[f].clone());
            lits.extend(cx.gates(follow.as_deref()));
            (l.clone(), Effect::and(lits.into_iter().map(Effect::Lit)))
        })
        .collect();

    let mut assign: IndexMap<String, IndexMap<String, Value>> = IndexMap::new();
    for (o, l) in outs.iter().zip(&labels) {
        let mut m: IndexMap<String, Value> = o.assign.clone();
        if let Some(c) = &o.check {
            m.entry(c.variable.clone()).or_insert_with(|| Value::String(c.value.clone()));
        }
        if !m.is_empty() {
            assign.insert(l.clone(), m);
        }
    }
    let config = determiner_for(a, &outs, &labels);
    let binding = ActionBinding { name: a.name.clone(), kind: a.kind, callback: callback_for(a, &outs) };

    let resolve = format!("resolve-{}", a.name);
    let effect = Effect::labeled_oneof(resolve.clone(), branches);
    let k = a.max_applications.unwrap_or(0) as usize;
    if k == 0 {
        return Emitted {
            actions: vec![ActionDef { name: pddl.clone(), precondition: pre.into_iter().collect(), effect }],
            bindings: vec![(pddl, binding)],
            determiners: vec![(resolve, DeterminerBinding { config, assign })],
            guards: Vec::new(),
        };
    }

    // One-hot counter: variant i needs exactly i tries left and leaves i-1.
    let tries = |i: usize| format!("tries-left_{pddl}_{i}");
    let mut e = Emitted {
        actions: Vec::new(),
        bindings: Vec::new(),
        determiners: Vec::new(),
        guards: (1..=k).map(|i| (tries(i), i == k)).collect(),
    };
    for i in (1..=k).rev() {
        let (name, label) = if k == 1 {
            (pddl.clone(), resolve.clone())
        } else {
            (format!("{pddl}__{i}"), format!("{resolve}__{i}"))
        };
        let mut p = pre.clone();
        p.insert(usize::from(cx.forced), Literal::pos(tries(i)));
        let mut root = vec![Effect::Lit(Literal::neg(tries(i)))];
        if i > 1 {
            root.push(Effect::Lit(Literal::pos(tries(i - 1))));
        }
        let Effect::OneOf(mut o) = effect.clone() else { unreachable!() };
        o.label = Some(label.clone());
        root.push(Effect::OneOf(o));
        e.actions.push(ActionDef { name: name.clone(), precondition: p.into_iter().collect(), effect: Effect::And(root) });
        e.bindings.push((name, binding.clone()));
        e.determiners.push((label, DeterminerBinding { config: config.clone(), assign: assign.clone() }));
    }
    e
}

fn prompted_action(
    cx: &Ctx,
    name: &str,
    prompt: &str,
    pre_status: Knowledge,
    var: &str,
    ok: (&str, Vec<String>),
    ko: &str,
) -> Emitted {
    let pddl = cx.pddl[name].clone();
    let mut pre = cx.base_pre(&pddl);
    pre.extend(match pre_status {
        Knowledge::Uncertain => vec![Literal::pos(maybe_have(var))],
        k => cx.status(var, k),
    });
    if cx.has_start {
        pre.push(Literal::pos(STARTED));
    }
    let ok_label = format!("{name}_{}__", ok.0);
    let ko_label = format!("{name}_{ko}__");
    let branch = |k: Knowledge| {
        let mut lits = cx.status(var, k);
        lits.extend(cx.gates(None));
        Effect::and(lits.into_iter().map(Effect::Lit))
    };
    let resolve = format!("resolve-{name}");
    let effect = Effect::labeled_oneof(
        resolve.clone(),
        [(ok_label.clone(), branch(Knowledge::Known)), (ko_label.clone(), branch(Knowledge::Unknown))],
    );
    let config = DeterminerConfig::KeywordIntent {
        intents: vec![Intent { outcome: ok_label, phrases: ok.1 }],
        fallback: ko_label,
    };
    Emitted {
        actions: vec![ActionDef { name: pddl.clone(), precondition: pre.into_iter().collect(), effect }],
        bindings: vec![(
            pddl,
            ActionBinding {
                name: name.to_string(),
                kind: ActionKind::Dialogue,
                callback: Callback::Utterance { template: prompt.to_string(), awaits_input: true },
            },
        )],
        determiners: vec![(resolve, DeterminerBinding { config, assign: IndexMap::new() })],
        guards: Vec::new(),
    }
}

const AFFIRM: [&str; 6] = ["yes", "yeah", "yep", "correct", "right", "sure"];

fn cee_action(cx: &Ctx, g: &crate::spec::CeeGroup) -> Emitted {
    let name = format!("cee-{}", g.name);
    let pddl = cx.pddl[&name].clone();
    let mut pre = cx.base_pre(&pddl);
    for v in &g.variables {
        pre.extend(cx.status(v, Knowledge::Unknown));
    }
    if cx.has_start {
        pre.push(Literal::pos(STARTED));
    }
    let mut root = Vec::new();
    let mut determiners = Vec::new();
    for v in &g.variables {
        let resolve = format!("resolve-{name}-{v}");
        let found = format!("{name}-{v}_found__");
        let missing = format!("{name}-{v}_missing__");
        let lits = |k| Effect::and(cx.status(v, k).into_iter().map(Effect::Lit));
        root.push(Effect::labeled_oneof(
            resolve.clone(),
            [(found.clone(), lits(Knowledge::Known)), (missing.clone(), lits(Knowledge::Unknown))],
        ));
        let phrases = g
            .examples
            .iter()
            .filter(|e| crate::spec::phrase_vars(e).contains(&v.as_str()))
            .cloned()
            .collect();
        determiners.push((
            resolve,
            DeterminerBinding {
                config: DeterminerConfig::KeywordIntent { intents: vec![Intent { outcome: found, phrases }], fallback: missing },
                assign: IndexMap::new(),
            },
        ));
    }
    root.extend(cx.gates(None).into_iter().map(Effect::Lit));
    Emitted {
        actions: vec![ActionDef { name: pddl.clone(), precondition: pre.into_iter().collect(), effect: Effect::And(root) }],
        bindings: vec![(
            pddl,
            ActionBinding {
                name,
                kind: ActionKind::Dialogue,
                callback: Callback::Utterance { template: g.prompt.clone(), awaits_input: true },
            },
        )],
        determiners,
        guards: Vec::new(),
    }
}

fn declare(p: String, preds: &mut IndexSet<String>) -> Result<(), CompileError> {
    if !preds.insert(p.clone()) {
        return Err(CompileError::Collision(p));
    }
    Ok(())
}

pub fn compile(spec: &AgentSpec) -> Result<Compiled, CompileError> {
    let diags = spec.validate();
    if has_errors(&diags) {
        return Err(CompileError::Invalid(diags.into_iter().filter(|d| d.severity == crate::spec::Severity::Error).collect()));
    }
    let mut cx = Ctx {
        spec,
        three: spec.uses_uncertainty(),
        forced: spec.actions.iter().any(|a| a.outcomes.iter().any(|o| o.follow.is_some())),
        has_start: spec.actions.iter().any(|a| a.start),
        pddl: IndexMap::new(),
    };
    for n in spec.action_names() {
        let full = cx.full(&n);
        cx.pddl.insert(n, full);
    }

    let mut predicates: IndexSet<String> = IndexSet::new();
    let mut variables: IndexMap<String, String> = IndexMap::new();
    let mut init: IndexSet<String> = IndexSet::new();
    let mut initial_context: IndexMap<String, Value> = IndexMap::new();

    for v in &spec.variables {
        if v.kind == ValueKind::Flag {
            declare(v.name.clone(), &mut predicates)?;
            variables.insert(v.name.clone(), v.name.clone());
            if v.initial == Knowledge::Known && v.value == Some(Value::Bool(true)) {
                init.insert(v.name.clone());
                initial_context.insert(v.name.clone(), Value::Bool(true));
            }
            continue;
        }
        let (h, m) = (have(&v.name), maybe_have(&v.name));
        declare(h.clone(), &mut predicates)?;
        variables.insert(h.clone(), v.name.clone());
        if cx.three {
            declare(m.clone(), &mut predicates)?;
            variables.insert(m.clone(), v.name.clone());
        }
        let value = v.value.clone().unwrap_or(Value::Null);
        match v.initial {
            Knowledge::Known => {
                init.insert(h.clone());
                initial_context.insert(h, value);
            }
            Knowledge::Uncertain => {
                init.insert(m.clone());
                initial_context.insert(m, value);
            }
            Knowledge::Unknown => {}
        }
    }
    declare(GOAL.into(), &mut predicates)?;
    if cx.has_start {
        declare(STARTED.into(), &mut predicates)?;
    }
    if cx.forced {
        for a in cx.pddl.values() {
            let f = cx.can_do(a);
            declare(f.clone(), &mut predicates)?;
            init.insert(f);
        }
    }

    let mut emitted = Vec::new();
    for a in &spec.actions {
        emitted.push(declared_action(&cx, a));
    }
    for s in &spec.slot_fills {
        let name = format!("slotfill-{}", s.variable);
        let phrase = format!("${}", s.variable);
        emitted.push(prompted_action(&cx, &name, &s.prompt, Knowledge::Unknown, &s.variable, ("filled", vec![phrase]), "failed"));
    }
    for s in &spec.confirms {
        let name = format!("confirm-{}", s.variable);
        let phrases = AFFIRM.iter().map(|s| s.to_string()).collect();
        emitted.push(prompted_action(&cx, &name, &s.prompt, Knowledge::Uncertain, &s.variable, ("confirmed", phrases), "denied"));
    }
    for g in &spec.cee_groups {
        emitted.push(cee_action(&cx, g));
    }

    let mut actions = Vec::new();
    let mut bindings = IndexMap::new();
    let mut determiners = IndexMap::new();
    for e in emitted {
        for (g, initially) in e.guards {
            declare(g.clone(), &mut predicates)?;
            if initially {
                init.insert(g);
            }
        }
        for a in e.actions {
            if actions.iter().any(|x: &ActionDef| x.name == a.name) {
                return Err(CompileError::Collision(a.name));
            }
            actions.push(a);
        }
        for (k, b) in e.bindings {
            bindings.insert(k, b);
        }
        for (k, d) in e.determiners {
            if determiners.insert(k.clone(), d).is_some() {
                return Err(CompileError::Collision(k));
            }
        }
    }

    let domain = DomainDef {
        name: spec.name.clone(),
        requirements: vec![":strips".into(), ":typing".into()],
        predicates,
        actions,
    };
    let problem = ProblemDef {
        name: format!("{}_problem", spec.name),
        domain: spec.name.clone(),
        init,
        goal: [GOAL.to_string()].into_iter().collect(),
    };
    let manifest = ExecutionManifest {
        agent: spec.prefix().to_string(),
        domain: spec.name.clone(),
        actions: bindings,
        determiners,
        variables,
        initial_context,
    };
    Ok(Compiled { domain, problem, manifest })
}
