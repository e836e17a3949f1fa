//! Propositional PDDL with nested non-deterministic effects.
//!
//! The dialect is STRIPS with `and`/`oneof` effect trees and the optional
//! `labeled-oneof` / `outcome` annotations used to give every non-deterministic
//! choice a stable name. Everything is zero-arity: typed objects, parameters
//! and derived predicates are rejected by the parser.

mod parse;
mod print;
mod sexpr;

use std::borrow::Cow;
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

pub use parse::{parse_domain, parse_problem, ParseError, ParseErrorKind};
pub use print::{print_domain, print_effect, print_problem};
pub use sexpr::Pos;

/// A signed fluent: `f` or `(not f)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Literal {
    pub fluent: String,
    pub positive: bool,
}

impl Literal {
    pub fn pos(fluent: impl Into<String>) -> Self {
        Literal { fluent: fluent.into(), positive: true }
    }

    pub fn neg(fluent: impl Into<String>) -> Self {
        Literal { fluent: fluent.into(), positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal { fluent: self.fluent.clone(), positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            f.write_str(&self.fluent)
        } else {
            write!(f, "!{}", self.fluent)
        }
    }
}

impl From<Literal> for String {
    fn from(l: Literal) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for Literal {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let (positive, name) = match s.strip_prefix('!') {
            Some(rest) => (false, rest),
            None => (true, s.as_str()),
        };
        if name.is_empty() || name.contains(char::is_whitespace) || name.contains(['(', ')']) {
            return Err(format!("invalid literal {s:?}"));
        }
        Ok(Literal { fluent: name.to_string(), positive })
    }
}

/// Position of a node inside an effect tree, as child indices from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

impl From<NodePath> for String {
    fn from(p: NodePath) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for NodePath {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s == "/" {
            return Ok(NodePath::root());
        }
        let rest = s.strip_prefix('/').ok_or_else(|| format!("invalid node path {s:?}"))?;
        rest.split('/')
            .map(|p| p.parse::<usize>().map_err(|_| format!("invalid node path {s:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(NodePath)
    }
}

/// An effect formula: a tree of `and` / `oneof` nodes with literal leaves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Lit(Literal),
    And(Vec<Effect>),
    OneOf(OneOf),
}

/// A mutually exclusive choice between outcomes. Either the node and all of
/// its outcomes carry labels, or none of them do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneOf {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub effect: Effect,
}

impl Effect {
    pub fn lit(l: Literal) -> Self {
        Effect::Lit(l)
    }

    /// Conjunction with duplicate conjuncts removed (first occurrence kept).
    pub fn and(children: impl IntoIterator<Item = Effect>) -> Self {
        let mut out: Vec<Effect> = Vec::new();
        for c in children {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        Effect::And(out)
    }

    pub fn oneof(children: impl IntoIterator<Item = Effect>) -> Self {
        Effect::OneOf(OneOf {
            label: None,
            outcomes: children.into_iter().map(|effect| Outcome { label: None, effect }).collect(),
        })
    }

    pub fn labeled_oneof(
        label: impl Into<String>,
        children: impl IntoIterator<Item = (String, Effect)>,
    ) -> Self {
        Effect::OneOf(OneOf {
            label: Some(label.into()),
            outcomes: children
                .into_iter()
                .map(|(l, effect)| Outcome { label: Some(l), effect })
                .collect(),
        })
    }

    /// Every literal mentioned anywhere in the tree.
    pub fn literals(&self) -> Vec<&Literal> {
        let mut out = Vec::new();
        self.visit(&mut |e, _| {
            if let Effect::Lit(l) = e {
                out.push(l);
            }
        });
        out
    }

    /// Pre-order walk over every node together with its path.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Effect, &NodePath)) {
        fn go<'a>(e: &'a Effect, path: NodePath, f: &mut impl FnMut(&'a Effect, &NodePath)) {
            f(e, &path);
            match e {
                Effect::Lit(_) => {}
                Effect::And(cs) => {
                    for (i, c) in cs.iter().enumerate() {
                        go(c, path.child(i), f);
                    }
                }
                Effect::OneOf(o) => {
                    for (i, c) in o.outcomes.iter().enumerate() {
                        go(&c.effect, path.child(i), f);
                    }
                }
            }
        }
        go(self, NodePath::root(), f)
    }

    /// Every `oneof` node with its path, in pre-order.
    pub fn oneofs(&self) -> Vec<(NodePath, &OneOf)> {
        let mut out = Vec::new();
        self.visit(&mut |e, p| {
            if let Effect::OneOf(o) = e {
                out.push((p.clone(), o));
            }
        });
        out
    }

    /// Node at `path`, if it exists.
    pub fn at(&self, path: &NodePath) -> Option<&Effect> {
        let mut cur = self;
        for &i in &path.0 {
            cur = match cur {
                Effect::Lit(_) => return None,
                Effect::And(cs) => cs.get(i)?,
                Effect::OneOf(o) => &o.outcomes.get(i)?.effect,
            };
        }
        Some(cur)
    }

    /// Copy of the tree with every label removed.
    pub fn strip_labels(&self) -> Effect {
        match self {
            Effect::Lit(l) => Effect::Lit(l.clone()),
            Effect::And(cs) => Effect::And(cs.iter().map(Effect::strip_labels).collect()),
            Effect::OneOf(o) => Effect::OneOf(OneOf {
                label: None,
                outcomes: o
                    .outcomes
                    .iter()
                    .map(|c| Outcome { label: None, effect: c.effect.strip_labels() })
                    .collect(),
            }),
        }
    }
}

impl OneOf {
    /// Outcome label, synthesized as `o<index>` when the node is unlabeled.
    pub fn outcome_label(&self, index: usize) -> Cow<'_, str> {
        match self.outcomes.get(index).and_then(|o| o.label.as_deref()) {
            Some(l) => Cow::Borrowed(l),
            None => Cow::Owned(format!("o{index}")),
        }
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        (0..self.outcomes.len()).find(|&i| self.outcome_label(i) == label)
    }

    /// Key under which the determiner for this node is registered: the node
    /// label when present, otherwise `<action><path>`.
    pub fn key(&self, action: &str, path: &NodePath) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => format!("{action}{path}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDef {
    pub name: String,
    pub precondition: IndexSet<Literal>,
    pub effect: Effect,
}

impl ActionDef {
    pub fn applicable(&self, state: &std::collections::BTreeSet<String>) -> bool {
        self.precondition.iter().all(|l| state.contains(&l.fluent) == l.positive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainDef {
    pub name: String,
    pub requirements: Vec<String>,
    pub predicates: IndexSet<String>,
    pub actions: Vec<ActionDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDef {
    pub name: String,
    pub domain: String,
    pub init: IndexSet<String>,
    pub goal: IndexSet<String>,
}

/// Semantic errors in an otherwise well-formed model.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("action {action}: undeclared predicate {fluent}")]
    UndeclaredPredicate { action: String, fluent: String },
    #[error("duplicate action {0}")]
    DuplicateAction(String),
    #[error("action {action}: oneof {node} has duplicate outcome label {label}")]
    DuplicateOutcomeLabel { action: String, node: String, label: String },
    #[error("action {action}: oneof {node} mixes labeled and unlabeled outcomes")]
    MixedLabels { action: String, node: String },
    #[error("action {action}: oneof {node} has no outcomes")]
    EmptyOneOf { action: String, node: String },
    #[error("problem references domain {found}, expected {expected}")]
    DomainMismatch { expected: String, found: String },
    #[error("problem {section}: undeclared predicate {fluent}")]
    ProblemUndeclared { section: &'static str, fluent: String },
}

impl DomainDef {
    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::HashSet::new();
        for a in &self.actions {
            if !seen.insert(a.name.as_str()) {
                return Err(ModelError::DuplicateAction(a.name.clone()));
            }
            for l in a.precondition.iter().chain(a.effect.literals()) {
                if !self.predicates.contains(&l.fluent) {
                    return Err(ModelError::UndeclaredPredicate {
                        action: a.name.clone(),
                        fluent: l.fluent.clone(),
                    });
                }
            }
            for (path, o) in a.effect.oneofs() {
                let node = o.key(&a.name, &path);
                if o.outcomes.is_empty() {
                    return Err(ModelError::EmptyOneOf { action: a.name.clone(), node });
                }
                let labeled = o.outcomes.iter().filter(|c| c.label.is_some()).count();
                if labeled != 0 && (labeled != o.outcomes.len() || o.label.is_none()) {
                    return Err(ModelError::MixedLabels { action: a.name.clone(), node });
                }
                let mut labels = std::collections::HashSet::new();
                for i in 0..o.outcomes.len() {
                    let l = o.outcome_label(i);
                    if !labels.insert(l.clone()) {
                        return Err(ModelError::DuplicateOutcomeLabel {
                            action: a.name.clone(),
                            node,
                            label: l.into_owned(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl ProblemDef {
    /// Checks that the problem belongs to `domain` and only mentions its predicates.
    pub fn validate(&self, domain: &DomainDef) -> Result<(), ModelError> {
        if self.domain != domain.name {
            return Err(ModelError::DomainMismatch {
                expected: domain.name.clone(),
                found: self.domain.clone(),
            });
        }
        for (section, set) in [("init", &self.init), ("goal", &self.goal)] {
            if let Some(f) = set.iter().find(|f| !domain.predicates.contains(*f)) {
                return Err(ModelError::ProblemUndeclared { section, fluent: f.clone() });
            }
        }
        Ok(())
    }
}
