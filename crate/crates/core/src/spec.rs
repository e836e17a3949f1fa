//! Declarative agent specifications: variables, actions with needs and
//! outcomes, and the slot-fill / confirm / contextual-extraction shortcuts.
//!
//! The on-disk form is TOML; see `docs/agent-spec.md` for the grammar.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::determiners::expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Knowledge {
    Unknown,
    Known,
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Flag,
    Entity,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Dialogue,
    Web,
    System,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Dialogue => "dialogue",
            ActionKind::Web => "web",
            ActionKind::System => "system",
        })
    }
}

/// Condition on, or assignment to, a variable: a knowledge status for
/// entity/json variables, a truth value for flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Setting {
    Flag(bool),
    Status(Knowledge),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    pub kind: ValueKind,
    #[serde(default = "unknown")]
    pub initial: Knowledge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

fn unknown() -> Knowledge {
    Knowledge::Unknown
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub variable: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OutcomeSpec {
    /// Unnamed outcomes are fallbacks and get the `<action>-outcome-fallback__` label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub updates: IndexMap<String, Setting>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub goal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follow: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<Check>,
    /// Dialogue: phrases recognised for this outcome.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phrases: Vec<String>,
    /// System: condition; absent means "always".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
    /// Web: response field values mapped to this outcome.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub response: Vec<Value>,
    /// Static context values supplied when this outcome is selected.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub assign: IndexMap<String, Value>,
}

impl OutcomeSpec {
    pub fn is_fallback(&self) -> bool {
        self.fallback || self.name.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ActionSpec {
    pub name: String,
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_field: Option<String>,
    /// Canned endpoint response used when no transport is configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock: Option<Value>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub needs: IndexMap<String, Setting>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<OutcomeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_applications: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub start: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_match_is_error: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prompted {
    pub variable: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeeGroup {
    pub name: String,
    pub prompt: String,
    pub variables: Vec<String>,
    #[serde(default)]
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AgentSpec {
    pub name: String,
    /// Prefix for generated action names; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    /// Emit `maybe-have_*` fluents even without an uncertain use.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub three_valued: bool,
    #[serde(default)]
    pub variables: Vec<VariableDecl>,
    #[serde(default)]
    pub actions: Vec<ActionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slot_fills: Vec<Prompted>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub confirms: Vec<Prompted>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cee_groups: Vec<CeeGroup>,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("spec syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("spec serialization: {0}")]
    Serialize(#[from] toml::ser::Error),
}

pub fn load_spec(text: &str) -> Result<AgentSpec, SpecError> {
    Ok(toml::from_str(text)?)
}

pub fn save_spec(spec: &AgentSpec) -> Result<String, SpecError> {
    Ok(toml::to_string(spec)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Dotted path into the spec, e.g. `actions.ask.outcomes.yes.follow`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

impl AgentSpec {
    pub fn prefix(&self) -> &str {
        self.agent.as_deref().unwrap_or(&self.name)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Names of all actions, declared and generated, in compilation order.
    pub fn action_names(&self) -> Vec<String> {
        let mut out: Vec<String> = self.actions.iter().map(|a| a.name.clone()).collect();
        out.extend(self.slot_fills.iter().map(|s| format!("slotfill-{}", s.variable)));
        out.extend(self.confirms.iter().map(|s| format!("confirm-{}", s.variable)));
        out.extend(self.cee_groups.iter().map(|g| format!("cee-{}", g.name)));
        out
    }

    /// Whether any part of the spec needs the "maybe known" status.
    pub fn uses_uncertainty(&self) -> bool {
        let uncertain = |m: &IndexMap<String, Setting>| {
            m.values().any(|s| *s == Setting::Status(Knowledge::Uncertain))
        };
        self.three_valued
            || !self.confirms.is_empty()
            || self.variables.iter().any(|v| v.initial == Knowledge::Uncertain)
            || self.actions.iter().any(|a| {
                uncertain(&a.needs) || a.outcomes.iter().any(|o| uncertain(&o.updates))
            })
    }

    /// Validation diagnostics, errors first in discovery order then warnings.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut v = Validator { spec: self, out: Vec::new() };
        v.run();
        let mut out = v.out;
        out.sort_by_key(|d| std::cmp::Reverse(d.severity));
        out
    }
}

struct Validator<'a> {
    spec: &'a AgentSpec,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn err(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.out.push(Diagnostic {
            severity: Severity::Error,
            location: location.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.out.push(Diagnostic {
            severity: Severity::Warning,
            location: location.into(),
            message: message.into(),
        });
    }

    fn run(&mut self) {
        let spec = self.spec;
        let mut seen = HashSet::new();
        for v in &spec.variables {
            let loc = format!("variables.{}", v.name);
            if !is_ident(&v.name) {
                self.err(&loc, "invalid variable name");
            }
            if !seen.insert(v.name.as_str()) {
                self.err(&loc, "duplicate variable");
            }
            match (v.initial, &v.value) {
                (Knowledge::Unknown, Some(_)) => self.err(&loc, "unknown variable must not have a value"),
                (Knowledge::Known | Knowledge::Uncertain, None) => {
                    self.err(&loc, "known or uncertain variable needs a value")
                }
                _ => {}
            }
            if v.kind == ValueKind::Flag {
                if v.initial == Knowledge::Uncertain {
                    self.err(&loc, "flags cannot be uncertain");
                }
                if let Some(val) = &v.value {
                    if !val.is_boolean() {
                        self.err(&loc, "flag value must be a boolean");
                    }
                }
            }
        }

        let names = spec.action_names();
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                self.err(format!("actions.{n}"), "duplicate action");
            }
        }
        let known_actions: HashSet<&str> = names.iter().map(String::as_str).collect();

        let starts: Vec<&str> =
            spec.actions.iter().filter(|a| a.start).map(|a| a.name.as_str()).collect();
        if starts.len() > 1 {
            self.err("actions", format!("more than one start action: {}", starts.join(", ")));
        }

        let mut any_goal = false;
        for a in &spec.actions {
            let loc = format!("actions.{}", a.name);
            if !is_ident(&a.name) {
                self.err(&loc, "invalid action name");
            }
            for (var, s) in &a.needs {
                self.setting(&format!("{loc}.needs.{var}"), var, *s);
            }
            if a.max_applications == Some(0) {
                self.err(format!("{loc}.max-applications"), "must be at least 1");
            }
            match a.kind {
                ActionKind::Dialogue => {
                    if a.utterance.is_none() {
                        self.warn(&loc, "dialogue action without an utterance");
                    }
                }
                ActionKind::Web => {
                    if a.endpoint.is_none() && a.mock.is_none() {
                        self.err(&loc, "web action needs an endpoint or a mock response");
                    }
                    if a.outcomes.len() > 1 && a.response_field.is_none() {
                        self.err(&loc, "web action with several outcomes needs a response-field");
                    }
                }
                ActionKind::System => {}
            }
            if a.kind != ActionKind::Dialogue && a.outcomes.is_empty() {
                self.err(&loc, "action has no outcomes");
            }

            let mut labels = HashSet::new();
            let mut fallbacks = 0;
            for (i, o) in a.outcomes.iter().enumerate() {
                let oname = o.name.clone().unwrap_or_else(|| format!("#{i}"));
                let oloc = format!("{loc}.outcomes.{oname}");
                if let Some(n) = &o.name {
                    if !is_ident(n) {
                        self.err(&oloc, "invalid outcome name");
                    }
                }
                if !labels.insert(o.name.clone()) {
                    self.err(&oloc, "duplicate outcome name");
                }
                if o.is_fallback() {
                    fallbacks += 1;
                }
                any_goal |= o.goal;
                for (var, s) in &o.updates {
                    self.setting(&format!("{oloc}.updates.{var}"), var, *s);
                }
                if let Some(c) = &o.check {
                    match spec.variable(&c.variable) {
                        None => self.err(format!("{oloc}.check"), format!("unknown variable {}", c.variable)),
                        Some(v) if v.kind == ValueKind::Flag => {
                            self.err(format!("{oloc}.check"), "cannot check a flag")
                        }
                        _ => {}
                    }
                }
                for var in o.assign.keys() {
                    if spec.variable(var).is_none() {
                        self.err(format!("{oloc}.assign.{var}"), format!("unknown variable {var}"));
                    }
                }
                if let Some(f) = &o.follow {
                    if !known_actions.contains(f.as_str()) {
                        self.err(format!("{oloc}.follow"), format!("outcome {oname} follows undeclared action {f}"));
                    }
                }
                for p in &o.phrases {
                    for var in phrase_vars(p) {
                        if spec.variable(var).is_none() {
                            self.err(format!("{oloc}.phrases"), format!("unknown capture ${var}"));
                        }
                    }
                }
                if let Some(w) = &o.when {
                    if let Err(e) = expr::parse(w) {
                        self.err(format!("{oloc}.when"), e.to_string());
                    }
                    if a.kind != ActionKind::System {
                        self.warn(format!("{oloc}.when"), "conditions only apply to system actions");
                    }
                }
                if !o.response.is_empty() && a.kind != ActionKind::Web {
                    self.warn(format!("{oloc}.response"), "response values only apply to web actions");
                }
            }
            if fallbacks > 1 {
                self.err(&loc, "more than one fallback outcome");
            }
            if a.kind == ActionKind::System && !a.no_match_is_error {
                let last_catch_all = a.outcomes.last().is_some_and(|o| {
                    o.when.as_deref().is_none_or(|w| expr::parse(w).is_ok_and(|e| e.is_catch_all()))
                });
                if !last_catch_all {
                    self.err(&loc, "last condition must be a catch-all unless no-match-is-error is set");
                }
            }
            // an implicit dialogue fallback re-enables everything, so it counts as an exit
            let implicit_fallback =
                a.kind == ActionKind::Dialogue && !a.outcomes.iter().any(OutcomeSpec::is_fallback);
            let self_forced = !implicit_fallback
                && !a.outcomes.is_empty()
                && a.outcomes.iter().all(|o| o.follow.as_deref() == Some(a.name.as_str()));
            if self_forced && a.max_applications.is_none() {
                self.err(&loc, "every outcome forces the action itself and there is no guard");
            }
        }
        if !any_goal {
            self.err("actions", "no goal outcome");
        }

        let uncertain_possible: BTreeSet<&str> = spec
            .variables
            .iter()
            .filter(|v| v.initial == Knowledge::Uncertain)
            .map(|v| v.name.as_str())
            .chain(spec.actions.iter().flat_map(|a| {
                a.outcomes.iter().flat_map(|o| {
                    o.updates
                        .iter()
                        .filter(|(_, s)| **s == Setting::Status(Knowledge::Uncertain))
                        .map(|(k, _)| k.as_str())
                })
            }))
            .collect();
        for (kind, list) in [("slot-fills", &spec.slot_fills), ("confirms", &spec.confirms)] {
            for p in list {
                let loc = format!("{kind}.{}", p.variable);
                self.entity(&loc, &p.variable);
                if kind == "confirms" && !uncertain_possible.contains(p.variable.as_str()) {
                    self.warn(&loc, "variable can never be uncertain; confirm is unreachable");
                }
            }
        }
        for g in &spec.cee_groups {
            let loc = format!("cee-groups.{}", g.name);
            if g.variables.is_empty() {
                self.err(&loc, "group has no variables");
            }
            for v in &g.variables {
                self.entity(&loc, v);
            }
            for e in &g.examples {
                for var in phrase_vars(e) {
                    if !g.variables.iter().any(|v| v == var) {
                        self.warn(&loc, format!("example captures ${var} outside the group"));
                    }
                }
            }
        }
    }

    fn setting(&mut self, loc: &str, var: &str, s: Setting) {
        match (self.spec.variable(var), s) {
            (None, _) => self.err(loc, format!("unknown variable {var}")),
            (Some(v), Setting::Flag(_)) if v.kind != ValueKind::Flag => {
                self.err(loc, format!("{var} is not a flag; use unknown/known/uncertain"))
            }
            (Some(v), Setting::Status(_)) if v.kind == ValueKind::Flag => {
                self.err(loc, format!("{var} is a flag; use true/false"))
            }
            _ => {}
        }
    }

    fn entity(&mut self, loc: &str, var: &str) {
        match self.spec.variable(var) {
            None => self.err(loc, format!("unknown variable {var}")),
            Some(v) if v.kind == ValueKind::Flag => self.err(loc, format!("{var} is a flag")),
            _ => {}
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// `$name` captures mentioned in a phrase, with any `=alt|alt` suffix removed.
pub fn phrase_vars(p: &str) -> Vec<&str> {
    p.split_whitespace()
        .filter_map(|w| w.strip_prefix('$'))
        .map(|w| w.split('=').next().unwrap_or(w))
        .map(|w| w.trim_end_matches(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-')))
        .collect()
}

/// Index from variable name to declaration, for callers doing many lookups.
pub fn variable_index(spec: &AgentSpec) -> HashMap<&str, &VariableDecl> {
    spec.variables.iter().map(|v| (v.name.as_str(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
name = "toy"

[[variables]]
name = "city"
kind = "entity"

[[variables]]
name = "done"
kind = "flag"
initial = "known"
value = false

[[actions]]
name = "ask-city"
kind = "dialogue"
utterance = "Which city?"
needs = { city = "unknown" }

[[actions.outcomes]]
name = "got"
updates = { city = "known" }
phrases = ["$city"]

[[actions]]
name = "finish"
kind = "system"
needs = { city = "known", done = false }

[[actions.outcomes]]
name = "ok"
updates = { done = true }
goal = true
"#;

    #[test]
    fn loads_and_validates_toy() {
        let s = load_spec(TOY).unwrap();
        assert_eq!(s.variables.len(), 2);
        assert_eq!(s.actions[0].needs["city"], Setting::Status(Knowledge::Unknown));
        assert_eq!(s.actions[1].needs["done"], Setting::Flag(false));
        assert!(s.validate().is_empty(), "{:?}", s.validate());
    }

    #[test]
    fn save_round_trips() {
        let s = load_spec(TOY).unwrap();
        let again = load_spec(&save_spec(&s).unwrap()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn missing_goal_is_reported() {
        let mut s = load_spec(TOY).unwrap();
        s.actions[1].outcomes[0].goal = false;
        let d = s.validate();
        assert!(d.iter().any(|d| d.message == "no goal outcome"));
    }

    #[test]
    fn dangling_follow_names_the_outcome() {
        let mut s = load_spec(TOY).unwrap();
        s.actions[0].outcomes[0].follow = Some("nowhere".into());
        let d = s.validate();
        assert!(d.iter().any(|d| d.severity == Severity::Error && d.message.contains("outcome got")));
    }

    #[test]
    fn unguarded_self_loop_is_an_error() {
        let mut s = load_spec(TOY).unwrap();
        s.actions[1].outcomes[0].follow = Some("finish".into());
        assert!(has_errors(&s.validate()));
        s.actions[1].max_applications = Some(2);
        assert!(!has_errors(&s.validate()));
    }

    #[test]
    fn validation_is_pure() {
        let mut s = load_spec(TOY).unwrap();
        s.actions[0].needs.insert("ghost".into(), Setting::Flag(true));
        assert_eq!(s.validate(), s.validate());
    }

    #[test]
    fn phrase_capture_names() {
        assert_eq!(phrase_vars("from $src to $dst."), vec!["src", "dst"]);
        assert_eq!(phrase_vars("it $status=pass|fail"), vec!["status"]);
    }
}
