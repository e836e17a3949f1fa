//! Execution manifest: everything the executor needs beyond the plan itself.

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::determiners::DeterminerBinding;
use crate::pddl::DomainDef;
use crate::spec::ActionKind;

/// What executing an action does, before its outcome is determined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Callback {
    /// Send an utterance; when `awaits-input` the user's reply is the payload.
    #[serde(rename_all = "kebab-case")]
    Utterance { template: String, awaits_input: bool },
    /// Call an endpoint with the filtered context; the response is the payload.
    #[serde(rename_all = "kebab-case")]
    Endpoint {
        template: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mock: Option<Value>,
    },
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBinding {
    /// Action name as written in the agent spec.
    pub name: String,
    pub kind: ActionKind,
    pub callback: Callback,
}

impl ActionBinding {
    pub fn awaits_input(&self) -> bool {
        matches!(self.callback, Callback::Utterance { awaits_input: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionManifest {
    pub agent: String,
    pub domain: String,
    /// PDDL action name → callback.
    pub actions: IndexMap<String, ActionBinding>,
    /// `oneof` label → determiner.
    pub determiners: IndexMap<String, DeterminerBinding>,
    /// Fluent → variable it carries a value for.
    pub variables: IndexMap<String, String>,
    /// Fluent → value at the start of a conversation.
    pub initial_context: IndexMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("oneof {0} has no determiner binding")]
    Unbound(String),
    #[error("determiner {0} is bound to no oneof in the domain")]
    Dangling(String),
    #[error("oneof {label} appears more than once (actions {first} and {second})")]
    DuplicateLabel { label: String, first: String, second: String },
    #[error("action {0} has no callback binding")]
    MissingAction(String),
    #[error("determiner {label} can select {outcome}, which is not an outcome of that oneof")]
    UnknownOutcome { label: String, outcome: String },
    #[error("fluent {0} is bound but not declared")]
    UnknownFluent(String),
    #[error("fluent {fluent} binds {variable:?}; compound bindings are not supported")]
    Compound { fluent: String, variable: String },
    #[error("knowledge fluent {0} has no variable binding")]
    UnboundKnowledge(String),
    #[error("initial context for {0}, which is not a bound fluent")]
    StrayContext(String),
    #[error("invalid condition: {0}")]
    Condition(String),
}

impl ExecutionManifest {
    /// Cross-checks the manifest against the domain it was compiled with.
    pub fn check(&self, domain: &DomainDef) -> Result<(), ManifestError> {
        let mut owner: IndexMap<String, String> = IndexMap::new();
        for a in &domain.actions {
            if !self.actions.contains_key(&a.name) {
                return Err(ManifestError::MissingAction(a.name.clone()));
            }
            for (path, o) in a.effect.oneofs() {
                let key = o.key(&a.name, &path);
                if let Some(first) = owner.insert(key.clone(), a.name.clone()) {
                    return Err(ManifestError::DuplicateLabel { label: key, first, second: a.name.clone() });
                }
                let b = self.determiners.get(&key).ok_or_else(|| ManifestError::Unbound(key.clone()))?;
                for out in b.config.outcomes() {
                    if o.outcome_index(out).is_none() {
                        return Err(ManifestError::UnknownOutcome { label: key.clone(), outcome: out.to_string() });
                    }
                }
                b.build().map_err(|e| ManifestError::Condition(e.to_string()))?;
            }
        }
        if let Some(k) = self.determiners.keys().find(|k| !owner.contains_key(*k)) {
            return Err(ManifestError::Dangling(k.clone()));
        }
        for (f, v) in &self.variables {
            if !domain.predicates.contains(f) {
                return Err(ManifestError::UnknownFluent(f.clone()));
            }
            let simple = !v.is_empty() && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !simple {
                return Err(ManifestError::Compound { fluent: f.clone(), variable: v.clone() });
            }
        }
        for p in &domain.predicates {
            let knowledge = p.starts_with("have_") || p.starts_with("maybe-have_");
            if knowledge && !self.variables.contains_key(p) {
                return Err(ManifestError::UnboundKnowledge(p.clone()));
            }
        }
        if let Some(f) = self.initial_context.keys().find(|f| !self.variables.contains_key(*f)) {
            return Err(ManifestError::StrayContext(f.clone()));
        }
        Ok(())
    }

    /// Variables reachable through bound fluents, deduplicated, in binding order.
    pub fn variable_names(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.variables.values().map(String::as_str).filter(|v| seen.insert(*v)).collect()
    }
}
