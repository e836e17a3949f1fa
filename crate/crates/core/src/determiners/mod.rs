//! Outcome determiners: given what happened (a user utterance, an endpoint
//! response, or nothing) pick one child of a `oneof`.

pub mod expr;
pub mod keyword;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Variable name → value, built from the action's filtered context.
pub type Env = BTreeMap<String, Value>;

pub struct DeterminerInput<'a> {
    pub payload: &'a Value,
    pub env: &'a Env,
}

/// The chosen outcome label plus any values extracted for variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub outcome: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, Value>,
}

impl Selection {
    pub fn of(outcome: impl Into<String>) -> Self {
        Selection { outcome: outcome.into(), values: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeterminerError {
    #[error("no condition matched")]
    NoMatch,
    #[error("response value {0} is not mapped to an outcome")]
    Unmapped(Value),
    #[error("response has no field {0}")]
    MissingField(String),
    #[error("script exhausted")]
    ScriptExhausted,
    #[error("{0}")]
    Failed(String),
}

pub trait Determiner: Send + Sync {
    fn determine(&self, input: &DeterminerInput<'_>) -> Result<Selection, DeterminerError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub outcome: String,
    pub phrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCase {
    pub value: Value,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeterminerConfig {
    #[serde(rename_all = "kebab-case")]
    KeywordIntent { intents: Vec<Intent>, fallback: String },
    #[serde(rename_all = "kebab-case")]
    OrderedCondition {
        rules: Vec<Rule>,
        #[serde(default)]
        no_match_is_error: bool,
    },
    #[serde(rename_all = "kebab-case")]
    ResponseMap {
        field: String,
        cases: Vec<ResponseCase>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fallback: Option<String>,
    },
    Scripted { script: Vec<String> },
}

impl DeterminerConfig {
    /// Outcome labels this configuration can produce.
    pub fn outcomes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = match self {
            DeterminerConfig::KeywordIntent { intents, fallback } => intents
                .iter()
                .map(|i| i.outcome.as_str())
                .chain(std::iter::once(fallback.as_str()))
                .collect(),
            DeterminerConfig::OrderedCondition { rules, .. } => rules.iter().map(|r| r.outcome.as_str()).collect(),
            DeterminerConfig::ResponseMap { cases, fallback, .. } => {
                cases.iter().map(|c| c.outcome.as_str()).chain(fallback.as_deref()).collect()
            }
            DeterminerConfig::Scripted { script } => script.iter().map(String::as_str).collect(),
        };
        let mut seen = std::collections::HashSet::new();
        out.retain(|o| seen.insert(*o));
        out
    }

    pub fn build(&self) -> Result<Box<dyn Determiner>, expr::ExprError> {
        Ok(match self {
            DeterminerConfig::KeywordIntent { intents, fallback } => {
                Box::new(KeywordIntent { intents: intents.clone(), fallback: fallback.clone() })
            }
            DeterminerConfig::OrderedCondition { rules, no_match_is_error } => Box::new(OrderedCondition {
                rules: rules
                    .iter()
                    .map(|r| {
                        let e = match &r.when {
                            Some(w) => expr::parse(w)?,
                            None => expr::Expr::Lit(Value::Bool(true)),
                        };
                        Ok((r.outcome.clone(), e))
                    })
                    .collect::<Result<_, expr::ExprError>>()?,
                no_match_is_error: *no_match_is_error,
            }),
            DeterminerConfig::ResponseMap { field, cases, fallback } => Box::new(ResponseMap {
                field: field.clone(),
                cases: cases.iter().map(|c| (c.value.clone(), c.outcome.clone())).collect(),
                fallback: fallback.clone(),
            }),
            DeterminerConfig::Scripted { script } => Box::new(Scripted::new(script.clone())),
        })
    }
}

/// Manifest entry: a configuration plus static values per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminerBinding {
    #[serde(flatten)]
    pub config: DeterminerConfig,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub assign: IndexMap<String, IndexMap<String, Value>>,
}

impl DeterminerBinding {
    pub fn build(&self) -> Result<Box<dyn Determiner>, expr::ExprError> {
        let inner = self.config.build()?;
        if self.assign.is_empty() {
            return Ok(inner);
        }
        Ok(Box::new(WithAssign { inner, assign: self.assign.clone() }))
    }
}

struct WithAssign {
    inner: Box<dyn Determiner>,
    assign: IndexMap<String, IndexMap<String, Value>>,
}

impl Determiner for WithAssign {
    fn determine(&self, input: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        let mut sel = self.inner.determine(input)?;
        if let Some(vals) = self.assign.get(&sel.outcome) {
            for (k, v) in vals {
                // extracted values win over static ones
                sel.values.entry(k.clone()).or_insert_with(|| v.clone());
            }
        }
        Ok(sel)
    }
}

/// Highest-scoring phrase wins; ties go to the earlier intent, then the
/// earlier phrase. No match selects the fallback.
pub struct KeywordIntent {
    pub intents: Vec<Intent>,
    pub fallback: String,
}

impl KeywordIntent {
    pub fn classify(&self, utterance: &str) -> Selection {
        let mut best: Option<(usize, &Intent, keyword::PhraseMatch)> = None;
        for intent in &self.intents {
            for p in &intent.phrases {
                if let Some(m) = keyword::match_phrase(p, utterance) {
                    if best.as_ref().is_none_or(|b| m.score > b.0) {
                        best = Some((m.score, intent, m));
                    }
                }
            }
        }
        match best {
            Some((_, intent, m)) => Selection {
                outcome: intent.outcome.clone(),
                values: m.captures.into_iter().map(|(k, v)| (k, Value::String(v))).collect(),
            },
            None => Selection::of(&self.fallback),
        }
    }
}

impl Determiner for KeywordIntent {
    fn determine(&self, input: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        let text = match input.payload {
            Value::String(s) => s.as_str(),
            Value::Null => "",
            other => return Err(DeterminerError::Failed(format!("expected utterance text, got {other}"))),
        };
        Ok(self.classify(text))
    }
}

/// First rule whose condition holds over the filtered context.
pub struct OrderedCondition {
    pub rules: Vec<(String, expr::Expr)>,
    pub no_match_is_error: bool,
}

impl OrderedCondition {
    pub fn select_index(&self, env: &Env) -> Option<usize> {
        let lookup = |k: &str| env.get(k).cloned();
        self.rules.iter().position(|(_, e)| e.holds(&lookup))
    }
}

impl Determiner for OrderedCondition {
    fn determine(&self, input: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        match self.select_index(input.env) {
            Some(i) => Ok(Selection::of(&self.rules[i].0)),
            None => Err(DeterminerError::NoMatch),
        }
    }
}

/// Maps one field of an endpoint response to an outcome.
pub struct ResponseMap {
    pub field: String,
    pub cases: Vec<(Value, String)>,
    pub fallback: Option<String>,
}

impl Determiner for ResponseMap {
    fn determine(&self, input: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        let mut cur = Some(input.payload);
        for key in self.field.split('.') {
            cur = cur.and_then(|v| v.get(key));
        }
        let Some(v) = cur else {
            return match &self.fallback {
                Some(f) => Ok(Selection::of(f)),
                None => Err(DeterminerError::MissingField(self.field.clone())),
            };
        };
        if let Some((_, o)) = self.cases.iter().find(|(c, _)| c == v) {
            return Ok(Selection::of(o));
        }
        match &self.fallback {
            Some(f) => Ok(Selection::of(f)),
            None => Err(DeterminerError::Unmapped(v.clone())),
        }
    }
}

/// Replays a fixed list of selections, one per invocation.
pub struct Scripted {
    queue: Mutex<VecDeque<Selection>>,
}

impl Scripted {
    pub fn new(labels: impl IntoIterator<Item = String>) -> Self {
        Scripted { queue: Mutex::new(labels.into_iter().map(Selection::of).collect()) }
    }

    pub fn with_values(sels: impl IntoIterator<Item = Selection>) -> Self {
        Scripted { queue: Mutex::new(sels.into_iter().collect()) }
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("scripted determiner lock").len()
    }
}

impl Determiner for Scripted {
    fn determine(&self, _: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        self.queue
            .lock()
            .expect("scripted determiner lock")
            .pop_front()
            .ok_or(DeterminerError::ScriptExhausted)
    }
}

/// Always fails; used for fault injection.
pub struct Failing(pub String);

impl Determiner for Failing {
    fn determine(&self, _: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        Err(DeterminerError::Failed(self.0.clone()))
    }
}

/// Counts invocations of the wrapped determiner.
pub struct Counting {
    inner: Arc<dyn Determiner>,
    calls: Arc<AtomicUsize>,
}

impl Counting {
    pub fn new(inner: Arc<dyn Determiner>) -> (Self, Arc<AtomicUsize>) {
        let calls = Arc::new(AtomicUsize::new(0));
        (Counting { inner, calls: calls.clone() }, calls)
    }
}

impl Determiner for Counting {
    fn determine(&self, input: &DeterminerInput<'_>) -> Result<Selection, DeterminerError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.determine(input)
    }
}

/// Determiners keyed by `oneof` key (label, or `<action><path>` when unlabeled).
#[derive(Clone, Default)]
pub struct Registry {
    map: HashMap<String, Arc<dyn Determiner>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, d: Arc<dyn Determiner>) -> Option<Arc<dyn Determiner>> {
        self.map.insert(key.into(), d)
    }

    pub fn get(&self, key: &str) -> Option<&Arc<dyn Determiner>> {
        self.map.get(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn from_bindings<'a>(
        bindings: impl IntoIterator<Item = (&'a String, &'a DeterminerBinding)>,
    ) -> Result<Self, expr::ExprError> {
        let mut r = Registry::new();
        for (k, b) in bindings {
            r.insert(k.clone(), Arc::from(b.build()?));
        }
        Ok(r)
    }
}
