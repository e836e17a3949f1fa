//! Conversation driver on top of the executor.

use std::io::Write;
use std::sync::Arc;

use serde_json::Value;

use crate::compiler::{compile, CompileError};
use crate::determiners::{Env, Registry};
use crate::executor::{Engine, ExecError, ExecRequest, Exchange, Schedule, Snapshot, Speaker, Utterance};
use crate::manifest::{Callback, ManifestError};
use crate::planner::{solve, PlanError};
use crate::spec::AgentSpec;
use crate::trace::{record, write_record, StepRecord};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("determiner: {0}")]
    Determiner(String),
}

/// Compiles, plans and wires up determiners for `spec`.
pub fn build_engine(spec: &AgentSpec) -> Result<Engine, BuildError> {
    let c = compile(spec)?;
    c.manifest.check(&c.domain)?;
    let controller = solve(&c.domain, &c.problem)?;
    let registry = Registry::from_bindings(&c.manifest.determiners).map_err(|e| BuildError::Determiner(e.to_string()))?;
    Ok(Engine {
        domain: c.domain,
        problem: c.problem,
        controller,
        manifest: c.manifest,
        registry,
        schedule: Schedule::default(),
    })
}

/// Replaces `$name` with the variable's value; unknown names stay as written.
pub fn render(template: &str, env: &Env) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(i) = rest.find('$') {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 1..];
        let n = tail.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-')).unwrap_or(tail.len());
        let name = &tail[..n];
        match env.get(name) {
            Some(Value::String(s)) if n > 0 => out.push_str(s),
            Some(v) if n > 0 => out.push_str(&v.to_string()),
            _ => {
                out.push('$');
                out.push_str(name);
            }
        }
        rest = &tail[n..];
    }
    out.push_str(rest);
    out
}

/// Calls web endpoints.
pub trait Transport: Send + Sync {
    fn call(&self, endpoint: &str, env: &Env, mock: Option<&Value>) -> Result<Value, String>;
}

/// Answers every call with the action's declared mock response.
pub struct MockTransport;

impl Transport for MockTransport {
    fn call(&self, endpoint: &str, _env: &Env, mock: Option<&Value>) -> Result<Value, String> {
        mock.cloned().ok_or_else(|| format!("no mock response for {endpoint}"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("action {0} is not waiting for user input")]
    NotAwaitingInput(String),
    #[error("trace write failed: {0}")]
    Trace(#[from] std::io::Error),
}

/// What the agent is doing after a call to [`Session::run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    /// Waiting on a user reply for this action, having said `prompt`.
    Awaiting { action: String, prompt: String },
    Complete,
}

/// A single-writer conversation. Each step is appended to the trace sink
/// before the in-memory snapshot is replaced.
pub struct Session {
    engine: Arc<Engine>,
    transport: Arc<dyn Transport>,
    snapshot: Snapshot,
    trace: Vec<StepRecord>,
    sink: Option<Box<dyn Write + Send>>,
    step_limit: u64,
}

impl Session {
    pub fn new(engine: Arc<Engine>) -> Self {
        let snapshot = engine.initial();
        Session { engine, transport: Arc::new(MockTransport), snapshot, trace: Vec::new(), sink: None, step_limit: 10_000 }
    }

    pub fn with_transport(mut self, t: Arc<dyn Transport>) -> Self {
        self.transport = t;
        self
    }

    pub fn with_sink(mut self, w: Box<dyn Write + Send>) -> Self {
        self.sink = Some(w);
        self
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    pub fn is_complete(&self) -> bool {
        self.engine.is_complete(&self.snapshot)
    }

    /// The prompt of the current action if it awaits user input.
    pub fn pending(&self) -> Option<(String, String)> {
        let (a, b) = self.engine.current_action(&self.snapshot).ok()?;
        if !b.awaits_input() {
            return None;
        }
        let Callback::Utterance { template, .. } = &b.callback else { return None };
        let (_, env) = self.engine.scope(&self.snapshot).ok()?;
        Some((a.name.clone(), render(template, &env)))
    }

    /// Executes actions that need no user input until one does or the goal is reached.
    pub fn run(&mut self) -> Result<Status, SessionError> {
        let start = self.snapshot.step;
        loop {
            if self.is_complete() {
                return Ok(Status::Complete);
            }
            if let Some((action, prompt)) = self.pending() {
                return Ok(Status::Awaiting { action, prompt });
            }
            if self.snapshot.step - start >= self.step_limit {
                return Err(ExecError::Callback("step limit reached without user input".into()).into());
            }
            let transport = self.transport.clone();
            self.commit(&mut |req| auto_exchange(req, transport.as_ref()))?;
        }
    }

    /// Feeds the user's reply to the waiting action, then runs on.
    pub fn reply(&mut self, text: &str) -> Result<Status, SessionError> {
        let Some((action, prompt)) = self.pending() else {
            let name = self.engine.current_action(&self.snapshot).map(|(a, _)| a.name.clone())?;
            return Err(SessionError::NotAwaitingInput(name));
        };
        let _ = action;
        let text = text.to_string();
        self.commit(&mut |_| {
            Ok(Exchange {
                payload: Value::String(text.clone()),
                utterances: vec![
                    Utterance { speaker: Speaker::Agent, text: prompt.clone() },
                    Utterance { speaker: Speaker::User, text: text.clone() },
                ],
            })
        })?;
        self.run()
    }

    /// One step with an arbitrary execute callback.
    pub fn commit(
        &mut self,
        exec: &mut dyn FnMut(&ExecRequest<'_>) -> Result<Exchange, String>,
    ) -> Result<&StepRecord, SessionError> {
        let r = self.engine.step(&self.snapshot, exec)?;
        let rec = record(&self.snapshot, &r);
        if let Some(w) = self.sink.as_mut() {
            write_record(w.as_mut(), &rec)?;
        }
        self.trace.push(rec);
        self.snapshot = r.snapshot;
        Ok(self.trace.last().expect("just pushed"))
    }
}

fn auto_exchange(req: &ExecRequest<'_>, transport: &dyn Transport) -> Result<Exchange, String> {
    match &req.binding.callback {
        Callback::Utterance { template, .. } => Ok(Exchange {
            payload: Value::Null,
            utterances: vec![Utterance { speaker: Speaker::Agent, text: render(template, req.env) }],
        }),
        Callback::Endpoint { template, mock } => {
            let endpoint = render(template, req.env);
            let payload = transport.call(&endpoint, req.env, mock.as_ref())?;
            Ok(Exchange { payload, utterances: Vec::new() })
        }
        Callback::Internal => Ok(Exchange::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_substitutes_known_names() {
        let env: Env = [("oil_status".to_string(), Value::String("low".into())), ("n".into(), Value::from(3))]
            .into_iter()
            .collect();
        assert_eq!(render("oil is $oil_status, n=$n, $missing $", &env), "oil is low, n=3, $missing $");
    }
}
