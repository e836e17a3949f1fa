//! Append-only JSONL trace of executed steps, and replay against a controller.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::effects::{choice_from_path, resolve, ChoiceMap, State};
use crate::executor::{
    determine, Context, Determination, Engine, Exchange, Snapshot, StepResult, Utterance,
};
use crate::planner::{parse_path_key, path_key};

/// One line of the trace. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct StepRecord {
    /// Step counter before this step ran.
    pub step: u64,
    pub prior_hash: String,
    pub node: usize,
    pub action: String,
    /// Outcome label path, `oneof=outcome` steps joined by spaces.
    pub outcome: String,
    pub choice: ChoiceMap,
    pub adds: Vec<String>,
    pub dels: Vec<String>,
    /// Context delta; `null` resets a fluent to ⊥.
    pub context: BTreeMap<String, Option<Value>>,
    pub next_node: usize,
    pub state: State,
    pub hash: String,
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub utterances: Vec<Utterance>,
}

/// SHA-256 over the canonical JSON of (node, state, context).
pub fn snapshot_hash(node: usize, state: &State, context: &Context) -> String {
    #[derive(Serialize)]
    struct Canon<'a> {
        node: usize,
        state: &'a State,
        context: &'a Context,
    }
    let bytes = serde_json::to_vec(&Canon { node, state, context }).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

pub fn hash_of(s: &Snapshot) -> String {
    snapshot_hash(s.node, &s.state, &s.context)
}

pub fn record(prior: &Snapshot, r: &StepResult) -> StepRecord {
    let real = &r.result.realization;
    StepRecord {
        step: prior.step,
        prior_hash: hash_of(prior),
        node: prior.node,
        action: r.action.clone(),
        outcome: path_key(&r.outcome),
        choice: real.choice.clone(),
        adds: real.adds.iter().cloned().collect(),
        dels: real.dels.iter().cloned().collect(),
        context: r.result.updates.clone(),
        next_node: r.snapshot.node,
        state: r.snapshot.state.clone(),
        hash: hash_of(&r.snapshot),
        payload: r.result.raw.clone(),
        utterances: r.utterances.clone(),
    }
}

pub fn write_record(w: &mut dyn Write, rec: &StepRecord) -> std::io::Result<()> {
    let line = serde_json::to_string(rec).map_err(std::io::Error::other)?;
    writeln!(w, "{line}")?;
    w.flush()
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_trace(r: impl BufRead) -> Result<Vec<StepRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| TraceError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_trace(text: &str) -> Result<Vec<StepRecord>, TraceError> {
    read_trace(text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayMode {
    /// Re-apply the recorded outcomes.
    #[default]
    Recorded,
    /// Re-run the determiners on the recorded payloads and compare.
    Redetermine,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub step: u64,
    pub message: String,
}

/// One traversed controller edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub node: usize,
    pub outcome: String,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub steps: usize,
    pub consistent: bool,
    pub divergences: Vec<Divergence>,
    pub path: Vec<PathStep>,
    pub snapshot: Snapshot,
}

/// Re-executes `records` from the initial snapshot, stopping at the first
/// step that disagrees with the log.
pub fn replay(engine: &Engine, records: &[StepRecord], mode: ReplayMode) -> ReplayReport {
    let mut snap = engine.initial();
    let mut divergences = Vec::new();
    let mut path = Vec::new();
    let mut steps = 0;
    for rec in records {
        let mut diverge = |m: String| divergences.push(Divergence { step: rec.step, message: m });
        if rec.step != snap.step {
            diverge(format!("expected step {}, log has {}", snap.step, rec.step));
            break;
        }
        if rec.node != snap.node {
            diverge(format!("expected node {}, log has {}", snap.node, rec.node));
            break;
        }
        if rec.prior_hash != hash_of(&snap) {
            diverge("prior state hash mismatch".into());
            break;
        }
        let a = match engine.current_action(&snap) {
            Ok((a, _)) => a,
            Err(e) => {
                diverge(e.to_string());
                break;
            }
        };
        if a.name != rec.action {
            diverge(format!("controller runs {}, log has {}", a.name, rec.action));
            break;
        }
        let determined = match mode {
            ReplayMode::Recorded => recorded_determination(engine, a, rec),
            ReplayMode::Redetermine => engine
                .scope(&snap)
                .and_then(|(_, env)| {
                    determine(a, &engine.registry, &engine.manifest.variables, &rec.payload, &env, engine.schedule)
                })
                .map_err(|e| e.to_string()),
        };
        let d = match determined {
            Ok(d) => d,
            Err(m) => {
                diverge(m);
                break;
            }
        };
        let ex = Exchange { payload: rec.payload.clone(), utterances: rec.utterances.clone() };
        let r = match engine.advance(&snap, a, d, ex) {
            Ok(r) => r,
            Err(e) => {
                diverge(e.to_string());
                break;
            }
        };
        let redone = record(&snap, &r);
        let mut bad = Vec::new();
        if redone.outcome != rec.outcome {
            bad.push(format!("outcome {} differs from logged {}", redone.outcome, rec.outcome));
        }
        if redone.next_node != rec.next_node {
            bad.push(format!("next node {} differs from logged {}", redone.next_node, rec.next_node));
        }
        if redone.adds != rec.adds || redone.dels != rec.dels {
            bad.push("add/delete sets differ".into());
        }
        if redone.context != rec.context {
            bad.push("context delta differs".into());
        }
        if redone.state != rec.state || redone.hash != rec.hash {
            bad.push("resulting state differs".into());
        }
        if !bad.is_empty() {
            bad.into_iter().for_each(&mut diverge);
            break;
        }
        path.push(PathStep { node: rec.node, outcome: rec.outcome.clone(), to: r.snapshot.node });
        snap = r.snapshot;
        steps += 1;
    }
    ReplayReport { steps, consistent: divergences.is_empty(), divergences, path, snapshot: snap }
}

fn recorded_determination(
    engine: &Engine,
    a: &crate::pddl::ActionDef,
    rec: &StepRecord,
) -> Result<Determination, String> {
    let steps = parse_path_key(&rec.outcome)?;
    let choice = choice_from_path(a, &steps).ok_or_else(|| format!("outcome {} is not an outcome of {}", rec.outcome, a.name))?;
    let realization = resolve(&a.effect, &choice).map_err(|e| e.to_string())?;
    let values = rec
        .context
        .iter()
        .filter(|(f, _)| realization.adds.contains(*f) && engine.manifest.variables.contains_key(*f))
        .filter_map(|(f, v)| Some((f.clone(), v.clone()?)))
        .collect();
    Ok(Determination { realization, values })
}

/// Snapshot after the first `k` steps of a log.
pub fn snapshot_at(engine: &Engine, records: &[StepRecord], k: usize) -> Result<Snapshot, Divergence> {
    let k = k.min(records.len());
    let r = replay(engine, &records[..k], ReplayMode::Recorded);
    match r.divergences.into_iter().next() {
        Some(d) => Err(d),
        None => Ok(r.snapshot),
    }
}
