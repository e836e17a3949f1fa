//! Wire types and pure projections of engines and traces.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use dialplan_core::executor::{Engine, Snapshot};
use dialplan_core::planner::path_key;
use dialplan_core::spec::ActionKind;
use dialplan_core::trace::StepRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Dialogue,
    System,
    Web,
}

impl From<ActionKind> for Scope {
    fn from(k: ActionKind) -> Self {
        match k {
            ActionKind::Dialogue => Scope::Dialogue,
            ActionKind::System => Scope::System,
            ActionKind::Web => Scope::Web,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    Root,
    Goal,
    Regular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    #[serde(rename = "type")]
    pub kind: NodeType,
    /// `None` on goal nodes.
    pub scope: Option<Scope>,
    pub action: Option<String>,
    /// Action name as written in the agent spec.
    pub label: Option<String>,
    pub state: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    /// `<from>:<outcome path>`
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub agent: String,
    pub root: usize,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

pub fn edge_id(from: usize, outcome: &str) -> String {
    format!("{from}:{outcome}")
}

pub fn graph(agent: &str, e: &Engine) -> Graph {
    let c = &e.controller;
    let nodes = c
        .nodes
        .iter()
        .map(|n| {
            let binding = n.action.as_ref().and_then(|a| e.manifest.actions.get(a));
            let kind = if n.goal {
                NodeType::Goal
            } else if n.id == c.n0 {
                NodeType::Root
            } else {
                NodeType::Regular
            };
            GraphNode {
                id: n.id,
                kind,
                scope: binding.map(|b| b.kind.into()),
                action: n.action.clone(),
                label: binding.map(|b| b.name.clone()),
                state: n.state.iter().cloned().collect(),
            }
        })
        .collect();
    let edges = c
        .nodes
        .iter()
        .flat_map(|n| {
            n.edges.iter().map(move |x| {
                let outcome = path_key(&x.outcome);
                GraphEdge { id: edge_id(n.id, &outcome), from: n.id, to: x.to, outcome }
            })
        })
        .collect();
    Graph { agent: agent.to_string(), root: c.n0, nodes, edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: u64,
    pub node: usize,
    pub edge: String,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCount {
    pub edge: String,
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// The path a log took through the controller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePath {
    pub steps: Vec<TraceStep>,
    /// Distinct nodes in first-visit order, starting at the root.
    pub nodes: Vec<usize>,
    /// Distinct traversed edges with multiplicity, in first-traversal order.
    pub edges: Vec<EdgeCount>,
}

pub fn trace_path(root: usize, records: &[StepRecord]) -> TracePath {
    let steps: Vec<TraceStep> = records
        .iter()
        .map(|r| TraceStep { step: r.step, node: r.node, edge: edge_id(r.node, &r.outcome), to: r.next_node })
        .collect();
    let mut nodes = vec![root];
    let mut edges: IndexMap<String, EdgeCount> = IndexMap::new();
    for s in &steps {
        for n in [s.node, s.to] {
            if !nodes.contains(&n) {
                nodes.push(n);
            }
        }
        edges.entry(s.edge.clone()).or_insert(EdgeCount { edge: s.edge.clone(), from: s.node, to: s.to, count: 0 }).count +=
            1;
    }
    TracePath { steps, nodes, edges: edges.into_values().collect() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum Progress {
    Awaiting { action: String, prompt: String },
    Complete,
    /// Replay sessions never advance.
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub agent: String,
    pub mode: Mode,
    pub progress: Progress,
    pub steps: usize,
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub id: String,
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub actions: usize,
}

/// Messages on the session event socket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Event {
    Hello { v: u32, session: String, steps: usize },
    Step { v: u32, session: String, record: Box<StepRecord>, progress: Progress },
}
