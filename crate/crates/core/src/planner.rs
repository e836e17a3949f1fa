//! Strong-cyclic planning over full (observable) states, and an independent
//! controller validator.
//!
//! `solve` explores the reachable state space, then repeatedly discards
//! state-action pairs that can leave the surviving set and states that can no
//! longer reach the goal, until nothing changes. The policy picks, in each
//! surviving state, the safe action with the closest successor to the goal.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::effects::{
    action_realizations, apply, choice_from_path, outcome_path, resolve, ActionEffectError, ChoiceMap, OutcomeStep,
    Realization, State,
};
use crate::pddl::{DomainDef, ProblemDef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Outcome label path identifying the realization.
    pub outcome: Vec<OutcomeStep>,
    pub choice: ChoiceMap,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    /// `None` on goal nodes.
    pub action: Option<String>,
    pub goal: bool,
    /// State the planner expects at this node.
    pub state: State,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ControllerDoc", try_from = "ControllerDoc")]
pub struct Controller {
    pub n0: usize,
    pub nodes: Vec<Node>,
}

/// Wire form of a controller. Edges are keyed by node id, then by the
/// outcome label path (`oneof=outcome` steps joined by spaces).
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct ControllerDoc {
    n0: usize,
    nodes: Vec<NodeDoc>,
    actmap: BTreeMap<usize, String>,
    goal_nodes: Vec<usize>,
    edges: BTreeMap<usize, IndexMap<String, EdgeDoc>>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    state: State,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    to: usize,
    choice: ChoiceMap,
}

pub fn path_key(path: &[OutcomeStep]) -> String {
    path.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn parse_path_key(key: &str) -> Result<Vec<OutcomeStep>, String> {
    key.split_whitespace()
        .map(|step| {
            let (oneof, outcome) = step.split_once('=').ok_or_else(|| format!("invalid outcome step {step:?}"))?;
            Ok(OutcomeStep { oneof: oneof.into(), outcome: outcome.into() })
        })
        .collect()
}

impl From<Controller> for ControllerDoc {
    fn from(c: Controller) -> Self {
        let mut doc = ControllerDoc {
            n0: c.n0,
            nodes: Vec::new(),
            actmap: BTreeMap::new(),
            goal_nodes: Vec::new(),
            edges: BTreeMap::new(),
        };
        for n in c.nodes {
            if let Some(a) = n.action {
                doc.actmap.insert(n.id, a);
            }
            if n.goal {
                doc.goal_nodes.push(n.id);
            }
            if !n.edges.is_empty() {
                let es = n.edges.into_iter().map(|e| (path_key(&e.outcome), EdgeDoc { to: e.to, choice: e.choice }));
                doc.edges.insert(n.id, es.collect());
            }
            doc.nodes.push(NodeDoc { id: n.id, state: n.state });
        }
        doc
    }
}

impl TryFrom<ControllerDoc> for Controller {
    type Error = String;

    fn try_from(mut doc: ControllerDoc) -> Result<Self, String> {
        let goals: BTreeSet<usize> = doc.goal_nodes.iter().copied().collect();
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for (i, n) in doc.nodes.into_iter().enumerate() {
            if n.id != i {
                return Err(format!("node ids must be dense and ordered, found {} at position {i}", n.id));
            }
            let edges = doc
                .edges
                .remove(&i)
                .unwrap_or_default()
                .into_iter()
                .map(|(k, e)| Ok(Edge { outcome: parse_path_key(&k)?, choice: e.choice, to: e.to }))
                .collect::<Result<_, String>>()?;
            nodes.push(Node { id: i, action: doc.actmap.remove(&i), goal: goals.contains(&i), state: n.state, edges });
        }
        if let Some(k) = doc.edges.keys().next() {
            return Err(format!("edges for unknown node {k}"));
        }
        Ok(Controller { n0: doc.n0, nodes })
    }
}

impl Controller {
    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    /// Successor of `node` under the realization selected by `choice`.
    pub fn successor(&self, node: usize, choice: &ChoiceMap) -> Option<usize> {
        self.nodes.get(node)?.edges.iter().find(|e| &e.choice == choice).map(|e| e.to)
    }

    pub fn goal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(|n| n.goal).map(|n| n.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("unsolvable")]
    Unsolvable,
    #[error("state limit of {0} reached")]
    StateLimit(usize),
    #[error(transparent)]
    Model(#[from] ActionEffectError),
    #[error("goal fluent {0} is not a declared predicate")]
    UnknownGoal(String),
}

#[derive(Debug, Clone, Copy)]
pub struct PlanOptions {
    pub state_cap: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { state_cap: 1_000_000 }
    }
}

/// Dense bitset over the domain's predicates.
type Bits = Box<[u64]>;

struct Space {
    preds: Vec<String>,
    index: HashMap<String, usize>,
}

impl Space {
    fn new(d: &DomainDef) -> Self {
        let preds: Vec<String> = d.predicates.iter().cloned().collect();
        let index = preds.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Space { preds, index }
    }

    fn words(&self) -> usize {
        self.preds.len().div_ceil(64).max(1)
    }

    fn encode<'a>(&self, fluents: impl IntoIterator<Item = &'a String>) -> Bits {
        let mut b = vec![0u64; self.words()].into_boxed_slice();
        for f in fluents {
            if let Some(&i) = self.index.get(f) {
                b[i / 64] |= 1 << (i % 64);
            }
        }
        b
    }

    fn decode(&self, b: &Bits) -> State {
        self.preds.iter().enumerate().filter(|(i, _)| b[i / 64] >> (i % 64) & 1 == 1).map(|(_, p)| p.clone()).collect()
    }
}

/// Compiled action: precondition and per-realization masks.
struct Op {
    name: String,
    pos: Bits,
    neg: Bits,
    outs: Vec<(Realization, Bits, Bits)>,
}

impl Op {
    fn applicable(&self, s: &Bits) -> bool {
        s.iter().zip(self.pos.iter()).all(|(x, p)| x & p == *p) && s.iter().zip(self.neg.iter()).all(|(x, n)| x & n == 0)
    }

    fn succ(&self, s: &Bits, k: usize) -> Bits {
        let (_, add, del) = &self.outs[k];
        s.iter().zip(add.iter()).zip(del.iter()).map(|((x, a), d)| (x & !d) | a).collect()
    }
}

pub fn solve(d: &DomainDef, p: &ProblemDef) -> Result<Controller, PlanError> {
    solve_with(d, p, PlanOptions::default())
}

pub fn solve_with(d: &DomainDef, p: &ProblemDef, opts: PlanOptions) -> Result<Controller, PlanError> {
    let space = Space::new(d);
    if let Some(g) = p.goal.iter().find(|g| !space.index.contains_key(*g)) {
        return Err(PlanError::UnknownGoal(g.clone()));
    }
    let mut ops = Vec::new();
    for a in &d.actions {
        let rs = action_realizations(a)?;
        let pos = space.encode(a.precondition.iter().filter(|l| l.positive).map(|l| &l.fluent));
        let neg = space.encode(a.precondition.iter().filter(|l| !l.positive).map(|l| &l.fluent));
        let outs = rs
            .into_iter()
            .map(|r| {
                let add = space.encode(&r.adds);
                let del = space.encode(&r.dels);
                (r, add, del)
            })
            .collect();
        ops.push(Op { name: a.name.clone(), pos, neg, outs });
    }
    // tie-break: action name, then declaration order
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by(|&x, &y| ops[x].name.cmp(&ops[y].name).then(x.cmp(&y)));

    let goal = space.encode(&p.goal);
    let is_goal = |s: &Bits| s.iter().zip(goal.iter()).all(|(x, g)| x & g == *g);

    // forward exploration
    let mut ids: HashMap<Bits, usize> = HashMap::new();
    let mut states: Vec<Bits> = Vec::new();
    // per state: (op index, successor ids per realization)
    let mut trans: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let init = space.encode(&p.init);
    ids.insert(init.clone(), 0);
    states.push(init);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let mut ts = Vec::new();
        if !is_goal(&states[s]) {
            for &o in &order {
                let op = &ops[o];
                if !op.applicable(&states[s]) {
                    continue;
                }
                let mut succ = Vec::with_capacity(op.outs.len());
                for k in 0..op.outs.len() {
                    let n = op.succ(&states[s], k);
                    let id = match ids.get(&n) {
                        Some(&id) => id,
                        None => {
                            if states.len() >= opts.state_cap {
                                return Err(PlanError::StateLimit(opts.state_cap));
                            }
                            let id = states.len();
                            ids.insert(n.clone(), id);
                            states.push(n);
                            queue.push_back(id);
                            id
                        }
                    };
                    succ.push(id);
                }
                ts.push((o, succ));
            }
        }
        trans.push(ts);
    }
    let n = states.len();
    let goals: Vec<bool> = states.iter().map(is_goal).collect();

    // strong-cyclic fixpoint
    let mut alive = vec![true; n];
    let dist = loop {
        let mut dist: Vec<Option<usize>> = (0..n).map(|s| goals[s].then_some(0)).collect();
        let safe = |s: usize, alive: &[bool]| -> Vec<usize> {
            trans[s].iter().enumerate().filter(|(_, (_, succ))| succ.iter().all(|&t| alive[t])).map(|(i, _)| i).collect()
        };
        let safe_sets: Vec<Vec<usize>> = (0..n).map(|s| if alive[s] { safe(s, &alive) } else { Vec::new() }).collect();
        // layered backward search: a state joins layer k+1 once some safe action can reach layer ≤ k
        let mut changed = true;
        let mut layer = 0;
        while changed {
            changed = false;
            let mut newly = Vec::new();
            for s in 0..n {
                if dist[s].is_some() || !alive[s] {
                    continue;
                }
                let reach = safe_sets[s]
                    .iter()
                    .any(|&i| trans[s][i].1.iter().any(|&t| dist[t].is_some_and(|d| d <= layer)));
                if reach {
                    newly.push(s);
                }
            }
            for s in newly {
                dist[s] = Some(layer + 1);
                changed = true;
            }
            layer += 1;
        }
        let next: Vec<bool> = (0..n).map(|s| alive[s] && dist[s].is_some()).collect();
        if next == alive {
            break dist;
        }
        alive = next;
    };
    if !alive[0] {
        return Err(PlanError::Unsolvable);
    }

    // policy: safe action whose best successor is closest to the goal
    let policy = |s: usize| -> usize {
        let mut best: Option<(usize, usize)> = None;
        for (i, (_, succ)) in trans[s].iter().enumerate() {
            if !succ.iter().all(|&t| alive[t]) {
                continue;
            }
            let d = succ.iter().filter_map(|&t| dist[t]).min().unwrap_or(usize::MAX);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        best.expect("alive non-goal state has a safe action").1
    };

    // controller: states reachable from init under the policy
    let mut node_of: HashMap<usize, usize> = HashMap::from([(0, 0)]);
    let mut order_states = vec![0usize];
    let mut nodes: Vec<Node> = Vec::new();
    let mut i = 0;
    while i < order_states.len() {
        let s = order_states[i];
        i += 1;
        let state = space.decode(&states[s]);
        if goals[s] {
            nodes.push(Node { id: nodes.len(), action: None, goal: true, state, edges: Vec::new() });
            continue;
        }
        let (o, succ) = &trans[s][policy(s)];
        let op = &ops[*o];
        let action = d.actions.iter().find(|a| a.name == op.name).expect("op comes from domain");
        let mut edges = Vec::new();
        for (k, &t) in succ.iter().enumerate() {
            let to = *node_of.entry(t).or_insert_with(|| {
                order_states.push(t);
                order_states.len() - 1
            });
            let choice = op.outs[k].0.choice.clone();
            edges.push(Edge { outcome: outcome_path(action, &choice), choice, to });
        }
        nodes.push(Node { id: nodes.len(), action: Some(op.name.clone()), goal: false, state, edges });
    }
    Ok(Controller { n0: 0, nodes })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Failure {
    BadInitialNode { n0: usize },
    UnknownAction { node: usize, action: String },
    MissingAction { node: usize },
    PreconditionViolated { node: usize, action: String },
    MissingEdge { node: usize, choice: ChoiceMap },
    DanglingEdge { node: usize, to: usize },
    GoalNotSatisfied { node: usize },
    NoFairPathToGoal { node: usize },
    Model { message: String },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::BadInitialNode { n0 } => write!(f, "initial node {n0} does not exist"),
            Failure::UnknownAction { node, action } => write!(f, "node {node}: unknown action {action}"),
            Failure::MissingAction { node } => write!(f, "node {node}: non-goal node without an action"),
            Failure::PreconditionViolated { node, action } => {
                write!(f, "node {node}: precondition of {action} does not hold")
            }
            Failure::MissingEdge { node, choice } => {
                let c: Vec<String> = choice.iter().map(|(p, i)| format!("{p}={i}")).collect();
                write!(f, "node {node}: no edge for choice {{{}}}", c.join(", "))
            }
            Failure::DanglingEdge { node, to } => write!(f, "node {node}: edge to missing node {to}"),
            Failure::GoalNotSatisfied { node } => write!(f, "node {node}: marked goal but goal does not hold"),
            Failure::NoFairPathToGoal { node } => write!(f, "node {node}: no fair path to goal"),
            Failure::Model { message } => write!(f, "{message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    pub visited: usize,
    pub failures: Vec<Failure>,
}

/// Checks a controller by explicit traversal of (state, node) pairs from
/// (init, n0): preconditions hold, every realization has an edge, and every
/// reachable pair can still reach a goal.
pub fn validate_plan(d: &DomainDef, p: &ProblemDef, c: &Controller) -> Verdict {
    let mut failures = Vec::new();
    if c.node(c.n0).is_none() {
        failures.push(Failure::BadInitialNode { n0: c.n0 });
        return Verdict { valid: false, visited: 0, failures };
    }
    let goal_holds = |s: &State| p.goal.iter().all(|g| s.contains(g));
    let init: State = p.init.iter().cloned().collect();

    let mut index: HashMap<(usize, State), usize> = HashMap::new();
    let mut pairs: Vec<(usize, State)> = Vec::new();
    let mut succs: Vec<Vec<usize>> = Vec::new();
    let mut terminal: Vec<bool> = Vec::new();
    index.insert((c.n0, init.clone()), 0);
    pairs.push((c.n0, init));
    let mut at = 0;
    while at < pairs.len() {
        let (nid, state) = pairs[at].clone();
        at += 1;
        let node = &c.nodes[nid];
        let mut out = Vec::new();
        let mut done = false;
        if goal_holds(&state) {
            done = true;
        } else if node.goal {
            failures.push(Failure::GoalNotSatisfied { node: nid });
        } else if let Some(name) = &node.action {
            match d.action(name) {
                None => failures.push(Failure::UnknownAction { node: nid, action: name.clone() }),
                Some(a) if !a.applicable(&state) => {
                    failures.push(Failure::PreconditionViolated { node: nid, action: name.clone() })
                }
                Some(a) => match action_realizations(a) {
                    Err(e) => failures.push(Failure::Model { message: e.to_string() }),
                    Ok(rs) => {
                        for r in rs {
                            let Some(e) = node.edges.iter().find(|e| e.choice == r.choice) else {
                                failures.push(Failure::MissingEdge { node: nid, choice: r.choice.clone() });
                                continue;
                            };
                            if c.node(e.to).is_none() {
                                failures.push(Failure::DanglingEdge { node: nid, to: e.to });
                                continue;
                            }
                            let key = (e.to, apply(&state, &r));
                            let id = *index.entry(key.clone()).or_insert_with(|| {
                                pairs.push(key);
                                pairs.len() - 1
                            });
                            out.push(id);
                        }
                    }
                },
            }
        } else {
            failures.push(Failure::MissingAction { node: nid });
        }
        succs.push(out);
        terminal.push(done);
    }

    // backward reachability to goal pairs
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); pairs.len()];
    for (s, out) in succs.iter().enumerate() {
        for &t in out {
            preds[t].push(s);
        }
    }
    let mut reaches = terminal.clone();
    let mut queue: VecDeque<usize> = (0..pairs.len()).filter(|&i| terminal[i]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !reaches[s] {
                reaches[s] = true;
                queue.push_back(s);
            }
        }
    }
    let mut stuck: BTreeSet<usize> = BTreeSet::new();
    for (i, (nid, _)) in pairs.iter().enumerate() {
        if !reaches[i] && stuck.insert(*nid) {
            failures.push(Failure::NoFairPathToGoal { node: *nid });
        }
    }
    Verdict { valid: failures.is_empty(), visited: pairs.len(), failures }
}

/// Realization of `node`'s action selected by a label path, if the node has an edge for it.
pub fn edge_for_path(d: &DomainDef, c: &Controller, node: usize, path: &[OutcomeStep]) -> Option<(ChoiceMap, usize)> {
    let n = c.node(node)?;
    let a = d.action(n.action.as_deref()?)?;
    let choice = choice_from_path(a, path)?;
    let r = resolve(&a.effect, &choice).ok()?;
    let to = c.successor(node, &r.choice)?;
    Some((r.choice, to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};

    fn dp(domain: &str, problem: &str) -> (DomainDef, ProblemDef) {
        (parse_domain(domain).unwrap(), parse_problem(problem).unwrap())
    }

    #[test]
    fn goal_in_init_is_a_single_goal_node() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g)) (:action a :effect (g)))",
            "(define (problem p) (:domain d) (:init (g)) (:goal (and (g))))",
        );
        let c = solve(&d, &p).unwrap();
        assert_eq!(c.nodes.len(), 1);
        assert!(c.nodes[0].goal);
        assert_eq!(c.edge_count(), 0);
        assert!(validate_plan(&d, &p, &c).valid);
    }

    #[test]
    fn retry_loop_is_strong_cyclic() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g)) (:action try :effect (oneof (g) (not (g)))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        let c = solve(&d, &p).unwrap();
        assert_eq!(c.nodes.len(), 2);
        let n0 = &c.nodes[c.n0];
        assert_eq!(n0.action.as_deref(), Some("try"));
        assert!(n0.edges.iter().any(|e| e.to == c.n0), "failure outcome loops back");
        assert!(validate_plan(&d, &p, &c).valid);
    }

    #[test]
    fn dead_end_is_unsolvable() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g) (dead))
               (:action a :precondition (and (not (dead))) :effect (oneof (g) (dead))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        assert_eq!(solve(&d, &p), Err(PlanError::Unsolvable));
    }

    #[test]
    fn avoids_unsafe_action_when_a_safe_one_exists() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g) (dead))
               (:action risky :precondition (and (not (dead))) :effect (oneof (g) (dead)))
               (:action slow :precondition (and (not (dead))) :effect (oneof (g) (not (g)))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        let c = solve(&d, &p).unwrap();
        assert_eq!(c.nodes[c.n0].action.as_deref(), Some("slow"));
    }

    #[test]
    fn dropped_edge_is_reported() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g)) (:action try :effect (oneof (g) (not (g)))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        let mut c = solve(&d, &p).unwrap();
        let dropped = c.nodes[0].edges.remove(1);
        let v = validate_plan(&d, &p, &c);
        assert!(!v.valid);
        assert!(v.failures.contains(&Failure::MissingEdge { node: 0, choice: dropped.choice }));
    }

    #[test]
    fn mutual_loop_without_goal_is_reported() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g) (x))
               (:action on :precondition (and (not (x))) :effect (x))
               (:action off :precondition (and (x)) :effect (not (x))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        let mk = |id, action: &str, to| Node {
            id,
            action: Some(action.into()),
            goal: false,
            state: State::new(),
            edges: vec![Edge { outcome: vec![], choice: ChoiceMap::new(), to }],
        };
        let c = Controller { n0: 0, nodes: vec![mk(0, "on", 1), mk(1, "off", 0)] };
        let v = validate_plan(&d, &p, &c);
        assert!(v.failures.contains(&Failure::NoFairPathToGoal { node: 0 }));
        assert_eq!(v.failures[0].to_string(), "node 0: no fair path to goal");
    }

    #[test]
    fn json_round_trip() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (g) (h))
               (:action try :effect (and (oneof (g) (not (g))) (labeled-oneof r (outcome ok (h)) (outcome bad (not (h)))))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g) (h))))",
        );
        let c = solve(&d, &p).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["actmap"]["0"], "try");
        assert!(v["edges"]["0"].as_object().unwrap().contains_key("try/0=o0 r=ok"), "{}", v["edges"]);
        let back: Controller = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn solve_is_deterministic() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (a) (b) (g))
               (:action x :effect (and (a) (oneof (b) (not (b)))))
               (:action y :precondition (and (a)) :effect (oneof (g) (not (a)))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        assert_eq!(solve(&d, &p).unwrap(), solve(&d, &p).unwrap());
    }

    #[test]
    fn state_cap_is_enforced() {
        let (d, p) = dp(
            "(define (domain d) (:predicates (a) (b) (g))
               (:action x :effect (oneof (a) (b) (not (a)))))",
            "(define (problem p) (:domain d) (:init) (:goal (and (g))))",
        );
        assert_eq!(solve_with(&d, &p, PlanOptions { state_cap: 2 }), Err(PlanError::StateLimit(2)));
    }
}
