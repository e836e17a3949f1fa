//! Arena form of an effect tree for fast repeated evaluation.

use dialplan_core::pddl::{Effect, NodePath};
use rand::Rng;

use crate::{draw, lognormal, SimError, StrategyKind};

enum Node {
    Leaf,
    And(Vec<usize>),
    /// Index among the tree's `oneof`s (pre-order) and children.
    OneOf(usize, Vec<usize>),
}

pub struct Tree {
    nodes: Vec<Node>,
    paths: Vec<NodePath>,
}

impl Tree {
    pub fn new(e: &Effect) -> Self {
        let mut t = Tree { nodes: Vec::new(), paths: Vec::new() };
        t.add(e, NodePath::root());
        t
    }

    fn add(&mut self, e: &Effect, path: NodePath) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf);
        let node = match e {
            Effect::Lit(_) => Node::Leaf,
            Effect::And(cs) => Node::And(cs.iter().enumerate().map(|(i, c)| self.add(c, path.child(i))).collect()),
            Effect::OneOf(o) => {
                let k = self.paths.len();
                self.paths.push(path.clone());
                Node::OneOf(k, o.outcomes.iter().enumerate().map(|(i, c)| self.add(&c.effect, path.child(i))).collect())
            }
        };
        self.nodes[id] = node;
        id
    }

    pub fn oneof_count(&self) -> usize {
        self.paths.len()
    }

    pub fn oneof_paths(&self) -> &[NodePath] {
        &self.paths
    }

    /// Times for all `oneof`s, then a top-down choice for the reached ones.
    pub fn sample(&self, rng: &mut impl Rng) -> (Vec<f64>, Vec<Option<usize>>) {
        let d = lognormal();
        let times: Vec<f64> = (0..self.paths.len()).map(|_| draw(&d, rng)).collect();
        let mut picks = vec![None; self.paths.len()];
        self.pick(0, rng, &mut picks);
        (times, picks)
    }

    fn pick(&self, n: usize, rng: &mut impl Rng, picks: &mut [Option<usize>]) {
        match &self.nodes[n] {
            Node::Leaf => {}
            Node::And(cs) => cs.iter().for_each(|&c| self.pick(c, rng, picks)),
            Node::OneOf(k, cs) => {
                let i = rng.random_range(0..cs.len());
                picks[*k] = Some(i);
                self.pick(cs[i], rng, picks);
            }
        }
    }

    pub fn total(&self, kind: StrategyKind, times: &[f64], picks: &[Option<usize>]) -> Result<f64, SimError> {
        match kind {
            StrategyKind::ParallelFlat => Ok(times.iter().fold(0.0, |a, &t| f64::max(a, t))),
            StrategyKind::SequentialFlat => Ok(times.iter().fold(0.0, |a, &t| a + t)),
            StrategyKind::ParallelNested => self.nested(0, times, picks, true),
            StrategyKind::SequentialNested => self.nested(0, times, picks, false),
        }
    }

    fn nested(&self, n: usize, times: &[f64], picks: &[Option<usize>], parallel: bool) -> Result<f64, SimError> {
        match &self.nodes[n] {
            Node::Leaf => Ok(0.0),
            Node::And(cs) => cs.iter().try_fold(0.0, |a, &c| {
                let x = self.nested(c, times, picks, parallel)?;
                Ok(if parallel { f64::max(a, x) } else { a + x })
            }),
            Node::OneOf(k, cs) => {
                let t = times[*k];
                if t.is_nan() {
                    return Err(SimError::MissingTime(self.paths[*k].clone()));
                }
                let i = picks[*k].ok_or_else(|| SimError::MissingChoice(self.paths[*k].clone()))?;
                Ok(t + self.nested(cs[i], times, picks, parallel)?)
            }
        }
    }
}
