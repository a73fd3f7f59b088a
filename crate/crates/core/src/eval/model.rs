//! Dense, index-based form of a validated diagram used by every evaluator.

use crate::diagram::{validate, InfluenceDiagram, NodeKind};
use crate::eval::Assignment;
use crate::{Error, Result};

pub(crate) const UNSET: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    /// Flattened renormalized CPT: `rows[config * card + state]`.
    Chance(Vec<f64>),
    Det(Vec<usize>),
    Decision,
    Value(Vec<f64>),
}

#[derive(Debug, Clone)]
pub(crate) struct Model {
    pub ids: Vec<String>,
    pub card: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub kind: Vec<Kind>,
    pub topo: Vec<usize>,
    pub value: usize,
}

impl Model {
    pub fn compile(diagram: &InfluenceDiagram) -> Result<Model> {
        let report = validate(diagram);
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        Ok(Self::compile_unchecked(diagram))
    }

    /// Assumes arcs resolve, the graph is acyclic and tables are well
    /// shaped; only the base case may be incomplete.
    pub fn compile_unchecked(diagram: &InfluenceDiagram) -> Model {
        let nodes = diagram.nodes();
        let ids = nodes.iter().map(|n| n.id.clone()).collect();
        let card = nodes.iter().map(|n| n.states.len()).collect();
        let parents = nodes
            .iter()
            .map(|n| {
                n.parents
                    .iter()
                    .map(|p| diagram.index_of(p).expect("arc resolves"))
                    .collect()
            })
            .collect();
        let kind = nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Chance { cpt } => {
                    let mut flat = Vec::with_capacity(cpt.len() * n.states.len());
                    for row in cpt {
                        let sum: f64 = row.iter().sum();
                        flat.extend(row.iter().map(|p| p / sum));
                    }
                    Kind::Chance(flat)
                }
                NodeKind::Deterministic { table } => Kind::Det(table.clone()),
                NodeKind::Decision { .. } => Kind::Decision,
                NodeKind::Value { utilities } => Kind::Value(utilities.clone()),
            })
            .collect();
        let topo = crate::diagram::topological_order(diagram);
        let value = nodes
            .iter()
            .position(|n| n.is_value())
            .unwrap_or(usize::MAX);
        Model {
            ids,
            card,
            parents,
            kind,
            topo,
            value,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Row index of `node`'s table under the parent states in `asg`.
    #[inline]
    pub fn config(&self, node: usize, asg: &[usize]) -> usize {
        self.parents[node]
            .iter()
            .fold(0, |acc, &p| acc * self.card[p] + asg[p])
    }

    /// Probability (chance) or consistency indicator (deterministic) of
    /// `node`'s assigned state given its parents.
    #[inline]
    pub fn factor(&self, node: usize, asg: &[usize]) -> f64 {
        match &self.kind[node] {
            Kind::Chance(rows) => rows[self.config(node, asg) * self.card[node] + asg[node]],
            Kind::Det(table) => {
                if table[self.config(node, asg)] == asg[node] {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 1.0,
        }
    }

    #[inline]
    pub fn resolve(&self, node: usize, asg: &[usize]) -> usize {
        match &self.kind[node] {
            Kind::Det(table) => table[self.config(node, asg)],
            _ => unreachable!("resolve on non-deterministic node"),
        }
    }

    pub fn row(&self, node: usize, asg: &[usize]) -> &[f64] {
        match &self.kind[node] {
            Kind::Chance(rows) => {
                let c = self.card[node];
                let start = self.config(node, asg) * c;
                &rows[start..start + c]
            }
            _ => unreachable!("row on non-chance node"),
        }
    }

    #[inline]
    pub fn utility(&self, asg: &[usize]) -> f64 {
        match &self.kind[self.value] {
            Kind::Value(table) => table[self.config(self.value, asg)],
            _ => unreachable!("value node"),
        }
    }

    pub fn is_chance(&self, node: usize) -> bool {
        matches!(self.kind[node], Kind::Chance(_))
    }

    pub fn is_det(&self, node: usize) -> bool {
        matches!(self.kind[node], Kind::Det(_))
    }

    pub fn is_decision(&self, node: usize) -> bool {
        matches!(self.kind[node], Kind::Decision)
    }

    pub fn index(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Dense vector for `asg`, `UNSET` where unassigned.
    pub fn dense(&self, asg: &Assignment) -> Result<Vec<usize>> {
        let mut out = vec![UNSET; self.len()];
        for (id, &state) in asg.iter() {
            let i = self.index(id)?;
            if state >= self.card[i] {
                return Err(Error::StateOutOfRange {
                    node: id.clone(),
                    index: state,
                });
            }
            out[i] = state;
        }
        Ok(out)
    }

    /// All nodes in `targets` plus their ancestors, in topological order.
    pub fn ancestral_closure(&self, targets: &[usize]) -> Vec<usize> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.to_vec();
        while let Some(i) = stack.pop() {
            if !keep[i] {
                keep[i] = true;
                stack.extend(self.parents[i].iter().copied());
            }
        }
        self.topo.iter().copied().filter(|&i| keep[i]).collect()
    }

    pub fn labels(&self, diagram: &InfluenceDiagram, nodes: &[usize], states: &[usize]) -> String {
        nodes
            .iter()
            .zip(states)
            .map(|(&n, &s)| format!("{}={}", self.ids[n], diagram.nodes()[n].states[s].label))
            .collect::<Vec<_>>()
            .join(",")
    }
}
