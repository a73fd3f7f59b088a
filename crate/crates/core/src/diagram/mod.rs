//! Influence-diagram data model.
//!
//! A diagram holds chance, deterministic, decision and value nodes in
//! declaration order. Every node lists its incoming arcs in `parents`; for a
//! decision node those arcs are its information arcs (the nodes known when
//! the decision is made).
//!
//! Tables are indexed row-major over parent configurations in declared
//! parent order, last parent varying fastest.

mod stages;
mod validate;

use std::collections::{BTreeMap, HashMap};

pub use self::stages::{barren_prune, stage_partition, Stage};
pub(crate) use self::validate::topological_order;
pub use self::validate::{validate, Issue, IssueCode, ValidationReport, ROW_SUM_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub label: String,
    /// Physical magnitude carried by the state, used by formula nodes and
    /// reports.
    pub level: Option<f64>,
}

impl State {
    pub fn new(label: impl Into<String>) -> Self {
        State {
            label: label.into(),
            level: None,
        }
    }

    pub fn with_level(label: impl Into<String>, level: f64) -> Self {
        State {
            label: label.into(),
            level: Some(level),
        }
    }
}

/// Unlevelled states from a list of labels.
pub fn states(labels: &[&str]) -> Vec<State> {
    labels.iter().map(|l| State::new(*l)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// One probability row per parent configuration.
    Chance { cpt: Vec<Vec<f64>> },
    /// One state index per parent configuration.
    Deterministic { table: Vec<usize> },
    /// Rank among decisions; lower ranks are made first.
    Decision { order: u32 },
    /// One utility per parent configuration (maximized).
    Value { utilities: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub parents: Vec<String>,
    pub states: Vec<State>,
    pub kind: NodeKind,
}

impl Node {
    pub fn chance(
        id: impl Into<String>,
        parents: &[&str],
        states: Vec<State>,
        cpt: Vec<Vec<f64>>,
    ) -> Self {
        Node {
            id: id.into(),
            parents: to_ids(parents),
            states,
            kind: NodeKind::Chance { cpt },
        }
    }

    pub fn deterministic(
        id: impl Into<String>,
        parents: &[&str],
        states: Vec<State>,
        table: Vec<usize>,
    ) -> Self {
        Node {
            id: id.into(),
            parents: to_ids(parents),
            states,
            kind: NodeKind::Deterministic { table },
        }
    }

    pub fn decision(
        id: impl Into<String>,
        alternatives: Vec<State>,
        order: u32,
        info: &[&str],
    ) -> Self {
        Node {
            id: id.into(),
            parents: to_ids(info),
            states: alternatives,
            kind: NodeKind::Decision { order },
        }
    }

    pub fn value(id: impl Into<String>, parents: &[&str], utilities: Vec<f64>) -> Self {
        Node {
            id: id.into(),
            parents: to_ids(parents),
            states: Vec::new(),
            kind: NodeKind::Value { utilities },
        }
    }

    pub fn is_chance(&self) -> bool {
        matches!(self.kind, NodeKind::Chance { .. })
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, NodeKind::Deterministic { .. })
    }

    pub fn is_decision(&self) -> bool {
        matches!(self.kind, NodeKind::Decision { .. })
    }

    pub fn is_value(&self) -> bool {
        matches!(self.kind, NodeKind::Value { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            NodeKind::Chance { .. } => "chance",
            NodeKind::Deterministic { .. } => "deterministic",
            NodeKind::Decision { .. } => "decision",
            NodeKind::Value { .. } => "value",
        }
    }

    pub fn decision_order(&self) -> Option<u32> {
        match self.kind {
            NodeKind::Decision { order } => Some(order),
            _ => None,
        }
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s.label == label)
    }

    pub fn levels(&self) -> Option<Vec<f64>> {
        self.states.iter().map(|s| s.level).collect()
    }
}

fn to_ids(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

/// A (not necessarily valid) influence diagram. Run [`validate`] before
/// handing it to the evaluation functions; they re-validate and refuse
/// invalid input.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceDiagram {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    base_case: BTreeMap<String, usize>,
}

impl InfluenceDiagram {
    pub fn new(nodes: Vec<Node>, base_case: BTreeMap<String, usize>) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            index.entry(node.id.clone()).or_insert(i);
        }
        InfluenceDiagram {
            nodes,
            index,
            base_case,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn base_case(&self) -> &BTreeMap<String, usize> {
        &self.base_case
    }

    pub fn into_parts(self) -> (Vec<Node>, BTreeMap<String, usize>) {
        (self.nodes, self.base_case)
    }

    pub fn chance_ids(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.is_chance())
            .map(|n| n.id.as_str())
            .collect()
    }

    /// Decision nodes sorted by their order rank.
    pub fn decisions(&self) -> Vec<&Node> {
        let mut out: Vec<&Node> = self.nodes.iter().filter(|n| n.is_decision()).collect();
        out.sort_by_key(|n| n.decision_order());
        out
    }

    pub fn value_node(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.is_value())
    }

    /// Node ids that list `id` as a parent or as an information arc.
    pub fn children(&self, id: &str) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.parents.iter().any(|p| p == id))
            .map(|n| n.id.as_str())
            .collect()
    }

    /// Returns a copy with `base_case` entries for every chance node that
    /// lacks one: the mode of the variable's prior marginal, ties broken by
    /// lowest state index. Decisions upstream of the variable are weighted
    /// uniformly when forming the marginal.
    pub fn with_default_base_case(mut self) -> Self {
        let missing: Vec<usize> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_chance() && !self.base_case.contains_key(&n.id))
            .map(|(i, _)| i)
            .collect();
        if missing.is_empty() {
            return self;
        }
        let structural_ok = validate(&self)
            .errors
            .iter()
            .all(|issue| issue.code == IssueCode::MissingBaseCase);
        for i in missing {
            let state = if structural_ok {
                crate::eval::prior_marginal(&self, i)
                    .map(|m| mode(&m))
                    .unwrap_or(0)
            } else {
                0
            };
            let id = self.nodes[i].id.clone();
            self.base_case.insert(id, state);
        }
        self
    }

    /// Returns a copy where decision `id` is replaced by a deterministic
    /// constant at `alternative`. Downstream tables and information sets
    /// keep their signatures.
    pub fn with_decision_fixed(&self, id: &str, alternative: usize) -> crate::Result<Self> {
        let idx = self
            .index_of(id)
            .ok_or_else(|| crate::Error::UnknownNode(id.to_string()))?;
        let node = &self.nodes[idx];
        if !node.is_decision() {
            return Err(crate::Error::WrongKind {
                id: id.to_string(),
                expected: "decision",
            });
        }
        if alternative >= node.states.len() {
            return Err(crate::Error::StateOutOfRange {
                node: id.to_string(),
                index: alternative,
            });
        }
        let mut nodes = self.nodes.clone();
        nodes[idx] = Node {
            id: node.id.clone(),
            parents: Vec::new(),
            states: node.states.clone(),
            kind: NodeKind::Deterministic {
                table: vec![alternative],
            },
        };
        Ok(InfluenceDiagram::new(nodes, self.base_case.clone()))
    }

    /// Returns a copy where chance node `id` becomes a parentless
    /// deterministic constant at `state`.
    pub fn with_chance_fixed(&self, id: &str, state: usize) -> crate::Result<Self> {
        let idx = self
            .index_of(id)
            .ok_or_else(|| crate::Error::UnknownNode(id.to_string()))?;
        let node = &self.nodes[idx];
        if !node.is_chance() {
            return Err(crate::Error::WrongKind {
                id: id.to_string(),
                expected: "chance",
            });
        }
        if state >= node.states.len() {
            return Err(crate::Error::StateOutOfRange {
                node: id.to_string(),
                index: state,
            });
        }
        let mut nodes = self.nodes.clone();
        nodes[idx] = Node {
            id: node.id.clone(),
            parents: Vec::new(),
            states: node.states.clone(),
            kind: NodeKind::Deterministic { table: vec![state] },
        };
        let mut base_case = self.base_case.clone();
        base_case.remove(id);
        Ok(InfluenceDiagram::new(nodes, base_case))
    }

    /// Returns a copy whose decisions satisfy no-forgetting: every decision
    /// additionally observes all earlier decisions and everything they
    /// observed. Off unless called explicitly.
    pub fn with_no_forgetting_closure(&self) -> Self {
        let mut nodes = self.nodes.clone();
        let mut order: Vec<usize> = (0..nodes.len())
            .filter(|&i| nodes[i].is_decision())
            .collect();
        order.sort_by_key(|&i| nodes[i].decision_order());
        let mut known: Vec<String> = Vec::new();
        for &i in &order {
            for id in &known {
                if !nodes[i].parents.contains(id) {
                    nodes[i].parents.push(id.clone());
                }
            }
            for p in nodes[i].parents.clone() {
                if !known.contains(&p) {
                    known.push(p);
                }
            }
            known.push(nodes[i].id.clone());
        }
        InfluenceDiagram::new(nodes, self.base_case.clone())
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn mode(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Incremental construction of an [`InfluenceDiagram`]; base-case states
/// not set explicitly default to the prior mode.
#[derive(Debug, Default)]
pub struct DiagramBuilder {
    nodes: Vec<Node>,
    base_case: BTreeMap<String, usize>,
}

impl DiagramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, node: Node) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn chance(self, id: &str, labels: &[&str], parents: &[&str], cpt: Vec<Vec<f64>>) -> Self {
        self.node(Node::chance(id, parents, states(labels), cpt))
    }

    pub fn deterministic(
        self,
        id: &str,
        labels: &[&str],
        parents: &[&str],
        table: Vec<usize>,
    ) -> Self {
        self.node(Node::deterministic(id, parents, states(labels), table))
    }

    pub fn decision(self, id: &str, labels: &[&str], order: u32, info: &[&str]) -> Self {
        self.node(Node::decision(id, states(labels), order, info))
    }

    pub fn value(self, id: &str, parents: &[&str], utilities: Vec<f64>) -> Self {
        self.node(Node::value(id, parents, utilities))
    }

    pub fn base(mut self, id: &str, state: usize) -> Self {
        self.base_case.insert(id.to_string(), state);
        self
    }

    pub fn build(self) -> InfluenceDiagram {
        InfluenceDiagram::new(self.nodes, self.base_case).with_default_base_case()
    }

    /// Builds without filling in missing base-case entries.
    pub fn build_raw(self) -> InfluenceDiagram {
        InfluenceDiagram::new(self.nodes, self.base_case)
    }
}

/// Number of rows a table over `parents` needs, or `None` when a parent is
/// unknown or has no states.
pub(crate) fn config_count(diagram: &InfluenceDiagram, parents: &[String]) -> Option<usize> {
    parents.iter().try_fold(1usize, |acc, p| {
        let card = diagram.node(p)?.states.len();
        if card == 0 {
            None
        } else {
            acc.checked_mul(card)
        }
    })
}
