use std::collections::HashSet;

use super::validate::topological_order;
use super::{validate, InfluenceDiagram, Node};
use crate::{Error, Result};

/// One step of the alternating observe/decide sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    /// Variables first revealed to the next decision.
    Observed(Vec<String>),
    Decide(String),
    /// Variables never observed by any decision.
    Trailing(Vec<String>),
}

/// Partitions the non-value nodes into `I1, D1, I2, D2, ..., Dn, T`.
///
/// `Ik` holds the members of `info(Dk)` not already known at `Dk-1`; `T`
/// holds everything else. Nodes inside a stage follow topological order.
pub fn stage_partition(diagram: &InfluenceDiagram) -> Result<Vec<Stage>> {
    let report = validate(diagram);
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }
    let topo = topological_order(diagram);
    let rank: Vec<usize> = {
        let mut rank = vec![0; topo.len()];
        for (r, &i) in topo.iter().enumerate() {
            rank[i] = r;
        }
        rank
    };
    let sorted = |mut ids: Vec<String>| {
        ids.sort_by_key(|id| rank[diagram.index_of(id).expect("validated")]);
        ids
    };

    let mut placed: HashSet<&str> = HashSet::new();
    let mut stages = Vec::new();
    for decision in diagram.decisions() {
        let fresh: Vec<String> = decision
            .parents
            .iter()
            .filter(|p| !placed.contains(p.as_str()))
            .cloned()
            .collect();
        for p in &decision.parents {
            placed.insert(p);
        }
        placed.insert(&decision.id);
        stages.push(Stage::Observed(sorted(fresh)));
        stages.push(Stage::Decide(decision.id.clone()));
    }
    let rest: Vec<String> = diagram
        .nodes()
        .iter()
        .filter(|n| !n.is_value() && !placed.contains(n.id.as_str()))
        .map(|n| n.id.clone())
        .collect();
    stages.push(Stage::Trailing(sorted(rest)));
    Ok(stages)
}

/// Repeatedly removes non-value nodes without outgoing arcs (parent arcs
/// and information arcs both count). Such nodes cannot influence the value
/// node, so the maximum expected utility is unchanged.
pub fn barren_prune(diagram: &InfluenceDiagram) -> InfluenceDiagram {
    let mut current = diagram.clone();
    loop {
        let barren: HashSet<String> = current
            .nodes()
            .iter()
            .filter(|n| !n.is_value() && current.children(&n.id).is_empty())
            .map(|n| n.id.clone())
            .collect();
        if barren.is_empty() {
            return current;
        }
        let (nodes, mut base_case) = current.into_parts();
        let nodes: Vec<Node> = nodes
            .into_iter()
            .filter(|n| !barren.contains(&n.id))
            .collect();
        base_case.retain(|id, _| !barren.contains(id));
        current = InfluenceDiagram::new(nodes, base_case);
    }
}
