//! Compiles numeric formulas over parent levels into table nodes.

use crate::diagram::{Node, NodeKind, State};
use crate::{Error, Result};

/// Computed values closer than this share one outcome state.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// Calls `f` with every parent configuration in table order (last parent
/// fastest).
pub(crate) fn for_each_config(cards: &[usize], mut f: impl FnMut(&[usize])) {
    if cards.contains(&0) {
        return;
    }
    let mut states = vec![0; cards.len()];
    loop {
        f(&states);
        let mut k = cards.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            states[k] += 1;
            if states[k] < cards[k] {
                break;
            }
            states[k] = 0;
        }
    }
}

fn evaluate(
    id: &str,
    parents: &[(&str, &[f64])],
    formula: impl Fn(&[f64]) -> f64,
) -> Result<Vec<f64>> {
    let cards: Vec<usize> = parents.iter().map(|(_, l)| l.len()).collect();
    let mut values = Vec::with_capacity(cards.iter().product());
    let mut bad = None;
    let mut args = vec![0.0; parents.len()];
    for_each_config(&cards, |states| {
        for (k, &s) in states.iter().enumerate() {
            args[k] = parents[k].1[s];
        }
        let v = formula(&args);
        if !v.is_finite() && bad.is_none() {
            bad = Some(v);
        }
        values.push(v);
    });
    if let Some(value) = bad {
        return Err(Error::BadFormulaValue {
            node: id.to_string(),
            value,
        });
    }
    Ok(values)
}

/// Renders a level as a state label: shortest round-trip decimal.
pub fn level_label(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

/// Builds a deterministic node whose outcome space is the sorted set of
/// distinct formula values (within [`DEDUP_TOLERANCE`]); each state's level
/// is its value.
///
/// `parents` pairs each parent id with the level used for each of its
/// states, in state order.
pub fn compile_formula_node(
    id: &str,
    parents: &[(&str, &[f64])],
    formula: impl Fn(&[f64]) -> f64,
) -> Result<Node> {
    let values = evaluate(id, parents, formula)?;
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut outcomes: Vec<f64> = Vec::new();
    for v in sorted {
        match outcomes.last() {
            Some(&rep) if v - rep <= DEDUP_TOLERANCE => {}
            _ => outcomes.push(v),
        }
    }
    let table = values
        .iter()
        .map(|&v| {
            // Last representative not above v + tol is v's group.
            outcomes.partition_point(|&rep| rep <= v + DEDUP_TOLERANCE) - 1
        })
        .collect();
    let states = outcomes
        .iter()
        .map(|&v| State::with_level(level_label(v), v))
        .collect();
    Ok(Node {
        id: id.to_string(),
        parents: parents.iter().map(|(p, _)| p.to_string()).collect(),
        states,
        kind: NodeKind::Deterministic { table },
    })
}

/// Builds the value node whose utility is `formula` of the parent levels.
pub fn compile_value_node(
    id: &str,
    parents: &[(&str, &[f64])],
    formula: impl Fn(&[f64]) -> f64,
) -> Result<Node> {
    let utilities = evaluate(id, parents, formula)?;
    Ok(Node {
        id: id.to_string(),
        parents: parents.iter().map(|(p, _)| p.to_string()).collect(),
        states: Vec::new(),
        kind: NodeKind::Value { utilities },
    })
}

/// Positions `0, 1, ..` as levels, for parents whose states are labels.
pub fn index_levels(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64).collect()
}
