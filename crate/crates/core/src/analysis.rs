//! Deterministic sensitivity (tornado) analysis, variance-share model
//! reduction and expected value of perfect information.

use std::cmp::Ordering;

use crate::diagram::{validate, InfluenceDiagram, Node};
use crate::eval::model::{Model, UNSET};
use crate::eval::{solve, Assignment};
use crate::formula::for_each_config;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TornadoEntry {
    pub variable: String,
    /// Utility with the variable at each of its states and every other
    /// chance variable at its base case.
    pub per_state_utilities: Vec<f64>,
    pub low: f64,
    pub high: f64,
    pub swing: f64,
    /// `swing^2 / sum(swing^2)`; 0 when every swing is 0.
    pub share: f64,
    pub cumulative_share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TornadoReport {
    pub decision_assignment: Assignment,
    /// Utility with every chance variable at its base case.
    pub base_utility: f64,
    /// Sorted by swing descending, ties by variable id.
    pub entries: Vec<TornadoEntry>,
}

impl TornadoReport {
    pub fn entry(&self, variable: &str) -> Option<&TornadoEntry> {
        self.entries.iter().find(|e| e.variable == variable)
    }
}

/// Resolves deterministic nodes in topological order and reads the value
/// node. `asg` must already hold every chance and decision state.
fn resolve_utility(model: &Model, asg: &mut [usize]) -> f64 {
    for &node in &model.topo {
        if model.is_det(node) {
            asg[node] = model.resolve(node, asg);
        }
    }
    model.utility(asg)
}

fn dense_inputs(
    model: &Model,
    decisions: &Assignment,
    chance: Option<&Assignment>,
) -> Result<Vec<usize>> {
    let mut asg = model.dense(decisions)?;
    for (i, &s) in asg.iter().enumerate() {
        if s != UNSET && !model.is_decision(i) {
            return Err(Error::WrongKind {
                id: model.ids[i].clone(),
                expected: "decision",
            });
        }
    }
    if let Some(chance) = chance {
        let c = model.dense(chance)?;
        for (i, &s) in c.iter().enumerate() {
            if s != UNSET {
                if !model.is_chance(i) {
                    return Err(Error::WrongKind {
                        id: model.ids[i].clone(),
                        expected: "chance",
                    });
                }
                asg[i] = s;
            }
        }
    }
    Ok(asg)
}

fn require_total(model: &Model, asg: &[usize], check: impl Fn(usize) -> bool) -> Result<()> {
    let missing: Vec<String> = (0..model.len())
        .filter(|&i| check(i) && asg[i] == UNSET)
        .map(|i| model.ids[i].clone())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::PartialAssignment(missing))
    }
}

/// Value-node utility with every chance and decision variable pinned; no
/// probabilities are involved.
pub fn deterministic_utility(
    diagram: &InfluenceDiagram,
    decisions: &Assignment,
    chance: &Assignment,
) -> Result<f64> {
    let model = Model::compile(diagram)?;
    let mut asg = dense_inputs(&model, decisions, Some(chance))?;
    require_total(&model, &asg, |i| model.is_chance(i) || model.is_decision(i))?;
    Ok(resolve_utility(&model, &mut asg))
}

/// Sweeps each chance variable over all of its states with the others at
/// their base case, for one fixed combination of decision alternatives.
pub fn tornado(diagram: &InfluenceDiagram, decisions: &Assignment) -> Result<TornadoReport> {
    let model = Model::compile(diagram)?;
    let mut base = dense_inputs(&model, decisions, None)?;
    require_total(&model, &base, |i| model.is_decision(i))?;
    for (id, &s) in diagram.base_case() {
        base[model.index(id)?] = s;
    }
    let base_utility = resolve_utility(&model, &mut base.clone());

    let mut entries: Vec<TornadoEntry> = (0..model.len())
        .filter(|&i| model.is_chance(i))
        .map(|x| {
            let per_state_utilities: Vec<f64> = (0..model.card[x])
                .map(|s| {
                    let mut asg = base.clone();
                    asg[x] = s;
                    resolve_utility(&model, &mut asg)
                })
                .collect();
            let low = per_state_utilities
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let high = per_state_utilities
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            TornadoEntry {
                variable: model.ids[x].clone(),
                per_state_utilities,
                low,
                high,
                swing: high - low,
                share: 0.0,
                cumulative_share: 0.0,
            }
        })
        .collect();
    entries.sort_by(|a, b| match b.swing.total_cmp(&a.swing) {
        Ordering::Equal => a.variable.cmp(&b.variable),
        other => other,
    });

    // Summing in sorted order makes the last positive entry's cumulative
    // share exactly 1.
    let total: f64 = entries.iter().map(|e| e.swing * e.swing).sum();
    if total > 0.0 {
        let mut running = 0.0;
        for e in &mut entries {
            let sq = e.swing * e.swing;
            running += sq;
            e.share = sq / total;
            e.cumulative_share = running / total;
        }
    }
    Ok(TornadoReport {
        decision_assignment: decisions.clone(),
        base_utility,
        entries,
    })
}

/// Every combination of decision alternatives, last decision fastest.
pub fn decision_combinations(diagram: &InfluenceDiagram) -> Vec<Assignment> {
    let decisions = diagram.decisions();
    let cards: Vec<usize> = decisions.iter().map(|d| d.states.len()).collect();
    let mut out = Vec::new();
    for_each_config(&cards, |states| {
        out.push(
            decisions
                .iter()
                .zip(states)
                .map(|(d, &s)| (d.id.clone(), s))
                .collect(),
        );
    });
    out
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub diagram: InfluenceDiagram,
    /// Variables replaced by constants at their base case, in tornado order.
    pub fixed: Vec<String>,
    pub report: TornadoReport,
}

/// Keeps the smallest tornado prefix whose cumulative share reaches
/// `threshold` and turns every other chance variable into a constant at
/// its base-case state.
pub fn fix_below_threshold(
    diagram: &InfluenceDiagram,
    threshold: f64,
    decisions: &Assignment,
) -> Result<Reduction> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::BadThreshold(threshold));
    }
    let report = tornado(diagram, decisions)?;
    let keep = report
        .entries
        .iter()
        .position(|e| e.cumulative_share >= threshold)
        .map_or(0, |p| p + 1);
    let fixed: Vec<String> = report.entries[keep..]
        .iter()
        .map(|e| e.variable.clone())
        .collect();
    let mut reduced = diagram.clone();
    for id in &fixed {
        let base = diagram.base_case()[id];
        reduced = reduced.with_chance_fixed(id, base)?;
    }
    Ok(Reduction {
        diagram: reduced,
        fixed,
        report,
    })
}

/// Adds `variable` to the information set of `decision` and of every later
/// decision (keeping no-forgetting intact).
pub fn add_information_arc(
    diagram: &InfluenceDiagram,
    variable: &str,
    decision: &str,
) -> Result<InfluenceDiagram> {
    let var = diagram
        .node(variable)
        .ok_or_else(|| Error::UnknownNode(variable.to_string()))?;
    if !var.is_chance() {
        return Err(Error::WrongKind {
            id: variable.to_string(),
            expected: "chance",
        });
    }
    let target = diagram
        .node(decision)
        .ok_or_else(|| Error::UnknownNode(decision.to_string()))?;
    let order = target.decision_order().ok_or_else(|| Error::WrongKind {
        id: decision.to_string(),
        expected: "decision",
    })?;
    let nodes: Vec<Node> = diagram
        .nodes()
        .iter()
        .cloned()
        .map(|mut n| {
            if n.decision_order().is_some_and(|o| o >= order)
                && !n.parents.iter().any(|p| p == variable)
            {
                n.parents.push(variable.to_string());
            }
            n
        })
        .collect();
    let augmented = InfluenceDiagram::new(nodes, diagram.base_case().clone());
    if !validate(&augmented).is_ok() {
        return Err(Error::AcausalInfo {
            variable: variable.to_string(),
            decision: decision.to_string(),
        });
    }
    Ok(augmented)
}

/// Expected value of perfect information: the gain in maximum expected
/// utility from observing `variable` before `decision`.
pub fn evpi(diagram: &InfluenceDiagram, variable: &str, decision: &str) -> Result<f64> {
    let report = validate(diagram);
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }
    let augmented = add_information_arc(diagram, variable, decision)?;
    if augmented == *diagram {
        return Ok(0.0);
    }
    Ok(solve(&augmented)?.meu - solve(diagram)?.meu)
}
