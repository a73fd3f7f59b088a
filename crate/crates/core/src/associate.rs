//! Builder for the generic associate consult/act influence diagram.
//!
//! The associate observes the world imperfectly (`AssocObs`), decides
//! whether to `Consult` the human, then picks an `Action`. The human's own
//! observation only reaches the associate through the deterministic
//! `Report` node, which equals `HumanObs` when consulted and the sentinel
//! state `no-report` otherwise. This keeps the diagram symmetric while the
//! observation itself is contingent on the consult decision.

use crate::diagram::{validate, InfluenceDiagram, Issue, IssueCode, Node, State, ValidationReport};
use crate::eval::{solve_with, SolveOptions};
use crate::formula::{compile_formula_node, compile_value_node, index_levels};
use crate::{Error, Result};

pub const WORLD: &str = "World";
pub const ASSOC_OBS: &str = "AssocObs";
pub const HUMAN_OBS: &str = "HumanObs";
pub const CONSULT: &str = "Consult";
pub const REPORT: &str = "Report";
pub const SITUATION: &str = "Situation";
pub const ACTION: &str = "Action";
pub const OUTCOME: &str = "Outcome";
pub const ACT_COST: &str = "ActCost";
pub const CONS_COST: &str = "ConsCost";
pub const VALUE: &str = "Value";

/// Label of the `Report` state meaning "the human was not consulted".
pub const NO_REPORT: &str = "no-report";

/// `Consult` alternatives, in index order.
pub const CONSULT_NO: usize = 0;
pub const CONSULT_YES: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct AssociateSpec {
    pub world_states: Vec<State>,
    pub world_prior: Vec<f64>,
    pub assoc_obs_states: Vec<State>,
    /// `P(AssocObs | World)`, one row per world state.
    pub assoc_channel: Vec<Vec<f64>>,
    pub human_obs_states: Vec<State>,
    /// `P(HumanObs | World)`, one row per world state.
    pub human_channel: Vec<Vec<f64>>,
    pub situation_states: Vec<State>,
    /// Situation index per (AssocObs, Report); Report has the human
    /// observation states followed by `no-report`.
    pub fusion: Vec<usize>,
    pub action_alternatives: Vec<State>,
    pub outcome_states: Vec<State>,
    /// `P(Outcome | Action, World)`.
    pub outcome_model: Vec<Vec<f64>>,
    /// Cost per (Action, World).
    pub act_cost: Vec<f64>,
    /// Cost per (Consult, World); the `no` half must be zero.
    pub cons_cost: Vec<f64>,
    /// Utility of each outcome before costs. The value node is
    /// `outcome_value[Outcome] - ActCost - ConsCost`.
    pub outcome_value: Vec<f64>,
}

fn shape_error(node: &str, message: String) -> Error {
    Error::Invalid(ValidationReport {
        errors: vec![Issue {
            code: IssueCode::MissingRow,
            node: node.to_string(),
            message,
        }],
        warnings: Vec::new(),
    })
}

/// Emits the template diagram: `Consult` (order 1) observes `AssocObs`;
/// `Action` (order 2) observes `AssocObs`, `Consult`, `Report` and
/// `Situation`.
pub fn build_associate_diagram(spec: &AssociateSpec) -> Result<InfluenceDiagram> {
    let n_world = spec.world_states.len();
    let n_action = spec.action_alternatives.len();
    let n_human = spec.human_obs_states.len();

    if spec.cons_cost.len() != 2 * n_world {
        return Err(shape_error(
            CONS_COST,
            format!("cons_cost needs {} entries", 2 * n_world),
        ));
    }
    if let Some(w) = spec.cons_cost[..n_world].iter().position(|&c| c != 0.0) {
        return Err(Error::BadConsCost(format!(
            "world state `{}` has cost {} without consulting",
            spec.world_states[w].label, spec.cons_cost[w]
        )));
    }
    if spec.act_cost.len() != n_action * n_world {
        return Err(shape_error(
            ACT_COST,
            format!("act_cost needs {} entries", n_action * n_world),
        ));
    }
    if spec.outcome_value.len() != spec.outcome_states.len() {
        return Err(shape_error(
            VALUE,
            format!("outcome_value needs {} entries", spec.outcome_states.len()),
        ));
    }

    let mut report_states = spec.human_obs_states.clone();
    report_states.push(State::new(NO_REPORT));
    let report_table: Vec<usize> = (0..n_human).map(|_| n_human).chain(0..n_human).collect();

    let world_idx = index_levels(n_world);
    let act_cost = compile_formula_node(
        ACT_COST,
        &[(ACTION, &index_levels(n_action)), (WORLD, &world_idx)],
        |x| spec.act_cost[x[0] as usize * n_world + x[1] as usize],
    )?;
    let cons_cost = compile_formula_node(
        CONS_COST,
        &[(CONSULT, &index_levels(2)), (WORLD, &world_idx)],
        |x| spec.cons_cost[x[0] as usize * n_world + x[1] as usize],
    )?;
    let act_levels = act_cost.levels().expect("formula nodes carry levels");
    let cons_levels = cons_cost.levels().expect("formula nodes carry levels");
    let value = compile_value_node(
        VALUE,
        &[
            (OUTCOME, &index_levels(spec.outcome_states.len())),
            (ACT_COST, &act_levels),
            (CONS_COST, &cons_levels),
        ],
        |x| spec.outcome_value[x[0] as usize] - x[1] - x[2],
    )?;

    let nodes = vec![
        Node::chance(
            WORLD,
            &[],
            spec.world_states.clone(),
            vec![spec.world_prior.clone()],
        ),
        Node::chance(
            ASSOC_OBS,
            &[WORLD],
            spec.assoc_obs_states.clone(),
            spec.assoc_channel.clone(),
        ),
        Node::chance(
            HUMAN_OBS,
            &[WORLD],
            spec.human_obs_states.clone(),
            spec.human_channel.clone(),
        ),
        Node::decision(
            CONSULT,
            vec![State::new("no"), State::new("yes")],
            1,
            &[ASSOC_OBS],
        ),
        Node::deterministic(REPORT, &[CONSULT, HUMAN_OBS], report_states, report_table),
        Node::deterministic(
            SITUATION,
            &[ASSOC_OBS, REPORT],
            spec.situation_states.clone(),
            spec.fusion.clone(),
        ),
        Node::decision(
            ACTION,
            spec.action_alternatives.clone(),
            2,
            &[ASSOC_OBS, CONSULT, REPORT, SITUATION],
        ),
        Node::chance(
            OUTCOME,
            &[ACTION, WORLD],
            spec.outcome_states.clone(),
            spec.outcome_model.clone(),
        ),
        act_cost,
        cons_cost,
        value,
    ];
    let diagram = InfluenceDiagram::new(nodes, Default::default()).with_default_base_case();
    let report = validate(&diagram);
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }
    Ok(diagram)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsultDelta {
    /// The `Consult` information state as (variable, state label) pairs.
    pub info: Vec<(String, String)>,
    pub probability: f64,
    /// `EU(consult) - EU(don't)` given the information state, with optimal
    /// play afterwards; `None` for states of probability zero.
    pub delta: Option<f64>,
}

/// Per associate observation, how much consulting is worth.
pub fn consultation_delta(spec: &AssociateSpec) -> Result<Vec<ConsultDelta>> {
    consult_deltas(&build_associate_diagram(spec)?)
}

/// Consultation deltas for any diagram with a two-alternative `Consult`
/// decision (`no`, `yes`).
pub fn consult_deltas(diagram: &InfluenceDiagram) -> Result<Vec<ConsultDelta>> {
    let node = diagram
        .node(CONSULT)
        .ok_or_else(|| Error::UnknownNode(CONSULT.to_string()))?;
    if !node.is_decision() || node.states.len() != 2 {
        return Err(Error::WrongKind {
            id: CONSULT.to_string(),
            expected: "two-alternative decision",
        });
    }
    let solution = solve_with(diagram, &SolveOptions::default())?;
    let values = solution.values_for(CONSULT).expect("Consult is a decision");
    let rule = solution
        .policy
        .rule(CONSULT)
        .expect("Consult is a decision");
    Ok((0..rule.state_count())
        .map(|i| {
            let info = rule
                .info
                .iter()
                .zip(rule.decode(i))
                .map(|(v, s)| {
                    let label = diagram.node(v).expect("validated").states[s].label.clone();
                    (v.clone(), label)
                })
                .collect();
            let mass = values.mass[i];
            ConsultDelta {
                info,
                probability: mass,
                delta: (mass > 0.0)
                    .then(|| values.values[i][CONSULT_YES] - values.values[i][CONSULT_NO]),
            }
        })
        .collect())
}

/// A two-state world with symmetric channels of the given accuracy, two
/// actions that each suit one world state, and a flat consultation cost.
/// Situation follows the human report when present, else the associate.
pub fn symmetric_spec(
    prior: f64,
    assoc_accuracy: f64,
    human_accuracy: f64,
    consult_cost: f64,
) -> AssociateSpec {
    let channel = |a: f64| vec![vec![a, 1.0 - a], vec![1.0 - a, a]];
    // Report index 2 is no-report.
    let fusion = vec![0, 1, 0, 0, 1, 1];
    AssociateSpec {
        world_states: crate::diagram::states(&["w0", "w1"]),
        world_prior: vec![prior, 1.0 - prior],
        assoc_obs_states: crate::diagram::states(&["a0", "a1"]),
        assoc_channel: channel(assoc_accuracy),
        human_obs_states: crate::diagram::states(&["h0", "h1"]),
        human_channel: channel(human_accuracy),
        situation_states: crate::diagram::states(&["s0", "s1"]),
        fusion,
        action_alternatives: crate::diagram::states(&["act0", "act1"]),
        outcome_states: crate::diagram::states(&["success", "failure"]),
        outcome_model: vec![
            vec![0.95, 0.05],
            vec![0.1, 0.9],
            vec![0.1, 0.9],
            vec![0.95, 0.05],
        ],
        act_cost: vec![1.0, 1.0, 2.0, 2.0],
        cons_cost: vec![0.0, 0.0, consult_cost, consult_cost],
        outcome_value: vec![100.0, 0.0],
    }
}
