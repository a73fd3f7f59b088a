//! Backward-induction rollback over the stage partition.
//!
//! Nodes are visited in the order `I1, D1, I2, ..., Dn, T`. Chance stages
//! sum probability-weighted subtrees, decision stages take the best
//! alternative per information state. Because every subtree returns its
//! unnormalized (mass, mass * utility) pair, dividing by the mass at a
//! decision gives the conditional expected utility of each alternative
//! without a separate posterior pass. Each CPT or deterministic-consistency
//! factor is multiplied in at the step where its last variable is assigned.

use crate::diagram::{stage_partition, InfluenceDiagram, Stage};
use crate::eval::model::{Model, UNSET};
use crate::eval::{DecisionRule, Policy};
use crate::{Error, Result};

pub const DEFAULT_JOINT_CAP: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Largest enumeration (product of branching factors) attempted.
    pub joint_cap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            joint_cap: DEFAULT_JOINT_CAP,
        }
    }
}

/// Conditional expected utility of each alternative per information state,
/// assuming optimal play afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionValues {
    pub decision: String,
    /// Probability of each information state (decisions held at the values
    /// in the state).
    pub mass: Vec<f64>,
    /// `values[state][alternative]`; empty for unreachable states.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub policy: Policy,
    pub values: Vec<DecisionValues>,
    /// Number of branches the rollback enumerates.
    pub joint_size: f64,
}

impl Solution {
    pub fn values_for(&self, decision: &str) -> Option<&DecisionValues> {
        self.values.iter().find(|v| v.decision == decision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Action {
    Sum,
    Forced,
    Decide(usize),
}

#[derive(Debug, Clone)]
struct Step {
    node: usize,
    action: Action,
    factors: Vec<usize>,
}

struct Plan {
    model: Model,
    steps: Vec<Step>,
    /// Per decision slot: node index and information-set node indices.
    decisions: Vec<(usize, Vec<usize>)>,
    joint_size: f64,
}

impl Plan {
    fn build(diagram: &InfluenceDiagram) -> Result<Plan> {
        let model = Model::compile(diagram)?;
        let stages = stage_partition(diagram)?;
        let mut order = Vec::with_capacity(model.len());
        let mut decisions = Vec::new();
        for stage in &stages {
            match stage {
                Stage::Observed(ids) | Stage::Trailing(ids) => {
                    for id in ids {
                        order.push((model.index(id)?, None));
                    }
                }
                Stage::Decide(id) => {
                    let i = model.index(id)?;
                    order.push((i, Some(decisions.len())));
                    decisions.push((i, model.parents[i].clone()));
                }
            }
        }

        let mut position = vec![UNSET; model.len()];
        for (p, &(node, _)) in order.iter().enumerate() {
            position[node] = p;
        }
        let mut steps: Vec<Step> = order
            .iter()
            .enumerate()
            .map(|(p, &(node, slot))| {
                let action = match slot {
                    Some(k) => Action::Decide(k),
                    None if model.is_det(node)
                        && model.parents[node].iter().all(|&q| position[q] < p) =>
                    {
                        Action::Forced
                    }
                    None => Action::Sum,
                };
                Step {
                    node,
                    action,
                    factors: Vec::new(),
                }
            })
            .collect();
        for step in steps.clone() {
            let node = step.node;
            let needs_factor =
                model.is_chance(node) || (model.is_det(node) && step.action == Action::Sum);
            if needs_factor {
                let last = model.parents[node]
                    .iter()
                    .map(|&q| position[q])
                    .chain(std::iter::once(position[node]))
                    .max()
                    .expect("non-empty scope");
                steps[last].factors.push(node);
            }
        }

        let joint_size = steps
            .iter()
            .filter(|s| s.action != Action::Forced)
            .map(|s| model.card[s.node] as f64)
            .product();
        Ok(Plan {
            model,
            steps,
            decisions,
            joint_size,
        })
    }

    fn check_cap(&self, cap: f64) -> Result<()> {
        if self.joint_size > cap {
            return Err(Error::JointTooLarge {
                size: self.joint_size,
                cap,
            });
        }
        Ok(())
    }

    #[inline]
    fn weigh(&self, step: &Step, weight: f64, asg: &[usize]) -> f64 {
        step.factors
            .iter()
            .fold(weight, |w, &f| w * self.model.factor(f, asg))
    }

    fn info_index(&self, slot: usize, asg: &[usize]) -> usize {
        self.decisions[slot]
            .1
            .iter()
            .fold(0, |acc, &q| acc * self.model.card[q] + asg[q])
    }
}

enum Mode<'a> {
    Optimize(&'a mut [Table]),
    Follow(&'a [&'a DecisionRule]),
}

struct Table {
    choice: Vec<usize>,
    mass: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// Returns `(mass, mass-weighted utility)` of the subtree below `pos`.
fn visit(
    plan: &Plan,
    diagram: &InfluenceDiagram,
    pos: usize,
    weight: f64,
    asg: &mut [usize],
    mode: &mut Mode<'_>,
) -> Result<(f64, f64)> {
    let Some(step) = plan.steps.get(pos) else {
        return Ok((weight, weight * plan.model.utility(asg)));
    };
    let node = step.node;
    match step.action {
        Action::Forced => {
            asg[node] = plan.model.resolve(node, asg);
            let w = plan.weigh(step, weight, asg);
            let out = if w == 0.0 {
                (0.0, 0.0)
            } else {
                visit(plan, diagram, pos + 1, w, asg, mode)?
            };
            asg[node] = UNSET;
            Ok(out)
        }
        Action::Sum => {
            let (mut mass, mut value) = (0.0, 0.0);
            for s in 0..plan.model.card[node] {
                asg[node] = s;
                let w = plan.weigh(step, weight, asg);
                if w == 0.0 {
                    continue;
                }
                let (m, v) = visit(plan, diagram, pos + 1, w, asg, mode)?;
                mass += m;
                value += v;
            }
            asg[node] = UNSET;
            Ok((mass, value))
        }
        Action::Decide(slot) => {
            let idx = plan.info_index(slot, asg);
            let out = match mode {
                Mode::Optimize(_) => {
                    let mut results = Vec::with_capacity(plan.model.card[node]);
                    for a in 0..plan.model.card[node] {
                        asg[node] = a;
                        let w = plan.weigh(step, weight, asg);
                        let r = if w == 0.0 {
                            (0.0, 0.0)
                        } else {
                            visit(plan, diagram, pos + 1, w, asg, mode)?
                        };
                        results.push(r);
                    }
                    let mut best = 0;
                    for (a, r) in results.iter().enumerate() {
                        if r.1 > results[best].1 {
                            best = a;
                        }
                    }
                    let mass = results[best].0;
                    if let Mode::Optimize(tables) = mode {
                        let table = &mut tables[slot];
                        table.choice[idx] = if mass > 0.0 { best } else { 0 };
                        table.mass[idx] = mass;
                        table.values[idx] = if mass > 0.0 {
                            results
                                .iter()
                                .map(|&(m, v)| if m > 0.0 { v / m } else { 0.0 })
                                .collect()
                        } else {
                            Vec::new()
                        };
                    }
                    if mass > 0.0 {
                        results[best]
                    } else {
                        (0.0, 0.0)
                    }
                }
                Mode::Follow(rules) => {
                    let rule = rules[slot];
                    let choice = rule.choices[idx];
                    asg[node] = choice.unwrap_or(0);
                    let w = plan.weigh(step, weight, asg);
                    let r = if w == 0.0 {
                        (0.0, 0.0)
                    } else {
                        visit(plan, diagram, pos + 1, w, asg, mode)?
                    };
                    if choice.is_none() && r.0 > 0.0 {
                        let info = &plan.decisions[slot].1;
                        let states: Vec<usize> = info.iter().map(|&q| asg[q]).collect();
                        return Err(Error::IncompletePolicy {
                            decision: rule.decision.clone(),
                            state: plan.model.labels(diagram, info, &states),
                        });
                    }
                    r
                }
            };
            asg[node] = UNSET;
            Ok(out)
        }
    }
}

/// Optimal policy by maximum expected utility, with default options.
pub fn solve(diagram: &InfluenceDiagram) -> Result<Policy> {
    solve_with(diagram, &SolveOptions::default()).map(|s| s.policy)
}

/// Optimal policy plus per-alternative conditional expected utilities.
///
/// Ties between alternatives go to the lowest index. Information states of
/// probability zero are marked unreachable and get alternative 0.
pub fn solve_with(diagram: &InfluenceDiagram, options: &SolveOptions) -> Result<Solution> {
    let plan = Plan::build(diagram)?;
    plan.check_cap(options.joint_cap)?;

    let mut rules: Vec<DecisionRule> = Vec::with_capacity(plan.decisions.len());
    let mut tables: Vec<Table> = Vec::with_capacity(plan.decisions.len());
    for (node, info) in &plan.decisions {
        let info_cards: Vec<usize> = info.iter().map(|&q| plan.model.card[q]).collect();
        let count: usize = info_cards.iter().product();
        rules.push(DecisionRule {
            decision: plan.model.ids[*node].clone(),
            info: info.iter().map(|&q| plan.model.ids[q].clone()).collect(),
            info_cards,
            alternatives: plan.model.card[*node],
            choices: Vec::new(),
            reachable: Vec::new(),
        });
        tables.push(Table {
            choice: vec![0; count],
            mass: vec![0.0; count],
            values: vec![Vec::new(); count],
        });
    }

    let mut asg = vec![UNSET; plan.model.len()];
    let (_, meu) = visit(
        &plan,
        diagram,
        0,
        1.0,
        &mut asg,
        &mut Mode::Optimize(&mut tables),
    )?;

    let mut values = Vec::with_capacity(tables.len());
    for (rule, table) in rules.iter_mut().zip(tables) {
        rule.choices = table.choice.iter().map(|&c| Some(c)).collect();
        rule.reachable = table.mass.iter().map(|&m| m > 0.0).collect();
        values.push(DecisionValues {
            decision: rule.decision.clone(),
            mass: table.mass,
            values: table.values,
        });
    }
    Ok(Solution {
        policy: Policy { rules, meu },
        values,
        joint_size: plan.joint_size,
    })
}

/// Number of branches the exact rollback of `diagram` enumerates.
pub fn joint_size(diagram: &InfluenceDiagram) -> Result<f64> {
    Plan::build(diagram).map(|p| p.joint_size)
}

/// Expected utility of following `policy` on `diagram`.
pub fn expected_utility(diagram: &InfluenceDiagram, policy: &Policy) -> Result<f64> {
    let plan = Plan::build(diagram)?;
    plan.check_cap(DEFAULT_JOINT_CAP)?;
    let rules = bind_policy(&plan.model, &plan.decisions, policy)?;
    let mut asg = vec![UNSET; plan.model.len()];
    let (_, eu) = visit(&plan, diagram, 0, 1.0, &mut asg, &mut Mode::Follow(&rules))?;
    Ok(eu)
}

/// Matches each decision in `decisions` with its rule in `policy` and
/// checks that the rule's shape fits the diagram.
pub(crate) fn bind_policy<'p>(
    model: &Model,
    decisions: &[(usize, Vec<usize>)],
    policy: &'p Policy,
) -> Result<Vec<&'p DecisionRule>> {
    decisions
        .iter()
        .map(|(node, info)| {
            let id = &model.ids[*node];
            let rule = policy
                .rule(id)
                .ok_or_else(|| Error::PolicyMismatch(format!("no rule for decision `{id}`")))?;
            let info_ids: Vec<&str> = info.iter().map(|&q| model.ids[q].as_str()).collect();
            if rule
                .info
                .iter()
                .map(String::as_str)
                .ne(info_ids.iter().copied())
            {
                return Err(Error::PolicyMismatch(format!(
                    "rule for `{id}` observes [{}], diagram has [{}]",
                    rule.info.join(", "),
                    info_ids.join(", ")
                )));
            }
            let cards: Vec<usize> = info.iter().map(|&q| model.card[q]).collect();
            let count: usize = cards.iter().product();
            if rule.info_cards != cards || rule.choices.len() != count {
                return Err(Error::PolicyMismatch(format!(
                    "rule for `{id}` has the wrong number of information states"
                )));
            }
            if rule.alternatives != model.card[*node]
                || rule
                    .choices
                    .iter()
                    .flatten()
                    .any(|&c| c >= model.card[*node])
            {
                return Err(Error::PolicyMismatch(format!(
                    "rule for `{id}` names an alternative out of range"
                )));
            }
            Ok(rule)
        })
        .collect()
}

/// Decision slots in decision order, as used by [`bind_policy`].
pub(crate) fn decision_slots(
    diagram: &InfluenceDiagram,
    model: &Model,
) -> Vec<(usize, Vec<usize>)> {
    diagram
        .decisions()
        .into_iter()
        .map(|d| {
            let i = diagram.index_of(&d.id).expect("decision indexed");
            (i, model.parents[i].clone())
        })
        .collect()
}
