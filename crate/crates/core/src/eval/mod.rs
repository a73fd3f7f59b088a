//! Exact evaluation: joint probabilities, conditionals, backward-induction
//! solving, policy scoring and seeded Monte Carlo simulation.

pub(crate) mod model;
mod query;
mod rollback;
mod simulate;

use std::collections::BTreeMap;

use crate::diagram::InfluenceDiagram;
use crate::{Error, Result};

pub(crate) use self::query::prior_marginal;
pub use self::query::{conditional, joint_probability, Distribution};
pub use self::rollback::{
    expected_utility, joint_size, solve, solve_with, DecisionValues, Solution, SolveOptions,
    DEFAULT_JOINT_CAP,
};
pub use self::simulate::{simulate, simulate_with, SimOptions, SimReport, Trace};

/// Partial or total map from node id to state index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<String, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, id: impl Into<String>, state: usize) -> Self {
        self.0.insert(id.into(), state);
        self
    }

    pub fn insert(&mut self, id: impl Into<String>, state: usize) {
        self.0.insert(id.into(), state);
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.0.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &usize)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds an assignment from `(node id, state label)` pairs.
    pub fn from_labels(diagram: &InfluenceDiagram, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut out = Assignment::new();
        for (id, label) in pairs {
            let node = diagram
                .node(id)
                .ok_or_else(|| Error::UnknownNode(id.to_string()))?;
            let state = node.state_index(label).ok_or_else(|| Error::UnknownLabel {
                node: id.to_string(),
                label: label.to_string(),
            })?;
            out.insert(*id, state);
        }
        Ok(out)
    }

    /// `(node id, state label)` pairs; unknown nodes or indices are skipped.
    pub fn to_labels(&self, diagram: &InfluenceDiagram) -> Vec<(String, String)> {
        self.0
            .iter()
            .filter_map(|(id, &s)| {
                let label = diagram.node(id)?.states.get(s)?.label.clone();
                Some((id.clone(), label))
            })
            .collect()
    }
}

impl FromIterator<(String, usize)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (String, usize)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Decision rule for one decision: a choice for every information state.
///
/// Information states are indexed mixed-radix over `info` in declared
/// order, last member varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    pub decision: String,
    pub info: Vec<String>,
    pub info_cards: Vec<usize>,
    pub alternatives: usize,
    /// `None` only in rules loaded from incomplete policy files.
    pub choices: Vec<Option<usize>>,
    /// False where the information state has probability zero.
    pub reachable: Vec<bool>,
}

impl DecisionRule {
    pub fn state_count(&self) -> usize {
        self.info_cards.iter().product()
    }

    pub fn index_of(&self, info_states: &[usize]) -> usize {
        info_states
            .iter()
            .zip(&self.info_cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.info_cards.len()];
        for (slot, &card) in out.iter_mut().zip(&self.info_cards).rev() {
            *slot = index % card;
            index /= card;
        }
        out
    }

    pub fn choice(&self, info_states: &[usize]) -> Option<usize> {
        self.choices[self.index_of(info_states)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    /// One rule per decision, in decision order.
    pub rules: Vec<DecisionRule>,
    pub meu: f64,
}

impl Policy {
    pub fn rule(&self, decision: &str) -> Option<&DecisionRule> {
        self.rules.iter().find(|r| r.decision == decision)
    }

    /// Empty rules (every choice `None`) shaped for `diagram`'s decisions.
    pub fn empty_for(diagram: &InfluenceDiagram) -> Policy {
        let rules = diagram
            .decisions()
            .into_iter()
            .map(|d| {
                let info_cards: Vec<usize> = d
                    .parents
                    .iter()
                    .map(|p| diagram.node(p).map_or(0, |n| n.states.len()))
                    .collect();
                let count = info_cards.iter().product();
                DecisionRule {
                    decision: d.id.clone(),
                    info: d.parents.clone(),
                    info_cards,
                    alternatives: d.states.len(),
                    choices: vec![None; count],
                    reachable: vec![false; count],
                }
            })
            .collect();
        Policy {
            rules,
            meu: f64::NAN,
        }
    }
}
