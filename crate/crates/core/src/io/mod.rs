//! File formats: model, policy, scenario config and tornado documents,
//! all written as canonical JSON (see [`canonical`]).

pub mod canonical;
pub mod render;

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::TornadoReport;
use crate::diagram::{validate, InfluenceDiagram, Node, NodeKind, State};
use crate::eval::{Assignment, DecisionRule, Policy};
use crate::mrma::ScenarioConfig;
use crate::{Error, Result};

pub use self::canonical::{format_g17, to_canonical_string};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NodeDoc {
    Chance {
        id: String,
        parents: Vec<String>,
        states: Vec<StateDoc>,
        cpt: Vec<Vec<f64>>,
    },
    Deterministic {
        id: String,
        parents: Vec<String>,
        states: Vec<StateDoc>,
        table: Vec<usize>,
    },
    Decision {
        id: String,
        order: u32,
        info: Vec<String>,
        alternatives: Vec<StateDoc>,
    },
    Value {
        id: String,
        parents: Vec<String>,
        utilities: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub nodes: Vec<NodeDoc>,
    /// Chance node id to base-case state label.
    pub base_case: BTreeMap<String, String>,
}

fn state_docs(states: &[State]) -> Vec<StateDoc> {
    states
        .iter()
        .map(|s| StateDoc {
            label: s.label.clone(),
            level: s.level,
        })
        .collect()
}

fn states_of(docs: Vec<StateDoc>) -> Vec<State> {
    docs.into_iter()
        .map(|d| State {
            label: d.label,
            level: d.level,
        })
        .collect()
}

impl ModelDocument {
    pub fn from_diagram(diagram: &InfluenceDiagram) -> ModelDocument {
        let nodes = diagram
            .nodes()
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Chance { cpt } => NodeDoc::Chance {
                    id: n.id.clone(),
                    parents: n.parents.clone(),
                    states: state_docs(&n.states),
                    cpt: cpt.clone(),
                },
                NodeKind::Deterministic { table } => NodeDoc::Deterministic {
                    id: n.id.clone(),
                    parents: n.parents.clone(),
                    states: state_docs(&n.states),
                    table: table.clone(),
                },
                NodeKind::Decision { order } => NodeDoc::Decision {
                    id: n.id.clone(),
                    order: *order,
                    info: n.parents.clone(),
                    alternatives: state_docs(&n.states),
                },
                NodeKind::Value { utilities } => NodeDoc::Value {
                    id: n.id.clone(),
                    parents: n.parents.clone(),
                    utilities: utilities.clone(),
                },
            })
            .collect();
        let base_case = diagram
            .base_case()
            .iter()
            .map(|(id, &s)| {
                let label = diagram
                    .node(id)
                    .and_then(|n| n.states.get(s))
                    .map_or_else(|| s.to_string(), |st| st.label.clone());
                (id.clone(), label)
            })
            .collect();
        ModelDocument {
            format_version: FORMAT_VERSION,
            nodes,
            base_case,
        }
    }

    /// Builds the diagram without validating it.
    pub fn into_diagram(self) -> Result<InfluenceDiagram> {
        let nodes: Vec<Node> = self
            .nodes
            .into_iter()
            .map(|d| match d {
                NodeDoc::Chance {
                    id,
                    parents,
                    states,
                    cpt,
                } => Node {
                    id,
                    parents,
                    states: states_of(states),
                    kind: NodeKind::Chance { cpt },
                },
                NodeDoc::Deterministic {
                    id,
                    parents,
                    states,
                    table,
                } => Node {
                    id,
                    parents,
                    states: states_of(states),
                    kind: NodeKind::Deterministic { table },
                },
                NodeDoc::Decision {
                    id,
                    order,
                    info,
                    alternatives,
                } => Node {
                    id,
                    parents: info,
                    states: states_of(alternatives),
                    kind: NodeKind::Decision { order },
                },
                NodeDoc::Value {
                    id,
                    parents,
                    utilities,
                } => Node {
                    id,
                    parents,
                    states: Vec::new(),
                    kind: NodeKind::Value { utilities },
                },
            })
            .collect();
        let lookup = InfluenceDiagram::new(nodes.clone(), BTreeMap::new());
        let mut base = BTreeMap::new();
        for (id, label) in self.base_case {
            let node = lookup
                .node(&id)
                .ok_or_else(|| Error::UnknownNode(id.clone()))?;
            let state = node
                .state_index(&label)
                .ok_or_else(|| Error::UnknownLabel {
                    node: id.clone(),
                    label: label.clone(),
                })?;
            base.insert(id, state);
        }
        Ok(InfluenceDiagram::new(nodes, base))
    }
}

fn check_version(found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {found} (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses and validates a model document.
pub fn model_from_str(text: &str) -> Result<InfluenceDiagram> {
    let doc: ModelDocument = parse(text)?;
    check_version(doc.format_version)?;
    let diagram = doc.into_diagram()?;
    let report = validate(&diagram);
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }
    Ok(diagram)
}

pub fn model_to_string(diagram: &InfluenceDiagram) -> String {
    to_canonical_string(&ModelDocument::from_diagram(diagram))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<InfluenceDiagram> {
    model_from_str(&read_text(path.as_ref())?)
}

pub fn save_model(diagram: &InfluenceDiagram, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &model_to_string(diagram))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleEntry {
    /// Information variable id to observed label.
    pub when: BTreeMap<String, String>,
    pub choose: String,
    pub reachable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionDoc {
    pub decision: String,
    pub info: Vec<String>,
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    pub format_version: u32,
    pub meu: f64,
    pub decisions: Vec<DecisionDoc>,
}

fn label(diagram: &InfluenceDiagram, id: &str, state: usize) -> String {
    diagram.node(id).expect("policy matches diagram").states[state]
        .label
        .clone()
}

impl PolicyDocument {
    pub fn from_policy(diagram: &InfluenceDiagram, policy: &Policy) -> PolicyDocument {
        let decisions = policy
            .rules
            .iter()
            .map(|rule| DecisionDoc {
                decision: rule.decision.clone(),
                info: rule.info.clone(),
                rules: (0..rule.state_count())
                    .filter_map(|i| {
                        let choice = rule.choices[i]?;
                        let when = rule
                            .info
                            .iter()
                            .zip(rule.decode(i))
                            .map(|(v, s)| (v.clone(), label(diagram, v, s)))
                            .collect();
                        Some(RuleEntry {
                            when,
                            choose: label(diagram, &rule.decision, choice),
                            reachable: rule.reachable[i],
                        })
                    })
                    .collect(),
            })
            .collect();
        PolicyDocument {
            format_version: FORMAT_VERSION,
            meu: policy.meu,
            decisions,
        }
    }

    /// Resolves labels against `diagram`. Information states absent from
    /// the document are left unset.
    pub fn into_policy(self, diagram: &InfluenceDiagram) -> Result<Policy> {
        let mut policy = Policy::empty_for(diagram);
        policy.meu = self.meu;
        for doc in self.decisions {
            let rule: &mut DecisionRule = policy
                .rules
                .iter_mut()
                .find(|r| r.decision == doc.decision)
                .ok_or_else(|| {
                    Error::PolicyMismatch(format!("`{}` is not a decision", doc.decision))
                })?;
            if doc.info != rule.info {
                return Err(Error::PolicyMismatch(format!(
                    "`{}` information set differs from the model",
                    doc.decision
                )));
            }
            let decision = diagram.node(&doc.decision).expect("rule exists");
            for entry in doc.rules {
                let mut states = Vec::with_capacity(rule.info.len());
                for var in &rule.info {
                    let observed = entry.when.get(var).ok_or_else(|| {
                        Error::PolicyMismatch(format!("rule for `{}` misses `{var}`", doc.decision))
                    })?;
                    let node = diagram.node(var).expect("validated");
                    states.push(
                        node.state_index(observed)
                            .ok_or_else(|| Error::UnknownLabel {
                                node: var.clone(),
                                label: observed.clone(),
                            })?,
                    );
                }
                if entry.when.len() != rule.info.len() {
                    return Err(Error::PolicyMismatch(format!(
                        "rule for `{}` names variables outside its information set",
                        doc.decision
                    )));
                }
                let choice =
                    decision
                        .state_index(&entry.choose)
                        .ok_or_else(|| Error::UnknownLabel {
                            node: doc.decision.clone(),
                            label: entry.choose.clone(),
                        })?;
                let i = rule.index_of(&states);
                rule.choices[i] = Some(choice);
                rule.reachable[i] = entry.reachable;
            }
        }
        Ok(policy)
    }
}

pub fn policy_to_string(diagram: &InfluenceDiagram, policy: &Policy) -> String {
    to_canonical_string(&PolicyDocument::from_policy(diagram, policy))
}

pub fn policy_from_str(diagram: &InfluenceDiagram, text: &str) -> Result<Policy> {
    let doc: PolicyDocument = parse(text)?;
    check_version(doc.format_version)?;
    doc.into_policy(diagram)
}

pub fn load_policy(diagram: &InfluenceDiagram, path: impl AsRef<Path>) -> Result<Policy> {
    policy_from_str(diagram, &read_text(path.as_ref())?)
}

pub fn save_policy(
    diagram: &InfluenceDiagram,
    policy: &Policy,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path.as_ref(), &policy_to_string(diagram, policy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub format_version: u32,
    pub scenario: ScenarioConfig,
}

pub fn config_to_string(config: &ScenarioConfig) -> String {
    to_canonical_string(&ConfigDocument {
        format_version: FORMAT_VERSION,
        scenario: config.clone(),
    })
}

pub fn config_from_str(text: &str) -> Result<ScenarioConfig> {
    let doc: ConfigDocument = parse(text)?;
    check_version(doc.format_version)?;
    doc.scenario.check()?;
    Ok(doc.scenario)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    config_from_str(&read_text(path.as_ref())?)
}

/// Parses `D1=a,D2=b` into decision assignments, by label.
pub fn parse_decision_list(diagram: &InfluenceDiagram, spec: &str) -> Result<Assignment> {
    let mut pairs = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (id, label) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected DECISION=alternative, got `{part}`")))?;
        pairs.push((id.trim(), label.trim()));
    }
    let asg = Assignment::from_labels(diagram, &pairs)?;
    for (id, _) in asg.iter() {
        if !diagram.node(id).is_some_and(|n| n.is_decision()) {
            return Err(Error::WrongKind {
                id: id.clone(),
                expected: "decision",
            });
        }
    }
    Ok(asg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TornadoRow {
    pub variable: String,
    pub base_state: String,
    pub per_state_utilities: BTreeMap<String, f64>,
    pub low: f64,
    pub high: f64,
    pub swing: f64,
    pub share: f64,
    pub cumulative_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TornadoDocument {
    pub format_version: u32,
    pub decisions: BTreeMap<String, String>,
    pub base_utility: f64,
    pub entries: Vec<TornadoRow>,
}

impl TornadoDocument {
    pub fn from_report(diagram: &InfluenceDiagram, report: &TornadoReport) -> TornadoDocument {
        let entries = report
            .entries
            .iter()
            .map(|e| {
                let node = diagram.node(&e.variable).expect("report matches diagram");
                TornadoRow {
                    variable: e.variable.clone(),
                    base_state: node.states[diagram.base_case()[&e.variable]].label.clone(),
                    per_state_utilities: node
                        .states
                        .iter()
                        .zip(&e.per_state_utilities)
                        .map(|(s, &u)| (s.label.clone(), u))
                        .collect(),
                    low: e.low,
                    high: e.high,
                    swing: e.swing,
                    share: e.share,
                    cumulative_share: e.cumulative_share,
                }
            })
            .collect();
        TornadoDocument {
            format_version: FORMAT_VERSION,
            decisions: report
                .decision_assignment
                .to_labels(diagram)
                .into_iter()
                .collect(),
            base_utility: report.base_utility,
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{DiagramBuilder, IssueCode};
    use crate::eval::solve;

    fn bet_pass() -> InfluenceDiagram {
        DiagramBuilder::new()
            .chance("W", &["win", "lose"], &[], vec![vec![0.6, 0.4]])
            .decision("D", &["bet", "pass"], 1, &[])
            .value("U", &["D", "W"], vec![100.0, 0.0, 50.0, 50.0])
            .build()
    }

    #[test]
    fn model_round_trip_is_byte_identical() {
        let d = bet_pass();
        let text = model_to_string(&d);
        let back = model_from_str(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(model_to_string(&back), text);
    }

    #[test]
    fn model_document_shape() {
        let text = model_to_string(&bet_pass());
        assert!(text.starts_with("{\n  \"format_version\": 1,\n  \"nodes\": ["));
        assert!(text.contains("\"kind\": \"chance\""));
        assert!(text.contains("\"base_case\": {\n    \"W\": \"win\"\n  }"));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn short_cpt_row_is_a_validation_error() {
        let text = model_to_string(&bet_pass()).replace("0.59999999999999998,", "");
        match model_from_str(&text) {
            Err(e @ Error::Invalid(_)) => {
                assert_eq!(e.exit_code(), 1);
                match e {
                    Error::Invalid(r) => assert!(r.has_code(IssueCode::MissingRow)),
                    _ => unreachable!(),
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_exit_2() {
        let err = model_from_str("{ not json").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = model_from_str(
            &model_to_string(&bet_pass()).replace("\"format_version\": 1", "\"format_version\": 9"),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn policy_round_trip() {
        let d = bet_pass();
        let policy = solve(&d).unwrap();
        let text = policy_to_string(&d, &policy);
        assert!(text.contains("\"choose\": \"bet\""));
        let back = policy_from_str(&d, &text).unwrap();
        assert_eq!(back, policy);
        assert_eq!(policy_to_string(&d, &back), text);
    }

    #[test]
    fn policy_with_unknown_label_rejected() {
        let d = bet_pass();
        let text = policy_to_string(&d, &solve(&d).unwrap()).replace("\"bet\"", "\"fold\"");
        assert!(matches!(
            policy_from_str(&d, &text),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn config_round_trip() {
        let c = crate::mrma::reference_config();
        let text = config_to_string(&c);
        assert_eq!(config_from_str(&text).unwrap(), c);
        let bad = text.replace("\"site_range_m\": 2000", "\"site_range_m\": -1");
        assert!(matches!(config_from_str(&bad), Err(Error::BadConfig(_))));
    }
}
