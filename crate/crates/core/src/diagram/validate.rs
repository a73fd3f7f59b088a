use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use super::{config_count, InfluenceDiagram, NodeKind};

/// Accepted deviation of a probability row from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IssueCode {
    Cycle,
    BadRowSum,
    MissingRow,
    MultiValueNode,
    NoValueNode,
    ValueHasChild,
    NoForgetting,
    AcausalInfo,
    MissingBaseCase,
    BadBaseCase,
    UnknownNode,
    DuplicateId,
    DuplicateLabel,
    EmptyLabel,
    PartialLevels,
    BadLevel,
    NoStates,
    BadTableIndex,
    DuplicateOrder,
    NonFiniteUtility,
    BarrenNode,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::Cycle => "CYCLE",
            IssueCode::BadRowSum => "BAD_ROW_SUM",
            IssueCode::MissingRow => "MISSING_ROW",
            IssueCode::MultiValueNode => "MULTI_VALUE_NODE",
            IssueCode::NoValueNode => "NO_VALUE_NODE",
            IssueCode::ValueHasChild => "VALUE_HAS_CHILD",
            IssueCode::NoForgetting => "NO_FORGETTING",
            IssueCode::AcausalInfo => "ACAUSAL_INFO",
            IssueCode::MissingBaseCase => "MISSING_BASE_CASE",
            IssueCode::BadBaseCase => "BAD_BASE_CASE",
            IssueCode::UnknownNode => "UNKNOWN_NODE",
            IssueCode::DuplicateId => "DUPLICATE_ID",
            IssueCode::DuplicateLabel => "DUPLICATE_LABEL",
            IssueCode::EmptyLabel => "EMPTY_LABEL",
            IssueCode::PartialLevels => "PARTIAL_LEVELS",
            IssueCode::BadLevel => "BAD_LEVEL",
            IssueCode::NoStates => "NO_STATES",
            IssueCode::BadTableIndex => "BAD_TABLE_INDEX",
            IssueCode::DuplicateOrder => "DUPLICATE_ORDER",
            IssueCode::NonFiniteUtility => "NON_FINITE_UTILITY",
            IssueCode::BarrenNode => "BARREN_NODE",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub code: IssueCode,
    pub node: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_code(&self, code: IssueCode) -> bool {
        self.errors.iter().any(|i| i.code == code)
    }

    fn error(&mut self, code: IssueCode, node: &str, message: impl Into<String>) {
        self.errors.push(Issue {
            code,
            node: node.to_string(),
            message: message.into(),
        });
    }

    fn warn(&mut self, code: IssueCode, node: &str, message: impl Into<String>) {
        self.warnings.push(Issue {
            code,
            node: node.to_string(),
            message: message.into(),
        });
    }
}

/// Checks every structural and probabilistic invariant of `diagram`.
///
/// Pure: the same diagram always yields the same report. Graph-level checks
/// (acyclicity, no-forgetting, causal information sets) only run once all
/// arcs resolve to known nodes.
pub fn validate(diagram: &InfluenceDiagram) -> ValidationReport {
    let mut report = ValidationReport::default();
    let nodes = diagram.nodes();

    let mut seen = HashSet::new();
    for node in nodes {
        if node.id.is_empty() {
            report.error(IssueCode::EmptyLabel, "", "node id is empty");
        }
        if !seen.insert(node.id.as_str()) {
            report.error(
                IssueCode::DuplicateId,
                &node.id,
                "node id declared more than once",
            );
        }
    }

    let mut arcs_ok = true;
    for node in nodes {
        let mut listed = HashSet::new();
        for p in &node.parents {
            if diagram.node(p).is_none() {
                arcs_ok = false;
                report.error(
                    IssueCode::UnknownNode,
                    &node.id,
                    format!("arc from unknown node `{p}`"),
                );
            }
            if !listed.insert(p.as_str()) {
                report.error(
                    IssueCode::DuplicateId,
                    &node.id,
                    format!("`{p}` listed twice as an incoming arc"),
                );
            }
        }
    }

    check_states(diagram, &mut report);

    let value_nodes: Vec<&str> = nodes
        .iter()
        .filter(|n| n.is_value())
        .map(|n| n.id.as_str())
        .collect();
    match value_nodes.len() {
        0 => report.error(IssueCode::NoValueNode, "", "diagram has no value node"),
        1 => {}
        _ => {
            for id in &value_nodes[1..] {
                report.error(
                    IssueCode::MultiValueNode,
                    id,
                    format!("second value node (first is `{}`)", value_nodes[0]),
                );
            }
        }
    }
    for node in nodes {
        for p in &node.parents {
            if value_nodes.contains(&p.as_str()) {
                report.error(
                    IssueCode::ValueHasChild,
                    p,
                    format!("value node feeds `{}`", node.id),
                );
            }
        }
    }

    check_tables(diagram, &mut report);

    let mut orders: HashMap<u32, &str> = HashMap::new();
    for node in nodes {
        if let NodeKind::Decision { order } = node.kind {
            if let Some(other) = orders.insert(order, &node.id) {
                report.error(
                    IssueCode::DuplicateOrder,
                    &node.id,
                    format!("order {order} already used by `{other}`"),
                );
            }
        }
    }

    for node in nodes {
        if node.is_chance() {
            match diagram.base_case().get(&node.id) {
                None => report.error(
                    IssueCode::MissingBaseCase,
                    &node.id,
                    "chance node has no base-case state",
                ),
                Some(&s) if s >= node.states.len() => report.error(
                    IssueCode::BadBaseCase,
                    &node.id,
                    format!("base-case state {s} out of range"),
                ),
                Some(_) => {}
            }
        }
    }
    for id in diagram.base_case().keys() {
        match diagram.node(id) {
            Some(n) if n.is_chance() => {}
            Some(n) => report.error(
                IssueCode::BadBaseCase,
                id,
                format!("base case given for {} node", n.kind_name()),
            ),
            None => report.error(IssueCode::BadBaseCase, id, "base case for unknown node"),
        }
    }

    if arcs_ok && seen.len() == nodes.len() && check_acyclic(diagram, &mut report) {
        check_information_sets(diagram, &mut report);
        for node in nodes {
            if !node.is_value() && diagram.children(&node.id).is_empty() {
                report.warn(
                    IssueCode::BarrenNode,
                    &node.id,
                    "no outgoing arcs; cannot affect the value node",
                );
            }
        }
    }

    report
}

fn check_states(diagram: &InfluenceDiagram, report: &mut ValidationReport) {
    for node in diagram.nodes() {
        if node.is_value() {
            continue;
        }
        if node.states.is_empty() {
            report.error(IssueCode::NoStates, &node.id, "node has no states");
            continue;
        }
        let mut labels = HashSet::new();
        for s in &node.states {
            if s.label.is_empty() {
                report.error(IssueCode::EmptyLabel, &node.id, "state label is empty");
            } else if !labels.insert(s.label.as_str()) {
                report.error(
                    IssueCode::DuplicateLabel,
                    &node.id,
                    format!("state label `{}` repeated", s.label),
                );
            }
            if let Some(level) = s.level {
                if !level.is_finite() {
                    report.error(
                        IssueCode::BadLevel,
                        &node.id,
                        format!("state `{}` has non-finite level", s.label),
                    );
                }
            }
        }
        let with_level = node.states.iter().filter(|s| s.level.is_some()).count();
        if with_level != 0 && with_level != node.states.len() {
            report.error(
                IssueCode::PartialLevels,
                &node.id,
                "either all states carry a level or none do",
            );
        }
    }
}

fn check_tables(diagram: &InfluenceDiagram, report: &mut ValidationReport) {
    for node in diagram.nodes() {
        let rows = match config_count(diagram, &node.parents) {
            Some(rows) => rows,
            None => continue,
        };
        match &node.kind {
            NodeKind::Chance { cpt } => {
                if cpt.len() != rows {
                    report.error(
                        IssueCode::MissingRow,
                        &node.id,
                        format!(
                            "CPT has {} row(s), parent configurations need {rows}",
                            cpt.len()
                        ),
                    );
                }
                for (r, row) in cpt.iter().enumerate() {
                    if row.len() != node.states.len() {
                        report.error(
                            IssueCode::MissingRow,
                            &node.id,
                            format!(
                                "CPT row {r} has {} entries, node has {} states",
                                row.len(),
                                node.states.len()
                            ),
                        );
                        continue;
                    }
                    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                        report.error(
                            IssueCode::BadRowSum,
                            &node.id,
                            format!("CPT row {r} has a negative or non-finite entry"),
                        );
                        continue;
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        report.error(
                            IssueCode::BadRowSum,
                            &node.id,
                            format!("CPT row {r} sums to {sum}"),
                        );
                    }
                }
            }
            NodeKind::Deterministic { table } => {
                if table.len() != rows {
                    report.error(
                        IssueCode::MissingRow,
                        &node.id,
                        format!(
                            "table has {} entries, parent configurations need {rows}",
                            table.len()
                        ),
                    );
                }
                for (r, &s) in table.iter().enumerate() {
                    if s >= node.states.len() {
                        report.error(
                            IssueCode::BadTableIndex,
                            &node.id,
                            format!("entry {r} names state {s}, node has {}", node.states.len()),
                        );
                    }
                }
            }
            NodeKind::Value { utilities } => {
                if utilities.len() != rows {
                    report.error(
                        IssueCode::MissingRow,
                        &node.id,
                        format!(
                            "utility table has {} entries, parent configurations need {rows}",
                            utilities.len()
                        ),
                    );
                }
                if utilities.iter().any(|u| !u.is_finite()) {
                    report.error(
                        IssueCode::NonFiniteUtility,
                        &node.id,
                        "utility table contains a non-finite entry",
                    );
                }
            }
            NodeKind::Decision { .. } => {}
        }
    }
}

/// Kahn's algorithm over all arcs. Returns true when the graph is acyclic.
fn check_acyclic(diagram: &InfluenceDiagram, report: &mut ValidationReport) -> bool {
    let order = topological_order(diagram);
    if order.len() == diagram.nodes().len() {
        return true;
    }
    let placed: HashSet<usize> = order.into_iter().collect();
    for (i, node) in diagram.nodes().iter().enumerate() {
        if !placed.contains(&i) {
            report.error(
                IssueCode::Cycle,
                &node.id,
                "node lies on or behind a directed cycle",
            );
        }
    }
    false
}

/// Topological order of node indices, stable with respect to declaration
/// order. Shorter than the node count when the graph has a cycle. Assumes
/// every arc resolves.
pub(crate) fn topological_order(diagram: &InfluenceDiagram) -> Vec<usize> {
    let nodes = diagram.nodes();
    let mut indegree: Vec<usize> = nodes.iter().map(|n| n.parents.len()).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        for p in &node.parents {
            if let Some(pi) = diagram.index_of(p) {
                children[pi].push(i);
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut out = Vec::with_capacity(nodes.len());
    while let Some(i) = ready.pop_first() {
        out.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    out
}

/// Indices of all strict descendants of `start`.
pub(crate) fn descendants(diagram: &InfluenceDiagram, start: usize) -> HashSet<usize> {
    let nodes = diagram.nodes();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        for p in &node.parents {
            if let Some(pi) = diagram.index_of(p) {
                children[pi].push(i);
            }
        }
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for &c in &children[i] {
            if seen.insert(c) {
                queue.push_back(c);
            }
        }
    }
    seen
}

fn check_information_sets(diagram: &InfluenceDiagram, report: &mut ValidationReport) {
    let decisions = diagram.decisions();

    for pair in decisions.windows(2) {
        let (earlier, later) = (pair[0], pair[1]);
        let required = earlier.parents.iter().chain(std::iter::once(&earlier.id));
        for id in required {
            if !later.parents.contains(id) {
                report.error(
                    IssueCode::NoForgetting,
                    &later.id,
                    format!("must also observe `{id}` (known at `{}`)", earlier.id),
                );
            }
        }
    }

    let reach: Vec<(usize, HashSet<usize>)> = decisions
        .iter()
        .map(|d| {
            let i = diagram.index_of(&d.id).expect("decision indexed");
            (i, descendants(diagram, i))
        })
        .collect();
    for (k, decision) in decisions.iter().enumerate() {
        for info in &decision.parents {
            let xi = diagram.index_of(info).expect("arcs resolved");
            for (j, (di, desc)) in reach.iter().enumerate().skip(k) {
                if desc.contains(&xi) || (j > k && *di == xi) {
                    report.error(
                        IssueCode::AcausalInfo,
                        &decision.id,
                        format!(
                            "observes `{info}`, which is not determined before `{}`",
                            decisions[j].id
                        ),
                    );
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{DiagramBuilder, Node};

    fn bet_pass() -> DiagramBuilder {
        DiagramBuilder::new()
            .chance("C", &["win", "lose"], &[], vec![vec![0.6, 0.4]])
            .decision("D", &["bet", "pass"], 1, &[])
            .value("U", &["D", "C"], vec![100.0, 0.0, 50.0, 50.0])
    }

    #[test]
    fn accepts_well_formed_diagram() {
        let report = validate(&bet_pass().build());
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn two_value_nodes() {
        let d = bet_pass().value("U2", &["C"], vec![1.0, 2.0]).build();
        assert!(validate(&d).has_code(IssueCode::MultiValueNode));
    }

    #[test]
    fn row_summing_to_point_nine() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.5, 0.4]])
            .value("U", &["X"], vec![0.0, 1.0])
            .build();
        assert!(validate(&d).has_code(IssueCode::BadRowSum));
    }

    #[test]
    fn row_within_tolerance_is_accepted() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.6 + 5e-10, 0.4]])
            .value("U", &["X"], vec![0.0, 1.0])
            .build();
        assert!(validate(&d).is_ok());
    }

    #[test]
    fn wrong_row_length_and_count() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.5, 0.25, 0.25]])
            .chance("Y", &["a", "b"], &["X"], vec![vec![0.5, 0.5]])
            .value("U", &["Y"], vec![0.0, 1.0])
            .build();
        let report = validate(&d);
        let missing: Vec<&str> = report
            .errors
            .iter()
            .filter(|i| i.code == IssueCode::MissingRow)
            .map(|i| i.node.as_str())
            .collect();
        assert_eq!(missing, vec!["X", "Y"]);
    }

    #[test]
    fn cycle_is_reported() {
        let d = DiagramBuilder::new()
            .chance(
                "X",
                &["a", "b"],
                &["Y"],
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            )
            .chance(
                "Y",
                &["a", "b"],
                &["X"],
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            )
            .value("U", &["Y"], vec![0.0, 1.0])
            .build_raw();
        assert!(validate(&d).has_code(IssueCode::Cycle));
    }

    #[test]
    fn value_with_child() {
        let d = bet_pass()
            .chance("Z", &["a", "b"], &["U"], vec![vec![0.5, 0.5]])
            .build_raw();
        assert!(validate(&d).has_code(IssueCode::ValueHasChild));
    }

    #[test]
    fn acausal_information() {
        // D1 observes Y, which is caused by the later decision D2. Without
        // no-forgetting there is no cycle, so only the causal check fires.
        let d = DiagramBuilder::new()
            .decision("D1", &["p", "q"], 1, &["Y"])
            .decision("D2", &["p", "q"], 2, &[])
            .chance(
                "Y",
                &["a", "b"],
                &["D2"],
                vec![vec![0.5, 0.5], vec![0.1, 0.9]],
            )
            .value("U", &["D1", "Y"], vec![0.0, 1.0, 2.0, 3.0])
            .build();
        let report = validate(&d);
        assert!(report.has_code(IssueCode::AcausalInfo), "{report}");
        assert!(report.has_code(IssueCode::NoForgetting));
        assert!(!report.has_code(IssueCode::Cycle));
    }

    #[test]
    fn no_forgetting_violation() {
        let d = DiagramBuilder::new()
            .decision("D0", &["p", "q"], 0, &[])
            .chance("X", &["a", "b"], &[], vec![vec![0.5, 0.5]])
            .decision("D1", &["p", "q"], 1, &["X"])
            .value("U", &["D0", "D1"], vec![0.0, 1.0, 2.0, 3.0])
            .build();
        assert!(validate(&d).has_code(IssueCode::NoForgetting));
    }

    #[test]
    fn observing_a_later_decision_is_acausal() {
        let d = DiagramBuilder::new()
            .decision("A", &["p", "q"], 2, &[])
            .decision("B", &["p", "q"], 1, &["A"])
            .value("U", &["A", "B"], vec![0.0, 1.0, 2.0, 3.0])
            .build();
        let report = validate(&d);
        assert!(report.has_code(IssueCode::AcausalInfo), "{report}");
    }

    #[test]
    fn missing_base_case() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.5, 0.5]])
            .value("U", &["X"], vec![0.0, 1.0])
            .build_raw();
        assert!(validate(&d).has_code(IssueCode::MissingBaseCase));
    }

    #[test]
    fn partial_levels_and_duplicate_labels() {
        use crate::diagram::State;
        let d = DiagramBuilder::new()
            .node(Node::chance(
                "X",
                &[],
                vec![State::with_level("a", 1.0), State::new("b")],
                vec![vec![0.5, 0.5]],
            ))
            .node(Node::chance(
                "Y",
                &[],
                vec![State::new("a"), State::new("a")],
                vec![vec![0.5, 0.5]],
            ))
            .value("U", &["X", "Y"], vec![0.0; 4])
            .build();
        let report = validate(&d);
        assert!(report.has_code(IssueCode::PartialLevels));
        assert!(report.has_code(IssueCode::DuplicateLabel));
    }

    #[test]
    fn deterministic_index_out_of_range() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.5, 0.5]])
            .deterministic("S", &["s0", "s1"], &["X"], vec![0, 2])
            .value("U", &["S"], vec![0.0, 1.0])
            .build();
        assert!(validate(&d).has_code(IssueCode::BadTableIndex));
    }

    #[test]
    fn validation_is_idempotent() {
        let d = bet_pass().value("U2", &["C"], vec![1.0, 2.0]).build();
        assert_eq!(validate(&d), validate(&d));
    }
}
