//! Shared test support: a seeded random diagram generator and a brute-force
//! oracle that enumerates every policy and every joint assignment directly
//! from the node tables, without going through the library's solver.

#![allow(dead_code)]

use associate_id::diagram::{states, NodeKind};
use associate_id::{DiagramBuilder, InfluenceDiagram, Node, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Diagrams whose policy space exceeds this are regenerated.
pub const MAX_POLICIES: f64 = 2000.0;

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    if n > 1 && rng.random_bool(0.2) {
        let k = rng.random_range(0..n);
        row[k] = 0.0;
    }
    let sum: f64 = row.iter().sum();
    row.iter().map(|p| p / sum).collect()
}

fn pick_subset(rng: &mut ChaCha8Rng, pool: &[String], max: usize) -> Vec<String> {
    let mut out: Vec<String> = pool
        .iter()
        .filter(|_| rng.random_bool(0.5))
        .cloned()
        .collect();
    while out.len() > max {
        let k = rng.random_range(0..out.len());
        out.remove(k);
    }
    out
}

/// Number of deterministic policies of a diagram.
pub fn policy_count(diagram: &InfluenceDiagram) -> f64 {
    diagram
        .decisions()
        .iter()
        .map(|d| {
            let info: usize = d
                .parents
                .iter()
                .map(|p| diagram.node(p).unwrap().states.len())
                .product();
            (d.states.len() as f64).powi(info as i32)
        })
        .product()
}

/// At most 3 chance nodes, at most 2 decisions, at most 4 states each,
/// optionally one deterministic node; no-forgetting holds by
/// construction.
pub fn random_diagram(seed: u64) -> InfluenceDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let d = try_random_diagram(&mut rng);
        if policy_count(&d) <= MAX_POLICIES {
            return d;
        }
    }
}

fn try_random_diagram(rng: &mut ChaCha8Rng) -> InfluenceDiagram {
    let n_chance = rng.random_range(1..=3);
    let n_dec = rng.random_range(1..=2);
    let n_det = usize::from(rng.random_bool(0.3));
    let mut kinds: Vec<u8> = std::iter::repeat_n(0, n_chance)
        .chain(std::iter::repeat_n(1, n_dec))
        .chain(std::iter::repeat_n(2, n_det))
        .collect();
    // Fisher-Yates
    for i in (1..kinds.len()).rev() {
        let j = rng.random_range(0..=i);
        kinds.swap(i, j);
    }

    let mut builder = DiagramBuilder::new();
    let mut earlier: Vec<(String, usize)> = Vec::new();
    let mut chance_so_far: Vec<String> = Vec::new();
    let mut last_info: Vec<String> = Vec::new();
    let (mut c, mut d, mut t) = (0, 0, 0);
    for kind in kinds {
        let n_states = rng.random_range(2..=4);
        let ids: Vec<String> = earlier.iter().map(|(id, _)| id.clone()).collect();
        let card_of = |p: &String, earlier: &[(String, usize)]| {
            earlier.iter().find(|(id, _)| id == p).unwrap().1
        };
        match kind {
            0 => {
                let id = format!("C{c}");
                c += 1;
                let parents = pick_subset(rng, &ids, 2);
                let rows: usize = parents.iter().map(|p| card_of(p, &earlier)).product();
                let cpt = (0..rows).map(|_| random_row(rng, n_states)).collect();
                let lab = labels("s", n_states);
                let refs: Vec<&str> = lab.iter().map(String::as_str).collect();
                let pr: Vec<&str> = parents.iter().map(String::as_str).collect();
                builder = builder.node(Node::chance(id.clone(), &pr, states(&refs), cpt));
                chance_so_far.push(id.clone());
                earlier.push((id, n_states));
            }
            1 => {
                let id = format!("D{d}");
                d += 1;
                let mut info = last_info.clone();
                if d > 1 {
                    info.push(format!("D{}", d - 2));
                }
                for x in pick_subset(rng, &chance_so_far, 2) {
                    if !info.contains(&x) {
                        info.push(x);
                    }
                }
                let lab = labels("a", n_states.min(3));
                let refs: Vec<&str> = lab.iter().map(String::as_str).collect();
                let ir: Vec<&str> = info.iter().map(String::as_str).collect();
                builder = builder.node(Node::decision(id.clone(), states(&refs), d as u32, &ir));
                last_info = info;
                earlier.push((id, lab.len()));
            }
            _ => {
                let id = format!("T{t}");
                t += 1;
                let mut parents = pick_subset(rng, &ids, 2);
                if parents.is_empty() {
                    if let Some(first) = ids.first() {
                        parents.push(first.clone());
                    }
                }
                let rows: usize = parents.iter().map(|p| card_of(p, &earlier)).product();
                let table = (0..rows).map(|_| rng.random_range(0..n_states)).collect();
                let lab = labels("v", n_states);
                let refs: Vec<&str> = lab.iter().map(String::as_str).collect();
                let pr: Vec<&str> = parents.iter().map(String::as_str).collect();
                builder = builder.node(Node::deterministic(id.clone(), &pr, states(&refs), table));
                earlier.push((id, n_states));
            }
        }
    }
    let ids: Vec<String> = earlier.iter().map(|(id, _)| id.clone()).collect();
    let mut parents = pick_subset(rng, &ids, 3);
    if parents.is_empty() {
        parents.push(ids[rng.random_range(0..ids.len())].clone());
    }
    let size: usize = parents
        .iter()
        .map(|p| earlier.iter().find(|(id, _)| id == p).unwrap().1)
        .product();
    let utilities = (0..size).map(|_| rng.random_range(-10.0..10.0)).collect();
    let pr: Vec<&str> = parents.iter().map(String::as_str).collect();
    builder.value("U", &pr, utilities).build()
}

fn mixed_index(states: &[usize], cards: &[usize]) -> usize {
    states
        .iter()
        .zip(cards)
        .fold(0, |acc, (&s, &c)| acc * c + s)
}

/// Choice table per decision: `choices[decision_slot][info_index]`.
pub type RawPolicy = Vec<Vec<usize>>;

struct Oracle<'a> {
    nodes: &'a [Node],
    /// Parent positions in `nodes`, per node.
    parents: Vec<Vec<usize>>,
    cards: Vec<usize>,
    /// Decision slot of each node, by decision order.
    slot: Vec<Option<usize>>,
}

impl<'a> Oracle<'a> {
    fn new(diagram: &'a InfluenceDiagram) -> Self {
        let nodes = diagram.nodes();
        let pos = |id: &str| nodes.iter().position(|n| n.id == id).unwrap();
        let parents: Vec<Vec<usize>> = nodes
            .iter()
            .map(|n| n.parents.iter().map(|p| pos(p)).collect())
            .collect();
        // The oracle walks nodes in declaration order; generated diagrams
        // and builders declare parents first.
        for (i, ps) in parents.iter().enumerate() {
            assert!(
                ps.iter().all(|&p| p < i),
                "declaration order is topological"
            );
        }
        let mut order: Vec<(u32, usize)> = nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.kind {
                NodeKind::Decision { order } => Some((order, i)),
                _ => None,
            })
            .collect();
        order.sort();
        let mut slot = vec![None; nodes.len()];
        for (s, (_, i)) in order.iter().enumerate() {
            slot[*i] = Some(s);
        }
        Oracle {
            nodes,
            cards: nodes.iter().map(|n| n.states.len()).collect(),
            parents,
            slot,
        }
    }

    fn decisions(&self) -> Vec<usize> {
        let mut d: Vec<(usize, usize)> = self
            .slot
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (s, i)))
            .collect();
        d.sort();
        d.into_iter().map(|(_, i)| i).collect()
    }

    fn info_states(&self, node: usize) -> usize {
        self.parents[node].iter().map(|&p| self.cards[p]).product()
    }

    fn eu(&self, policy: &RawPolicy) -> f64 {
        let mut asg = vec![0usize; self.nodes.len()];
        self.walk(0, 1.0, &mut asg, policy)
    }

    fn walk(&self, i: usize, p: f64, asg: &mut Vec<usize>, policy: &RawPolicy) -> f64 {
        if p == 0.0 {
            return 0.0;
        }
        if i == self.nodes.len() {
            unreachable!("value node terminates the walk");
        }
        let node = &self.nodes[i];
        let pstates: Vec<usize> = self.parents[i].iter().map(|&q| asg[q]).collect();
        let pcards: Vec<usize> = self.parents[i].iter().map(|&q| self.cards[q]).collect();
        let row = mixed_index(&pstates, &pcards);
        match &node.kind {
            NodeKind::Chance { cpt } => {
                let mut total = 0.0;
                for (s, &q) in cpt[row].iter().enumerate() {
                    asg[i] = s;
                    total += self.walk(i + 1, p * q, asg, policy);
                }
                total
            }
            NodeKind::Deterministic { table } => {
                asg[i] = table[row];
                self.walk(i + 1, p, asg, policy)
            }
            NodeKind::Decision { .. } => {
                asg[i] = policy[self.slot[i].unwrap()][row];
                self.walk(i + 1, p, asg, policy)
            }
            NodeKind::Value { utilities } => {
                assert_eq!(i + 1, self.nodes.len(), "value node is declared last");
                p * utilities[row]
            }
        }
    }
}

/// Expected utility of `policy` by full enumeration.
pub fn oracle_eu(diagram: &InfluenceDiagram, policy: &RawPolicy) -> f64 {
    Oracle::new(diagram).eu(policy)
}

/// Maximum over every deterministic policy.
pub fn oracle_meu(diagram: &InfluenceDiagram) -> f64 {
    let oracle = Oracle::new(diagram);
    let decisions = oracle.decisions();
    // One mixed-radix digit per (decision, info state).
    let mut digits: Vec<(usize, usize, usize)> = Vec::new();
    for (s, &d) in decisions.iter().enumerate() {
        for j in 0..oracle.info_states(d) {
            digits.push((s, j, oracle.cards[d]));
        }
    }
    let mut policy: RawPolicy = decisions
        .iter()
        .map(|&d| vec![0; oracle.info_states(d)])
        .collect();
    let mut best = f64::NEG_INFINITY;
    loop {
        best = best.max(oracle.eu(&policy));
        let mut k = 0;
        loop {
            if k == digits.len() {
                return best;
            }
            let (s, j, card) = digits[k];
            policy[s][j] += 1;
            if policy[s][j] < card {
                break;
            }
            policy[s][j] = 0;
            k += 1;
        }
    }
}

/// The library policy as a raw table (unset choices become 0).
pub fn raw_policy(policy: &Policy) -> RawPolicy {
    policy
        .rules
        .iter()
        .map(|r| r.choices.iter().map(|c| c.unwrap_or(0)).collect())
        .collect()
}

pub fn bet_pass() -> InfluenceDiagram {
    DiagramBuilder::new()
        .chance("W", &["win", "lose"], &[], vec![vec![0.6, 0.4]])
        .decision("D", &["bet", "pass"], 1, &[])
        .value("U", &["D", "W"], vec![100.0, 0.0, 50.0, 50.0])
        .build()
}

#[cfg(test)]
mod generator_stats {
    #[test]
    fn generator_covers_shapes() {
        let mut two_dec = 0;
        let mut info = 0;
        let mut det = 0;
        let mut policies = 0.0;
        for seed in 0..300 {
            let d = super::random_diagram(seed);
            let decs = d.decisions();
            if decs.len() == 2 {
                two_dec += 1;
            }
            if decs
                .iter()
                .any(|x| x.parents.iter().any(|p| p.starts_with('C')))
            {
                info += 1;
            }
            if d.nodes().iter().any(|n| n.is_deterministic()) {
                det += 1;
            }
            policies += super::policy_count(&d);
        }
        assert!(two_dec > 50 && info > 50 && det > 50);
        assert!(policies / 300.0 > 10.0);
    }
}
