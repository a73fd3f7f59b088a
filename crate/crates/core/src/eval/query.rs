use crate::diagram::InfluenceDiagram;
use crate::eval::model::{Model, UNSET};
use crate::eval::Assignment;
use crate::{Error, Result};

/// Joint distribution over a list of query variables, indexed mixed-radix
/// in query order (last variable fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub variables: Vec<String>,
    pub cards: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn prob(&self, states: &[usize]) -> f64 {
        let idx = states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s);
        self.probs[idx]
    }
}

/// Product of the CPT entries of every chance node under a total
/// assignment of chance, deterministic and decision nodes. Zero when a
/// deterministic node disagrees with its table.
pub fn joint_probability(diagram: &InfluenceDiagram, assignment: &Assignment) -> Result<f64> {
    let model = Model::compile(diagram)?;
    let asg = model.dense(assignment)?;
    let missing: Vec<String> = (0..model.len())
        .filter(|&i| i != model.value && asg[i] == UNSET)
        .map(|i| model.ids[i].clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::PartialAssignment(missing));
    }
    let mut p = 1.0;
    for i in 0..model.len() {
        if model.is_chance(i) || model.is_det(i) {
            p *= model.factor(i, &asg);
        }
    }
    Ok(p)
}

/// Walks every assignment of `closure` (topologically ordered) consistent
/// with `fixed`, calling `visit` with the product of CPT factors. Decision
/// nodes must be fixed, or are spread uniformly when `uniform_decisions`.
fn enumerate(
    model: &Model,
    closure: &[usize],
    fixed: &[usize],
    uniform_decisions: bool,
    visit: &mut dyn FnMut(&[usize], f64),
) {
    #[allow(clippy::too_many_arguments)]
    fn go(
        model: &Model,
        closure: &[usize],
        fixed: &[usize],
        uniform: bool,
        pos: usize,
        weight: f64,
        asg: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        let Some(&node) = closure.get(pos) else {
            visit(asg, weight);
            return;
        };
        if model.is_det(node) {
            let s = model.resolve(node, asg);
            if fixed[node] != UNSET && fixed[node] != s {
                return;
            }
            asg[node] = s;
            go(model, closure, fixed, uniform, pos + 1, weight, asg, visit);
        } else if model.is_decision(node) {
            if fixed[node] != UNSET {
                asg[node] = fixed[node];
                go(model, closure, fixed, uniform, pos + 1, weight, asg, visit);
            } else if uniform {
                let w = weight / model.card[node] as f64;
                for a in 0..model.card[node] {
                    asg[node] = a;
                    go(model, closure, fixed, uniform, pos + 1, w, asg, visit);
                }
            }
        } else {
            let states: Vec<usize> = if fixed[node] != UNSET {
                vec![fixed[node]]
            } else {
                (0..model.card[node]).collect()
            };
            for s in states {
                asg[node] = s;
                let w = weight * model.factor(node, asg);
                if w != 0.0 {
                    go(model, closure, fixed, uniform, pos + 1, w, asg, visit);
                }
            }
        }
        asg[node] = UNSET;
    }
    let mut asg = vec![UNSET; model.len()];
    go(
        model,
        closure,
        fixed,
        uniform_decisions,
        0,
        1.0,
        &mut asg,
        visit,
    );
}

/// `P(query | observed, decided)`.
///
/// Only the ancestral closure of the observed and query variables is
/// enumerated; everything outside it marginalizes to one. Every decision in
/// that closure must appear in `decided`.
pub fn conditional(
    diagram: &InfluenceDiagram,
    decided: &Assignment,
    observed: &Assignment,
    query: &[&str],
) -> Result<Distribution> {
    let model = Model::compile(diagram)?;
    let query_idx: Vec<usize> = query
        .iter()
        .map(|id| model.index(id))
        .collect::<Result<_>>()?;
    for &q in &query_idx {
        if q == model.value {
            return Err(Error::WrongKind {
                id: model.ids[q].clone(),
                expected: "non-value",
            });
        }
    }
    let mut fixed = model.dense(observed)?;
    let decided_dense = model.dense(decided)?;
    for (i, &s) in decided_dense.iter().enumerate() {
        if s != UNSET {
            if !model.is_decision(i) {
                return Err(Error::WrongKind {
                    id: model.ids[i].clone(),
                    expected: "decision",
                });
            }
            fixed[i] = s;
        }
    }
    let mut targets = query_idx.clone();
    targets.extend((0..model.len()).filter(|&i| observed.contains(&model.ids[i])));
    let closure = model.ancestral_closure(&targets);
    if let Some(&d) = closure
        .iter()
        .find(|&&i| model.is_decision(i) && fixed[i] == UNSET)
    {
        return Err(Error::AcausalQuery(model.ids[d].clone()));
    }

    let cards: Vec<usize> = query_idx.iter().map(|&q| model.card[q]).collect();
    let mut probs = vec![0.0; cards.iter().product()];
    enumerate(&model, &closure, &fixed, false, &mut |asg, w| {
        let idx = query_idx
            .iter()
            .fold(0, |acc, &q| acc * model.card[q] + asg[q]);
        probs[idx] += w;
    });
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(Distribution {
        variables: query.iter().map(|s| s.to_string()).collect(),
        cards,
        probs,
    })
}

/// Prior marginal of node `node`, spreading upstream decisions uniformly.
/// `None` when the diagram is not structurally sound.
pub(crate) fn prior_marginal(diagram: &InfluenceDiagram, node: usize) -> Option<Vec<f64>> {
    let model = Model::compile_unchecked(diagram);
    if model.topo.len() != model.len() {
        return None;
    }
    let closure = model.ancestral_closure(&[node]);
    let fixed = vec![UNSET; model.len()];
    let mut probs = vec![0.0; model.card[node]];
    enumerate(&model, &closure, &fixed, true, &mut |asg, w| {
        probs[asg[node]] += w;
    });
    Some(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::DiagramBuilder;

    fn noisy_reading() -> InfluenceDiagram {
        DiagramBuilder::new()
            .chance("X", &["x0", "x1"], &[], vec![vec![0.6, 0.4]])
            .chance(
                "Y",
                &["y0", "y1"],
                &["X"],
                vec![vec![0.8, 0.2], vec![0.3, 0.7]],
            )
            .value("U", &["X"], vec![0.0, 1.0])
            .build()
    }

    #[test]
    fn single_factor_joint() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.6, 0.4]])
            .value("U", &["X"], vec![0.0, 1.0])
            .build();
        let p = joint_probability(&d, &Assignment::new().with("X", 1)).unwrap();
        assert_eq!(p, 0.4);
    }

    #[test]
    fn two_factor_joint() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.6, 0.4]])
            .chance(
                "Y",
                &["a", "b"],
                &["X"],
                vec![vec![0.5, 0.5], vec![0.1, 0.9]],
            )
            .value("U", &["Y"], vec![0.0, 1.0])
            .build();
        let p = joint_probability(&d, &Assignment::new().with("X", 1).with("Y", 1)).unwrap();
        assert!((p - 0.36).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_deterministic_entry() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![0.6, 0.4]])
            .deterministic("S", &["s0", "s1"], &["X"], vec![0, 1])
            .value("U", &["S"], vec![0.0, 1.0])
            .build();
        let p = joint_probability(&d, &Assignment::new().with("X", 1).with("S", 0)).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn partial_assignment_rejected() {
        let d = noisy_reading();
        let err = joint_probability(&d, &Assignment::new().with("X", 0)).unwrap_err();
        assert!(matches!(err, Error::PartialAssignment(ref m) if m == &vec!["Y".to_string()]));
    }

    #[test]
    fn root_prior() {
        let d = noisy_reading();
        let dist = conditional(&d, &Assignment::new(), &Assignment::new(), &["X"]).unwrap();
        assert_eq!(dist.probs, vec![0.6, 0.4]);
    }

    #[test]
    fn bayes_posterior() {
        let d = noisy_reading();
        let dist = conditional(
            &d,
            &Assignment::new(),
            &Assignment::new().with("Y", 0),
            &["X"],
        )
        .unwrap();
        // 0.48 / 0.60
        assert!((dist.prob(&[0]) - 0.8).abs() < 1e-12);
        assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_evidence() {
        let d = DiagramBuilder::new()
            .chance("X", &["a", "b"], &[], vec![vec![1.0, 0.0]])
            .chance(
                "Y",
                &["a", "b"],
                &["X"],
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            )
            .value("U", &["Y"], vec![0.0, 1.0])
            .build();
        let err = conditional(
            &d,
            &Assignment::new(),
            &Assignment::new().with("Y", 1),
            &["X"],
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroEvidence));
    }

    #[test]
    fn undecided_ancestor_is_acausal() {
        let d = DiagramBuilder::new()
            .decision("D", &["p", "q"], 1, &[])
            .chance(
                "Y",
                &["a", "b"],
                &["D"],
                vec![vec![0.5, 0.5], vec![0.1, 0.9]],
            )
            .value("U", &["Y"], vec![0.0, 1.0])
            .build();
        let err = conditional(&d, &Assignment::new(), &Assignment::new(), &["Y"]).unwrap_err();
        assert!(matches!(err, Error::AcausalQuery(ref id) if id == "D"));
        let dist = conditional(
            &d,
            &Assignment::new().with("D", 1),
            &Assignment::new(),
            &["Y"],
        )
        .unwrap();
        assert_eq!(dist.probs, vec![0.1, 0.9]);
    }
}
