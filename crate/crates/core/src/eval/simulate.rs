use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::InfluenceDiagram;
use crate::eval::model::{Model, UNSET};
use crate::eval::rollback::{bind_policy, decision_slots};
use crate::eval::{Assignment, Policy};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub runs: u64,
    pub seed: u64,
    pub keep_traces: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub assignment: Assignment,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub runs: u64,
    pub mean_utility: f64,
    /// Sample standard deviation over `sqrt(runs)`.
    pub std_error: f64,
    pub seed: u64,
    pub traces: Option<Vec<Trace>>,
}

/// Forward-samples `runs` scenarios under `policy` from a ChaCha8 stream
/// seeded with `seed`.
pub fn simulate(
    diagram: &InfluenceDiagram,
    policy: &Policy,
    runs: u64,
    seed: u64,
) -> Result<SimReport> {
    simulate_with(
        diagram,
        policy,
        &SimOptions {
            runs,
            seed,
            keep_traces: false,
        },
    )
}

pub fn simulate_with(
    diagram: &InfluenceDiagram,
    policy: &Policy,
    options: &SimOptions,
) -> Result<SimReport> {
    if options.runs == 0 {
        return Err(Error::EmptyRun);
    }
    let model = Model::compile(diagram)?;
    let slots = decision_slots(diagram, &model);
    let rules = bind_policy(&model, &slots, policy)?;
    let mut slot_of = vec![UNSET; model.len()];
    for (k, (node, _)) in slots.iter().enumerate() {
        slot_of[*node] = k;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut traces = options.keep_traces.then(Vec::new);
    let mut asg = vec![UNSET; model.len()];
    // Welford running moments.
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for run in 1..=options.runs {
        for &node in &model.topo {
            if node == model.value {
                continue;
            }
            asg[node] = if model.is_chance(node) {
                let u: f64 = rng.random();
                let row = model.row(node, &asg);
                let mut acc = 0.0;
                let mut pick = None;
                for (s, &p) in row.iter().enumerate() {
                    acc += p;
                    if p > 0.0 && u < acc {
                        pick = Some(s);
                        break;
                    }
                }
                // Rounding can leave u just above the final cumulative sum.
                pick.unwrap_or_else(|| row.iter().rposition(|&p| p > 0.0).unwrap_or(0))
            } else if model.is_det(node) {
                model.resolve(node, &asg)
            } else {
                let (_, info) = &slots[slot_of[node]];
                let rule = rules[slot_of[node]];
                let idx = info.iter().fold(0, |acc, &q| acc * model.card[q] + asg[q]);
                rule.choices[idx].ok_or_else(|| {
                    let states: Vec<usize> = info.iter().map(|&q| asg[q]).collect();
                    Error::IncompletePolicy {
                        decision: rule.decision.clone(),
                        state: model.labels(diagram, info, &states),
                    }
                })?
            };
        }
        let u = model.utility(&asg);
        let delta = u - mean;
        mean += delta / run as f64;
        m2 += delta * (u - mean);
        if let Some(traces) = traces.as_mut() {
            traces.push(Trace {
                assignment: (0..model.len())
                    .filter(|&i| i != model.value)
                    .map(|i| (model.ids[i].clone(), asg[i]))
                    .collect(),
                utility: u,
            });
        }
    }
    let n = options.runs as f64;
    let std_error = if options.runs > 1 {
        (m2 / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(SimReport {
        runs: options.runs,
        mean_utility: mean,
        std_error,
        seed: options.seed,
        traces,
    })
}
