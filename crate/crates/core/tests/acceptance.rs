//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines show up in plain `cargo test` output.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use associate_id::analysis::{evpi, fix_below_threshold, tornado};
use associate_id::associate::{
    build_associate_diagram, consult_deltas, symmetric_spec, ACTION, CONSULT, CONSULT_NO,
};
use associate_id::eval::joint_size;
use associate_id::io::{
    config_from_str, config_to_string, load_model, model_from_str, model_to_string,
    policy_from_str, policy_to_string, save_model,
};
use associate_id::mrma::{
    build_mrma_diagram, no_consult_utility_spread, reference_config, DEVIATION, FIELD_ROCKS,
    FIELD_WIDTH,
};
use associate_id::{
    expected_utility, simulate, solve, Assignment, Error, InfluenceDiagram, Policy,
};
use common::{bet_pass, oracle_eu, oracle_meu, random_diagram, raw_policy};

const ORACLE_DIAGRAMS: u64 = 250;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const EVPI_TOL: f64 = 1e-9;
const GATING_TOL: f64 = 1e-12;
const DEMO_BUDGET: Duration = Duration::from_secs(10);
const MC_RUNS: u64 = 200_000;
const MC_SIGMAS: f64 = 4.0;
const BET_PASS_SEED: u64 = 7;
const MRMA_SEED: u64 = 20_261_019;
const ROUND_TRIP_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn reference() -> InfluenceDiagram {
    build_mrma_diagram(&reference_config()).expect("reference config builds")
}

fn no_deviation() -> Assignment {
    Assignment::new()
        .with(CONSULT, CONSULT_NO)
        .with(DEVIATION, 0)
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..ORACLE_DIAGRAMS {
        let d = random_diagram(seed);
        let policy = solve(&d).map_err(|e| format!("seed {seed}: {e}"))?;
        let best = oracle_meu(&d);
        let attained = oracle_eu(&d, &raw_policy(&policy));
        worst = worst
            .max((policy.meu - best).abs())
            .max((attained - best).abs());
        check(
            (policy.meu - best).abs() <= ORACLE_TOL && (attained - best).abs() <= ORACLE_TOL,
            format!(
                "seed {seed}: meu {} attained {attained} oracle {best}",
                policy.meu
            ),
        )?;
    }
    let elapsed = start.elapsed();
    check(elapsed < ORACLE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_DIAGRAMS} diagrams, max |error| {worst:.1e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn information_monotonicity() -> Outcome {
    let (mut pairs, mut observed, mut min) = (0, 0, f64::INFINITY);
    for seed in 0..ORACLE_DIAGRAMS {
        let d = random_diagram(seed);
        for var in d.chance_ids() {
            for dec in d.decisions() {
                let v = match evpi(&d, var, &dec.id) {
                    Ok(v) => v,
                    Err(Error::AcausalInfo { .. }) => continue,
                    Err(e) => return Err(format!("seed {seed}: {e}")),
                };
                pairs += 1;
                min = min.min(v);
                check(
                    v >= -EVPI_TOL,
                    format!("seed {seed}: evpi({var}, {}) = {v}", dec.id),
                )?;
                if dec.parents.iter().any(|p| p == var) {
                    observed += 1;
                    check(
                        v == 0.0,
                        format!("seed {seed}: observed {var} has evpi {v}"),
                    )?;
                }
            }
        }
    }
    check(observed > 0, "no already-observed pairs generated")?;
    Ok(format!(
        "{pairs} legal pairs, min evpi {min:.3e}, {observed} already-observed pairs exactly 0"
    ))
}

fn gating_invariance() -> Outcome {
    let spec = symmetric_spec(0.35, 0.75, 0.9, 3.0);
    let channels = [
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.1, 0.9], vec![0.8, 0.2]],
        vec![vec![0.33, 0.67], vec![0.99, 0.01]],
    ];
    let base = build_associate_diagram(&spec).map_err(|e| e.to_string())?;
    let forced_base = solve(&base.with_decision_fixed(CONSULT, CONSULT_NO).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    let mut strategies = 0;
    for channel in channels {
        let mut perturbed = spec.clone();
        perturbed.human_channel = channel;
        let other = build_associate_diagram(&perturbed).map_err(|e| e.to_string())?;
        // Every consult-never strategy: Action rules over all 2^k patterns
        // on the four reachable no-report information states.
        let template = Policy::empty_for(&base);
        for mask in 0..16u32 {
            let mut policy = template.clone();
            for rule in &mut policy.rules {
                for (i, c) in rule.choices.iter_mut().enumerate() {
                    *c = Some(if rule.decision == ACTION {
                        ((mask >> (i % 4)) & 1) as usize
                    } else {
                        CONSULT_NO
                    });
                }
            }
            let a = expected_utility(&base, &policy).unwrap();
            let b = expected_utility(&other, &policy).unwrap();
            worst = worst.max((a - b).abs());
            strategies += 1;
        }
        let forced = solve(&other.with_decision_fixed(CONSULT, CONSULT_NO).unwrap()).unwrap();
        let meu_drift = (forced.meu - forced_base.meu).abs();
        worst = worst.max(meu_drift);
        check(
            forced.rules == forced_base.rules,
            "forced-no policy changed with the human channel",
        )?;
    }
    check(worst <= GATING_TOL, format!("EU drift {worst:e}"))?;
    Ok(format!(
        "{strategies} consult-never strategies and forced-no MEU, max drift {worst:.1e}; forced-no policy identical"
    ))
}

fn consult_choices(d: &InfluenceDiagram) -> Vec<usize> {
    let policy = solve(d).unwrap();
    let rule = policy.rule(CONSULT).unwrap();
    rule.choices.iter().map(|c| c.unwrap()).collect()
}

fn mixed_initiative() -> Outcome {
    let config = reference_config();
    let choices = consult_choices(&reference());
    check(
        choices.iter().collect::<BTreeSet<_>>().len() > 1,
        format!("reference consult policy constant: {choices:?}"),
    )?;

    let free = build_mrma_diagram(&config.with_uniform_delay(0.0)).unwrap();
    let min_delta = consult_deltas(&free)
        .unwrap()
        .iter()
        .filter_map(|d| d.delta)
        .fold(f64::INFINITY, f64::min);
    check(
        min_delta >= -EVPI_TOL,
        format!("zero delay: min delta {min_delta}"),
    )?;

    let spread = no_consult_utility_spread(&config).unwrap();
    let inflated = spread / 60.0 + 1.0;
    let slow = build_mrma_diagram(&config.with_uniform_delay(inflated)).unwrap();
    let slow_choices = consult_choices(&slow);
    check(
        slow_choices.iter().all(|&c| c == CONSULT_NO),
        format!("inflated delay still consults: {slow_choices:?}"),
    )?;

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_associate-id"))
        .args(["mrma", "demo"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    check(out.status.success(), format!("demo exit {:?}", out.status))?;
    check(
        stdout.contains("consult policy: mixed"),
        "demo did not report mixed policy",
    )?;
    check(elapsed < DEMO_BUDGET, format!("demo took {elapsed:?}"))?;
    Ok(format!(
        "consult {choices:?} by AssocVideo; zero delay min delta {min_delta:.1} s; \
         delay {inflated:.0} min -> never; demo {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn sensitivity_ranking() -> Outcome {
    let d = reference();
    let report = tornado(&d, &no_deviation()).map_err(|e| e.to_string())?;
    let first = &report.entries[0].variable;
    check(first == FIELD_ROCKS, format!("{first} ranked first"))?;
    let width = report.entry(FIELD_WIDTH).unwrap().share;
    check(width > 0.0, "FieldWidth share is zero")?;
    let value = evpi(&d, FIELD_WIDTH, DEVIATION).map_err(|e| e.to_string())?;
    check(
        value > 0.0,
        format!("evpi(FieldWidth, Deviation) = {value}"),
    )?;
    Ok(format!(
        "FieldRocks share {:.4}, FieldWidth share {width:.4}, evpi(FieldWidth, Deviation) {value:.1}",
        report.entries[0].share
    ))
}

fn threshold_fixing() -> Outcome {
    let d = reference();
    let full_size = joint_size(&d).unwrap();
    let full = solve(&d).unwrap().meu;
    let reduced = fix_below_threshold(&d, 0.95, &no_deviation()).map_err(|e| e.to_string())?;
    let reduced_size = joint_size(&reduced.diagram).unwrap();
    let reduced_meu = solve(&reduced.diagram).unwrap().meu;
    let delta = reduced_meu - full;
    check(
        reduced_size < full_size,
        format!("joint {reduced_size} vs {full_size}"),
    )?;
    check(delta.is_finite(), "MEU delta not finite")?;

    let all = fix_below_threshold(&d, 1.0, &no_deviation()).unwrap();
    let zero: Vec<String> = all
        .report
        .entries
        .iter()
        .filter(|e| e.swing == 0.0)
        .map(|e| e.variable.clone())
        .collect();
    let fixed: BTreeSet<&String> = all.fixed.iter().collect();
    check(
        fixed == zero.iter().collect(),
        format!("threshold 1 fixed {:?}, zero-swing {zero:?}", all.fixed),
    )?;
    Ok(format!(
        "0.95 fixes {:?}: joint {full_size} -> {reduced_size}, MEU delta {delta:.3}; 1.0 fixes {:?}",
        reduced.fixed, all.fixed
    ))
}

fn monte_carlo() -> Outcome {
    let mut lines = Vec::new();
    for (name, d, seed) in [
        ("bet/pass", bet_pass(), BET_PASS_SEED),
        ("mrma", reference(), MRMA_SEED),
    ] {
        let policy = solve(&d).unwrap();
        let exact = expected_utility(&d, &policy).unwrap();
        let sim = simulate(&d, &policy, MC_RUNS, seed).unwrap();
        let gap = (sim.mean_utility - exact).abs();
        check(
            gap <= MC_SIGMAS * sim.std_error,
            format!(
                "{name}: |{} - {exact}| > 4 x {}",
                sim.mean_utility, sim.std_error
            ),
        )?;
        lines.push(format!("{name} {:.2} SE", gap / sim.std_error));
    }
    Ok(lines.join(", "))
}

fn round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut docs = 0;
    let mut models: Vec<InfluenceDiagram> = vec![bet_pass(), reference()];
    models.extend((0..20).map(random_diagram));
    for (i, d) in models.iter().enumerate() {
        let text = model_to_string(d);
        let path = dir.path().join(format!("m{i}.json"));
        std::fs::write(&path, &text).unwrap();
        let loaded = load_model(&path).map_err(|e| e.to_string())?;
        let again = dir.path().join(format!("m{i}b.json"));
        save_model(&loaded, &again).unwrap();
        check(
            std::fs::read(&again).unwrap() == text.as_bytes(),
            format!("model {i} bytes differ"),
        )?;

        let policy = solve(d).unwrap();
        let ptext = policy_to_string(d, &policy);
        let back = policy_from_str(d, &ptext).map_err(|e| e.to_string())?;
        check(
            policy_to_string(d, &back) == ptext,
            format!("policy {i} bytes differ"),
        )?;
        docs += 2;
    }
    let ctext = config_to_string(&reference_config());
    let config = config_from_str(&ctext).map_err(|e| e.to_string())?;
    check(config_to_string(&config) == ctext, "config bytes differ")?;
    docs += 1;

    let in_memory = solve(&reference()).unwrap().meu;
    let reloaded = model_from_str(&model_to_string(&reference())).unwrap();
    let meu = solve(&reloaded).unwrap().meu;
    check(
        (meu - in_memory).abs() <= ROUND_TRIP_TOL,
        format!("reloaded MEU {meu} vs {in_memory}"),
    )?;
    Ok(format!(
        "{docs} documents byte-identical; reloaded MRMA MEU diff {:.1e}",
        (meu - in_memory).abs()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("solver oracle equivalence", solver_oracle),
        ("information monotonicity", information_monotonicity),
        ("gating invariance", gating_invariance),
        ("mixed-initiative behaviour", mixed_initiative),
        ("sensitivity ranking and width information", sensitivity_ranking),
        ("variance-threshold fixing", threshold_fixing),
        ("Monte Carlo agreement", monte_carlo),
        ("format round-trip", round_trip),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
