//! The rover path-deviation scenario: a rover crossing a plain to a site
//! may detour around a field of rocks, and may first consult the remote
//! rover manager about the field at the price of a communication delay.
//!
//! Geometry: the field is a rectangle of depth `d` along the path and width
//! `w` across it, centred on the nominal path. A lateral deviation `v`
//! clears it when `v >= w / 2`. The detour is travelled out and back on
//! the plain.

use serde::{Deserialize, Serialize};

use crate::associate::{CONSULT, NO_REPORT, REPORT};
use crate::diagram::{validate, InfluenceDiagram, Node, State};
use crate::formula::{compile_formula_node, compile_value_node, index_levels, level_label};
use crate::{Error, Result};

pub const FIELD_DEPTH: &str = "FieldDepth";
pub const FIELD_WIDTH: &str = "FieldWidth";
pub const FIELD_ROCKS: &str = "FieldRocks";
pub const TRACTION: &str = "Traction";
pub const MARS_LOC: &str = "MarsLoc";
pub const ASSOC_VIDEO: &str = "AssocVideo";
pub const USER_VIDEO: &str = "UserVideo";
pub const DEVIATION: &str = "Deviation";
pub const PLAIN_DIST: &str = "PlainDist";
pub const FIELD_DIST: &str = "FieldDist";
pub const FIELD_RATE: &str = "FieldRate";
pub const CONS_DELAY: &str = "ConsDelay";
pub const TOTAL_TIME: &str = "TotalTime";

const PRIOR_TOLERANCE: f64 = 1e-9;

/// A variable whose states carry numeric levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeveledVariable {
    pub levels: Vec<f64>,
    pub prior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledVariable {
    pub states: Vec<String>,
    pub prior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub site_range_m: f64,
    pub plain_rate_mps: f64,
    pub field_depth: LeveledVariable,
    pub field_width: LeveledVariable,
    pub field_rocks: LabeledVariable,
    pub traction: LabeledVariable,
    /// m/s, one row per rocks state, one column per traction state.
    pub field_rate_table: Vec<Vec<f64>>,
    /// Rows by rocks state; columns are the rocks labels as estimated.
    pub assoc_video_cpt: Vec<Vec<f64>>,
    pub user_video_cpt: Vec<Vec<f64>>,
    pub mars_loc: LabeledVariable,
    /// Light round trip per MarsLoc state, minutes.
    pub round_trip_min: Vec<f64>,
    /// Total consultation delay per MarsLoc state (round trip plus the
    /// manager's analysis time), minutes.
    pub cons_delay_min: Vec<f64>,
    pub deviation_alternatives_m: Vec<f64>,
    /// Make MarsLoc known to both decisions.
    #[serde(default)]
    pub observe_mars_loc: bool,
}

/// Pinned defaults; the scenario tests hold them to the qualitative
/// behaviour the model is meant to show.
pub fn reference_config() -> ScenarioConfig {
    let labeled = |states: &[&str], prior: &[f64]| LabeledVariable {
        states: states.iter().map(|s| s.to_string()).collect(),
        prior: prior.to_vec(),
    };
    ScenarioConfig {
        site_range_m: 2000.0,
        plain_rate_mps: 0.01,
        field_depth: LeveledVariable {
            levels: vec![200.0, 400.0, 800.0],
            prior: vec![0.3, 0.5, 0.2],
        },
        field_width: LeveledVariable {
            levels: vec![0.0, 300.0, 600.0],
            prior: vec![0.25, 0.5, 0.25],
        },
        field_rocks: labeled(&["small", "medium", "large"], &[0.4, 0.4, 0.2]),
        traction: labeled(&["good", "poor"], &[0.7, 0.3]),
        field_rate_table: vec![vec![0.009, 0.007], vec![0.005, 0.003], vec![0.002, 0.001]],
        assoc_video_cpt: vec![
            vec![0.7, 0.25, 0.05],
            vec![0.2, 0.6, 0.2],
            vec![0.05, 0.25, 0.7],
        ],
        user_video_cpt: vec![
            vec![0.9, 0.09, 0.01],
            vec![0.05, 0.9, 0.05],
            vec![0.01, 0.09, 0.9],
        ],
        mars_loc: labeled(&["near", "mid", "far"], &[0.25, 0.5, 0.25]),
        round_trip_min: vec![10.0, 25.0, 45.0],
        cons_delay_min: vec![40.0, 55.0, 75.0],
        deviation_alternatives_m: vec![0.0, 50.0, 150.0, 400.0],
        observe_mars_loc: false,
    }
}

fn bad(message: impl Into<String>) -> Error {
    Error::BadConfig(message.into())
}

fn check_prior(name: &str, prior: &[f64], count: usize) -> Result<()> {
    if count == 0 {
        return Err(bad(format!("{name}: no states")));
    }
    if prior.len() != count {
        return Err(bad(format!(
            "{name}: prior has {} entries for {count} states",
            prior.len()
        )));
    }
    if prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(bad(format!(
            "{name}: prior entries must be finite and non-negative"
        )));
    }
    let sum: f64 = prior.iter().sum();
    if (sum - 1.0).abs() > PRIOR_TOLERANCE {
        return Err(bad(format!("{name}: prior sums to {sum}")));
    }
    Ok(())
}

fn check_rows(name: &str, rows: &[Vec<f64>], count: usize, width: usize) -> Result<()> {
    if rows.len() != count {
        return Err(bad(format!(
            "{name}: expected {count} rows, got {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        check_prior(&format!("{name} row {i}"), row, width)?;
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.site_range_m.is_finite() && self.site_range_m > 0.0) {
            return Err(bad("site_range_m must be positive"));
        }
        if !(self.plain_rate_mps.is_finite() && self.plain_rate_mps > 0.0) {
            return Err(bad("plain_rate_mps must be positive"));
        }
        for (name, v) in [
            ("field_depth", &self.field_depth),
            ("field_width", &self.field_width),
        ] {
            check_prior(name, &v.prior, v.levels.len())?;
            if v.levels.iter().any(|l| !l.is_finite() || *l < 0.0) {
                return Err(bad(format!(
                    "{name}: levels must be finite and non-negative"
                )));
            }
        }
        let rocks = self.field_rocks.states.len();
        let traction = self.traction.states.len();
        let locs = self.mars_loc.states.len();
        check_prior("field_rocks", &self.field_rocks.prior, rocks)?;
        check_prior("traction", &self.traction.prior, traction)?;
        check_prior("mars_loc", &self.mars_loc.prior, locs)?;
        if self.field_rate_table.len() != rocks
            || self.field_rate_table.iter().any(|r| r.len() != traction)
        {
            return Err(bad(format!(
                "field_rate_table must be {rocks} x {traction}"
            )));
        }
        if self
            .field_rate_table
            .iter()
            .flatten()
            .any(|r| !(r.is_finite() && *r > 0.0))
        {
            return Err(bad("field rates must be positive"));
        }
        check_rows("assoc_video_cpt", &self.assoc_video_cpt, rocks, rocks)?;
        check_rows("user_video_cpt", &self.user_video_cpt, rocks, rocks)?;
        for (name, delays) in [
            ("round_trip_min", &self.round_trip_min),
            ("cons_delay_min", &self.cons_delay_min),
        ] {
            if delays.len() != locs {
                return Err(bad(format!("{name}: expected {locs} entries")));
            }
            if delays.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(bad(format!(
                    "{name}: delays must be finite and non-negative"
                )));
            }
        }
        if self
            .round_trip_min
            .iter()
            .zip(&self.cons_delay_min)
            .any(|(rt, total)| rt > total)
        {
            return Err(bad("cons_delay_min must include the round trip"));
        }
        let dev = &self.deviation_alternatives_m;
        if dev.first() != Some(&0.0) {
            return Err(bad("deviation_alternatives_m must start at 0"));
        }
        if dev.iter().any(|v| !v.is_finite()) || dev.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("deviation_alternatives_m must be strictly increasing"));
        }
        Ok(())
    }

    /// Same scenario with every consultation delay set to `minutes`.
    pub fn with_uniform_delay(&self, minutes: f64) -> ScenarioConfig {
        let mut c = self.clone();
        c.cons_delay_min = vec![minutes; c.mars_loc.states.len()];
        c.round_trip_min = c.round_trip_min.iter().map(|rt| rt.min(minutes)).collect();
        c
    }
}

/// Distance inside the field for deviation `v`, depth `d`, width `w`.
pub fn field_dist(v: f64, d: f64, w: f64) -> f64 {
    if v < w / 2.0 {
        d
    } else {
        0.0
    }
}

/// Distance on the plain: the rest of the range plus the detour out and
/// back.
pub fn plain_dist(v: f64, d: f64, w: f64, range: f64) -> f64 {
    range - field_dist(v, d, w) + 2.0 * v
}

fn leveled_states(levels: &[f64]) -> Vec<State> {
    levels
        .iter()
        .map(|&l| State::with_level(level_label(l), l))
        .collect()
}

fn labeled_states(labels: &[String]) -> Vec<State> {
    labels.iter().map(|l| State::new(l.clone())).collect()
}

/// Compiles the scenario into a validated diagram.
pub fn build_mrma_diagram(config: &ScenarioConfig) -> Result<InfluenceDiagram> {
    config.check()?;
    let c = config;
    let rocks = labeled_states(&c.field_rocks.states);
    let depth = &c.field_depth.levels[..];
    let width = &c.field_width.levels[..];
    let dev = &c.deviation_alternatives_m[..];
    let range = c.site_range_m;

    let mut report_states = rocks.clone();
    report_states.push(State::new(NO_REPORT));
    let n_rocks = rocks.len();
    let report_table: Vec<usize> = (0..n_rocks).map(|_| n_rocks).chain(0..n_rocks).collect();

    let mut consult_info = vec![ASSOC_VIDEO];
    let mut deviation_info = vec![ASSOC_VIDEO, CONSULT, REPORT];
    if c.observe_mars_loc {
        consult_info.push(MARS_LOC);
        deviation_info.push(MARS_LOC);
    }

    let geometry = [(DEVIATION, dev), (FIELD_DEPTH, depth), (FIELD_WIDTH, width)];
    let plain = compile_formula_node(PLAIN_DIST, &geometry, |x| {
        plain_dist(x[0], x[1], x[2], range)
    })?;
    let field = compile_formula_node(FIELD_DIST, &geometry, |x| field_dist(x[0], x[1], x[2]))?;
    let n_traction = c.traction.states.len();
    let rate = compile_formula_node(
        FIELD_RATE,
        &[
            (FIELD_ROCKS, &index_levels(n_rocks)),
            (TRACTION, &index_levels(n_traction)),
        ],
        |x| c.field_rate_table[x[0] as usize][x[1] as usize],
    )?;
    let delay = compile_formula_node(
        CONS_DELAY,
        &[(MARS_LOC, &index_levels(c.mars_loc.states.len()))],
        |x| c.cons_delay_min[x[0] as usize],
    )?;
    let level_of = |n: &Node| n.levels().expect("formula nodes carry levels");
    let (plain_l, field_l, rate_l, delay_l) = (
        level_of(&plain),
        level_of(&field),
        level_of(&rate),
        level_of(&delay),
    );
    let plain_rate = c.plain_rate_mps;
    let total = compile_value_node(
        TOTAL_TIME,
        &[
            (CONSULT, &index_levels(2)),
            (PLAIN_DIST, &plain_l),
            (FIELD_DIST, &field_l),
            (FIELD_RATE, &rate_l),
            (CONS_DELAY, &delay_l),
        ],
        |x| -(x[1] / plain_rate + x[2] / x[3] + x[0] * x[4] * 60.0),
    )?;

    let nodes = vec![
        Node::chance(
            FIELD_DEPTH,
            &[],
            leveled_states(depth),
            vec![c.field_depth.prior.clone()],
        ),
        Node::chance(
            FIELD_WIDTH,
            &[],
            leveled_states(width),
            vec![c.field_width.prior.clone()],
        ),
        Node::chance(
            FIELD_ROCKS,
            &[],
            rocks.clone(),
            vec![c.field_rocks.prior.clone()],
        ),
        Node::chance(
            TRACTION,
            &[],
            labeled_states(&c.traction.states),
            vec![c.traction.prior.clone()],
        ),
        Node::chance(
            MARS_LOC,
            &[],
            labeled_states(&c.mars_loc.states),
            vec![c.mars_loc.prior.clone()],
        ),
        Node::chance(
            ASSOC_VIDEO,
            &[FIELD_ROCKS],
            rocks.clone(),
            c.assoc_video_cpt.clone(),
        ),
        Node::chance(
            USER_VIDEO,
            &[FIELD_ROCKS],
            rocks.clone(),
            c.user_video_cpt.clone(),
        ),
        Node::decision(
            CONSULT,
            vec![State::new("no"), State::new("yes")],
            1,
            &consult_info,
        ),
        Node::deterministic(REPORT, &[CONSULT, USER_VIDEO], report_states, report_table),
        Node::decision(DEVIATION, leveled_states(dev), 2, &deviation_info),
        plain,
        field,
        rate,
        delay,
        total,
    ];
    let diagram = InfluenceDiagram::new(nodes, Default::default()).with_default_base_case();
    let report = validate(&diagram);
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }
    Ok(diagram)
}

/// Largest minus smallest `TotalTime` utility reachable without consulting.
pub fn no_consult_utility_spread(config: &ScenarioConfig) -> Result<f64> {
    let diagram = build_mrma_diagram(config)?;
    let node = diagram.node(TOTAL_TIME).expect("built above");
    let utilities = match &node.kind {
        crate::diagram::NodeKind::Value { utilities } => utilities,
        _ => unreachable!("TotalTime is the value node"),
    };
    // Consult is the first parent, so the `no` half is the first half.
    let no = &utilities[..utilities.len() / 2];
    let max = no.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = no.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}
