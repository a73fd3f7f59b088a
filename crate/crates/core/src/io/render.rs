//! Plain-text reports for the terminal.

use std::fmt::Write;

use crate::analysis::TornadoReport;
use crate::diagram::InfluenceDiagram;
use crate::eval::Policy;

/// Half-width of a tornado bar, in columns.
pub const TORNADO_HALF_WIDTH: usize = 40;

pub fn render_policy(diagram: &InfluenceDiagram, policy: &Policy) -> String {
    let mut out = String::new();
    writeln!(out, "MEU: {}", policy.meu).unwrap();
    for rule in &policy.rules {
        let node = diagram
            .node(&rule.decision)
            .expect("policy matches diagram");
        writeln!(out).unwrap();
        if rule.info.is_empty() {
            writeln!(out, "{} (no information)", rule.decision).unwrap();
        } else {
            writeln!(out, "{} given {}", rule.decision, rule.info.join(", ")).unwrap();
        }
        for i in 0..rule.state_count() {
            let when: Vec<String> = rule
                .info
                .iter()
                .zip(rule.decode(i))
                .map(|(v, s)| {
                    format!(
                        "{v}={}",
                        diagram.node(v).expect("validated").states[s].label
                    )
                })
                .collect();
            let choice = rule.choices[i].map_or("?", |c| node.states[c].label.as_str());
            let prefix = if when.is_empty() {
                String::new()
            } else {
                format!("{} ", when.join(" "))
            };
            let note = if rule.reachable[i] {
                ""
            } else {
                "  (unreachable)"
            };
            writeln!(out, "  {prefix}-> {choice}{note}").unwrap();
        }
    }
    out
}

/// Columns left (negative) or right of the centre for utility `u`.
fn offset(u: f64, base: f64, max_swing: f64) -> i64 {
    if max_swing <= 0.0 {
        return 0;
    }
    ((u - base) * TORNADO_HALF_WIDTH as f64 / max_swing).round() as i64
}

/// One row per variable: a bar from the low to the high utility, drawn
/// around a centre line at the base-case utility and scaled so the widest
/// swing spans [`TORNADO_HALF_WIDTH`] columns.
pub fn render_tornado_ascii(report: &TornadoReport) -> String {
    let max_swing = report.entries.iter().map(|e| e.swing).fold(0.0, f64::max);
    let name_width = report
        .entries
        .iter()
        .map(|e| e.variable.len())
        .max()
        .unwrap_or(0);
    let half = TORNADO_HALF_WIDTH as i64;
    let mut out = String::new();
    writeln!(out, "base utility {}", report.base_utility).unwrap();
    for e in &report.entries {
        let lo = offset(e.low, report.base_utility, max_swing).clamp(-half, half);
        let hi = offset(e.high, report.base_utility, max_swing).clamp(-half, half);
        let bar: String = (-half..=half)
            .map(|c| {
                if c == 0 {
                    '|'
                } else if (c < 0 && c >= lo) || (c > 0 && c <= hi) {
                    '#'
                } else {
                    ' '
                }
            })
            .collect();
        writeln!(
            out,
            "{:<name_width$} {}  [{}, {}] swing {} share {:.4}",
            e.variable, bar, e.low, e.high, e.swing, e.share
        )
        .unwrap();
    }
    out
}

/// Number of `#` cells in a rendered tornado row.
pub fn bar_width(row: &str) -> usize {
    row.chars().filter(|&c| c == '#').count()
}
