//! Exact decision engine for discrete influence diagrams.
//!
//! The crate covers the whole pipeline for small, desk-scale decision
//! models: a validated diagram model ([`diagram`]), exact backward-induction
//! solving and policy scoring ([`eval`]), deterministic sensitivity analysis
//! and value of information ([`analysis`]), a builder for the generic
//! associate consult/act template ([`associate`]), the rover path-deviation
//! scenario ([`mrma`]), and canonical file formats plus report rendering
//! ([`io`]).

pub mod analysis;
pub mod associate;
pub mod diagram;
mod error;
pub mod eval;
pub mod formula;
pub mod io;
pub mod mrma;

pub use crate::diagram::{
    barren_prune, stage_partition, validate, DiagramBuilder, InfluenceDiagram, Issue, IssueCode,
    Node, NodeKind, Stage, State, ValidationReport,
};
pub use crate::error::{Error, Result};
pub use crate::eval::{
    conditional, expected_utility, joint_probability, simulate, solve, solve_with, Assignment,
    DecisionRule, Distribution, Policy, SimOptions, SimReport, SolveOptions,
};
