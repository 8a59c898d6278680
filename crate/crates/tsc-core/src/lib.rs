//! Consistency analysis for Traffic Sequence Chart (TSC) requirement
//! specifications.
//!
//! The pipeline: parse a textual TSC dialect, translate spatial views into
//! linear-arithmetic formulas, compile charts into bounded-model-checking
//! problems, run two-sided (necessary/sufficient) satisfiability checks
//! through an SMT solver, enumerate minimal inconsistent subsets, and
//! synthesize validated single-track-model witness trajectories.

pub mod bmc;
pub mod chart;
pub mod checksat;
pub mod consistency;
pub mod diag;
pub mod dsl;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod report;
pub mod smt;
pub mod spec;
pub mod svg;
pub mod testkit;
pub mod trajectory;
pub mod translate;
pub mod view;
