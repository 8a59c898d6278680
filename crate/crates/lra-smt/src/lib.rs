//! A small satisfiability-modulo-theories solver for quantifier-free linear
//! real arithmetic (QF_LRA), exposed both as a library and as a command-line
//! binary speaking SMT-LIB2 on stdin/stdout.
//!
//! The architecture is the classic lazy DPLL(T) combination:
//! a CDCL SAT core over the Boolean skeleton (Tseitin transformed),
//! with a simplex-based theory solver over exact rationals.
//! Strict inequalities are handled with delta-rationals.

pub mod cnf;
pub mod parser;
pub mod qnum;
pub mod rational;
pub mod sat;
pub mod simplex;
pub mod solver;
pub mod term;

pub use solver::{run_script, Deadline, EngineStats, ScriptOutcome, SolveResult};
