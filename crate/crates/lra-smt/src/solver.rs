//! Script-level driver: parse an SMT-LIB2 script, run the solver, and
//! render the verdict and model in the usual solver output format.

use crate::cnf::Builder;
use crate::parser::{Command, ScriptParser};
use crate::rational::rat_to_smt;
use crate::sat::{Model, SatOutcome, SatSolver};
use std::time::Instant;

pub type Deadline = Option<Instant>;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

#[derive(Debug, Clone, Default)]
pub struct EngineStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub clauses: u64,
}

#[derive(Debug, Clone)]
pub struct ScriptOutcome {
    pub result: Option<SolveResult>,
    /// Exact text a command-line invocation should print.
    pub output: String,
    pub stats: EngineStats,
}

/// Execute a one-shot SMT-LIB2 script.
pub fn run_script(text: &str, deadline: Deadline) -> ScriptOutcome {
    let t_start = Instant::now();
    let mut parser = ScriptParser::new();
    let commands = match parser.parse_script(text) {
        Ok(c) => c,
        Err(e) => {
            return ScriptOutcome {
                result: None,
                output: format!("(error \"{}\")\n", e),
                stats: EngineStats::default(),
            }
        }
    };
    let mut builder = Builder::new();
    let mut output = String::new();
    let mut result: Option<SolveResult> = None;
    let mut stats = EngineStats::default();
    let mut model_requested = false;

    for cmd in &commands {
        match cmd {
            Command::SetLogic(_) | Command::SetOption | Command::SetInfo => {}
            Command::Declare(name, sort) => match sort {
                crate::term::Sort::Bool => {
                    builder.bool_var(name);
                }
                crate::term::Sort::Real => {
                    builder.real_var(name);
                }
            },
            Command::Assert(t) => builder.assert_term(t),
            Command::CheckSat => {
                let t_built = Instant::now();
                let (mut solver, bool_names, real_names) =
                    SatSolver::from_builder(std::mem::take(&mut builder));
                let t_solver_ready = Instant::now();
                let outcome = solver.solve(&bool_names, &real_names, deadline);
                stats = EngineStats {
                    decisions: solver.stats_decisions,
                    conflicts: solver.stats_conflicts,
                    propagations: solver.stats_propagations,
                    clauses: solver.n_clauses() as u64,
                };
                if std::env::var_os("LRA_SMT_STATS").is_some() {
                    eprintln!(
                        "; phases: parse+build={:?} from_builder={:?} solve={:?}",
                        t_built - t_start,
                        t_solver_ready - t_built,
                        t_solver_ready.elapsed()
                    );
                }
                let r = match outcome {
                    SatOutcome::Sat(m) => {
                        output.push_str("sat\n");
                        SolveResult::Sat(m)
                    }
                    SatOutcome::Unsat => {
                        output.push_str("unsat\n");
                        SolveResult::Unsat
                    }
                    SatOutcome::Unknown => {
                        output.push_str("unknown\n");
                        SolveResult::Unknown("resource limit".to_string())
                    }
                };
                result = Some(r);
            }
            Command::GetModel => {
                model_requested = true;
                match &result {
                    Some(SolveResult::Sat(m)) => output.push_str(&render_model(m)),
                    _ => output.push_str("(error \"model is not available\")\n"),
                }
            }
            Command::Exit => break,
        }
    }
    let _ = model_requested;
    ScriptOutcome {
        result,
        output,
        stats,
    }
}

pub fn render_model(m: &Model) -> String {
    let mut out = String::from("(\n");
    let mut bools: Vec<_> = m.bools.iter().collect();
    bools.sort_by(|a, b| a.0.cmp(b.0));
    for (name, v) in bools {
        out.push_str(&format!("  (define-fun {} () Bool {})\n", name, v));
    }
    let mut reals: Vec<_> = m.reals.iter().collect();
    reals.sort_by(|a, b| a.0.cmp(b.0));
    for (name, v) in reals {
        out.push_str(&format!(
            "  (define-fun {} () Real {})\n",
            name,
            rat_to_smt(v)
        ));
    }
    out.push_str(")\n");
    out
}
