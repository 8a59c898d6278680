//! SMT-LIB2 script emission, solver process management, and verdict/model
//! parsing. Queries are one-shot; results are cached by script hash.
//!
//! Solvers are external child processes speaking SMT-LIB2 v2.6 on stdin
//! with the verdict and model on stdout. When no executable is configured
//! or found, a bundled in-process engine consumes the identical script
//! text, so every code path goes through the same wire format.

use crate::formula::{Formula, Model, ModelValue, Rat, Sort};
use crate::view::CmpOp;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub solver_millis: u128,
    pub from_cache: bool,
    /// Clause count of the in-process engine (absent for subprocesses).
    pub clauses: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub model: Option<Model>,
    pub stats: SolveStats,
    /// Diagnostic for unknown verdicts (timeout, process failure, ...).
    pub diagnostic: Option<String>,
}

impl Verdict {
    fn unknown(reason: impl Into<String>) -> Self {
        Verdict {
            status: Status::Unknown,
            model: None,
            stats: SolveStats::default(),
            diagnostic: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    /// Child process with a Z3-compatible command line.
    External(PathBuf),
    /// Bundled engine fed the same SMT-LIB2 text in process.
    InProcess,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub backend: Backend,
    pub timeout: Duration,
    /// Directory receiving a copy of every emitted script, for audit.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::InProcess,
            timeout: Duration::from_secs(60),
            dump_dir: None,
        }
    }
}

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "TSCA_SOLVER";

/// Resolution order: explicit path, environment variable, `z3` on PATH,
/// a sibling `lra-smt` binary, then the in-process engine.
pub fn resolve_backend(explicit: Option<&Path>) -> Backend {
    if let Some(p) = explicit {
        return Backend::External(p.to_path_buf());
    }
    if let Ok(p) = std::env::var(SOLVER_ENV) {
        if !p.is_empty() {
            return Backend::External(PathBuf::from(p));
        }
    }
    if let Some(z3) = find_in_path("z3") {
        return Backend::External(z3);
    }
    if let Ok(exe) = std::env::current_exe() {
        if let Some(dir) = exe.parent() {
            let sibling = dir.join("lra-smt");
            if sibling.is_file() {
                return Backend::External(sibling);
            }
        }
    }
    Backend::InProcess
}

fn find_in_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path) {
        let candidate = dir.join(name);
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

#[derive(Debug, Clone, Copy)]
pub struct EmitOptions {
    pub get_model: bool,
}

/// Render a complete SMT-LIB2 script: QF_LRA logic, sorted declarations,
/// one assertion, check-sat, and get-model on demand. Emission is
/// deterministic: identical formulas produce byte-identical scripts.
pub fn emit_script(phi: &Formula, options: EmitOptions) -> String {
    let mut vars = BTreeMap::new();
    phi.collect_vars(&mut vars);
    let mut out = String::new();
    out.push_str("(set-logic QF_LRA)\n");
    if options.get_model {
        out.push_str("(set-option :produce-models true)\n");
    }
    for (name, sort) in &vars {
        let s = match sort {
            Sort::Bool => "Bool",
            Sort::Real => "Real",
        };
        out.push_str(&format!("(declare-const {} {})\n", quote(name), s));
    }
    out.push_str("(assert ");
    emit_formula(phi, &mut out);
    out.push_str(")\n(check-sat)\n");
    if options.get_model {
        out.push_str("(get-model)\n");
    }
    out.push_str("(exit)\n");
    out
}

/// SMT-LIB simple symbols admit most of our characters; quote the rest.
fn quote(name: &str) -> String {
    let simple = name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/'".contains(c))
        && !name.starts_with(|c: char| c.is_ascii_digit());
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name)
    }
}

fn emit_rat(r: &Rat, out: &mut String) {
    let (num, den) = (r.numer(), r.denom());
    if den.is_one() {
        if num.is_negative() {
            out.push_str(&format!("(- {})", -num));
        } else {
            out.push_str(&format!("{}", num));
        }
    } else if num.is_negative() {
        out.push_str(&format!("(- (/ {} {}))", -num, den));
    } else {
        out.push_str(&format!("(/ {} {})", num, den));
    }
}

fn emit_formula(phi: &Formula, out: &mut String) {
    match phi {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Bool(v) => out.push_str(&quote(v)),
        Formula::Atom(a) => {
            let op = match a.cmp {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Eq => "=",
                CmpOp::Ge => ">=",
                CmpOp::Gt => ">",
            };
            out.push_str(&format!("({} ", op));
            if a.terms.len() == 1 && a.terms[0].0.is_one() {
                out.push_str(&quote(&a.terms[0].1));
            } else {
                out.push_str("(+ ");
                for (i, (c, v)) in a.terms.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    if c.is_one() {
                        out.push_str(&quote(v));
                    } else {
                        out.push_str("(* ");
                        emit_rat(c, out);
                        out.push_str(&format!(" {})", quote(v)));
                    }
                }
                out.push(')');
            }
            out.push(' ');
            emit_rat(&a.rhs, out);
            out.push(')');
        }
        Formula::Not(x) => {
            out.push_str("(not ");
            emit_formula(x, out);
            out.push(')');
        }
        Formula::And(kids) => {
            out.push_str("(and");
            for k in kids {
                out.push(' ');
                emit_formula(k, out);
            }
            out.push(')');
        }
        Formula::Or(kids) => {
            out.push_str("(or");
            for k in kids {
                out.push(' ');
                emit_formula(k, out);
            }
            out.push(')');
        }
        Formula::Implies(a, b) => {
            out.push_str("(=> ");
            emit_formula(a, out);
            out.push(' ');
            emit_formula(b, out);
            out.push(')');
        }
        Formula::Iff(a, b) => {
            out.push_str("(= ");
            emit_formula(a, out);
            out.push(' ');
            emit_formula(b, out);
            out.push(')');
        }
    }
}

static CACHE: Mutex<Option<HashMap<u64, Verdict>>> = Mutex::new(None);

fn cache_key(script: &str) -> u64 {
    let mut h = DefaultHasher::new();
    script.hash(&mut h);
    h.finish()
}

/// Solve a complete SMT-LIB2 script, consulting the in-process cache first.
pub fn solve(script: &str, cfg: &SolverConfig) -> Verdict {
    let key = cache_key(script);
    {
        let guard = CACHE.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(v) = map.get(&key) {
                let mut hit = v.clone();
                hit.stats.from_cache = true;
                return hit;
            }
        }
    }
    if let Some(dir) = &cfg.dump_dir {
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("query-{:016x}.smt2", key)), script);
    }
    let started = Instant::now();
    let mut verdict = match &cfg.backend {
        Backend::InProcess => solve_in_process(script, cfg.timeout),
        Backend::External(path) => solve_external(path, script, cfg.timeout),
    };
    verdict.stats.solver_millis = started.elapsed().as_millis();
    let mut guard = CACHE.lock().unwrap();
    guard
        .get_or_insert_with(HashMap::new)
        .insert(key, verdict.clone());
    verdict
}

/// Drop all cached verdicts (used by tests that vary the backend).
pub fn clear_cache() {
    let mut guard = CACHE.lock().unwrap();
    *guard = None;
}

fn solve_in_process(script: &str, timeout: Duration) -> Verdict {
    let deadline = Instant::now() + timeout;
    let outcome = lra_smt::run_script(script, Some(deadline));
    let stats = SolveStats {
        clauses: Some(outcome.stats.clauses),
        ..SolveStats::default()
    };
    match outcome.result {
        Some(lra_smt::SolveResult::Sat(m)) => {
            let mut values = BTreeMap::new();
            for (k, v) in m.bools {
                values.insert(k, ModelValue::Bool(v));
            }
            for (k, v) in m.reals {
                values.insert(k, ModelValue::Real(v));
            }
            Verdict {
                status: Status::Sat,
                model: Some(Model { values }),
                stats,
                diagnostic: None,
            }
        }
        Some(lra_smt::SolveResult::Unsat) => Verdict {
            status: Status::Unsat,
            model: None,
            stats,
            diagnostic: None,
        },
        Some(lra_smt::SolveResult::Unknown(reason)) => Verdict::unknown(reason),
        None => Verdict::unknown(format!("solver error: {}", outcome.output.trim())),
    }
}

fn solve_external(path: &Path, script: &str, timeout: Duration) -> Verdict {
    let child = Command::new(path)
        .arg("-in")
        .arg("-smt2")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return Verdict::unknown(format!("failed to spawn {}: {}", path.display(), e)),
    };
    if let Some(stdin) = child.stdin.as_mut() {
        if stdin.write_all(script.as_bytes()).is_err() {
            let _ = child.kill();
            return Verdict::unknown("failed to write to solver stdin");
        }
    }
    drop(child.stdin.take());

    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Verdict::unknown("solver timeout");
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => return Verdict::unknown(format!("wait failed: {}", e)),
        }
    }
    let mut output = String::new();
    if let Some(mut stdout) = child.stdout.take() {
        use std::io::Read;
        let _ = stdout.read_to_string(&mut output);
    }
    parse_solver_output(&output)
}

fn parse_solver_output(output: &str) -> Verdict {
    let mut lines = output.lines();
    let verdict_line = loop {
        match lines.next() {
            None => return Verdict::unknown("empty solver output"),
            Some(l) if l.trim().is_empty() => continue,
            Some(l) => break l.trim().to_string(),
        }
    };
    match verdict_line.as_str() {
        "sat" => {
            let rest = output.split_once("sat").map(|(_, r)| r).unwrap_or("");
            let model = parse_model_text(rest);
            Verdict {
                status: Status::Sat,
                model: Some(model),
                stats: SolveStats::default(),
                diagnostic: None,
            }
        }
        "unsat" => Verdict {
            status: Status::Unsat,
            model: None,
            stats: SolveStats::default(),
            diagnostic: None,
        },
        "unknown" => Verdict::unknown("solver returned unknown"),
        other => Verdict::unknown(format!("malformed solver output: {}", other)),
    }
}

/// Parse `(define-fun name () Sort value)` entries from model output,
/// including rational literals `(/ p q)` and negatives `(- v)`.
fn parse_model_text(text: &str) -> Model {
    let mut model = Model::default();
    let tokens = sexpr_tokens(text);
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "define-fun" && i + 3 < tokens.len() {
            let name = unquote(&tokens[i + 1]);
            // skip the () argument list
            let mut j = i + 2;
            if tokens[j] == "(" && tokens.get(j + 1).map(String::as_str) == Some(")") {
                j += 2;
            }
            let sort = tokens.get(j).cloned().unwrap_or_default();
            j += 1;
            if let Some((value, next)) = parse_value(&tokens, j, &sort) {
                model.values.insert(name, value);
                i = next;
                continue;
            }
        }
        i += 1;
    }
    model
}

fn unquote(s: &str) -> String {
    s.trim_matches('|').to_string()
}

fn sexpr_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_bars = false;
    for c in text.chars() {
        match c {
            '|' => {
                in_bars = !in_bars;
                cur.push(c);
            }
            '(' | ')' if !in_bars => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() && !in_bars => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_value(tokens: &[String], i: usize, sort: &str) -> Option<(ModelValue, usize)> {
    match tokens.get(i)?.as_str() {
        "true" => Some((ModelValue::Bool(true), i + 1)),
        "false" => Some((ModelValue::Bool(false), i + 1)),
        "(" => {
            // (- v) or (/ p q) possibly nested
            let (r, next) = parse_rat(tokens, i)?;
            let _ = sort;
            Some((ModelValue::Real(r), next))
        }
        lit => {
            let r = parse_numeric(lit)?;
            Some((ModelValue::Real(r), i + 1))
        }
    }
}

fn parse_rat(tokens: &[String], i: usize) -> Option<(Rat, usize)> {
    match tokens.get(i)?.as_str() {
        "(" => {
            let op = tokens.get(i + 1)?.clone();
            match op.as_str() {
                "-" => {
                    let (inner, next) = parse_rat(tokens, i + 2)?;
                    if tokens.get(next)? == ")" {
                        Some((-inner, next + 1))
                    } else {
                        None
                    }
                }
                "/" => {
                    let (num, next) = parse_rat(tokens, i + 2)?;
                    let (den, next) = parse_rat(tokens, next)?;
                    if tokens.get(next)? == ")" {
                        Some((num / den, next + 1))
                    } else {
                        None
                    }
                }
                _ => None,
            }
        }
        lit => Some((parse_numeric(lit)?, i + 1)),
    }
}

fn parse_numeric(s: &str) -> Option<Rat> {
    if let Some(dot) = s.find('.') {
        let int_part = &s[..dot];
        let frac = &s[dot + 1..];
        if int_part.chars().all(|c| c.is_ascii_digit()) && frac.chars().all(|c| c.is_ascii_digit())
        {
            let digits = format!("{}{}", int_part, frac);
            let num: BigInt = digits.parse().ok()?;
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            return Some(BigRational::new(num, den));
        }
        return None;
    }
    let num: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(num))
}

/// True iff `phi` is satisfiable; unknown verdicts are an error.
pub fn is_sat(phi: &Formula, cfg: &SolverConfig) -> Result<bool, String> {
    let script = emit_script(phi, EmitOptions { get_model: false });
    match solve(&script, cfg).status {
        Status::Sat => Ok(true),
        Status::Unsat => Ok(false),
        Status::Unknown => Err("solver returned unknown".to_string()),
    }
}

/// Solve and return the model for sat outcomes.
pub fn solve_formula(phi: &Formula, cfg: &SolverConfig) -> Verdict {
    let script = emit_script(phi, EmitOptions { get_model: true });
    solve(&script, cfg)
}

/// Logical equivalence check via two entailment queries.
pub fn equivalent(a: &Formula, b: &Formula, cfg: &SolverConfig) -> Result<bool, String> {
    let left = Formula::and(vec![a.clone(), Formula::not(b.clone())]);
    let right = Formula::and(vec![b.clone(), Formula::not(a.clone())]);
    Ok(!is_sat(&left, cfg)? && !is_sat(&right, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::LinAtom;
    use num_traits::Zero;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn deterministic_emission() {
        let phi = Formula::and(vec![
            Formula::bool_var("p"),
            Formula::Atom(LinAtom::var_cmp_const(
                "x",
                CmpOp::Lt,
                Rat::from_integer(3.into()),
            )),
        ]);
        assert_eq!(
            emit_script(&phi, EmitOptions { get_model: true }),
            emit_script(&phi, EmitOptions { get_model: true })
        );
    }

    #[test]
    fn trivial_scripts() {
        assert!(is_sat(&Formula::True, &cfg()).unwrap());
        // x < x is unsat
        let atom = Formula::Atom(LinAtom {
            terms: vec![
                (Rat::from_integer(1.into()), "x".into()),
                (Rat::from_integer((-1).into()), "x".into()),
            ],
            cmp: CmpOp::Lt,
            rhs: Rat::zero(),
        });
        assert!(!is_sat(&atom, &cfg()).unwrap());
    }

    #[test]
    fn model_rational_roundtrip() {
        // x = 7/2 must come back exactly and evaluate the formula to true.
        let phi = Formula::Atom(LinAtom {
            terms: vec![(Rat::from_integer(2.into()), "x".into())],
            cmp: CmpOp::Eq,
            rhs: Rat::from_integer(7.into()),
        });
        let v = solve_formula(&phi, &cfg());
        assert_eq!(v.status, Status::Sat);
        let model = v.model.unwrap();
        assert_eq!(
            model.get_real("x").unwrap(),
            &Rat::new(BigInt::from(7), BigInt::from(2))
        );
        assert!(phi.eval(&model).unwrap());
    }

    #[test]
    fn external_output_parsing() {
        let v = parse_solver_output(
            "sat\n(\n  (define-fun x () Real (- (/ 7 2)))\n  (define-fun p () Bool true)\n)\n",
        );
        assert_eq!(v.status, Status::Sat);
        let m = v.model.unwrap();
        assert_eq!(
            m.get_real("x").unwrap(),
            &Rat::new(BigInt::from(-7), BigInt::from(2))
        );
        assert!(m.get_bool("p").unwrap());

        let v = parse_solver_output("unsat\n");
        assert_eq!(v.status, Status::Unsat);
        let v = parse_solver_output("gibberish\n");
        assert_eq!(v.status, Status::Unknown);
    }
}
