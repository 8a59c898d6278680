use lra_smt::{run_script, SolveResult};
use num_rational::BigRational;

fn solve(script: &str) -> SolveResult {
    run_script(script, None).result.expect("no check-sat ran")
}

fn is_sat(r: &SolveResult) -> bool {
    matches!(r, SolveResult::Sat(_))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn trivial_verdicts() {
    assert!(is_sat(&solve("(assert true)(check-sat)")));
    assert_eq!(solve("(assert false)(check-sat)"), SolveResult::Unsat);
    assert_eq!(
        solve("(declare-const p Bool)(assert (and p (not p)))(check-sat)"),
        SolveResult::Unsat
    );
}

#[test]
fn boolean_reasoning() {
    let script = "(declare-const a Bool)(declare-const b Bool)(declare-const c Bool)\
                  (assert (or a b))(assert (=> a c))(assert (=> b c))(assert (not c))(check-sat)";
    assert_eq!(solve(script), SolveResult::Unsat);

    let script = "(declare-const a Bool)(declare-const b Bool)\
                  (assert (= a (not b)))(assert (or (and a b) (and (not a) (not b)) a))(check-sat)";
    match solve(script) {
        SolveResult::Sat(m) => {
            assert_eq!(m.bools["a"], !m.bools["b"]);
            assert!(m.bools["a"]);
        }
        other => panic!("expected sat, got {:?}", other),
    }
}

#[test]
fn arithmetic_basic() {
    assert_eq!(
        solve("(declare-const x Real)(assert (< x x))(check-sat)"),
        SolveResult::Unsat
    );
    assert_eq!(
        solve("(declare-const x Real)(assert (> x 0))(assert (< x 0))(check-sat)"),
        SolveResult::Unsat
    );
    // Strict band has a model strictly inside.
    match solve("(declare-const x Real)(assert (> x 0))(assert (< x 1))(check-sat)(get-model)") {
        SolveResult::Sat(m) => {
            let x = &m.reals["x"];
            assert!(*x > rat(0, 1) && *x < rat(1, 1), "x = {}", x);
        }
        other => panic!("expected sat, got {:?}", other),
    }
}

#[test]
fn linear_combination_conflict() {
    // x + y >= 4, x <= 1, y <= 2 is unsat; relaxing y's bound makes it sat.
    let base = "(declare-const x Real)(declare-const y Real)\
                (assert (>= (+ x y) 4))(assert (<= x 1))";
    assert_eq!(
        solve(&format!("{}(assert (<= y 2))(check-sat)", base)),
        SolveResult::Unsat
    );
    match solve(&format!("{}(assert (<= y 3))(check-sat)", base)) {
        SolveResult::Sat(m) => {
            let (x, y) = (&m.reals["x"], &m.reals["y"]);
            assert!(x + y >= rat(4, 1));
            assert!(*x <= rat(1, 1) && *y <= rat(3, 1));
        }
        other => panic!("expected sat, got {:?}", other),
    }
}

#[test]
fn mixed_boolean_arithmetic() {
    // p -> x > 5, !p -> x < -5, x = 7/2 forces a specific branch to fail.
    let script = "(declare-const p Bool)(declare-const x Real)\
                  (assert (=> p (> x 5)))(assert (=> (not p) (< x (- 5))))\
                  (assert (= x (/ 7 2)))(check-sat)";
    assert_eq!(solve(script), SolveResult::Unsat);

    let script = "(declare-const p Bool)(declare-const x Real)\
                  (assert (=> p (> x 5)))(assert (=> (not p) (= x (/ 7 2))))\
                  (assert (< x 4))(check-sat)";
    match solve(script) {
        SolveResult::Sat(m) => {
            assert!(!m.bools["p"]);
            assert_eq!(m.reals["x"], rat(7, 2));
        }
        other => panic!("expected sat, got {:?}", other),
    }
}

#[test]
fn equality_chains() {
    let script = "(declare-const a Real)(declare-const b Real)(declare-const c Real)\
                  (assert (= a b))(assert (= b c))(assert (< (- a c) 0))(check-sat)";
    assert_eq!(solve(script), SolveResult::Unsat);
}

#[test]
fn scaled_atoms_share_structure() {
    // 2x - 2y <= 0 and x - y > 0 contradict.
    let script = "(declare-const x Real)(declare-const y Real)\
                  (assert (<= (- (* 2 x) (* 2 y)) 0))(assert (> (- x y) 0))(check-sat)";
    assert_eq!(solve(script), SolveResult::Unsat);
}

#[test]
fn disjunctive_case_split() {
    // (x <= -1 or x >= 1) and -1/2 <= x <= 1/2 is unsat.
    let script = "(declare-const x Real)\
                  (assert (or (<= x (- 1)) (>= x 1)))\
                  (assert (>= x (- 0.5)))(assert (<= x 0.5))(check-sat)";
    assert_eq!(solve(script), SolveResult::Unsat);

    // Widening the box makes it sat.
    let script = "(declare-const x Real)\
                  (assert (or (<= x (- 1)) (>= x 1)))\
                  (assert (>= x (- 2)))(assert (<= x 0.5))(check-sat)";
    match solve(script) {
        SolveResult::Sat(m) => assert!(m.reals["x"] <= rat(-1, 1)),
        other => panic!("expected sat, got {:?}", other),
    }
}

#[test]
fn pigeonhole_three_into_two() {
    // Classic small unsat Boolean instance exercising clause learning.
    let mut s = String::new();
    for p in 0..3 {
        for h in 0..2 {
            s.push_str(&format!("(declare-const p{}h{} Bool)", p, h));
        }
    }
    for p in 0..3 {
        s.push_str(&format!("(assert (or p{0}h0 p{0}h1))", p));
    }
    for h in 0..2 {
        for a in 0..3 {
            for b in (a + 1)..3 {
                s.push_str(&format!(
                    "(assert (or (not p{}h{2}) (not p{}h{2})))",
                    a, b, h
                ));
            }
        }
    }
    s.push_str("(check-sat)");
    assert_eq!(solve(&s), SolveResult::Unsat);
}

#[test]
fn model_output_format() {
    let out = run_script(
        "(declare-const x Real)(assert (= x (/ 7 2)))(check-sat)(get-model)",
        None,
    );
    assert!(out.output.starts_with("sat\n"));
    assert!(out.output.contains("(define-fun x () Real (/ 7 2))"));

    let out = run_script(
        "(declare-const x Real)(assert (= x (- 3)))(check-sat)(get-model)",
        None,
    );
    assert!(out.output.contains("(define-fun x () Real (- 3))"));
}

#[test]
fn deadline_returns_unknown() {
    // An already-expired deadline must yield unknown, not hang.
    let deadline = Some(std::time::Instant::now() - std::time::Duration::from_millis(1));
    let out = run_script(
        "(declare-const x Real)(declare-const y Real)(assert (< x y))(check-sat)",
        deadline,
    );
    assert!(matches!(out.result, Some(SolveResult::Unknown(_))));
}

#[test]
fn larger_relaxation_chain() {
    // x0 < x1 < ... < x19 and x19 < x0 is unsat through a long chain.
    let mut s = String::new();
    for i in 0..20 {
        s.push_str(&format!("(declare-const x{} Real)", i));
    }
    for i in 0..19 {
        s.push_str(&format!("(assert (< x{} x{}))", i, i + 1));
    }
    s.push_str("(assert (< x19 x0))(check-sat)");
    assert_eq!(solve(&s), SolveResult::Unsat);
}
