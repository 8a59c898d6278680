//! Chart-structure encoding tests: reference constraint-set reproduction,
//! unrolling behavior, and the necessary check on hand-analyzed charts.

use tsc_core::bmc::{encode_chart_structure, unroll, BmcProblem, ProblemMeta, StepMode};
use tsc_core::chart::BasicChart;
use tsc_core::checksat::{chart_bulletin, checksat_n, CheckConfig};
use tsc_core::dsl::parse_spec;
use tsc_core::formula::{primed, Formula};
use tsc_core::smt::{self, SolverConfig, Status};
use tsc_core::spec::Specification;

fn fixture_spec() -> Specification {
    parse_spec(
        "objects { carI: Car; }\n\
         view A { constraint carI.x > 0; }\n\
         view NegX { constraint carI.xmax < 0; }\n\
         view FarX { constraint carI.xmin > 100; }\n\
         chart PaddedInvariant = true ; inv(A) ; true;\n\
         chart Teleport = inv(NegX) ; inv(FarX);\n",
        "fixture.tsc",
    )
    .expect("fixture parses")
}

fn bool_var(name: &str) -> Formula {
    Formula::bool_var(name)
}

/// Hand-written reference constraint set for `true ; A ; true`.
fn reference_structure_set() -> (Formula, Formula, Formula) {
    let init = Formula::and(vec![
        Formula::not(bool_var("complete_1")),
        Formula::not(bool_var("complete_2")),
        bool_var("ok_2"),
        Formula::not(bool_var("complete_3")),
    ]);
    let trans = Formula::and(vec![
        // started'_2 -> (complete_1 \/ started_2)
        Formula::implies(
            bool_var(&primed("started_2")),
            Formula::or(vec![bool_var("complete_1"), bool_var("started_2")]),
        ),
        // complete'_2 <-> (started_2 /\ ok'_2)
        Formula::iff(
            bool_var(&primed("complete_2")),
            Formula::and(vec![bool_var("started_2"), bool_var(&primed("ok_2"))]),
        ),
        // ok'_2 <-> (started_2 -> ok_2 /\ b_A)
        Formula::iff(
            bool_var(&primed("ok_2")),
            Formula::implies(
                bool_var("started_2"),
                Formula::and(vec![bool_var("ok_2"), bool_var("b_A")]),
            ),
        ),
        // started'_3 -> (complete'_2 \/ started_3)
        Formula::implies(
            bool_var(&primed("started_3")),
            Formula::or(vec![bool_var(&primed("complete_2")), bool_var("started_3")]),
        ),
        // complete'_3 <-> started_3
        Formula::iff(bool_var(&primed("complete_3")), bool_var("started_3")),
    ]);
    let final_ = bool_var("complete_3");
    (init, trans, final_)
}

#[test]
fn padded_invariant_structure_matches_reference_set() {
    let spec = fixture_spec();
    let chart = spec.chart("PaddedInvariant").unwrap();
    let s = encode_chart_structure(chart);
    let (ri, rt, rf) = reference_structure_set();
    let cfg = SolverConfig::default();
    assert!(
        smt::equivalent(&s.init, &ri, &cfg).unwrap(),
        "initial constraints differ:\n{}\nvs\n{}",
        s.init,
        ri
    );
    assert!(
        smt::equivalent(&s.trans, &rt, &cfg).unwrap(),
        "transition constraints differ:\n{}\nvs\n{}",
        s.trans,
        rt
    );
    assert!(smt::equivalent(&s.final_, &rf, &cfg).unwrap());
    // The leading empty's completion flag is free: no transition rule.
    assert_eq!(s.leaf_count, 3);
}

/// Structure-only problem: anchors applied, view literals left free.
fn structure_problem(chart: &BasicChart) -> (BmcProblem, usize) {
    let s = encode_chart_structure(chart);
    let mut init = vec![s.init_assembly.clone()];
    init.extend(s.anchors.clone());
    let mut state_bools = s.state_bools.clone();
    state_bools.extend(s.view_lits.values().cloned());
    let problem = BmcProblem {
        init: Formula::and(init),
        trans: s.trans.clone(),
        final_: s.final_.clone(),
        state_bools,
        state_reals: vec![],
        global_bools: s.global_bools.clone(),
        global_reals: vec![],
        mode: StepMode::Variable,
        meta: ProblemMeta::default(),
    };
    (problem, s.leaf_count)
}

#[test]
fn unroll_depth_zero_is_init_and_final() {
    let spec = fixture_spec();
    let chart = spec.chart("PaddedInvariant").unwrap();
    let (problem, _) = structure_problem(chart);
    let unrolled = unroll(&problem, 0);
    // No transition instances: the formula mentions only step-0 variables.
    let mut vars = std::collections::BTreeMap::new();
    unrolled.formula.collect_vars(&mut vars);
    assert!(vars.keys().all(|v| v.ends_with("@0")), "{:?}", vars);
}

#[test]
fn single_empty_chart_needs_one_step() {
    let spec = fixture_spec();
    let cfg = SolverConfig::default();
    let s = encode_chart_structure(&BasicChart::Empty);
    // I: !complete_1, T: complete'_1 <-> true, F: complete_1
    let (problem, _) = structure_problem(&BasicChart::Empty);
    let at0 = unroll(&problem, 0);
    assert!(!smt::is_sat(&at0.formula, &cfg).unwrap(), "b < e violated");
    let at1 = unroll(&problem, 1);
    assert!(smt::is_sat(&at1.formula, &cfg).unwrap());
    assert!(format!("{}", s.trans).contains("complete_1"));
}

#[test]
fn padded_invariant_unrolling_examples() {
    let spec = fixture_spec();
    let chart = spec.chart("PaddedInvariant").unwrap();
    let (problem, _) = structure_problem(chart);
    let cfg = SolverConfig::default();

    // Depth 2 with b_A forced true everywhere is satisfiable.
    let at2 = unroll(&problem, 2);
    let forced = Formula::and(vec![
        at2.formula.clone(),
        Formula::bool_var("b_A@0"),
        Formula::bool_var("b_A@1"),
        Formula::bool_var("b_A@2"),
    ]);
    assert!(smt::is_sat(&forced, &cfg).unwrap());

    // Depth 1 with both outer empties forced to consume a step is not:
    // three positive-duration segments need at least three steps.
    let at1 = unroll(&problem, 1);
    let consumed = Formula::and(vec![
        at1.formula.clone(),
        // empty 1 consumes a step: A does not start at step 0
        Formula::not(Formula::bool_var("started_2@0")),
        // empty 3 consumes a step: it is not started at step 0 either
        Formula::not(Formula::bool_var("started_3@0")),
    ]);
    assert!(!smt::is_sat(&consumed, &cfg).unwrap());

    // At the automatic depth m+1 = 3 the assembled structure is
    // satisfiable with the view literal free.
    let at3 = unroll(&problem, 3);
    assert!(smt::is_sat(&at3.formula, &cfg).unwrap());
}

#[test]
fn choice_with_false_view_reduces_to_other_branch() {
    let spec = fixture_spec();
    let cfg = CheckConfig::default();
    // Choice(NegX-and-FarX-conjunction-impossible, A) behaves like A alone.
    let impossible =
        BasicChart::Concurrency(vec![BasicChart::inv("NegX"), BasicChart::inv("FarX")]);
    let choice = BasicChart::Choice(Box::new(impossible.clone()), Box::new(BasicChart::inv("A")));
    let bulletin = chart_bulletin(&choice, &spec);
    let v_choice = checksat_n(&choice, &spec, &bulletin, &cfg);
    let v_a = checksat_n(&BasicChart::inv("A"), &spec, &bulletin, &cfg);
    assert_eq!(v_choice.status, v_a.status);
    assert_eq!(v_choice.status, Status::Sat);
    // And the impossible branch alone is unsatisfiable.
    let v_imp = checksat_n(&impossible, &spec, &bulletin, &cfg);
    assert_eq!(v_imp.status, Status::Unsat);
}

#[test]
fn teleport_chart_is_necessarily_unsat() {
    let spec = fixture_spec();
    let cfg = CheckConfig::default();
    let chart = spec.chart("Teleport").unwrap();
    let bulletin = chart_bulletin(chart, &spec);
    let v = checksat_n(chart, &spec, &bulletin, &cfg);
    assert_eq!(v.status, Status::Unsat);
}

#[test]
fn padded_invariant_depth_is_three_and_sat() {
    let spec = fixture_spec();
    let cfg = CheckConfig::default();
    let chart = spec.chart("PaddedInvariant").unwrap();
    assert_eq!(chart.count_sequence_operators() + 1, 3);
    let bulletin = chart_bulletin(chart, &spec);
    let v = checksat_n(chart, &spec, &bulletin, &cfg);
    assert_eq!(v.status, Status::Sat);
}
