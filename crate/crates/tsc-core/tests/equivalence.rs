//! Necessary-mode encoding vs. reference semantics on the chart corpus:
//! every satisfying assignment must induce a grid trace the reference
//! semantics accepts, and every unsatisfiable verdict must agree with an
//! exhaustive search over candidate grid traces at the same depth.

use std::collections::BTreeSet;
use tsc_core::checksat::{
    chart_bulletin, checksat_n_with_model, necessary_model_trajectory, CheckConfig,
};
use tsc_core::oracle::{chart_satisfiable_on, OracleCtx};
use tsc_core::smt::Status;
use tsc_core::testkit::{chart_corpus, corpus_spec, oracle_grid_sat};

#[test]
fn necessary_check_agrees_with_reference_semantics() {
    let spec = corpus_spec();
    let cfg = CheckConfig::default();
    let charts = chart_corpus();
    assert!(charts.len() >= 30, "corpus has {} charts", charts.len());
    let mut sat_count = 0;
    let mut unsat_count = 0;
    for (idx, chart) in charts.iter().enumerate() {
        let depth = chart.count_sequence_operators() + 1;
        let bulletin = chart_bulletin(chart, &spec);
        let (verdict, info) = checksat_n_with_model(chart, &spec, &bulletin, &cfg);
        match verdict.status {
            Status::Sat => {
                sat_count += 1;
                let (problem, d) = info.expect("problem built");
                let model = verdict.model.expect("model for sat");
                let traj = necessary_model_trajectory(&model, &problem, d);
                traj.validate().expect("trace well-formed");
                let ctx = OracleCtx::new(&spec, BTreeSet::new());
                assert!(
                    chart_satisfiable_on(&ctx, chart, &traj, 0, d).unwrap(),
                    "chart {}: satisfying assignment induces a trace the \
                     reference semantics rejects",
                    idx
                );
            }
            Status::Unsat => {
                unsat_count += 1;
                assert!(
                    !oracle_grid_sat(&spec, chart, depth),
                    "chart {}: encoding unsat but a grid trace satisfies it",
                    idx
                );
            }
            Status::Unknown => panic!("chart {}: solver unknown: {:?}", idx, verdict.diagnostic),
        }
    }
    assert!(sat_count >= 15, "sat: {}", sat_count);
    assert!(unsat_count >= 5, "unsat: {}", unsat_count);
}
