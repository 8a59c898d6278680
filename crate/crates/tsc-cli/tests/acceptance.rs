//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured figures (visible with `--nocapture`). Heavy
//! criteria are serialized so timing stays honest on small machines.
//!
//! Run with: cargo test -p tsc-cli --test acceptance -- --nocapture

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};
use tsc_core::bmc::encode_chart_structure;
use tsc_core::checksat::{
    bbox_bounds, chart_bulletin, checksat_n_with_model, checksat_s, necessary_model_trajectory,
    CheckConfig,
};
use tsc_core::consistency::{analyze, build_bc1};
use tsc_core::dsl::{parse_spec, serialize_spec};
use tsc_core::formula::{primed, Formula};
use tsc_core::model::{Attr, CarParams};
use tsc_core::oracle::{chart_satisfiable_on, check_tsc, OracleCtx};
use tsc_core::smt::{self, SolverConfig, Status};
use tsc_core::spec::Specification;
use tsc_core::testkit::{
    chart_corpus, corpus_spec, cruise_trace, oracle_grid_sat, random_satisfiable_spec, Lcg,
};
use tsc_core::trajectory::{extract_witness, validate_trajectory, Trajectory};

static HEAVY: Mutex<()> = Mutex::new(());

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../tsc-core/fixtures")
        .join(name)
}

fn load(name: &str) -> Specification {
    let path = fixture(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_spec(&text, &path.to_string_lossy()).unwrap()
}

fn bool_var(name: &str) -> Formula {
    Formula::bool_var(name)
}

/// Criterion 1: the chart-structure encoding of `true ; A ; true` is
/// logically equivalent to the reference constraint set, checked by SMT
/// queries in both directions, in under five seconds.
#[test]
fn criterion_1_structure_table_reproduction() {
    let started = Instant::now();
    let spec = parse_spec(
        "objects { carI: Car; }\nview A { constraint carI.x > 0; }\n\
         chart T = true ; inv(A) ; true;\n",
        "t1.tsc",
    )
    .unwrap();
    let s = encode_chart_structure(spec.chart("T").unwrap());
    let ref_init = Formula::and(vec![
        Formula::not(bool_var("complete_1")),
        Formula::not(bool_var("complete_2")),
        bool_var("ok_2"),
        Formula::not(bool_var("complete_3")),
    ]);
    let ref_trans = Formula::and(vec![
        Formula::implies(
            bool_var(&primed("started_2")),
            Formula::or(vec![bool_var("complete_1"), bool_var("started_2")]),
        ),
        Formula::iff(
            bool_var(&primed("complete_2")),
            Formula::and(vec![bool_var("started_2"), bool_var(&primed("ok_2"))]),
        ),
        Formula::iff(
            bool_var(&primed("ok_2")),
            Formula::implies(
                bool_var("started_2"),
                Formula::and(vec![bool_var("ok_2"), bool_var("b_A")]),
            ),
        ),
        Formula::implies(
            bool_var(&primed("started_3")),
            Formula::or(vec![bool_var(&primed("complete_2")), bool_var("started_3")]),
        ),
        Formula::iff(bool_var(&primed("complete_3")), bool_var("started_3")),
    ]);
    let ref_final = bool_var("complete_3");
    let cfg = SolverConfig::default();
    assert!(smt::equivalent(&s.init, &ref_init, &cfg).unwrap());
    assert!(smt::equivalent(&s.trans, &ref_trans, &cfg).unwrap());
    assert!(smt::equivalent(&s.final_, &ref_final, &cfg).unwrap());
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "{:?}", elapsed);
    println!(
        "criterion 1: PASS - structure set equivalent in both directions ({:?})",
        elapsed
    );
}

/// Criterion 2: necessary-mode verdicts agree with the reference
/// semantics on the whole chart corpus at the automatic depth.
#[test]
fn criterion_2_oracle_equivalence() {
    let started = Instant::now();
    let spec = corpus_spec();
    let cfg = CheckConfig::default();
    let charts = chart_corpus();
    assert!(charts.len() >= 30);
    let mut disagreements = 0;
    for chart in &charts {
        let depth = chart.count_sequence_operators() + 1;
        let bulletin = chart_bulletin(chart, &spec);
        let (verdict, info) = checksat_n_with_model(chart, &spec, &bulletin, &cfg);
        let ok = match verdict.status {
            Status::Sat => {
                let (problem, d) = info.unwrap();
                let traj =
                    necessary_model_trajectory(&verdict.model.as_ref().unwrap(), &problem, d);
                let ctx = OracleCtx::new(&spec, BTreeSet::new());
                chart_satisfiable_on(&ctx, chart, &traj, 0, d).unwrap()
            }
            Status::Unsat => !oracle_grid_sat(&spec, chart, depth),
            Status::Unknown => false,
        };
        if !ok {
            disagreements += 1;
        }
    }
    let elapsed = started.elapsed();
    assert_eq!(disagreements, 0);
    assert!(elapsed < Duration::from_secs(300), "{:?}", elapsed);
    println!(
        "criterion 2: PASS - {} charts, zero disagreements ({:?})",
        charts.len(),
        elapsed
    );
}

/// Criterion 3: every satisfiable sufficient check in the test corpus
/// yields a trajectory passing validation at 1000 samples per segment.
#[test]
fn criterion_3_witness_soundness() {
    let _guard = HEAVY.lock().unwrap();
    let follow = load("follow.tsc");
    let rules = load("traffic_rules.tsc");
    let mut sat_runs = 0;
    let mut violations = 0;

    let mut validate = |traj: &Trajectory, spec: &Specification, excluded: &BTreeSet<String>| {
        let report = validate_trajectory(traj, spec, excluded, 1000, 1e-6).unwrap();
        let lat_ok = report.lat_acc_max <= 3.92 + 1e-6;
        if !(report.valid && lat_ok) {
            eprintln!("witness violates the single-track bounds: {:?}", report);
            violations += 1;
        }
    };

    // standalone charts of the follow fixture
    let cfg = CheckConfig {
        depth_s: 4,
        ..CheckConfig::default()
    };
    for chart_name in ["FollowScene"] {
        let chart = follow.chart(chart_name).unwrap().clone();
        let bulletin = chart_bulletin(&chart, &follow);
        let (v, problem) = checksat_s(&chart, &follow, &bulletin, &cfg);
        if v.status == Status::Sat {
            sat_runs += 1;
            let traj =
                extract_witness(v.model.as_ref().unwrap(), problem.as_ref().unwrap()).unwrap();
            let excluded: BTreeSet<String> = bulletin.keys().cloned().collect();
            validate(&traj, &follow, &excluded);
        }
    }

    // HFC of each traffic rule and BC1 of each conflicting pair
    let rule_cfg = CheckConfig::from_spec(&rules);
    let names = ["KeepRight", "NoPassingRight", "SafeLaneChange"];
    for name in names {
        let tsc = rules.tsc(name).unwrap();
        let hfc = tsc_core::consistency::build_hfc(tsc);
        let bulletin = chart_bulletin(&hfc, &rules);
        let (v, problem) = checksat_s(&hfc, &rules, &bulletin, &rule_cfg);
        if v.status == Status::Sat {
            sat_runs += 1;
            let traj =
                extract_witness(v.model.as_ref().unwrap(), problem.as_ref().unwrap()).unwrap();
            let excluded: BTreeSet<String> = bulletin.keys().cloned().collect();
            validate(&traj, &rules, &excluded);
        }
    }
    for (a, b) in [
        ("KeepRight", "NoPassingRight"),
        ("KeepRight", "SafeLaneChange"),
        ("NoPassingRight", "SafeLaneChange"),
    ] {
        let ta = rules.tsc(a).unwrap();
        let tb = rules.tsc(b).unwrap();
        let bc1 = build_bc1(ta, &[tb]);
        let bulletin = chart_bulletin(&bc1, &rules);
        let (v, problem) = checksat_s(&bc1, &rules, &bulletin, &rule_cfg);
        if v.status == Status::Sat {
            sat_runs += 1;
            let traj =
                extract_witness(v.model.as_ref().unwrap(), problem.as_ref().unwrap()).unwrap();
            let excluded: BTreeSet<String> = bulletin.keys().cloned().collect();
            validate(&traj, &rules, &excluded);
        }
    }

    assert!(sat_runs >= 5, "only {} satisfiable runs", sat_runs);
    assert_eq!(violations, 0);
    println!(
        "criterion 3: PASS - {} witnesses validated, zero violations",
        sat_runs
    );
}

/// Criterion 4: the discontinuous-sequence fixture is reported
/// inconsistent as a singleton within ten seconds.
#[test]
fn criterion_4_teleport_detection() {
    let started = Instant::now();
    let spec = load("teleport.tsc");
    let cfg = CheckConfig {
        depth_s: 4,
        ..CheckConfig::default()
    };
    let report = analyze(&spec, &cfg, 1).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(report.subsets.len(), 1);
    assert_eq!(report.subsets[0].members, vec!["TeleportJump".to_string()]);
    assert!(elapsed < Duration::from_secs(10), "{:?}", elapsed);
    println!("criterion 4: PASS - singleton reported ({:?})", elapsed);
}

/// Criterion 5: the bundled traffic rules yield exactly the three
/// pairwise minimal inconsistent subsets through the command line, in
/// under three minutes at step size 3 and depth 10.
#[test]
fn criterion_5_traffic_rule_conflicts() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    let out = std::env::temp_dir().join(format!("tsca-acceptance-5-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&out);
    let output = Command::new(env!("CARGO_BIN_EXE_tsca"))
        .args([
            "check",
            fixture("traffic_rules.tsc").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    assert_eq!(output.status.code(), Some(1), "{:?}", output);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let subsets = report["inconsistent_subsets"].as_array().unwrap();
    let members: Vec<Vec<String>> = subsets
        .iter()
        .map(|s| {
            s["members"]
                .as_array()
                .unwrap()
                .iter()
                .map(|m| m.as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    assert_eq!(members.len(), 3, "subsets: {:?}", members);
    assert!(members.iter().all(|m| m.len() == 2), "{:?}", members);
    let expect = [
        vec!["KeepRight".to_string(), "NoPassingRight".to_string()],
        vec!["KeepRight".to_string(), "SafeLaneChange".to_string()],
        vec!["NoPassingRight".to_string(), "SafeLaneChange".to_string()],
    ];
    for e in &expect {
        assert!(members.contains(e), "missing {:?} in {:?}", e, members);
    }
    assert!(elapsed < Duration::from_secs(180), "took {:?}", elapsed);
    println!(
        "criterion 5: PASS - exactly the three pairwise subsets ({:?})",
        elapsed
    );
}

/// Criterion 6: nine requirements have a worst case of 9 * 2^8 = 2304
/// cases; far fewer than half reach the solver, within fifteen minutes.
#[test]
fn criterion_6_pruning_effectiveness() {
    let _guard = HEAVY.lock().unwrap();
    let started = Instant::now();
    let spec = load("nine_rules.tsc");
    let cfg = CheckConfig::from_spec(&spec);
    let report = analyze(&spec, &cfg, 1).unwrap();
    let elapsed = started.elapsed();
    let s = &report.stats;
    assert_eq!(s.worst_case_cases, 2304);
    let fraction = s.cases_solved as f64 / s.worst_case_cases as f64;
    assert!(fraction <= 0.5, "solver fraction {:.1}%", fraction * 100.0);
    assert!(elapsed < Duration::from_secs(900), "took {:?}", elapsed);
    println!(
        "criterion 6: PASS - {} of {} worst-case cases reached the solver ({:.1}%, {:?})",
        s.cases_solved,
        s.worst_case_cases,
        fraction * 100.0,
        elapsed
    );
}

/// Criterion 7: randomized satisfiable-by-construction specifications
/// never produce an inconsistency report.
#[test]
fn criterion_7_no_spurious_reports() {
    let _guard = HEAVY.lock().unwrap();
    let mut rng = Lcg(0xACCE9ED);
    let cfg = CheckConfig {
        depth_s: 3,
        ..CheckConfig::default()
    };
    let mut false_positives = 0;
    for _ in 0..50 {
        let spec = random_satisfiable_spec(&mut rng);
        // generator sanity: the cruise trajectory satisfies every TSC
        let trace = cruise_trace(&spec);
        let excluded: BTreeSet<String> = ["carI", "rLane"].iter().map(|s| s.to_string()).collect();
        let ctx = OracleCtx::new(&spec, excluded);
        for t in &spec.tscs {
            assert!(check_tsc(&ctx, t, &trace).unwrap(), "generator violated");
        }
        let report = analyze(&spec, &cfg, 1).unwrap();
        if !report.is_consistent() {
            false_positives += 1;
        }
    }
    assert_eq!(false_positives, 0);
    println!("criterion 7: PASS - 50 random instances, zero false positives");
}

/// Criterion 8: interval bounding-box bounds contain densely sampled
/// offsets for random headings and dimensions.
#[test]
fn criterion_8_bbox_bounds_containment() {
    let mut rng = Lcg(0xB0B0B0B0);
    let mut failures = 0;
    for _ in 0..100 {
        let params = CarParams {
            rear_overhang: 0.5 + rng.range(0, 200) as f64 / 100.0,
            wheel_base: 1.5 + rng.range(0, 300) as f64 / 100.0,
            front_overhang: 0.5 + rng.range(0, 200) as f64 / 100.0,
            width: 1.0 + rng.range(0, 200) as f64 / 100.0,
            ..CarParams::default()
        };
        let a =
            -std::f64::consts::PI + rng.range(0, 2000) as f64 / 2000.0 * 2.0 * std::f64::consts::PI;
        let w = rng.range(0, 1500) as f64 / 1000.0;
        let interval = (a, (a + w).min(std::f64::consts::PI));
        let bounds = bbox_bounds(interval, &params, 1e-9);
        for k in 0..=10_000 {
            let theta = interval.0 + (interval.1 - interval.0) * (k as f64) / 10_000.0;
            for attr in [Attr::BbXMin, Attr::BbXMax, Attr::BbYMin, Attr::BbYMax] {
                let v = tsc_core::model::bb_offset(&params, attr, theta).unwrap();
                let (inf, sup) = bounds[&attr];
                if !(inf <= v && v <= sup) {
                    failures += 1;
                }
            }
        }
    }
    assert_eq!(failures, 0);
    println!(
        "criterion 8: PASS - 100 random intervals, 10^4 samples each, zero containment failures"
    );
}

/// Criterion 9: parse-serialize-parse structural equality over the full
/// fixture corpus.
#[test]
fn criterion_9_dsl_roundtrip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../tsc-core/fixtures");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("tsc") {
            continue;
        }
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed = parse_spec(&text, &name).unwrap();
        let printed = serialize_spec(&parsed);
        let reparsed = parse_spec(&printed, &name).unwrap();
        assert_eq!(parsed, reparsed, "{} round trip differs", name);
        count += 1;
    }
    assert!(count >= 4);
    println!(
        "criterion 9: PASS - {} corpus files, zero round-trip failures",
        count
    );
}
