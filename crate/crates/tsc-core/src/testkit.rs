//! Verification support shared by the integration and acceptance suites:
//! the desk-scale chart corpus, an exhaustive grid-trace search, and a
//! generator of satisfiable-by-construction specifications.

use crate::chart::BasicChart;
use crate::dsl::parse_spec;
use crate::model::Attr;
use crate::oracle::{chart_satisfiable_on, OracleCtx, SampledTrajectory, TrajStyle, Valuation};
use crate::spec::Specification;
use crate::view::AnchorTerm;
use num_rational::BigRational;
use std::collections::BTreeSet;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Two cars with interval views over x and y used by the chart corpus.
pub fn corpus_spec() -> Specification {
    parse_spec(
        "objects { carI: Car; carJ: Car; }\n\
         view P { constraint carI.x > 10; }\n\
         view Q { constraint carI.x < 0; }\n\
         view R { constraint carI.x > 2; constraint carI.x < 8; }\n\
         view W { constraint carI.y > 5; }\n\
         view E1 { constraint carI.x = 3; }\n\
         view S { constraint carJ.x - carI.x > 5; }\n",
        "corpus.tsc",
    )
    .expect("corpus parses")
}

/// The desk-scale chart corpus: every operator, pins, and both verdicts.
pub fn chart_corpus() -> Vec<BasicChart> {
    use BasicChart::{Choice, Concurrency, Empty};
    let inv = BasicChart::inv;
    let seq = BasicChart::seq;
    vec![
        inv("P"),
        inv("Q"),
        inv("R"),
        inv("E1"),
        inv("W"),
        inv("S"),
        seq(inv("P"), inv("Q")),
        seq(inv("Q"), inv("P")),
        seq(inv("P"), inv("R")),
        seq(inv("R"), inv("Q")),
        seq(seq(inv("P"), inv("Q")), inv("R")),
        seq(inv("R"), inv("R")),
        seq(inv("P"), inv("P")),
        seq(inv("R"), inv("E1")),
        seq(inv("E1"), inv("R")),
        seq(inv("P"), inv("W")),
        seq(inv("W"), seq(inv("P"), inv("W"))),
        Concurrency(vec![inv("P"), inv("Q")]),
        Concurrency(vec![inv("P"), inv("P")]),
        Concurrency(vec![inv("P"), inv("R")]),
        Concurrency(vec![inv("P"), inv("W")]),
        Choice(Box::new(inv("P")), Box::new(inv("Q"))),
        Choice(
            Box::new(Concurrency(vec![inv("P"), inv("Q")])),
            Box::new(inv("R")),
        ),
        seq(Choice(Box::new(inv("P")), Box::new(inv("Q"))), inv("R")),
        seq(inv("P"), Choice(Box::new(inv("Q")), Box::new(inv("R")))),
        Concurrency(vec![seq(inv("P"), inv("Q")), seq(Empty, inv("W"))]),
        seq(seq(Empty, inv("P")), Empty),
        seq(inv("P"), seq(Empty, inv("Q"))),
        seq(seq(inv("R"), inv("E1")), inv("R")),
        Concurrency(vec![seq(Empty, inv("Q")), seq(inv("P"), Empty)]),
        BasicChart::Seq {
            left: Box::new(inv("P")),
            right: Box::new(inv("W")),
            pin: Some("p".into()),
        },
        Concurrency(vec![
            BasicChart::Seq {
                left: Box::new(inv("P")),
                right: Box::new(inv("W")),
                pin: Some("p".into()),
            },
            BasicChart::Seq {
                left: Box::new(Empty),
                right: Box::new(inv("W")),
                pin: Some("p".into()),
            },
        ]),
        seq(
            inv("P"),
            BasicChart::PinSeq {
                body: Box::new(inv("W")),
                pins: vec!["p".into(), "q".into()],
            },
        ),
        seq(inv("S"), inv("P")),
        Concurrency(vec![inv("S"), inv("W")]),
        Choice(Box::new(seq(inv("S"), inv("Q"))), Box::new(inv("P"))),
        seq(seq(inv("Q"), inv("E1")), inv("P")),
    ]
}

fn candidates(attr: Attr) -> Vec<i64> {
    match attr {
        Attr::X => vec![-1, 0, 1, 2, 3, 5, 8, 9, 10, 11],
        Attr::Y => vec![0, 5, 6],
        _ => vec![0],
    }
}

fn used_terms(spec: &Specification, chart: &BasicChart) -> Vec<AnchorTerm> {
    let mut views = BTreeSet::new();
    chart.referenced_views(&mut views);
    let mut terms = BTreeSet::new();
    for name in views {
        let view = spec.view(&name).unwrap();
        let mut stack = vec![&view.root];
        while let Some(f) = stack.pop() {
            for c in &f.constraints {
                for (_, t) in &c.terms {
                    terms.insert(t.clone());
                }
            }
            for ch in &f.children {
                stack.push(ch);
            }
        }
    }
    terms.into_iter().collect()
}

/// Exhaustive search for a satisfying piecewise-linear grid trace over
/// per-attribute candidate values.
pub fn oracle_grid_sat(spec: &Specification, chart: &BasicChart, depth: usize) -> bool {
    let terms = used_terms(spec, chart);
    let value_sets: Vec<Vec<i64>> = terms.iter().map(|t| candidates(t.attr)).collect();
    let points = depth + 1;
    let slots = terms.len() * points;
    let mut counters = vec![0usize; slots];
    let ctx = OracleCtx::new(spec, BTreeSet::new());
    loop {
        let mut frames = Vec::new();
        for k in 0..points {
            let mut val = Valuation::new();
            for (ti, term) in terms.iter().enumerate() {
                let v = value_sets[ti][counters[k * terms.len() + ti]];
                val.insert(term.clone(), rat(v));
            }
            frames.push(val);
        }
        let traj = SampledTrajectory {
            times: (0..=depth as i64).map(rat).collect(),
            frames,
            style: TrajStyle::PiecewiseLinear,
        };
        if chart_satisfiable_on(&ctx, chart, &traj, 0, depth).unwrap() {
            return true;
        }
        let mut i = 0;
        loop {
            if i == slots {
                return false;
            }
            counters[i] += 1;
            if counters[i] < value_sets[i % terms.len()].len() {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Deterministic linear-congruential generator for reproducible tests.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 16
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % ((hi - lo + 1) as u64)) as i64
    }
}

/// A specification whose requirements are all satisfied along one
/// cruise trajectory (speed 10 m/s at lane center), with random slack.
pub fn random_satisfiable_spec(rng: &mut Lcg) -> Specification {
    let v = 10;
    let y = 2;
    let n_tscs = rng.range(2, 3);
    let mut views = String::new();
    let mut tscs = String::new();
    for i in 0..n_tscs {
        let vs = rng.range(1, 5);
        let xs = rng.range(1, 40);
        views.push_str(&format!(
            "view F{i} {{ constraint carI.v > {}; constraint carI.v < {}; }}\n\
             view C{i} {{ constraint carI.y > {}; constraint carI.y < {}; constraint carI.x > -{}; }}\n",
            v - vs,
            v + vs,
            y - rng.range(1, 2),
            y + rng.range(1, 2),
            xs,
        ));
        tscs.push_str(&format!(
            "tsc R{i} {{ use carI, rLane; future = inv(F{i}); consequence = inv(C{i}); }}\n"
        ));
    }
    let text = format!(
        "objects {{\n  carI: Car;\n  rLane: Lane(start 0 m, length 2000 m, width 4 m, offset 0 m);\n}}\n{views}{tscs}"
    );
    parse_spec(&text, "random.tsc").expect("generated spec parses")
}

/// The generating cruise trajectory as an oracle grid trace.
pub fn cruise_trace(spec: &Specification) -> SampledTrajectory {
    use crate::model::{CarState, LaneState, ObjectState};
    let mut frames = Vec::new();
    for k in 0..3 {
        let states = vec![
            (
                "carI".to_string(),
                ObjectState::Car(CarState {
                    x: 50.0 + 30.0 * k as f64,
                    y: 2.0,
                    v: 10.0,
                    theta: 0.0,
                    a: 0.0,
                    delta: 0.0,
                }),
            ),
            (
                "rLane".to_string(),
                ObjectState::Lane(LaneState {
                    start: 0.0,
                    length: 2000.0,
                    width: 4.0,
                    offset: 0.0,
                }),
            ),
        ];
        frames.push(crate::oracle::valuation_from_states(spec, &states).unwrap());
    }
    SampledTrajectory {
        times: (0..=3).map(rat).collect(),
        frames,
        style: TrajStyle::PiecewiseConstant,
    }
}
