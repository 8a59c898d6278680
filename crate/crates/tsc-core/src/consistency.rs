//! The analysis charts HFC/BC1/BC2 and the inconsistency search:
//! every TSC is tried as the innermost one against every context subset,
//! an inconsistency of {TSC} ∪ T is reported when the consequences cannot
//! be satisfied (necessary check of BC2 unsatisfiable) although the
//! pre-charts can be active in parallel (sufficient check of BC1
//! satisfiable, or T empty). Three prunings keep the case count down:
//! size-ascending enumeration with minimality pruning, propagation of
//! BC1-unsatisfiability to supersets, and running the cheap necessary
//! check first.

use crate::chart::{BasicChart, RequirementTsc};
use crate::checksat::{checksat_n, checksat_s, CheckConfig};
use crate::diag::DomainError;
use crate::smt::Status;
use crate::spec::Specification;
use crate::trajectory::{extract_witness, Trajectory};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;
use std::time::Instant;

/// Pin labels shared by all rows of the BC charts.
const PIN_START: &str = "bcp";
const PIN_END: &str = "bcq";

/// HFC: `true ; H ; (F & C)`: the pre-chart occurs at least once and
/// the consequence is satisfied in parallel to that future.
pub fn build_hfc(tsc: &RequirementTsc) -> BasicChart {
    BasicChart::seq(
        BasicChart::seq(BasicChart::Empty, tsc.history.clone()),
        BasicChart::Concurrency(vec![tsc.future.clone(), tsc.consequence.clone()]),
    )
}

fn innermost_row(tsc: &RequirementTsc, with_consequence: bool) -> BasicChart {
    let future = if with_consequence {
        BasicChart::Concurrency(vec![tsc.future.clone(), tsc.consequence.clone()])
    } else {
        tsc.future.clone()
    };
    // true ; H ;[p] F ;[q] true
    BasicChart::Seq {
        left: Box::new(BasicChart::Seq {
            left: Box::new(BasicChart::seq(BasicChart::Empty, tsc.history.clone())),
            right: Box::new(future),
            pin: Some(PIN_START.to_string()),
        }),
        right: Box::new(BasicChart::Empty),
        pin: Some(PIN_END.to_string()),
    }
}

fn context_row(tsc: &RequirementTsc, with_consequence: bool) -> BasicChart {
    let future = if with_consequence {
        BasicChart::Concurrency(vec![tsc.future.clone(), tsc.consequence.clone()])
    } else {
        tsc.future.clone()
    };
    // true ; H_k ; (F_k spanning pins p, q) ; true
    BasicChart::seq(
        BasicChart::seq(
            BasicChart::seq(BasicChart::Empty, tsc.history.clone()),
            BasicChart::PinSeq {
                body: Box::new(future),
                pins: vec![PIN_START.to_string(), PIN_END.to_string()],
            },
        ),
        BasicChart::Empty,
    )
}

fn build_bc(
    tsc: &RequirementTsc,
    context: &[&RequirementTsc],
    with_consequence: bool,
) -> BasicChart {
    let mut rows = vec![innermost_row(tsc, with_consequence)];
    for t in context {
        rows.push(context_row(t, with_consequence));
    }
    if rows.len() == 1 {
        rows.pop().unwrap()
    } else {
        BasicChart::Concurrency(rows)
    }
}

/// BC1: futures of all TSCs active in parallel, without consequences.
pub fn build_bc1(tsc: &RequirementTsc, context: &[&RequirementTsc]) -> BasicChart {
    build_bc(tsc, context, false)
}

/// BC2: as BC1 but with every future run in parallel to its consequence.
pub fn build_bc2(tsc: &RequirementTsc, context: &[&RequirementTsc]) -> BasicChart {
    build_bc(tsc, context, true)
}

/// Union of the bulletin boards of the participating TSCs.
fn case_bulletin(tscs: &[&RequirementTsc]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for t in tscs {
        for (sym, ty) in &t.bulletin {
            out.insert(sym.clone(), ty.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportedSubset {
    /// TSC names, sorted.
    pub members: Vec<String>,
    /// The innermost choice that produced the report.
    pub innermost: String,
    pub witness: Option<Box<Trajectory>>,
}

impl ReportedSubset {
    fn set(&self) -> BTreeSet<String> {
        self.members.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisStats {
    /// Worst-case case count n * 2^(n-1) without any cap or pruning.
    pub worst_case_cases: u64,
    /// Cases enumerated within the subset-size cap.
    pub cases_enumerated: u64,
    /// Cases whose checks actually reached the solver.
    pub cases_solved: u64,
    pub skipped_minimality: u64,
    pub skipped_bc1_memo: u64,
    pub bc2_unsat: u64,
    pub bc1_sat: u64,
    pub bc1_unsat: u64,
    pub unknown_cases: u64,
    pub wall_millis: u128,
    pub max_subset_cap: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisReport {
    pub subsets: Vec<ReportedSubset>,
    pub stats: AnalysisStats,
}

impl AnalysisReport {
    pub fn is_consistent(&self) -> bool {
        self.subsets.is_empty()
    }
}

struct CaseOutcome {
    innermost: String,
    set: BTreeSet<String>,
    context: BTreeSet<String>,
    solved: bool,
    bc2_unsat: bool,
    bc1_sat: Option<bool>,
    unknown: bool,
    report: Option<ReportedSubset>,
}

/// Algorithm: for every TSC and every context subset (size ascending),
/// check the necessary condition of BC2 first; only when unsatisfiable,
/// confirm with the sufficient check of BC1. Unknown verdicts never
/// produce a report.
pub fn analyze(
    spec: &Specification,
    cfg: &CheckConfig,
    jobs: usize,
) -> Result<AnalysisReport, DomainError> {
    let started = Instant::now();
    if spec.tscs.is_empty() {
        return Err(DomainError::new("specification has no TSC"));
    }
    let mut tscs: Vec<&RequirementTsc> = spec.tscs.iter().collect();
    tscs.sort_by(|a, b| a.name.cmp(&b.name));
    let n = tscs.len();
    let cap = cfg.max_subset.max(1).min(n);

    let mut stats = AnalysisStats {
        worst_case_cases: (n as u64) * (1u64 << (n - 1).min(62)),
        max_subset_cap: cap,
        ..Default::default()
    };

    let mut reported: Vec<ReportedSubset> = Vec::new();
    // (innermost, context) pairs with BC1 unsatisfiable.
    let mut bc1_unsat_memo: Vec<(String, BTreeSet<String>)> = Vec::new();

    for size in 1..=cap {
        // Enumerate cases of this size: innermost x context combinations.
        let mut cases: Vec<(usize, Vec<usize>)> = Vec::new();
        for (i, _) in tscs.iter().enumerate() {
            let others: Vec<usize> = (0..n).filter(|j| *j != i).collect();
            for combo in combinations(&others, size - 1) {
                cases.push((i, combo));
            }
        }
        stats.cases_enumerated += cases.len() as u64;

        // Pruning decisions are made sequentially against current state.
        let mut runnable = Vec::new();
        for (i, combo) in cases {
            let set: BTreeSet<String> = std::iter::once(tscs[i].name.clone())
                .chain(combo.iter().map(|j| tscs[*j].name.clone()))
                .collect();
            if reported.iter().any(|r| r.set().is_subset(&set)) {
                stats.skipped_minimality += 1;
                continue;
            }
            let context: BTreeSet<String> = combo.iter().map(|j| tscs[*j].name.clone()).collect();
            if bc1_unsat_memo
                .iter()
                .any(|(inn, t)| *inn == tscs[i].name && t.is_subset(&context))
            {
                stats.skipped_bc1_memo += 1;
                continue;
            }
            runnable.push((i, combo));
        }

        let outcomes: Vec<CaseOutcome> = if jobs <= 1 || runnable.len() <= 1 {
            runnable
                .iter()
                .map(|(i, combo)| run_case(spec, cfg, &tscs, *i, combo))
                .collect()
        } else {
            let queue = Mutex::new(runnable.clone().into_iter());
            let results = Mutex::new(Vec::new());
            std::thread::scope(|scope| {
                for _ in 0..jobs.min(runnable.len()) {
                    scope.spawn(|| loop {
                        let item = { queue.lock().unwrap().next() };
                        match item {
                            None => break,
                            Some((i, combo)) => {
                                let out = run_case(spec, cfg, &tscs, i, &combo);
                                results.lock().unwrap().push(out);
                            }
                        }
                    });
                }
            });
            let mut v = results.into_inner().unwrap();
            // Restore deterministic order for reporting.
            v.sort_by(|a, b| (&a.innermost, &a.set).cmp(&(&b.innermost, &b.set)));
            v
        };

        for out in outcomes {
            if out.solved {
                stats.cases_solved += 1;
            }
            if out.unknown {
                stats.unknown_cases += 1;
            }
            if out.bc2_unsat {
                stats.bc2_unsat += 1;
            }
            match out.bc1_sat {
                Some(true) => stats.bc1_sat += 1,
                Some(false) => {
                    stats.bc1_unsat += 1;
                    bc1_unsat_memo.push((out.innermost.clone(), out.context.clone()));
                }
                None => {}
            }
            if let Some(report) = out.report {
                if !reported.iter().any(|r| r.set() == report.set()) {
                    reported.push(report);
                }
            }
        }
    }

    reported.sort_by(|a, b| (a.members.len(), &a.members).cmp(&(b.members.len(), &b.members)));
    stats.wall_millis = started.elapsed().as_millis();
    Ok(AnalysisReport {
        subsets: reported,
        stats,
    })
}

fn run_case(
    spec: &Specification,
    cfg: &CheckConfig,
    tscs: &[&RequirementTsc],
    i: usize,
    combo: &[usize],
) -> CaseOutcome {
    let innermost = tscs[i];
    let context: Vec<&RequirementTsc> = combo.iter().map(|j| tscs[*j]).collect();
    let set: BTreeSet<String> = std::iter::once(innermost.name.clone())
        .chain(context.iter().map(|t| t.name.clone()))
        .collect();
    let context_names: BTreeSet<String> = context.iter().map(|t| t.name.clone()).collect();
    let mut participants = vec![innermost];
    participants.extend(context.iter().copied());
    let bulletin = case_bulletin(&participants);

    let mut outcome = CaseOutcome {
        innermost: innermost.name.clone(),
        set,
        context: context_names,
        solved: true,
        bc2_unsat: false,
        bc1_sat: None,
        unknown: false,
        report: None,
    };

    let bc2 = build_bc2(innermost, &context);
    let v2 = checksat_n(&bc2, spec, &bulletin, cfg);
    match v2.status {
        Status::Sat => return outcome,
        Status::Unknown => {
            outcome.unknown = true;
            return outcome;
        }
        Status::Unsat => outcome.bc2_unsat = true,
    }

    if context.is_empty() {
        // Existential inconsistency of the single TSC.
        outcome.report = Some(ReportedSubset {
            members: vec![innermost.name.clone()],
            innermost: innermost.name.clone(),
            witness: None,
        });
        return outcome;
    }

    let bc1 = build_bc1(innermost, &context);
    let (v1, problem) = checksat_s(&bc1, spec, &bulletin, cfg);
    match v1.status {
        Status::Unknown => {
            outcome.unknown = true;
        }
        Status::Unsat => {
            outcome.bc1_sat = Some(false);
        }
        Status::Sat => {
            outcome.bc1_sat = Some(true);
            let witness = match (v1.model.as_ref(), problem.as_ref()) {
                (Some(m), Some(p)) => extract_witness(m, p).ok().map(Box::new),
                _ => None,
            };
            let mut members: Vec<String> = outcome.set.iter().cloned().collect();
            members.sort();
            outcome.report = Some(ReportedSubset {
                members,
                innermost: innermost.name.clone(),
                witness,
            });
        }
    }
    outcome
}

/// Lexicographic k-combinations of a sorted index slice.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|i| items[*i]).collect());
        if k == 0 {
            break;
        }
        // advance
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < items.len() - (k - pos) {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_enumeration() {
        let items = vec![0, 1, 2, 3];
        assert_eq!(combinations(&items, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(&items, 2).len(), 6);
        assert_eq!(combinations(&items, 4).len(), 1);
        assert_eq!(combinations(&items, 5).len(), 0);
    }

    #[test]
    fn worst_case_count_for_nine() {
        // 9 * 2^8 = 2304
        let n = 9u64;
        assert_eq!(n * (1 << 8), 2304);
    }

    #[test]
    fn hfc_structure() {
        let tsc = RequirementTsc {
            name: "t".into(),
            bulletin: vec![],
            history: BasicChart::inv("H"),
            future: BasicChart::inv("F"),
            consequence: BasicChart::inv("C"),
        };
        let hfc = build_hfc(&tsc);
        match &hfc {
            BasicChart::Seq { left, right, pin } => {
                assert!(pin.is_none());
                match left.as_ref() {
                    BasicChart::Seq { left: l2, .. } => {
                        assert_eq!(l2.as_ref(), &BasicChart::Empty)
                    }
                    other => panic!("unexpected left {:?}", other),
                }
                match right.as_ref() {
                    BasicChart::Concurrency(rows) => assert_eq!(rows.len(), 2),
                    other => panic!("unexpected right {:?}", other),
                }
            }
            other => panic!("unexpected chart {:?}", other),
        }
        // count: 2 sequence operators beyond H, F, C contents
        assert_eq!(hfc.count_sequence_operators(), 2);
    }

    #[test]
    fn bc_row_counts_and_pins() {
        let mk = |name: &str| RequirementTsc {
            name: name.into(),
            bulletin: vec![],
            history: BasicChart::Empty,
            future: BasicChart::inv("F"),
            consequence: BasicChart::inv("C"),
        };
        let a = mk("a");
        let b = mk("b");
        let bc1 = build_bc1(&a, &[&b]);
        match &bc1 {
            BasicChart::Concurrency(rows) => assert_eq!(rows.len(), 2),
            other => panic!("unexpected {:?}", other),
        }
        let mut pins = std::collections::BTreeSet::new();
        bc1.pins(&mut pins);
        assert_eq!(pins.len(), 2);
    }
}
