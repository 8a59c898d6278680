//! Compilation of basic charts into the chart-structure part of a BMC
//! problem, timing constraints, and unrolling.
//!
//! Start and end of sub-charts are tracked with Boolean flags `started_i`
//! and `complete_i` (leaves numbered left to right; the first leaf of the
//! chart needs no started variable). An invariant leaf additionally keeps
//! an `ok_i` flag accumulating its view literal `b_<view>` over the steps
//! it covers. Successor leaves are gated by the completion of their
//! predecessor: through the primed completion for same-step handoff, or
//! through the unprimed completion when the predecessor is a leading
//! run of empty nodes whose free completion flag can anticipate.
//!
//! The bare fragment keeps the textbook constraint shape; problem
//! assembly adds anchor constraints (`!started_i` at step 0 for every
//! leaf not reachable from the chart start through empty leaves) and may
//! drop the initial pins of free completion flags, which is what makes
//! mid-chart discontinuities detectable while keeping the m+1 unrolling
//! bound reachable.

use crate::chart::BasicChart;
use crate::formula::{instanced, primed, Formula, LinAtom, Rat};
use crate::view::CmpOp;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Symbolic bound of a sub-chart interval.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundExpr {
    /// Trajectory start, time 0.
    Start,
    /// End of the unrolled run (clock at the final instance).
    End,
    /// The split point variable of a sequence node.
    M(String),
}

/// An entry leaf of a node: where its first invariant/empty leaf starts.
#[derive(Debug, Clone)]
pub struct LeafEntry {
    /// Started flag; None when the leaf starts with the trajectory.
    pub started: Option<String>,
    /// Selection literals guarding this entry (choice path).
    pub cond: Vec<(String, bool)>,
}

#[derive(Debug, Clone)]
pub struct SeqTiming {
    pub m_var: String,
    pub pin: Option<String>,
    pub entries: Vec<LeafEntry>,
    pub cond: Vec<(String, bool)>,
    pub lo: BoundExpr,
    pub hi: BoundExpr,
}

#[derive(Debug, Clone)]
pub struct HourglassTiming {
    pub lo: BoundExpr,
    pub hi: BoundExpr,
    pub constraint: Vec<(CmpOp, Rat)>,
    pub cond: Vec<(String, bool)>,
}

#[derive(Debug, Clone)]
pub struct PinChainTiming {
    pub lo: BoundExpr,
    pub hi: BoundExpr,
    pub pins: Vec<String>,
    pub cond: Vec<(String, bool)>,
}

/// Chart-structure fragment of a BMC problem plus assembly metadata.
#[derive(Debug, Clone)]
pub struct ChartStructure {
    /// Initial constraints in reference shape (every completion flag off).
    pub init: Formula,
    /// Initial constraints for assembly (free completion flags unpinned).
    pub init_assembly: Formula,
    pub trans: Formula,
    pub final_: Formula,
    /// Assembly-time anchors: started flags pinned off at step 0.
    pub anchors: Vec<Formula>,
    pub state_bools: Vec<String>,
    /// Choice selection flags, constant over the run.
    pub global_bools: Vec<String>,
    /// View name -> activation literal `b_<view>`.
    pub view_lits: BTreeMap<String, String>,
    pub seqs: Vec<SeqTiming>,
    pub hourglasses: Vec<HourglassTiming>,
    pub pin_chains: Vec<PinChainTiming>,
    pub pin_labels: BTreeSet<String>,
    pub leaf_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    /// Fixed step size (sufficient mode).
    Fixed,
    /// Variable positive step durations (necessary mode).
    Variable,
}

#[derive(Clone)]
enum Gate {
    ChartStart,
    Pred {
        cur: Formula,
        nxt: Formula,
        /// Predecessor completion is a free flag (leading empty run).
        free: bool,
    },
}

#[derive(Clone)]
struct Ctx {
    gate: Gate,
    cond: Vec<(String, bool)>,
    zero_reachable: bool,
    on_f_path: bool,
    lo: BoundExpr,
    hi: BoundExpr,
}

struct NodeRes {
    complete_cur: Formula,
    complete_nxt: Formula,
    entries: Vec<LeafEntry>,
    all_empty: bool,
    free_complete: bool,
}

struct Enc {
    init_table: Vec<Formula>,
    init_assembly: Vec<Formula>,
    trans: Vec<Formula>,
    anchors: Vec<Formula>,
    state_bools: Vec<String>,
    global_bools: Vec<String>,
    view_lits: BTreeMap<String, String>,
    seqs: Vec<SeqTiming>,
    hourglasses: Vec<HourglassTiming>,
    pin_chains: Vec<PinChainTiming>,
    leaf_idx: usize,
    node_idx: usize,
}

fn cond_formula(cond: &[(String, bool)]) -> Formula {
    Formula::and(
        cond.iter()
            .map(|(v, pos)| {
                if *pos {
                    Formula::bool_var(v)
                } else {
                    Formula::not(Formula::bool_var(v))
                }
            })
            .collect(),
    )
}

impl Enc {
    fn new() -> Self {
        Enc {
            init_table: Vec::new(),
            init_assembly: Vec::new(),
            trans: Vec::new(),
            anchors: Vec::new(),
            state_bools: Vec::new(),
            global_bools: Vec::new(),
            view_lits: BTreeMap::new(),
            seqs: Vec::new(),
            hourglasses: Vec::new(),
            pin_chains: Vec::new(),
            leaf_idx: 0,
            node_idx: 0,
        }
    }

    fn fresh_leaf(&mut self) -> usize {
        self.leaf_idx += 1;
        self.leaf_idx
    }

    fn fresh_node(&mut self) -> usize {
        self.node_idx += 1;
        self.node_idx
    }

    fn state_bool(&mut self, name: String) -> String {
        self.state_bools.push(name.clone());
        name
    }

    /// Common started-flag machinery for a gated or choice-guarded leaf.
    fn make_started(&mut self, i: usize, ctx: &Ctx) -> String {
        let s = self.state_bool(format!("started_{}", i));
        match &ctx.gate {
            Gate::ChartStart => {
                // No predecessor; entry is free (masked by selection below).
            }
            Gate::Pred { cur, nxt, free } => {
                let gate_expr = if *free { cur.clone() } else { nxt.clone() };
                self.trans.push(Formula::implies(
                    Formula::bool_var(&primed(&s)),
                    Formula::or(vec![gate_expr, Formula::bool_var(&s)]),
                ));
                if !ctx.zero_reachable {
                    self.anchors.push(Formula::not(Formula::bool_var(&s)));
                }
            }
        }
        if !ctx.cond.is_empty() {
            let mask = cond_formula(&ctx.cond);
            self.trans.push(Formula::implies(
                Formula::bool_var(&primed(&s)),
                mask.clone(),
            ));
            let init_mask = Formula::implies(Formula::bool_var(&s), mask);
            self.init_table.push(init_mask.clone());
            self.init_assembly.push(init_mask);
        }
        s
    }

    fn encode(&mut self, chart: &BasicChart, ctx: &Ctx) -> NodeRes {
        match chart {
            BasicChart::Empty => {
                let i = self.fresh_leaf();
                let c = self.state_bool(format!("complete_{}", i));
                let started = if matches!(ctx.gate, Gate::ChartStart) && ctx.cond.is_empty() {
                    None
                } else {
                    Some(self.make_started(i, ctx))
                };
                let free = started.is_none() && !ctx.on_f_path;
                self.init_table.push(Formula::not(Formula::bool_var(&c)));
                if !free {
                    self.init_assembly.push(Formula::not(Formula::bool_var(&c)));
                }
                match &started {
                    None => {
                        if !free {
                            // Completable from step 1 on.
                            self.trans
                                .push(Formula::iff(Formula::bool_var(&primed(&c)), Formula::True));
                        }
                    }
                    Some(s) => {
                        self.trans.push(Formula::iff(
                            Formula::bool_var(&primed(&c)),
                            Formula::bool_var(s),
                        ));
                    }
                }
                NodeRes {
                    complete_cur: Formula::bool_var(&c),
                    complete_nxt: Formula::bool_var(&primed(&c)),
                    entries: vec![LeafEntry {
                        started,
                        cond: ctx.cond.clone(),
                    }],
                    all_empty: true,
                    free_complete: free,
                }
            }
            BasicChart::Invariant(view) => {
                let i = self.fresh_leaf();
                let c = self.state_bool(format!("complete_{}", i));
                let ok = self.state_bool(format!("ok_{}", i));
                let b = self
                    .view_lits
                    .entry(view.clone())
                    .or_insert_with(|| format!("b_{}", view))
                    .clone();
                let started = if matches!(ctx.gate, Gate::ChartStart) && ctx.cond.is_empty() {
                    None
                } else {
                    Some(self.make_started(i, ctx))
                };
                self.init_table.push(Formula::not(Formula::bool_var(&c)));
                self.init_assembly.push(Formula::not(Formula::bool_var(&c)));
                self.init_table.push(Formula::bool_var(&ok));
                self.init_assembly.push(Formula::bool_var(&ok));
                let holds = Formula::and(vec![Formula::bool_var(&ok), Formula::bool_var(&b)]);
                match &started {
                    None => {
                        self.trans.push(Formula::iff(
                            Formula::bool_var(&primed(&c)),
                            Formula::bool_var(&primed(&ok)),
                        ));
                        self.trans
                            .push(Formula::iff(Formula::bool_var(&primed(&ok)), holds));
                    }
                    Some(s) => {
                        self.trans.push(Formula::iff(
                            Formula::bool_var(&primed(&c)),
                            Formula::and(vec![
                                Formula::bool_var(s),
                                Formula::bool_var(&primed(&ok)),
                            ]),
                        ));
                        self.trans.push(Formula::iff(
                            Formula::bool_var(&primed(&ok)),
                            Formula::implies(Formula::bool_var(s), holds),
                        ));
                    }
                }
                NodeRes {
                    complete_cur: Formula::bool_var(&c),
                    complete_nxt: Formula::bool_var(&primed(&c)),
                    entries: vec![LeafEntry {
                        started,
                        cond: ctx.cond.clone(),
                    }],
                    all_empty: false,
                    free_complete: false,
                }
            }
            BasicChart::Seq { left, right, pin } => {
                let sid = self.fresh_node();
                let m_var = format!("m_{}", sid);
                let left_ctx = Ctx {
                    on_f_path: false,
                    hi: BoundExpr::M(m_var.clone()),
                    ..ctx.clone()
                };
                let l = self.encode(left, &left_ctx);
                let right_ctx = Ctx {
                    gate: Gate::Pred {
                        cur: l.complete_cur.clone(),
                        nxt: l.complete_nxt.clone(),
                        free: l.free_complete,
                    },
                    cond: ctx.cond.clone(),
                    zero_reachable: ctx.zero_reachable && l.all_empty,
                    on_f_path: ctx.on_f_path,
                    lo: BoundExpr::M(m_var.clone()),
                    hi: ctx.hi.clone(),
                };
                let r = self.encode(right, &right_ctx);
                self.seqs.push(SeqTiming {
                    m_var,
                    pin: pin.clone(),
                    entries: r.entries.clone(),
                    cond: ctx.cond.clone(),
                    lo: ctx.lo.clone(),
                    hi: ctx.hi.clone(),
                });
                NodeRes {
                    complete_cur: r.complete_cur,
                    complete_nxt: r.complete_nxt,
                    entries: l.entries,
                    all_empty: l.all_empty && r.all_empty,
                    free_complete: r.free_complete,
                }
            }
            BasicChart::Choice(a, b) => {
                let nid = self.fresh_node();
                let sel = format!("sel_{}", nid);
                self.global_bools.push(sel.clone());
                let mut actx = ctx.clone();
                actx.cond.push((sel.clone(), true));
                let ra = self.encode(a, &actx);
                let mut bctx = ctx.clone();
                bctx.cond.push((sel.clone(), false));
                let rb = self.encode(b, &bctx);
                let mask = |sel_pos: bool, f: Formula| {
                    let lit = if sel_pos {
                        Formula::bool_var(&sel)
                    } else {
                        Formula::not(Formula::bool_var(&sel))
                    };
                    Formula::and(vec![lit, f])
                };
                let complete_cur = Formula::or(vec![
                    mask(true, ra.complete_cur.clone()),
                    mask(false, rb.complete_cur.clone()),
                ]);
                let complete_nxt = Formula::or(vec![
                    mask(true, ra.complete_nxt.clone()),
                    mask(false, rb.complete_nxt.clone()),
                ]);
                let mut entries = ra.entries;
                entries.extend(rb.entries);
                NodeRes {
                    complete_cur,
                    complete_nxt,
                    entries,
                    all_empty: ra.all_empty && rb.all_empty,
                    free_complete: ra.free_complete && rb.free_complete,
                }
            }
            BasicChart::Concurrency(rows) => {
                let results: Vec<NodeRes> = rows.iter().map(|r| self.encode(r, ctx)).collect();
                // Entry alignment: the rows of a concurrency share [b, e].
                for pair in results.windows(2) {
                    for e1 in &pair[0].entries {
                        for e2 in &pair[1].entries {
                            self.align_entries(e1, e2);
                        }
                    }
                }
                let complete_cur =
                    Formula::and(results.iter().map(|r| r.complete_cur.clone()).collect());
                let complete_nxt =
                    Formula::and(results.iter().map(|r| r.complete_nxt.clone()).collect());
                let entries = results.iter().flat_map(|r| r.entries.clone()).collect();
                NodeRes {
                    complete_cur,
                    complete_nxt,
                    entries,
                    all_empty: results.iter().all(|r| r.all_empty),
                    free_complete: results.iter().all(|r| r.free_complete),
                }
            }
            BasicChart::Hourglass {
                body, constraint, ..
            } => {
                let res = self.encode(body, ctx);
                self.hourglasses.push(HourglassTiming {
                    lo: ctx.lo.clone(),
                    hi: ctx.hi.clone(),
                    constraint: constraint.clone(),
                    cond: ctx.cond.clone(),
                });
                res
            }
            BasicChart::PinSeq { body, pins } => {
                let res = self.encode(body, ctx);
                self.pin_chains.push(PinChainTiming {
                    lo: ctx.lo.clone(),
                    hi: ctx.hi.clone(),
                    pins: pins.clone(),
                    cond: ctx.cond.clone(),
                });
                res
            }
        }
    }

    fn align_entries(&mut self, e1: &LeafEntry, e2: &LeafEntry) {
        if e1.started.is_none() && e2.started.is_none() {
            return;
        }
        let mut cond = e1.cond.clone();
        for c in &e2.cond {
            if !cond.contains(c) {
                cond.push(c.clone());
            }
        }
        let guard = cond_formula(&cond);
        let edge_init = |e: &LeafEntry| match &e.started {
            None => Formula::True,
            Some(s) => Formula::bool_var(s),
        };
        let edge_trans = |e: &LeafEntry| match &e.started {
            None => Formula::False,
            Some(s) => Formula::and(vec![
                Formula::bool_var(&primed(s)),
                Formula::not(Formula::bool_var(s)),
            ]),
        };
        let init_eq = Formula::implies(guard.clone(), Formula::iff(edge_init(e1), edge_init(e2)));
        self.init_table.push(init_eq.clone());
        self.init_assembly.push(init_eq);
        self.trans.push(Formula::implies(
            guard,
            Formula::iff(edge_trans(e1), edge_trans(e2)),
        ));
    }
}

/// Compile the chart-structure fragment (I_chart, T_chart, F_chart).
pub fn encode_chart_structure(chart: &BasicChart) -> ChartStructure {
    let mut enc = Enc::new();
    let ctx = Ctx {
        gate: Gate::ChartStart,
        cond: Vec::new(),
        zero_reachable: true,
        on_f_path: true,
        lo: BoundExpr::Start,
        hi: BoundExpr::End,
    };
    let root = enc.encode(chart, &ctx);
    let mut pin_labels = BTreeSet::new();
    chart.pins(&mut pin_labels);
    ChartStructure {
        init: Formula::and(enc.init_table),
        init_assembly: Formula::and(enc.init_assembly),
        trans: Formula::and(enc.trans),
        final_: root.complete_cur,
        anchors: enc.anchors,
        state_bools: enc.state_bools,
        global_bools: enc.global_bools,
        view_lits: enc.view_lits,
        seqs: enc.seqs,
        hourglasses: enc.hourglasses,
        pin_chains: enc.pin_chains,
        pin_labels,
        leaf_count: enc.leaf_idx,
    }
}

pub const CLOCK: &str = "tau";
pub const DURATION: &str = "dur";

pub fn pin_var(label: &str) -> String {
    format!("pin_{}", label)
}

/// Timing constraints: clock progression, split-point ties for sequence
/// boundaries, pin equalities and chains, hourglass duration constraints.
/// Returned as additions to (init, trans, final).
pub fn encode_timing(
    structure: &ChartStructure,
    mode: StepMode,
    delta: &Rat,
) -> (Vec<Formula>, Vec<Formula>, Vec<Formula>) {
    let mut init = Vec::new();
    let mut trans = Vec::new();
    let mut final_ = Vec::new();

    let needs_clock = mode == StepMode::Variable
        || !structure.seqs.is_empty()
        || !structure.hourglasses.is_empty()
        || !structure.pin_chains.is_empty();
    if needs_clock {
        // tau(0) = 0; tau' = tau + dur; dur = delta (fixed) or dur > 0.
        init.push(Formula::Atom(LinAtom::var_cmp_const(
            CLOCK,
            CmpOp::Eq,
            Rat::zero(),
        )));
        trans.push(Formula::Atom(LinAtom {
            terms: vec![
                (Rat::from_integer(1.into()), primed(CLOCK)),
                (Rat::from_integer((-1).into()), CLOCK.to_string()),
                (Rat::from_integer((-1).into()), DURATION.to_string()),
            ],
            cmp: CmpOp::Eq,
            rhs: Rat::zero(),
        }));
        match mode {
            StepMode::Fixed => trans.push(Formula::Atom(LinAtom::var_cmp_const(
                DURATION,
                CmpOp::Eq,
                delta.clone(),
            ))),
            StepMode::Variable => trans.push(Formula::Atom(LinAtom::var_cmp_const(
                DURATION,
                CmpOp::Gt,
                Rat::zero(),
            ))),
        }
    }

    // terms of a bound expression: (coeff·var list, constant)
    let bound_terms = |b: &BoundExpr| -> (Vec<(Rat, String)>, Rat) {
        match b {
            BoundExpr::Start => (vec![], Rat::zero()),
            BoundExpr::End => (
                vec![(Rat::from_integer(1.into()), CLOCK.to_string())],
                Rat::zero(),
            ),
            BoundExpr::M(m) => (vec![(Rat::from_integer(1.into()), m.clone())], Rat::zero()),
        }
    };
    // lhs - rhs cmp 0 as an atom
    let cmp_bounds = |lo: &BoundExpr, hi: &BoundExpr, cmp: CmpOp| -> Formula {
        let (lt, lc) = bound_terms(lo);
        let (ht, hc) = bound_terms(hi);
        let mut terms = lt;
        for (c, v) in ht {
            terms.push((-c, v));
        }
        if terms.is_empty() {
            return if cmp.eval(&lc, &hc) {
                Formula::True
            } else {
                Formula::False
            };
        }
        Formula::Atom(LinAtom {
            terms,
            cmp,
            rhs: hc - lc,
        })
    };

    for seq in &structure.seqs {
        let guard = cond_formula(&seq.cond);
        // m within the parent bounds
        final_.push(Formula::implies(
            guard.clone(),
            Formula::and(vec![
                cmp_bounds(&seq.lo, &BoundExpr::M(seq.m_var.clone()), CmpOp::Le),
                cmp_bounds(&BoundExpr::M(seq.m_var.clone()), &seq.hi, CmpOp::Le),
            ]),
        ));
        // the split point is the clock value where the right child starts
        for entry in &seq.entries {
            let Some(s) = &entry.started else { continue };
            let eguard = cond_formula(&entry.cond);
            init.push(Formula::implies(
                Formula::and(vec![eguard.clone(), Formula::bool_var(s)]),
                Formula::Atom(LinAtom::var_cmp_const(&seq.m_var, CmpOp::Eq, Rat::zero())),
            ));
            trans.push(Formula::implies(
                Formula::and(vec![
                    eguard,
                    Formula::bool_var(&primed(s)),
                    Formula::not(Formula::bool_var(s)),
                ]),
                Formula::Atom(LinAtom {
                    terms: vec![
                        (Rat::from_integer(1.into()), seq.m_var.clone()),
                        (Rat::from_integer((-1).into()), primed(CLOCK)),
                    ],
                    cmp: CmpOp::Eq,
                    rhs: Rat::zero(),
                }),
            ));
        }
        if let Some(p) = &seq.pin {
            final_.push(Formula::implies(
                guard,
                Formula::Atom(LinAtom {
                    terms: vec![
                        (Rat::from_integer(1.into()), pin_var(p)),
                        (Rat::from_integer((-1).into()), seq.m_var.clone()),
                    ],
                    cmp: CmpOp::Eq,
                    rhs: Rat::zero(),
                }),
            ));
        }
    }

    for hg in &structure.hourglasses {
        let guard = cond_formula(&hg.cond);
        let (lt, lc) = bound_terms(&hg.lo);
        let (ht, hc) = bound_terms(&hg.hi);
        let mut atoms = Vec::new();
        for (cmp, bound) in &hg.constraint {
            // (hi - lo) cmp bound
            let mut terms = ht.clone();
            for (c, v) in &lt {
                terms.push((-c.clone(), v.clone()));
            }
            if terms.is_empty() {
                atoms.push(if cmp.eval(&(&hc - &lc), bound) {
                    Formula::True
                } else {
                    Formula::False
                });
            } else {
                atoms.push(Formula::Atom(LinAtom {
                    terms,
                    cmp: *cmp,
                    rhs: bound + &lc - &hc,
                }));
            }
        }
        final_.push(Formula::implies(guard, Formula::and(atoms)));
    }

    for chain in &structure.pin_chains {
        let guard = cond_formula(&chain.cond);
        let mut parts = Vec::new();
        let mut prev = chain.lo.clone();
        for p in &chain.pins {
            let pv = BoundExpr::M(pin_var(p));
            parts.push(cmp_bounds(&prev, &pv, CmpOp::Le));
            prev = pv;
        }
        parts.push(cmp_bounds(&prev, &chain.hi, CmpOp::Le));
        final_.push(Formula::implies(guard, Formula::and(parts)));
    }

    (init, trans, final_)
}

/// A full BMC problem: triple (I, T, F) over declared state variables.
#[derive(Debug, Clone)]
pub struct BmcProblem {
    pub init: Formula,
    pub trans: Formula,
    pub final_: Formula,
    pub state_bools: Vec<String>,
    pub state_reals: Vec<String>,
    pub global_bools: Vec<String>,
    pub global_reals: Vec<String>,
    pub mode: StepMode,
    pub meta: ProblemMeta,
}

/// Extraction metadata carried alongside the formulas.
#[derive(Debug, Clone, Default)]
pub struct ProblemMeta {
    /// Dynamic objects with per-step variables.
    pub cars: Vec<String>,
    /// Static objects valued by global variables.
    pub statics: Vec<String>,
    pub view_lits: BTreeMap<String, String>,
    pub delta: Option<Rat>,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct UnrolledFormula {
    pub formula: Formula,
    pub depth: usize,
}

/// Exact instantiation of I(X0) ∧ ⋀ T(X(i-1), X(i)) ∧ F(Xn).
pub fn unroll(problem: &BmcProblem, n: usize) -> UnrolledFormula {
    let states: HashSet<&String> = problem
        .state_bools
        .iter()
        .chain(problem.state_reals.iter())
        .collect();
    let rename_at = |step_cur: usize| {
        let states = &states;
        move |name: &str| -> String {
            if let Some(base) = name.strip_suffix('\'') {
                instanced(base, step_cur + 1)
            } else if states.contains(&name.to_string()) {
                instanced(name, step_cur)
            } else {
                name.to_string()
            }
        }
    };
    let mut parts = vec![problem.init.rename(&rename_at(0))];
    for i in 1..=n {
        parts.push(problem.trans.rename(&rename_at(i - 1)));
    }
    parts.push(problem.final_.rename(&rename_at(n)));
    UnrolledFormula {
        formula: Formula::and(parts),
        depth: n,
    }
}
