//! The two semi-decision procedures for chart satisfiability.
//!
//! Necessary mode checks invariants at discrete time points over
//! variable-duration steps: per car one attribute vector per grid point
//! (consecutive steps share the boundary point, which is the only
//! dynamics constraint), bounding-box offsets relaxed to free variables
//! clamped by their extrema over all headings.
//!
//! Sufficient mode describes car motion as C1 quadratic Bézier splines
//! over fixed-size steps: spatial views are imposed on control points
//! (strict on p0/p1, non-strict on the shared segment endpoint),
//! bounding boxes are over-approximated per heading interval, and
//! conservative linear constraints on the control legs keep curvature
//! and lateral acceleration within the single-track-model limits.

use crate::bmc::{
    encode_chart_structure, encode_timing, unroll, BmcProblem, ProblemMeta, StepMode,
};
use crate::chart::BasicChart;
use crate::diag::UnsupportedConstraint;
use crate::formula::{primed, Formula, LinAtom, Rat};
use crate::model::{Attr, CarParams};
use crate::smt::{self, SolverConfig, Status, Verdict};
use crate::spec::Specification;
use crate::translate::{translate_view, Strictness, VFormula};
use crate::view::{AnchorTerm, CmpOp};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

/// Configuration of the satisfiability checks.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Fixed step size in seconds (sufficient mode).
    pub delta: Rat,
    /// Sufficient-mode unrolling depth.
    pub depth_s: usize,
    /// Number of uniform heading intervals partitioning [-pi, pi).
    pub intervals: usize,
    /// Numeric tolerance for outward rounding of computed bounds.
    pub epsilon: f64,
    /// Cap on analyzed subset size (consistency analysis).
    pub max_subset: usize,
    pub solver: SolverConfig,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            delta: Rat::from_integer(3.into()),
            depth_s: 10,
            intervals: 16,
            epsilon: 1e-6,
            max_subset: 3,
            solver: SolverConfig::default(),
        }
    }
}

impl CheckConfig {
    pub fn from_spec(spec: &Specification) -> Self {
        let mut cfg = CheckConfig::default();
        let a = &spec.analysis;
        if let Some(s) = &a.step {
            cfg.delta = s.clone();
        }
        if let Some(d) = a.depth {
            cfg.depth_s = d;
        }
        if let Some(i) = a.intervals {
            cfg.intervals = i;
        }
        if let Some(t) = &a.timeout {
            let secs = rat_to_f64(t).max(0.001);
            cfg.solver.timeout = Duration::from_millis((secs * 1000.0) as u64);
        }
        if let Some(m) = a.max_subset {
            cfg.max_subset = m;
        }
        cfg
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Conservative small-denominator rationals: constants entering the
/// constraint system are snapped to a 1e-6 grid in a safe direction,
/// keeping exact-arithmetic tableau entries small.
const GRID: i64 = 1_000_000;

fn rat_down(x: f64) -> Rat {
    let scaled = (x * GRID as f64).floor() as i128;
    Rat::new(scaled.into(), (GRID as i128).into())
}

fn rat_up(x: f64) -> Rat {
    let scaled = (x * GRID as f64).ceil() as i128;
    Rat::new(scaled.into(), (GRID as i128).into())
}

fn rat_near(x: f64) -> Rat {
    let scaled = (x * GRID as f64).round() as i128;
    Rat::new(scaled.into(), (GRID as i128).into())
}

/// Numerically computed extrema of a bounding-box offset over a heading
/// interval, outward-safe: `inf <= inf_I attr(theta)` and
/// `sup >= sup_I attr(theta)` hold for every heading in the interval.
pub fn bbox_bounds(
    interval: (f64, f64),
    params: &CarParams,
    epsilon: f64,
) -> BTreeMap<Attr, (f64, f64)> {
    // Extra widening absorbs the snapping of sector normals to the
    // small-denominator grid used by the encodings.
    let (lo, hi) = interval;
    let lo = lo - epsilon - 2e-6;
    let hi = hi + epsilon + 2e-6;
    let corners = params.corners();
    // Offset along x: cx cos(t) - cy sin(t) = R cos(t + phi)
    // Offset along y: cx sin(t) + cy cos(t) = R cos(t + phi - pi/2)
    let mut out = BTreeMap::new();
    for (attr, shift) in [
        (Attr::BbXMin, 0.0),
        (Attr::BbXMax, 0.0),
        (Attr::BbYMin, -std::f64::consts::FRAC_PI_2),
        (Attr::BbYMax, -std::f64::consts::FRAC_PI_2),
    ] {
        let mut corner_ranges = Vec::new();
        for (cx, cy) in corners {
            let r = (cx * cx + cy * cy).sqrt();
            let phi = cy.atan2(cx) + shift;
            // extrema of r*cos(t + phi) for t in [lo, hi]
            let a = lo + phi;
            let b = hi + phi;
            let mut min = (r * a.cos()).min(r * b.cos());
            let mut max = (r * a.cos()).max(r * b.cos());
            if contains_multiple(a, b, 0.0) {
                max = r;
            }
            if contains_multiple(a, b, std::f64::consts::PI) {
                min = -r;
            }
            corner_ranges.push((min, max));
        }
        let is_max = matches!(attr, Attr::BbXMax | Attr::BbYMax);
        // Exact side: extremum of the pointwise max/min equals the
        // max/min of the per-corner extrema.
        let exact = if is_max {
            corner_ranges
                .iter()
                .map(|(_, mx)| *mx)
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            corner_ranges
                .iter()
                .map(|(mn, _)| *mn)
                .fold(f64::INFINITY, f64::min)
        };
        // Loose side: Lipschitz-corrected dense sampling (the offset's
        // derivative magnitude is bounded by the largest corner radius).
        let max_r = corners
            .iter()
            .map(|(cx, cy)| (cx * cx + cy * cy).sqrt())
            .fold(0.0f64, f64::max);
        let steps = 1024usize;
        let h = (hi - lo) / steps as f64;
        let corr = max_r * h / 2.0;
        let mut sampled = if is_max {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        for s in 0..=steps {
            let t = lo + h * s as f64;
            let mut v = if is_max {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            for (cx, cy) in corners {
                let (r, phi) = {
                    let r = (cx * cx + cy * cy).sqrt();
                    (r, cy.atan2(cx) + shift)
                };
                let f = r * (t + phi).cos();
                v = if is_max { v.max(f) } else { v.min(f) };
            }
            sampled = if is_max {
                sampled.min(v)
            } else {
                sampled.max(v)
            };
        }
        let (inf, sup) = if is_max {
            (sampled - corr, exact)
        } else {
            (exact, sampled + corr)
        };
        out.insert(attr, (inf - epsilon, sup + epsilon));
    }
    out
}

/// Does [a, b] contain a point equal to `target` modulo 2*pi?
fn contains_multiple(a: f64, b: f64, target: f64) -> bool {
    let tau = 2.0 * std::f64::consts::PI;
    let k = ((a - target) / tau).ceil();
    let point = target + k * tau;
    point <= b
}

// ---- variable naming --------------------------------------------------

fn nvar(sym: &str, attr: Attr) -> String {
    format!("{}.{}", sym, attr.name())
}

fn svar(sym: &str, field: &str) -> String {
    format!("{}.{}", sym, field)
}

fn static_var(sym: &str, attr: Attr) -> String {
    format!("{}.{}", sym, attr.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Instance {
    Cur,
    Nxt,
}

fn at(name: String, inst: Instance) -> String {
    match inst {
        Instance::Cur => name,
        Instance::Nxt => primed(&name),
    }
}

// ---- shared helpers ----------------------------------------------------

/// Referenced symbols of all views of a chart, split into dynamic cars
/// and static objects.
fn referenced_objects(
    spec: &Specification,
    formulas: &BTreeMap<String, (VFormula, VFormula)>,
) -> (Vec<String>, Vec<String>) {
    let mut terms = BTreeSet::new();
    for (strict, relaxed) in formulas.values() {
        strict.terms(&mut terms);
        relaxed.terms(&mut terms);
    }
    let mut cars = BTreeSet::new();
    let mut statics = BTreeSet::new();
    for t in &terms {
        if spec.is_dynamic(&t.symbol) {
            cars.insert(t.symbol.clone());
        } else {
            statics.insert(t.symbol.clone());
        }
    }
    (cars.into_iter().collect(), statics.into_iter().collect())
}

/// Translate every view referenced by the chart in both strictness modes.
fn translate_chart_views(
    chart: &BasicChart,
    spec: &Specification,
    bulletin: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, (VFormula, VFormula)>, UnsupportedConstraint> {
    let mut names = BTreeSet::new();
    chart.referenced_views(&mut names);
    let pool = spec.pool();
    let mut out = BTreeMap::new();
    for name in names {
        let view = spec
            .view(&name)
            .ok_or_else(|| UnsupportedConstraint::new(format!("unknown view {}", name)))?;
        let strict = translate_view(view, bulletin, &pool, &spec.world, Strictness::Strict)
            .map_err(|e| UnsupportedConstraint::new(e.message))?;
        let relaxed = translate_view(view, bulletin, &pool, &spec.world, Strictness::RelaxedEnd)
            .map_err(|e| UnsupportedConstraint::new(e.message))?;
        out.insert(name, (strict, relaxed));
    }
    Ok(out)
}

/// Bulletin for a standalone chart: free symbols of its views.
pub fn chart_bulletin(chart: &BasicChart, spec: &Specification) -> BTreeMap<String, String> {
    let mut names = BTreeSet::new();
    chart.referenced_views(&mut names);
    let mut bulletin = BTreeMap::new();
    for name in names {
        if let Some(view) = spec.view(&name) {
            for sym in view.free_symbols() {
                if let Some(ty) = spec.type_of(&sym) {
                    bulletin.insert(sym, ty.to_string());
                }
            }
        }
    }
    bulletin
}

/// Static-object constraints: fixed geometry plus basic lane sanity.
fn static_constraints(spec: &Specification, statics: &[String]) -> Vec<Formula> {
    let mut out = Vec::new();
    for sym in statics {
        let decl = match spec.object(sym) {
            Some(d) => d,
            None => continue,
        };
        if spec.world.is_subtype(&decl.type_name, "Lane") {
            for attr in [Attr::Length, Attr::Width] {
                out.push(Formula::Atom(LinAtom::var_cmp_const(
                    &static_var(sym, attr),
                    CmpOp::Gt,
                    Rat::zero(),
                )));
            }
            if let Some(geom) = &decl.fixed_lane {
                for (attr, v) in [
                    (Attr::Start, geom.start),
                    (Attr::Length, geom.length),
                    (Attr::Width, geom.width),
                    (Attr::Offset, geom.offset),
                ] {
                    out.push(Formula::Atom(LinAtom::var_cmp_const(
                        &static_var(sym, attr),
                        CmpOp::Eq,
                        rat_near(v),
                    )));
                }
            }
        }
    }
    out
}

fn static_vars(spec: &Specification, statics: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for sym in statics {
        if let Some(decl) = spec.object(sym) {
            if spec.world.is_subtype(&decl.type_name, "Lane") {
                for attr in [Attr::Start, Attr::Length, Attr::Width, Attr::Offset] {
                    out.push(static_var(sym, attr));
                }
            }
        }
    }
    out
}

/// Expand a static attribute term to global variables.
fn expand_static(term: &AnchorTerm) -> Vec<(Rat, String)> {
    let one = Rat::from_integer(1.into());
    match term.attr {
        Attr::XMin => vec![(one, static_var(&term.symbol, Attr::Start))],
        Attr::XMax => vec![
            (one.clone(), static_var(&term.symbol, Attr::Start)),
            (one, static_var(&term.symbol, Attr::Length)),
        ],
        Attr::YMin => vec![(one, static_var(&term.symbol, Attr::Offset))],
        Attr::YMax => vec![
            (one.clone(), static_var(&term.symbol, Attr::Offset)),
            (one, static_var(&term.symbol, Attr::Width)),
        ],
        attr => vec![(one, static_var(&term.symbol, attr))],
    }
}

// ---- necessary mode ----------------------------------------------------

fn necessary_car_vars(sym: &str) -> Vec<String> {
    [
        Attr::X,
        Attr::Y,
        Attr::V,
        Attr::Theta,
        Attr::A,
        Attr::Delta,
        Attr::BbXMin,
        Attr::BbXMax,
        Attr::BbYMin,
        Attr::BbYMax,
    ]
    .iter()
    .map(|a| nvar(sym, *a))
    .collect()
}

/// Expand an attribute term at a point instance (necessary mode).
fn expand_term_n(spec: &Specification, term: &AnchorTerm, inst: Instance) -> Vec<(Rat, String)> {
    let one = Rat::from_integer(1.into());
    if !spec.is_dynamic(&term.symbol) {
        return expand_static(term);
    }
    match term.attr {
        Attr::XMin => vec![
            (one.clone(), at(nvar(&term.symbol, Attr::X), inst)),
            (one, at(nvar(&term.symbol, Attr::BbXMin), inst)),
        ],
        Attr::XMax => vec![
            (one.clone(), at(nvar(&term.symbol, Attr::X), inst)),
            (one, at(nvar(&term.symbol, Attr::BbXMax), inst)),
        ],
        Attr::YMin => vec![
            (one.clone(), at(nvar(&term.symbol, Attr::Y), inst)),
            (one, at(nvar(&term.symbol, Attr::BbYMin), inst)),
        ],
        Attr::YMax => vec![
            (one.clone(), at(nvar(&term.symbol, Attr::Y), inst)),
            (one, at(nvar(&term.symbol, Attr::BbYMax), inst)),
        ],
        attr => vec![(one, at(nvar(&term.symbol, attr), inst))],
    }
}

fn instantiate_formula_n(spec: &Specification, vf: &VFormula, inst: Instance) -> Formula {
    match vf {
        VFormula::True => Formula::True,
        VFormula::False => Formula::False,
        VFormula::And(kids) => Formula::and(
            kids.iter()
                .map(|k| instantiate_formula_n(spec, k, inst))
                .collect(),
        ),
        VFormula::Or(kids) => Formula::or(
            kids.iter()
                .map(|k| instantiate_formula_n(spec, k, inst))
                .collect(),
        ),
        VFormula::Atom(a) => {
            let mut terms = Vec::new();
            for (c, t) in &a.terms {
                for (c2, v) in expand_term_n(spec, t, inst) {
                    terms.push((c * &c2, v));
                }
            }
            Formula::Atom(LinAtom {
                terms,
                cmp: a.cmp,
                rhs: a.rhs.clone(),
            })
        }
    }
}

/// Build the variable-duration (necessary-condition) BMC problem and its
/// unrolling depth m+1.
pub fn build_n_problem(
    chart: &BasicChart,
    spec: &Specification,
    bulletin: &BTreeMap<String, String>,
    cfg: &CheckConfig,
) -> Result<(BmcProblem, usize), UnsupportedConstraint> {
    let structure = encode_chart_structure(chart);
    let formulas = translate_chart_views(chart, spec, bulletin)?;
    let (cars, statics) = referenced_objects(spec, &formulas);

    let (t_init, t_trans, t_final) = encode_timing(&structure, StepMode::Variable, &cfg.delta);

    let mut init = vec![structure.init_assembly.clone()];
    init.extend(structure.anchors.clone());
    init.extend(t_init);
    init.extend(static_constraints(spec, &statics));
    let mut trans = vec![structure.trans.clone()];
    trans.extend(t_trans);
    let mut final_ = vec![structure.final_.clone()];
    final_.extend(t_final);

    // World-model relaxation: bounding-box offsets clamped to their
    // extrema over all headings, at every point.
    let mut state_reals = Vec::new();
    for sym in &cars {
        state_reals.extend(necessary_car_vars(sym));
        let params = spec.params_for(sym);
        let bounds = bbox_bounds(
            (-std::f64::consts::PI, std::f64::consts::PI),
            params,
            cfg.epsilon,
        );
        for (attr, (inf, sup)) in &bounds {
            let var = nvar(sym, *attr);
            for inst in [Instance::Cur, Instance::Nxt] {
                let lo = Formula::Atom(LinAtom::var_cmp_const(
                    &at(var.clone(), inst),
                    CmpOp::Ge,
                    rat_down(*inf),
                ));
                let hi = Formula::Atom(LinAtom::var_cmp_const(
                    &at(var.clone(), inst),
                    CmpOp::Le,
                    rat_up(*sup),
                ));
                match inst {
                    Instance::Cur => {
                        init.push(lo.clone());
                        init.push(hi.clone());
                    }
                    Instance::Nxt => {
                        trans.push(lo);
                        trans.push(hi);
                    }
                }
            }
        }
    }

    // View activation literals: strict at the step start, non-strict
    // (closure) at the step end.
    for (name, b) in &structure.view_lits {
        let (strict, relaxed) = &formulas[name];
        let t_sv = Formula::and(vec![
            instantiate_formula_n(spec, strict, Instance::Cur),
            instantiate_formula_n(spec, relaxed, Instance::Nxt),
        ]);
        trans.push(Formula::iff(Formula::bool_var(b), t_sv));
    }

    let depth = chart.count_sequence_operators() + 1;
    let mut global_reals: Vec<String> = static_vars(spec, &statics);
    global_reals.extend(structure.seqs.iter().map(|s| s.m_var.clone()));
    global_reals.extend(structure.pin_labels.iter().map(|p| crate::bmc::pin_var(p)));
    let mut state_bools = structure.state_bools.clone();
    state_bools.extend(structure.view_lits.values().cloned());
    state_reals.push(crate::bmc::CLOCK.to_string());
    state_reals.push(crate::bmc::DURATION.to_string());

    Ok((
        BmcProblem {
            init: Formula::and(init),
            trans: Formula::and(trans),
            final_: Formula::and(final_),
            state_bools,
            state_reals,
            global_bools: structure.global_bools.clone(),
            global_reals,
            mode: StepMode::Variable,
            meta: ProblemMeta {
                cars,
                statics,
                view_lits: structure.view_lits.clone(),
                delta: None,
                depth,
            },
        },
        depth,
    ))
}

// ---- sufficient mode ---------------------------------------------------

/// Per-step spline variables of one car.
pub mod spline_vars {
    pub const P0X: &str = "p0x";
    pub const P0Y: &str = "p0y";
    pub const P1X: &str = "p1x";
    pub const P1Y: &str = "p1y";
    /// Heading during the segment.
    pub const HDG: &str = "hdg";
    /// Lower bound on both legs' components along the interval direction.
    pub const VLO: &str = "vlo";
    /// Upper bound on the L1 norm of both legs.
    pub const L1: &str = "l1";
    /// Upper bound on the L-infinity norm of the leg difference.
    pub const DHAT: &str = "dhat";
    pub const BBXMIN_L: &str = "bbxmin_l";
    pub const BBXMIN_U: &str = "bbxmin_u";
    pub const BBXMAX_L: &str = "bbxmax_l";
    pub const BBXMAX_U: &str = "bbxmax_u";
    pub const BBYMIN_L: &str = "bbymin_l";
    pub const BBYMIN_U: &str = "bbymin_u";
    pub const BBYMAX_L: &str = "bbymax_l";
    pub const BBYMAX_U: &str = "bbymax_u";

    pub const ALL: [&str; 16] = [
        P0X, P0Y, P1X, P1Y, HDG, VLO, L1, DHAT, BBXMIN_L, BBXMIN_U, BBXMAX_L, BBXMAX_U, BBYMIN_L,
        BBYMIN_U, BBYMAX_L, BBYMAX_U,
    ];
}

/// Control point index within a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ControlPoint {
    P0,
    P1,
    /// Segment endpoint, the next step's p0.
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Upper,
    Lower,
}

fn flip(d: Direction) -> Direction {
    match d {
        Direction::Upper => Direction::Lower,
        Direction::Lower => Direction::Upper,
    }
}

fn bb_side(lower: &'static str, upper: &'static str, d: Direction) -> &'static str {
    match d {
        Direction::Lower => lower,
        Direction::Upper => upper,
    }
}

struct SuffExpander<'a> {
    spec: &'a Specification,
    /// 2/delta and 2*sqrt(2)/delta^2 as conservative rationals.
    speed_factor: Rat,
    accel_factor: Rat,
}

impl<'a> SuffExpander<'a> {
    /// Expand one attribute term at a control point with a required
    /// bound direction; errors when the needed side is not encoded.
    fn expand(
        &self,
        term: &AnchorTerm,
        cp: ControlPoint,
        dir: Direction,
    ) -> Result<Vec<(Rat, String)>, UnsupportedConstraint> {
        let one = Rat::from_integer(1.into());
        let sym = &term.symbol;
        if !self.spec.is_dynamic(sym) {
            return Ok(expand_static(term));
        }
        let pos = |field_x: &str| -> String {
            match cp {
                ControlPoint::P0 => svar(sym, field_x),
                ControlPoint::P1 => svar(sym, &field_x.replace("p0", "p1")),
                ControlPoint::End => primed(&svar(sym, field_x)),
            }
        };
        let unsupported = |what: &str| {
            Err(UnsupportedConstraint::new(format!(
                "attribute {} of {} needs a {} bound the spline encoding does not provide",
                term.attr, sym, what
            )))
        };
        Ok(match (term.attr, dir) {
            (Attr::X, _) => vec![(one, pos(spline_vars::P0X))],
            (Attr::Y, _) => vec![(one, pos(spline_vars::P0Y))],
            (Attr::XMin, dir) => vec![
                (one.clone(), pos(spline_vars::P0X)),
                (
                    one,
                    svar(
                        sym,
                        bb_side(spline_vars::BBXMIN_L, spline_vars::BBXMIN_U, dir),
                    ),
                ),
            ],
            (Attr::XMax, dir) => vec![
                (one.clone(), pos(spline_vars::P0X)),
                (
                    one,
                    svar(
                        sym,
                        bb_side(spline_vars::BBXMAX_L, spline_vars::BBXMAX_U, dir),
                    ),
                ),
            ],
            (Attr::YMin, dir) => vec![
                (one.clone(), pos(spline_vars::P0Y)),
                (
                    one,
                    svar(
                        sym,
                        bb_side(spline_vars::BBYMIN_L, spline_vars::BBYMIN_U, dir),
                    ),
                ),
            ],
            (Attr::YMax, dir) => vec![
                (one.clone(), pos(spline_vars::P0Y)),
                (
                    one,
                    svar(
                        sym,
                        bb_side(spline_vars::BBYMAX_L, spline_vars::BBYMAX_U, dir),
                    ),
                ),
            ],
            (Attr::BbXMin, dir) => vec![(
                one,
                svar(
                    sym,
                    bb_side(spline_vars::BBXMIN_L, spline_vars::BBXMIN_U, dir),
                ),
            )],
            (Attr::BbXMax, dir) => vec![(
                one,
                svar(
                    sym,
                    bb_side(spline_vars::BBXMAX_L, spline_vars::BBXMAX_U, dir),
                ),
            )],
            (Attr::BbYMin, dir) => vec![(
                one,
                svar(
                    sym,
                    bb_side(spline_vars::BBYMIN_L, spline_vars::BBYMIN_U, dir),
                ),
            )],
            (Attr::BbYMax, dir) => vec![(
                one,
                svar(
                    sym,
                    bb_side(spline_vars::BBYMAX_L, spline_vars::BBYMAX_U, dir),
                ),
            )],
            (Attr::V, Direction::Upper) => {
                vec![(self.speed_factor.clone(), svar(sym, spline_vars::L1))]
            }
            (Attr::V, Direction::Lower) => {
                vec![(self.speed_factor.clone(), svar(sym, spline_vars::VLO))]
            }
            (Attr::A, Direction::Upper) => {
                vec![(self.accel_factor.clone(), svar(sym, spline_vars::DHAT))]
            }
            (Attr::A, Direction::Lower) => return unsupported("lower"),
            (Attr::Theta, _) | (Attr::Delta, _) => {
                return Err(UnsupportedConstraint::new(format!(
                    "attribute {} is not supported in sufficient mode",
                    term.attr
                )))
            }
            (attr, _) => {
                return Err(UnsupportedConstraint::new(format!(
                    "attribute {} of dynamic object {}",
                    attr, sym
                )))
            }
        })
    }

    /// An atom comparing an object's own bounding-box extent against 0
    /// (e.g. `carI.ymin < carI.ymax` from an order chain) holds for every
    /// real vehicle; resolve it statically instead of demanding bound
    /// variables the encoding does not carry.
    fn extent_tautology(&self, atom: &crate::view::VAtom) -> Option<bool> {
        if atom.terms.len() != 2 || !atom.rhs.is_zero() {
            return None;
        }
        let (c0, t0) = &atom.terms[0];
        let (c1, t1) = &atom.terms[1];
        if t0.symbol != t1.symbol || !self.spec.is_dynamic(&t0.symbol) || *c0 != -c1.clone() {
            return None;
        }
        let pair = (t0.attr, t1.attr);
        let min_first = matches!(pair, (Attr::XMin, Attr::XMax) | (Attr::YMin, Attr::YMax));
        let max_first = matches!(pair, (Attr::XMax, Attr::XMin) | (Attr::YMax, Attr::YMin));
        if !min_first && !max_first {
            return None;
        }
        // LHS = c0 * (min - max) when min_first, else c0 * (max - min);
        // the extent (max - min) is strictly positive for every heading.
        let lhs_negative = (min_first && c0 > &Rat::zero()) || (max_first && c0 < &Rat::zero());
        Some(match atom.cmp {
            CmpOp::Lt | CmpOp::Le => lhs_negative,
            CmpOp::Gt | CmpOp::Ge => !lhs_negative,
            CmpOp::Eq => false,
        })
    }

    fn instantiate_atom(
        &self,
        atom: &crate::view::VAtom,
        cp: ControlPoint,
    ) -> Result<Formula, UnsupportedConstraint> {
        if let Some(truth) = self.extent_tautology(atom) {
            return Ok(if truth { Formula::True } else { Formula::False });
        }
        // Direction needed so the constraint is conservative for the
        // whole segment: upper-bound the LHS for <=-like atoms,
        // lower-bound it for >=-like atoms; equality needs exact terms.
        let dirs: &[Direction] = match atom.cmp {
            CmpOp::Lt | CmpOp::Le => &[Direction::Upper],
            CmpOp::Gt | CmpOp::Ge => &[Direction::Lower],
            CmpOp::Eq => &[Direction::Upper, Direction::Lower],
        };
        let mut parts = Vec::new();
        for dir in dirs {
            let mut terms = Vec::new();
            for (c, t) in &atom.terms {
                let d = if c > &Rat::zero() { *dir } else { flip(*dir) };
                for (c2, v) in self.expand(t, cp, d)? {
                    terms.push((c * &c2, v));
                }
            }
            let cmp = match (atom.cmp, dir) {
                (CmpOp::Eq, Direction::Upper) => CmpOp::Le,
                (CmpOp::Eq, Direction::Lower) => CmpOp::Ge,
                (c, _) => c,
            };
            parts.push(Formula::Atom(LinAtom {
                terms,
                cmp,
                rhs: atom.rhs.clone(),
            }));
        }
        Ok(Formula::and(parts))
    }

    fn instantiate_formula(
        &self,
        vf: &VFormula,
        cp: ControlPoint,
    ) -> Result<Formula, UnsupportedConstraint> {
        Ok(match vf {
            VFormula::True => Formula::True,
            VFormula::False => Formula::False,
            VFormula::And(kids) => Formula::and(
                kids.iter()
                    .map(|k| self.instantiate_formula(k, cp))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            VFormula::Or(kids) => Formula::or(
                kids.iter()
                    .map(|k| self.instantiate_formula(k, cp))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            VFormula::Atom(a) => self.instantiate_atom(a, cp)?,
        })
    }
}

/// Speed bands (m/s) for the curvature/lateral-acceleration linearization.
const SPEED_BANDS: [(f64, f64); 3] = [(1.0, 4.0), (3.0, 12.0), (9.0, 36.0)];

/// Build the fixed-step (sufficient-condition) BMC problem.
pub fn build_s_problem(
    chart: &BasicChart,
    spec: &Specification,
    bulletin: &BTreeMap<String, String>,
    cfg: &CheckConfig,
) -> Result<BmcProblem, UnsupportedConstraint> {
    let structure = encode_chart_structure(chart);
    let formulas = translate_chart_views(chart, spec, bulletin)?;
    let (cars, statics) = referenced_objects(spec, &formulas);
    let delta_f = rat_to_f64(&cfg.delta);

    let (t_init, t_trans, t_final) = encode_timing(&structure, StepMode::Fixed, &cfg.delta);

    let mut init = vec![structure.init_assembly.clone()];
    init.extend(structure.anchors.clone());
    init.extend(t_init);
    init.extend(static_constraints(spec, &statics));
    let mut trans = vec![structure.trans.clone()];
    trans.extend(t_trans);
    let mut final_ = vec![structure.final_.clone()];
    final_.extend(t_final);

    let two = Rat::from_integer(2.into());
    let expander = SuffExpander {
        spec,
        speed_factor: &two / &cfg.delta,
        // |p''| <= (2/delta^2) * sqrt(2) * dhat, sqrt(2) rounded up
        accel_factor: &two * rat_up(std::f64::consts::SQRT_2) / (&cfg.delta * &cfg.delta),
    };

    let mut state_reals = Vec::new();
    for sym in &cars {
        for field in spline_vars::ALL {
            state_reals.push(svar(sym, field));
        }
        car_dynamics(spec, sym, cfg, delta_f, &mut trans);
    }

    // View activation: strict on control points p0 and p1, non-strict
    // (closure) on the shared segment endpoint.
    for (name, b) in &structure.view_lits {
        let (strict, relaxed) = &formulas[name];
        let t_sv = Formula::and(vec![
            expander.instantiate_formula(strict, ControlPoint::P0)?,
            expander.instantiate_formula(strict, ControlPoint::P1)?,
            expander.instantiate_formula(relaxed, ControlPoint::End)?,
        ]);
        trans.push(Formula::iff(Formula::bool_var(b), t_sv));
    }

    let mut global_reals: Vec<String> = static_vars(spec, &statics);
    global_reals.extend(structure.seqs.iter().map(|s| s.m_var.clone()));
    global_reals.extend(structure.pin_labels.iter().map(|p| crate::bmc::pin_var(p)));
    let mut state_bools = structure.state_bools.clone();
    state_bools.extend(structure.view_lits.values().cloned());
    state_reals.push(crate::bmc::CLOCK.to_string());
    state_reals.push(crate::bmc::DURATION.to_string());

    Ok(BmcProblem {
        init: Formula::and(init),
        trans: Formula::and(trans),
        final_: Formula::and(final_),
        state_bools,
        state_reals,
        global_bools: structure.global_bools.clone(),
        global_reals,
        mode: StepMode::Fixed,
        meta: ProblemMeta {
            cars,
            statics,
            view_lits: structure.view_lits.clone(),
            delta: Some(cfg.delta.clone()),
            depth: cfg.depth_s,
        },
    })
}

/// Single-track-model constraints for one car's spline variables:
/// C1 continuity, leg envelopes, the heading-interval disjunction with
/// safe bounding-box bounds, and the speed-band disjunction keeping
/// curvature and lateral acceleration within bounds.
fn car_dynamics(
    spec: &Specification,
    sym: &str,
    cfg: &CheckConfig,
    delta_f: f64,
    trans: &mut Vec<Formula>,
) {
    let params = spec.params_for(sym);
    let one = Rat::from_integer(1.into());
    let two = Rat::from_integer(2.into());

    let p0x = svar(sym, spline_vars::P0X);
    let p0y = svar(sym, spline_vars::P0Y);
    let p1x = svar(sym, spline_vars::P1X);
    let p1y = svar(sym, spline_vars::P1Y);
    let hdg = svar(sym, spline_vars::HDG);
    let vlo = svar(sym, spline_vars::VLO);
    let l1 = svar(sym, spline_vars::L1);
    let dhat = svar(sym, spline_vars::DHAT);

    // C1 continuity: p1' = 2*p0' - p1 (per axis).
    for (p1v, p0v) in [(&p1x, &p0x), (&p1y, &p0y)] {
        trans.push(Formula::Atom(LinAtom {
            terms: vec![
                (one.clone(), primed(p1v)),
                ((-&two).clone(), primed(p0v)),
                (one.clone(), p1v.clone()),
            ],
            cmp: CmpOp::Eq,
            rhs: Rat::zero(),
        }));
    }

    // Legs of the segment: a = p1 - p0, b = p0' - p1 (components).
    let leg_a = |axis: char| -> Vec<(Rat, String)> {
        let (p1v, p0v) = if axis == 'x' {
            (&p1x, &p0x)
        } else {
            (&p1y, &p0y)
        };
        vec![(one.clone(), p1v.clone()), ((-&one).clone(), p0v.clone())]
    };
    let leg_b = |axis: char| -> Vec<(Rat, String)> {
        let (p1v, p0v) = if axis == 'x' {
            (&p1x, &p0x)
        } else {
            (&p1y, &p0y)
        };
        vec![(one.clone(), primed(p0v)), ((-&one).clone(), p1v.clone())]
    };

    // dhat >= |(b - a)_x|, |(b - a)_y|  with b - a = p0' - 2 p1 + p0.
    for axis in ['x', 'y'] {
        let (p1v, p0v) = if axis == 'x' {
            (&p1x, &p0x)
        } else {
            (&p1y, &p0y)
        };
        for sign in [1i64, -1] {
            let s = Rat::from_integer(sign.into());
            trans.push(Formula::Atom(LinAtom {
                terms: vec![
                    (one.clone(), dhat.clone()),
                    ((-&s) * &one, primed(p0v)),
                    (&s * &two, p1v.clone()),
                    ((-&s) * &one, p0v.clone()),
                ],
                cmp: CmpOp::Ge,
                rhs: Rat::zero(),
            }));
        }
    }

    // l1 >= |leg_x| + |leg_y| for both legs (four sign combinations each).
    for leg in [&leg_a as &dyn Fn(char) -> Vec<(Rat, String)>, &leg_b] {
        for sx in [1i64, -1] {
            for sy in [1i64, -1] {
                let mut terms = vec![(one.clone(), l1.clone())];
                for (c, v) in leg('x') {
                    terms.push((Rat::from_integer((-sx).into()) * c, v));
                }
                for (c, v) in leg('y') {
                    terms.push((Rat::from_integer((-sy).into()) * c, v));
                }
                trans.push(Formula::Atom(LinAtom {
                    terms,
                    cmp: CmpOp::Ge,
                    rhs: Rat::zero(),
                }));
            }
        }
    }

    // Heading-interval disjunction.
    let n = cfg.intervals.max(2);
    let mut interval_disjuncts = Vec::new();
    for k in 0..n {
        let lo = -std::f64::consts::PI + (k as f64) * 2.0 * std::f64::consts::PI / (n as f64);
        let hi = -std::f64::consts::PI + ((k + 1) as f64) * 2.0 * std::f64::consts::PI / (n as f64);
        let mut parts = Vec::new();
        // heading variable within the interval (outward-rounded)
        parts.push(Formula::Atom(LinAtom::var_cmp_const(
            &hdg,
            CmpOp::Ge,
            rat_down(lo - cfg.epsilon),
        )));
        parts.push(Formula::Atom(LinAtom::var_cmp_const(
            &hdg,
            CmpOp::Le,
            rat_up(hi + cfg.epsilon),
        )));
        // legs within the angular sector: w·n_lo >= 0 and w·n_hi <= 0
        // with n_t = (-sin t, cos t)
        for leg in [&leg_a as &dyn Fn(char) -> Vec<(Rat, String)>, &leg_b] {
            for (ang, cmp) in [(lo, CmpOp::Ge), (hi, CmpOp::Le)] {
                let nx = rat_near(-ang.sin());
                let ny = rat_near(ang.cos());
                let mut terms = Vec::new();
                for (c, v) in leg('x') {
                    terms.push((&nx * &c, v));
                }
                for (c, v) in leg('y') {
                    terms.push((&ny * &c, v));
                }
                parts.push(Formula::Atom(LinAtom {
                    terms,
                    cmp,
                    rhs: Rat::zero(),
                }));
            }
            // vlo <= leg · u_mid
            let mid = (lo + hi) / 2.0;
            let ux = rat_near(mid.cos());
            let uy = rat_near(mid.sin());
            let mut terms = vec![((-&one).clone(), vlo.clone())];
            for (c, v) in leg('x') {
                terms.push((&ux * &c, v));
            }
            for (c, v) in leg('y') {
                terms.push((&uy * &c, v));
            }
            parts.push(Formula::Atom(LinAtom {
                terms,
                cmp: CmpOp::Ge,
                rhs: Rat::zero(),
            }));
        }
        // safe bounding-box bounds for this interval: the lower bound
        // variable sits below the infimum, the upper above the supremum
        let bounds = bbox_bounds((lo, hi), params, cfg.epsilon);
        for (attr, l_field, u_field) in [
            (Attr::BbXMin, spline_vars::BBXMIN_L, spline_vars::BBXMIN_U),
            (Attr::BbXMax, spline_vars::BBXMAX_L, spline_vars::BBXMAX_U),
            (Attr::BbYMin, spline_vars::BBYMIN_L, spline_vars::BBYMIN_U),
            (Attr::BbYMax, spline_vars::BBYMAX_L, spline_vars::BBYMAX_U),
        ] {
            let (inf, sup) = bounds[&attr];
            parts.push(Formula::Atom(LinAtom::var_cmp_const(
                &svar(sym, l_field),
                CmpOp::Le,
                rat_down(inf),
            )));
            parts.push(Formula::Atom(LinAtom::var_cmp_const(
                &svar(sym, u_field),
                CmpOp::Ge,
                rat_up(sup),
            )));
        }
        interval_disjuncts.push(Formula::and(parts));
    }
    trans.push(Formula::or(interval_disjuncts));

    // Mode disjunction: a = 0, b = 0, or a speed band with caps derived
    // from the curvature and lateral-acceleration bounds.
    let kappa_max = params.curvature_max();
    let zero_leg = |leg: &dyn Fn(char) -> Vec<(Rat, String)>| -> Formula {
        Formula::and(
            ['x', 'y']
                .iter()
                .map(|axis| {
                    Formula::Atom(LinAtom {
                        terms: leg(*axis),
                        cmp: CmpOp::Eq,
                        rhs: Rat::zero(),
                    })
                })
                .collect(),
        )
    };
    let mut modes = vec![zero_leg(&leg_a), zero_leg(&leg_b)];
    for (v_lo, v_hi) in SPEED_BANDS {
        let ell = v_lo * delta_f / 2.0;
        let a_hi = 1.5 * v_hi * delta_f / 2.0;
        // |a x b| <= dhat * l1 <= dhat * a_hi;  |w(s)| >= vlo >= ell
        // kappa <= dhat*a_hi / (2 ell^3) <= kappa_max
        // |v^2 kappa| <= (2/delta^2) dhat*a_hi / ell <= a_lat_max
        let cap_kappa = 2.0 * kappa_max * ell * ell * ell / a_hi;
        let cap_lat = params.a_lat_max * delta_f * delta_f * ell / (2.0 * a_hi);
        let cap = 0.999 * cap_kappa.min(cap_lat);
        modes.push(Formula::and(vec![
            Formula::Atom(LinAtom::var_cmp_const(&vlo, CmpOp::Ge, rat_up(ell))),
            Formula::Atom(LinAtom::var_cmp_const(&l1, CmpOp::Le, rat_down(a_hi))),
            Formula::Atom(LinAtom::var_cmp_const(&dhat, CmpOp::Le, rat_down(cap))),
        ]));
    }
    trans.push(Formula::or(modes));
}

// ---- the procedures ----------------------------------------------------

/// Necessary check: unroll at the automatically computed depth and solve.
/// `unsat` here proves the chart unsatisfiable in the world model.
pub fn checksat_n(
    chart: &BasicChart,
    spec: &Specification,
    bulletin: &BTreeMap<String, String>,
    cfg: &CheckConfig,
) -> Verdict {
    let (problem, depth) = match build_n_problem(chart, spec, bulletin, cfg) {
        Ok(p) => p,
        Err(e) => {
            return Verdict {
                status: Status::Unknown,
                model: None,
                stats: Default::default(),
                diagnostic: Some(e.to_string()),
            }
        }
    };
    let unrolled = unroll(&problem, depth);
    let script = smt::emit_script(&unrolled.formula, smt::EmitOptions { get_model: false });
    smt::solve(&script, &cfg.solver)
}

/// Interpret a necessary-mode model as a piecewise-linear grid trace:
/// per-point attribute values with times from the clock variables.
/// Bounding-box coordinates follow the model's relaxed offset variables.
pub fn necessary_model_trajectory(
    model: &crate::formula::Model,
    problem: &BmcProblem,
    depth: usize,
) -> crate::oracle::SampledTrajectory {
    use crate::formula::instanced;
    use crate::oracle::{SampledTrajectory, TrajStyle, Valuation};

    let mut times = Vec::new();
    for k in 0..=depth {
        let t = model
            .get_real(&instanced(crate::bmc::CLOCK, k))
            .cloned()
            .unwrap_or_else(|_| Rat::from_integer((k as i64).into()));
        times.push(t);
    }
    // Guard against a clock that was irrelevant to the formula.
    for k in 1..times.len() {
        if times[k] <= times[k - 1] {
            let bump = &times[k - 1] + Rat::from_integer(1.into());
            times[k] = bump;
        }
    }
    let mut statics_val: Vec<(AnchorTerm, Rat)> = Vec::new();
    for sym in &problem.meta.statics {
        let mut base = BTreeMap::new();
        for attr in [Attr::Start, Attr::Length, Attr::Width, Attr::Offset] {
            if let Ok(v) = model.get_real(&static_var(sym, attr)) {
                base.insert(attr, v.clone());
            }
        }
        for attr in [Attr::Start, Attr::Length, Attr::Width, Attr::Offset] {
            if let Some(v) = base.get(&attr) {
                statics_val.push((AnchorTerm::new(sym, attr), v.clone()));
            }
        }
        if let (Some(s), Some(l)) = (base.get(&Attr::Start), base.get(&Attr::Length)) {
            statics_val.push((AnchorTerm::new(sym, Attr::XMin), s.clone()));
            statics_val.push((AnchorTerm::new(sym, Attr::XMax), s + l));
        }
        if let (Some(o), Some(w)) = (base.get(&Attr::Offset), base.get(&Attr::Width)) {
            statics_val.push((AnchorTerm::new(sym, Attr::YMin), o.clone()));
            statics_val.push((AnchorTerm::new(sym, Attr::YMax), o + w));
        }
    }
    let mut frames = Vec::new();
    for k in 0..=depth {
        let mut val = Valuation::new();
        for (t, v) in &statics_val {
            val.insert(t.clone(), v.clone());
        }
        for sym in &problem.meta.cars {
            let get = |attr: Attr| -> Option<Rat> {
                model
                    .get_real(&instanced(&nvar(sym, attr), k))
                    .cloned()
                    .ok()
            };
            let mut base = BTreeMap::new();
            for attr in [
                Attr::X,
                Attr::Y,
                Attr::V,
                Attr::Theta,
                Attr::A,
                Attr::Delta,
                Attr::BbXMin,
                Attr::BbXMax,
                Attr::BbYMin,
                Attr::BbYMax,
            ] {
                if let Some(v) = get(attr) {
                    base.insert(attr, v);
                }
            }
            for (attr, v) in &base {
                val.insert(AnchorTerm::new(sym, *attr), v.clone());
            }
            let combos = [
                (Attr::XMin, Attr::X, Attr::BbXMin),
                (Attr::XMax, Attr::X, Attr::BbXMax),
                (Attr::YMin, Attr::Y, Attr::BbYMin),
                (Attr::YMax, Attr::Y, Attr::BbYMax),
            ];
            for (derived, pos, off) in combos {
                if let (Some(p), Some(o)) = (base.get(&pos), base.get(&off)) {
                    val.insert(AnchorTerm::new(sym, derived), p + o);
                }
            }
        }
        frames.push(val);
    }
    SampledTrajectory {
        times,
        frames,
        style: TrajStyle::PiecewiseLinear,
    }
}

/// Necessary check variant that also returns the model and problem,
/// for tests that cross-validate satisfying assignments with the
/// reference semantics.
pub fn checksat_n_with_model(
    chart: &BasicChart,
    spec: &Specification,
    bulletin: &BTreeMap<String, String>,
    cfg: &CheckConfig,
) -> (Verdict, Option<(BmcProblem, usize)>) {
    let (problem, depth) = match build_n_problem(chart, spec, bulletin, cfg) {
        Ok(p) => p,
        Err(e) => {
            return (
                Verdict {
                    status: Status::Unknown,
                    model: None,
                    stats: Default::default(),
                    diagnostic: Some(e.to_string()),
                },
                None,
            )
        }
    };
    let unrolled = unroll(&problem, depth);
    let script = smt::emit_script(&unrolled.formula, smt::EmitOptions { get_model: true });
    let verdict = smt::solve(&script, &cfg.solver);
    (verdict, Some((problem, depth)))
}

/// Sufficient check: fixed-step spline problem at the configured depth.
/// `sat` here proves the chart satisfiable; the model is retained for
/// witness extraction.
pub fn checksat_s(
    chart: &BasicChart,
    spec: &Specification,
    bulletin: &BTreeMap<String, String>,
    cfg: &CheckConfig,
) -> (Verdict, Option<BmcProblem>) {
    let problem = match build_s_problem(chart, spec, bulletin, cfg) {
        Ok(p) => p,
        Err(e) => {
            return (
                Verdict {
                    status: Status::Unknown,
                    model: None,
                    stats: Default::default(),
                    diagnostic: Some(e.to_string()),
                },
                None,
            )
        }
    };
    let unrolled = unroll(&problem, cfg.depth_s);
    let script = smt::emit_script(&unrolled.formula, smt::EmitOptions { get_model: true });
    let verdict = smt::solve(&script, &cfg.solver);
    (verdict, Some(problem))
}
