//! Brute-force reference implementation of the chart semantics over
//! finitely represented trajectories. Serves as ground truth for testing
//! the BMC encodings; evaluates spatial views directly on the frame
//! structure, independent of the translation pipeline.

use crate::chart::{BasicChart, RequirementTsc};
use crate::diag::DomainError;
use crate::model::{base_attribute, derived_attribute, Attr, ObjectState};
use crate::spec::Specification;
use crate::view::{AnchorTerm, Axis, CmpOp, Frame, FrameKind, SpatialView};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

pub type Valuation = BTreeMap<AnchorTerm, BigRational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajStyle {
    /// One valuation per piece; attribute values jump at breakpoints.
    PiecewiseConstant,
    /// One valuation per breakpoint; linear interpolation in between.
    PiecewiseLinear,
}

/// A finitely represented trajectory on a breakpoint grid.
#[derive(Debug, Clone)]
pub struct SampledTrajectory {
    /// Strictly increasing, starting at 0.
    pub times: Vec<BigRational>,
    /// Per-piece (constant style) or per-point (linear style) valuations.
    pub frames: Vec<Valuation>,
    pub style: TrajStyle,
}

impl SampledTrajectory {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.times.is_empty() || !self.times[0].is_zero() {
            return Err(DomainError::new("breakpoints must start at 0"));
        }
        for w in self.times.windows(2) {
            if w[0] >= w[1] {
                return Err(DomainError::new("breakpoints must strictly increase"));
            }
        }
        let expected = match self.style {
            TrajStyle::PiecewiseConstant => self.times.len() - 1,
            TrajStyle::PiecewiseLinear => self.times.len(),
        };
        if self.frames.len() != expected {
            return Err(DomainError::new("frame count does not match the grid"));
        }
        Ok(())
    }

    pub fn pieces(&self) -> usize {
        self.times.len() - 1
    }
}

/// Evaluation context: the specification supplies views, the pool, and
/// the bulletin symbols excluded from forbid-quantification.
pub struct OracleCtx<'a> {
    pub spec: &'a Specification,
    pub excluded: BTreeSet<String>,
}

impl<'a> OracleCtx<'a> {
    pub fn new(spec: &'a Specification, excluded: BTreeSet<String>) -> Self {
        OracleCtx { spec, excluded }
    }

    fn view(&self, name: &str) -> Result<&'a SpatialView, DomainError> {
        self.spec
            .view(name)
            .ok_or_else(|| DomainError::new(format!("unknown view {}", name)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AtomMode {
    Exact,
    /// Closure semantics for the limit point of a half-open interval.
    Closure,
}

/// Direct frame-semantics evaluation of a spatial view on one valuation.
pub fn eval_view(
    ctx: &OracleCtx,
    view: &SpatialView,
    val: &Valuation,
) -> Result<bool, DomainError> {
    let mut binding = BTreeMap::new();
    eval_frame(ctx, &view.root, val, &mut binding, true, AtomMode::Exact)
}

fn eval_view_mode(
    ctx: &OracleCtx,
    view: &SpatialView,
    val: &Valuation,
    mode: AtomMode,
) -> Result<bool, DomainError> {
    let mut binding = BTreeMap::new();
    eval_frame(ctx, &view.root, val, &mut binding, true, mode)
}

fn lookup(
    val: &Valuation,
    term: &AnchorTerm,
    binding: &BTreeMap<String, String>,
) -> Result<BigRational, DomainError> {
    let resolved = match binding.get(&term.symbol) {
        Some(obj) => AnchorTerm {
            symbol: obj.clone(),
            attr: term.attr,
        },
        None => term.clone(),
    };
    val.get(&resolved)
        .cloned()
        .ok_or_else(|| DomainError::new(format!("unvalued term {}", resolved)))
}

fn eval_cmp(
    cmp: CmpOp,
    lhs: &BigRational,
    rhs: &BigRational,
    positive: bool,
    mode: AtomMode,
) -> bool {
    let effective = match (mode, positive) {
        (AtomMode::Exact, _) => cmp,
        // closure of the positive literal
        (AtomMode::Closure, true) => cmp.closure(),
        // interior of the literal under negation
        (AtomMode::Closure, false) => match cmp {
            CmpOp::Le => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Gt,
            CmpOp::Eq => return false,
            other => other,
        },
    };
    effective.eval(lhs, rhs)
}

fn eval_frame(
    ctx: &OracleCtx,
    frame: &Frame,
    val: &Valuation,
    binding: &mut BTreeMap<String, String>,
    positive: bool,
    mode: AtomMode,
) -> Result<bool, DomainError> {
    let mut result = true;
    for chain in &frame.orders {
        let active = match chain.axis {
            Axis::X => frame.constrain_x,
            Axis::Y => frame.constrain_y,
        };
        if !active {
            continue;
        }
        for (i, rel) in chain.relations.iter().enumerate() {
            let a = lookup(val, &chain.anchors[i], binding)?;
            let b = lookup(val, &chain.anchors[i + 1], binding)?;
            let diff = &a - &b;
            result &= eval_cmp(*rel, &diff, &BigRational::zero(), positive, mode);
        }
    }
    for d in &frame.dists {
        let active = match d.axis {
            Axis::X => frame.constrain_x,
            Axis::Y => frame.constrain_y,
        };
        if !active {
            continue;
        }
        let from = lookup(val, &d.from, binding)?;
        let to = lookup(val, &d.to, binding)?;
        result &= eval_cmp(d.cmp, &(&to - &from), &d.bound, positive, mode);
    }
    for atom in &frame.constraints {
        let mut lhs = BigRational::zero();
        for (c, t) in &atom.terms {
            lhs += c * lookup(val, t, binding)?;
        }
        result &= eval_cmp(atom.cmp, &lhs, &atom.rhs, positive, mode);
    }
    for child in &frame.children {
        result &= eval_child(ctx, child, val, binding, positive, mode)?;
    }
    Ok(result)
}

fn eval_child(
    ctx: &OracleCtx,
    child: &Frame,
    val: &Valuation,
    binding: &mut BTreeMap<String, String>,
    positive: bool,
    mode: AtomMode,
) -> Result<bool, DomainError> {
    let pool = ctx.spec.pool();
    match (&child.kind, child.binders.as_slice()) {
        (FrameKind::Somewhere, []) => eval_frame(ctx, child, val, binding, positive, mode),
        (FrameKind::Nowhere, []) => Ok(!eval_frame(ctx, child, val, binding, !positive, mode)?),
        (FrameKind::Somewhere, [(sym, ty)]) => {
            let mut any = false;
            for (obj, obj_ty) in &pool {
                if !ctx.spec.world.is_subtype(obj_ty, ty) {
                    continue;
                }
                binding.insert(sym.clone(), obj.clone());
                let r = eval_frame(ctx, child, val, binding, positive, mode);
                binding.remove(sym);
                any |= r?;
            }
            Ok(any)
        }
        (FrameKind::Nowhere, [(sym, ty)]) => {
            let bound: BTreeSet<String> = binding.values().cloned().collect();
            let mut none = true;
            for (obj, obj_ty) in &pool {
                if !ctx.spec.world.is_subtype(obj_ty, ty)
                    || bound.contains(obj)
                    || ctx.excluded.contains(obj)
                {
                    continue;
                }
                binding.insert(sym.clone(), obj.clone());
                let r = eval_frame(ctx, child, val, binding, !positive, mode);
                binding.remove(sym);
                none &= !r?;
            }
            Ok(none)
        }
        _ => Err(DomainError::new("unsupported frame shape")),
    }
}

/// Does the view hold throughout piece `k` = [t_k, t_{k+1})?
pub fn view_holds_on_piece(
    ctx: &OracleCtx,
    view: &SpatialView,
    traj: &SampledTrajectory,
    piece: usize,
) -> Result<bool, DomainError> {
    match traj.style {
        TrajStyle::PiecewiseConstant => {
            eval_view_mode(ctx, view, &traj.frames[piece], AtomMode::Exact)
        }
        TrajStyle::PiecewiseLinear => {
            Ok(
                eval_view_mode(ctx, view, &traj.frames[piece], AtomMode::Exact)?
                    && eval_view_mode(ctx, view, &traj.frames[piece + 1], AtomMode::Closure)?,
            )
        }
    }
}

/// Chart satisfaction on the grid interval [b, e] with given pin values
/// (pin values are grid indices). The split point of every sequence is
/// searched over the grid.
pub fn check_chart(
    ctx: &OracleCtx,
    chart: &BasicChart,
    traj: &SampledTrajectory,
    b: usize,
    e: usize,
    pins: &BTreeMap<String, usize>,
) -> Result<bool, DomainError> {
    if b > e || e >= traj.times.len() {
        return Err(DomainError::new("interval outside the grid"));
    }
    match chart {
        BasicChart::Empty => Ok(b < e),
        BasicChart::Invariant(name) => {
            if b >= e {
                return Ok(false);
            }
            let view = ctx.view(name)?;
            for piece in b..e {
                if !view_holds_on_piece(ctx, view, traj, piece)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        BasicChart::Seq { left, right, pin } => {
            let candidates: Vec<usize> = match pin {
                Some(p) => {
                    let m = *pins
                        .get(p)
                        .ok_or_else(|| DomainError::new(format!("pin {} unassigned", p)))?;
                    if m < b || m > e {
                        return Ok(false);
                    }
                    vec![m]
                }
                None => (b..=e).collect(),
            };
            for m in candidates {
                if check_chart(ctx, left, traj, b, m, pins)?
                    && check_chart(ctx, right, traj, m, e, pins)?
                {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        BasicChart::Choice(l, r) => {
            Ok(check_chart(ctx, l, traj, b, e, pins)? || check_chart(ctx, r, traj, b, e, pins)?)
        }
        BasicChart::Concurrency(rows) => {
            for row in rows {
                if !check_chart(ctx, row, traj, b, e, pins)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        BasicChart::Hourglass {
            body, constraint, ..
        } => {
            let d = &traj.times[e] - &traj.times[b];
            for (cmp, bound) in constraint {
                if !cmp.eval(&d, bound) {
                    return Ok(false);
                }
            }
            check_chart(ctx, body, traj, b, e, pins)
        }
        BasicChart::PinSeq { body, pins: labels } => {
            let mut prev = b;
            for p in labels {
                let tp = *pins
                    .get(p)
                    .ok_or_else(|| DomainError::new(format!("pin {} unassigned", p)))?;
                if tp < prev {
                    return Ok(false);
                }
                prev = tp;
            }
            if prev > e {
                return Ok(false);
            }
            check_chart(ctx, body, traj, b, e, pins)
        }
    }
}

/// Existential satisfaction on [b, e]: search pin values over the grid.
pub fn chart_satisfiable_on(
    ctx: &OracleCtx,
    chart: &BasicChart,
    traj: &SampledTrajectory,
    b: usize,
    e: usize,
) -> Result<bool, DomainError> {
    let mut labels = BTreeSet::new();
    chart.pins(&mut labels);
    let labels: Vec<String> = labels.into_iter().collect();
    let grid = traj.times.len();
    let mut assignment = vec![0usize; labels.len()];
    loop {
        let pins: BTreeMap<String, usize> = labels
            .iter()
            .cloned()
            .zip(assignment.iter().copied())
            .collect();
        if check_chart(ctx, chart, traj, b, e, &pins)? {
            return Ok(true);
        }
        // next assignment
        let mut k = 0;
        loop {
            if k == labels.len() {
                return Ok(false);
            }
            assignment[k] += 1;
            if assignment[k] < grid {
                break;
            }
            assignment[k] = 0;
            k += 1;
        }
    }
}

/// Requirement-TSC satisfaction per the grid-restricted semantics:
/// for all grid triples b <= m <= e, if some pin assignment satisfies
/// H on [b,m] and F on [m,e], then some (independent) pin assignment
/// satisfies C on [m,e].
pub fn check_tsc(
    ctx: &OracleCtx,
    tsc: &RequirementTsc,
    traj: &SampledTrajectory,
) -> Result<bool, DomainError> {
    let n = traj.times.len();
    for b in 0..n {
        for m in b..n {
            for e in m..n {
                let premise = pre_chart_holds(ctx, tsc, traj, b, m, e)?;
                if premise && !chart_satisfiable_on(ctx, &tsc.consequence, traj, m, e)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn pre_chart_holds(
    ctx: &OracleCtx,
    tsc: &RequirementTsc,
    traj: &SampledTrajectory,
    b: usize,
    m: usize,
    e: usize,
) -> Result<bool, DomainError> {
    // Pins shared between history and future.
    let mut labels = BTreeSet::new();
    tsc.history.pins(&mut labels);
    tsc.future.pins(&mut labels);
    let labels: Vec<String> = labels.into_iter().collect();
    let grid = traj.times.len();
    let mut assignment = vec![0usize; labels.len()];
    loop {
        let pins: BTreeMap<String, usize> = labels
            .iter()
            .cloned()
            .zip(assignment.iter().copied())
            .collect();
        if check_chart(ctx, &tsc.history, traj, b, m, &pins)?
            && check_chart(ctx, &tsc.future, traj, m, e, &pins)?
        {
            return Ok(true);
        }
        let mut k = 0;
        loop {
            if k == labels.len() {
                return Ok(false);
            }
            assignment[k] += 1;
            if assignment[k] < grid {
                break;
            }
            assignment[k] = 0;
            k += 1;
        }
        if labels.is_empty() {
            return Ok(false);
        }
    }
}

/// Build a valuation from concrete object states, with derived attributes
/// computed from the bounding-box geometry.
pub fn valuation_from_states(
    spec: &Specification,
    states: &[(String, ObjectState)],
) -> Result<Valuation, DomainError> {
    let mut val = Valuation::new();
    for (name, state) in states {
        let params = spec.params_for(name);
        let attrs: &[Attr] = match state {
            ObjectState::Car(_) => &[
                Attr::X,
                Attr::Y,
                Attr::V,
                Attr::Theta,
                Attr::A,
                Attr::Delta,
                Attr::XMin,
                Attr::XMax,
                Attr::YMin,
                Attr::YMax,
                Attr::BbXMin,
                Attr::BbXMax,
                Attr::BbYMin,
                Attr::BbYMax,
            ],
            ObjectState::Lane(_) => &[
                Attr::Start,
                Attr::Length,
                Attr::Width,
                Attr::Offset,
                Attr::XMin,
                Attr::XMax,
                Attr::YMin,
                Attr::YMax,
            ],
        };
        for attr in attrs {
            let value = match base_attribute(state, *attr) {
                Some(v) => v,
                None => derived_attribute(state, *attr, params)?,
            };
            let r = BigRational::from_float(value)
                .ok_or_else(|| DomainError::new("non-finite attribute value"))?;
            val.insert(AnchorTerm::new(name, *attr), r);
        }
    }
    Ok(val)
}
