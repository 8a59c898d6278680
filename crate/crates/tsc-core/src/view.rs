//! Spatial views: frame hierarchies with axis-order chains, distance
//! arrows, attribute constraints, and quantified placement boxes.

use crate::model::Attr;
use num_rational::BigRational;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// Exact negation (`!=` is represented upstream as a split).
    pub fn negate(&self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Eq => panic!("equality negation requires a case split"),
        }
    }

    /// Topological closure: strict comparators weaken, others stay.
    pub fn closure(&self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Le,
            CmpOp::Gt => CmpOp::Ge,
            other => *other,
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Gt)
    }

    pub fn eval(&self, lhs: &BigRational, rhs: &BigRational) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `symbol.attr`, an anchor or attribute reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnchorTerm {
    pub symbol: String,
    pub attr: Attr,
}

impl AnchorTerm {
    pub fn new(symbol: &str, attr: Attr) -> Self {
        AnchorTerm {
            symbol: symbol.to_string(),
            attr,
        }
    }
}

impl fmt::Display for AnchorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.symbol, self.attr)
    }
}

/// Chain `a0 r0 a1 r1 a2 ...` along one axis; relations in {<, <=, =}.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderChain {
    pub axis: Axis,
    pub anchors: Vec<AnchorTerm>,
    pub relations: Vec<CmpOp>,
}

/// `from -> to` distance along an axis: (to - from) cmp bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DistArrow {
    pub axis: Axis,
    pub from: AnchorTerm,
    pub to: AnchorTerm,
    pub cmp: CmpOp,
    pub bound: BigRational,
}

/// Linear attribute atom: sum of coefficient·term cmp constant (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct VAtom {
    pub terms: Vec<(BigRational, AnchorTerm)>,
    pub cmp: CmpOp,
    pub rhs: BigRational,
}

impl VAtom {
    pub fn closure(&self) -> VAtom {
        VAtom {
            terms: self.terms.clone(),
            cmp: self.cmp.closure(),
            rhs: self.rhs.clone(),
        }
    }

    /// Symbols occurring in the atom.
    pub fn symbols(&self, out: &mut BTreeSet<String>) {
        for (_, t) in &self.terms {
            out.insert(t.symbol.clone());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Top,
    /// Existential placement.
    Somewhere,
    /// Negated placement.
    Nowhere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub kind: FrameKind,
    pub constrain_x: bool,
    pub constrain_y: bool,
    /// Locally quantified symbols: (symbol, object type).
    pub binders: Vec<(String, String)>,
    pub orders: Vec<OrderChain>,
    pub dists: Vec<DistArrow>,
    pub constraints: Vec<VAtom>,
    pub children: Vec<Frame>,
}

impl Frame {
    pub fn top() -> Self {
        Frame {
            kind: FrameKind::Top,
            constrain_x: true,
            constrain_y: true,
            binders: Vec::new(),
            orders: Vec::new(),
            dists: Vec::new(),
            constraints: Vec::new(),
            children: Vec::new(),
        }
    }

    /// Symbols mentioned anywhere in this frame or below.
    pub fn symbols(&self, out: &mut BTreeSet<String>) {
        for chain in &self.orders {
            for a in &chain.anchors {
                out.insert(a.symbol.clone());
            }
        }
        for d in &self.dists {
            out.insert(d.from.symbol.clone());
            out.insert(d.to.symbol.clone());
        }
        for c in &self.constraints {
            c.symbols(out);
        }
        for ch in &self.children {
            ch.symbols(out);
        }
    }

    /// Symbols bound by binders in this frame or below.
    pub fn bound_symbols(&self, out: &mut BTreeSet<String>) {
        for (s, _) in &self.binders {
            out.insert(s.clone());
        }
        for ch in &self.children {
            ch.bound_symbols(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialView {
    pub name: String,
    pub root: Frame,
}

impl SpatialView {
    /// Free (non-quantified) symbols of the view.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut all = BTreeSet::new();
        self.root.symbols(&mut all);
        let mut bound = BTreeSet::new();
        self.root.bound_symbols(&mut bound);
        all.difference(&bound).cloned().collect()
    }
}
