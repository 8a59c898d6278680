//! Translation of spatial views into quantifier-free formulas over
//! attribute terms. Local quantifiers expand over the declared object
//! pool (closed world): `exists` becomes a disjunction, `forbid`/nowhere
//! a conjunction of negated bodies over objects not already bound.

use crate::diag::DomainError;
use crate::model::WorldModel;
use crate::view::{AnchorTerm, Axis, CmpOp, Frame, FrameKind, SpatialView, VAtom};
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// Quantifier-free, negation-free formula over attribute terms.
#[derive(Debug, Clone, PartialEq)]
pub enum VFormula {
    True,
    False,
    Atom(VAtom),
    And(Vec<VFormula>),
    Or(Vec<VFormula>),
}

impl VFormula {
    pub fn and(fs: Vec<VFormula>) -> VFormula {
        let mut flat = Vec::new();
        for f in fs {
            match f {
                VFormula::True => {}
                VFormula::False => return VFormula::False,
                VFormula::And(kids) => flat.extend(kids),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => VFormula::True,
            1 => flat.pop().unwrap(),
            _ => VFormula::And(flat),
        }
    }

    pub fn or(fs: Vec<VFormula>) -> VFormula {
        let mut flat = Vec::new();
        for f in fs {
            match f {
                VFormula::False => {}
                VFormula::True => return VFormula::True,
                VFormula::Or(kids) => flat.extend(kids),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => VFormula::False,
            1 => flat.pop().unwrap(),
            _ => VFormula::Or(flat),
        }
    }

    /// Exact negation; stays negation-free by flipping comparators
    /// (equality splits into a strict disjunction).
    pub fn negate(&self) -> VFormula {
        match self {
            VFormula::True => VFormula::False,
            VFormula::False => VFormula::True,
            VFormula::And(kids) => VFormula::or(kids.iter().map(|k| k.negate()).collect()),
            VFormula::Or(kids) => VFormula::and(kids.iter().map(|k| k.negate()).collect()),
            VFormula::Atom(a) => match a.cmp {
                CmpOp::Eq => VFormula::or(vec![
                    VFormula::Atom(VAtom {
                        terms: a.terms.clone(),
                        cmp: CmpOp::Lt,
                        rhs: a.rhs.clone(),
                    }),
                    VFormula::Atom(VAtom {
                        terms: a.terms.clone(),
                        cmp: CmpOp::Gt,
                        rhs: a.rhs.clone(),
                    }),
                ]),
                other => VFormula::Atom(VAtom {
                    terms: a.terms.clone(),
                    cmp: other.negate(),
                    rhs: a.rhs.clone(),
                }),
            },
        }
    }

    /// Topological closure: every strict literal weakened to non-strict.
    pub fn closure(&self) -> VFormula {
        match self {
            VFormula::True => VFormula::True,
            VFormula::False => VFormula::False,
            VFormula::Atom(a) => VFormula::Atom(a.closure()),
            VFormula::And(kids) => VFormula::And(kids.iter().map(|k| k.closure()).collect()),
            VFormula::Or(kids) => VFormula::Or(kids.iter().map(|k| k.closure()).collect()),
        }
    }

    /// All attribute terms occurring in the formula.
    pub fn terms(&self, out: &mut BTreeSet<AnchorTerm>) {
        match self {
            VFormula::True | VFormula::False => {}
            VFormula::Atom(a) => {
                for (_, t) in &a.terms {
                    out.insert(t.clone());
                }
            }
            VFormula::And(kids) | VFormula::Or(kids) => {
                for k in kids {
                    k.terms(out);
                }
            }
        }
    }

    /// Exact evaluation under a term valuation.
    pub fn eval(&self, val: &BTreeMap<AnchorTerm, BigRational>) -> Result<bool, DomainError> {
        Ok(match self {
            VFormula::True => true,
            VFormula::False => false,
            VFormula::Atom(a) => {
                let mut lhs = BigRational::zero();
                for (c, t) in &a.terms {
                    let v = val
                        .get(t)
                        .ok_or_else(|| DomainError::new(format!("unvalued term {}", t)))?;
                    lhs += c * v;
                }
                a.cmp.eval(&lhs, &a.rhs)
            }
            VFormula::And(kids) => {
                let mut acc = true;
                for k in kids {
                    acc &= k.eval(val)?;
                }
                acc
            }
            VFormula::Or(kids) => {
                let mut acc = false;
                for k in kids {
                    acc |= k.eval(val)?;
                }
                acc
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Strict,
    /// Strict comparators weakened; used for the end point of a step.
    RelaxedEnd,
}

/// Translate a spatial view against a pool of declared objects.
pub fn translate_view(
    view: &SpatialView,
    bulletin: &BTreeMap<String, String>,
    pool: &[(String, String)],
    world: &WorldModel,
    strictness: Strictness,
) -> Result<VFormula, DomainError> {
    let mut binding = BTreeMap::new();
    let body = translate_frame(&view.root, bulletin, pool, world, &mut binding)?;
    Ok(match strictness {
        Strictness::Strict => body,
        Strictness::RelaxedEnd => body.closure(),
    })
}

fn type_of_symbol(
    symbol: &str,
    bulletin: &BTreeMap<String, String>,
    pool: &[(String, String)],
) -> Result<String, DomainError> {
    if let Some(t) = bulletin.get(symbol) {
        return Ok(t.clone());
    }
    if let Some((_, t)) = pool.iter().find(|(n, _)| n == symbol) {
        return Ok(t.clone());
    }
    Err(DomainError::new(format!("unknown symbol {}", symbol)))
}

fn check_attr(
    term: &AnchorTerm,
    bulletin: &BTreeMap<String, String>,
    pool: &[(String, String)],
    world: &WorldModel,
    binding: &BTreeMap<String, String>,
) -> Result<(), DomainError> {
    let symbol = binding.get(&term.symbol).unwrap_or(&term.symbol).clone();
    let ty = type_of_symbol(&symbol, bulletin, pool)?;
    let mut cur = Some(ty);
    while let Some(t) = cur {
        match world.type_def(&t) {
            Some(def) => {
                if def.attributes.contains(&term.attr) {
                    return Ok(());
                }
                cur = def.parent.clone();
            }
            None => break,
        }
    }
    Err(DomainError::new(format!(
        "attribute {} is not defined for {}",
        term.attr, term.symbol
    )))
}

fn substitute(term: &AnchorTerm, binding: &BTreeMap<String, String>) -> AnchorTerm {
    match binding.get(&term.symbol) {
        Some(obj) => AnchorTerm {
            symbol: obj.clone(),
            attr: term.attr,
        },
        None => term.clone(),
    }
}

fn translate_frame(
    frame: &Frame,
    bulletin: &BTreeMap<String, String>,
    pool: &[(String, String)],
    world: &WorldModel,
    binding: &mut BTreeMap<String, String>,
) -> Result<VFormula, DomainError> {
    let mut conjuncts = Vec::new();

    for chain in &frame.orders {
        let active = match chain.axis {
            Axis::X => frame.constrain_x,
            Axis::Y => frame.constrain_y,
        };
        if !active {
            continue;
        }
        for (i, rel) in chain.relations.iter().enumerate() {
            let a = &chain.anchors[i];
            let b = &chain.anchors[i + 1];
            check_attr(a, bulletin, pool, world, binding)?;
            check_attr(b, bulletin, pool, world, binding)?;
            conjuncts.push(VFormula::Atom(VAtom {
                terms: vec![
                    (BigRational::from_integer(1.into()), substitute(a, binding)),
                    (
                        BigRational::from_integer((-1).into()),
                        substitute(b, binding),
                    ),
                ],
                cmp: *rel,
                rhs: BigRational::zero(),
            }));
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
        check_attr(&d.from, bulletin, pool, world, binding)?;
        check_attr(&d.to, bulletin, pool, world, binding)?;
        conjuncts.push(VFormula::Atom(VAtom {
            terms: vec![
                (
                    BigRational::from_integer(1.into()),
                    substitute(&d.to, binding),
                ),
                (
                    BigRational::from_integer((-1).into()),
                    substitute(&d.from, binding),
                ),
            ],
            cmp: d.cmp,
            rhs: d.bound.clone(),
        }));
    }
    for atom in &frame.constraints {
        let mut terms = Vec::new();
        for (c, t) in &atom.terms {
            check_attr(t, bulletin, pool, world, binding)?;
            terms.push((c.clone(), substitute(t, binding)));
        }
        conjuncts.push(VFormula::Atom(VAtom {
            terms,
            cmp: atom.cmp,
            rhs: atom.rhs.clone(),
        }));
    }

    for child in &frame.children {
        conjuncts.push(translate_child(child, bulletin, pool, world, binding)?);
    }
    Ok(VFormula::and(conjuncts))
}

fn translate_child(
    child: &Frame,
    bulletin: &BTreeMap<String, String>,
    pool: &[(String, String)],
    world: &WorldModel,
    binding: &mut BTreeMap<String, String>,
) -> Result<VFormula, DomainError> {
    match (&child.kind, child.binders.as_slice()) {
        (FrameKind::Somewhere, []) => translate_frame(child, bulletin, pool, world, binding),
        (FrameKind::Nowhere, []) => {
            Ok(translate_frame(child, bulletin, pool, world, binding)?.negate())
        }
        (FrameKind::Somewhere, [(sym, ty)]) => {
            // Existential placement: disjunction over matching pool objects.
            let mut disjuncts = Vec::new();
            for (obj, obj_ty) in pool {
                if !world.is_subtype(obj_ty, ty) {
                    continue;
                }
                binding.insert(sym.clone(), obj.clone());
                let body = translate_frame(child, bulletin, pool, world, binding);
                binding.remove(sym);
                disjuncts.push(body?);
            }
            // An empty pool for the quantified type yields the false constant.
            Ok(VFormula::or(disjuncts))
        }
        (FrameKind::Nowhere, [(sym, ty)]) => {
            // Negated placement over objects not already bound elsewhere.
            let bound: BTreeSet<String> = binding.values().cloned().collect();
            let mut conjuncts = Vec::new();
            for (obj, obj_ty) in pool {
                if !world.is_subtype(obj_ty, ty)
                    || bound.contains(obj)
                    || bulletin.contains_key(obj)
                {
                    continue;
                }
                binding.insert(sym.clone(), obj.clone());
                let body = translate_frame(child, bulletin, pool, world, binding);
                binding.remove(sym);
                conjuncts.push(body?.negate());
            }
            Ok(VFormula::and(conjuncts))
        }
        (FrameKind::Top, _) => Err(DomainError::new("nested top-level frame")),
        (_, _) => Err(DomainError::new("multiple binders on one frame")),
    }
}
