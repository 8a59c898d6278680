//! Term representation for parsed SMT-LIB2 assertions.

use crate::rational::Rat;
use std::collections::BTreeMap;
use std::rc::Rc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

#[derive(Debug, Clone)]
pub enum Term {
    True,
    False,
    BoolVar(String),
    Not(Rc<Term>),
    And(Vec<Rc<Term>>),
    Or(Vec<Rc<Term>>),
    Implies(Rc<Term>, Rc<Term>),
    Iff(Rc<Term>, Rc<Term>),
    /// Comparison of two linear real expressions.
    Cmp(Cmp, LinExpr, LinExpr),
}

/// A linear expression `constant + sum(coeff * var)` over real variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinExpr {
    pub constant: Rat,
    pub coeffs: BTreeMap<String, Rat>,
}

impl LinExpr {
    pub fn constant(c: Rat) -> Self {
        LinExpr {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rat::one());
        LinExpr {
            constant: Rat::zero(),
            coeffs,
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.constant = &out.constant + &other.constant;
        for (v, c) in &other.coeffs {
            let entry = out.coeffs.entry(v.clone()).or_insert_with(Rat::zero);
            *entry = &*entry + c;
            if entry.is_zero() {
                out.coeffs.remove(v);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::constant(Rat::zero());
        }
        LinExpr {
            constant: &self.constant * k,
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(&-&Rat::one()))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}
