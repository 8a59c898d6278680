//! Constraint IR over Boolean and linear real arithmetic, plus models.
//!
//! Variables are plain names. Transition formulas refer to the next-state
//! instance of a variable by a trailing prime (`x'`); unrolling rewrites
//! names to indexed instances (`x@3`).

use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

use crate::view::CmpOp;

pub type Rat = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Real,
}

/// Linear arithmetic atom: sum(coeff·var) cmp rhs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinAtom {
    pub terms: Vec<(Rat, String)>,
    pub cmp: CmpOp,
    pub rhs: Rat,
}

impl LinAtom {
    pub fn var_cmp_const(var: &str, cmp: CmpOp, rhs: Rat) -> Self {
        LinAtom {
            terms: vec![(Rat::from_integer(1.into()), var.to_string())],
            cmp,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    /// Boolean variable.
    Bool(String),
    Atom(LinAtom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn bool_var(name: &str) -> Formula {
        Formula::Bool(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::And(kids) => flat.extend(kids),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::Or(kids) => flat.extend(kids),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Equality of two variables.
    pub fn var_eq(a: &str, b: &str) -> Formula {
        Formula::Atom(LinAtom {
            terms: vec![
                (Rat::from_integer(1.into()), a.to_string()),
                (Rat::from_integer((-1).into()), b.to_string()),
            ],
            cmp: CmpOp::Eq,
            rhs: Rat::zero(),
        })
    }

    /// Rename every variable (both Boolean and real).
    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Bool(v) => Formula::Bool(f(v)),
            Formula::Atom(a) => Formula::Atom(LinAtom {
                terms: a.terms.iter().map(|(c, v)| (c.clone(), f(v))).collect(),
                cmp: a.cmp,
                rhs: a.rhs.clone(),
            }),
            Formula::Not(x) => Formula::not(x.rename(f)),
            Formula::And(kids) => Formula::And(kids.iter().map(|k| k.rename(f)).collect()),
            Formula::Or(kids) => Formula::Or(kids.iter().map(|k| k.rename(f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.rename(f), b.rename(f)),
            Formula::Iff(a, b) => Formula::iff(a.rename(f), b.rename(f)),
        }
    }

    /// Substitute Boolean variables by constants (partial).
    pub fn substitute_bools(&self, map: &BTreeMap<String, bool>) -> Formula {
        match self {
            Formula::Bool(v) => match map.get(v) {
                Some(true) => Formula::True,
                Some(false) => Formula::False,
                None => self.clone(),
            },
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(x) => Formula::not(x.substitute_bools(map)),
            Formula::And(kids) => {
                Formula::and(kids.iter().map(|k| k.substitute_bools(map)).collect())
            }
            Formula::Or(kids) => {
                Formula::or(kids.iter().map(|k| k.substitute_bools(map)).collect())
            }
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute_bools(map), b.substitute_bools(map))
            }
            Formula::Iff(a, b) => Formula::iff(a.substitute_bools(map), b.substitute_bools(map)),
        }
    }

    /// Collect variables with their sorts.
    pub fn collect_vars(&self, out: &mut BTreeMap<String, Sort>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Bool(v) => {
                out.insert(v.clone(), Sort::Bool);
            }
            Formula::Atom(a) => {
                for (_, v) in &a.terms {
                    out.insert(v.clone(), Sort::Real);
                }
            }
            Formula::Not(x) => x.collect_vars(out),
            Formula::And(kids) | Formula::Or(kids) => {
                for k in kids {
                    k.collect_vars(out);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Exact evaluation under a model; missing variables are an error.
    pub fn eval(&self, model: &Model) -> Result<bool, String> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Bool(v) => model.get_bool(v)?,
            Formula::Atom(a) => {
                let mut lhs = Rat::zero();
                for (c, v) in &a.terms {
                    lhs += c * model.get_real(v)?;
                }
                a.cmp.eval(&lhs, &a.rhs)
            }
            Formula::Not(x) => !x.eval(model)?,
            Formula::And(kids) => {
                let mut acc = true;
                for k in kids {
                    acc &= k.eval(model)?;
                }
                acc
            }
            Formula::Or(kids) => {
                let mut acc = false;
                for k in kids {
                    acc |= k.eval(model)?;
                }
                acc
            }
            Formula::Implies(a, b) => !a.eval(model)? || b.eval(model)?,
            Formula::Iff(a, b) => a.eval(model)? == b.eval(model)?,
        })
    }
}

pub fn primed(name: &str) -> String {
    format!("{}'", name)
}

pub fn instanced(name: &str, step: usize) -> String {
    format!("{}@{}", name, step)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelValue {
    Bool(bool),
    Real(Rat),
}

/// Variable valuation returned by a solver; rationals are exact.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Model {
    pub values: BTreeMap<String, ModelValue>,
}

impl Model {
    pub fn get_bool(&self, name: &str) -> Result<bool, String> {
        match self.values.get(name) {
            Some(ModelValue::Bool(b)) => Ok(*b),
            Some(ModelValue::Real(_)) => Err(format!("{} is not Boolean", name)),
            // Solvers omit don't-care variables; absent Booleans read false.
            None => Ok(false),
        }
    }

    pub fn get_real(&self, name: &str) -> Result<&Rat, String> {
        match self.values.get(name) {
            Some(ModelValue::Real(r)) => Ok(r),
            _ => Err(format!("missing real variable {} in model", name)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Bool(v) => f.write_str(v),
            Formula::Atom(a) => {
                for (i, (c, v)) in a.terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}*{}", c, v)?;
                }
                write!(f, " {} {}", a.cmp, a.rhs)
            }
            Formula::Not(x) => write!(f, "!({})", x),
            Formula::And(kids) => {
                f.write_str("(")?;
                for (i, k) in kids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    write!(f, "{}", k)?;
                }
                f.write_str(")")
            }
            Formula::Or(kids) => {
                f.write_str("(")?;
                for (i, k) in kids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{}", k)?;
                }
                f.write_str(")")
            }
            Formula::Implies(a, b) => write!(f, "({} -> {})", a, b),
            Formula::Iff(a, b) => write!(f, "({} <-> {})", a, b),
        }
    }
}
