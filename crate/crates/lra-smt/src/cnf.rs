//! Tseitin transformation of parsed terms into CNF over SAT variables,
//! with linear-arithmetic atoms interned against simplex slack variables.

use crate::rational::Rat;
use crate::simplex::{Simplex, TVar};
use crate::term::{Cmp, LinExpr, Term};
use std::collections::HashMap;
use std::rc::Rc;

/// Literal: variable index shifted left, LSB = negated.
pub type Lit = u32;
pub type BVar = u32;

pub fn lit(var: BVar, positive: bool) -> Lit {
    var * 2 + if positive { 0 } else { 1 }
}

pub fn lit_var(l: Lit) -> BVar {
    l / 2
}

pub fn lit_positive(l: Lit) -> bool {
    l & 1 == 0
}

pub fn lit_neg(l: Lit) -> Lit {
    l ^ 1
}

/// Theory meaning of an atom variable: `tvar <= bound` (strict if `strict`).
#[derive(Debug, Clone)]
pub struct AtomBinding {
    pub tvar: TVar,
    pub bound: Rat,
    pub strict: bool,
}

pub struct Builder {
    pub clauses: Vec<Vec<Lit>>,
    pub n_vars: BVar,
    pub atom_of_var: Vec<Option<AtomBinding>>,
    pub simplex: Simplex,
    pub real_vars: HashMap<String, TVar>,
    bool_vars: HashMap<String, BVar>,
    slack_by_coeffs: HashMap<String, TVar>,
    atom_intern: HashMap<(TVar, Rat, bool), BVar>,
    cache: HashMap<*const Term, Lit>,
    true_var: Option<BVar>,
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            clauses: Vec::new(),
            n_vars: 0,
            atom_of_var: Vec::new(),
            simplex: Simplex::new(),
            real_vars: HashMap::new(),
            bool_vars: HashMap::new(),
            slack_by_coeffs: HashMap::new(),
            atom_intern: HashMap::new(),
            cache: HashMap::new(),
            true_var: None,
        }
    }

    pub fn fresh_var(&mut self) -> BVar {
        let v = self.n_vars;
        self.n_vars += 1;
        self.atom_of_var.push(None);
        v
    }

    pub fn bool_var(&mut self, name: &str) -> BVar {
        if let Some(v) = self.bool_vars.get(name) {
            return *v;
        }
        let v = self.fresh_var();
        self.bool_vars.insert(name.to_string(), v);
        v
    }

    pub fn bool_var_names(&self) -> &HashMap<String, BVar> {
        &self.bool_vars
    }

    pub fn real_var(&mut self, name: &str) -> TVar {
        if let Some(v) = self.real_vars.get(name) {
            return *v;
        }
        let v = self.simplex.new_var();
        self.real_vars.insert(name.to_string(), v);
        v
    }

    fn true_lit(&mut self) -> Lit {
        match self.true_var {
            Some(v) => lit(v, true),
            None => {
                let v = self.fresh_var();
                self.true_var = Some(v);
                self.clauses.push(vec![lit(v, true)]);
                lit(v, true)
            }
        }
    }

    /// Assert a term at the top level, splitting conjunctions into clauses.
    pub fn assert_term(&mut self, t: &Rc<Term>) {
        match t.as_ref() {
            Term::True => {}
            Term::False => self.clauses.push(Vec::new()),
            Term::And(kids) => {
                for k in kids {
                    self.assert_term(k);
                }
            }
            Term::Cmp(Cmp::Eq, a, b) => {
                let le = self.atom_lit(Cmp::Le, a, b);
                let ge = self.atom_lit(Cmp::Ge, a, b);
                self.clauses.push(vec![le]);
                self.clauses.push(vec![ge]);
            }
            _ => {
                let l = self.encode(t);
                self.clauses.push(vec![l]);
            }
        }
    }

    fn encode(&mut self, t: &Rc<Term>) -> Lit {
        let key = Rc::as_ptr(t);
        if let Some(l) = self.cache.get(&key) {
            return *l;
        }
        let result = match t.as_ref() {
            Term::True => self.true_lit(),
            Term::False => lit_neg(self.true_lit()),
            Term::BoolVar(name) => lit(self.bool_var(name), true),
            Term::Not(inner) => lit_neg(self.encode(inner)),
            Term::And(kids) => {
                let lits: Vec<Lit> = kids.iter().map(|k| self.encode(k)).collect();
                self.gate_and(&lits)
            }
            Term::Or(kids) => {
                let lits: Vec<Lit> = kids.iter().map(|k| self.encode(k)).collect();
                let negs: Vec<Lit> = lits.iter().map(|l| lit_neg(*l)).collect();
                lit_neg(self.gate_and(&negs))
            }
            Term::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let negs = vec![la, lit_neg(lb)];
                lit_neg(self.gate_and(&negs))
            }
            Term::Iff(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let g = self.fresh_var();
                let gl = lit(g, true);
                self.clauses.push(vec![lit_neg(gl), lit_neg(la), lb]);
                self.clauses.push(vec![lit_neg(gl), la, lit_neg(lb)]);
                self.clauses.push(vec![gl, la, lb]);
                self.clauses.push(vec![gl, lit_neg(la), lit_neg(lb)]);
                gl
            }
            Term::Cmp(Cmp::Eq, a, b) => {
                let le = self.atom_lit(Cmp::Le, a, b);
                let ge = self.atom_lit(Cmp::Ge, a, b);
                self.gate_and(&[le, ge])
            }
            Term::Cmp(op, a, b) => self.atom_lit(*op, a, b),
        };
        self.cache.insert(key, result);
        result
    }

    /// `g <-> and(lits)`.
    fn gate_and(&mut self, lits: &[Lit]) -> Lit {
        if lits.is_empty() {
            return self.true_lit();
        }
        if lits.len() == 1 {
            return lits[0];
        }
        let g = self.fresh_var();
        let gl = lit(g, true);
        let mut big = vec![gl];
        for l in lits {
            self.clauses.push(vec![lit_neg(gl), *l]);
            big.push(lit_neg(*l));
        }
        self.clauses.push(big);
        gl
    }

    /// Literal for the atom `a op b` with op in {Lt, Le, Gt, Ge}.
    fn atom_lit(&mut self, op: Cmp, a: &LinExpr, b: &LinExpr) -> Lit {
        let diff = a.sub(b);
        // Normalize to `expr <= rhs` or `expr < rhs`.
        let (coeffs, rhs, strict) = match op {
            Cmp::Le => (diff.coeffs.clone(), -&diff.constant, false),
            Cmp::Lt => (diff.coeffs.clone(), -&diff.constant, true),
            Cmp::Ge => (
                diff.coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect(),
                diff.constant.clone(),
                false,
            ),
            Cmp::Gt => (
                diff.coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect(),
                diff.constant.clone(),
                true,
            ),
            Cmp::Eq => unreachable!("equality expanded by caller"),
        };
        if coeffs.is_empty() {
            let holds = if strict {
                Rat::zero() < rhs
            } else {
                Rat::zero() <= rhs
            };
            let t = self.true_lit();
            return if holds { t } else { lit_neg(t) };
        }
        if coeffs.len() == 1 {
            let (var, c) = coeffs
                .iter()
                .next()
                .map(|(v, c)| (v.clone(), c.clone()))
                .unwrap();
            if c.is_one() {
                let tvar = self.real_var(&var);
                return self.intern_atom(tvar, rhs, strict);
            }
            // Divide through by the coefficient, flipping for negatives:
            // c*x <= r  <=>  x <= r/c (c > 0)  |  x >= r/c (c < 0).
            let bound = &rhs / &c;
            let tvar = self.real_var(&var);
            if c.is_positive() {
                return self.intern_atom(tvar, bound, strict);
            }
            // x >= b <=> not (x < b); x > b <=> not (x <= b)
            let inner = self.intern_atom(tvar, bound, !strict);
            return lit_neg(inner);
        }
        // Normalize multi-variable atoms to integer coefficients with a
        // positive leading entry; integer tableau seeds keep the exact
        // pivoting arithmetic in machine words. A negative factor flips
        // the comparison, which comes back as a negated literal.
        let mut factor = integer_factor(coeffs.values());
        if coeffs.values().next().unwrap().is_negative() {
            factor = -&factor;
        }
        let negated = factor.is_negative();
        let coeffs: Vec<(String, Rat)> = coeffs
            .iter()
            .map(|(v, c)| (v.clone(), c * &factor))
            .collect();
        let rhs = &rhs * &factor;
        let key = coeffs
            .iter()
            .map(|(v, c)| format!("{}*{};", c, v))
            .collect::<String>();
        let tvar = if let Some(s) = self.slack_by_coeffs.get(&key) {
            *s
        } else {
            let def: Vec<(TVar, Rat)> = coeffs
                .iter()
                .map(|(v, c)| (self.real_var(v), c.clone()))
                .collect();
            let s = self.simplex.new_slack(&def);
            self.slack_by_coeffs.insert(key, s);
            s
        };
        if negated {
            // original: expr <= rhs with expr = -slack_expr/|f|:
            // slack >= rhs' <=> not (slack < rhs') etc.
            let inner = self.intern_atom(tvar, rhs, !strict);
            return lit_neg(inner);
        }
        self.intern_atom(tvar, rhs, strict)
    }

    fn intern_atom(&mut self, tvar: TVar, rhs: Rat, strict: bool) -> Lit {
        let ikey = (tvar, rhs.clone(), strict);

        if let Some(v) = self.atom_intern.get(&ikey) {
            return lit(*v, true);
        }
        let v = self.fresh_var();
        self.atom_of_var[v as usize] = Some(AtomBinding {
            tvar,
            bound: rhs,
            strict,
        });
        self.atom_intern.insert(ikey, v);
        lit(v, true)
    }
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

/// Positive factor turning the coefficients into integers with gcd one.
fn integer_factor<'a>(coeffs: impl Iterator<Item = &'a Rat>) -> Rat {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::Zero;
    let items: Vec<num_rational::BigRational> = coeffs.map(|c| c.to_big()).collect();
    let mut lcm = BigInt::from(1);
    for b in &items {
        lcm = lcm.lcm(b.denom());
    }
    let mut gcd = BigInt::from(0);
    for b in &items {
        let scaled = b.numer() * (&lcm / b.denom());
        gcd = gcd.gcd(&scaled);
    }
    if gcd.is_zero() {
        gcd = BigInt::from(1);
    }
    Rat::from_big(num_rational::BigRational::new(lcm, gcd))
}
