//! SMT-LIB2 script parser covering the QF_LRA subset this solver supports.

use crate::qnum::Q;
use crate::rational::Rat;
use crate::term::{Cmp, LinExpr, Sort, Term};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

pub fn tokenize(input: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ';' => {
                for ch in chars.by_ref() {
                    if ch == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' => {
                tokens.push(c.to_string());
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                for ch in chars.by_ref() {
                    s.push(ch);
                    if ch == '"' {
                        break;
                    }
                }
                tokens.push(s);
            }
            '|' => {
                chars.next();
                let mut s = String::new();
                for ch in chars.by_ref() {
                    if ch == '|' {
                        break;
                    }
                    s.push(ch);
                }
                tokens.push(s);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == ';' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                tokens.push(s);
            }
        }
    }
    Ok(tokens)
}

pub fn parse_sexprs(input: &str) -> Result<Vec<SExpr>, String> {
    let tokens = tokenize(input)?;
    let mut out = Vec::new();
    let mut idx = 0;
    while idx < tokens.len() {
        let (expr, next) = parse_one(&tokens, idx)?;
        out.push(expr);
        idx = next;
    }
    Ok(out)
}

fn parse_one(tokens: &[String], idx: usize) -> Result<(SExpr, usize), String> {
    match tokens.get(idx) {
        None => Err("unexpected end of input".into()),
        Some(t) if t == "(" => {
            let mut items = Vec::new();
            let mut i = idx + 1;
            loop {
                match tokens.get(i) {
                    None => return Err("unbalanced parenthesis".into()),
                    Some(t) if t == ")" => return Ok((SExpr::List(items), i + 1)),
                    _ => {
                        let (e, next) = parse_one(tokens, i)?;
                        items.push(e);
                        i = next;
                    }
                }
            }
        }
        Some(t) if t == ")" => Err("unexpected ')'".into()),
        Some(t) => Ok((SExpr::Atom(t.clone()), idx + 1)),
    }
}

/// A parsed script command.
#[derive(Debug, Clone)]
pub enum Command {
    SetLogic(String),
    SetOption,
    SetInfo,
    Declare(String, Sort),
    Assert(Rc<Term>),
    CheckSat,
    GetModel,
    Exit,
}

pub struct ScriptParser {
    pub sorts: HashMap<String, Sort>,
}

impl ScriptParser {
    pub fn new() -> Self {
        ScriptParser {
            sorts: HashMap::new(),
        }
    }

    pub fn parse_script(&mut self, text: &str) -> Result<Vec<Command>, String> {
        let sexprs = parse_sexprs(text)?;
        let mut cmds = Vec::new();
        for e in sexprs {
            cmds.push(self.parse_command(&e)?);
        }
        Ok(cmds)
    }

    fn parse_command(&mut self, e: &SExpr) -> Result<Command, String> {
        let list = match e {
            SExpr::List(l) => l,
            SExpr::Atom(a) => return Err(format!("expected command, found atom '{}'", a)),
        };
        let head = match list.first() {
            Some(SExpr::Atom(a)) => a.as_str(),
            _ => return Err("empty command".into()),
        };
        match head {
            "set-logic" => Ok(Command::SetLogic(atom_at(list, 1)?)),
            "set-option" => Ok(Command::SetOption),
            "set-info" => Ok(Command::SetInfo),
            "declare-const" => {
                let name = atom_at(list, 1)?;
                let sort = self.parse_sort(list.get(2).ok_or("missing sort")?)?;
                self.sorts.insert(name.clone(), sort);
                Ok(Command::Declare(name, sort))
            }
            "declare-fun" => {
                let name = atom_at(list, 1)?;
                match list.get(2) {
                    Some(SExpr::List(args)) if args.is_empty() => {}
                    _ => return Err("declare-fun with arguments is unsupported".into()),
                }
                let sort = self.parse_sort(list.get(3).ok_or("missing sort")?)?;
                self.sorts.insert(name.clone(), sort);
                Ok(Command::Declare(name, sort))
            }
            "assert" => {
                let t = self.parse_term(list.get(1).ok_or("missing assertion body")?)?;
                if self.sort_of(&t)? != Sort::Bool {
                    return Err("assertion is not Boolean".into());
                }
                Ok(Command::Assert(t))
            }
            "check-sat" => Ok(Command::CheckSat),
            "get-model" => Ok(Command::GetModel),
            "exit" => Ok(Command::Exit),
            other => Err(format!("unsupported command '{}'", other)),
        }
    }

    fn parse_sort(&self, e: &SExpr) -> Result<Sort, String> {
        match e {
            SExpr::Atom(a) if a == "Bool" => Ok(Sort::Bool),
            SExpr::Atom(a) if a == "Real" => Ok(Sort::Real),
            other => Err(format!("unsupported sort {:?}", other)),
        }
    }

    fn sort_of(&self, t: &Term) -> Result<Sort, String> {
        Ok(match t {
            Term::True | Term::False | Term::BoolVar(_) => Sort::Bool,
            Term::Not(_) | Term::And(_) | Term::Or(_) => Sort::Bool,
            Term::Implies(..) | Term::Iff(..) | Term::Cmp(..) => Sort::Bool,
        })
    }

    fn parse_term(&self, e: &SExpr) -> Result<Rc<Term>, String> {
        match e {
            SExpr::Atom(a) => match a.as_str() {
                "true" => Ok(Rc::new(Term::True)),
                "false" => Ok(Rc::new(Term::False)),
                name => match self.sorts.get(name) {
                    Some(Sort::Bool) => Ok(Rc::new(Term::BoolVar(name.to_string()))),
                    Some(Sort::Real) => Err(format!("real variable '{}' used as formula", name)),
                    None => Err(format!("undeclared symbol '{}'", name)),
                },
            },
            SExpr::List(items) => {
                let head = match items.first() {
                    Some(SExpr::Atom(a)) => a.as_str(),
                    _ => return Err("expected operator".into()),
                };
                match head {
                    "not" => Ok(Rc::new(Term::Not(self.parse_term(&items[1])?))),
                    "and" => {
                        let kids = items[1..]
                            .iter()
                            .map(|e| self.parse_term(e))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Rc::new(Term::And(kids)))
                    }
                    "or" => {
                        let kids = items[1..]
                            .iter()
                            .map(|e| self.parse_term(e))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Rc::new(Term::Or(kids)))
                    }
                    "=>" => {
                        if items.len() != 3 {
                            return Err("=> expects two arguments".into());
                        }
                        Ok(Rc::new(Term::Implies(
                            self.parse_term(&items[1])?,
                            self.parse_term(&items[2])?,
                        )))
                    }
                    "=" => {
                        if items.len() != 3 {
                            return Err("= expects two arguments".into());
                        }
                        // Boolean or arithmetic equality, decided by the operands.
                        if self.is_bool_expr(&items[1]) {
                            Ok(Rc::new(Term::Iff(
                                self.parse_term(&items[1])?,
                                self.parse_term(&items[2])?,
                            )))
                        } else {
                            let a = self.parse_lin(&items[1])?;
                            let b = self.parse_lin(&items[2])?;
                            Ok(Rc::new(Term::Cmp(Cmp::Eq, a, b)))
                        }
                    }
                    "<" | "<=" | ">" | ">=" => {
                        if items.len() != 3 {
                            return Err(format!("{} expects two arguments", head));
                        }
                        let op = match head {
                            "<" => Cmp::Lt,
                            "<=" => Cmp::Le,
                            ">" => Cmp::Gt,
                            _ => Cmp::Ge,
                        };
                        let a = self.parse_lin(&items[1])?;
                        let b = self.parse_lin(&items[2])?;
                        Ok(Rc::new(Term::Cmp(op, a, b)))
                    }
                    other => Err(format!("unsupported operator '{}'", other)),
                }
            }
        }
    }

    fn is_bool_expr(&self, e: &SExpr) -> bool {
        match e {
            SExpr::Atom(a) => a == "true" || a == "false" || self.sorts.get(a) == Some(&Sort::Bool),
            SExpr::List(items) => matches!(
                items.first(),
                Some(SExpr::Atom(h)) if matches!(
                    h.as_str(),
                    "not" | "and" | "or" | "=>" | "<" | "<=" | ">" | ">=" | "="
                ) && !matches!(h.as_str(), "+" | "-" | "*" | "/")
            ),
        }
    }

    pub fn parse_lin(&self, e: &SExpr) -> Result<LinExpr, String> {
        match e {
            SExpr::Atom(a) => {
                if let Some(r) = parse_numeral(a) {
                    Ok(LinExpr::constant(r))
                } else {
                    match self.sorts.get(a) {
                        Some(Sort::Real) => Ok(LinExpr::var(a)),
                        Some(Sort::Bool) => Err(format!("Boolean '{}' in arithmetic", a)),
                        None => Err(format!("undeclared symbol '{}'", a)),
                    }
                }
            }
            SExpr::List(items) => {
                let head = match items.first() {
                    Some(SExpr::Atom(a)) => a.as_str(),
                    _ => return Err("expected arithmetic operator".into()),
                };
                match head {
                    "+" => {
                        let mut acc = LinExpr::constant(Rat::zero());
                        for item in &items[1..] {
                            acc = acc.add(&self.parse_lin(item)?);
                        }
                        Ok(acc)
                    }
                    "-" => {
                        if items.len() == 2 {
                            Ok(self.parse_lin(&items[1])?.scale(&-&Rat::one()))
                        } else {
                            let mut acc = self.parse_lin(&items[1])?;
                            for item in &items[2..] {
                                acc = acc.sub(&self.parse_lin(item)?);
                            }
                            Ok(acc)
                        }
                    }
                    "*" => {
                        if items.len() != 3 {
                            return Err("* expects two arguments".into());
                        }
                        let a = self.parse_lin(&items[1])?;
                        let b = self.parse_lin(&items[2])?;
                        if a.is_constant() {
                            Ok(b.scale(&a.constant))
                        } else if b.is_constant() {
                            Ok(a.scale(&b.constant))
                        } else {
                            Err("non-linear multiplication".into())
                        }
                    }
                    "/" => {
                        if items.len() != 3 {
                            return Err("/ expects two arguments".into());
                        }
                        let a = self.parse_lin(&items[1])?;
                        let b = self.parse_lin(&items[2])?;
                        if !b.is_constant() || b.constant.is_zero() {
                            return Err("division by non-constant".into());
                        }
                        Ok(a.scale(&b.constant.recip()))
                    }
                    other => Err(format!("unsupported arithmetic operator '{}'", other)),
                }
            }
        }
    }
}

impl Default for ScriptParser {
    fn default() -> Self {
        Self::new()
    }
}

fn atom_at(list: &[SExpr], idx: usize) -> Result<String, String> {
    match list.get(idx) {
        Some(SExpr::Atom(a)) => Ok(a.clone()),
        _ => Err(format!("expected atom at position {}", idx)),
    }
}

/// Parse an SMT-LIB numeral or decimal, including `(- n)` handled upstream.
pub fn parse_numeral(s: &str) -> Option<Rat> {
    if s.is_empty() {
        return None;
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let r = if let Some(dot) = body.find('.') {
        let int_part = &body[..dot];
        let frac_part = &body[dot + 1..];
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || (int_part.is_empty() && frac_part.is_empty())
        {
            return None;
        }
        let digits = format!("{}{}", int_part, frac_part);
        let num: BigInt = digits.parse().ok()?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        Q::from_big(BigRational::new(num, den))
    } else {
        if !body.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let num: BigInt = body.parse().ok()?;
        Q::from_big(BigRational::from_integer(num))
    };
    Some(if neg { -&r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_script() {
        let mut p = ScriptParser::new();
        let cmds = p
            .parse_script("(set-logic QF_LRA)(declare-const x Real)(assert (< x 3.5))(check-sat)")
            .unwrap();
        assert_eq!(cmds.len(), 4);
    }

    #[test]
    fn numerals() {
        assert_eq!(parse_numeral("3").unwrap(), Q::from_int(3));
        assert_eq!(parse_numeral("3.25").unwrap(), Q::new128(13, 4));
        assert!(parse_numeral("x").is_none());
    }
}
