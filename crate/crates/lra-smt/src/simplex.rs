//! Incremental simplex for linear real arithmetic with strict bounds,
//! following the general-simplex style used by modern SMT solvers:
//! slack variables are defined by linear rows, asserted bounds move the
//! assignment, and infeasibility yields an explanation in terms of the
//! literals that asserted the participating bounds.

use crate::rational::{DeltaRat, Rat};
use std::collections::HashMap;

pub type TVar = u32;

/// Literal tag carried through bound assertions for conflict explanations.
pub type Tag = i32;

#[derive(Debug, Clone)]
struct Bound {
    value: DeltaRat,
    tag: Tag,
}

#[derive(Debug, Clone)]
pub struct Row {
    /// Coefficients over non-basic variables.
    pub cols: HashMap<TVar, Rat>,
}

#[derive(Debug)]
enum TrailEntry {
    Lower(TVar, Option<Bound>),
    Upper(TVar, Option<Bound>),
}

#[derive(Debug)]
pub enum AssertResult {
    Ok,
    /// Tags of the bounds involved in an immediate bound clash.
    Conflict(Vec<Tag>),
}

#[derive(Debug)]
pub enum CheckResult {
    Sat,
    Conflict(Vec<Tag>),
}

pub struct Simplex {
    n_vars: TVar,
    lower: Vec<Option<Bound>>,
    upper: Vec<Option<Bound>>,
    beta: Vec<DeltaRat>,
    /// rows[v] = Some(row) iff v is basic.
    rows: Vec<Option<Row>>,
    /// For each non-basic var, the set of basic vars whose row mentions it.
    col_occurs: Vec<HashMap<TVar, ()>>,
    trail: Vec<TrailEntry>,
    /// Basic variables whose value may violate a bound.
    suspect: std::collections::BTreeSet<TVar>,
    pub stats_pivots: u64,
    pub stats_asserts: u64,
    pub stats_checks: u64,
    pub stats_updates: u64,
    pub stats_update_ops: u64,
    pub stats_pivot_ops: u64,
}

impl Simplex {
    pub fn new() -> Self {
        Simplex {
            n_vars: 0,
            lower: Vec::new(),
            upper: Vec::new(),
            beta: Vec::new(),
            rows: Vec::new(),
            col_occurs: Vec::new(),
            trail: Vec::new(),
            suspect: std::collections::BTreeSet::new(),
            stats_pivots: 0,
            stats_asserts: 0,
            stats_checks: 0,
            stats_updates: 0,
            stats_update_ops: 0,
            stats_pivot_ops: 0,
        }
    }

    pub fn new_var(&mut self) -> TVar {
        let v = self.n_vars;
        self.n_vars += 1;
        self.lower.push(None);
        self.upper.push(None);
        self.beta.push(DeltaRat::zero());
        self.rows.push(None);
        self.col_occurs.push(HashMap::new());
        v
    }

    /// Introduce a slack variable defined as a linear combination of
    /// existing (currently non-basic or basic) variables.
    pub fn new_slack(&mut self, definition: &[(TVar, Rat)]) -> TVar {
        let s = self.new_var();
        // Expand any basic variables in the definition by their rows.
        let mut cols: HashMap<TVar, Rat> = HashMap::new();
        for (v, c) in definition {
            if let Some(row) = &self.rows[*v as usize] {
                let row = row.clone();
                for (u, a) in &row.cols {
                    add_to(&mut cols, *u, &(c * a));
                }
            } else {
                add_to(&mut cols, *v, c);
            }
        }
        let mut val = DeltaRat::zero();
        for (u, a) in &cols {
            val = &val + &self.beta[*u as usize].scaled(a);
        }
        self.beta[s as usize] = val;
        for u in cols.keys() {
            self.col_occurs[*u as usize].insert(s, ());
        }
        self.rows[s as usize] = Some(Row { cols });
        s
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn backtrack(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                TrailEntry::Lower(v, old) => self.lower[v as usize] = old,
                TrailEntry::Upper(v, old) => self.upper[v as usize] = old,
            }
        }
    }

    pub fn assert_upper(&mut self, v: TVar, value: DeltaRat, tag: Tag) -> AssertResult {
        self.stats_asserts += 1;
        if let Some(u) = &self.upper[v as usize] {
            if u.value <= value {
                return AssertResult::Ok;
            }
        }
        if let Some(l) = &self.lower[v as usize] {
            if l.value > value {
                return AssertResult::Conflict(vec![l.tag, tag]);
            }
        }
        self.trail
            .push(TrailEntry::Upper(v, self.upper[v as usize].clone()));
        self.upper[v as usize] = Some(Bound {
            value: value.clone(),
            tag,
        });
        if self.rows[v as usize].is_none() {
            if self.beta[v as usize] > value {
                self.update(v, value);
            }
        } else if self.beta[v as usize] > value {
            self.suspect.insert(v);
        }
        AssertResult::Ok
    }

    pub fn assert_lower(&mut self, v: TVar, value: DeltaRat, tag: Tag) -> AssertResult {
        self.stats_asserts += 1;
        if let Some(l) = &self.lower[v as usize] {
            if l.value >= value {
                return AssertResult::Ok;
            }
        }
        if let Some(u) = &self.upper[v as usize] {
            if u.value < value {
                return AssertResult::Conflict(vec![u.tag, tag]);
            }
        }
        self.trail
            .push(TrailEntry::Lower(v, self.lower[v as usize].clone()));
        self.lower[v as usize] = Some(Bound {
            value: value.clone(),
            tag,
        });
        if self.rows[v as usize].is_none() {
            if self.beta[v as usize] < value {
                self.update(v, value);
            }
        } else if self.beta[v as usize] < value {
            self.suspect.insert(v);
        }
        AssertResult::Ok
    }

    /// Set a non-basic variable to `value` and propagate into basic rows.
    fn update(&mut self, v: TVar, value: DeltaRat) {
        let delta = &value - &self.beta[v as usize];
        self.stats_updates += 1;
        self.stats_update_ops += self.col_occurs[v as usize].len() as u64;
        let dependents: Vec<TVar> = self.col_occurs[v as usize].keys().copied().collect();
        for b in dependents {
            if let Some(row) = &self.rows[b as usize] {
                if let Some(a) = row.cols.get(&v) {
                    let shift = delta.scaled(a);
                    self.beta[b as usize] = &self.beta[b as usize] + &shift;
                    self.suspect.insert(b);
                }
            }
        }
        self.beta[v as usize] = value;
    }

    /// Restore feasibility or report a conflict (Bland's rule for
    /// termination). Only variables whose value moved since the last
    /// check are examined.
    pub fn check(&mut self) -> CheckResult {
        self.stats_checks += 1;
        let mut pivots_this_check = 0usize;
        loop {
            // Smallest suspect basic variable violating one of its bounds.
            let mut violated: Option<(TVar, bool)> = None; // (var, is_lower_violation)
            while let Some(v) = self.suspect.pop_first() {
                if self.rows[v as usize].is_none() {
                    continue;
                }
                if let Some(l) = &self.lower[v as usize] {
                    if self.beta[v as usize] < l.value {
                        violated = Some((v, true));
                        break;
                    }
                }
                if let Some(u) = &self.upper[v as usize] {
                    if self.beta[v as usize] > u.value {
                        violated = Some((v, false));
                        break;
                    }
                }
            }
            let (b, is_lower) = match violated {
                None => return CheckResult::Sat,
                Some(x) => x,
            };
            self.suspect.insert(b);
            pivots_this_check += 1;
            // Prefer sparse pivot columns to limit fill-in; fall back to
            // Bland's rule (smallest index) after a while, which
            // guarantees termination.
            let blands = pivots_this_check > 256;
            let row = self.rows[b as usize].clone().unwrap();
            let mut pivot: Option<TVar> = None;
            let mut best_occ = usize::MAX;
            let mut cols: Vec<(&TVar, &Rat)> = row.cols.iter().collect();
            cols.sort_by_key(|(v, _)| **v);
            for (v, a) in &cols {
                let v = **v;
                let increasing = if is_lower {
                    a.is_positive()
                } else {
                    a.is_negative()
                };
                let can_move = if increasing {
                    match &self.upper[v as usize] {
                        None => true,
                        Some(u) => self.beta[v as usize] < u.value,
                    }
                } else {
                    match &self.lower[v as usize] {
                        None => true,
                        Some(l) => self.beta[v as usize] > l.value,
                    }
                };
                if can_move {
                    if blands {
                        pivot = Some(v);
                        break;
                    }
                    let occ = self.col_occurs[v as usize].len();
                    if occ < best_occ {
                        best_occ = occ;
                        pivot = Some(v);
                    }
                }
            }
            match pivot {
                Some(nb) => {
                    let target = if is_lower {
                        self.lower[b as usize].as_ref().unwrap().value.clone()
                    } else {
                        self.upper[b as usize].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(b, nb, target);
                }
                None => {
                    // Infeasible row: every movable direction is blocked.
                    let mut tags = Vec::new();
                    if is_lower {
                        tags.push(self.lower[b as usize].as_ref().unwrap().tag);
                        for (v, a) in &cols {
                            if a.is_positive() {
                                tags.push(self.upper[**v as usize].as_ref().unwrap().tag);
                            } else {
                                tags.push(self.lower[**v as usize].as_ref().unwrap().tag);
                            }
                        }
                    } else {
                        tags.push(self.upper[b as usize].as_ref().unwrap().tag);
                        for (v, a) in &cols {
                            if a.is_positive() {
                                tags.push(self.lower[**v as usize].as_ref().unwrap().tag);
                            } else {
                                tags.push(self.upper[**v as usize].as_ref().unwrap().tag);
                            }
                        }
                    }
                    tags.sort_unstable();
                    tags.dedup();
                    return CheckResult::Conflict(tags);
                }
            }
        }
    }

    /// Pivot basic `b` with non-basic `nb` and set `b`'s value to `target`.
    fn pivot_and_update(&mut self, b: TVar, nb: TVar, target: DeltaRat) {
        self.stats_pivots += 1;
        let row = self.rows[b as usize].take().unwrap();
        for u in row.cols.keys() {
            self.col_occurs[*u as usize].remove(&b);
        }
        let a = row.cols.get(&nb).unwrap().clone();
        // b = sum(cols) ; solve for nb: nb = (b - sum(cols without nb)) / a
        let mut new_cols: HashMap<TVar, Rat> = HashMap::new();
        new_cols.insert(b, a.recip());
        for (u, c) in &row.cols {
            if *u != nb {
                new_cols.insert(*u, -&(c / &a));
            }
        }

        // Value updates are incremental: nb moves by theta, and every
        // basic row mentioning nb shifts by its coefficient times theta.
        let theta = (&target - &self.beta[b as usize]).scaled(&a.recip());
        let new_nb_val = &self.beta[nb as usize] + &theta;
        self.beta[b as usize] = target;
        self.beta[nb as usize] = new_nb_val;

        self.suspect.insert(nb);
        self.stats_pivot_ops += self.col_occurs[nb as usize].len() as u64 * row.cols.len() as u64;
        let dependents: Vec<TVar> = self.col_occurs[nb as usize].keys().copied().collect();
        for d in dependents {
            let mut drow = self.rows[d as usize].take().unwrap();
            let coef = drow.cols.remove(&nb).unwrap();
            self.col_occurs[nb as usize].remove(&d);
            if !theta.value.is_zero() || !theta.infinitesimal.is_zero() {
                let shift = theta.scaled(&coef);
                self.beta[d as usize] = &self.beta[d as usize] + &shift;
                self.suspect.insert(d);
            }
            for (u, c) in &new_cols {
                let addition = c * &coef;
                let entry = drow.cols.entry(*u).or_insert_with(Rat::zero);
                *entry = &*entry + &addition;
                if entry.is_zero() {
                    drow.cols.remove(u);
                    self.col_occurs[*u as usize].remove(&d);
                } else {
                    self.col_occurs[*u as usize].insert(d, ());
                }
            }
            self.rows[d as usize] = Some(drow);
        }

        for u in new_cols.keys() {
            self.col_occurs[*u as usize].insert(nb, ());
        }
        self.rows[nb as usize] = Some(Row { cols: new_cols });
    }

    /// Concrete rational model after a successful check.
    pub fn model(&self) -> Vec<Rat> {
        // Find a delta small enough for all strict slack.
        let mut delta = Rat::one();
        for v in 0..self.n_vars as usize {
            if let Some(l) = &self.lower[v] {
                let b = &self.beta[v];
                // need: b.value + b.inf*d >= l.value + l.inf*d
                if b.value > l.value.value && b.infinitesimal < l.value.infinitesimal {
                    let limit =
                        &(&b.value - &l.value.value) / &(&l.value.infinitesimal - &b.infinitesimal);
                    if limit < delta {
                        delta = limit;
                    }
                }
            }
            if let Some(u) = &self.upper[v] {
                let b = &self.beta[v];
                if b.value < u.value.value && b.infinitesimal > u.value.infinitesimal {
                    let limit =
                        &(&u.value.value - &b.value) / &(&b.infinitesimal - &u.value.infinitesimal);
                    if limit < delta {
                        delta = limit;
                    }
                }
            }
        }
        let delta = &delta / &Rat::from_int(2);
        (0..self.n_vars as usize)
            .map(|v| self.beta[v].concretize(&delta))
            .collect()
    }
}

impl Default for Simplex {
    fn default() -> Self {
        Self::new()
    }
}

fn add_to(map: &mut HashMap<TVar, Rat>, v: TVar, c: &Rat) {
    let entry = map.entry(v).or_insert_with(Rat::zero);
    *entry = &*entry + c;
    if entry.is_zero() {
        map.remove(&v);
    }
}
