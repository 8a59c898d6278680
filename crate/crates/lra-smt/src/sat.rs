//! CDCL SAT core with lazy theory integration (DPLL(T)).
//!
//! Watched literals, first-UIP learning, activity-based decisions with
//! phase saving, and Luby restarts. Theory atoms are asserted into the
//! simplex as their literals are assigned; theory conflicts come back as
//! learned clauses over the asserting literals.

use crate::cnf::{lit, lit_neg, lit_positive, lit_var, AtomBinding, BVar, Builder, Lit};
use crate::rational::DeltaRat;
use crate::simplex::{AssertResult, CheckResult, Simplex};
use num_rational::BigRational;
use std::collections::HashMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SatOutcome {
    Sat(Model),
    Unsat,
    Unknown,
}

/// Assignment extracted after a successful search.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub bools: HashMap<String, bool>,
    pub reals: HashMap<String, BigRational>,
}

pub struct SatSolver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assigns: Vec<LBool>,
    levels: Vec<u32>,
    reasons: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    theory_qhead: usize,
    simplex_marks: Vec<usize>,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    heap: Vec<BVar>,
    heap_pos: Vec<usize>,
    atom_of_var: Vec<Option<AtomBinding>>,
    simplex: Simplex,
    n_conflicts: u64,
    pub stats_decisions: u64,
    pub stats_conflicts: u64,
    pub stats_propagations: u64,
}

const VAR_DECAY: f64 = 0.95;

impl SatSolver {
    pub fn from_builder(builder: Builder) -> (Self, HashMap<String, BVar>, HashMap<String, u32>) {
        let n = builder.n_vars as usize;
        let bool_names = builder.bool_var_names().clone();
        let real_names: HashMap<String, u32> = builder.real_vars.clone();
        let mut solver = SatSolver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![LBool::Undef; n],
            levels: vec![0; n],
            reasons: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            theory_qhead: 0,
            simplex_marks: Vec::new(),
            activity: vec![0.0; n],
            var_inc: 1.0,
            phase: vec![false; n],
            heap: Vec::new(),
            heap_pos: vec![usize::MAX; n],
            atom_of_var: builder.atom_of_var,
            simplex: builder.simplex,
            n_conflicts: 0,
            stats_decisions: 0,
            stats_conflicts: 0,
            stats_propagations: 0,
        };
        for v in 0..n as BVar {
            solver.heap_insert(v);
        }
        let mut ok = true;
        for c in builder.clauses {
            if !solver.add_clause(c) {
                ok = false;
            }
        }
        if !ok {
            solver.clauses.push(Vec::new());
        }
        (solver, bool_names, real_names)
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assigns[lit_var(l) as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if lit_positive(l) {
                    LBool::True
                } else {
                    LBool::False
                }
            }
            LBool::False => {
                if lit_positive(l) {
                    LBool::False
                } else {
                    LBool::True
                }
            }
        }
    }

    fn add_clause(&mut self, mut lits: Vec<Lit>) -> bool {
        lits.sort_unstable();
        lits.dedup();
        // Tautology?
        for w in lits.windows(2) {
            if w[0] == lit_neg(w[1]) {
                return true;
            }
        }
        match lits.len() {
            0 => false,
            1 => match self.value(lits[0]) {
                LBool::True => true,
                LBool::False => false,
                LBool::Undef => {
                    self.enqueue(lits[0], None);
                    true
                }
            },
            _ => {
                let idx = self.clauses.len() as u32;
                self.watches[lits[0] as usize ^ 1].push(idx);
                self.watches[lits[1] as usize ^ 1].push(idx);
                self.clauses.push(lits);
                true
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = lit_var(l) as usize;
        debug_assert!(self.assigns[v] == LBool::Undef);
        self.assigns[v] = if lit_positive(l) {
            LBool::True
        } else {
            LBool::False
        };
        self.levels[v] = self.decision_level();
        self.reasons[v] = reason;
        self.trail.push(l);
    }

    /// Watched-literal Boolean constraint propagation.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats_propagations += 1;
            let mut i = 0;
            let mut watchers = std::mem::take(&mut self.watches[p as usize]);
            while i < watchers.len() {
                let cref = watchers[i];
                let mut satisfied_or_moved = false;
                {
                    let clause = &mut self.clauses[cref as usize];
                    // Ensure the false literal (neg p) is at position 1.
                    let np = lit_neg(p);
                    if clause[0] == np {
                        clause.swap(0, 1);
                    }
                }
                let first = self.clauses[cref as usize][0];
                if self.value(first) == LBool::True {
                    i += 1;
                    continue;
                }
                // Find a new literal to watch.
                let len = self.clauses[cref as usize].len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cref as usize][k];
                    if self.value(lk) != LBool::False {
                        self.clauses[cref as usize].swap(1, k);
                        self.watches[lk as usize ^ 1].push(cref);
                        watchers.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    satisfied_or_moved = true;
                }
                if !satisfied_or_moved {
                    // Unit or conflicting.
                    if self.value(first) == LBool::False {
                        self.watches[p as usize] = watchers;
                        return Some(cref);
                    }
                    self.enqueue(first, Some(cref));
                    i += 1;
                }
            }
            self.watches[p as usize] = watchers;
        }
        None
    }

    /// Feed newly assigned theory atoms to the simplex.
    fn theory_propagate(&mut self) -> Option<Vec<Lit>> {
        let mut asserted_any = false;
        while self.theory_qhead < self.trail.len() {
            let l = self.trail[self.theory_qhead];
            self.theory_qhead += 1;
            let v = lit_var(l) as usize;
            let binding = match &self.atom_of_var[v] {
                None => continue,
                Some(b) => b.clone(),
            };
            asserted_any = true;
            let tag = l as i32;
            let result = if lit_positive(l) {
                // tvar <= bound (strict: <)
                let val = if binding.strict {
                    DeltaRat::just_below(binding.bound.clone())
                } else {
                    DeltaRat::from_rat(binding.bound.clone())
                };
                self.simplex.assert_upper(binding.tvar, val, tag)
            } else {
                // not (tvar <= bound) : tvar > bound (strict negation: >=)
                let val = if binding.strict {
                    DeltaRat::from_rat(binding.bound.clone())
                } else {
                    DeltaRat::just_above(binding.bound.clone())
                };
                self.simplex.assert_lower(binding.tvar, val, tag)
            };
            if let AssertResult::Conflict(tags) = result {
                return Some(tags.into_iter().map(|t| lit_neg(t as Lit)).collect());
            }
        }
        if asserted_any {
            if let CheckResult::Conflict(tags) = self.simplex.check() {
                return Some(tags.into_iter().map(|t| lit_neg(t as Lit)).collect());
            }
        }
        None
    }

    fn bump(&mut self, v: BVar) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        if self.heap_pos[v as usize] != usize::MAX {
            self.sift_up(self.heap_pos[v as usize]);
        }
    }

    // ---- activity-ordered variable heap ----

    fn heap_less(&self, a: BVar, b: BVar) -> bool {
        let (aa, ab) = (self.activity[a as usize], self.activity[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn heap_insert(&mut self, v: BVar) {
        if self.heap_pos[v as usize] != usize::MAX {
            return;
        }
        self.heap_pos[v as usize] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1);
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap_less(self.heap[i], self.heap[parent]) {
                self.heap.swap(i, parent);
                self.heap_pos[self.heap[i] as usize] = i;
                self.heap_pos[self.heap[parent] as usize] = parent;
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && self.heap_less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.heap_less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.heap.swap(i, best);
            self.heap_pos[self.heap[i] as usize] = i;
            self.heap_pos[self.heap[best] as usize] = best;
            i = best;
        }
    }

    fn heap_pop(&mut self) -> Option<BVar> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        self.heap_pos[top as usize] = usize::MAX;
        let last = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.heap_pos[last as usize] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    /// First-UIP conflict analysis. Returns (learned clause, backjump level).
    fn analyze(&mut self, conflict: &[Lit]) -> (Vec<Lit>, u32) {
        let mut seen = vec![false; self.assigns.len()];
        let mut learnt: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut p: Option<Lit>;
        let mut reason_lits: Vec<Lit> = conflict.to_vec();
        let mut index = self.trail.len();

        loop {
            for &q in &reason_lits {
                let v = lit_var(q) as usize;
                if !seen[v] && self.levels[v] > 0 {
                    seen[v] = true;
                    self.bump(v as BVar);
                    if self.levels[v] == self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Walk the trail backwards to the next marked literal.
            loop {
                index -= 1;
                let l = self.trail[index];
                if seen[lit_var(l) as usize] {
                    p = Some(l);
                    break;
                }
            }
            let pv = lit_var(p.unwrap()) as usize;
            seen[pv] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            reason_lits = match self.reasons[pv] {
                Some(cref) => self.clauses[cref as usize]
                    .iter()
                    .copied()
                    .filter(|l| lit_var(*l) as usize != pv)
                    .collect(),
                None => Vec::new(),
            };
        }
        learnt.push(lit_neg(p.unwrap()));
        let n = learnt.len();
        learnt.swap(0, n - 1);
        // Backjump level: highest level among the remaining literals.
        let bl = learnt[1..]
            .iter()
            .map(|l| self.levels[lit_var(*l) as usize])
            .max()
            .unwrap_or(0);
        (learnt, bl)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = lit_var(l) as usize;
            self.phase[v] = lit_positive(l);
            self.assigns[v] = LBool::Undef;
            self.reasons[v] = None;
            self.heap_insert(v as BVar);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        let mark = self.simplex_marks[level as usize];
        self.simplex.backtrack(mark);
        self.simplex_marks.truncate(level as usize);
        self.qhead = lim;
        self.theory_qhead = lim.min(self.theory_qhead);
    }

    fn decide(&mut self) -> bool {
        loop {
            match self.heap_pop() {
                None => return false,
                Some(v) => {
                    if self.assigns[v as usize] != LBool::Undef {
                        continue;
                    }
                    self.stats_decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.simplex_marks.push(self.simplex.mark());
                    let polarity = self.phase[v as usize];
                    self.enqueue(lit(v, polarity), None);
                    return true;
                }
            }
        }
    }

    fn handle_conflict(&mut self, conflict: Vec<Lit>) -> bool {
        self.stats_conflicts += 1;
        self.n_conflicts += 1;
        self.var_inc /= VAR_DECAY;
        // Theory conflicts may involve only literals from earlier levels;
        // analysis requires the conflict to sit at the current level.
        let max_level = conflict
            .iter()
            .map(|l| self.levels[lit_var(*l) as usize])
            .max()
            .unwrap_or(0);
        if max_level == 0 {
            return false;
        }
        self.cancel_until(max_level);
        let (learnt, bl) = self.analyze(&conflict);
        self.cancel_until(bl);
        if learnt.len() == 1 {
            if self.value(learnt[0]) == LBool::False {
                return false;
            }
            if self.value(learnt[0]) == LBool::Undef {
                self.enqueue(learnt[0], None);
            }
        } else {
            let idx = self.clauses.len() as u32;
            self.watches[learnt[0] as usize ^ 1].push(idx);
            self.watches[learnt[1] as usize ^ 1].push(idx);
            let asserting = learnt[0];
            self.clauses.push(learnt);
            self.enqueue(asserting, Some(idx));
        }
        true
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn solve(
        &mut self,
        bool_names: &HashMap<String, BVar>,
        real_names: &HashMap<String, u32>,
        deadline: Option<Instant>,
    ) -> SatOutcome {
        if self.clauses.iter().any(|c| c.is_empty()) {
            return SatOutcome::Unsat;
        }
        let mut luby_index = 0u32;
        let mut conflicts_at_restart = self.n_conflicts;
        let mut restart_budget = 512 * luby(luby_index);
        loop {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return SatOutcome::Unknown;
                }
            }
            let conflict = self.propagate();
            if let Some(cref) = conflict {
                let lits = self.clauses[cref as usize].clone();
                if !self.handle_conflict(lits) {
                    return SatOutcome::Unsat;
                }
                continue;
            }
            if let Some(tconf) = self.theory_propagate() {
                if !self.handle_conflict(tconf) {
                    return SatOutcome::Unsat;
                }
                continue;
            }
            if self.n_conflicts - conflicts_at_restart >= restart_budget {
                luby_index += 1;
                conflicts_at_restart = self.n_conflicts;
                restart_budget = 512 * luby(luby_index);
                self.cancel_until(0);
                continue;
            }
            if !self.decide() {
                // Complete assignment, theory-consistent.
                if std::env::var_os("LRA_SMT_STATS").is_some() {
                    eprintln!(
                        "; stats: decisions={} conflicts={} propagations={} clauses={} asserts={} checks={} pivots={}",
                        self.stats_decisions,
                        self.stats_conflicts,
                        self.stats_propagations,
                        self.clauses.len(),
                        self.simplex.stats_asserts,
                        self.simplex.stats_checks,
                        self.simplex.stats_pivots
                    );
                    eprintln!(
                        "; simplex: updates={} update_ops={} pivot_ops={}",
                        self.simplex.stats_updates,
                        self.simplex.stats_update_ops,
                        self.simplex.stats_pivot_ops
                    );
                }
                return SatOutcome::Sat(self.extract_model(bool_names, real_names));
            }
        }
    }

    fn extract_model(
        &self,
        bool_names: &HashMap<String, BVar>,
        real_names: &HashMap<String, u32>,
    ) -> Model {
        let rvals = self.simplex.model();
        let mut model = Model::default();
        for (name, v) in bool_names {
            let b = matches!(self.assigns[*v as usize], LBool::True);
            model.bools.insert(name.clone(), b);
        }
        for (name, tv) in real_names {
            model
                .reals
                .insert(name.clone(), rvals[*tv as usize].to_big());
        }
        model
    }
}

/// Luby sequence: 1,1,2,1,1,2,4,1,...
fn luby(index: u32) -> u64 {
    let i = index as u64 + 1;
    let mut k = 1u32;
    while (1u64 << k) - 1 < i {
        k += 1;
    }
    if i == (1u64 << k) - 1 {
        1u64 << (k - 1)
    } else {
        // recurse on i - 2^(k-1) + 1, handed back in zero-based form
        luby((i - (1u64 << (k - 1))) as u32)
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn luby_prefix() {
        let expect = [1u64, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
        let got: Vec<u64> = (0..15).map(super::luby).collect();
        assert_eq!(got, expect);
    }
}
