// SPDX-License-Identifier: Apache-2.0

//! Conflict-driven clause-learning SAT solver.
//!
//! Two watched literals per clause, first-UIP learning with local
//! minimization, Luby restarts and LBD-based learnt clause reduction.
//! Branching takes the lowest-numbered unassigned variable and tries it
//! positive first, so runs are reproducible.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Lit(u32);

impl Lit {
    fn from_dimacs(x: i32) -> Lit {
        let v = x.unsigned_abs() - 1;
        Lit(v << 1 | u32::from(x < 0))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn neg(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    fn idx(self) -> usize {
        self.0 as usize
    }
}

const FALSE: u8 = 0;
const TRUE: u8 = 1;
const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;

#[inline]
fn value(assigns: &[u8], l: Lit) -> u8 {
    let v = assigns[l.var()];
    if v == UNDEF {
        UNDEF
    } else {
        v ^ u8::from(l.is_neg())
    }
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

/// Deadline and cooperative cancellation for one solve call.
#[derive(Clone, Copy, Default)]
pub struct Budget<'a> {
    pub deadline: Option<Instant>,
    pub cancel: Option<&'a AtomicBool>,
}

impl Budget<'_> {
    fn exhausted(&self) -> bool {
        self.cancel.is_some_and(|c| c.load(Ordering::Relaxed))
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// Model indexed by variable id minus one.
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnts: u64,
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    next_var: usize,
    seen: Vec<bool>,
    learnt_count: usize,
    max_learnts: usize,
    ok: bool,
    stats: SolverStats,
}

/// The i-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ...
fn luby(mut i: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            next_var: 0,
            seen: vec![false; num_vars],
            learnt_count: 0,
            max_learnts: 20_000,
            ok: true,
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var();
        self.assigns[v] = u8::from(!l.is_neg());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause of DIMACS literals. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, clause: &[i32]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut lits: Vec<Lit> = clause.iter().map(|&x| Lit::from_dimacs(x)).collect();
        assert!(lits.iter().all(|l| l.var() < self.num_vars()), "literal out of range");
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return true;
        }
        lits.retain(|&l| value(&self.assigns, l) != FALSE);
        if lits.iter().any(|&l| value(&self.assigns, l) == TRUE) {
            return true;
        }
        match lits.len() {
            0 => {
                self.ok = false;
            }
            1 => {
                self.enqueue(lits[0], NO_REASON);
                self.ok = self.propagate().is_none();
            }
            _ => {
                self.attach(Clause { lits, learnt: false, deleted: false, lbd: 0 });
            }
        }
        self.ok
    }

    fn attach(&mut self, c: Clause) -> u32 {
        let cref = self.clauses.len() as u32;
        let (a, b) = (c.lits[0], c.lits[1]);
        self.watches[a.neg().idx()].push(Watch { cref, blocker: b });
        self.watches[b.neg().idx()].push(Watch { cref, blocker: a });
        if c.learnt {
            self.learnt_count += 1;
        }
        self.clauses.push(c);
        cref
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for l in self.trail.drain(lim..) {
            let v = l.var();
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            if v < self.next_var {
                self.next_var = v;
            }
        }
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.neg();
            let mut ws = std::mem::take(&mut self.watches[p.idx()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if value(&self.assigns, w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let c = &mut self.clauses[w.cref as usize];
                if c.deleted {
                    continue;
                }
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                let nw = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && value(&self.assigns, first) == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.lits.len() {
                    if value(&self.assigns, c.lits[k]) != FALSE {
                        c.lits.swap(1, k);
                        self.watches[c.lits[1].neg().idx()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if value(&self.assigns, first) == FALSE {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[p.idx()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP analysis: learnt clause with the asserting literal first,
    /// and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let dl = self.decision_level();
        loop {
            let c = &self.clauses[confl as usize];
            let start = usize::from(p.is_some());
            for &q in &c.lits[start..] {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            confl = self.reason[lit.var()];
            self.seen[lit.var()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = p.expect("conflict at decision level").neg();

        // drop literals implied by the rest of the clause
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(k, &q)| {
                if k == 0 {
                    return true;
                }
                let r = self.reason[q.var()];
                if r == NO_REASON {
                    return true;
                }
                !self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|x| self.seen[x.var()] || self.level[x.var()] == 0)
            })
            .collect();
        for q in &learnt {
            self.seen[q.var()] = false;
        }
        let mut k = 0;
        learnt.retain(|_| {
            k += 1;
            keep[k - 1]
        });

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var()];
        }
        (learnt, bt)
    }

    fn lbd(&self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var()]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn locked(&self, cref: u32) -> bool {
        let c = &self.clauses[cref as usize];
        let l = c.lits[0];
        value(&self.assigns, l) == TRUE && self.reason[l.var()] == cref
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&c| {
                let cl = &self.clauses[c as usize];
                cl.learnt && !cl.deleted && cl.lbd > 2 && !self.locked(c)
            })
            .collect();
        cands.sort_by_key(|&c| {
            let cl = &self.clauses[c as usize];
            (std::cmp::Reverse(cl.lbd), std::cmp::Reverse(cl.lits.len()))
        });
        for &c in &cands[..cands.len() / 2] {
            let cl = &mut self.clauses[c as usize];
            cl.deleted = true;
            cl.lits = Vec::new();
            self.learnt_count -= 1;
        }
        self.max_learnts += self.max_learnts / 10;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while self.next_var < self.assigns.len() && self.assigns[self.next_var] != UNDEF {
            self.next_var += 1;
        }
        (self.next_var < self.assigns.len()).then(|| Lit((self.next_var as u32) << 1))
    }

    pub fn solve(&mut self, budget: &Budget) -> SolveResult {
        if !self.ok {
            return SolveResult::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveResult::Unsat;
        }
        let mut restart = 0u64;
        loop {
            let limit = luby(restart) * 100;
            match self.search(limit, budget) {
                Some(r) => {
                    if r == SolveResult::Unknown {
                        self.cancel_until(0);
                    }
                    return r;
                }
                None => {
                    restart += 1;
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                }
            }
        }
    }

    /// Runs until `conflict_limit` conflicts (None = restart requested).
    fn search(&mut self, conflict_limit: u64, budget: &Budget) -> Option<SolveResult> {
        let mut conflicts = 0u64;
        let mut ticks = 0u32;
        loop {
            ticks = ticks.wrapping_add(1);
            if ticks % 512 == 0 && budget.exhausted() {
                return Some(SolveResult::Unknown);
            }
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SolveResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.lbd(&learnt);
                    let first = learnt[0];
                    let cref = self.attach(Clause { lits: learnt, learnt: true, deleted: false, lbd });
                    self.enqueue(first, cref);
                }
                self.stats.learnts += 1;
            } else {
                if conflicts >= conflict_limit {
                    return None;
                }
                if self.learnt_count >= self.max_learnts + self.trail.len() {
                    self.reduce_db();
                }
                match self.pick_branch() {
                    None => {
                        let model = self.assigns.iter().map(|&v| v == TRUE).collect();
                        return Some(SolveResult::Sat(model));
                    }
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }
}

/// True iff `model` satisfies every clause.
pub fn satisfies(clauses: &[Vec<i32>], model: &[bool]) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&x| {
            let v = model[(x.unsigned_abs() - 1) as usize];
            if x > 0 {
                v
            } else {
                !v
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(n: usize, clauses: &[Vec<i32>]) -> SolveResult {
        let mut s = Solver::new(n);
        for c in clauses {
            s.add_clause(c);
        }
        s.solve(&Budget::default())
    }

    fn brute(n: usize, clauses: &[Vec<i32>]) -> bool {
        (0..1u32 << n).any(|m| {
            let model: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
            satisfies(clauses, &model)
        })
    }

    #[test]
    fn trivial_instances() {
        assert_eq!(run(1, &[vec![1]]), SolveResult::Sat(vec![true]));
        assert_eq!(run(1, &[vec![1], vec![-1]]), SolveResult::Unsat);
        assert_eq!(run(0, &[]), SolveResult::Sat(vec![]));
    }

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes
        let var = |p: i32, h: i32| p * 4 + h + 1;
        let mut cls = Vec::new();
        for p in 0..5 {
            cls.push((0..4).map(|h| var(p, h)).collect());
        }
        for h in 0..4 {
            for a in 0..5 {
                for b in 0..a {
                    cls.push(vec![-var(a, h), -var(b, h)]);
                }
            }
        }
        assert_eq!(run(20, &cls), SolveResult::Unsat);
    }

    #[test]
    fn random_3sat_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(3..=12);
            let m = rng.gen_range(1..=(5 * n));
            let cls: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..rng.gen_range(1..=3))
                        .map(|_| {
                            let v = rng.gen_range(1..=n as i32);
                            if rng.gen() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            match run(n, &cls) {
                SolveResult::Sat(model) => assert!(satisfies(&cls, &model)),
                SolveResult::Unsat => assert!(!brute(n, &cls), "claimed unsat: {cls:?}"),
                SolveResult::Unknown => unreachable!(),
            }
        }
    }

    #[test]
    fn incremental_blocking() {
        let mut s = Solver::new(3);
        s.add_clause(&[1, 2, 3]);
        let mut models = 0;
        while let SolveResult::Sat(m) = s.solve(&Budget::default()) {
            models += 1;
            let block: Vec<i32> = m.iter().enumerate().map(|(i, &b)| if b { -(i as i32 + 1) } else { i as i32 + 1 }).collect();
            s.add_clause(&block);
        }
        assert_eq!(models, 7);
    }

    #[test]
    fn cancelled_solve_is_unknown() {
        let flag = AtomicBool::new(true);
        let mut cls = Vec::new();
        let var = |p: i32, h: i32| p * 8 + h + 1;
        for p in 0..9 {
            cls.push((0..8).map(|h| var(p, h)).collect::<Vec<_>>());
        }
        for h in 0..8 {
            for a in 0..9 {
                for b in 0..a {
                    cls.push(vec![-var(a, h), -var(b, h)]);
                }
            }
        }
        let mut s = Solver::new(72);
        for c in &cls {
            s.add_clause(c);
        }
        assert_eq!(s.solve(&Budget { deadline: None, cancel: Some(&flag) }), SolveResult::Unknown);
    }
}
