//! Candidate-invariant generation: the refinement relation over atomic
//! predicates, its transaction/loop instantiations, and the workset.
//!
//! Candidates are conjunctions of atoms of the forms x=y, x>=y, x=n, x>=n,
//! x<=n and sum(x)=e; nothing disjunctive, quantified, non-linear or
//! compound. Atom lists are kept sorted so syntactic equality doubles as
//! the canonical form.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::basicpath::{AtomicStmt, BasicPath, Label};
use crate::lang::ast::{Contract, Expr, LoopLabel, Stmt, Type};
use crate::logic::{Const, Formula, Rel, Sort, Term, Var, Width};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateInv {
    psi: Vec<Formula>,
    mu: BTreeMap<LoopLabel, Vec<Formula>>,
}

impl CandidateInv {
    /// (true, fun l -> true)
    pub fn trivial(labels: &[LoopLabel]) -> Self {
        CandidateInv {
            psi: Vec::new(),
            mu: labels.iter().map(|l| (*l, Vec::new())).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.psi.len() + self.mu.values().map(|v| v.len()).sum::<usize>()
    }

    pub fn psi_atoms(&self) -> &[Formula] {
        &self.psi
    }

    pub fn mu_atoms(&self, label: LoopLabel) -> &[Formula] {
        self.mu.get(&label).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn psi_formula(&self) -> Formula {
        Formula::and(self.psi.clone())
    }

    pub fn mu_formulas(&self) -> BTreeMap<LoopLabel, Formula> {
        self.mu.iter().map(|(l, atoms)| (*l, Formula::and(atoms.clone()))).collect()
    }

    pub fn with_psi_atom(&self, atom: Formula) -> Self {
        let mut next = self.clone();
        insert_sorted(&mut next.psi, atom);
        next
    }

    pub fn with_mu_atom(&self, label: LoopLabel, atom: Formula) -> Self {
        let mut next = self.clone();
        insert_sorted(next.mu.entry(label).or_default(), atom);
        next
    }

    /// Pointwise conjunction with an inductive candidate (workset
    /// strengthening).
    pub fn conjoin(&self, other: &CandidateInv) -> Self {
        let mut next = self.clone();
        for atom in &other.psi {
            insert_sorted(&mut next.psi, atom.clone());
        }
        for (label, atoms) in &other.mu {
            let slot = next.mu.entry(*label).or_default();
            for atom in atoms {
                insert_sorted(slot, atom.clone());
            }
        }
        next
    }
}

fn insert_sorted(atoms: &mut Vec<Formula>, atom: Formula) {
    if let Err(pos) = atoms.binary_search(&atom) {
        atoms.insert(pos, atom);
    }
}

impl std::fmt::Display for CandidateInv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.psi_formula())?;
        for (l, atoms) in &self.mu {
            write!(f, ", {l} -> {}", Formula::and(atoms.clone()))?;
        }
        write!(f, ")")
    }
}

/// Fixed ingredients for pool construction over one contract.
#[derive(Debug, Clone)]
pub struct GenCtx {
    pub globals: BTreeSet<Var>,
    pub ctor_consts: BTreeSet<Const>,
    pub width: Width,
}

impl GenCtx {
    pub fn new(c: &Contract, width: Width) -> Self {
        let globals = c
            .globals
            .iter()
            .map(|g| {
                let sort = match g.ty {
                    Type::UInt | Type::Bool => Sort::UInt,
                    Type::Address => Sort::Addr,
                    Type::Mapping => Sort::Map,
                };
                Var { name: g.name.clone(), version: 0, sort }
            })
            .collect();
        let mut ctor_consts = BTreeSet::new();
        collect_stmt_literals(&c.ctor.body, width, &mut ctor_consts);
        GenCtx { globals, ctor_consts, width }
    }
}

fn collect_stmt_literals(stmts: &[Stmt], width: Width, out: &mut BTreeSet<Const>) {
    for s in stmts {
        match s {
            Stmt::Assign { value, .. } => collect_expr_literals(value, width, out),
            Stmt::MapAssign { index, value, .. } => {
                collect_expr_literals(index, width, out);
                collect_expr_literals(value, width, out);
            }
            Stmt::Assume(e) | Stmt::Assert(e, _) => collect_expr_literals(e, width, out),
            Stmt::If(cond, t, el) => {
                collect_expr_literals(cond, width, out);
                collect_stmt_literals(t, width, out);
                collect_stmt_literals(el, width, out);
            }
            Stmt::While { cond, body, .. } => {
                collect_expr_literals(cond, width, out);
                collect_stmt_literals(body, width, out);
            }
            Stmt::Call { args, .. } | Stmt::ExtCall { args, .. } => {
                args.iter().for_each(|a| collect_expr_literals(a, width, out))
            }
            Stmt::Havoc { .. } => {}
        }
    }
}

fn collect_expr_literals(e: &Expr, width: Width, out: &mut BTreeSet<Const>) {
    match e {
        Expr::Num(n, _) => {
            out.insert(Const::new(n.clone(), width));
        }
        Expr::Bool(..) | Expr::Var(..) | Expr::MsgSender(_) | Expr::MsgValue(_) => {}
        Expr::Index(_, i, _) => collect_expr_literals(i, width, out),
        Expr::Arith(_, a, b, _) | Expr::Cmp(_, a, b, _) => {
            collect_expr_literals(a, width, out);
            collect_expr_literals(b, width, out);
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            collect_expr_literals(a, width, out);
            collect_expr_literals(b, width, out);
        }
        Expr::Not(a) => collect_expr_literals(a, width, out),
    }
}

fn collect_consts(stmts: &[AtomicStmt], out: &mut BTreeSet<Const>) {
    for s in stmts {
        match s {
            AtomicStmt::Assign { rhs, .. } => collect_term_consts(rhs, out),
            AtomicStmt::ArrAssign { index, value, .. } => {
                collect_term_consts(index, out);
                collect_term_consts(value, out);
            }
            AtomicStmt::Assume(f) | AtomicStmt::Assert(f, _) => {
                collect_formula_consts(f, out);
            }
            AtomicStmt::Havoc(_) => {}
        }
    }
}

fn collect_term_consts(t: &Term, out: &mut BTreeSet<Const>) {
    match t {
        Term::Const(c) => {
            out.insert(c.clone());
        }
        Term::Var(_) => {}
        Term::Bin(_, a, b) => {
            collect_term_consts(a, out);
            collect_term_consts(b, out);
        }
        Term::Select(a, i) => {
            collect_term_consts(a, out);
            collect_term_consts(i, out);
        }
        Term::Store(a, i, v) => {
            collect_term_consts(a, out);
            collect_term_consts(i, out);
            collect_term_consts(v, out);
        }
        Term::Sum(a) => collect_term_consts(a, out),
    }
}

fn collect_formula_consts(f: &Formula, out: &mut BTreeSet<Const>) {
    match f {
        Formula::Atom(_, a, b) => {
            collect_term_consts(a, out);
            collect_term_consts(b, out);
        }
        Formula::Not(inner) => collect_formula_consts(inner, out),
        Formula::And(parts) | Formula::Or(parts) => {
            parts.iter().for_each(|p| collect_formula_consts(p, out))
        }
        Formula::Implies(p, q) => {
            collect_formula_consts(p, out);
            collect_formula_consts(q, out);
        }
        _ => {}
    }
}

fn path_vars(path: &BasicPath) -> BTreeSet<Var> {
    let mut vars = BTreeSet::new();
    for s in &path.stmts {
        match s {
            AtomicStmt::Assign { lhs, rhs } => {
                vars.insert(lhs.clone());
                rhs.collect_vars(&mut vars);
            }
            AtomicStmt::ArrAssign { map, index, value } => {
                vars.insert(map.clone());
                index.collect_vars(&mut vars);
                value.collect_vars(&mut vars);
            }
            AtomicStmt::Assume(f) | AtomicStmt::Assert(f, _) => {
                vars.extend(f.free_vars().vars);
            }
            AtomicStmt::Havoc(_) => {}
        }
    }
    vars
}

fn path_consts(path: &BasicPath, width: Width) -> BTreeSet<Const> {
    let mut consts = BTreeSet::new();
    collect_consts(&path.stmts, &mut consts);
    // 0 and 1 are ubiquitous bounds
    consts.insert(Const::from_u64(0, width));
    consts.insert(Const::from_u64(1, width));
    consts
}

/// One-step refinements of a conjunction: phi /\ a for each pool atom `a`
/// not already present. Atom pool over variables X and constants C, in the
/// fixed form order x=y, x>=y, x=n, x>=n, x<=n, sum(x)=e.
pub fn refine(phi: &[Formula], xs: &BTreeSet<Var>, cs: &BTreeSet<Const>) -> Vec<Formula> {
    let scalars: Vec<&Var> =
        xs.iter().filter(|v| matches!(v.sort, Sort::UInt | Sort::Addr)).collect();
    let uints: Vec<&Var> = xs.iter().filter(|v| v.sort == Sort::UInt).collect();
    let maps: Vec<&Var> = xs.iter().filter(|v| v.sort == Sort::Map).collect();

    let mut pool = Vec::new();
    // x = y (same sort, one orientation)
    for (i, x) in scalars.iter().enumerate() {
        for y in scalars.iter().skip(i + 1) {
            if x.sort == y.sort {
                pool.push(Formula::atom(
                    Rel::Eq,
                    Term::Var((*x).clone()),
                    Term::Var((*y).clone()),
                ));
            }
        }
    }
    // x >= y (both orientations)
    for x in &uints {
        for y in &uints {
            if x != y {
                pool.push(Formula::atom(
                    Rel::Ge,
                    Term::Var((*x).clone()),
                    Term::Var((*y).clone()),
                ));
            }
        }
    }
    // x = n, x >= n, x <= n
    for rel in [Rel::Eq, Rel::Ge, Rel::Le] {
        for x in &uints {
            for n in cs.iter() {
                pool.push(Formula::atom(rel, Term::Var((*x).clone()), Term::Const(n.clone())));
            }
        }
    }
    // sum(x) = e with e a constant or a uint variable
    for m in &maps {
        for n in cs.iter() {
            pool.push(Formula::atom(
                Rel::Eq,
                Term::sum(Term::Var((*m).clone())),
                Term::Const(n.clone()),
            ));
        }
        for e in &uints {
            pool.push(Formula::atom(
                Rel::Eq,
                Term::sum(Term::Var((*m).clone())),
                Term::Var((*e).clone()),
            ));
        }
    }

    pool.retain(|a| !phi.contains(a));
    pool
}

/// Transaction-invariant refinement: pool over the contract's globals and
/// the constructor constants plus the path's own constants.
pub fn refine_t(psi: &[Formula], path: &BasicPath, ctx: &GenCtx) -> Vec<Formula> {
    let mut cs = ctx.ctor_consts.clone();
    cs.extend(path_consts(path, ctx.width));
    refine(psi, &ctx.globals, &cs)
}

/// Loop-invariant refinement: pool over the path's own variables and
/// constants.
pub fn refine_l(mu_l: &[Formula], path: &BasicPath, width: Width) -> Vec<Formula> {
    refine(mu_l, &path_vars(path), &path_consts(path, width))
}

/// New candidates from the unproven paths: one per loop-label refinement of
/// either endpoint, one per transaction refinement when the path touches a
/// function boundary.
pub fn generate(
    unproven: &[BasicPath],
    current: &CandidateInv,
    ctx: &GenCtx,
) -> Vec<CandidateInv> {
    let mut out = Vec::new();
    for path in unproven {
        let mut loop_labels: Vec<LoopLabel> = Vec::new();
        if let Label::Loop(l) = path.start.0 {
            loop_labels.push(l);
        }
        if let Label::Loop(l) = path.end.0 {
            if loop_labels != [l] {
                loop_labels.push(l);
            }
        }
        for l in loop_labels {
            for atom in refine_l(current.mu_atoms(l), path, ctx.width) {
                out.push(current.with_mu_atom(l, atom));
            }
        }
        let touches_boundary = matches!(path.start.0, Label::FuncEntry(_))
            || matches!(path.end.0, Label::FuncExit(_));
        if touches_boundary {
            for atom in refine_t(current.psi_atoms(), path, ctx) {
                out.push(current.with_psi_atom(atom));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Error)]
#[error("empty workset")]
pub struct EmptyWorkset;

/// Workset of pending candidates: smallest size first, FIFO on ties, with a
/// live cap and a seen-set so no canonical form is ever enqueued twice.
pub struct Workset {
    entries: BTreeMap<(usize, u64), CandidateInv>,
    next_seq: u64,
    cap: usize,
    max_atoms: usize,
    ever: HashSet<CandidateInv>,
}

impl Workset {
    pub fn new(cap: usize, max_atoms: usize) -> Self {
        Workset {
            entries: BTreeMap::new(),
            next_seq: 0,
            cap,
            max_atoms,
            ever: HashSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// False when rejected (seen before, over the atom cap, or workset full).
    pub fn push(&mut self, cand: CandidateInv) -> bool {
        if cand.size() > self.max_atoms {
            return false;
        }
        if self.ever.contains(&cand) {
            return false;
        }
        if self.entries.len() >= self.cap {
            return false;
        }
        self.ever.insert(cand.clone());
        self.entries.insert((cand.size(), self.next_seq), cand);
        self.next_seq += 1;
        true
    }

    /// Remove and return a candidate of minimal size (FIFO on ties).
    pub fn choose(&mut self) -> Result<CandidateInv, EmptyWorkset> {
        let key = *self.entries.keys().next().ok_or(EmptyWorkset)?;
        Ok(self.entries.remove(&key).unwrap())
    }

    /// Conjoin an inductive candidate onto every pending entry, keeping each
    /// entry's queue position; equal results collapse onto the earliest.
    pub fn strengthen(&mut self, inductive: &CandidateInv) {
        let old = std::mem::take(&mut self.entries);
        let mut seen_here: HashSet<CandidateInv> = HashSet::new();
        for ((_, seq), cand) in old {
            let merged = cand.conjoin(inductive);
            if seen_here.contains(&merged) {
                continue;
            }
            seen_here.insert(merged.clone());
            self.ever.insert(merged.clone());
            self.entries.insert((merged.size(), seq), merged);
        }
    }
}
