//! Strongest-postcondition transformer, per-path verification conditions,
//! and the validator that classifies a candidate invariant.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::basicpath::{build_paths, AtomicStmt, BasicPath};
use crate::lang::ast::{Contract, LoopLabel, QueryMeta};
use crate::lang::inline::havoc_summary;
use crate::logic::{Formula, Term, Width};
use crate::parallel::pmap;
use crate::solver::{Solver, SolverError, SolverVerdict};

/// Fresh-version allocator for one path: each application increments the
/// version of exactly the assigned variable; versions are never reused.
#[derive(Debug, Default)]
pub struct Versions {
    next: HashMap<String, u32>,
}

impl Versions {
    pub fn new() -> Self {
        Versions::default()
    }
    fn fresh(&mut self, name: &str) -> u32 {
        let slot = self.next.entry(name.to_string()).or_insert(1);
        let v = *slot;
        *slot += 1;
        v
    }
}

/// One sp step. Returns the new precondition and, for asserts, the safety
/// clause premise -> condition tagged with the query it guards.
fn sp_step(
    stmt: &AtomicStmt,
    pre: Formula,
    versions: &mut Versions,
) -> (Formula, Option<(Option<QueryMeta>, Formula)>) {
    match stmt {
        AtomicStmt::Assign { lhs, rhs } => {
            let prev = Term::Var(lhs.at_version(versions.fresh(&lhs.name)));
            let renamed_pre = pre.subst(lhs, &prev);
            let renamed_rhs = rhs.subst(lhs, &prev);
            let eq = Formula::atom(crate::logic::Rel::Eq, Term::Var(lhs.clone()), renamed_rhs);
            (Formula::and(vec![renamed_pre, eq]), None)
        }
        AtomicStmt::ArrAssign { map, index, value } => {
            debug_assert!(
                !term_mentions(index, map),
                "map assignment index reads the assigned map"
            );
            let prev = Term::Var(map.at_version(versions.fresh(&map.name)));
            let renamed_pre = pre.subst(map, &prev);
            let renamed_value = value.subst(map, &prev);
            let store = Term::store(prev, index.clone(), renamed_value);
            let eq = Formula::atom(crate::logic::Rel::Eq, Term::Var(map.clone()), store);
            (Formula::and(vec![renamed_pre, eq]), None)
        }
        AtomicStmt::Assume(e) => (Formula::and(vec![pre, e.clone()]), None),
        AtomicStmt::Assert(e, meta) => {
            let clause = Formula::implies(pre.clone(), e.clone());
            (pre, Some((*meta, clause)))
        }
        AtomicStmt::Havoc(vars) => (havoc_summary(&pre, vars), None),
    }
}

fn term_mentions(t: &Term, v: &crate::logic::Var) -> bool {
    let mut vars = BTreeSet::new();
    t.collect_vars(&mut vars);
    vars.contains(v)
}

/// The strongest-postcondition transformer in its (precondition,
/// accumulated-safety) form.
pub fn sp(
    stmt: &AtomicStmt,
    state: (Formula, Formula),
    versions: &mut Versions,
) -> (Formula, Formula) {
    let (pre, obligation) = state;
    let (pre2, clause) = sp_step(stmt, pre, versions);
    let obligation2 = match clause {
        Some((_, c)) => Formula::and(vec![obligation, c]),
        None => obligation,
    };
    (pre2, obligation2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vc {
    /// premise-after-the-path -> end annotation
    pub inductiveness: Formula,
    /// one clause per assert on the path, in path order
    pub safety: Vec<(Option<QueryMeta>, Formula)>,
}

pub fn gen_vc(path: &BasicPath) -> Vc {
    let mut versions = Versions::new();
    let mut pre = path.start.1.clone();
    let mut safety = Vec::new();
    for stmt in &path.stmts {
        let (next, clause) = sp_step(stmt, pre, &mut versions);
        pre = next;
        if let Some(c) = clause {
            safety.push(c);
        }
    }
    Vc { inductiveness: Formula::implies(pre, path.end.1.clone()), safety }
}

#[derive(Debug, Clone)]
pub struct ValidationResult {
    pub inductive: bool,
    /// basic paths whose VCs are invalid; inductiveness failures when not
    /// inductive, otherwise paths with some failed safety clause
    pub unproven: Vec<BasicPath>,
    /// queries behind the failed safety clauses (empty when not inductive:
    /// safety checking is deferred until the candidate is inductive)
    pub failed_queries: BTreeSet<QueryMeta>,
    pub paths_checked: usize,
}

/// Build all basic paths for the candidate (psi, mu), generate VCs and check
/// them. Inductiveness first: if any inductiveness VC fails, safety is not
/// examined. Timeouts and solver unknowns count as invalid. VCs of distinct
/// paths are checked concurrently; the merge is order-stable.
pub fn validate(
    c: &Contract,
    psi: &Formula,
    mu: &BTreeMap<LoopLabel, Formula>,
    width: Width,
    solver: &Solver,
) -> Result<ValidationResult, SolverError> {
    let paths = build_paths(c, psi, mu, width);
    let vcs: Vec<Vc> = paths.iter().map(gen_vc).collect();

    let inductive_verdicts: Vec<Result<SolverVerdict, SolverError>> =
        pmap(&vcs, |vc| solver.check_validity(&vc.inductiveness));
    let mut failing_paths = Vec::new();
    for (i, verdict) in inductive_verdicts.into_iter().enumerate() {
        if verdict? != SolverVerdict::Valid {
            failing_paths.push(paths[i].clone());
        }
    }
    if !failing_paths.is_empty() {
        return Ok(ValidationResult {
            inductive: false,
            unproven: failing_paths,
            failed_queries: BTreeSet::new(),
            paths_checked: paths.len(),
        });
    }

    // one solver query per safety clause, so failures are exact per query
    let clause_jobs: Vec<(usize, Option<QueryMeta>, Formula)> = vcs
        .iter()
        .enumerate()
        .flat_map(|(i, vc)| {
            vc.safety.iter().map(move |(meta, clause)| (i, *meta, clause.clone()))
        })
        .collect();
    let clause_verdicts: Vec<Result<SolverVerdict, SolverError>> =
        pmap(&clause_jobs, |(_, _, clause)| solver.check_validity(clause));

    let mut unproven_idx = BTreeSet::new();
    let mut failed_queries = BTreeSet::new();
    for ((path_idx, meta, _), verdict) in clause_jobs.iter().zip(clause_verdicts) {
        if verdict? != SolverVerdict::Valid {
            unproven_idx.insert(*path_idx);
            if let Some(meta) = meta {
                failed_queries.insert(*meta);
            }
        }
    }
    let unproven: Vec<BasicPath> =
        unproven_idx.into_iter().map(|i| paths[i].clone()).collect();
    Ok(ValidationResult {
        inductive: true,
        unproven,
        failed_queries,
        paths_checked: paths.len(),
    })
}
