//! Decomposition of an annotated contract into basic paths: branch-free
//! sequences of atomic statements between cut-points (function entries and
//! exits, loop heads), with invariant annotations at both ends.
//!
//! Annotation rule: a public function entry/exit carries the transaction
//! invariant (the constructor entry carries true), internal functions carry
//! true at both ends, and a loop label carries that loop's invariant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lang::ast::{Contract, Function, LoopLabel, QueryMeta, Stmt, Visibility};
use crate::lang::types::VarTypes;
use crate::logic::{Formula, Term, Var, Width};
use crate::lower::Lower;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    FuncEntry(String),
    FuncExit(String),
    Loop(LoopLabel),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::FuncEntry(name) => write!(f, "entry_{name}"),
            Label::FuncExit(name) => write!(f, "exit_{name}"),
            Label::Loop(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicStmt {
    Assign { lhs: Var, rhs: Term },
    ArrAssign { map: Var, index: Term, value: Term },
    Assume(Formula),
    Assert(Formula, Option<QueryMeta>),
    Havoc(BTreeSet<String>),
}

impl fmt::Display for AtomicStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicStmt::Assign { lhs, rhs } => write!(f, "{lhs} := {rhs}"),
            AtomicStmt::ArrAssign { map, index, value } => {
                write!(f, "{map}[{index}] := {value}")
            }
            AtomicStmt::Assume(e) => write!(f, "assume({e})"),
            AtomicStmt::Assert(e, _) => write!(f, "assert({e})"),
            AtomicStmt::Havoc(vars) => {
                let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                write!(f, "havoc({})", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicPath {
    pub function: String,
    pub start: (Label, Formula),
    pub stmts: Vec<AtomicStmt>,
    pub end: (Label, Formula),
}

impl BasicPath {
    pub fn queries(&self) -> Vec<QueryMeta> {
        self.stmts
            .iter()
            .filter_map(|s| match s {
                AtomicStmt::Assert(_, Some(meta)) => Some(*meta),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let stmts: Vec<String> = self.stmts.iter().map(|s| s.to_string()).collect();
        format!(
            "(({}, {}), {}, ({}, {}))",
            self.start.0,
            self.start.1,
            if stmts.is_empty() { "<empty>".to_string() } else { stmts.join("; ") },
            self.end.0,
            self.end.1
        )
    }
}

/// Enumerate every basic path of the annotated contract. `mu` must be total
/// on the contract's loop labels. Deterministic: constructor first, then
/// functions in lexicographic name order; at conditionals the true branch
/// comes first.
pub fn build_paths(
    c: &Contract,
    psi: &Formula,
    mu: &BTreeMap<LoopLabel, Formula>,
    width: Width,
) -> Vec<BasicPath> {
    let mut out = Vec::new();
    let mut functions: Vec<&Function> = c.functions.iter().collect();
    functions.sort_by(|a, b| a.name.cmp(&b.name));
    build_function_paths(c, &c.ctor, psi, mu, width, &mut out);
    for f in functions {
        build_function_paths(c, f, psi, mu, width, &mut out);
    }
    out
}

struct Segment {
    start: (Label, Formula),
    stmts: Vec<AtomicStmt>,
}

fn build_function_paths(
    c: &Contract,
    f: &Function,
    psi: &Formula,
    mu: &BTreeMap<LoopLabel, Formula>,
    width: Width,
    out: &mut Vec<BasicPath>,
) {
    let types = VarTypes::for_function(c, f);
    let lower = Lower::new(&types, width);

    let (entry_inv, exit_inv) = if f.is_ctor {
        (Formula::True, psi.clone())
    } else {
        match f.visibility {
            Visibility::Public => (psi.clone(), psi.clone()),
            Visibility::Internal => (Formula::True, Formula::True),
        }
    };

    let entry = Segment {
        start: (Label::FuncEntry(f.name.clone()), entry_inv),
        stmts: Vec::new(),
    };
    let open = walk(&f.body, vec![entry], f, mu, &lower, out);
    for seg in open {
        out.push(BasicPath {
            function: f.name.clone(),
            start: seg.start,
            stmts: seg.stmts,
            end: (Label::FuncExit(f.name.clone()), exit_inv.clone()),
        });
    }
}

fn walk(
    stmts: &[Stmt],
    mut open: Vec<Segment>,
    f: &Function,
    mu: &BTreeMap<LoopLabel, Formula>,
    lower: &Lower,
    out: &mut Vec<BasicPath>,
) -> Vec<Segment> {
    for stmt in stmts {
        match stmt {
            Stmt::Assign { name, value, .. } => {
                let atomic = AtomicStmt::Assign { lhs: lower.var(name), rhs: lower.term(value) };
                for seg in &mut open {
                    seg.stmts.push(atomic.clone());
                }
            }
            Stmt::MapAssign { map, index, value, .. } => {
                let atomic = AtomicStmt::ArrAssign {
                    map: lower.var(map),
                    index: lower.term(index),
                    value: lower.term(value),
                };
                for seg in &mut open {
                    seg.stmts.push(atomic.clone());
                }
            }
            Stmt::Assume(e) => {
                let atomic = AtomicStmt::Assume(lower.formula(e));
                for seg in &mut open {
                    seg.stmts.push(atomic.clone());
                }
            }
            Stmt::Assert(e, meta) => {
                let atomic = AtomicStmt::Assert(lower.formula(e), *meta);
                for seg in &mut open {
                    seg.stmts.push(atomic.clone());
                }
            }
            Stmt::Havoc { vars } => {
                let atomic = AtomicStmt::Havoc(vars.clone());
                for seg in &mut open {
                    seg.stmts.push(atomic.clone());
                }
            }
            Stmt::If(cond, then_branch, else_branch) => {
                let cond_f = lower.formula(cond);
                let mut then_open = Vec::new();
                let mut else_open = Vec::new();
                for seg in open {
                    let mut t = Segment { start: seg.start.clone(), stmts: seg.stmts.clone() };
                    t.stmts.push(AtomicStmt::Assume(cond_f.clone()));
                    then_open.push(t);
                    let mut e = Segment { start: seg.start, stmts: seg.stmts };
                    e.stmts.push(AtomicStmt::Assume(cond_f.negate()));
                    else_open.push(e);
                }
                let mut joined = walk(then_branch, then_open, f, mu, lower, out);
                joined.extend(walk(else_branch, else_open, f, mu, lower, out));
                open = joined;
            }
            Stmt::While { label, cond, body } => {
                let inv = mu
                    .get(label)
                    .unwrap_or_else(|| panic!("loop invariant map not total: missing {label}"))
                    .clone();
                let head = (Label::Loop(*label), inv);
                // paths reaching the loop head
                for seg in open {
                    out.push(BasicPath {
                        function: f.name.clone(),
                        start: seg.start,
                        stmts: seg.stmts,
                        end: head.clone(),
                    });
                }
                let cond_f = lower.formula(cond);
                // body iteration paths: head -> ... -> head
                let body_entry = Segment {
                    start: head.clone(),
                    stmts: vec![AtomicStmt::Assume(cond_f.clone())],
                };
                let body_open = walk(body, vec![body_entry], f, mu, lower, out);
                for seg in body_open {
                    out.push(BasicPath {
                        function: f.name.clone(),
                        start: seg.start,
                        stmts: seg.stmts,
                        end: head.clone(),
                    });
                }
                // continuation after the loop
                open = vec![Segment {
                    start: head,
                    stmts: vec![AtomicStmt::Assume(cond_f.negate())],
                }];
            }
            Stmt::Call { .. } | Stmt::ExtCall { .. } => {
                panic!("call statement survived inlining; run inline_calls first")
            }
        }
    }
    open
}
