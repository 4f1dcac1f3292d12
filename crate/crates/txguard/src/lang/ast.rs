//! Core contract language AST.
//!
//! `require(e)` is desugared to assume, `revert()` to assume(false), compound
//! assignments and `for` loops to their primitive forms, so the analyzable
//! tree is exactly: assignments, map assignments, assume, assert, if, while,
//! calls (removed by inlining) and havoc (introduced by inlining).

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;

use crate::logic::{BinOp, Rel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Type {
    UInt,
    Address,
    Bool,
    /// mapping(address => uint)
    Mapping,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::UInt => write!(f, "uint"),
            Type::Address => write!(f, "address"),
            Type::Bool => write!(f, "bool"),
            Type::Mapping => write!(f, "mapping(address => uint)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDecl {
    pub name: String,
    pub ty: Type,
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LoopLabel(pub u32);

impl fmt::Display for LoopLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryKind {
    AddOverflow,
    SubUnderflow,
    MulOverflow,
    DivByZero,
    AccessControl,
    User,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QueryKind::AddOverflow => "add-overflow",
            QueryKind::SubUnderflow => "sub-underflow",
            QueryKind::MulOverflow => "mul-overflow",
            QueryKind::DivByZero => "div-by-zero",
            QueryKind::AccessControl => "access-control",
            QueryKind::User => "user",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct QueryMeta {
    pub id: u32,
    pub kind: QueryKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(BigUint, Loc),
    Bool(bool, Loc),
    Var(String, Loc),
    MsgSender(Loc),
    MsgValue(Loc),
    /// mapping access m[e]
    Index(String, Box<Expr>, Loc),
    Arith(BinOp, Box<Expr>, Box<Expr>, Loc),
    Cmp(Rel, Box<Expr>, Box<Expr>, Loc),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn loc(&self) -> Loc {
        match self {
            Expr::Num(_, l)
            | Expr::Bool(_, l)
            | Expr::Var(_, l)
            | Expr::MsgSender(l)
            | Expr::MsgValue(l)
            | Expr::Index(_, _, l)
            | Expr::Arith(_, _, _, l)
            | Expr::Cmp(_, _, _, l) => *l,
            Expr::And(a, _) | Expr::Or(a, _) | Expr::Not(a) => a.loc(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign {
        name: String,
        value: Expr,
        loc: Loc,
    },
    MapAssign {
        map: String,
        index: Expr,
        value: Expr,
        loc: Loc,
    },
    Assume(Expr),
    Assert(Expr, Option<QueryMeta>),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While {
        label: LoopLabel,
        cond: Expr,
        body: Vec<Stmt>,
    },
    /// Intra-contract call; eliminated by inlining.
    Call {
        receiver: Option<String>,
        callee: String,
        args: Vec<Expr>,
        loc: Loc,
    },
    /// Call through an external object; only the receiver is affected.
    ExtCall {
        receiver: Option<String>,
        object: String,
        method: String,
        args: Vec<Expr>,
        loc: Loc,
    },
    /// Conservative summary of a non-inlined call: the named variables may
    /// have changed arbitrarily.
    Havoc { vars: BTreeSet<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub locals: Vec<(String, Type)>,
    pub body: Vec<Stmt>,
    pub visibility: Visibility,
    pub is_ctor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub name: String,
    pub globals: Vec<GlobalDecl>,
    pub ctor: Function,
    pub functions: Vec<Function>,
    /// Next free loop label, so later passes can mint fresh ones.
    pub next_label: u32,
}

impl Contract {
    pub fn global(&self, name: &str) -> Option<&GlobalDecl> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Constructor first, then the remaining functions.
    pub fn all_functions(&self) -> impl Iterator<Item = &Function> {
        std::iter::once(&self.ctor).chain(self.functions.iter())
    }

    pub fn all_functions_mut(&mut self) -> impl Iterator<Item = &mut Function> {
        std::iter::once(&mut self.ctor).chain(self.functions.iter_mut())
    }

    pub fn loop_labels(&self) -> Vec<LoopLabel> {
        let mut labels = Vec::new();
        for f in self.all_functions() {
            collect_labels(&f.body, &mut labels);
        }
        labels.sort();
        labels
    }

    /// All assert statements currently carrying query metadata.
    pub fn queries(&self) -> Vec<QueryMeta> {
        let mut out = Vec::new();
        for f in self.all_functions() {
            collect_queries(&f.body, &mut out);
        }
        out.sort_by_key(|q| q.id);
        out
    }

    pub fn is_call_free(&self) -> bool {
        self.all_functions().all(|f| stmts_call_free(&f.body))
    }
}

fn collect_labels(stmts: &[Stmt], out: &mut Vec<LoopLabel>) {
    for s in stmts {
        match s {
            Stmt::If(_, t, e) => {
                collect_labels(t, out);
                collect_labels(e, out);
            }
            Stmt::While { label, body, .. } => {
                out.push(*label);
                collect_labels(body, out);
            }
            _ => {}
        }
    }
}

fn collect_queries(stmts: &[Stmt], out: &mut Vec<QueryMeta>) {
    for s in stmts {
        match s {
            Stmt::Assert(_, Some(meta)) => out.push(*meta),
            Stmt::If(_, t, e) => {
                collect_queries(t, out);
                collect_queries(e, out);
            }
            Stmt::While { body, .. } => collect_queries(body, out),
            _ => {}
        }
    }
}

fn stmts_call_free(stmts: &[Stmt]) -> bool {
    stmts.iter().all(|s| match s {
        Stmt::Call { .. } | Stmt::ExtCall { .. } => false,
        Stmt::If(_, t, e) => stmts_call_free(t) && stmts_call_free(e),
        Stmt::While { body, .. } => stmts_call_free(body),
        _ => true,
    })
}

/// Number of statement nodes in a function body (atomic statements plus
/// branching constructs), the measure used by the inlining size cutoff.
pub fn stmt_count(stmts: &[Stmt]) -> usize {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::If(_, t, e) => 1 + stmt_count(t) + stmt_count(e),
            Stmt::While { body, .. } => 1 + stmt_count(body),
            _ => 1,
        })
        .sum()
}
