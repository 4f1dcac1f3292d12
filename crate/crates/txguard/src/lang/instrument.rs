//! Safety-query instrumentation.
//!
//! For every arithmetic subexpression an assert guarding its bug class is
//! inserted immediately before the enclosing atomic statement, in
//! left-to-right evaluation order; queries inside if/while/require/assert
//! conditions are hoisted before the branching statement. Access-control
//! instrumentation guards non-constructor assignments to global
//! address-typed variables.

use num_bigint::BigUint;
use num_traits::One;

use super::ast::*;
use super::FrontendError;
use crate::logic::{BinOp, Rel, Width};

/// Dense, unique query identifiers for one verification run.
#[derive(Debug, Default)]
pub struct QueryIds {
    next: u32,
}

impl QueryIds {
    pub fn new() -> Self {
        QueryIds::default()
    }
    fn mint(&mut self, kind: QueryKind, loc: Loc) -> QueryMeta {
        let id = self.next;
        self.next += 1;
        QueryMeta { id, kind, loc }
    }
}

/// Errors when a literal does not fit in the verification bit-width.
pub fn check_constants_fit(c: &Contract, width: Width) -> Result<(), FrontendError> {
    let limit = BigUint::one() << width;
    for f in c.all_functions() {
        check_stmts(&f.body, &limit, width)?;
    }
    Ok(())
}

fn check_stmts(stmts: &[Stmt], limit: &BigUint, width: Width) -> Result<(), FrontendError> {
    let check_expr = |e: &Expr| -> Result<(), FrontendError> {
        let mut bad: Option<(BigUint, Loc)> = None;
        walk_nums(e, &mut |n, loc| {
            if n >= limit && bad.is_none() {
                bad = Some((n.clone(), loc));
            }
        });
        if let Some((n, loc)) = bad {
            return Err(FrontendError::ty(
                loc,
                format!("constant {n} does not fit in {width} bits"),
            ));
        }
        Ok(())
    };
    for s in stmts {
        match s {
            Stmt::Assign { value, .. } => check_expr(value)?,
            Stmt::MapAssign { index, value, .. } => {
                check_expr(index)?;
                check_expr(value)?;
            }
            Stmt::Assume(e) | Stmt::Assert(e, _) => check_expr(e)?,
            Stmt::If(cond, t, el) => {
                check_expr(cond)?;
                check_stmts(t, limit, width)?;
                check_stmts(el, limit, width)?;
            }
            Stmt::While { cond, body, .. } => {
                check_expr(cond)?;
                check_stmts(body, limit, width)?;
            }
            Stmt::Call { args, .. } | Stmt::ExtCall { args, .. } => {
                for a in args {
                    check_expr(a)?;
                }
            }
            Stmt::Havoc { .. } => {}
        }
    }
    Ok(())
}

fn walk_nums(e: &Expr, f: &mut impl FnMut(&BigUint, Loc)) {
    match e {
        Expr::Num(n, loc) => f(n, *loc),
        Expr::Bool(..) | Expr::Var(..) | Expr::MsgSender(_) | Expr::MsgValue(_) => {}
        Expr::Index(_, i, _) => walk_nums(i, f),
        Expr::Arith(_, a, b, _) | Expr::Cmp(_, a, b, _) => {
            walk_nums(a, f);
            walk_nums(b, f);
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            walk_nums(a, f);
            walk_nums(b, f);
        }
        Expr::Not(a) => walk_nums(a, f),
    }
}

/// Insert one guard assert per arithmetic operator.
pub fn instrument_arith(c: &Contract, ids: &mut QueryIds) -> Contract {
    let mut out = c.clone();
    for f in out.all_functions_mut() {
        f.body = arith_stmts(std::mem::take(&mut f.body), ids);
    }
    out
}

fn arith_stmts(stmts: Vec<Stmt>, ids: &mut QueryIds) -> Vec<Stmt> {
    let mut out = Vec::new();
    for s in stmts {
        match s {
            Stmt::Assign { ref value, .. } => {
                push_arith_guards(value, ids, &mut out);
                out.push(s);
            }
            Stmt::MapAssign { ref index, ref value, .. } => {
                push_arith_guards(index, ids, &mut out);
                push_arith_guards(value, ids, &mut out);
                out.push(s);
            }
            Stmt::Assume(ref e) => {
                push_arith_guards(e, ids, &mut out);
                out.push(s);
            }
            Stmt::Assert(ref e, None) => {
                push_arith_guards(e, ids, &mut out);
                out.push(s);
            }
            Stmt::Assert(_, Some(_)) => out.push(s),
            Stmt::If(cond, t, el) => {
                push_arith_guards(&cond, ids, &mut out);
                out.push(Stmt::If(cond, arith_stmts(t, ids), arith_stmts(el, ids)));
            }
            Stmt::While { label, cond, body } => {
                push_arith_guards(&cond, ids, &mut out);
                out.push(Stmt::While { label, cond, body: arith_stmts(body, ids) });
            }
            Stmt::Call { ref args, .. } | Stmt::ExtCall { ref args, .. } => {
                for a in args {
                    push_arith_guards(a, ids, &mut out);
                }
                out.push(s);
            }
            Stmt::Havoc { .. } => out.push(s),
        }
    }
    out
}

fn push_arith_guards(e: &Expr, ids: &mut QueryIds, out: &mut Vec<Stmt>) {
    let mut sites = Vec::new();
    collect_arith(e, &mut sites);
    for (op, a, b, loc) in sites {
        let zero = || Expr::Num(BigUint::from(0u32), loc);
        let (kind, guard) = match op {
            BinOp::Add => (
                QueryKind::AddOverflow,
                Expr::Cmp(
                    Rel::Ge,
                    Box::new(Expr::Arith(BinOp::Add, Box::new(a.clone()), Box::new(b.clone()), loc)),
                    Box::new(a.clone()),
                    loc,
                ),
            ),
            BinOp::Sub => (
                QueryKind::SubUnderflow,
                Expr::Cmp(Rel::Ge, Box::new(a.clone()), Box::new(b.clone()), loc),
            ),
            BinOp::Mul => {
                // a == 0 || (a != 0 && (a*b)/a == b)
                let product =
                    Expr::Arith(BinOp::Mul, Box::new(a.clone()), Box::new(b.clone()), loc);
                let recovered =
                    Expr::Arith(BinOp::Div, Box::new(product), Box::new(a.clone()), loc);
                (
                    QueryKind::MulOverflow,
                    Expr::Or(
                        Box::new(Expr::Cmp(Rel::Eq, Box::new(a.clone()), Box::new(zero()), loc)),
                        Box::new(Expr::And(
                            Box::new(Expr::Cmp(Rel::Ne, Box::new(a.clone()), Box::new(zero()), loc)),
                            Box::new(Expr::Cmp(Rel::Eq, Box::new(recovered), Box::new(b.clone()), loc)),
                        )),
                    ),
                )
            }
            BinOp::Div | BinOp::Rem => (
                QueryKind::DivByZero,
                Expr::Cmp(Rel::Ne, Box::new(b.clone()), Box::new(zero()), loc),
            ),
        };
        out.push(Stmt::Assert(guard, Some(ids.mint(kind, loc))));
    }
}

/// Arithmetic sites in left-to-right evaluation order (operands before the
/// operator that combines them).
fn collect_arith<'a>(e: &'a Expr, out: &mut Vec<(BinOp, &'a Expr, &'a Expr, Loc)>) {
    match e {
        Expr::Arith(op, a, b, loc) => {
            collect_arith(a, out);
            collect_arith(b, out);
            out.push((*op, a, b, *loc));
        }
        Expr::Cmp(_, a, b, _) => {
            collect_arith(a, out);
            collect_arith(b, out);
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            collect_arith(a, out);
            collect_arith(b, out);
        }
        Expr::Not(a) => collect_arith(a, out),
        Expr::Index(_, i, _) => collect_arith(i, out),
        Expr::Num(..) | Expr::Bool(..) | Expr::Var(..) | Expr::MsgSender(_) | Expr::MsgValue(_) => {}
    }
}

/// Guard non-constructor assignments to global address variables with
/// assert(msg.sender == addr).
pub fn instrument_access(c: &Contract, ids: &mut QueryIds) -> Contract {
    let mut out = c.clone();
    let address_globals: Vec<String> = out
        .globals
        .iter()
        .filter(|g| g.ty == Type::Address)
        .map(|g| g.name.clone())
        .collect();
    for f in out.functions.iter_mut() {
        f.body = access_stmts(std::mem::take(&mut f.body), &address_globals, ids);
    }
    out
}

fn access_stmts(stmts: Vec<Stmt>, guarded: &[String], ids: &mut QueryIds) -> Vec<Stmt> {
    let mut out = Vec::new();
    for s in stmts {
        match s {
            Stmt::Assign { ref name, loc, .. } if guarded.contains(name) => {
                let cond = Expr::Cmp(
                    Rel::Eq,
                    Box::new(Expr::MsgSender(loc)),
                    Box::new(Expr::Var(name.clone(), loc)),
                    loc,
                );
                out.push(Stmt::Assert(cond, Some(ids.mint(QueryKind::AccessControl, loc))));
                out.push(s);
            }
            Stmt::If(cond, t, el) => out.push(Stmt::If(
                cond,
                access_stmts(t, guarded, ids),
                access_stmts(el, guarded, ids),
            )),
            Stmt::While { label, cond, body } => {
                out.push(Stmt::While { label, cond, body: access_stmts(body, guarded, ids) })
            }
            other => out.push(other),
        }
    }
    out
}

/// Attach query metadata to user-written asserts so they show up in reports.
pub fn tag_user_queries(c: &Contract, ids: &mut QueryIds) -> Contract {
    let mut out = c.clone();
    for f in out.all_functions_mut() {
        tag_stmts(&mut f.body, ids);
    }
    out
}

fn tag_stmts(stmts: &mut [Stmt], ids: &mut QueryIds) {
    for s in stmts {
        match s {
            Stmt::Assert(e, meta @ None) => {
                *meta = Some(ids.mint(QueryKind::User, e.loc()));
            }
            Stmt::If(_, t, el) => {
                tag_stmts(t, ids);
                tag_stmts(el, ids);
            }
            Stmt::While { body, .. } => tag_stmts(body, ids),
            _ => {}
        }
    }
}
