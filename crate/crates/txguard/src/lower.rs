//! Lowering of surface expressions to logic terms and formulas.

use crate::lang::ast::{Expr, Type};
use crate::lang::types::VarTypes;
use crate::logic::{Const, Formula, Sort, Term, Var, Width};

pub struct Lower<'a> {
    pub types: &'a VarTypes,
    pub width: Width,
}

pub const MSG_SENDER: &str = "msg.sender";
pub const MSG_VALUE: &str = "msg.value";

impl<'a> Lower<'a> {
    pub fn new(types: &'a VarTypes, width: Width) -> Self {
        Lower { types, width }
    }

    pub fn var(&self, name: &str) -> Var {
        let sort = match self.types.lookup(name) {
            Some(Type::UInt) | Some(Type::Bool) => Sort::UInt,
            Some(Type::Address) => Sort::Addr,
            Some(Type::Mapping) => Sort::Map,
            None if name == MSG_SENDER => Sort::Addr,
            None if name == MSG_VALUE => Sort::UInt,
            None => panic!("unresolved variable `{name}` survived the frontend"),
        };
        Var { name: name.to_string(), version: 0, sort }
    }

    /// Value-sorted expressions (uint or address).
    pub fn term(&self, e: &Expr) -> Term {
        match e {
            Expr::Num(n, _) => Term::Const(Const::new(n.clone(), self.width)),
            Expr::Var(name, _) => Term::Var(self.var(name)),
            Expr::MsgSender(_) => Term::Var(Var::addr(MSG_SENDER)),
            Expr::MsgValue(_) => Term::Var(Var::uint(MSG_VALUE)),
            Expr::Index(map, index, _) => {
                Term::select(Term::Var(self.var(map)), self.term(index))
            }
            Expr::Arith(op, a, b, _) => Term::bin(*op, self.term(a), self.term(b)),
            Expr::Bool(..) | Expr::Cmp(..) | Expr::And(..) | Expr::Or(..) | Expr::Not(..) => {
                panic!("boolean expression in term position")
            }
        }
    }

    /// Boolean-sorted expressions.
    pub fn formula(&self, e: &Expr) -> Formula {
        match e {
            Expr::Bool(true, _) => Formula::True,
            Expr::Bool(false, _) => Formula::False,
            Expr::Cmp(rel, a, b, _) => Formula::atom(*rel, self.term(a), self.term(b)),
            Expr::And(a, b) => Formula::and(vec![self.formula(a), self.formula(b)]),
            Expr::Or(a, b) => Formula::or(vec![self.formula(a), self.formula(b)]),
            Expr::Not(a) => self.formula(a).negate(),
            other => panic!("non-boolean expression in formula position: {other:?}"),
        }
    }
}
