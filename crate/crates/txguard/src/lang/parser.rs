//! Recursive-descent parser for the `.sol-core` concrete syntax
//! (see docs/grammar.md), with scope and type checking.
//!
//! Desugarings applied here: require(e) -> assume(e); revert() ->
//! assume(false); compound assignment and ++/--; local declarations become
//! plain assignments (types recorded on the enclosing function); `for` loops
//! become init + while; every loop gets a fresh contract-unique label.

use std::collections::HashMap;

use num_bigint::BigUint;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;
use crate::logic::{BinOp, Rel};

pub fn parse(source: &str) -> Result<Contract, FrontendError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, next_label: 0 };
    let contract = p.contract()?;
    validate_calls(&contract)?;
    Ok(contract)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_label: u32,
}

/// Variables in scope while parsing one function body.
struct FnCtx {
    globals: HashMap<String, Type>,
    vars: HashMap<String, Type>,
    locals: Vec<(String, Type)>,
}

impl FnCtx {
    fn lookup(&self, name: &str) -> Option<Type> {
        self.vars.get(name).copied().or_else(|| self.globals.get(name).copied())
    }

    fn declare_local(&mut self, name: &str, ty: Type, loc: Loc) -> Result<(), FrontendError> {
        if self.vars.contains_key(name) {
            return Err(FrontendError::scope(loc, format!("`{name}` already declared")));
        }
        self.vars.insert(name.to_string(), ty);
        self.locals.push((name.to_string(), ty));
        Ok(())
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn loc(&self) -> Loc {
        self.tokens[self.pos].loc
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn accept(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, FrontendError> {
        if self.peek() == &tok {
            Ok(self.bump())
        } else {
            Err(FrontendError::syntax(
                self.loc(),
                format!("expected {}, found {}", tok.describe(), self.peek().describe()),
            ))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Loc), FrontendError> {
        let loc = self.loc();
        match self.bump().tok {
            Tok::Ident(name) => Ok((name, loc)),
            other => Err(FrontendError::syntax(
                loc,
                format!("expected identifier, found {}", other.describe()),
            )),
        }
    }

    fn fresh_label(&mut self) -> LoopLabel {
        let l = LoopLabel(self.next_label);
        self.next_label += 1;
        l
    }

    fn contract(&mut self) -> Result<Contract, FrontendError> {
        self.expect(Tok::Contract)?;
        let (name, _) = self.expect_ident()?;
        self.expect(Tok::LBrace)?;

        let mut globals: Vec<GlobalDecl> = Vec::new();
        let mut ctor: Option<Function> = None;
        let mut functions: Vec<Function> = Vec::new();

        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::UInt | Tok::Address | Tok::Bool | Tok::Mapping => {
                    let loc = self.loc();
                    let ty = self.parse_type()?;
                    let (gname, gloc) = self.expect_ident()?;
                    self.expect(Tok::Semi)?;
                    if globals.iter().any(|g| g.name == gname) {
                        return Err(FrontendError::scope(
                            gloc,
                            format!("global `{gname}` already declared"),
                        ));
                    }
                    let _ = loc;
                    globals.push(GlobalDecl { name: gname, ty, loc: gloc });
                }
                Tok::Constructor => {
                    let loc = self.loc();
                    self.bump();
                    let f = self.function_rest("constructor".to_string(), true, &globals)?;
                    if ctor.is_some() {
                        return Err(FrontendError::scope(loc, "multiple constructors"));
                    }
                    ctor = Some(f);
                }
                Tok::Function => {
                    self.bump();
                    let (fname, floc) = self.expect_ident()?;
                    if functions.iter().any(|f| f.name == fname) {
                        return Err(FrontendError::scope(
                            floc,
                            format!("function `{fname}` already declared"),
                        ));
                    }
                    let f = self.function_rest(fname, false, &globals)?;
                    functions.push(f);
                }
                other => {
                    return Err(FrontendError::syntax(
                        self.loc(),
                        format!("expected declaration, found {}", other.describe()),
                    ))
                }
            }
        }
        self.expect(Tok::Eof)?;

        let ctor = ctor.ok_or_else(|| {
            FrontendError::scope(Loc { line: 1, col: 1 }, "contract has no constructor")
        })?;

        Ok(Contract { name, globals, ctor, functions, next_label: self.next_label })
    }

    fn parse_type(&mut self) -> Result<Type, FrontendError> {
        let loc = self.loc();
        match self.bump().tok {
            Tok::UInt => Ok(Type::UInt),
            Tok::Address => Ok(Type::Address),
            Tok::Bool => Ok(Type::Bool),
            Tok::Mapping => {
                self.expect(Tok::LParen)?;
                self.expect(Tok::Address)?;
                self.expect(Tok::Arrow)?;
                self.expect(Tok::UInt)?;
                self.expect(Tok::RParen)?;
                Ok(Type::Mapping)
            }
            other => Err(FrontendError::syntax(
                loc,
                format!("expected a type, found {}", other.describe()),
            )),
        }
    }

    fn function_rest(
        &mut self,
        name: String,
        is_ctor: bool,
        globals: &[GlobalDecl],
    ) -> Result<Function, FrontendError> {
        self.expect(Tok::LParen)?;
        let mut params: Vec<(String, Type)> = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let loc = self.loc();
                let ty = self.parse_type()?;
                if ty == Type::Mapping {
                    return Err(FrontendError::ty(loc, "mapping-typed parameters not supported"));
                }
                let (pname, ploc) = self.expect_ident()?;
                if params.iter().any(|(n, _)| n == &pname) {
                    return Err(FrontendError::scope(
                        ploc,
                        format!("parameter `{pname}` already declared"),
                    ));
                }
                params.push((pname, ty));
                if !self.accept(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;

        let visibility = if self.accept(&Tok::Public) {
            Visibility::Public
        } else if self.accept(&Tok::Internal) {
            Visibility::Internal
        } else {
            Visibility::Public
        };

        let mut ctx = FnCtx {
            globals: globals.iter().map(|g| (g.name.clone(), g.ty)).collect(),
            vars: params.iter().cloned().collect(),
            locals: Vec::new(),
        };
        let body = self.block(&mut ctx)?;
        Ok(Function { name, params, locals: ctx.locals, body, visibility, is_ctor })
    }

    fn block(&mut self, ctx: &mut FnCtx) -> Result<Vec<Stmt>, FrontendError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while self.peek() != &Tok::RBrace {
            self.stmt(ctx, &mut stmts)?;
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt_or_block(&mut self, ctx: &mut FnCtx) -> Result<Vec<Stmt>, FrontendError> {
        if self.peek() == &Tok::LBrace {
            self.block(ctx)
        } else {
            let mut stmts = Vec::new();
            self.stmt(ctx, &mut stmts)?;
            Ok(stmts)
        }
    }

    fn stmt(&mut self, ctx: &mut FnCtx, out: &mut Vec<Stmt>) -> Result<(), FrontendError> {
        match self.peek().clone() {
            Tok::UInt | Tok::Address | Tok::Bool | Tok::Mapping => self.local_decl(ctx, out),
            Tok::Require => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr(ctx)?;
                self.expect_type(&cond, ctx, Type::Bool)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                out.push(Stmt::Assume(cond));
                Ok(())
            }
            Tok::Assert => {
                let loc = self.loc();
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr(ctx)?;
                self.expect_type(&cond, ctx, Type::Bool)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                let _ = loc;
                out.push(Stmt::Assert(cond, None));
                Ok(())
            }
            Tok::Revert => {
                let loc = self.loc();
                self.bump();
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                out.push(Stmt::Assume(Expr::Bool(false, loc)));
                Ok(())
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr(ctx)?;
                self.expect_type(&cond, ctx, Type::Bool)?;
                self.expect(Tok::RParen)?;
                let then_branch = self.stmt_or_block(ctx)?;
                let else_branch = if self.accept(&Tok::Else) {
                    self.stmt_or_block(ctx)?
                } else {
                    Vec::new()
                };
                out.push(Stmt::If(cond, then_branch, else_branch));
                Ok(())
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr(ctx)?;
                self.expect_type(&cond, ctx, Type::Bool)?;
                self.expect(Tok::RParen)?;
                let label = self.fresh_label();
                let body = self.stmt_or_block(ctx)?;
                out.push(Stmt::While { label, cond, body });
                Ok(())
            }
            Tok::For => {
                self.bump();
                self.expect(Tok::LParen)?;
                // init
                let mut init = Vec::new();
                if self.peek() != &Tok::Semi {
                    match self.peek() {
                        Tok::UInt | Tok::Address | Tok::Bool => self.local_decl(ctx, &mut init)?,
                        _ => {
                            self.simple_assign(ctx, &mut init)?;
                            self.expect(Tok::Semi)?;
                        }
                    }
                } else {
                    self.bump();
                }
                let cond = self.expr(ctx)?;
                self.expect_type(&cond, ctx, Type::Bool)?;
                self.expect(Tok::Semi)?;
                let mut post = Vec::new();
                if self.peek() != &Tok::RParen {
                    self.simple_assign(ctx, &mut post)?;
                }
                self.expect(Tok::RParen)?;
                let label = self.fresh_label();
                let mut body = self.stmt_or_block(ctx)?;
                body.extend(post);
                out.extend(init);
                out.push(Stmt::While { label, cond, body });
                Ok(())
            }
            Tok::LBrace => {
                let inner = self.block(ctx)?;
                out.extend(inner);
                Ok(())
            }
            Tok::Ident(_) | Tok::PlusPlus | Tok::MinusMinus => {
                self.ident_stmt(ctx, out)?;
                self.expect(Tok::Semi)?;
                Ok(())
            }
            other => Err(FrontendError::syntax(
                self.loc(),
                format!("expected a statement, found {}", other.describe()),
            )),
        }
    }

    fn local_decl(&mut self, ctx: &mut FnCtx, out: &mut Vec<Stmt>) -> Result<(), FrontendError> {
        let tyloc = self.loc();
        let ty = self.parse_type()?;
        if ty == Type::Mapping {
            return Err(FrontendError::ty(tyloc, "mapping-typed locals not supported"));
        }
        let (name, loc) = self.expect_ident()?;
        ctx.declare_local(&name, ty, loc)?;
        let value = if self.accept(&Tok::Assign) {
            let e = self.expr(ctx)?;
            self.expect_type_is(&e, ctx, ty)?;
            e
        } else {
            match ty {
                Type::UInt | Type::Address => Expr::Num(BigUint::from(0u32), loc),
                Type::Bool => Expr::Bool(false, loc),
                Type::Mapping => unreachable!(),
            }
        };
        self.expect(Tok::Semi)?;
        out.push(Stmt::Assign { name, value, loc });
        Ok(())
    }

    /// Assignments, compound assignments, ++/--, and call statements.
    fn ident_stmt(&mut self, ctx: &mut FnCtx, out: &mut Vec<Stmt>) -> Result<(), FrontendError> {
        // prefix increment/decrement
        if matches!(self.peek(), Tok::PlusPlus | Tok::MinusMinus) {
            let op = if self.bump().tok == Tok::PlusPlus { BinOp::Add } else { BinOp::Sub };
            let (name, loc) = self.expect_ident()?;
            return self.push_incr(ctx, out, name, loc, op);
        }

        // call statement without receiver: f(...) or o.m(...)
        if matches!(self.peek(), Tok::Ident(_)) {
            if self.peek_at(1) == &Tok::LParen {
                let (callee, loc) = self.expect_ident()?;
                let args = self.call_args(ctx)?;
                out.push(Stmt::Call { receiver: None, callee, args, loc });
                return Ok(());
            }
            if self.peek_at(1) == &Tok::Dot {
                if let Tok::Ident(_) = self.peek_at(2) {
                    if self.peek_at(3) == &Tok::LParen {
                        let (object, loc) = self.expect_ident()?;
                        self.expect(Tok::Dot)?;
                        let (method, _) = self.expect_ident()?;
                        let args = self.call_args(ctx)?;
                        self.check_object(ctx, &object, loc)?;
                        out.push(Stmt::ExtCall { receiver: None, object, method, args, loc });
                        return Ok(());
                    }
                }
            }
        }

        self.simple_assign(ctx, out)
    }

    fn call_args(&mut self, ctx: &mut FnCtx) -> Result<Vec<Expr>, FrontendError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                args.push(self.expr(ctx)?);
                if !self.accept(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn check_object(&self, ctx: &FnCtx, object: &str, loc: Loc) -> Result<(), FrontendError> {
        match ctx.lookup(object) {
            Some(Type::Address) => Ok(()),
            Some(other) => Err(FrontendError::ty(
                loc,
                format!("external call target `{object}` has type {other}, expected address"),
            )),
            None => Err(FrontendError::scope(loc, format!("unknown identifier `{object}`"))),
        }
    }

    fn push_incr(
        &mut self,
        ctx: &FnCtx,
        out: &mut Vec<Stmt>,
        name: String,
        loc: Loc,
        op: BinOp,
    ) -> Result<(), FrontendError> {
        match ctx.lookup(&name) {
            Some(Type::UInt) => {}
            Some(other) => {
                return Err(FrontendError::ty(
                    loc,
                    format!("`{name}` has type {other}, expected uint"),
                ))
            }
            None => return Err(FrontendError::scope(loc, format!("unknown identifier `{name}`"))),
        }
        let value = Expr::Arith(
            op,
            Box::new(Expr::Var(name.clone(), loc)),
            Box::new(Expr::Num(BigUint::from(1u32), loc)),
            loc,
        );
        out.push(Stmt::Assign { name, value, loc });
        Ok(())
    }

    fn simple_assign(&mut self, ctx: &mut FnCtx, out: &mut Vec<Stmt>) -> Result<(), FrontendError> {
        let (name, loc) = self.expect_ident()?;

        // postfix increment/decrement
        if matches!(self.peek(), Tok::PlusPlus | Tok::MinusMinus) {
            let op = if self.bump().tok == Tok::PlusPlus { BinOp::Add } else { BinOp::Sub };
            return self.push_incr(ctx, out, name, loc, op);
        }

        // mapping element assignment
        if self.accept(&Tok::LBracket) {
            match ctx.lookup(&name) {
                Some(Type::Mapping) => {}
                Some(other) => {
                    return Err(FrontendError::ty(
                        loc,
                        format!("`{name}` has type {other}, cannot be indexed"),
                    ))
                }
                None => {
                    return Err(FrontendError::scope(loc, format!("unknown identifier `{name}`")))
                }
            }
            let index = self.expr(ctx)?;
            self.expect_type_is(&index, ctx, Type::Address)?;
            self.expect(Tok::RBracket)?;
            let compound = self.assign_op()?;
            let rhs = self.expr(ctx)?;
            self.expect_type_is(&rhs, ctx, Type::UInt)?;
            let value = match compound {
                None => rhs,
                Some(op) => Expr::Arith(
                    op,
                    Box::new(Expr::Index(name.clone(), Box::new(index.clone()), loc)),
                    Box::new(rhs),
                    loc,
                ),
            };
            out.push(Stmt::MapAssign { map: name, index, value, loc });
            return Ok(());
        }

        let var_ty = match ctx.lookup(&name) {
            Some(Type::Mapping) => {
                return Err(FrontendError::ty(
                    loc,
                    format!("cannot assign whole mapping `{name}`"),
                ))
            }
            Some(ty) => ty,
            None => return Err(FrontendError::scope(loc, format!("unknown identifier `{name}`"))),
        };
        let compound = self.assign_op()?;

        // receiver forms: x = g(...) and x = o.m(...)
        if compound.is_none() {
            if let Tok::Ident(_) = self.peek() {
                if self.peek_at(1) == &Tok::LParen {
                    let (callee, cloc) = self.expect_ident()?;
                    let args = self.call_args(ctx)?;
                    out.push(Stmt::Call { receiver: Some(name), callee, args, loc: cloc });
                    return Ok(());
                }
                if self.peek_at(1) == &Tok::Dot
                    && matches!(self.peek_at(2), Tok::Ident(_))
                    && self.peek_at(3) == &Tok::LParen
                {
                    let (object, oloc) = self.expect_ident()?;
                    self.expect(Tok::Dot)?;
                    let (method, _) = self.expect_ident()?;
                    let args = self.call_args(ctx)?;
                    self.check_object(ctx, &object, oloc)?;
                    out.push(Stmt::ExtCall {
                        receiver: Some(name),
                        object,
                        method,
                        args,
                        loc: oloc,
                    });
                    return Ok(());
                }
            }
        }

        let rhs = self.expr(ctx)?;
        self.expect_type_is(&rhs, ctx, var_ty)?;
        let value = match compound {
            None => rhs,
            Some(op) => {
                if var_ty != Type::UInt {
                    return Err(FrontendError::ty(
                        loc,
                        format!("compound assignment needs uint, `{name}` is {var_ty}"),
                    ));
                }
                Expr::Arith(op, Box::new(Expr::Var(name.clone(), loc)), Box::new(rhs), loc)
            }
        };
        out.push(Stmt::Assign { name, value, loc });
        Ok(())
    }

    fn assign_op(&mut self) -> Result<Option<BinOp>, FrontendError> {
        let op = match self.peek() {
            Tok::Assign => None,
            Tok::PlusAssign => Some(BinOp::Add),
            Tok::MinusAssign => Some(BinOp::Sub),
            Tok::StarAssign => Some(BinOp::Mul),
            Tok::SlashAssign => Some(BinOp::Div),
            Tok::PercentAssign => Some(BinOp::Rem),
            other => {
                return Err(FrontendError::syntax(
                    self.loc(),
                    format!("expected assignment operator, found {}", other.describe()),
                ))
            }
        };
        self.bump();
        Ok(op)
    }

    // ---- expressions ----

    fn expr(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        self.or_expr(ctx)
    }

    fn or_expr(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        let mut lhs = self.and_expr(ctx)?;
        while self.accept(&Tok::OrOr) {
            let rhs = self.and_expr(ctx)?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary_bool(ctx)?;
        while self.accept(&Tok::AndAnd) {
            let rhs = self.unary_bool(ctx)?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_bool(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        if self.accept(&Tok::Bang) {
            let inner = self.unary_bool(ctx)?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.cmp_expr(ctx)
    }

    fn cmp_expr(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        let lhs = self.arith_expr(ctx)?;
        let rel = match self.peek() {
            Tok::Eq => Rel::Eq,
            Tok::Ne => Rel::Ne,
            Tok::Le => Rel::Le,
            Tok::Lt => Rel::Lt,
            Tok::Ge => Rel::Ge,
            Tok::Gt => Rel::Gt,
            _ => return Ok(lhs),
        };
        let loc = lhs.loc();
        self.bump();
        let rhs = self.arith_expr(ctx)?;
        Ok(Expr::Cmp(rel, Box::new(lhs), Box::new(rhs), loc))
    }

    fn arith_expr(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        let mut lhs = self.term_expr(ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let loc = lhs.loc();
            self.bump();
            let rhs = self.term_expr(ctx)?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs), loc);
        }
        Ok(lhs)
    }

    fn term_expr(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        let mut lhs = self.factor(ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => break,
            };
            let loc = lhs.loc();
            self.bump();
            let rhs = self.factor(ctx)?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs), loc);
        }
        Ok(lhs)
    }

    fn factor(&mut self, ctx: &FnCtx) -> Result<Expr, FrontendError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Num(_) => {
                let Tok::Num(n) = self.bump().tok else { unreachable!() };
                Ok(Expr::Num(n, loc))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Bool(true, loc))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Bool(false, loc))
            }
            Tok::Msg => {
                self.bump();
                self.expect(Tok::Dot)?;
                let (field, floc) = self.expect_ident()?;
                match field.as_str() {
                    "sender" => Ok(Expr::MsgSender(loc)),
                    "value" => Ok(Expr::MsgValue(loc)),
                    other => Err(FrontendError::syntax(
                        floc,
                        format!("unknown field `msg.{other}`"),
                    )),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(ctx)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(_) => {
                let (name, loc) = self.expect_ident()?;
                if ctx.lookup(&name).is_none() {
                    return Err(FrontendError::scope(
                        loc,
                        format!("unknown identifier `{name}`"),
                    ));
                }
                if self.accept(&Tok::LBracket) {
                    if ctx.lookup(&name) != Some(Type::Mapping) {
                        return Err(FrontendError::ty(
                            loc,
                            format!("`{name}` is not a mapping"),
                        ));
                    }
                    let index = self.expr(ctx)?;
                    self.expect_type_is(&index, ctx, Type::Address)?;
                    self.expect(Tok::RBracket)?;
                    return Ok(Expr::Index(name, Box::new(index), loc));
                }
                Ok(Expr::Var(name, loc))
            }
            other => Err(FrontendError::syntax(
                loc,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }

    // ---- type checking ----

    fn expect_type(&self, e: &Expr, ctx: &FnCtx, want: Type) -> Result<(), FrontendError> {
        self.expect_type_is(e, ctx, want)
    }

    fn expect_type_is(&self, e: &Expr, ctx: &FnCtx, want: Type) -> Result<(), FrontendError> {
        let got = type_of(e, ctx)?;
        if got != want {
            return Err(FrontendError::ty(
                e.loc(),
                format!("expected {want}, found {got}"),
            ));
        }
        Ok(())
    }
}

fn type_of(e: &Expr, ctx: &FnCtx) -> Result<Type, FrontendError> {
    match e {
        Expr::Num(_, _) => Ok(Type::UInt),
        Expr::Bool(_, _) => Ok(Type::Bool),
        Expr::MsgSender(_) => Ok(Type::Address),
        Expr::MsgValue(_) => Ok(Type::UInt),
        Expr::Var(name, loc) => ctx
            .lookup(name)
            .ok_or_else(|| FrontendError::scope(*loc, format!("unknown identifier `{name}`"))),
        Expr::Index(_, _, _) => Ok(Type::UInt),
        Expr::Arith(_, a, b, loc) => {
            for side in [a, b] {
                if type_of(side, ctx)? != Type::UInt {
                    return Err(FrontendError::ty(*loc, "arithmetic needs uint operands"));
                }
            }
            Ok(Type::UInt)
        }
        Expr::Cmp(rel, a, b, loc) => {
            let ta = type_of(a, ctx)?;
            let tb = type_of(b, ctx)?;
            if ta != tb {
                return Err(FrontendError::ty(
                    *loc,
                    format!("cannot compare {ta} with {tb}"),
                ));
            }
            match rel {
                Rel::Eq | Rel::Ne => {
                    if ta == Type::Bool || ta == Type::Mapping {
                        return Err(FrontendError::ty(*loc, format!("cannot compare {ta} values")));
                    }
                }
                _ => {
                    if ta != Type::UInt {
                        return Err(FrontendError::ty(*loc, "ordering needs uint operands"));
                    }
                }
            }
            Ok(Type::Bool)
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            for side in [a, b] {
                if type_of(side, ctx)? != Type::Bool {
                    return Err(FrontendError::ty(side.loc(), "expected bool operand"));
                }
            }
            Ok(Type::Bool)
        }
        Expr::Not(a) => {
            if type_of(a, ctx)? != Type::Bool {
                return Err(FrontendError::ty(a.loc(), "expected bool operand"));
            }
            Ok(Type::Bool)
        }
    }
}

/// Post-parse validation of intra-contract call sites (targets may be
/// declared after their callers).
fn validate_calls(c: &Contract) -> Result<(), FrontendError> {
    for f in c.all_functions() {
        validate_call_stmts(c, &f.body)?;
    }
    Ok(())
}

fn validate_call_stmts(c: &Contract, stmts: &[Stmt]) -> Result<(), FrontendError> {
    for s in stmts {
        match s {
            Stmt::Call { callee, args, loc, .. } => {
                let target = c.function(callee).ok_or_else(|| {
                    FrontendError::scope(*loc, format!("unknown function `{callee}`"))
                })?;
                if target.params.len() != args.len() {
                    return Err(FrontendError::ty(
                        *loc,
                        format!(
                            "`{callee}` takes {} argument(s), {} given",
                            target.params.len(),
                            args.len()
                        ),
                    ));
                }
            }
            Stmt::If(_, t, e) => {
                validate_call_stmts(c, t)?;
                validate_call_stmts(c, e)?;
            }
            Stmt::While { body, .. } => validate_call_stmts(c, body)?,
            _ => {}
        }
    }
    Ok(())
}
