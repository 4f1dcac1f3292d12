//! Call elimination: bounded inlining of intra-contract calls plus
//! conservative havoc summaries for everything left over (large callees,
//! recursion beyond the depth bound, external-object calls).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use crate::logic::{Formula, Var};

/// Callees with more than this many statements are havocked, not inlined.
pub const INLINE_STMT_LIMIT: usize = 20;

/// Transitive may-write set per function, over global names only
/// (field-insensitive). Fixpoint over the intra-contract call graph.
pub fn may_write_sets(c: &Contract) -> BTreeMap<String, BTreeSet<String>> {
    let globals: BTreeSet<String> = c.globals.iter().map(|g| g.name.clone()).collect();
    let mut writes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut calls: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

    for f in c.all_functions() {
        let mut direct = BTreeSet::new();
        let mut callees = BTreeSet::new();
        collect_effects(&f.body, &globals, &mut direct, &mut callees);
        writes.insert(f.name.clone(), direct);
        calls.insert(f.name.clone(), callees);
    }

    loop {
        let mut changed = false;
        for f in c.all_functions() {
            let callees = calls[&f.name].clone();
            for callee in callees {
                if let Some(extra) = writes.get(&callee).cloned() {
                    let mine = writes.get_mut(&f.name).unwrap();
                    for v in extra {
                        changed |= mine.insert(v);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    writes
}

fn collect_effects(
    stmts: &[Stmt],
    globals: &BTreeSet<String>,
    writes: &mut BTreeSet<String>,
    callees: &mut BTreeSet<String>,
) {
    for s in stmts {
        match s {
            Stmt::Assign { name, .. } if globals.contains(name) => {
                writes.insert(name.clone());
            }
            Stmt::MapAssign { map, .. } if globals.contains(map) => {
                writes.insert(map.clone());
            }
            Stmt::Call { receiver, callee, .. } => {
                callees.insert(callee.clone());
                if let Some(r) = receiver {
                    if globals.contains(r) {
                        writes.insert(r.clone());
                    }
                }
            }
            Stmt::ExtCall { receiver, .. } => {
                if let Some(r) = receiver {
                    if globals.contains(r) {
                        writes.insert(r.clone());
                    }
                }
            }
            Stmt::Havoc { vars } => {
                for v in vars {
                    if globals.contains(v) {
                        writes.insert(v.clone());
                    }
                }
            }
            Stmt::If(_, t, e) => {
                collect_effects(t, globals, writes, callees);
                collect_effects(e, globals, writes, callees);
            }
            Stmt::While { body, .. } => collect_effects(body, globals, writes, callees),
            _ => {}
        }
    }
}

/// Inline intra-contract calls up to `depth`, havoc the rest. The result is
/// call-free; idempotent at any fixed depth.
pub fn inline_calls(c: &Contract, depth: u32) -> Contract {
    let source = c.clone();
    let writes = may_write_sets(c);
    let mut out = c.clone();
    let mut minter = Minter { next_label: c.next_label, next_instance: 0 };
    for f in out.all_functions_mut() {
        let mut new_locals = Vec::new();
        f.body = inline_stmts(
            std::mem::take(&mut f.body),
            depth,
            &source,
            &writes,
            &mut minter,
            &mut new_locals,
        );
        f.locals.extend(new_locals);
    }
    out.next_label = minter.next_label;
    out
}

struct Minter {
    next_label: u32,
    next_instance: u32,
}

impl Minter {
    fn label(&mut self) -> LoopLabel {
        let l = LoopLabel(self.next_label);
        self.next_label += 1;
        l
    }
    fn instance(&mut self) -> u32 {
        let i = self.next_instance;
        self.next_instance += 1;
        i
    }
}

fn inline_stmts(
    stmts: Vec<Stmt>,
    depth: u32,
    source: &Contract,
    writes: &BTreeMap<String, BTreeSet<String>>,
    minter: &mut Minter,
    locals_out: &mut Vec<(String, Type)>,
) -> Vec<Stmt> {
    let mut out = Vec::new();
    for s in stmts {
        match s {
            Stmt::Call { receiver, callee, args, loc } => {
                let target = source.function(&callee).expect("validated call target");
                if depth > 0 && stmt_count(&target.body) <= INLINE_STMT_LIMIT {
                    let instance = minter.instance();
                    let prefix = format!("{callee}${instance}$");
                    let mut rename: HashMap<String, String> = HashMap::new();
                    for (p, ty) in target.params.iter().chain(target.locals.iter()) {
                        let fresh = format!("{prefix}{p}");
                        rename.insert(p.clone(), fresh.clone());
                        locals_out.push((fresh, *ty));
                    }
                    for ((p, _), arg) in target.params.iter().zip(args) {
                        out.push(Stmt::Assign { name: rename[p].clone(), value: arg, loc });
                    }
                    let body = rename_stmts(target.body.clone(), &rename, minter);
                    let body = inline_stmts(body, depth - 1, source, writes, minter, locals_out);
                    out.extend(body);
                    if let Some(r) = receiver {
                        out.push(Stmt::Havoc { vars: BTreeSet::from([r]) });
                    }
                } else {
                    let mut vars = writes.get(&callee).cloned().unwrap_or_default();
                    if let Some(r) = receiver {
                        vars.insert(r);
                    }
                    if !vars.is_empty() {
                        out.push(Stmt::Havoc { vars });
                    }
                }
            }
            Stmt::ExtCall { receiver, .. } => {
                if let Some(r) = receiver {
                    out.push(Stmt::Havoc { vars: BTreeSet::from([r]) });
                }
            }
            Stmt::If(cond, t, e) => out.push(Stmt::If(
                cond,
                inline_stmts(t, depth, source, writes, minter, locals_out),
                inline_stmts(e, depth, source, writes, minter, locals_out),
            )),
            Stmt::While { label, cond, body } => out.push(Stmt::While {
                label,
                cond,
                body: inline_stmts(body, depth, source, writes, minter, locals_out),
            }),
            other => out.push(other),
        }
    }
    out
}

fn rename_stmts(stmts: Vec<Stmt>, map: &HashMap<String, String>, minter: &mut Minter) -> Vec<Stmt> {
    let ren = |name: &str| map.get(name).cloned().unwrap_or_else(|| name.to_string());
    stmts
        .into_iter()
        .map(|s| match s {
            Stmt::Assign { name, value, loc } => {
                Stmt::Assign { name: ren(&name), value: rename_expr(value, map), loc }
            }
            Stmt::MapAssign { map: m, index, value, loc } => Stmt::MapAssign {
                map: ren(&m),
                index: rename_expr(index, map),
                value: rename_expr(value, map),
                loc,
            },
            Stmt::Assume(e) => Stmt::Assume(rename_expr(e, map)),
            Stmt::Assert(e, meta) => Stmt::Assert(rename_expr(e, map), meta),
            Stmt::If(cond, t, e) => Stmt::If(
                rename_expr(cond, map),
                rename_stmts(t, map, minter),
                rename_stmts(e, map, minter),
            ),
            Stmt::While { label: _, cond, body } => Stmt::While {
                label: minter.label(),
                cond: rename_expr(cond, map),
                body: rename_stmts(body, map, minter),
            },
            Stmt::Call { receiver, callee, args, loc } => Stmt::Call {
                receiver: receiver.map(|r| ren(&r)),
                callee,
                args: args.into_iter().map(|a| rename_expr(a, map)).collect(),
                loc,
            },
            Stmt::ExtCall { receiver, object, method, args, loc } => Stmt::ExtCall {
                receiver: receiver.map(|r| ren(&r)),
                object: ren(&object),
                method,
                args: args.into_iter().map(|a| rename_expr(a, map)).collect(),
                loc,
            },
            Stmt::Havoc { vars } => Stmt::Havoc { vars: vars.iter().map(|v| ren(v)).collect() },
        })
        .collect()
}

fn rename_expr(e: Expr, map: &HashMap<String, String>) -> Expr {
    match e {
        Expr::Var(name, loc) => {
            let name = map.get(&name).cloned().unwrap_or(name);
            Expr::Var(name, loc)
        }
        Expr::Index(m, i, loc) => {
            let m = map.get(&m).cloned().unwrap_or(m);
            Expr::Index(m, Box::new(rename_expr(*i, map)), loc)
        }
        Expr::Arith(op, a, b, loc) => Expr::Arith(
            op,
            Box::new(rename_expr(*a, map)),
            Box::new(rename_expr(*b, map)),
            loc,
        ),
        Expr::Cmp(rel, a, b, loc) => Expr::Cmp(
            rel,
            Box::new(rename_expr(*a, map)),
            Box::new(rename_expr(*b, map)),
            loc,
        ),
        Expr::And(a, b) => {
            Expr::And(Box::new(rename_expr(*a, map)), Box::new(rename_expr(*b, map)))
        }
        Expr::Or(a, b) => Expr::Or(Box::new(rename_expr(*a, map)), Box::new(rename_expr(*b, map))),
        Expr::Not(a) => Expr::Not(Box::new(rename_expr(*a, map))),
        other => other,
    }
}

/// Conservative call summary on a precondition: every top-level conjunct
/// speaking about the current value of a possibly-written variable is
/// weakened to true. Conjuncts about earlier (primed) values are retained.
pub fn havoc_summary(pre: &Formula, written: &BTreeSet<String>) -> Formula {
    let conjuncts: Vec<Formula> = pre
        .conjuncts()
        .into_iter()
        .map(|c| {
            if mentions_current(c, written) {
                Formula::True
            } else {
                c.clone()
            }
        })
        .collect();
    Formula::and(conjuncts)
}

fn mentions_current(f: &Formula, written: &BTreeSet<String>) -> bool {
    f.free_vars()
        .vars
        .iter()
        .any(|v: &Var| v.version == 0 && written.contains(&v.name))
}
