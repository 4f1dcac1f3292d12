//! Bounded concrete-execution bug oracle.
//!
//! Exhaustively executes small contracts at tiny bit-widths over bounded
//! transaction sequences: every sequence of public calls up to the
//! transaction bound, with every argument and address valuation over the
//! bounded domains, starting from every constructor valuation. Records each
//! assert whose condition evaluates false on a feasible execution; a failed
//! assume abandons the transaction. Division and modulo by zero follow the
//! SMT-LIB bitvector convention so symbolic and concrete semantics agree.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::lang::ast::{Contract, Expr, Function, QueryMeta, Stmt, Type, Visibility};
use crate::lang::instrument::check_constants_fit;
use crate::logic::{BinOp, Rel, Width};
use crate::parallel::{map_serial, pmap};

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub width: Width,
    pub max_tx: u32,
    /// distinct address values
    pub max_domain: u64,
    /// interpreter steps per transaction before giving up
    pub max_steps: u64,
    /// total transaction executions before giving up
    pub max_executions: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            width: 8,
            max_tx: 2,
            max_domain: 3,
            max_steps: 200_000,
            max_executions: 20_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state-space budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("oracle configuration rejected: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcreteState {
    scalars: BTreeMap<String, u64>,
    maps: BTreeMap<String, BTreeMap<u64, u64>>,
}

impl ConcreteState {
    fn initial(c: &Contract) -> Self {
        let mut scalars = BTreeMap::new();
        let mut maps = BTreeMap::new();
        for g in &c.globals {
            match g.ty {
                Type::Mapping => {
                    maps.insert(g.name.clone(), BTreeMap::new());
                }
                _ => {
                    scalars.insert(g.name.clone(), 0);
                }
            }
        }
        ConcreteState { scalars, maps }
    }
}

/// Violable queries over all bounded executions.
pub fn oracle_run(
    c: &Contract,
    cfg: &OracleConfig,
) -> Result<BTreeSet<QueryMeta>, OracleError> {
    run_impl(c, cfg, true)
}

/// Sequential twin of [`oracle_run`], kept as the benchmark baseline.
pub fn oracle_run_sequential(
    c: &Contract,
    cfg: &OracleConfig,
) -> Result<BTreeSet<QueryMeta>, OracleError> {
    run_impl(c, cfg, false)
}

fn run_impl(
    c: &Contract,
    cfg: &OracleConfig,
    parallel: bool,
) -> Result<BTreeSet<QueryMeta>, OracleError> {
    if cfg.width > 8 {
        return Err(OracleError::InvalidConfig("width must be at most 8".to_string()));
    }
    if cfg.max_tx > 4 {
        return Err(OracleError::InvalidConfig("max-tx must be at most 4".to_string()));
    }
    if cfg.max_domain == 0 || cfg.max_domain > 3 {
        return Err(OracleError::InvalidConfig("max-domain must be 1..=3".to_string()));
    }
    if !c.is_call_free() {
        return Err(OracleError::InvalidConfig(
            "contract must be call-free (run inlining first)".to_string(),
        ));
    }
    check_constants_fit(c, cfg.width)
        .map_err(|e| OracleError::InvalidConfig(e.to_string()))?;

    let mask: u64 = (1u64 << cfg.width) - 1;
    let uses_value = contract_uses_msg_value(c);
    let mut violations = BTreeSet::new();
    let mut executions: u64 = 0;

    // deployment: every constructor valuation
    let ctor_grid = valuation_grid(&c.ctor, cfg, mask, uses_value);
    budget_check(ctor_grid.len() as u64, &mut executions, cfg)?;
    let blank = ConcreteState::initial(c);
    let mut frontier: BTreeSet<ConcreteState> = BTreeSet::new();
    for val in &ctor_grid {
        let mut state = blank.clone();
        if exec_tx(c, &c.ctor, &mut state, val, cfg, mask, &mut violations)? {
            frontier.insert(state);
        }
    }

    let public: Vec<&Function> =
        c.functions.iter().filter(|f| f.visibility == Visibility::Public).collect();
    let grids: Vec<(usize, Vec<Valuation>)> = public
        .iter()
        .enumerate()
        .map(|(i, f)| (i, valuation_grid(f, cfg, mask, uses_value)))
        .collect();
    let per_state: u64 = grids.iter().map(|(_, g)| g.len() as u64).sum();

    let mut visited = frontier.clone();
    for _round in 0..cfg.max_tx {
        if frontier.is_empty() {
            break;
        }
        budget_check(frontier.len() as u64 * per_state, &mut executions, cfg)?;
        let states: Vec<ConcreteState> = frontier.iter().cloned().collect();
        let job = |state: &ConcreteState| -> Result<TxBatch, OracleError> {
            let mut batch = TxBatch::default();
            for (fi, grid) in &grids {
                for val in grid {
                    let mut next = state.clone();
                    if exec_tx(c, public[*fi], &mut next, val, cfg, mask, &mut batch.violations)? {
                        batch.states.insert(next);
                    }
                }
            }
            Ok(batch)
        };
        let batches: Vec<Result<TxBatch, OracleError>> =
            if parallel { pmap(&states, job) } else { map_serial(&states, job) };
        frontier = BTreeSet::new();
        for b in batches {
            let b = b?;
            violations.extend(b.violations);
            for s in b.states {
                if visited.insert(s.clone()) {
                    frontier.insert(s);
                }
            }
        }
    }
    Ok(violations)
}

#[derive(Default)]
struct TxBatch {
    states: BTreeSet<ConcreteState>,
    violations: BTreeSet<QueryMeta>,
}

fn budget_check(
    add: u64,
    executions: &mut u64,
    cfg: &OracleConfig,
) -> Result<(), OracleError> {
    *executions += add;
    if *executions > cfg.max_executions {
        return Err(OracleError::BudgetExceeded(format!(
            "{executions} transaction executions (cap {})",
            cfg.max_executions
        )));
    }
    Ok(())
}

/// One call's concrete inputs.
#[derive(Debug, Clone)]
struct Valuation {
    args: Vec<u64>,
    sender: u64,
    msg_value: u64,
}

fn contract_uses_msg_value(c: &Contract) -> bool {
    fn in_expr(e: &Expr) -> bool {
        match e {
            Expr::MsgValue(_) => true,
            Expr::Num(..) | Expr::Bool(..) | Expr::Var(..) | Expr::MsgSender(_) => false,
            Expr::Index(_, i, _) => in_expr(i),
            Expr::Arith(_, a, b, _) | Expr::Cmp(_, a, b, _) => in_expr(a) || in_expr(b),
            Expr::And(a, b) | Expr::Or(a, b) => in_expr(a) || in_expr(b),
            Expr::Not(a) => in_expr(a),
        }
    }
    fn in_stmts(stmts: &[Stmt]) -> bool {
        stmts.iter().any(|s| match s {
            Stmt::Assign { value, .. } => in_expr(value),
            Stmt::MapAssign { index, value, .. } => in_expr(index) || in_expr(value),
            Stmt::Assume(e) | Stmt::Assert(e, _) => in_expr(e),
            Stmt::If(c, t, e) => in_expr(c) || in_stmts(t) || in_stmts(e),
            Stmt::While { cond, body, .. } => in_expr(cond) || in_stmts(body),
            Stmt::Call { args, .. } | Stmt::ExtCall { args, .. } => args.iter().any(in_expr),
            Stmt::Havoc { .. } => false,
        })
    }
    c.all_functions().any(|f| in_stmts(&f.body))
}

fn valuation_grid(
    f: &Function,
    cfg: &OracleConfig,
    mask: u64,
    uses_value: bool,
) -> Vec<Valuation> {
    let mut per_arg: Vec<Vec<u64>> = Vec::new();
    for (_, ty) in &f.params {
        per_arg.push(match ty {
            Type::UInt => (0..=mask).collect(),
            Type::Address => (0..cfg.max_domain).collect(),
            Type::Bool => vec![0, 1],
            Type::Mapping => unreachable!("mapping params rejected by the parser"),
        });
    }
    let senders: Vec<u64> = (0..cfg.max_domain).collect();
    let values: Vec<u64> = if uses_value { (0..=mask).collect() } else { vec![0] };

    let mut out = Vec::new();
    let mut args = vec![0u64; per_arg.len()];
    enumerate_args(&per_arg, 0, &mut args, &mut |args| {
        for &sender in &senders {
            for &msg_value in &values {
                out.push(Valuation { args: args.to_vec(), sender, msg_value });
            }
        }
    });
    out
}

fn enumerate_args(
    per_arg: &[Vec<u64>],
    i: usize,
    current: &mut Vec<u64>,
    emit: &mut impl FnMut(&[u64]),
) {
    if i == per_arg.len() {
        emit(current);
        return;
    }
    for &v in &per_arg[i] {
        current[i] = v;
        enumerate_args(per_arg, i + 1, current, emit);
    }
}

struct Frame<'a> {
    locals: HashMap<&'a str, u64>,
    sender: u64,
    msg_value: u64,
}

/// Execute one transaction. Returns Ok(false) when an assume failed (the
/// transaction has no effect); assert failures are recorded and execution
/// continues.
fn exec_tx(
    c: &Contract,
    f: &Function,
    state: &mut ConcreteState,
    val: &Valuation,
    cfg: &OracleConfig,
    mask: u64,
    violations: &mut BTreeSet<QueryMeta>,
) -> Result<bool, OracleError> {
    let mut frame = Frame {
        locals: HashMap::new(),
        sender: val.sender,
        msg_value: val.msg_value,
    };
    for ((name, _), v) in f.params.iter().zip(&val.args) {
        frame.locals.insert(name.as_str(), *v);
    }
    for (name, _) in &f.locals {
        frame.locals.insert(name.as_str(), 0);
    }
    let snapshot = state.clone();
    let mut steps = 0u64;
    match exec_stmts(&f.body, c, state, &mut frame, mask, cfg, &mut steps, violations)? {
        true => Ok(true),
        false => {
            // reverted: the transaction leaves no trace
            *state = snapshot;
            Ok(false)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn exec_stmts(
    stmts: &[Stmt],
    c: &Contract,
    state: &mut ConcreteState,
    frame: &mut Frame,
    mask: u64,
    cfg: &OracleConfig,
    steps: &mut u64,
    violations: &mut BTreeSet<QueryMeta>,
) -> Result<bool, OracleError> {
    for s in stmts {
        *steps += 1;
        if *steps > cfg.max_steps {
            return Err(OracleError::BudgetExceeded(format!(
                "{steps} interpreter steps in one transaction"
            )));
        }
        match s {
            Stmt::Assign { name, value, .. } => {
                let v = eval(value, state, frame, mask);
                if let Some(slot) = frame.locals.get_mut(name.as_str()) {
                    *slot = v;
                } else {
                    state.scalars.insert(name.clone(), v);
                }
            }
            Stmt::MapAssign { map, index, value, .. } => {
                let i = eval(index, state, frame, mask);
                let v = eval(value, state, frame, mask);
                state.maps.get_mut(map).expect("declared mapping").insert(i, v);
            }
            Stmt::Assume(e) => {
                if eval(e, state, frame, mask) == 0 {
                    return Ok(false);
                }
            }
            Stmt::Assert(e, meta) => {
                if eval(e, state, frame, mask) == 0 {
                    if let Some(meta) = meta {
                        violations.insert(*meta);
                    }
                }
            }
            Stmt::If(cond, t, e) => {
                let branch = if eval(cond, state, frame, mask) != 0 { t } else { e };
                if !exec_stmts(branch, c, state, frame, mask, cfg, steps, violations)? {
                    return Ok(false);
                }
            }
            Stmt::While { cond, body, .. } => {
                while eval(cond, state, frame, mask) != 0 {
                    *steps += 1;
                    if *steps > cfg.max_steps {
                        return Err(OracleError::BudgetExceeded(format!(
                            "{steps} interpreter steps in one transaction"
                        )));
                    }
                    if !exec_stmts(body, c, state, frame, mask, cfg, steps, violations)? {
                        return Ok(false);
                    }
                }
            }
            // havocked values are resolved as "unchanged": one concrete
            // model of the verifier's any-value summary
            Stmt::Havoc { .. } => {}
            Stmt::Call { .. } | Stmt::ExtCall { .. } => {
                unreachable!("call-free checked on entry")
            }
        }
    }
    Ok(true)
}

/// Expression evaluation; booleans are 1/0.
fn eval(e: &Expr, state: &ConcreteState, frame: &Frame, mask: u64) -> u64 {
    match e {
        Expr::Num(n, _) => {
            let digits = n.to_u64_digits();
            *digits.first().unwrap_or(&0) & mask
        }
        Expr::Bool(b, _) => *b as u64,
        Expr::Var(name, _) => frame
            .locals
            .get(name.as_str())
            .copied()
            .or_else(|| state.scalars.get(name).copied())
            .unwrap_or_else(|| panic!("unbound variable `{name}` in oracle")),
        Expr::MsgSender(_) => frame.sender,
        Expr::MsgValue(_) => frame.msg_value,
        Expr::Index(map, index, _) => {
            let i = eval(index, state, frame, mask);
            state.maps.get(map).and_then(|m| m.get(&i)).copied().unwrap_or(0)
        }
        Expr::Arith(op, a, b, _) => {
            let x = eval(a, state, frame, mask);
            let y = eval(b, state, frame, mask);
            match op {
                BinOp::Add => (x + y) & mask,
                BinOp::Sub => x.wrapping_sub(y) & mask,
                BinOp::Mul => (x * y) & mask,
                BinOp::Div => {
                    if y == 0 {
                        mask
                    } else {
                        x / y
                    }
                }
                BinOp::Rem => {
                    if y == 0 {
                        x
                    } else {
                        x % y
                    }
                }
            }
        }
        Expr::Cmp(rel, a, b, _) => {
            let x = eval(a, state, frame, mask);
            let y = eval(b, state, frame, mask);
            let holds = match rel {
                Rel::Eq => x == y,
                Rel::Ne => x != y,
                Rel::Le => x <= y,
                Rel::Lt => x < y,
                Rel::Ge => x >= y,
                Rel::Gt => x > y,
            };
            holds as u64
        }
        Expr::And(a, b) => {
            (eval(a, state, frame, mask) != 0 && eval(b, state, frame, mask) != 0) as u64
        }
        Expr::Or(a, b) => {
            (eval(a, state, frame, mask) != 0 || eval(b, state, frame, mask) != 0) as u64
        }
        Expr::Not(a) => (eval(a, state, frame, mask) == 0) as u64,
    }
}
