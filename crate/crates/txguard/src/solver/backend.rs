//! SMT-LIB v2 emission and the external solver processes.
//!
//! Queries go to an interactive solver process over a pipe (the same
//! protocol as `z3 -in`), each prefixed with (reset) so queries stay
//! independent. A pool keeps idle processes around; every in-flight query
//! has exclusive use of one process, and a query that hits its wall-clock
//! deadline kills its process rather than returning it.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError, TryRecvError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::{SolverError, SolverVerdict, UnknownReason};
use crate::logic::{BinOp, Formula, Rel, Sort, Term, Var, Width};

/// Script asserting the negation of `vc`: unsat means the VC is valid.
pub fn smtlib_script(vc: &Formula, width: Width, addr_width: Width) -> String {
    assert!(!vc.contains_sum(), "sum symbol must be eliminated before emission");
    let fv = vc.free_vars();
    let mut out = String::new();
    out.push_str("(set-logic QF_AUFBV)\n");
    for v in &fv.vars {
        out.push_str(&declare(v, width, addr_width));
    }
    let bools: BTreeSet<&String> = fv.bools.iter().collect();
    for b in bools {
        out.push_str(&format!("(declare-const |{b}| Bool)\n"));
    }
    out.push_str("(assert (not ");
    emit_formula(vc, &mut out);
    out.push_str("))\n(check-sat)\n");
    out
}

fn declare(v: &Var, width: Width, addr_width: Width) -> String {
    let sort = match v.sort {
        Sort::UInt => format!("(_ BitVec {width})"),
        Sort::Addr => format!("(_ BitVec {addr_width})"),
        Sort::Map => format!("(Array (_ BitVec {addr_width}) (_ BitVec {width}))"),
    };
    format!("(declare-const {} {sort})\n", sym(v))
}

fn sym(v: &Var) -> String {
    format!("|{}#{}|", v.name, v.version)
}

fn emit_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&sym(v)),
        Term::Const(c) => out.push_str(&format!("(_ bv{} {})", c.value, c.width)),
        Term::Bin(op, a, b) => {
            let name = match op {
                BinOp::Add => "bvadd",
                BinOp::Sub => "bvsub",
                BinOp::Mul => "bvmul",
                BinOp::Div => "bvudiv",
                BinOp::Rem => "bvurem",
            };
            out.push_str(&format!("({name} "));
            emit_term(a, out);
            out.push(' ');
            emit_term(b, out);
            out.push(')');
        }
        Term::Select(a, i) => {
            out.push_str("(select ");
            emit_term(a, out);
            out.push(' ');
            emit_term(i, out);
            out.push(')');
        }
        Term::Store(a, i, v) => {
            out.push_str("(store ");
            emit_term(a, out);
            out.push(' ');
            emit_term(i, out);
            out.push(' ');
            emit_term(v, out);
            out.push(')');
        }
        Term::Sum(_) => unreachable!("sum eliminated before emission"),
    }
}

fn emit_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::BoolVar(name) => out.push_str(&format!("|{name}|")),
        Formula::Atom(rel, a, b) => {
            let op = match rel {
                Rel::Eq => "=",
                Rel::Ne => "distinct",
                Rel::Le => "bvule",
                Rel::Lt => "bvult",
                Rel::Ge => "bvuge",
                Rel::Gt => "bvugt",
            };
            out.push_str(&format!("({op} "));
            emit_term(a, out);
            out.push(' ');
            emit_term(b, out);
            out.push(')');
        }
        Formula::Not(inner) => {
            out.push_str("(not ");
            emit_formula(inner, out);
            out.push(')');
        }
        Formula::And(parts) => {
            out.push_str("(and");
            for p in parts {
                out.push(' ');
                emit_formula(p, out);
            }
            out.push(')');
        }
        Formula::Or(parts) => {
            out.push_str("(or");
            for p in parts {
                out.push(' ');
                emit_formula(p, out);
            }
            out.push(')');
        }
        Formula::Implies(p, q) => {
            out.push_str("(=> ");
            emit_formula(p, out);
            out.push(' ');
            emit_formula(q, out);
            out.push(')');
        }
    }
}

struct SolverProc {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Drop for SolverProc {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum QueryOutcome {
    Verdict(SolverVerdict),
    /// process exited or pipe broke; retry on a fresh process
    Dead,
    Timeout,
    /// solver complained; verdict unusable and process state suspect
    Poisoned,
}

pub struct SolverPool {
    cmd: String,
    args: Vec<String>,
    idle: Mutex<Vec<SolverProc>>,
}

impl SolverPool {
    pub fn new(cmd: String, args: Vec<String>) -> Self {
        SolverPool { cmd, args, idle: Mutex::new(Vec::new()) }
    }

    fn spawn(&self) -> Result<SolverProc, SolverError> {
        let mut child = Command::new(&self.cmd)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Unavailable { cmd: self.cmd.clone(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut line = String::new();
            loop {
                line.clear();
                match reader.read_line(&mut line) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => {
                        if tx.send(line.trim().to_string()).is_err() {
                            break;
                        }
                    }
                }
            }
        });
        Ok(SolverProc { child, stdin, lines: rx })
    }

    fn acquire(&self) -> Result<SolverProc, SolverError> {
        if let Some(p) = self.idle.lock().unwrap().pop() {
            return Ok(p);
        }
        self.spawn()
    }

    fn release(&self, proc_: SolverProc) {
        // drop any stray output so the next query starts clean
        loop {
            match proc_.lines.try_recv() {
                Ok(_) => continue,
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return,
            }
        }
        self.idle.lock().unwrap().push(proc_);
    }

    fn query(proc_: &mut SolverProc, script: &str, timeout: Duration) -> QueryOutcome {
        let mut payload = String::with_capacity(script.len() + 8);
        payload.push_str("(reset)\n");
        payload.push_str(script);
        if proc_.stdin.write_all(payload.as_bytes()).is_err() {
            return QueryOutcome::Dead;
        }
        if proc_.stdin.flush().is_err() {
            return QueryOutcome::Dead;
        }
        let deadline = Instant::now() + timeout;
        loop {
            let now = Instant::now();
            if now >= deadline {
                return QueryOutcome::Timeout;
            }
            match proc_.lines.recv_timeout(deadline - now) {
                Ok(line) => match line.split_whitespace().next() {
                    Some("sat") => return QueryOutcome::Verdict(SolverVerdict::Invalid),
                    Some("unsat") => return QueryOutcome::Verdict(SolverVerdict::Valid),
                    Some("unknown") => {
                        return QueryOutcome::Verdict(SolverVerdict::Unknown(
                            UnknownReason::SolverError,
                        ))
                    }
                    Some(word) if word.starts_with("(error") => return QueryOutcome::Poisoned,
                    _ => continue,
                },
                Err(RecvTimeoutError::Timeout) => return QueryOutcome::Timeout,
                Err(RecvTimeoutError::Disconnected) => return QueryOutcome::Dead,
            }
        }
    }

    /// Run one script with a hard wall-clock deadline. A dead process gets
    /// one retry on a fresh spawn, so stale pool entries cannot fail a run.
    pub fn check(&self, script: &str, timeout: Duration) -> Result<SolverVerdict, SolverError> {
        let mut proc_ = self.acquire()?;
        match Self::query(&mut proc_, script, timeout) {
            QueryOutcome::Verdict(v) => {
                self.release(proc_);
                Ok(v)
            }
            QueryOutcome::Timeout => Ok(SolverVerdict::Unknown(UnknownReason::Timeout)),
            QueryOutcome::Poisoned => Ok(SolverVerdict::Unknown(UnknownReason::SolverError)),
            QueryOutcome::Dead => {
                drop(proc_);
                let mut fresh = self.spawn()?;
                match Self::query(&mut fresh, script, timeout) {
                    QueryOutcome::Verdict(v) => {
                        self.release(fresh);
                        Ok(v)
                    }
                    QueryOutcome::Timeout => Ok(SolverVerdict::Unknown(UnknownReason::Timeout)),
                    _ => Ok(SolverVerdict::Unknown(UnknownReason::SolverError)),
                }
            }
        }
    }
}
