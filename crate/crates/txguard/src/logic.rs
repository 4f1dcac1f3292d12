//! Formula kernel: quantifier-free terms over fixed-width unsigned bitvectors,
//! arrays with select/store, equality, and the uninterpreted `sum` symbol.
//!
//! Arithmetic is modular (wraparound at 2^width). Variables carry an explicit
//! version: version 0 is the current program state, version k > 0 is the state
//! k assignments ago along the path being transformed (rendered as primes).

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub type Width = u32;

/// One bit-vector sort per domain concept. Mappings are arrays from
/// address-sorted indices to uint-sorted values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    UInt,
    Addr,
    Map,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub version: u32,
    pub sort: Sort,
}

impl Var {
    pub fn uint(name: impl Into<String>) -> Self {
        Var { name: name.into(), version: 0, sort: Sort::UInt }
    }
    pub fn addr(name: impl Into<String>) -> Self {
        Var { name: name.into(), version: 0, sort: Sort::Addr }
    }
    pub fn map(name: impl Into<String>) -> Self {
        Var { name: name.into(), version: 0, sort: Sort::Map }
    }
    pub fn at_version(&self, version: u32) -> Self {
        Var { name: self.name.clone(), version, sort: self.sort }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Const {
    pub value: BigUint,
    pub width: Width,
}

impl Const {
    pub fn new(value: BigUint, width: Width) -> Self {
        let modulus = BigUint::one() << width;
        Const { value: value % modulus, width }
    }
    pub fn from_u64(value: u64, width: Width) -> Self {
        Const::new(BigUint::from(value), width)
    }
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    /// Modular evaluation. Division and modulo by zero follow the SMT-LIB
    /// bitvector semantics: t/0 = 2^w - 1 and t%0 = t.
    pub fn apply(self, lhs: &BigUint, rhs: &BigUint, width: Width) -> BigUint {
        let modulus = BigUint::one() << width;
        match self {
            BinOp::Add => (lhs + rhs) % &modulus,
            BinOp::Sub => (lhs + &modulus - (rhs % &modulus)) % &modulus,
            BinOp::Mul => (lhs * rhs) % &modulus,
            BinOp::Div => {
                if rhs.is_zero() {
                    &modulus - BigUint::one()
                } else {
                    lhs / rhs
                }
            }
            BinOp::Rem => {
                if rhs.is_zero() {
                    lhs.clone()
                } else {
                    lhs % rhs
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Const(Const),
    Bin(BinOp, Box<Term>, Box<Term>),
    /// arrayTerm[indexTerm]
    Select(Box<Term>, Box<Term>),
    /// arrayTerm with indexTerm overwritten by valueTerm
    Store(Box<Term>, Box<Term>, Box<Term>),
    /// Uninterpreted sum over all values of a mapping-typed term.
    Sum(Box<Term>),
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }
    pub fn constant(value: u64, width: Width) -> Self {
        Term::Const(Const::from_u64(value, width))
    }
    pub fn bin(op: BinOp, lhs: Term, rhs: Term) -> Self {
        Term::Bin(op, Box::new(lhs), Box::new(rhs))
    }
    pub fn add(lhs: Term, rhs: Term) -> Self {
        Term::bin(BinOp::Add, lhs, rhs)
    }
    pub fn select(array: Term, index: Term) -> Self {
        Term::Select(Box::new(array), Box::new(index))
    }
    pub fn store(array: Term, index: Term, value: Term) -> Self {
        Term::Store(Box::new(array), Box::new(index), Box::new(value))
    }
    pub fn sum(array: Term) -> Self {
        Term::Sum(Box::new(array))
    }

    /// Capture-free replacement of every occurrence of `x` (there are no
    /// binders, so plain structural replacement).
    pub fn subst(&self, x: &Var, replacement: &Term) -> Term {
        match self {
            Term::Var(v) => {
                if v == x {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Term::Const(_) => self.clone(),
            Term::Bin(op, a, b) => {
                Term::bin(*op, a.subst(x, replacement), b.subst(x, replacement))
            }
            Term::Select(a, i) => Term::select(a.subst(x, replacement), i.subst(x, replacement)),
            Term::Store(a, i, v) => Term::store(
                a.subst(x, replacement),
                i.subst(x, replacement),
                v.subst(x, replacement),
            ),
            Term::Sum(a) => Term::sum(a.subst(x, replacement)),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Select(a, i) => {
                a.collect_vars(out);
                i.collect_vars(out);
            }
            Term::Store(a, i, v) => {
                a.collect_vars(out);
                i.collect_vars(out);
                v.collect_vars(out);
            }
            Term::Sum(a) => a.collect_vars(out),
        }
    }

    /// Constant folding; modular, and division by a constant zero is left
    /// symbolic (solver semantics apply, queries guard it).
    pub fn fold(&self) -> Term {
        match self {
            Term::Bin(op, a, b) => {
                let a = a.fold();
                let b = b.fold();
                if let (Term::Const(ca), Term::Const(cb)) = (&a, &b) {
                    let divide_by_zero = matches!(op, BinOp::Div | BinOp::Rem) && cb.is_zero();
                    if !divide_by_zero {
                        return Term::Const(Const::new(
                            op.apply(&ca.value, &cb.value, ca.width),
                            ca.width,
                        ));
                    }
                }
                Term::bin(*op, a, b)
            }
            Term::Select(a, i) => Term::select(a.fold(), i.fold()),
            Term::Store(a, i, v) => Term::store(a.fold(), i.fold(), v.fold()),
            Term::Sum(a) => Term::sum(a.fold()),
            _ => self.clone(),
        }
    }

    pub fn contains_sum(&self) -> bool {
        match self {
            Term::Sum(_) => true,
            Term::Var(_) | Term::Const(_) => false,
            Term::Bin(_, a, b) => a.contains_sum() || b.contains_sum(),
            Term::Select(a, i) => a.contains_sum() || i.contains_sum(),
            Term::Store(a, i, v) => a.contains_sum() || i.contains_sum() || v.contains_sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }
    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
        }
    }
    pub fn eval(self, lhs: &BigUint, rhs: &BigUint) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Ne => lhs != rhs,
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Rel, Term, Term),
    BoolVar(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: Rel, lhs: Term, rhs: Term) -> Self {
        Formula::Atom(rel, lhs, rhs)
    }

    /// Conjunction; flattens nested conjunctions, drops `true`, collapses on
    /// `false`. Child order is preserved (canonicalization is a separate,
    /// explicit step used for deduplication).
    pub fn and(parts: Vec<Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: Vec<Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(premise: Formula, conclusion: Formula) -> Self {
        Formula::Implies(Box::new(premise), Box::new(conclusion))
    }

    /// Negation with pushing over comparisons and connectives, so dumps read
    /// like source-level conditions (e.g. not(n >= 100) prints as n < 100).
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(rel, a, b) => Formula::Atom(rel.negate(), a.clone(), b.clone()),
            Formula::Not(inner) => (**inner).clone(),
            Formula::And(parts) => Formula::or(parts.iter().map(|p| p.negate()).collect()),
            Formula::Or(parts) => Formula::and(parts.iter().map(|p| p.negate()).collect()),
            Formula::Implies(p, q) => Formula::and(vec![(**p).clone(), q.negate()]),
            Formula::BoolVar(_) => Formula::Not(Box::new(self.clone())),
        }
    }

    pub fn subst(&self, x: &Var, replacement: &Term) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) => self.clone(),
            Formula::Atom(rel, a, b) => {
                Formula::Atom(*rel, a.subst(x, replacement), b.subst(x, replacement))
            }
            Formula::Not(inner) => Formula::Not(Box::new(inner.subst(x, replacement))),
            Formula::And(parts) => {
                Formula::And(parts.iter().map(|p| p.subst(x, replacement)).collect())
            }
            Formula::Or(parts) => {
                Formula::Or(parts.iter().map(|p| p.subst(x, replacement)).collect())
            }
            Formula::Implies(p, q) => {
                Formula::implies(p.subst(x, replacement), q.subst(x, replacement))
            }
        }
    }

    pub fn free_vars(&self) -> FreeVars {
        let mut fv = FreeVars::default();
        self.collect_free_vars(&mut fv);
        fv
    }

    fn collect_free_vars(&self, fv: &mut FreeVars) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, a, b) => {
                a.collect_vars(&mut fv.vars);
                b.collect_vars(&mut fv.vars);
            }
            Formula::BoolVar(name) => {
                fv.bools.insert(name.clone());
            }
            Formula::Not(inner) => inner.collect_free_vars(fv),
            Formula::And(parts) | Formula::Or(parts) => {
                for p in parts {
                    p.collect_free_vars(fv);
                }
            }
            Formula::Implies(p, q) => {
                p.collect_free_vars(fv);
                q.collect_free_vars(fv);
            }
        }
    }

    /// Top-level conjuncts (the formula itself when it is not a conjunction).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(parts) => parts.iter().collect(),
            other => vec![other],
        }
    }

    pub fn contains_sum(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) => false,
            Formula::Atom(_, a, b) => a.contains_sum() || b.contains_sum(),
            Formula::Not(inner) => inner.contains_sum(),
            Formula::And(parts) | Formula::Or(parts) => parts.iter().any(|p| p.contains_sum()),
            Formula::Implies(p, q) => p.contains_sum() || q.contains_sum(),
        }
    }

    /// Triviality removal: constant folding plus reflexivity on syntactically
    /// equal operands. Keeps the implication shape of VCs intact (only a
    /// trivially true conclusion or false premise collapses the implication).
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) => self.clone(),
            Formula::Atom(rel, a, b) => {
                let a = a.fold();
                let b = b.fold();
                if !a.contains_sum() && a == b {
                    return match rel {
                        Rel::Eq | Rel::Le | Rel::Ge => Formula::True,
                        Rel::Ne | Rel::Lt | Rel::Gt => Formula::False,
                    };
                }
                if let (Term::Const(ca), Term::Const(cb)) = (&a, &b) {
                    return if rel.eval(&ca.value, &cb.value) {
                        Formula::True
                    } else {
                        Formula::False
                    };
                }
                // unsigned range bounds are vacuous
                if let Term::Const(c) = &b {
                    if !a.contains_sum() {
                        if c.is_zero() {
                            match rel {
                                Rel::Ge => return Formula::True,
                                Rel::Lt => return Formula::False,
                                _ => {}
                            }
                        } else if c.value == max_value(c.width) {
                            match rel {
                                Rel::Le => return Formula::True,
                                Rel::Gt => return Formula::False,
                                _ => {}
                            }
                        }
                    }
                }
                if let Term::Const(c) = &a {
                    if !b.contains_sum() {
                        if c.is_zero() {
                            match rel {
                                Rel::Le => return Formula::True,
                                Rel::Gt => return Formula::False,
                                _ => {}
                            }
                        } else if c.value == max_value(c.width) {
                            match rel {
                                Rel::Ge => return Formula::True,
                                Rel::Lt => return Formula::False,
                                _ => {}
                            }
                        }
                    }
                }
                Formula::Atom(*rel, a, b)
            }
            Formula::Not(inner) => match inner.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                other => Formula::Not(Box::new(other)),
            },
            Formula::And(parts) => Formula::and(parts.iter().map(|p| p.simplify()).collect()),
            Formula::Or(parts) => Formula::or(parts.iter().map(|p| p.simplify()).collect()),
            Formula::Implies(p, q) => match (p.simplify(), q.simplify()) {
                (_, Formula::True) => Formula::True,
                (Formula::False, _) => Formula::True,
                (p, q) => Formula::implies(p, q),
            },
        }
    }

    /// Canonical form for syntactic deduplication: conjunction and
    /// disjunction children sorted and deduplicated, recursively.
    pub fn canon(&self) -> Formula {
        match self {
            Formula::And(parts) => {
                let mut canon: Vec<Formula> = parts.iter().map(|p| p.canon()).collect();
                canon.sort();
                canon.dedup();
                Formula::and(canon)
            }
            Formula::Or(parts) => {
                let mut canon: Vec<Formula> = parts.iter().map(|p| p.canon()).collect();
                canon.sort();
                canon.dedup();
                Formula::or(canon)
            }
            Formula::Not(inner) => Formula::Not(Box::new(inner.canon())),
            Formula::Implies(p, q) => Formula::implies(p.canon(), q.canon()),
            other => other.clone(),
        }
    }
}

/// Free variables of a formula: term-level variables plus propositional ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub vars: BTreeSet<Var>,
    pub bools: BTreeSet<String>,
}

impl FreeVars {
    pub fn is_superset(&self, other: &FreeVars) -> bool {
        other.vars.is_subset(&self.vars) && other.bools.is_subset(&self.bools)
    }
    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.bools.is_empty()
    }
}

fn max_value(width: Width) -> BigUint {
    (BigUint::one() << width) - BigUint::one()
}

fn prime_marks(version: u32) -> String {
    match version {
        0 => String::new(),
        1 => "'".to_string(),
        2 => "''".to_string(),
        n => format!("'{{{n}}}"),
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, prime_marks(self.version))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{}", c.value),
            Term::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Term::Select(a, i) => write!(f, "{a}[{i}]"),
            Term::Store(a, i, v) => write!(f, "{a}<{i} <| {v}>"),
            Term::Sum(a) => write!(f, "sum({a})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(rel, a, b) => write!(f, "{a} {} {b}", rel.symbol()),
            Formula::BoolVar(name) => write!(f, "{name}"),
            Formula::Not(inner) => write!(f, "!({inner})"),
            Formula::And(parts) => {
                let rendered: Vec<String> = parts.iter().map(|p| format!("({p})")).collect();
                write!(f, "{}", rendered.join(" /\\ "))
            }
            Formula::Or(parts) => {
                let rendered: Vec<String> = parts.iter().map(|p| format!("({p})")).collect();
                write!(f, "{}", rendered.join(" \\/ "))
            }
            Formula::Implies(p, q) => write!(f, "({p}) -> ({q})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> Var {
        Var::uint("n")
    }

    #[test]
    fn subst_renames_uniformly() {
        // (n+1 >= n)[n'/n] -> n'+1 >= n'
        let f = Formula::atom(
            Rel::Ge,
            Term::add(Term::var(n()), Term::constant(1, 256)),
            Term::var(n()),
        );
        let primed = n().at_version(1);
        let g = f.subst(&n(), &Term::var(primed.clone()));
        assert_eq!(
            g,
            Formula::atom(
                Rel::Ge,
                Term::add(Term::var(primed.clone()), Term::constant(1, 256)),
                Term::var(primed),
            )
        );
    }

    #[test]
    fn subst_under_store_index_position() {
        // (x = x'<y <| e>)[z/y] -> x = x'<z <| e>
        let x = Var::map("x");
        let y = Var::addr("y");
        let z = Var::addr("z");
        let e = Term::var(Var::uint("e"));
        let f = Formula::atom(
            Rel::Eq,
            Term::var(x.clone()),
            Term::store(Term::var(x.at_version(1)), Term::var(y.clone()), e.clone()),
        );
        let g = f.subst(&y, &Term::var(z.clone()));
        assert_eq!(
            g,
            Formula::atom(
                Rel::Eq,
                Term::var(x.clone()),
                Term::store(Term::var(x.at_version(1)), Term::var(z), e),
            )
        );
    }

    #[test]
    fn subst_missing_var_is_identity() {
        let f = Formula::atom(Rel::Le, Term::var(n()), Term::constant(100, 256));
        let g = f.subst(&Var::uint("absent"), &Term::constant(0, 256));
        assert_eq!(f, g);
    }

    #[test]
    fn free_vars_of_true_is_empty() {
        assert!(Formula::True.free_vars().is_empty());
    }

    #[test]
    fn free_vars_of_mul_query_shape() {
        // FV(a=0 \/ (a!=0 /\ (a*b)/a = b)) = {a, b}
        let a = Var::uint("a");
        let b = Var::uint("b");
        let f = Formula::or(vec![
            Formula::atom(Rel::Eq, Term::var(a.clone()), Term::constant(0, 256)),
            Formula::and(vec![
                Formula::atom(Rel::Ne, Term::var(a.clone()), Term::constant(0, 256)),
                Formula::atom(
                    Rel::Eq,
                    Term::bin(
                        BinOp::Div,
                        Term::bin(BinOp::Mul, Term::var(a.clone()), Term::var(b.clone())),
                        Term::var(a.clone()),
                    ),
                    Term::var(b.clone()),
                ),
            ]),
        ]);
        let fv = f.free_vars();
        assert_eq!(fv.vars, BTreeSet::from([a, b]));
    }

    #[test]
    fn free_vars_of_sum_atom() {
        let f = Formula::atom(Rel::Eq, Term::sum(Term::var(Var::map("x"))), Term::var(n()));
        let fv = f.free_vars();
        assert_eq!(fv.vars, BTreeSet::from([Var::map("x"), n()]));
    }

    #[test]
    fn subst_then_free_vars_removes_var() {
        let f = Formula::atom(Rel::Ge, Term::var(n()), Term::constant(1, 256));
        let g = f.subst(&n(), &Term::constant(5, 256));
        assert!(!g.free_vars().vars.contains(&n()));
    }

    #[test]
    fn constant_folding_wraps_at_width() {
        // At width 256, 0x8ff..ff + 0x700..01 folds to 0.
        let big_a = BigUint::parse_bytes(
            b"8fffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff",
            16,
        )
        .unwrap();
        let big_b = BigUint::parse_bytes(
            b"7000000000000000000000000000000000000000000000000000000000000001",
            16,
        )
        .unwrap();
        let t = Term::bin(
            BinOp::Add,
            Term::Const(Const::new(big_a, 256)),
            Term::Const(Const::new(big_b, 256)),
        );
        assert_eq!(t.fold(), Term::constant(0, 256));
    }

    #[test]
    fn division_by_constant_zero_not_folded() {
        let t = Term::bin(BinOp::Div, Term::constant(3, 8), Term::constant(0, 8));
        assert_eq!(t.fold(), t);
    }

    #[test]
    fn simplify_reflexive_ge_is_true() {
        let a = Term::var(Var::uint("a"));
        let f = Formula::atom(Rel::Ge, a.clone(), a);
        assert_eq!(f.simplify(), Formula::True);
    }

    #[test]
    fn simplify_keeps_implication_with_true_premise() {
        let q = Formula::atom(Rel::Ge, Term::var(n()), Term::constant(1, 256));
        let f = Formula::implies(Formula::True, q.clone());
        assert_eq!(f.simplify(), Formula::implies(Formula::True, q));
    }

    #[test]
    fn canon_sorts_and_dedups_conjuncts() {
        let a = Formula::atom(Rel::Ge, Term::var(n()), Term::constant(1, 256));
        let b = Formula::atom(Rel::Le, Term::var(n()), Term::constant(100, 256));
        let f1 = Formula::and(vec![a.clone(), b.clone(), a.clone()]);
        let f2 = Formula::and(vec![b, a]);
        assert_eq!(f1.canon(), f2.canon());
    }

    #[test]
    fn negate_pushes_through_comparisons() {
        let f = Formula::atom(Rel::Ge, Term::var(n()), Term::constant(100, 256));
        assert_eq!(
            f.negate(),
            Formula::atom(Rel::Lt, Term::var(n()), Term::constant(100, 256))
        );
    }
}
