//! Syntactic fast paths: free-variable invalidity checking and validity
//! templates, both applied before sum elimination and the SMT backend.

use num_bigint::BigUint;
use num_traits::One;

use super::SolverVerdict;
use crate::logic::{BinOp, Const, Formula, Rel, Term, Width};

/// Invalidity fast path for an implication-shaped VC: invalid whenever the
/// premise's free variables do not cover the conclusion's. May downgrade a
/// valid VC to invalid (a lost proof), never the reverse.
pub fn quick_invalid(vc: &Formula) -> bool {
    if let Formula::Implies(premise, conclusion) = vc {
        return !premise.free_vars().is_superset(&conclusion.free_vars());
    }
    false
}

/// One syntactic validity rule. Matching is premise-conjunct membership plus
/// side conditions on constants, evaluated at the run's bit-width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateRule {
    /// conclusion is literally one of the premise's conjuncts
    PremiseConjunct,
    /// F -> x >= (x*n1)/n2 when n1 <= n2 and n2 != 0
    DivUpperBound,
    /// sum(x)=n in F and x[p] >= v in F entail x[q]+v >= x[q] when n+n
    /// does not overflow
    SumBoundedAdd,
    /// sum(x)=y, y=n variant of the rule above
    SumAliasBoundedAdd,
    /// F -> n1+(x%n2) >= n1 when n1+n2 does not overflow and n2 != 0
    ModUpperBound,
}

impl TemplateRule {
    pub fn registry() -> Vec<TemplateRule> {
        vec![
            TemplateRule::PremiseConjunct,
            TemplateRule::DivUpperBound,
            TemplateRule::SumBoundedAdd,
            TemplateRule::SumAliasBoundedAdd,
            TemplateRule::ModUpperBound,
        ]
    }
}

pub fn match_template(
    rules: &[TemplateRule],
    vc: &Formula,
    width: Width,
) -> Option<SolverVerdict> {
    let Formula::Implies(premise, conclusion) = vc else {
        return None;
    };
    let conjuncts = premise.conjuncts();
    for rule in rules {
        let hit = match rule {
            TemplateRule::PremiseConjunct => conjuncts.iter().any(|c| *c == &**conclusion),
            TemplateRule::DivUpperBound => match_div_upper_bound(conclusion, width),
            TemplateRule::SumBoundedAdd => match_sum_bounded_add(&conjuncts, conclusion, width),
            TemplateRule::SumAliasBoundedAdd => {
                match_sum_alias_bounded_add(&conjuncts, conclusion, width)
            }
            TemplateRule::ModUpperBound => match_mod_upper_bound(conclusion, width),
        };
        if hit {
            return Some(SolverVerdict::Valid);
        }
    }
    None
}

fn no_overflow_sum(a: &BigUint, b: &BigUint, width: Width) -> bool {
    a + b < (BigUint::one() << width)
}

/// x >= (x*n1)/n2 with n1 <= n2 and n2 != 0.
fn match_div_upper_bound(conclusion: &Formula, _width: Width) -> bool {
    let Formula::Atom(Rel::Ge, x, rhs) = conclusion else {
        return false;
    };
    let Term::Bin(BinOp::Div, numerator, n2) = rhs else {
        return false;
    };
    let Term::Bin(BinOp::Mul, x2, n1) = &**numerator else {
        return false;
    };
    let (Term::Const(Const { value: n1, .. }), Term::Const(Const { value: n2, .. })) =
        (&**n1, &**n2)
    else {
        return false;
    };
    &**x2 == x && n1 <= n2 && !is_zero(n2)
}

fn is_zero(n: &BigUint) -> bool {
    use num_traits::Zero;
    n.is_zero()
}

/// Conclusion shape x[q] + v >= x[q]; returns the map term and v.
fn bounded_add_shape(conclusion: &Formula) -> Option<(&Term, &Term)> {
    let Formula::Atom(Rel::Ge, lhs, rhs) = conclusion else {
        return None;
    };
    let Term::Bin(BinOp::Add, sel, v) = lhs else {
        return None;
    };
    if **sel != *rhs {
        return None;
    }
    let Term::Select(map, _) = &**sel else {
        return None;
    };
    Some((map, v))
}

/// Premise conjunct sum(x) = n (either orientation), for the given map.
fn find_sum_const<'a>(conjuncts: &[&'a Formula], map: &Term) -> Option<&'a BigUint> {
    conjuncts.iter().find_map(|c| match c {
        Formula::Atom(Rel::Eq, a, b) => match (a, b) {
            (Term::Sum(m), Term::Const(Const { value, .. }))
            | (Term::Const(Const { value, .. }), Term::Sum(m))
                if **m == *map =>
            {
                Some(value)
            }
            _ => None,
        },
        _ => None,
    })
}

/// Premise conjunct x[p] >= v for the given map and value term.
fn has_lower_bounded_cell(conjuncts: &[&Formula], map: &Term, v: &Term) -> bool {
    conjuncts.iter().any(|c| match c {
        Formula::Atom(Rel::Ge, lhs, rhs) => {
            matches!(lhs, Term::Select(m, _) if **m == *map) && rhs == v
        }
        _ => false,
    })
}

fn match_sum_bounded_add(conjuncts: &[&Formula], conclusion: &Formula, width: Width) -> bool {
    let Some((map, v)) = bounded_add_shape(conclusion) else {
        return false;
    };
    let Some(n) = find_sum_const(conjuncts, map) else {
        return false;
    };
    no_overflow_sum(n, n, width) && has_lower_bounded_cell(conjuncts, map, v)
}

fn match_sum_alias_bounded_add(
    conjuncts: &[&Formula],
    conclusion: &Formula,
    width: Width,
) -> bool {
    let Some((map, v)) = bounded_add_shape(conclusion) else {
        return false;
    };
    // sum(x) = y
    let alias = conjuncts.iter().find_map(|c| match c {
        Formula::Atom(Rel::Eq, a, b) => match (a, b) {
            (Term::Sum(m), y @ Term::Var(_)) | (y @ Term::Var(_), Term::Sum(m))
                if **m == *map =>
            {
                Some(y)
            }
            _ => None,
        },
        _ => None,
    });
    let Some(alias) = alias else {
        return false;
    };
    // y = n
    let n = conjuncts.iter().find_map(|c| match c {
        Formula::Atom(Rel::Eq, a, b) => match (a, b) {
            (y, Term::Const(Const { value, .. })) if y == alias => Some(value),
            (Term::Const(Const { value, .. }), y) if y == alias => Some(value),
            _ => None,
        },
        _ => None,
    });
    let Some(n) = n else {
        return false;
    };
    no_overflow_sum(n, n, width) && has_lower_bounded_cell(conjuncts, map, v)
}

/// n1 + (x % n2) >= n1 with n1+n2 not overflowing and n2 != 0.
fn match_mod_upper_bound(conclusion: &Formula, width: Width) -> bool {
    let Formula::Atom(Rel::Ge, lhs, rhs) = conclusion else {
        return false;
    };
    let Term::Bin(BinOp::Add, n1, modulo) = lhs else {
        return false;
    };
    if **n1 != *rhs {
        return false;
    }
    let Term::Const(Const { value: n1, .. }) = &**n1 else {
        return false;
    };
    let Term::Bin(BinOp::Rem, _, n2) = &**modulo else {
        return false;
    };
    let Term::Const(Const { value: n2, .. }) = &**n2 else {
        return false;
    };
    no_overflow_sum(n1, n2, width) && !is_zero(n2)
}
