//! Elimination of the uninterpreted sum symbol by case analysis over
//! partitions of the index set.
//!
//! For each mapping-variable family (a variable together with its primed
//! versions) the index set I collects every term used to select from or
//! store into any member of the family. A sum equality over version v is
//! replaced by one clause per partition of I: indices in the same block are
//! equal, indices in different blocks differ, and the sum of one
//! representative cell per block plus the fresh rest-variable R equals the
//! right-hand side. Side conditions assert the chained cell additions and
//! the final +R do not overflow, and the fresh boolean B states the rest
//! summation itself does not overflow. R and B are shared across all
//! versions of a family: stores along a path only touch indices in I, so
//! the rest mass is identical for every version.

use std::collections::{BTreeMap, BTreeSet};

use super::SolverError;
use crate::logic::{Formula, Rel, Sort, Term, Var, Width};

pub fn eliminate_sum(f: &Formula, width: Width) -> Result<Formula, SolverError> {
    if !f.contains_sum() {
        return Ok(f.clone());
    }
    check_shape(f, false)?;
    let mut indices: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
    collect_indices(f, &mut indices);
    Ok(rewrite(f, &indices, width))
}

/// sum may appear only as one side of an equality atom, applied to a
/// mapping variable.
fn check_shape(f: &Formula, under_atom: bool) -> Result<(), SolverError> {
    match f {
        Formula::Atom(rel, a, b) => {
            for t in [a, b] {
                if let Term::Sum(arg) = t {
                    if *rel != Rel::Eq {
                        return Err(SolverError::UnsupportedSumShape(format!(
                            "sum under relation {}",
                            rel.symbol()
                        )));
                    }
                    if !matches!(&**arg, Term::Var(v) if v.sort == Sort::Map) {
                        return Err(SolverError::UnsupportedSumShape(format!(
                            "sum applied to non-variable term {arg}"
                        )));
                    }
                    check_no_nested_sum(arg)?;
                } else {
                    check_term(t)?;
                }
            }
            let _ = under_atom;
            Ok(())
        }
        Formula::True | Formula::False | Formula::BoolVar(_) => Ok(()),
        Formula::Not(inner) => check_shape(inner, false),
        Formula::And(parts) | Formula::Or(parts) => {
            parts.iter().try_for_each(|p| check_shape(p, false))
        }
        Formula::Implies(p, q) => {
            check_shape(p, false)?;
            check_shape(q, false)
        }
    }
}

fn check_term(t: &Term) -> Result<(), SolverError> {
    match t {
        Term::Sum(_) => Err(SolverError::UnsupportedSumShape(
            "sum nested inside a term".to_string(),
        )),
        Term::Var(_) | Term::Const(_) => Ok(()),
        Term::Bin(_, a, b) => {
            check_term(a)?;
            check_term(b)
        }
        Term::Select(a, i) => {
            check_term(a)?;
            check_term(i)
        }
        Term::Store(a, i, v) => {
            check_term(a)?;
            check_term(i)?;
            check_term(v)
        }
    }
}

fn check_no_nested_sum(t: &Term) -> Result<(), SolverError> {
    if t.contains_sum() {
        return Err(SolverError::UnsupportedSumShape("nested sum".to_string()));
    }
    Ok(())
}

/// Index terms per family (family = variable name, all versions).
fn collect_indices(f: &Formula, out: &mut BTreeMap<String, BTreeSet<Term>>) {
    match f {
        Formula::Atom(_, a, b) => {
            collect_term_indices(a, out);
            collect_term_indices(b, out);
        }
        Formula::True | Formula::False | Formula::BoolVar(_) => {}
        Formula::Not(inner) => collect_indices(inner, out),
        Formula::And(parts) | Formula::Or(parts) => {
            parts.iter().for_each(|p| collect_indices(p, out))
        }
        Formula::Implies(p, q) => {
            collect_indices(p, out);
            collect_indices(q, out);
        }
    }
}

fn collect_term_indices(t: &Term, out: &mut BTreeMap<String, BTreeSet<Term>>) {
    match t {
        Term::Select(a, i) => {
            if let Term::Var(v) = &**a {
                out.entry(v.name.clone()).or_default().insert((**i).clone());
            }
            collect_term_indices(a, out);
            collect_term_indices(i, out);
        }
        Term::Store(a, i, val) => {
            if let Term::Var(v) = &**a {
                out.entry(v.name.clone()).or_default().insert((**i).clone());
            }
            collect_term_indices(a, out);
            collect_term_indices(i, out);
            collect_term_indices(val, out);
        }
        Term::Bin(_, a, b) => {
            collect_term_indices(a, out);
            collect_term_indices(b, out);
        }
        Term::Sum(a) => collect_term_indices(a, out),
        Term::Var(_) | Term::Const(_) => {}
    }
}

fn rewrite(f: &Formula, indices: &BTreeMap<String, BTreeSet<Term>>, width: Width) -> Formula {
    match f {
        Formula::Atom(Rel::Eq, a, b) => match (a, b) {
            (Term::Sum(arg), e) | (e, Term::Sum(arg)) => expand_sum(arg, e, indices, width),
            _ => f.clone(),
        },
        Formula::Not(inner) => Formula::Not(Box::new(rewrite(inner, indices, width))),
        Formula::And(parts) => {
            Formula::and(parts.iter().map(|p| rewrite(p, indices, width)).collect())
        }
        Formula::Or(parts) => {
            Formula::or(parts.iter().map(|p| rewrite(p, indices, width)).collect())
        }
        Formula::Implies(p, q) => {
            Formula::implies(rewrite(p, indices, width), rewrite(q, indices, width))
        }
        other => other.clone(),
    }
}

fn rest_var(family: &str) -> Var {
    Var { name: format!("R!{family}"), version: 0, sort: Sort::UInt }
}

fn no_overflow_bool(family: &str) -> Formula {
    Formula::BoolVar(format!("B!{family}"))
}

/// Replacement for sum(x_v) = e.
fn expand_sum(
    map: &Term,
    e: &Term,
    indices: &BTreeMap<String, BTreeSet<Term>>,
    _width: Width,
) -> Formula {
    let Term::Var(v) = map else { unreachable!("shape-checked sum argument") };
    let family = &v.name;
    let index_set: Vec<Term> =
        indices.get(family).map(|s| s.iter().cloned().collect()).unwrap_or_default();
    let rest = Term::Var(rest_var(family));
    let b = no_overflow_bool(family);
    let cell = |i: &Term| Term::select(map.clone(), i.clone());

    match index_set.len() {
        0 => {
            // R = e  /\  B
            Formula::and(vec![
                Formula::atom(Rel::Eq, rest.clone(), e.clone()),
                b,
            ])
        }
        1 => {
            // x[i] + R = e  /\  x[i] + R >= R  /\  B
            let total = Term::add(cell(&index_set[0]), rest.clone());
            Formula::and(vec![
                Formula::atom(Rel::Eq, total.clone(), e.clone()),
                Formula::atom(Rel::Ge, total, rest),
                b,
            ])
        }
        _ => {
            let mut g1 = Vec::new();
            let mut g2 = Vec::new();
            for partition in partitions(&index_set) {
                let guard = partition_guard(&partition);
                let reps: Vec<&Term> = partition.iter().map(|block| &block[0]).collect();

                // chained sum of one representative per block, then + R
                let mut chain = cell(reps[0]);
                let mut partials = Vec::new();
                for rep in &reps[1..] {
                    chain = Term::add(chain, cell(rep));
                    partials.push((chain.clone(), cell(rep)));
                }
                let total = Term::add(chain, rest.clone());

                g1.push(Formula::implies(
                    guard.clone(),
                    Formula::atom(Rel::Eq, total.clone(), e.clone()),
                ));

                let mut side = Vec::new();
                for (partial, last_cell) in partials {
                    side.push(Formula::atom(Rel::Ge, partial, last_cell));
                }
                side.push(Formula::atom(Rel::Ge, total, rest.clone()));
                g2.push(Formula::implies(guard, Formula::and(side)));
            }
            g2.push(b);
            Formula::and(vec![Formula::and(g1), Formula::and(g2)])
        }
    }
}

/// Equalities within blocks, disequalities across blocks.
fn partition_guard(partition: &[Vec<Term>]) -> Formula {
    let mut parts = Vec::new();
    for block in partition {
        for pair in block.windows(2) {
            parts.push(Formula::atom(Rel::Eq, pair[0].clone(), pair[1].clone()));
        }
    }
    for (u, block_u) in partition.iter().enumerate() {
        for block_v in partition.iter().skip(u + 1) {
            for i in block_u {
                for j in block_v {
                    parts.push(Formula::atom(Rel::Ne, i.clone(), j.clone()));
                }
            }
        }
    }
    Formula::and(parts)
}

/// All set partitions, enumerated via restricted growth strings so the
/// all-in-one-block partition comes first and the all-singletons one last.
/// Blocks keep element order; block order follows first occurrence.
pub fn partitions<T: Clone>(items: &[T]) -> Vec<Vec<Vec<T>>> {
    let n = items.len();
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    enumerate_rgs(items, &mut assignment, 1, &mut out);
    out
}

fn enumerate_rgs<T: Clone>(
    items: &[T],
    assignment: &mut Vec<usize>,
    pos: usize,
    out: &mut Vec<Vec<Vec<T>>>,
) {
    let n = items.len();
    if pos == n {
        let blocks = assignment.iter().max().copied().unwrap_or(0) + 1;
        let mut partition: Vec<Vec<T>> = vec![Vec::new(); blocks];
        for (i, &b) in assignment.iter().enumerate() {
            partition[b].push(items[i].clone());
        }
        out.push(partition);
        return;
    }
    let max_used = assignment[..pos].iter().max().copied().unwrap_or(0);
    for b in 0..=max_used + 1 {
        assignment[pos] = b;
        enumerate_rgs(items, assignment, pos + 1, out);
    }
    assignment[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts_are_bell_numbers() {
        assert_eq!(partitions(&[1]).len(), 1);
        assert_eq!(partitions(&[1, 2]).len(), 2);
        assert_eq!(partitions(&[1, 2, 3]).len(), 5);
        assert_eq!(partitions(&[1, 2, 3, 4]).len(), 15);
    }

    #[test]
    fn two_element_partitions_in_order() {
        let ps = partitions(&['i', 'j']);
        assert_eq!(ps[0], vec![vec!['i', 'j']]);
        assert_eq!(ps[1], vec![vec!['i'], vec!['j']]);
    }
}
