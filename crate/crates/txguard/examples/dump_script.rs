use std::collections::BTreeMap;

use txguard::basicpath::build_paths;
use txguard::lang::instrument::QueryIds;
use txguard::lang::{inline_calls, instrument_arith, parse, tag_user_queries};
use txguard::logic::{Formula, Rel, Term, Var};
use txguard::solver::{eliminate_sum, smtlib_script};
use txguard::vcgen::gen_vc;

fn main() {
    let width: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let aw: u32 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(160);
    let source = std::fs::read_to_string("fixtures/btx_token.sol-core").unwrap();
    let parsed = parse(&source).unwrap();
    let inlined = inline_calls(&parsed, 2);
    let mut ids = QueryIds::new();
    let c = tag_user_queries(&instrument_arith(&inlined, &mut ids), &mut ids);
    let psi = Formula::atom(
        Rel::Eq,
        Term::sum(Term::Var(Var::map("balance"))),
        Term::Const(txguard::logic::Const::from_u64(10000, width)),
    );
    let mu = BTreeMap::new();
    let paths = build_paths(&c, &psi, &mu, width);
    for (i, p) in paths.iter().enumerate() {
        let vc = gen_vc(p);
        let simplified = vc.inductiveness.simplify();
        let sum_free = eliminate_sum(&simplified, width).unwrap();
        let script = smtlib_script(&sum_free, width, aw);
        std::fs::write(format!("/tmp/vc_path{}.smt2", i + 1), script).unwrap();
    }
    eprintln!("wrote /tmp/vc_path*.smt2");
}
