use std::collections::BTreeMap;
use std::time::Duration;

use txguard::basicpath::build_paths;
use txguard::lang::instrument::QueryIds;
use txguard::lang::{inline_calls, instrument_arith, parse, tag_user_queries};
use txguard::logic::{Formula, Rel, Term, Var};
use txguard::solver::{eliminate_sum, smtlib_script, Solver, SolverConfig};
use txguard::vcgen::gen_vc;

fn main() {
    let source = std::fs::read_to_string("fixtures/btx_token.sol-core").unwrap();
    let parsed = parse(&source).unwrap();
    let inlined = inline_calls(&parsed, 2);
    let mut ids = QueryIds::new();
    let c = tag_user_queries(&instrument_arith(&inlined, &mut ids), &mut ids);

    let psi = Formula::atom(
        Rel::Eq,
        Term::sum(Term::Var(Var::map("balance"))),
        Term::Const(txguard::logic::Const::from_u64(10000, 256)),
    );
    let mu = BTreeMap::new();
    let paths = build_paths(&c, &psi, &mu, 256);
    let solver = Solver::new(SolverConfig {
        timeout: Duration::from_secs(120),
        ..SolverConfig::default()
    });
    for (i, p) in paths.iter().enumerate() {
        let vc = gen_vc(p);
        println!("== path {} ({}) ==", i + 1, p.function);
        println!("  inductiveness: {}", vc.inductiveness);
        let simplified = vc.inductiveness.simplify();
        let sum_free = eliminate_sum(&simplified, 256).unwrap();
        let script = smtlib_script(&sum_free, 256, 160);
        println!("  script bytes: {}", script.len());
        let t = std::time::Instant::now();
        let verdict = solver.check_validity(&vc.inductiveness).unwrap();
        println!("  verdict: {verdict:?} in {:?}", t.elapsed());
        for (meta, clause) in &vc.safety {
            let t = std::time::Instant::now();
            let v = solver.check_validity(clause).unwrap();
            println!("  safety {:?}: {v:?} in {:?}", meta.map(|m| m.id), t.elapsed());
        }
    }
}
