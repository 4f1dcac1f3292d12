//! Parallel vs sequential throughput on the two data-parallel inner loops:
//! bounded oracle execution and VC generation over basic paths.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, Criterion};

use txguard::basicpath::build_paths;
use txguard::invgen::CandidateInv;
use txguard::lang::instrument::QueryIds;
use txguard::lang::{inline_calls, instrument_arith, parse, tag_user_queries};
use txguard::logic::Formula;
use txguard::oracle::{oracle_run, oracle_run_sequential, OracleConfig};
use txguard::parallel::{map_serial, pmap};
use txguard::vcgen::gen_vc;

const TOKEN: &str = r#"
contract BenchToken {
    mapping(address => uint) balance;
    uint totalSupply;

    constructor() {
        totalSupply = 100;
        balance[msg.sender] = 100;
    }

    function transfer(address to, uint value) public {
        require(balance[msg.sender] >= value);
        balance[msg.sender] -= value;
        balance[to] += value;
    }

    function transferFrom(address from, address to, uint value) public {
        require(balance[from] >= value);
        balance[to] += value;
        balance[from] -= value;
    }

    function burn(uint value) public {
        require(balance[msg.sender] >= value);
        balance[msg.sender] -= value;
        totalSupply -= value;
    }
}
"#;

fn prepared() -> txguard::lang::ast::Contract {
    let parsed = parse(TOKEN).expect("bench contract parses");
    let inlined = inline_calls(&parsed, 2);
    let mut ids = QueryIds::new();
    let instrumented = instrument_arith(&inlined, &mut ids);
    tag_user_queries(&instrumented, &mut ids)
}

fn bench_oracle(c: &mut Criterion) {
    let contract = prepared();
    let cfg = OracleConfig { width: 4, max_tx: 2, max_domain: 2, ..OracleConfig::default() };
    let mut group = c.benchmark_group("oracle_bounded_execution");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| oracle_run(&contract, &cfg).expect("oracle runs"))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| oracle_run_sequential(&contract, &cfg).expect("oracle runs"))
    });
    group.finish();
}

fn bench_vcgen(c: &mut Criterion) {
    let contract = prepared();
    let labels = contract.loop_labels();
    let trivial = CandidateInv::trivial(&labels);
    let mu: BTreeMap<_, Formula> = trivial.mu_formulas();
    let paths = build_paths(&contract, &Formula::True, &mu, 256);
    // replicate so the map has enough work per item batch
    let many: Vec<_> = paths.iter().cycle().take(512).cloned().collect();

    let mut group = c.benchmark_group("vc_generation");
    group.bench_function("parallel", |b| b.iter(|| pmap(&many, gen_vc)));
    group.bench_function("sequential", |b| b.iter(|| map_serial(&many, gen_vc)));
    group.finish();
}

criterion_group!(benches, bench_oracle, bench_vcgen);
criterion_main!(benches);
